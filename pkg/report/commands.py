"""Subcommands of the command-line tool.

Every ``cmd_*`` function takes a RunConfig, writes its outputs and returns a
result object; ``execute`` wraps one and maps failures to exit codes.
"""

import os
import sys
import json
import logging
import platform
from collections import OrderedDict
from typing import Callable, Dict, List, Sequence
import numpy as np
import scipy
import matplotlib
from alignment.aer import AerCounts, corpus_counts
from alignment.soft import attention_to_hard
from alignment.symmetrize import symmetrize_gdfa, load_directed
from common.errors import AttnAlignError, ConfigError, ConsistencyError, UsageError
from corpus import synthetic
from corpus.alignments import HardAlignmentSet, load_alignments
from corpus.annotations import load_annotations
from corpus.export import read_export, write_export
from corpus.parallel import load_parallel, filter_by_length, read_sentences, write_sentences
from corpus.vocab import Vocabulary, RESERVED
from metrics.aggregate import RoleMerge, load_role_merge
from metrics.analysis import AnalysisReport, analyze
from metrics.records import by_sentence_id
from nmt.bleu import BleuScore, corpus_bleu, read_tokenized
from nmt.decoding import force_decode_corpus, translate_greedy
from nmt.model import AttentionModel
from nmt.training import EpochLog, train
from report.heatmap import HeatmapSpec, render_heatmap, heatmap_name
from report.runconfig import RunConfig, ensure_output_dir
from report.tables import write_report, write_flags
from tensorgrad.checkpoint import checkpoint_digest

_log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
MANIFEST = 'manifest.json'
TRAINING_LOG = 'training-log.json'
SOURCE_VOCAB = 'source.vocab'
TARGET_VOCAB = 'target.vocab'


def package_versions() -> Dict[str, str]:
    return OrderedDict([
        ('python', platform.python_version()),
        ('numpy', np.__version__),
        ('scipy', scipy.__version__),
        ('matplotlib', matplotlib.__version__),
    ])


def _write_json(pathname: str, value):
    with open(pathname, 'w', encoding='utf-8') as ofile:
        json.dump(value, ofile, indent=2, ensure_ascii=False)
        ofile.write('\n')
    return pathname


def cmd_train(config: RunConfig) -> List[EpochLog]:
    source_path, target_path = config.require('source', 'target')
    output_dir = ensure_output_dir(config.require_output())
    pairs = filter_by_length(load_parallel(source_path, target_path), config.model.max_length)
    if not pairs:
        raise UsageError('source', "no sentence pairs of at most {} tokens".format(config.model.max_length))
    source_vocab = Vocabulary.build([p.source for p in pairs], config.model.max_vocab)
    target_vocab = Vocabulary.build([p.target for p in pairs], config.model.max_vocab)
    source_vocab.save(os.path.join(output_dir, SOURCE_VOCAB))
    target_vocab.save(os.path.join(output_dir, TARGET_VOCAB))
    model = AttentionModel.create(config.model, source_vocab, target_vocab)
    _log.info("training %s model on %d pairs (vocabularies %d / %d)", model.config.attention, len(pairs),
              len(source_vocab), len(target_vocab))
    history = train(model, pairs, checkpoint_dir=output_dir)
    _write_json(os.path.join(output_dir, TRAINING_LOG), [h.to_dict() for h in history])
    checkpoints = [OrderedDict([('epoch', h.epoch), ('file', os.path.basename(h.checkpoint)),
                                ('sha256', checkpoint_digest(h.checkpoint))]) for h in history]
    manifest = OrderedDict([
        ('command', config.command),
        ('preset', config.preset),
        ('seed', config.seed),
        ('config', model.config.to_dict()),
        ('inputs', OrderedDict([('source', source_path), ('target', target_path)])),
        ('pairs', len(pairs)),
        ('versions', package_versions()),
        ('checkpoints', checkpoints),
        ('final_checkpoint', checkpoints[-1]['file']),
    ])
    _write_json(os.path.join(output_dir, MANIFEST), manifest)
    return history


def _coverage(vocab: Vocabulary, sentences: Sequence[Sequence[str]]) -> float:
    total, known = 0, 0
    for sentence in sentences:
        for token in sentence:
            total += 1
            known += token in vocab
    return known / total if total else 1.0


def load_model(config: RunConfig) -> AttentionModel:
    """Load the configured checkpoint, checking any vocabulary files given alongside it."""
    checkpoint, = config.require('checkpoint')
    model = AttentionModel.load(checkpoint)
    for key, vocab in (('source_vocab', model.source_vocab), ('target_vocab', model.target_vocab)):
        if config.path(key):
            pathname, = config.require(key)
            if Vocabulary.load(pathname) != vocab:
                raise ConfigError(key, "{} does not match the vocabulary stored in {}".format(pathname, checkpoint))
    return model


def _check_vocabulary_fit(model: AttentionModel, pairs):
    for key, vocab, sentences in (('source_vocab', model.source_vocab, [p.source for p in pairs]),
                                  ('target_vocab', model.target_vocab, [p.target for p in pairs])):
        coverage = _coverage(vocab, sentences)
        if coverage == 0.0 and len(vocab) > len(RESERVED):
            raise ConfigError(key, "no token of the data is known to the checkpoint vocabulary")
        if coverage < 0.5:
            _log.warning("only %.1f%% of the %s tokens are in the checkpoint vocabulary", 100 * coverage, key.split('_')[0])


def cmd_force_decode(config: RunConfig) -> int:
    model = load_model(config)
    source_path, target_path = config.require('source', 'target')
    export_path = config.require_output('export')
    pairs = load_parallel(source_path, target_path)
    _check_vocabulary_fit(model, pairs)
    total_loss, total_tokens = 0.0, 0
    records = []
    for decoded in force_decode_corpus(model, pairs):
        total_loss += sum(decoded.losses)
        total_tokens += len(decoded.losses)
        records.append(decoded.to_record())
    count = write_export(export_path, records)
    _log.info("exported attention for %d sentences to %s; mean token loss %.4f", count, export_path,
              total_loss / max(total_tokens, 1))
    return count


def cmd_translate(config: RunConfig) -> List[tuple]:
    model = load_model(config)
    source_path, = config.require('source')
    output = config.require_output('output')
    sources = read_sentences(source_path)
    translations = []
    nhit = 0
    for source in sources:
        if not source:
            translations.append(())
            continue
        translation = translate_greedy(model, source, config.max_length)
        nhit += translation.hit_max_length
        translations.append(translation.tokens)
    write_sentences(output, translations)
    if nhit:
        _log.warning("%d of %d translations stopped at the maximum length %d", nhit, len(sources), config.max_length)
    if config.path('references'):
        references, = config.require('references')
        score = corpus_bleu(translations, read_tokenized(references), smoothing=config.smoothing)
        print("BLEU\t{:.4f}".format(score.score))
    return translations


def cmd_bleu(config: RunConfig) -> BleuScore:
    candidates, references = config.require('candidates', 'references')
    score = corpus_bleu(read_tokenized(candidates), read_tokenized(references), smoothing=config.smoothing)
    print("BLEU\t{:.4f}".format(score.score))
    print("precisions\t{}".format(' '.join('{:.4f}'.format(p) for p in score.precisions)))
    print("brevity_penalty\t{:.4f}\tcandidate_length\t{}\treference_length\t{}".format(
        score.brevity_penalty, score.candidate_length, score.reference_length))
    return score


def load_golds(pathname: str) -> Dict[int, HardAlignmentSet]:
    return by_sentence_id(load_alignments(pathname))


def cmd_analyze(config: RunConfig) -> AnalysisReport:
    export_path, alignments_path, target_ann_path = config.require('export', 'alignments', 'target_annotations')
    output_dir = ensure_output_dir(config.require_output())
    export = read_export(export_path)
    if not export:
        raise ConsistencyError("{} holds no attention records".format(export_path))
    golds = load_golds(alignments_path)
    flagged = []
    targets = {a.sentence_id: a for a in load_annotations(target_ann_path, flagged=flagged)}
    sources = None
    if config.path('source_annotations'):
        source_ann_path, = config.require('source_annotations')
        sources = {a.sentence_id: a for a in load_annotations(source_ann_path, tagset=None)}
    merge = RoleMerge.create()
    if config.path('role_merge'):
        merge = load_role_merge(config.require('role_merge')[0])
    report = analyze(export, golds, targets, sources, include_possible=config.include_possible,
                     min_count=config.min_class_count, merge=merge)
    write_report(report, output_dir)
    if flagged:
        write_flags(flagged, output_dir)
    values = report.global_values()
    print("tokens\t{}".format(values['tokens']))
    print("mean_attention_loss\t{:.4f}".format(values['mean_attention_loss']))
    if values['attention_aer'] is not None:
        print("attention_aer\t{:.4f}".format(values['attention_aer']))
    return report


def cmd_heatmap(config: RunConfig) -> List[str]:
    export_path, = config.require('export')
    output_dir = ensure_output_dir(config.require_output())
    records = OrderedDict((r.sentence_id, r) for r in read_export(export_path))
    golds = load_golds(config.require('alignments')[0]) if config.path('alignments') else {}
    wanted = list(config.sentences) or list(records)
    unknown = [i for i in wanted if i not in records]
    if unknown:
        raise UsageError('sentences', "unknown sentence id {}; available: {}".format(
            ', '.join(map(str, unknown)), ', '.join(map(str, records))))
    written = []
    for sentence_id in wanted:
        spec = HeatmapSpec.from_record(records[sentence_id], golds.get(sentence_id))
        written.append(render_heatmap(spec, os.path.join(output_dir, heatmap_name(sentence_id))))
    _log.info("wrote %d heatmaps to %s", len(written), output_dir)
    return written


def _sentence_lengths(config: RunConfig, count: int, links: Sequence) -> List[tuple]:
    if config.path('source') and config.path('target'):
        pairs = load_parallel(*config.require('source', 'target'))
        if len(pairs) != count:
            raise ConsistencyError("{} sentence pairs for {} directed alignments".format(len(pairs), count))
        return [(len(p.source), len(p.target)) for p in pairs]
    lengths = []
    for union in links:
        lengths.append((1 + max([s for s, _ in union], default=-1), 1 + max([t for _, t in union], default=-1)))
    return lengths


def cmd_aer(config: RunConfig) -> "OrderedDict[str, AerCounts]":
    """AER of each configured candidate source against the gold alignments."""
    alignments_path, = config.require('alignments')
    gold_list = load_alignments(alignments_path)
    golds = by_sentence_id(gold_list)
    results = OrderedDict()
    if config.path('export'):
        export = read_export(config.require('export')[0])
        missing = [r.sentence_id for r in export if r.sentence_id not in golds]
        if missing:
            raise ConsistencyError("sentences missing from gold alignments", missing)
        candidates = [attention_to_hard(r.attention) for r in export]
        results['attention'] = corpus_counts(candidates, [golds[r.sentence_id] for r in export])
    if config.path('forward') or config.path('backward'):
        forward_path, backward_path = config.require('forward', 'backward')
        forward = load_directed(forward_path)
        backward = load_directed(backward_path, target_to_source=config.backward_reversed)
        if len(forward) != len(backward):
            raise ConsistencyError("{} forward and {} backward alignments".format(len(forward), len(backward)))
        lengths = _sentence_lengths(config, len(forward), [f | b for f, b in zip(forward, backward)])
        symmetrized = [symmetrize_gdfa(f, b, s, t) for f, b, (s, t) in zip(forward, backward, lengths)]
        results['forward'] = corpus_counts(forward, gold_list)
        results['backward'] = corpus_counts(backward, gold_list)
        results['gdfa'] = corpus_counts(symmetrized, gold_list)
    if config.path('candidates'):
        candidates = load_directed(config.require('candidates')[0])
        results['candidates'] = corpus_counts(candidates, gold_list)
    if not results:
        raise UsageError('export', "aer needs an attention export, forward and backward files, or a candidates file")
    for name, counts in results.items():
        print("{}\t{:.4f}".format(name, counts.aer))
    if config.path('output_dir'):
        output_dir = ensure_output_dir(config.path('output_dir'))
        _write_json(os.path.join(output_dir, 'aer.json'),
                    OrderedDict((name, counts.to_dict()) for name, counts in results.items()))
    return results


def cmd_make_toy(config: RunConfig) -> Dict[str, dict]:
    output_dir = ensure_output_dir(config.require_output())
    corpus = synthetic.generate_toy_corpus(config.toy_sentences + config.toy_test, seed=config.seed)
    train_part, test_part = synthetic.split_toy_corpus(corpus, config.toy_test)
    names = {
        'train': synthetic.write_toy_corpus(output_dir, 'train', train_part),
        'test': synthetic.write_toy_corpus(output_dir, 'test', test_part),
    }
    _log.info("wrote %d training and %d test sentence pairs to %s", len(train_part.pairs), len(test_part.pairs), output_dir)
    return names


COMMANDS = OrderedDict([
    ('train', cmd_train),
    ('force-decode', cmd_force_decode),
    ('translate', cmd_translate),
    ('bleu', cmd_bleu),
    ('analyze', cmd_analyze),
    ('heatmap', cmd_heatmap),
    ('aer', cmd_aer),
    ('make-toy', cmd_make_toy),
])


def execute(config: RunConfig, command: Callable[[RunConfig], object]=None) -> int:
    """Run a subcommand and translate its outcome into an exit code."""
    command = command or COMMANDS[config.command]
    try:
        command(config)
    except ConfigError as e:
        print("{}: {}".format(config.command, e), file=sys.stderr)
        return EXIT_USAGE
    except (AttnAlignError, OSError) as e:
        _log.debug("%s failed", config.command, exc_info=True)
        print("{}: {}".format(config.command, e), file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK
