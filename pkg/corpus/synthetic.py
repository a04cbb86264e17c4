"""Synthetic lexicon-translation task with local reorderings.

Every source word has exactly one target translation. Sentences follow
``NP VERB [ADV] NP .``; the target side moves adjectives behind their noun and
the adverb in front of the verb, so the gold alignment is a known permutation.
Source annotations use an STTS-style punctuation tag (``$.``) and dependency
roles resembling a German parser's output; target annotations use universal
POS tags.
"""

import os
import logging
from typing import List, NamedTuple, Tuple
import numpy as np
from corpus.alignments import HardAlignmentSet, write_alignments
from corpus.annotations import TokenAnnotation, write_annotations
from corpus.parallel import SentencePair, write_sentences

_log = logging.getLogger(__name__)

LEXICON_SIZES = (('det', 4), ('adj', 10), ('noun', 24), ('verb', 12), ('adv', 6))
_UNIVERSAL = {'det': 'DET', 'adj': 'ADJ', 'noun': 'NOUN', 'verb': 'VERB', 'adv': 'ADV', 'punc': 'PUNC'}
_SOURCE_POS = {'det': 'ART', 'adj': 'ADJA', 'noun': 'NN', 'verb': 'VVFIN', 'adv': 'ADV', 'punc': '$.'}


class ToyCorpus(NamedTuple):

    pairs: List[SentencePair]
    alignments: List[HardAlignmentSet]
    source_annotations: List[TokenAnnotation]
    target_annotations: List[TokenAnnotation]


def source_word(word_class: str, k: int) -> str:
    return "{}{}".format(word_class, k)


def target_word(word_class: str, k: int) -> str:
    return "{}{}".format(word_class.upper(), k)


def _noun_phrase(rng: np.random.Generator, role: str):
    """Return source items and the target order as indexes into them."""
    items = []
    if rng.random() < 0.7:
        items.append(('det', int(rng.integers(LEXICON_SIZES[0][1])), 'det'))
    nadj = int(rng.choice([0, 1, 2], p=[0.5, 0.35, 0.15]))
    for _ in range(nadj):
        items.append(('adj', int(rng.integers(LEXICON_SIZES[1][1])), 'attr'))
    items.append(('noun', int(rng.integers(LEXICON_SIZES[2][1])), role))
    noun = len(items) - 1
    dets = [k for k, it in enumerate(items) if it[0] == 'det']
    adjs = [k for k, it in enumerate(items) if it[0] == 'adj']
    return items, dets + [noun] + adjs, noun


def generate_sentence(rng: np.random.Generator):
    subject, subject_order, subject_noun = _noun_phrase(rng, 'subj')
    obj, obj_order, obj_noun = _noun_phrase(rng, 'obja')
    items = list(subject)
    verb = len(items)
    items.append(('verb', int(rng.integers(LEXICON_SIZES[3][1])), 'root'))
    adverb = None
    if rng.random() < 0.4:
        adverb = len(items)
        items.append(('adv', int(rng.integers(LEXICON_SIZES[4][1])), 'adv'))
    offset = len(items)
    items.extend(obj)
    punc = len(items)
    items.append(('punc', 0, 'root'))
    order = list(subject_order)
    if adverb is not None:
        order.append(adverb)
    order.append(verb)
    order.extend(offset + k for k in obj_order)
    order.append(punc)
    heads = []
    for k, (cls, _, role) in enumerate(items):
        if cls in ('det', 'adj'):
            heads.append(1 + (subject_noun if k < verb else offset + obj_noun))
        elif cls in ('noun', 'adv'):
            heads.append(1 + verb)
        else:
            heads.append(0)
    return items, order, heads


def generate_toy_corpus(nsentences: int, seed: int=0) -> ToyCorpus:
    rng = np.random.default_rng(seed)
    pairs, alignments, src_ann, tgt_ann = [], [], [], []
    for sentence_id in range(1, nsentences + 1):
        items, order, heads = generate_sentence(rng)
        source = tuple('.' if cls == 'punc' else source_word(cls, k) for cls, k, _ in items)
        target = tuple('.' if items[i][0] == 'punc' else target_word(items[i][0], items[i][1]) for i in order)
        pairs.append(SentencePair(sentence_id, source, target))
        alignments.append(HardAlignmentSet.create([(i, t) for t, i in enumerate(order)]))
        src_ann.append(TokenAnnotation(sentence_id, source, tuple(_SOURCE_POS[cls] for cls, _, _ in items),
                                       tuple(role for _, _, role in items), tuple(heads)))
        tgt_ann.append(TokenAnnotation(sentence_id, target, tuple(_UNIVERSAL[items[i][0]] for i in order),
                                       tuple('_' for _ in order), tuple(None for _ in order)))
    _log.debug("generated %d toy sentence pairs (seed %s)", nsentences, seed)
    return ToyCorpus(pairs, alignments, src_ann, tgt_ann)


def split_toy_corpus(corpus: ToyCorpus, ntest: int) -> Tuple[ToyCorpus, ToyCorpus]:
    """Last ``ntest`` sentences form the test part; test ids are renumbered from 1."""
    cut = len(corpus.pairs) - ntest
    assert 0 < cut < len(corpus.pairs), "test part must leave a non-empty training part"
    train = ToyCorpus(*(field[:cut] for field in corpus))
    test = ToyCorpus(
        [p._replace(sentence_id=k + 1) for k, p in enumerate(corpus.pairs[cut:])],
        corpus.alignments[cut:],
        [a._replace(sentence_id=k + 1) for k, a in enumerate(corpus.source_annotations[cut:])],
        [a._replace(sentence_id=k + 1) for k, a in enumerate(corpus.target_annotations[cut:])])
    return train, test


def toy_file_names(directory: str, prefix: str) -> dict:
    stem = os.path.join(directory, prefix)
    return {
        'source': stem + '.src',
        'target': stem + '.tgt',
        'alignments': stem + '.align',
        'source_annotations': stem + '.src.ann',
        'target_annotations': stem + '.tgt.ann',
    }


def write_toy_corpus(directory: str, prefix: str, corpus: ToyCorpus) -> dict:
    names = toy_file_names(directory, prefix)
    write_sentences(names['source'], [p.source for p in corpus.pairs])
    write_sentences(names['target'], [p.target for p in corpus.pairs])
    write_alignments(names['alignments'], corpus.alignments)
    write_annotations(names['source_annotations'], corpus.source_annotations)
    write_annotations(names['target_annotations'], corpus.target_annotations)
    return names
