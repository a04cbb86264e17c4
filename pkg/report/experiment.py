"""Toy-task comparison of the two attention variants.

Both variants are trained on the same synthetic lexicon-translation corpus and
scored on its held-out part by attention AER and mean attention loss against
the alignments known by construction.
"""

import logging
from collections import OrderedDict
from typing import Dict, List, NamedTuple, Sequence
import numpy as np
from alignment.aer import corpus_aer
from alignment.soft import attention_to_hard
from corpus import synthetic
from corpus.synthetic import ToyCorpus
from corpus.vocab import Vocabulary
from metrics.analysis import analyze
from nmt.config import ModelConfig, ATTENTION_VARIANTS, preset
from nmt.decoding import force_decode_corpus
from nmt.model import AttentionModel
from nmt.training import train

_log = logging.getLogger(__name__)


class VariantResult(NamedTuple):

    attention: str
    seed: int
    aer: float
    attention_loss: float
    word_prediction_loss: float
    initial_training_loss: float
    final_training_loss: float
    uniform_aer: float

    def to_dict(self) -> dict:
        return dict(self._asdict())


def uniform_attention_aer(test_part: ToyCorpus) -> float:
    """AER of attention spread evenly over the source; its argmax links every target word to the first source word."""
    candidates = [attention_to_hard(np.full((len(p.target), len(p.source)), 1.0 / len(p.source))) for p in test_part.pairs]
    return corpus_aer(candidates, test_part.alignments)


def run_variant(train_part: ToyCorpus, test_part: ToyCorpus, config: ModelConfig) -> VariantResult:
    source_vocab = Vocabulary.build([p.source for p in train_part.pairs], config.max_vocab)
    target_vocab = Vocabulary.build([p.target for p in train_part.pairs], config.max_vocab)
    model = AttentionModel.create(config, source_vocab, target_vocab)
    history = train(model, train_part.pairs)
    export = [d.to_record() for d in force_decode_corpus(model, test_part.pairs)]
    golds = {p.sentence_id: a for p, a in zip(test_part.pairs, test_part.alignments)}
    targets = {a.sentence_id: a for a in test_part.target_annotations}
    report = analyze(export, golds, targets)
    result = VariantResult(config.attention, config.seed, report.attention_aer.aer, report.mean('attention_loss'),
                           report.mean('word_prediction_loss'), history[0].mean_loss, history[-1].mean_loss,
                           uniform_attention_aer(test_part))
    _log.info("%s seed %d: AER %.4f (uniform %.4f), attention loss %.4f", result.attention, result.seed, result.aer,
              result.uniform_aer, result.attention_loss)
    return result


def compare_variants(seeds: Sequence[int], nsentences: int=2000, ntest: int=200, config: ModelConfig=None,
                     variants: Sequence[str]=ATTENTION_VARIANTS) -> List[VariantResult]:
    """Train every variant once per seed; the toy corpus depends on the seed too."""
    config = config or preset('desk')
    results = []
    for seed in seeds:
        corpus = synthetic.generate_toy_corpus(nsentences + ntest, seed=seed)
        train_part, test_part = synthetic.split_toy_corpus(corpus, ntest)
        for variant in variants:
            results.append(run_variant(train_part, test_part, config.replace(attention=variant, seed=seed)))
    return results


def summarize_results(results: Sequence[VariantResult]) -> "OrderedDict[str, Dict[str, float]]":
    """Mean AER and attention loss per variant over seeds."""
    summary = OrderedDict()
    for variant in sorted(set(r.attention for r in results)):
        chosen = [r for r in results if r.attention == variant]
        summary[variant] = OrderedDict([
            ('runs', len(chosen)),
            ('aer', sum(r.aer for r in chosen) / len(chosen)),
            ('uniform_aer', sum(r.uniform_aer for r in chosen) / len(chosen)),
            ('attention_loss', sum(r.attention_loss for r in chosen) / len(chosen)),
            ('word_prediction_loss', sum(r.word_prediction_loss for r in chosen) / len(chosen)),
        ])
    return summary
