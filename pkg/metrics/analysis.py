"""Assemble the full analysis of an attention export against gold alignments."""

import logging
from collections import OrderedDict
from typing import List, Mapping, NamedTuple, Optional, Sequence
from alignment.aer import AerCounts, corpus_counts
from alignment.soft import attention_to_hard
from corpus.alignments import HardAlignmentSet
from corpus.annotations import TokenAnnotation
from corpus.export import AttentionRecord
from metrics.aggregate import (PosSummary, CorrelationTable, MassTable, RoleMerge, RoleTable,
                               aggregate_by_pos, correlate_by_pos, mass_by_pos, role_distribution,
                               DEFAULT_MIN_COUNT)
from metrics.records import TokenRecord, build_token_records

_log = logging.getLogger(__name__)

SCHEMA = 'attnalign.analysis/1'
CORRELATION_PAIRS = (
    ('word_prediction_loss', 'attention_loss'),
    ('word_prediction_loss', 'attention_entropy'),
    ('attention_entropy', 'attention_loss'),
)


class GoldStatistics(NamedTuple):

    sentences: int
    links: int
    sure: int
    possible_only: int

    @classmethod
    def of(cls, golds: Sequence[HardAlignmentSet]):
        sure = sum(len(g.sure) for g in golds)
        possible_only = sum(len(g.possible_only) for g in golds)
        return cls(len(golds), sure + possible_only, sure, possible_only)

    def to_dict(self) -> dict:
        d = OrderedDict(self._asdict())
        d['sure_share'] = self.sure / self.links if self.links else None
        d['possible_share'] = self.possible_only / self.links if self.links else None
        return d


class AnalysisReport(NamedTuple):

    records: List[TokenRecord]
    by_pos: "OrderedDict[str, PosSummary]"
    correlations: List[CorrelationTable]
    mass: MassTable
    roles: Optional[RoleTable]
    attention_aer: Optional[AerCounts]
    gold: GoldStatistics
    include_possible: bool

    @property
    def token_count(self) -> int:
        return len(self.records)

    @property
    def sentence_count(self) -> int:
        return len(set(r.sentence_id for r in self.records))

    def mean(self, measure: str) -> Optional[float]:
        if not self.records:
            return None
        total = 0.0
        for r in self.records:
            total += r.measure(measure)
        return total / len(self.records)

    def global_values(self) -> dict:
        aer_value = None
        if self.attention_aer is not None and self.attention_aer.candidate + self.attention_aer.sure > 0:
            aer_value = self.attention_aer.aer
        return OrderedDict([
            ('tokens', self.token_count),
            ('sentences', self.sentence_count),
            ('mean_attention_loss', self.mean('attention_loss')),
            ('mean_attention_entropy', self.mean('attention_entropy')),
            ('mean_word_prediction_loss', self.mean('word_prediction_loss')),
            ('attention_aer', aer_value),
            ('attention_aer_counts', None if self.attention_aer is None else self.attention_aer.to_dict()),
            ('mass_on_alignment_percent', None if self.mass.overall is None else self.mass.overall.to_alignment),
            ('unaligned_tokens', sum(1 for r in self.records if not r.aligned)),
        ])

    def to_dict(self) -> dict:
        return OrderedDict([
            ('schema', SCHEMA),
            ('settings', OrderedDict([
                ('include_possible', self.include_possible),
                ('averaging', 'tokens'),
                ('log_base', 'e'),
            ])),
            ('global', self.global_values()),
            ('gold', self.gold.to_dict()),
            ('by_pos', OrderedDict((pos, s.to_dict()) for pos, s in self.by_pos.items())),
            ('correlations', [c.to_dict() for c in self.correlations]),
            ('mass', self.mass.to_dict()),
            ('roles', None if self.roles is None else self.roles.to_dict()),
        ])


def attention_aer(export: Sequence[AttentionRecord], golds: Mapping[int, HardAlignmentSet]) -> AerCounts:
    candidates = [attention_to_hard(r.attention) for r in export]
    return corpus_counts(candidates, [golds[r.sentence_id] for r in export])


def analyze(export: Sequence[AttentionRecord], golds: Mapping[int, HardAlignmentSet],
            target_annotations: Mapping[int, TokenAnnotation],
            source_annotations: Mapping[int, TokenAnnotation]=None,
            include_possible: bool=True, min_count: int=DEFAULT_MIN_COUNT,
            merge: RoleMerge=None) -> AnalysisReport:
    """Compute every per-token, per-POS and corpus-level measure for an attention export.

    Sentences are matched by id; the role distribution is computed only when
    source annotations are supplied.
    """
    records = build_token_records(export, golds, target_annotations, include_possible)
    by_pos = aggregate_by_pos(records)
    correlations = [correlate_by_pos(records, x, y, min_count) for x, y in CORRELATION_PAIRS]
    mass = mass_by_pos(records)
    roles = None
    if source_annotations is not None:
        roles = role_distribution(records, source_annotations, merge)
    counts = attention_aer(export, golds)
    gold = GoldStatistics.of([golds[r.sentence_id] for r in export])
    _log.info("analyzed %d tokens in %d sentences over %d POS classes", len(records), len(export), len(by_pos))
    return AnalysisReport(records, by_pos, correlations, mass, roles, counts, gold, include_possible)
