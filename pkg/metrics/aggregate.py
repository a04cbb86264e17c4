"""Per-POS aggregation of token records.

All reductions walk the records in the given order and classes are reported
sorted by tag, so equal inputs give bit-identical results. Means are over
tokens (micro-averages).
"""

import json
import logging
from collections import OrderedDict
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple
from common.errors import ConfigError, UndefinedCorrelation
from corpus.annotations import TokenAnnotation
from metrics.measures import spearman
from metrics.records import TokenRecord

_log = logging.getLogger(__name__)

MEASURES = ('attention_loss', 'word_prediction_loss', 'attention_entropy')
DEFAULT_MIN_COUNT = 2


def group_by_pos(records: Iterable[TokenRecord]) -> "OrderedDict[str, List[TokenRecord]]":
    groups = {}  # type: Dict[str, List[TokenRecord]]
    for record in records:
        groups.setdefault(record.pos, []).append(record)
    return OrderedDict((pos, groups[pos]) for pos in sorted(groups))


def _mean(values: Sequence[float]) -> float:
    total = 0.0
    for v in values:
        total += v
    return total / len(values)


class PosSummary(NamedTuple):

    count: int
    attention_loss: float
    word_prediction_loss: float
    attention_entropy: float
    aligned_count: int
    mean_aligned_sources: Optional[float]  # over aligned tokens only

    def to_dict(self) -> dict:
        return dict(self._asdict())


def summarize(records: Sequence[TokenRecord]) -> PosSummary:
    aligned = [r for r in records if r.aligned]
    return PosSummary(
        count=len(records),
        attention_loss=_mean([r.attention_loss for r in records]),
        word_prediction_loss=_mean([r.word_prediction_loss for r in records]),
        attention_entropy=_mean([r.attention_entropy for r in records]),
        aligned_count=len(aligned),
        mean_aligned_sources=_mean([len(r.aligned_sources) for r in aligned]) if aligned else None,
    )


def aggregate_by_pos(records: Iterable[TokenRecord]) -> "OrderedDict[str, PosSummary]":
    return OrderedDict((pos, summarize(group)) for pos, group in group_by_pos(records).items())


class Correlation(NamedTuple):

    rho: float
    count: int


class CorrelationTable(NamedTuple):
    """Rank correlations per POS over tokens pooled across the corpus."""

    measure_x: str
    measure_y: str
    reported: "OrderedDict[str, Correlation]"
    flagged: "OrderedDict[str, str]"  # POS -> reason it is not reported

    def to_dict(self) -> dict:
        return {
            'measure_x': self.measure_x,
            'measure_y': self.measure_y,
            'pooling': 'tokens',
            'reported': OrderedDict((pos, c._asdict()) for pos, c in self.reported.items()),
            'flagged': self.flagged,
        }


def correlate_by_pos(records: Iterable[TokenRecord], measure_x: str, measure_y: str,
                     min_count: int=DEFAULT_MIN_COUNT) -> CorrelationTable:
    for measure in (measure_x, measure_y):
        assert measure in MEASURES, "unknown measure {}".format(measure)
    min_count = max(min_count, 2)
    reported, flagged = OrderedDict(), OrderedDict()
    for pos, group in group_by_pos(records).items():
        if len(group) < min_count:
            flagged[pos] = "only {} tokens (minimum {})".format(len(group), min_count)
            continue
        try:
            rho = spearman([r.measure(measure_x) for r in group], [r.measure(measure_y) for r in group])
        except UndefinedCorrelation as e:
            flagged[pos] = str(e)
            continue
        reported[pos] = Correlation(rho, len(group))
    if flagged:
        _log.debug("%s vs %s: %d POS classes not reported", measure_x, measure_y, len(flagged))
    return CorrelationTable(measure_x, measure_y, reported, flagged)


class MassRow(NamedTuple):

    count: int
    to_alignment: float  # percent
    to_other: float  # percent

    def to_dict(self) -> dict:
        return dict(self._asdict())


class MassTable(NamedTuple):
    """Attention mass on alignment points versus the rest, per POS, in percent.

    Unaligned target tokens are left out and counted in ``unaligned``; the
    overall row is weighted by tokens.
    """

    rows: "OrderedDict[str, MassRow]"
    overall: Optional[MassRow]
    unaligned: "OrderedDict[str, int]"

    def to_dict(self) -> dict:
        return {
            'rows': OrderedDict((pos, row.to_dict()) for pos, row in self.rows.items()),
            'overall': None if self.overall is None else self.overall.to_dict(),
            'overall_weighting': 'tokens',
            'unaligned': self.unaligned,
        }


def _mass_row(records: Sequence[TokenRecord]) -> MassRow:
    share = _mean([r.mass_on_alignment for r in records])
    return MassRow(len(records), 100.0 * share, 100.0 * (1.0 - share))


def mass_by_pos(records: Iterable[TokenRecord]) -> MassTable:
    rows, unaligned = OrderedDict(), OrderedDict()
    everything = []
    for pos, group in group_by_pos(records).items():
        aligned = [r for r in group if r.aligned]
        if len(aligned) < len(group):
            unaligned[pos] = len(group) - len(aligned)
        if aligned:
            rows[pos] = _mass_row(aligned)
            everything.extend(aligned)
    return MassTable(rows, _mass_row(everything) if everything else None, unaligned)


class RoleMerge(NamedTuple):
    """How source dependency roles are grouped before attention mass is summed.

    Source tokens whose POS tag is in ``punc_tags`` count as ``punc`` whatever
    their role; ``groups`` maps individual role labels onto a shared label.
    """

    punc_tags: frozenset
    groups: Mapping[str, str]

    PUNC = 'punc'

    @classmethod
    def create(cls, punc_tags: Iterable[str]=None, groups: Mapping[str, str]=None):
        return cls(frozenset(DEFAULT_PUNC_TAGS if punc_tags is None else punc_tags),
                   dict(DEFAULT_ROLE_GROUPS if groups is None else groups))

    @classmethod
    def from_dict(cls, values: Mapping):
        unknown = set(values) - {'punc_tags', 'groups'}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown role merge setting")
        return cls.create(values.get('punc_tags'), values.get('groups'))

    def resolve(self, role: str, pos: str) -> str:
        if pos in self.punc_tags:
            return self.PUNC
        return self.groups.get(role, role)


DEFAULT_PUNC_TAGS = ('$.', '$,', '$(', 'PUNC', 'PUNCT')
DEFAULT_ROLE_GROUPS = {
    'obja': 'obj', 'obja2': 'obj', 'objd': 'obj', 'objg': 'obj', 'obji': 'obj', 'objc': 'obj', 'objp': 'obj',
    'kon': 'conj', 'konj': 'conj', 'cj': 'conj', 'conj': 'conj',
}


def load_role_merge(pathname: str) -> RoleMerge:
    with open(pathname, 'r', encoding='utf-8') as ifile:
        try:
            values = json.load(ifile)
        except ValueError as e:
            raise ConfigError('role_merge', "{} is not valid JSON: {}".format(pathname, e))
    if not isinstance(values, dict):
        raise ConfigError('role_merge', "{} must hold a JSON object".format(pathname))
    return RoleMerge.from_dict(values)


class RoleTable(NamedTuple):

    shares: "OrderedDict[str, OrderedDict]"  # target POS -> role -> share of non-alignment mass
    mass: "OrderedDict[str, float]"  # target POS -> non-alignment mass summed over tokens
    excluded_sentences: Tuple[int, ...]

    def to_dict(self) -> dict:
        return {'shares': self.shares, 'mass': self.mass, 'excluded_sentences': list(self.excluded_sentences)}


def role_distribution(records: Iterable[TokenRecord], source_annotations: Mapping[int, TokenAnnotation],
                      merge: RoleMerge=None) -> RoleTable:
    """Distribute each aligned target token's attention to non-aligned sources over source roles.

    Sentences without a source annotation of the right length are excluded and listed.
    """
    merge = merge or RoleMerge.create()
    totals = {}  # type: Dict[str, Dict[str, float]]
    excluded = set()
    for record in records:
        annotation = source_annotations.get(record.sentence_id)
        if annotation is None or annotation.length != len(record.attention):
            excluded.add(record.sentence_id)
            continue
        if not record.aligned:
            continue
        roles = totals.setdefault(record.pos, {})
        aligned = set(record.aligned_sources)
        for i, weight in enumerate(record.attention):
            if i in aligned:
                continue
            role = merge.resolve(annotation.roles[i], annotation.pos[i])
            roles[role] = roles.get(role, 0.0) + float(weight)
    shares, mass = OrderedDict(), OrderedDict()
    for pos in sorted(totals):
        total = 0.0
        for value in totals[pos].values():
            total += value
        if total <= 0.0:
            continue
        ranked = sorted(totals[pos].items(), key=lambda item: (-item[1], item[0]))
        shares[pos] = OrderedDict((role, value / total) for role, value in ranked)
        mass[pos] = total
    if excluded:
        _log.warning("%d sentences without usable source annotation left out of the role distribution", len(excluded))
    return RoleTable(shares, mass, tuple(sorted(excluded)))
