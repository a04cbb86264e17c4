import logging
from collections import OrderedDict
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple
import numpy as np
from alignment.soft import to_soft
from common.errors import ConsistencyError
from corpus.alignments import HardAlignmentSet
from corpus.annotations import TokenAnnotation
from corpus.export import AttentionRecord
from metrics.measures import attention_loss, attention_entropy, mass_on_alignment

_log = logging.getLogger(__name__)


class TokenRecord(NamedTuple):
    """Measurements for one target token under forced decoding."""

    sentence_id: int
    position: int
    token: str
    pos: str
    attention: np.ndarray
    attention_loss: float
    attention_entropy: float
    word_prediction_loss: float
    aligned_sources: Tuple[int, ...]
    mass_on_alignment: Optional[float]  # None when the token is unaligned

    @property
    def aligned(self) -> bool:
        return bool(self.aligned_sources)

    def measure(self, name: str) -> float:
        return float(getattr(self, name))

    def csv_row(self) -> list:
        mass = '' if self.mass_on_alignment is None else repr(self.mass_on_alignment)
        return [self.sentence_id, self.position, self.token, self.pos, repr(self.attention_loss),
                repr(self.attention_entropy), repr(self.word_prediction_loss),
                ' '.join(str(s) for s in self.aligned_sources), mass]


CSV_HEADER = ['sentence_id', 'position', 'token', 'pos', 'attention_loss', 'attention_entropy',
              'word_prediction_loss', 'aligned_sources', 'mass_on_alignment']


def _check_ids(inputs: Mapping[str, Sequence[int]]):
    """Every sentence id must occur in every input; the error lists the ids that do not."""
    id_sets = {label: set(ids) for label, ids in inputs.items()}
    everywhere = set.intersection(*id_sets.values())
    stray = sorted(set.union(*id_sets.values()) - everywhere)
    if stray:
        missing_from = [label for label, ids in id_sets.items() if not set(stray) <= ids]
        raise ConsistencyError("sentence ids not present in every input (missing from {})".format(', '.join(missing_from)), stray)


def sentence_records(record: AttentionRecord, gold: HardAlignmentSet, target: TokenAnnotation,
                     include_possible: bool=True) -> List[TokenRecord]:
    src_len, tgt_len = len(record.source), len(record.target)
    if target.length != tgt_len:
        raise ConsistencyError("target annotation has {} tokens, export has {}".format(target.length, tgt_len), [record.sentence_id])
    try:
        soft = to_soft(gold, src_len, tgt_len, include_possible)
    except ValueError as e:
        raise ConsistencyError("gold alignment does not fit the sentence: {}".format(e), [record.sentence_id])
    tokens = []
    for t in range(tgt_len):
        row = record.attention[t]
        aligned = tuple(gold.sources_of(t, include_possible))
        tokens.append(TokenRecord(
            sentence_id=record.sentence_id,
            position=t,
            token=record.target[t],
            pos=target.pos[t],
            attention=row,
            attention_loss=attention_loss(soft[t], row),
            attention_entropy=attention_entropy(row),
            word_prediction_loss=float(record.losses[t]),
            aligned_sources=aligned,
            mass_on_alignment=mass_on_alignment(row, aligned) if aligned else None,
        ))
    return tokens


def build_token_records(export: Sequence[AttentionRecord], golds: Mapping[int, HardAlignmentSet],
                        target_annotations: Mapping[int, TokenAnnotation], include_possible: bool=True) -> List[TokenRecord]:
    """Join the attention export with gold alignments and target POS tags by sentence id.

    The export, the gold alignments and the target annotations must cover the
    same sentence ids.
    """
    ids = [r.sentence_id for r in export]
    if len(set(ids)) != len(ids):
        duplicates = sorted(i for i in set(ids) if ids.count(i) > 1)
        raise ConsistencyError("duplicate sentence ids in attention export", duplicates)
    _check_ids(OrderedDict([('attention export', ids), ('gold alignments', list(golds)),
                            ('target annotations', list(target_annotations))]))
    records = []  # type: List[TokenRecord]
    for record in export:
        records.extend(sentence_records(record, golds[record.sentence_id], target_annotations[record.sentence_id], include_possible))
    _log.debug("built %d token records from %d sentences", len(records), len(export))
    return records


def by_sentence_id(items: Sequence, start: int=1) -> Dict[int, object]:
    """Key line-ordered items (alignments, annotations without ids) by 1-based line number."""
    return {start + k: item for k, item in enumerate(items)}
