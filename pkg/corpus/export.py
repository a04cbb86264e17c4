"""Attention export: one JSON object per line, one line per sentence.

Keys: ``id``, ``source`` and ``target`` token lists, ``attention`` (one row
per target token, one column per source token), ``losses`` (per-step word
prediction loss) and ``unk`` (target positions that were out of vocabulary).
Floats are written with ``repr`` precision so reading back is exact.
"""

import json
import logging
from typing import Iterable, List, NamedTuple, Tuple
import numpy as np
from common.errors import ParseError

_log = logging.getLogger(__name__)


class AttentionRecord(NamedTuple):

    sentence_id: int
    source: Tuple[str, ...]
    target: Tuple[str, ...]
    attention: np.ndarray
    losses: Tuple[float, ...]
    unk: Tuple[int, ...] = ()

    def to_json(self) -> str:
        return json.dumps({
            'id': self.sentence_id,
            'source': list(self.source),
            'target': list(self.target),
            'attention': [[float(v) for v in row] for row in self.attention],
            'losses': [float(v) for v in self.losses],
            'unk': list(self.unk),
        }, ensure_ascii=False)


def parse_record(line: str, pathname: str='<string>', lineno: int=1) -> AttentionRecord:
    try:
        obj = json.loads(line)
        record = AttentionRecord(int(obj['id']), tuple(obj['source']), tuple(obj['target']),
                                 np.array(obj['attention'], dtype=np.float64),
                                 tuple(float(v) for v in obj['losses']), tuple(obj.get('unk', ())))
    except (ValueError, KeyError, TypeError) as e:
        raise ParseError(pathname, lineno, "bad export record: {}".format(e))
    if record.attention.shape != (len(record.target), len(record.source)):
        raise ParseError(pathname, lineno, "attention shape {} does not match {} target x {} source tokens".format(
            record.attention.shape, len(record.target), len(record.source)))
    if len(record.losses) != len(record.target):
        raise ParseError(pathname, lineno, "{} losses for {} target tokens".format(len(record.losses), len(record.target)))
    return record


def write_export(pathname: str, records: Iterable[AttentionRecord]) -> int:
    count = 0
    with open(pathname, 'w', encoding='utf-8') as ofile:
        for record in records:
            print(record.to_json(), file=ofile)
            count += 1
    _log.debug("wrote %d attention records to %s", count, pathname)
    return count


def read_export(pathname: str) -> List[AttentionRecord]:
    records = []
    with open(pathname, 'r', encoding='utf-8') as ifile:
        for lineno, line in enumerate(ifile, 1):
            if line.strip():
                records.append(parse_record(line, pathname, lineno))
    return records
