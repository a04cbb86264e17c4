"""Parameter checkpoint container.

Layout, version 1::

    ATTNCKPT 1\\n
    <header length in bytes, decimal ASCII>\\n
    <header: UTF-8 JSON with sorted keys>
    <payload: concatenated little-endian float64 arrays, row-major>

The header holds ``metadata`` (free-form JSON, e.g. model config and
vocabularies) and ``tensors``, a list of ``{name, shape, offset}`` entries in
payload order. Values round-trip bit-exactly and equal inputs produce equal
bytes.
"""

import os
import json
import hashlib
import logging
from collections import OrderedDict
from typing import Mapping, Tuple
import numpy as np
from common.errors import ParseError

_log = logging.getLogger(__name__)
MAGIC = b'ATTNCKPT'
FORMAT_VERSION = 1


def _to_array(value) -> np.ndarray:
    data = getattr(value, 'data', value)
    return np.ascontiguousarray(data, dtype='<f8')


def save_checkpoint(pathname: str, params: Mapping, metadata: dict=None) -> str:
    entries, chunks, offset = [], [], 0
    for name, value in params.items():
        array = _to_array(value)
        entries.append({'name': name, 'shape': list(array.shape), 'offset': offset})
        raw = array.tobytes(order='C')
        chunks.append(raw)
        offset += len(raw)
    header = json.dumps({'format': FORMAT_VERSION, 'metadata': metadata or {}, 'tensors': entries},
                        sort_keys=True, separators=(',', ':')).encode('utf-8')
    tmp_pathname = pathname + '.tmp'
    with open(tmp_pathname, 'wb') as ofile:
        ofile.write(MAGIC + b' ' + str(FORMAT_VERSION).encode('ascii') + b'\n')
        ofile.write(str(len(header)).encode('ascii') + b'\n')
        ofile.write(header)
        for raw in chunks:
            ofile.write(raw)
    os.replace(tmp_pathname, pathname)
    _log.debug("wrote %d tensors (%d bytes) to %s", len(entries), offset, pathname)
    return pathname


def load_checkpoint(pathname: str) -> Tuple[dict, "OrderedDict[str, np.ndarray]"]:
    with open(pathname, 'rb') as ifile:
        first = ifile.readline().rstrip(b'\n').split(b' ')
        if len(first) != 2 or first[0] != MAGIC:
            raise ParseError(pathname, 1, "not a checkpoint file")
        if int(first[1]) != FORMAT_VERSION:
            raise ParseError(pathname, 1, "unsupported checkpoint version {}".format(first[1].decode('ascii')))
        try:
            header_length = int(ifile.readline())
            header = json.loads(ifile.read(header_length).decode('utf-8'))
        except ValueError as e:
            raise ParseError(pathname, 2, "corrupt header: {}".format(e))
        payload = ifile.read()
    tensors = OrderedDict()
    for entry in header['tensors']:
        count = int(np.prod(entry['shape'], dtype=np.int64))
        start = entry['offset']
        if start + 8 * count > len(payload):
            raise ParseError(pathname, 3, "payload truncated at tensor {}".format(entry['name']))
        array = np.frombuffer(payload, dtype='<f8', count=count, offset=start)
        tensors[entry['name']] = array.reshape(entry['shape']).astype(np.float64)
    return header['metadata'], tensors


def checkpoint_digest(pathname: str) -> str:
    digest = hashlib.sha256()
    with open(pathname, 'rb') as ifile:
        for block in iter(lambda: ifile.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()
