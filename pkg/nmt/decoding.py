"""Forced decoding along a reference and greedy translation.

Both run in evaluation mode with no tape active, so nothing is recorded and
dropout is the identity.
"""

import logging
from typing import Iterable, Iterator, List, NamedTuple, Sequence, Tuple
import numpy as np
from common.errors import ContractError
from corpus.export import AttentionRecord
from corpus.parallel import SentencePair
from nmt.model import AttentionModel, encode, initial_state, decode_step, output_logits
from tensorgrad.ops import log_softmax_array

_log = logging.getLogger(__name__)

DEFAULT_MAX_LENGTH = 100


def _encode_source(model: AttentionModel, source: Sequence[str]):
    if not source:
        raise ContractError("source sentence is empty")
    ids = np.array([model.source_vocab.encode(source)], dtype=np.int64)
    mask = np.ones(ids.shape, dtype=bool)
    return encode(ids, mask, model.params, model.config, training=False)


class ForcedDecoding(NamedTuple):

    sentence_id: int
    source: Tuple[str, ...]
    target: Tuple[str, ...]
    attention: np.ndarray  # (|y|, |x|)
    losses: Tuple[float, ...]  # -log p(y_t | y_<t, x)
    distributions: np.ndarray  # (|y|, |V|)
    unk: Tuple[int, ...]

    def steps(self) -> List[Tuple[np.ndarray, float, np.ndarray]]:
        return list(zip(self.attention, self.losses, self.distributions))

    def to_record(self) -> AttentionRecord:
        return AttentionRecord(self.sentence_id, self.source, self.target, self.attention, self.losses, self.unk)

    @property
    def mean_loss(self) -> float:
        return float(np.mean(self.losses))


def force_decode(model: AttentionModel, source: Sequence[str], reference: Sequence[str], sentence_id: int=0) -> ForcedDecoding:
    """Teacher-forced pass over ``reference``; out-of-vocabulary reference tokens are scored as UNK and flagged."""
    if not reference:
        raise ContractError("reference translation for sentence {} is empty".format(sentence_id))
    encoder_states = _encode_source(model, source)
    target_ids, unk = model.target_vocab.encode_flagged(reference)
    if unk:
        _log.debug("sentence %s: %d reference tokens mapped to UNK", sentence_id, len(unk))
    state = initial_state(encoder_states, model.config)
    prev = model.target_vocab.bos_id
    rows, losses, dists = [], [], []
    for gold in target_ids:
        state = decode_step([prev], state, encoder_states, model.params, model.config)
        log_probs = log_softmax_array(output_logits(state.attentional, model.params).data)[0]
        rows.append(state.attention.data[0])
        losses.append(float(-log_probs[gold]))
        dists.append(np.exp(log_probs))
        prev = gold
    return ForcedDecoding(sentence_id, tuple(source), tuple(reference), np.array(rows), tuple(losses), np.array(dists), tuple(unk))


def force_decode_corpus(model: AttentionModel, pairs: Iterable[SentencePair]) -> Iterator[ForcedDecoding]:
    for pair in pairs:
        yield force_decode(model, pair.source, pair.target, pair.sentence_id)


class Translation(NamedTuple):

    tokens: Tuple[str, ...]
    attention: np.ndarray  # one row per emitted token, EOS excluded
    hit_max_length: bool


def translate_greedy(model: AttentionModel, source: Sequence[str], max_len: int=DEFAULT_MAX_LENGTH) -> Translation:
    """Argmax decoding until EOS or ``max_len`` tokens."""
    assert max_len >= 1, "max_len must be positive"
    encoder_states = _encode_source(model, source)
    vocab = model.target_vocab
    state = initial_state(encoder_states, model.config)
    prev = vocab.bos_id
    ids, rows = [], []
    while len(ids) < max_len:
        state = decode_step([prev], state, encoder_states, model.params, model.config)
        logits = output_logits(state.attentional, model.params).data[0]
        prev = int(np.argmax(logits))
        if prev == vocab.eos_id:
            break
        ids.append(prev)
        rows.append(state.attention.data[0])
    hit_max = len(ids) >= max_len
    if hit_max:
        _log.debug("translation stopped at max length %d", max_len)
    attention = np.array(rows) if rows else np.zeros((0, len(source)))
    return Translation(tuple(vocab.decode(ids)), attention, hit_max)
