"""Unidirectional stacked-LSTM encoder-decoder with dot-product global attention.

Two attention variants share all code except the decoder input:

* ``non_recurrent``: the decoder reads only the previous target embedding and
  its top state h'_t scores the encoder states.
* ``input_feeding``: the first decoder layer reads ``[h~_{t-1}; y_{t-1}]`` and
  its top state h''_t scores the encoder states; h~_0 is the zero vector.

In both, ``h~_t = tanh(W_c [c_t; query])`` and ``p(y_t) = softmax(W_o h~_t)``.
"""

import logging
from collections import OrderedDict
from typing import List, NamedTuple, Optional, Tuple
import numpy as np
from common.errors import ConfigError, ContractError, ShapeError
from corpus.vocab import Vocabulary
from nmt.config import ModelConfig
from tensorgrad import ops
from tensorgrad.checkpoint import save_checkpoint, load_checkpoint
from tensorgrad.lstm import LSTMWeights, lstm_cell, uniform_init
from tensorgrad.tape import Parameter, Tensor

_log = logging.getLogger(__name__)

LayerStates = List[Tuple[Tensor, Tensor]]


def _init(shape, rng):
    return np.zeros(shape) if rng is None else uniform_init(shape, rng)


def init_parameters(config: ModelConfig, rng: np.random.Generator=None) -> "OrderedDict[str, Parameter]":
    """All trainable weights, uniform in [-0.08, 0.08] from ``rng``, or zeros when ``rng`` is None."""
    if config.src_vocab_size < 1 or config.tgt_vocab_size < 1:
        raise ConfigError('src_vocab_size' if config.src_vocab_size < 1 else 'tgt_vocab_size', "vocabulary size must be set")
    d = config.dim
    params = OrderedDict()
    params['src_embed'] = Parameter('src_embed', _init((config.src_vocab_size, d), rng))
    params['tgt_embed'] = Parameter('tgt_embed', _init((config.tgt_vocab_size, d), rng))
    for k in range(config.layers):
        for p in LSTMWeights.create('enc.{}'.format(k), d, d, rng):
            params[p.name] = p
    for k in range(config.layers):
        input_size = 2 * d if k == 0 and config.input_feeding else d
        for p in LSTMWeights.create('dec.{}'.format(k), input_size, d, rng):
            params[p.name] = p
    params['W_c'] = Parameter('W_c', _init((2 * d, d), rng))
    params['W_o'] = Parameter('W_o', _init((d, config.tgt_vocab_size), rng))
    return params


def expected_shapes(config: ModelConfig) -> "OrderedDict[str, tuple]":
    return OrderedDict((name, p.shape) for name, p in init_parameters(config).items())


def layer_weights(params, prefix: str, layers: int) -> List[LSTMWeights]:
    return [LSTMWeights(params['{}.{}.W_x'.format(prefix, k)], params['{}.{}.W_h'.format(prefix, k)],
                        params['{}.{}.b'.format(prefix, k)]) for k in range(layers)]


def run_stack(x, prev_states: LayerStates, weights: List[LSTMWeights], dropout: float, training: bool, rng) -> Tuple[Tensor, LayerStates]:
    """One time step through stacked LSTM layers; dropout only between layers."""
    states = []
    for k, (w, (h, c)) in enumerate(zip(weights, prev_states)):
        if k > 0:
            x = ops.dropout(x, dropout, rng=rng, training=training)
        h, c = lstm_cell(x, h, c, w)
        states.append((h, c))
        x = h
    return x, states


class EncoderStates(NamedTuple):

    states: Tensor  # (B, S, d) top-layer hidden states
    mask: np.ndarray  # (B, S)
    final: LayerStates  # per layer, state at each sentence's last real token

    @property
    def lengths(self) -> np.ndarray:
        return self.mask.sum(axis=1)


def encode(source_ids, mask, params, config: ModelConfig, training: bool=False, rng=None) -> EncoderStates:
    ids = np.asarray(source_ids, dtype=np.int64)
    mask = np.asarray(mask, dtype=bool)
    if ids.ndim != 2 or ids.shape != mask.shape:
        raise ShapeError("encode: ids and mask disagree", ids.shape, mask.shape)
    if ids.min() < 0 or ids.max() >= config.src_vocab_size:
        raise ContractError("source id out of range [0, {})".format(config.src_vocab_size))
    batch, length = ids.shape
    weights = layer_weights(params, 'enc', config.layers)
    zeros = Tensor(np.zeros((batch, config.dim)))
    states = [(zeros, zeros) for _ in range(config.layers)]
    tops = []
    for s in range(length):
        x = ops.embedding(params['src_embed'], ids[:, s])
        _, new_states = run_stack(x, states, weights, config.dropout, training, rng)
        keep = mask[:, s][:, None]
        states = [(ops.select(keep, h, h0), ops.select(keep, c, c0)) for (h, c), (h0, c0) in zip(new_states, states)]
        tops.append(states[-1][0])
    return EncoderStates(ops.stack(tops, axis=1), mask, states)


def attend(query, encoder_states: EncoderStates, mask=None) -> Tuple[Tensor, Tensor]:
    """Dot-product scores against every encoder state, masked softmax, weighted sum."""
    mask = encoder_states.mask if mask is None else np.asarray(mask, dtype=bool)
    scores = ops.batched_scores(encoder_states.states, query)
    alpha = ops.masked_softmax(scores, mask)
    context = ops.weighted_sum(alpha, encoder_states.states)
    return alpha, context


def decoder_state(prev_embedding, prev_states: LayerStates, params, config: ModelConfig, training: bool=False, rng=None) -> Tuple[Tensor, LayerStates]:
    """h'_t: decoder step that does not see the previous attentional state."""
    if config.input_feeding:
        raise ContractError("decoder_state is the non_recurrent step; use input_feeding_state")
    return run_stack(prev_embedding, prev_states, layer_weights(params, 'dec', config.layers), config.dropout, training, rng)


def input_feeding_state(prev_attentional, prev_embedding, prev_states: LayerStates, params, config: ModelConfig,
                        training: bool=False, rng=None) -> Tuple[Tensor, LayerStates]:
    """h''_t = f(W [h~_{t-1}; y_{t-1}]) through the stacked decoder."""
    if not config.input_feeding:
        raise ContractError("input_feeding_state called under the {} variant".format(config.attention))
    x = ops.concat([prev_attentional, prev_embedding], axis=-1)
    return run_stack(x, prev_states, layer_weights(params, 'dec', config.layers), config.dropout, training, rng)


def attentional_output(context, hidden, params) -> Tensor:
    w = params['W_c']
    cs, hs = ops._shape_of(context), ops._shape_of(hidden)
    if cs != hs or cs[-1] + hs[-1] != w.shape[0]:
        raise ShapeError("attentional output: context and hidden disagree with W_c", cs, hs, w.shape)
    return ops.tanh(ops.matmul(ops.concat([context, hidden], axis=-1), w))


def output_logits(attentional, params) -> Tensor:
    return ops.matmul(attentional, params['W_o'])


def predict(attentional, params) -> Tensor:
    """Distribution over the target vocabulary, one row per batch entry."""
    logits = output_logits(attentional, params)
    return ops.masked_softmax(logits, np.ones(logits.shape, dtype=bool))


class DecoderStepState(NamedTuple):

    hidden: Optional[Tensor]  # h'_t, non_recurrent only
    feeding_hidden: Optional[Tensor]  # h''_t, input_feeding only
    context: Optional[Tensor]
    attentional: Tensor  # h~_t
    previous_attentional: Optional[Tensor]  # h~_{t-1}
    attention: Optional[Tensor]
    layer_states: LayerStates

    @property
    def query(self) -> Tensor:
        return self.feeding_hidden if self.feeding_hidden is not None else self.hidden


def initial_state(encoder_states: EncoderStates, config: ModelConfig) -> DecoderStepState:
    """Decoder starts from the final encoder states; h~_0 = 0."""
    batch = encoder_states.mask.shape[0]
    zero = Tensor(np.zeros((batch, config.dim)))
    return DecoderStepState(None, None, None, zero, None, None, list(encoder_states.final))


def decode_step(prev_ids, state: DecoderStepState, encoder_states: EncoderStates, params, config: ModelConfig,
                training: bool=False, rng=None, query=None) -> DecoderStepState:
    """Advance one target position; ``query`` overrides the scoring state."""
    embedding = ops.embedding(params['tgt_embed'], np.asarray(prev_ids, dtype=np.int64))
    if config.input_feeding:
        hidden, layers = input_feeding_state(state.attentional, embedding, state.layer_states, params, config, training, rng)
        plain, feeding = None, hidden
    else:
        hidden, layers = decoder_state(embedding, state.layer_states, params, config, training, rng)
        plain, feeding = hidden, None
    scoring = hidden if query is None else query
    alpha, context = attend(scoring, encoder_states)
    attentional = attentional_output(context, scoring, params)
    attentional = ops.dropout(attentional, config.dropout, rng=rng, training=training)
    return DecoderStepState(plain, feeding, context, attentional, state.attentional, alpha, layers)


class AttentionModel(object):
    """Config, parameters and vocabularies; immutable once training is done."""

    def __init__(self, config: ModelConfig, params, source_vocab: Vocabulary, target_vocab: Vocabulary):
        self.config = config
        self.params = params
        self.source_vocab = source_vocab
        self.target_vocab = target_vocab

    @classmethod
    def create(cls, config: ModelConfig, source_vocab: Vocabulary, target_vocab: Vocabulary, zero: bool=False):
        config = config.replace(src_vocab_size=len(source_vocab), tgt_vocab_size=len(target_vocab))
        rng = None if zero else np.random.default_rng(config.seed)
        return cls(config, init_parameters(config, rng), source_vocab, target_vocab)

    def checkpoint_metadata(self, **extra) -> dict:
        metadata = {
            'config': self.config.to_dict(),
            'source_vocab': list(self.source_vocab.tokens),
            'target_vocab': list(self.target_vocab.tokens),
        }
        metadata.update(extra)
        return metadata

    def save(self, pathname: str, **extra) -> str:
        return save_checkpoint(pathname, self.params, self.checkpoint_metadata(**extra))

    @classmethod
    def load(cls, pathname: str):
        metadata, tensors = load_checkpoint(pathname)
        try:
            config = ModelConfig.from_dict(metadata['config'])
            source_vocab = Vocabulary(metadata['source_vocab'])
            target_vocab = Vocabulary(metadata['target_vocab'])
        except (KeyError, ValueError) as e:
            raise ConfigError('checkpoint', "{}: incomplete model metadata ({})".format(pathname, e))
        if config.src_vocab_size != len(source_vocab) or config.tgt_vocab_size != len(target_vocab):
            raise ConfigError('checkpoint', "{}: vocabulary sizes disagree with the stored config".format(pathname))
        shapes = expected_shapes(config)
        if list(shapes) != list(tensors):
            raise ConfigError('checkpoint', "{}: parameter names disagree with the stored config".format(pathname))
        params = OrderedDict()
        for name, shape in shapes.items():
            if tuple(tensors[name].shape) != tuple(shape):
                raise ConfigError('checkpoint', "{}: parameter {} has shape {}, config implies {}".format(
                    pathname, name, tensors[name].shape, shape))
            params[name] = Parameter(name, tensors[name])
        _log.debug("loaded %s model from %s", config.attention, pathname)
        return cls(config, params, source_vocab, target_vocab)
