import os
import math
import time
import logging
from typing import List, NamedTuple, Optional, Sequence, Tuple
import numpy as np
from common.errors import ContractError, TrainingDiverged
from corpus.batching import Batch, make_batches
from corpus.parallel import SentencePair
from nmt.config import PER_SENTENCE
from nmt.model import AttentionModel, encode, initial_state, decode_step, output_logits
from tensorgrad import ops
from tensorgrad.optim import sgd_step
from tensorgrad.tape import Tape, Tensor

_log = logging.getLogger(__name__)


def decoder_io(batch: Batch, bos_id: int, eos_id: int, pad_id: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decoder inputs ``<s> y_1..y_n``, outputs ``y_1..y_n </s>`` and the output mask, all (B, n+1)."""
    nrows, width = batch.target.shape
    inputs = np.full((nrows, width + 1), pad_id, dtype=np.int64)
    outputs = np.full((nrows, width + 1), pad_id, dtype=np.int64)
    mask = np.zeros((nrows, width + 1), dtype=bool)
    for row, length in enumerate(batch.target_lengths):
        inputs[row, 0] = bos_id
        inputs[row, 1:length + 1] = batch.target[row, :length]
        outputs[row, :length] = batch.target[row, :length]
        outputs[row, length] = eos_id
        mask[row, :length + 1] = True
    return inputs, outputs, mask


def sequence_loss(model: AttentionModel, batch: Batch, training: bool=False, rng=None) -> Tuple[Tensor, int]:
    """Summed per-token word prediction loss over a batch, and the number of scored tokens (EOS included)."""
    config, vocab = model.config, model.target_vocab
    encoder_states = encode(batch.source, batch.source_mask, model.params, config, training=training, rng=rng)
    inputs, outputs, mask = decoder_io(batch, vocab.bos_id, vocab.eos_id, vocab.pad_id)
    state = initial_state(encoder_states, config)
    step_losses = []
    for t in range(inputs.shape[1]):
        state = decode_step(inputs[:, t], state, encoder_states, model.params, config, training=training, rng=rng)
        losses = ops.softmax_cross_entropy(output_logits(state.attentional, model.params), outputs[:, t])
        step_losses.append(ops.total(ops.mul(losses, mask[:, t].astype(np.float64))))
    loss = step_losses[0]
    for step_loss in step_losses[1:]:
        loss = ops.add(loss, step_loss)
    return loss, int(mask.sum())


class EpochLog(NamedTuple):

    epoch: int
    mean_loss: float
    learning_rate: float
    tokens: int
    checkpoint: Optional[str]

    def to_dict(self) -> dict:
        return dict(self._asdict())


def checkpoint_name(checkpoint_dir: str, epoch: int) -> str:
    return os.path.join(checkpoint_dir, 'epoch-{:03d}.ckpt'.format(epoch))


def train(model: AttentionModel, pairs: Sequence[SentencePair], epochs: int=None, learning_rate: float=None,
          clip_norm: float=None, seed: int=None, checkpoint_dir: str=None) -> List[EpochLog]:
    """Minimize the mean per-token loss with clipped SGD, one update per batch.

    Each batch gradient is the summed loss divided by the number of sentences
    (``normalize_by="sentences"``) or of scored tokens (``"tokens"``). The
    logged epoch loss is the mean per token either way.

    Arguments left as None come from ``model.config``. The batch order of epoch
    ``e`` is drawn from seed ``[seed, e]`` and dropout masks from ``[seed, e, 1]``,
    so two runs with equal seeds produce identical parameters.
    """
    if not pairs:
        raise ContractError("no sentence pairs to train on")
    config = model.config
    epochs = config.epochs if epochs is None else epochs
    seed = config.seed if seed is None else seed
    clip_norm = config.clip_norm if clip_norm is None else clip_norm
    if learning_rate is not None:
        config = config.replace(learning_rate=learning_rate)
    if checkpoint_dir:
        os.makedirs(checkpoint_dir, exist_ok=True)
    history = []
    for epoch in range(1, epochs + 1):
        lr = config.learning_rate_at(epoch)
        batches = make_batches(pairs, config.batch_size, [seed, epoch], model.source_vocab, model.target_vocab)
        dropout_rng = np.random.default_rng([seed, epoch, 1])
        total_loss, total_tokens = 0.0, 0
        started = time.perf_counter()
        for batch_index, batch in enumerate(batches):
            with Tape() as tape:
                loss, ntokens = sequence_loss(model, batch, training=True, rng=dropout_rng)
                divisor = batch.size if config.normalize_by == PER_SENTENCE else ntokens
                objective = ops.mul(loss, 1.0 / divisor)
            value = loss.item() / ntokens
            if not math.isfinite(value):
                raise TrainingDiverged(epoch, batch_index, value)
            tape.backward(objective)
            sgd_step(model.params, lr, clip_norm)
            total_loss += loss.item()
            total_tokens += ntokens
        epoch_loss = total_loss / total_tokens
        pathname = None
        if checkpoint_dir:
            pathname = model.save(checkpoint_name(checkpoint_dir, epoch), epoch=epoch, mean_loss=epoch_loss)
        history.append(EpochLog(epoch, epoch_loss, lr, total_tokens, pathname))
        _log.info("epoch %d: mean token loss %.4f over %d tokens, lr %g (%.1fs)",
                  epoch, epoch_loss, total_tokens, lr, time.perf_counter() - started)
    return history


def evaluate_loss(model: AttentionModel, pairs: Sequence[SentencePair], batch_size: int=None) -> float:
    """Mean per-token loss in evaluation mode, EOS included."""
    batch_size = batch_size or model.config.batch_size
    batches = make_batches(pairs, batch_size, 0, model.source_vocab, model.target_vocab, shuffle=False)
    total_loss, total_tokens = 0.0, 0
    for batch in batches:
        loss, ntokens = sequence_loss(model, batch)
        total_loss += loss.item()
        total_tokens += ntokens
    assert total_tokens > 0, "no tokens to evaluate"
    return total_loss / total_tokens
