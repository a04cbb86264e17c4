import logging
from typing import NamedTuple
from common.errors import ConfigError

_log = logging.getLogger(__name__)

NON_RECURRENT = 'non_recurrent'
INPUT_FEEDING = 'input_feeding'
ATTENTION_VARIANTS = (NON_RECURRENT, INPUT_FEEDING)
PER_SENTENCE = 'sentences'
PER_TOKEN = 'tokens'
GRADIENT_NORMALIZATIONS = (PER_SENTENCE, PER_TOKEN)


class ModelConfig(NamedTuple):
    """Architecture and training hyperparameters.

    Vocabulary sizes of 0 mean "not yet known"; they are filled in once the
    vocabularies are built.
    """

    dim: int = 64
    layers: int = 2
    attention: str = INPUT_FEEDING
    dropout: float = 0.2
    src_vocab_size: int = 0
    tgt_vocab_size: int = 0
    seed: int = 1
    batch_size: int = 16
    epochs: int = 30
    learning_rate: float = 1.0
    clip_norm: float = 5.0
    decay: float = 1.0
    decay_start: int = 0
    normalize_by: str = PER_SENTENCE
    max_vocab: int = 30000
    max_length: int = 100

    def validate(self):
        def _int_at_least(field, minimum):
            value = getattr(self, field)
            if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
                raise ConfigError(field, "must be an integer >= {}, got {!r}".format(minimum, value))
        for field in ('dim', 'layers', 'batch_size', 'epochs', 'max_vocab', 'max_length'):
            _int_at_least(field, 1)
        for field in ('src_vocab_size', 'tgt_vocab_size', 'decay_start', 'seed'):
            _int_at_least(field, 0)
        if self.attention not in ATTENTION_VARIANTS:
            raise ConfigError('attention', "must be one of {}, got {!r}".format(ATTENTION_VARIANTS, self.attention))
        if self.normalize_by not in GRADIENT_NORMALIZATIONS:
            raise ConfigError('normalize_by', "must be one of {}, got {!r}".format(GRADIENT_NORMALIZATIONS, self.normalize_by))
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError('dropout', "must lie in [0, 1), got {!r}".format(self.dropout))
        for field in ('learning_rate', 'clip_norm', 'decay'):
            if not getattr(self, field) > 0:
                raise ConfigError(field, "must be positive, got {!r}".format(getattr(self, field)))
        return self

    def replace(self, **overrides):
        unknown = set(overrides) - set(self._fields)
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown model setting")
        coerced = {}
        for key, value in overrides.items():
            default = getattr(self, key)
            if isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            coerced[key] = value
        return self._replace(**coerced).validate()

    @classmethod
    def from_dict(cls, values: dict, base=None):
        return (base or cls()).replace(**values)

    def to_dict(self) -> dict:
        return dict(self._asdict())

    @property
    def input_feeding(self) -> bool:
        return self.attention == INPUT_FEEDING

    def learning_rate_at(self, epoch: int) -> float:
        """Learning rate for 1-based ``epoch``; decays geometrically after ``decay_start`` when set."""
        if self.decay_start and epoch > self.decay_start:
            return self.learning_rate * self.decay ** (epoch - self.decay_start)
        return self.learning_rate


PRESETS = {
    'desk': ModelConfig(),
    'paper': ModelConfig(dim=1000, layers=4, dropout=0.3, batch_size=80, epochs=20),
}


def preset(name: str) -> ModelConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError('preset', "unknown preset {!r}; choose from {}".format(name, sorted(PRESETS)))
