"""Run configuration for the command-line tools.

Values are merged in increasing priority: the named model preset, the JSON
file given with ``--config``, then individual command-line options. The JSON
file is an object with optional keys ``preset``, ``model`` (ModelConfig
fields), ``paths`` (see ``PATH_KEYS``) and the option keys in ``OPTIONS``.
"""

import os
import json
import logging
import tempfile
from typing import Mapping, NamedTuple, Optional, Tuple
from common.errors import ConfigError, UsageError
from nmt.config import ModelConfig, preset

_log = logging.getLogger(__name__)

DEFAULT_PRESET = 'desk'
PATH_KEYS = (
    'source', 'target', 'alignments', 'source_annotations', 'target_annotations',
    'checkpoint', 'source_vocab', 'target_vocab', 'export', 'output_dir', 'output',
    'forward', 'backward', 'candidates', 'references', 'role_merge',
)
OPTIONS = {
    'include_possible': (bool, True),
    'min_class_count': (int, 2),
    'sentences': (tuple, ()),
    'max_length': (int, 100),
    'smoothing': (float, 0.0),
    'toy_sentences': (int, 2000),
    'toy_test': (int, 200),
    'backward_reversed': (bool, False),
}
_TOP_LEVEL = frozenset(['preset', 'model', 'paths']) | frozenset(OPTIONS)


class RunConfig(NamedTuple):

    command: str
    model: ModelConfig
    paths: Mapping[str, str]
    preset: str = DEFAULT_PRESET
    include_possible: bool = True
    min_class_count: int = 2
    sentences: Tuple[int, ...] = ()
    max_length: int = 100
    smoothing: float = 0.0
    toy_sentences: int = 2000
    toy_test: int = 200
    backward_reversed: bool = False

    @property
    def seed(self) -> int:
        return self.model.seed

    def path(self, key: str) -> Optional[str]:
        assert key in PATH_KEYS, "unknown path key {}".format(key)
        return self.paths.get(key)

    def require(self, *keys: str) -> Tuple[str, ...]:
        """Return the paths for ``keys``; each must be configured and exist."""
        found = []
        for key in keys:
            pathname = self.path(key)
            if not pathname:
                raise UsageError(key, "a {} path is required by {}".format(key.replace('_', ' '), self.command))
            if not os.path.exists(pathname):
                raise UsageError(key, "no such file: {}".format(pathname))
            found.append(pathname)
        return tuple(found)

    def require_output(self, key: str='output_dir') -> str:
        pathname = self.path(key)
        if not pathname:
            raise UsageError(key, "an {} path is required by {}".format(key.replace('_', ' '), self.command))
        return pathname

    def to_dict(self) -> dict:
        d = self._asdict()
        d['model'] = self.model.to_dict()
        d['paths'] = dict(sorted(self.paths.items()))
        d['sentences'] = list(self.sentences)
        return d


def _coerce_option(key: str, value):
    kind = OPTIONS[key][0]
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(key, "must be true or false, got {!r}".format(value))
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, "must be an integer, got {!r}".format(value))
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, "must be a number, got {!r}".format(value))
        return float(value)
    if isinstance(value, (str, int)) or not hasattr(value, '__iter__'):
        value = [value]
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(key, "must be a list of integers, got {!r}".format(value))


def read_config_file(pathname: str) -> dict:
    if not os.path.isfile(pathname):
        raise UsageError('config', "no such file: {}".format(pathname))
    with open(pathname, 'r', encoding='utf-8') as ifile:
        try:
            values = json.load(ifile)
        except ValueError as e:
            raise ConfigError('config', "{} is not valid JSON: {}".format(pathname, e))
    if not isinstance(values, dict):
        raise ConfigError('config', "{} must hold a JSON object".format(pathname))
    unknown = sorted(set(values) - _TOP_LEVEL)
    if unknown:
        raise ConfigError(unknown[0], "unknown setting in {}".format(pathname))
    for section in ('model', 'paths'):
        if not isinstance(values.get(section, {}), dict):
            raise ConfigError(section, "must be a JSON object")
    unknown_paths = sorted(set(values.get('paths', {})) - set(PATH_KEYS))
    if unknown_paths:
        raise ConfigError(unknown_paths[0], "unknown path key in {}".format(pathname))
    return values


def build_run_config(command: str, config_file: str=None, preset_name: str=None, model_overrides: Mapping=None,
                     paths: Mapping[str, Optional[str]]=None, **options) -> RunConfig:
    """Merge preset, configuration file and command-line values; None means "not given"."""
    file_values = read_config_file(config_file) if config_file else {}
    name = preset_name or file_values.get('preset') or DEFAULT_PRESET
    model = preset(name)
    model = model.replace(**file_values.get('model', {}))
    model = model.replace(**{k: v for k, v in (model_overrides or {}).items() if v is not None})
    merged_paths = dict(file_values.get('paths', {}))
    merged_paths.update({k: v for k, v in (paths or {}).items() if v is not None})
    for key in merged_paths:
        if key not in PATH_KEYS:
            raise ConfigError(key, "unknown path key")
    settings = {}
    for key, (_, default) in OPTIONS.items():
        value = default
        if key in file_values:
            value = _coerce_option(key, file_values[key])
        if options.get(key) is not None:
            value = _coerce_option(key, options[key])
        settings[key] = value
    unknown = sorted(set(options) - set(OPTIONS))
    if unknown:
        raise ConfigError(unknown[0], "unknown option")
    if settings['min_class_count'] < 2:
        raise ConfigError('min_class_count', "must be at least 2, got {}".format(settings['min_class_count']))
    for key in ('max_length', 'toy_sentences', 'toy_test'):
        if settings[key] < 1:
            raise ConfigError(key, "must be positive, got {}".format(settings[key]))
    if settings['smoothing'] < 0:
        raise ConfigError('smoothing', "must not be negative")
    config = RunConfig(command, model, merged_paths, name, **settings)
    _log.debug("run configuration: %s", config.to_dict())
    return config


def _current_umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def ensure_output_dir(pathname: str) -> str:
    """Create ``pathname`` if needed; a new directory appears in one rename."""
    if os.path.isdir(pathname):
        return pathname
    if os.path.exists(pathname):
        raise UsageError('output_dir', "{} exists and is not a directory".format(pathname))
    parent = os.path.dirname(os.path.abspath(pathname))
    os.makedirs(parent, exist_ok=True)
    staging = tempfile.mkdtemp(prefix='.attnalign-', dir=parent)
    os.chmod(staging, 0o777 & ~_current_umask())
    try:
        os.rename(staging, pathname)
    except OSError:
        os.rmdir(staging)
        if not os.path.isdir(pathname):
            raise
    return pathname
