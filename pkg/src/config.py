import copy
import yaml
from pathlib import Path

from .errors import ConfigurationError

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = PROJECT_ROOT / 'data'
DEFAULT_CONFIG_PATH = PROJECT_ROOT / 'config.yaml'
LOCAL_CONFIG_NAME = 'local_config.yaml'


def _read_yaml(path):
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigurationError(f"malformed config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a mapping")
    return data


def _deep_merge(base, override):
    """Merge override into a copy of base, recursing into nested mappings"""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def parse_override(text):
    """Parse a `section.key=value` override; the value is read as a YAML scalar"""
    if '=' not in text:
        raise ConfigurationError(f"override must look like section.key=value: {text!r}")
    dotted, raw = text.split('=', 1)
    keys = [k for k in dotted.strip().split('.') if k]
    if not keys:
        raise ConfigurationError(f"override has an empty key: {text!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"unparseable override value {raw!r}") from e
    return keys, value


class Config:
    """Layered configuration shared by the whole process.

    Lowest to highest priority: the bundled config.yaml, local_config.yaml in the
    working directory, the per-run config file, then `--set` overrides.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(Config, cls).__new__(cls)
            cls._instance._run_path = None
            cls._instance._overrides = {}
            cls._instance._load_config()
        return cls._instance

    @classmethod
    def load(cls, path=None, overrides=None):
        """Rebuild the shared instance for one run"""
        instance = cls()
        instance._run_path = Path(path) if path else None
        instance._overrides = {}
        for item in overrides or ():
            keys, value = parse_override(item) if isinstance(item, str) else item
            instance._set_nested(instance._overrides, keys, value)
        instance._load_config()
        return instance

    @classmethod
    def reset(cls):
        """Drop the shared instance so the next Config() sees bundled defaults"""
        cls._instance = None
        return cls()

    def _load_config(self):
        self._base_config = _read_yaml(DEFAULT_CONFIG_PATH)

        local_path = Path(LOCAL_CONFIG_NAME)
        self._local_config = _read_yaml(local_path) if local_path.exists() else {}

        self._run_config = _read_yaml(self._run_path) if self._run_path else {}

        merged = _deep_merge(self._base_config, self._local_config)
        merged = _deep_merge(merged, self._run_config)
        self._merged = _deep_merge(merged, self._overrides)

    @property
    def run_path(self):
        return self._run_path

    def save_local(self):
        """Save local configuration overrides to local_config.yaml"""
        with open(LOCAL_CONFIG_NAME, 'w') as f:
            yaml.safe_dump(self._local_config, f, default_flow_style=False, sort_keys=False)

    def reload(self):
        self._load_config()

    @staticmethod
    def _set_nested(target, keys, value):
        current = target
        for key in keys[:-1]:
            if not isinstance(current.get(key), dict):
                current[key] = {}
            current = current[key]
        current[keys[-1]] = value

    def update(self, *keys, value, persist=False):
        """Override a value for this process; persist=True also writes local_config.yaml"""
        if len(keys) < 1:
            raise ConfigurationError("At least one key must be provided")
        self._set_nested(self._overrides, list(keys), value)
        if persist:
            self._set_nested(self._local_config, list(keys), value)
            self.save_local()
        self._load_config()
        return True

    def get(self, *keys, default=None):
        """Get a nested configuration value, e.g. get('optimizer', 'bounds', 'z')"""
        value = self._merged
        for key in keys:
            try:
                value = value[key]
            except (KeyError, TypeError):
                return default
        return value

    def as_dict(self):
        return copy.deepcopy(self._merged)

    def _merge_config_section(self, section_name):
        return copy.deepcopy(self._merged.get(section_name) or {})

    @property
    def grid(self):
        return self._merge_config_section('grid')

    @property
    def classes(self):
        return self._merge_config_section('classes')

    @property
    def sensor(self):
        return self._merge_config_section('sensor')

    @property
    def scene(self):
        return self._merge_config_section('scene')

    @property
    def ingest(self):
        return self._merge_config_section('ingest')

    @property
    def corruption(self):
        return self._merge_config_section('corruption')

    @property
    def metric(self):
        return self._merge_config_section('metric')

    @property
    def optimizer(self):
        return self._merge_config_section('optimizer')

    @property
    def report(self):
        return self._merge_config_section('report')

    @property
    def run(self):
        return self._merge_config_section('run')
