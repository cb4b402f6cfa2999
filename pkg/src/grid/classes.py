from dataclasses import dataclass

import yaml

from ..config import Config, DATA_DIR
from ..errors import ConfigurationError, ValidationError

CLASSES_FILE = DATA_DIR / 'classes.yaml'

OTHER_CLASS_NAME = 'other'
EMPTY_CLASS_NAME = 'empty'


@dataclass(frozen=True)
class ClassTable:
    """Ordered semantic labels; ids are positions in `names`"""

    names: tuple
    empty_class_id: int

    def __post_init__(self):
        object.__setattr__(self, 'names', tuple(str(n) for n in self.names))
        if len(self.names) < 2:
            raise ConfigurationError("a class table needs at least one material class plus empty")
        if len(set(self.names)) != len(self.names):
            raise ConfigurationError(f"duplicate class names in {self.names}")
        if not 0 <= int(self.empty_class_id) < len(self.names):
            raise ConfigurationError(
                f"empty_class_id {self.empty_class_id} outside 0..{len(self.names) - 1}")
        object.__setattr__(self, 'empty_class_id', int(self.empty_class_id))

    @property
    def n_classes(self):
        return len(self.names)

    def index(self, name_or_id):
        """Resolve a class name or id to an id"""
        if isinstance(name_or_id, str) and not name_or_id.isdigit():
            try:
                return self.names.index(name_or_id)
            except ValueError:
                raise ConfigurationError(
                    f"unknown class {name_or_id!r}; known: {', '.join(self.names)}") from None
        class_id = int(name_or_id)
        if not 0 <= class_id < self.n_classes:
            raise ConfigurationError(f"class id {class_id} outside 0..{self.n_classes - 1}")
        return class_id

    def detection(self, target):
        """Three-class table {target, other, empty} used by the detection metric"""
        target_id = self.index(target)
        if target_id == self.empty_class_id:
            raise ValidationError("the detection target cannot be the empty class")
        if self.names[target_id] in (OTHER_CLASS_NAME, EMPTY_CLASS_NAME):
            raise ValidationError(
                f"class {self.names[target_id]!r} cannot be a detection target: the "
                f"detection table reserves the names {OTHER_CLASS_NAME!r} and {EMPTY_CLASS_NAME!r}")
        return ClassTable((self.names[target_id], OTHER_CLASS_NAME, EMPTY_CLASS_NAME), 2)

    def to_dict(self):
        return {'names': list(self.names), 'empty_class_id': self.empty_class_id}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(tuple(data['names']), int(data['empty_class_id']))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"malformed class table: {e}") from e

    @classmethod
    def load(cls, table='synthetic', path=None):
        path = path or CLASSES_FILE
        try:
            with open(path, 'r') as f:
                tables = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigurationError(f"cannot read class tables from {path}: {e}") from e
        if table not in tables:
            raise ConfigurationError(f"class table {table!r} not in {path}")
        return cls.from_dict(tables[table])

    @classmethod
    def from_config(cls, config=None):
        section = (config or Config()).classes
        if 'names' in section:
            return cls.from_dict(section)
        return cls.load(section.get('table', 'synthetic'), section.get('path'))
