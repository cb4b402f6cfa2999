import logging
import os
import tempfile
import time
from pathlib import Path

import yaml

from .. import __version__

logger = logging.getLogger(__name__)


def atomic_write(path, writer, mode='w'):
    """Write a file through a temporary sibling, then rename it into place.

    `writer` receives the open temporary file. An interrupted write leaves
    the destination untouched.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix='.tmp', dir=path.parent)
    try:
        with os.fdopen(fd, mode) as f:
            writer(f)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_yaml(path, data, atomic=True):
    def _dump(f):
        yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)

    if atomic:
        return atomic_write(path, _dump)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        _dump(f)
    return Path(path)


def manifest_path_for(output):
    """run_manifest.yaml inside a directory output, <file>.manifest.yaml next to a file"""
    output = Path(output)
    if output.is_dir() or not output.suffix:
        return output / 'run_manifest.yaml'
    return output.with_name(output.name + '.manifest.yaml')


class RunManifest:
    """Records one CLI run so it can be replayed"""

    def __init__(self, command, config_path=None, rng_seed=None):
        self.command = command
        self.config_path = str(config_path) if config_path else None
        self.rng_seed = rng_seed
        self.inputs = []
        self.outputs = []
        self.extra = {}
        self._started = time.perf_counter()

    def add_input(self, path):
        self.inputs.append(str(path))

    def add_output(self, path):
        self.outputs.append(str(path))

    def to_dict(self):
        data = {
            'command': self.command,
            'config_path': self.config_path,
            'rng_seed': self.rng_seed,
            'inputs': self.inputs,
            'outputs': self.outputs,
            'tool_version': __version__,
            'wall_clock_seconds': round(time.perf_counter() - self._started, 6),
        }
        if self.extra:
            data['extra'] = self.extra
        return data

    def write(self, output):
        path = manifest_path_for(output)
        write_yaml(path, self.to_dict())
        logger.debug("Wrote run manifest %s", path)
        return path
