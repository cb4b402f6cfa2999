import numba
import numpy as np
import pytest
import yaml

from src.config import Config, parse_override
from src.errors import ConfigurationError
from src.utils import (RunManifest, atomic_write, keyed_rng, manifest_path_for,
                       resolve_thread_count, write_yaml)


class TestConfig:
    def test_bundled_defaults(self):
        config = Config()
        assert config.grid['resolution'] == [0.5, 0.5, 0.5]
        assert config.metric['occlusion'] == 'threshold:0.5'
        assert config.corruption['incomplete_echo']['drop'] == 0.85
        assert config.get('optimizer', 'bounds', 'z') == [2.2, 2.8]
        assert config.get('optimizer', 'missing', default=7) == 7

    def test_singleton(self):
        assert Config() is Config()

    def test_sections_are_copies(self):
        config = Config()
        config.grid['resolution'] = [9.0, 9.0, 9.0]
        assert config.grid['resolution'] == [0.5, 0.5, 0.5]

    def test_run_file_and_overrides(self, tmp_path):
        run_file = tmp_path / 'run.yaml'
        run_file.write_text("optimizer:\n  iterations: 7\n  delta: 0.05\n")
        config = Config.load(run_file, ['optimizer.delta=0.2', 'grid.origin=[0, 0, 0]'])
        assert config.optimizer['iterations'] == 7
        assert config.optimizer['delta'] == 0.2
        assert config.optimizer['bounds']['x'] == [-0.6, 0.6]
        assert config.grid['origin'] == [0, 0, 0]
        assert config.run_path == run_file

    def test_local_config(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / 'local_config.yaml').write_text("sensor:\n  channels: 32\n")
        config = Config.reset()
        assert config.sensor['channels'] == 32
        assert config.sensor['range_max'] == 100.0

    def test_update(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        config = Config()
        config.update('ingest', 'window', value=3)
        assert config.ingest['window'] == 3
        assert not (tmp_path / 'local_config.yaml').exists()
        config.update('ingest', 'window', value=4, persist=True)
        saved = yaml.safe_load((tmp_path / 'local_config.yaml').read_text())
        assert saved == {'ingest': {'window': 4}}

    def test_missing_run_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            Config.load(tmp_path / 'absent.yaml')

    def test_malformed_run_file(self, tmp_path):
        run_file = tmp_path / 'run.yaml'
        run_file.write_text("- just\n- a list\n")
        with pytest.raises(ConfigurationError):
            Config.load(run_file)

    @pytest.mark.parametrize('text,keys,value', [
        ('run.threads=4', ['run', 'threads'], 4),
        ('metric.occlusion=none', ['metric', 'occlusion'], 'none'),
        ('grid.extent=[8, 8, 2]', ['grid', 'extent'], [8, 8, 2]),
        ('optimizer.lambda=null', ['optimizer', 'lambda'], None),
    ])
    def test_parse_override(self, text, keys, value):
        assert parse_override(text) == (keys, value)

    @pytest.mark.parametrize('text', ['run.threads', '=4', 'grid.extent=[1, 2'])
    def test_bad_override(self, text):
        with pytest.raises(ConfigurationError):
            parse_override(text)


class TestThreads:
    def test_argument_wins(self, monkeypatch):
        monkeypatch.setenv('SOGPLACE_THREADS', '3')
        assert resolve_thread_count(1, 2) == 1

    def test_environment_before_config(self, monkeypatch):
        monkeypatch.setenv('SOGPLACE_THREADS', '1')
        assert resolve_thread_count(None, 2) == 1

    def test_invalid_values_fall_through(self, monkeypatch):
        monkeypatch.setenv('SOGPLACE_THREADS', 'many')
        assert resolve_thread_count(0, 1) == 1

    def test_default_and_cap(self):
        assert resolve_thread_count() == numba.config.NUMBA_NUM_THREADS
        assert resolve_thread_count(10_000) == numba.config.NUMBA_NUM_THREADS


class TestKeyedRng:
    def test_same_key_same_stream(self):
        np.testing.assert_array_equal(keyed_rng(5, 1, 2).random(8), keyed_rng(5, 1, 2).random(8))

    def test_keys_are_independent(self):
        draws = {tuple(keyed_rng(5, *key).random(4)) for key in [(1, 2), (2, 1), (1,), (1, 2, 0)]}
        assert len(draws) == 4
        assert not np.array_equal(keyed_rng(5, 1).random(4), keyed_rng(6, 1).random(4))


class TestIo:
    def test_atomic_write_keeps_old_file_on_failure(self, tmp_path):
        path = tmp_path / 'table.csv'
        path.write_text('old\n')

        def failing(f):
            f.write('partial')
            raise RuntimeError('disk full')

        with pytest.raises(RuntimeError):
            atomic_write(path, failing)
        assert path.read_text() == 'old\n'
        assert [p.name for p in tmp_path.iterdir()] == ['table.csv']

    def test_atomic_write_creates_parents(self, tmp_path):
        path = atomic_write(tmp_path / 'a' / 'b.txt', lambda f: f.write('x'))
        assert path.read_text() == 'x'

    def test_manifest_paths(self, tmp_path):
        assert manifest_path_for(tmp_path) == tmp_path / 'run_manifest.yaml'
        assert manifest_path_for(tmp_path / 'rows.csv') == tmp_path / 'rows.csv.manifest.yaml'

    def test_run_manifest(self, tmp_path):
        manifest = RunManifest('eval', tmp_path / 'run.yaml', 3)
        manifest.add_input('in.psog')
        manifest.add_output(tmp_path / 'rows.csv')
        manifest.extra = {'mode': 'segmentation'}
        data = yaml.safe_load(manifest.write(tmp_path / 'rows.csv').read_text())
        assert data['command'] == 'eval'
        assert data['rng_seed'] == 3
        assert data['inputs'] == ['in.psog']
        assert data['extra'] == {'mode': 'segmentation'}
        assert data['wall_clock_seconds'] >= 0
        assert 'tool_version' in data

    def test_write_yaml(self, tmp_path):
        path = write_yaml(tmp_path / 'out.yaml', {'b': 1, 'a': [1.5, 2]})
        assert path.read_text().startswith('b: 1')
