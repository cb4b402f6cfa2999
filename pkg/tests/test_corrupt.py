import numpy as np
import pytest

from src.corrupt import FOG_ATTENUATIONS, CorruptionSpec, apply
from src.errors import ConfigurationError
from src.ingest import LabeledCloud


def _cloud(n, seed=0, frame_id=0, max_range=100.0):
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    ranges = rng.uniform(0.0, max_range, n)
    return LabeledCloud(direction * ranges[:, None], rng.integers(1, 5, n), frame_id)


class TestCorruptionSpec:
    def test_parse(self):
        spec = CorruptionSpec.parse('fog=0.01,seed=3')
        assert spec == CorruptionSpec('fog', {'attenuation': 0.01}, 3)

    def test_parse_uses_config_defaults(self):
        spec = CorruptionSpec.parse('crosstalk')
        assert spec.params == {'ratio': 0.07, 'range_max': 100.0, 'noise_class': 'unlabeled'}
        assert spec.rng_seed == 0

    def test_parse_extra_options(self):
        spec = CorruptionSpec.parse('crosstalk=0.2,noise_class=vehicle,range_max=30')
        assert spec.params['noise_class'] == 'vehicle'
        assert spec.params['range_max'] == 30.0

    def test_sampled_fog(self):
        assert CorruptionSpec.parse('fog=sample').params['attenuation'] is None

    @pytest.mark.parametrize('text', ['snow=1', 'incomplete_echo=1.5', 'motion_blur=-0.1',
                                      'fog=abc', 'fog=0.01,seed', ''])
    def test_invalid(self, text):
        with pytest.raises(ConfigurationError):
            CorruptionSpec.parse(text)

    def test_to_dict(self):
        spec = CorruptionSpec('motion_blur', {'sigma': 0.3}, 5)
        assert spec.to_dict() == {'kind': 'motion_blur', 'params': {'sigma': 0.3}, 'rng_seed': 5}


class TestApply:
    def test_zero_blur_is_identity(self):
        cloud = _cloud(500)
        assert apply(cloud, CorruptionSpec('motion_blur', {'sigma': 0.0})) == cloud

    def test_blur_moves_points_only(self):
        cloud = _cloud(20_000)
        blurred = apply(cloud, CorruptionSpec('motion_blur', {'sigma': 0.3}, 1))
        np.testing.assert_array_equal(blurred.labels, cloud.labels)
        offsets = blurred.points - cloud.points
        assert np.std(offsets) == pytest.approx(0.3, rel=0.02)

    def test_full_drop_empties_cloud(self):
        assert len(apply(_cloud(500), CorruptionSpec('incomplete_echo', {'drop': 1.0}))) == 0

    def test_no_drop_keeps_cloud(self):
        cloud = _cloud(500)
        assert apply(cloud, CorruptionSpec('incomplete_echo', {'drop': 0.0})) == cloud

    def test_drop_rate(self):
        kept = apply(_cloud(50_000), CorruptionSpec('incomplete_echo', {'drop': 0.85}, 2))
        assert len(kept) / 50_000 == pytest.approx(0.15, abs=0.01)

    def test_fog_survival_law(self):
        attenuation = 0.01
        cloud = _cloud(100_000, seed=1)
        fogged = apply(cloud, CorruptionSpec('fog', {'attenuation': attenuation}, 7))
        ranges = np.linalg.norm(cloud.points, axis=1)
        kept_ranges = np.linalg.norm(fogged.points, axis=1)
        edges = np.arange(0.0, 110.0, 10.0)
        for lo, hi in zip(edges[:-1], edges[1:]):
            p = np.exp(-attenuation * ranges[(ranges >= lo) & (ranges < hi)])
            kept = np.count_nonzero((kept_ranges >= lo) & (kept_ranges < hi))
            assert abs(kept - p.sum()) <= 3.0 * np.sqrt(np.sum(p * (1 - p)))

    def test_fog_thins_monotonically(self):
        cloud = _cloud(5_000)
        light = [len(apply(cloud, CorruptionSpec('fog', {'attenuation': 0.01}, s)))
                 for s in range(20)]
        heavy = [len(apply(cloud, CorruptionSpec('fog', {'attenuation': 0.03}, s)))
                 for s in range(20)]
        assert np.mean(heavy) <= np.mean(light)

    def test_sampled_fog_keeps_a_subset(self):
        cloud = _cloud(2_000)
        fogged = apply(cloud, CorruptionSpec('fog', {'attenuation': None}, 4))
        assert len(fogged) <= len(cloud)
        assert set(map(tuple, fogged.points)) <= set(map(tuple, cloud.points))
        assert 0.0 in FOG_ATTENUATIONS

    @pytest.mark.parametrize('spec', [
        CorruptionSpec('motion_blur', {'sigma': 0.3}, 1),
        CorruptionSpec('incomplete_echo', {'drop': 0.5}, 1),
        CorruptionSpec('fog', {'attenuation': 0.02}, 1),
    ])
    def test_labels_survive(self, spec):
        cloud = _cloud(3_000)
        corrupted = apply(cloud, spec)
        lookup = {tuple(p): label for p, label in zip(cloud.points, cloud.labels)}
        if spec.kind == 'motion_blur':
            np.testing.assert_array_equal(corrupted.labels, cloud.labels)
        else:
            assert all(lookup[tuple(p)] == label
                       for p, label in zip(corrupted.points, corrupted.labels))

    @pytest.mark.parametrize('kind,params', [
        ('motion_blur', {'sigma': 0.3}),
        ('incomplete_echo', {'drop': 0.5}),
        ('fog', {'attenuation': None}),
        ('crosstalk', {'ratio': 0.1, 'noise_class': 5}),
    ])
    def test_deterministic(self, kind, params):
        cloud = _cloud(1_000, frame_id=3)
        spec = CorruptionSpec(kind, params, 11)
        assert apply(cloud, spec) == apply(cloud, spec)

    def test_frames_draw_independently(self):
        spec = CorruptionSpec('incomplete_echo', {'drop': 0.5}, 11)
        first = apply(_cloud(1_000, frame_id=0), spec)
        second = apply(_cloud(1_000, frame_id=1), spec)
        assert not np.array_equal(first.points, second.points)

    def test_crosstalk(self, synthetic_classes):
        cloud = _cloud(1_000)
        spec = CorruptionSpec('crosstalk', {'ratio': 0.07, 'range_max': 50.0,
                                            'noise_class': 'unlabeled'}, 2)
        noisy = apply(cloud, spec, synthetic_classes)
        assert len(noisy) == len(cloud)
        changed = np.any(noisy.points != cloud.points, axis=1)
        assert np.count_nonzero(changed) == 70
        np.testing.assert_array_equal(noisy.labels[changed], synthetic_classes.index('unlabeled'))
        np.testing.assert_array_equal(noisy.labels[~changed], cloud.labels[~changed])
        assert np.all(np.linalg.norm(noisy.points[changed], axis=1) <= 50.0)

    def test_crosstalk_needs_classes_for_names(self):
        with pytest.raises(ConfigurationError):
            apply(_cloud(10), CorruptionSpec('crosstalk', {'ratio': 0.5, 'noise_class': 'unlabeled'}))
