import numpy as np
import pandas as pd
import pytest

from src.errors import UndefinedCorrelationError, UndefinedMetricError, ValidationError
from src.grid import ClassTable, ProbField, RoiGrid, entropy_rows
from src.metric import (CorrelationChartRenderer, METRIC_COLUMNS, binary_entropy,
                        correlation_table, detection_relabel, join_performance, metric_row,
                        metric_table, msog, pearson, performance_columns, read_table, smig,
                        write_table)
from src.raycast import CoverageSet, coverage, load_baselines

from .conftest import random_prob_rows

H_QUARTER = 0.5623351446188083  # binary entropy of 0.25 in nats


def _field(rows, classes):
    rows = np.asarray(rows, dtype=float)
    grid = RoiGrid.create((float(len(rows)), 1.0, 1.0), (1.0, 1.0, 1.0), (0.0, 0.0, 0.0))
    return ProbField(grid, classes, rows)


def _all(prob):
    return CoverageSet(np.arange(prob.grid.n_voxels), prob.grid.n_voxels)


@pytest.fixture
def three_classes():
    return ClassTable(('empty', 'car', 'pedestrian'), 0)


class TestMsog:
    def test_one_hot_is_zero(self, binary_classes):
        prob = _field([[1, 0], [0, 1], [1, 0]], binary_classes)
        score = msog(prob, _all(prob))
        assert score.value == 0.0
        assert score.n_covered == 3
        assert score.mode == 'segmentation'

    def test_uniform_binary(self, binary_classes):
        prob = _field([[0.5, 0.5]] * 4, binary_classes)
        assert msog(prob, _all(prob)).value == pytest.approx(-np.log(2.0), abs=1e-12)

    def test_mixed_entropies(self, binary_classes):
        prob = _field([[1.0, 0.0], [0.5, 0.5], [0.75, 0.25]], binary_classes)
        assert msog(prob, _all(prob)).value == pytest.approx(-0.418494, abs=1e-6)

    def test_only_covered_voxels_count(self, binary_classes):
        prob = _field([[0.5, 0.5], [1.0, 0.0], [0.5, 0.5], [0.0, 1.0]], binary_classes)
        score = msog(prob, CoverageSet([1, 3], 4))
        assert score.value == 0.0
        assert score.entropy_sum == 0.0
        assert score.h_total == pytest.approx(2 * np.log(2.0))
        assert score.delta_h == pytest.approx(2 * np.log(2.0))

    def test_empty_coverage(self, binary_classes):
        prob = _field([[0.5, 0.5]], binary_classes)
        with pytest.raises(UndefinedMetricError):
            msog(prob, CoverageSet([], 1))

    def test_bounds_and_brute_force(self, synthetic_classes):
        rng = np.random.default_rng(11)
        m = synthetic_classes.n_classes
        rows = random_prob_rows(rng, 500, m)
        prob = _field(rows, synthetic_classes)
        for _ in range(20):
            ids = rng.choice(500, size=rng.integers(1, 500), replace=False)
            value = msog(prob, CoverageSet(ids, 500)).value
            assert -np.log(m) <= value <= 0.0
            covered = rows[np.sort(ids)]
            expected = np.mean([np.sum(p[p > 0] * np.log(p[p > 0])) for p in covered])
            assert value == pytest.approx(expected, abs=1e-12)

    def test_zero_only_for_one_hot(self, three_classes):
        prob = _field([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.999, 0.001]], three_classes)
        assert msog(prob, CoverageSet([0, 1], 3)).value == 0.0
        assert msog(prob, _all(prob)).value < 0.0


class TestDetectionRelabel:
    def test_merge(self, three_classes):
        prob = _field([[0.3, 0.4, 0.3]], three_classes)
        relabeled = detection_relabel(prob, 'car')
        assert relabeled.classes.names == ('car', 'other', 'empty')
        assert relabeled.classes.empty_class_id == 2
        np.testing.assert_allclose(relabeled.probs, [[0.4, 0.3, 0.3]], atol=1e-12)

    def test_one_hot_target(self, three_classes):
        relabeled = detection_relabel(_field([[0.0, 1.0, 0.0]], three_classes), 1)
        np.testing.assert_array_equal(relabeled.probs, [[1.0, 0.0, 0.0]])

    def test_pure_empty(self, three_classes):
        relabeled = detection_relabel(_field([[1.0, 0.0, 0.0]] * 3, three_classes), 'car')
        np.testing.assert_array_equal(relabeled.probs, [[0.0, 0.0, 1.0]] * 3)

    def test_empty_target(self, three_classes):
        with pytest.raises(ValidationError):
            detection_relabel(_field([[1.0, 0.0, 0.0]], three_classes), 'empty')

    def test_target_out_of_range(self, three_classes):
        with pytest.raises(ValidationError):
            detection_relabel(_field([[1.0, 0.0, 0.0]], three_classes), 7)

    def test_conserves_empty_and_mass(self, synthetic_classes):
        rows = random_prob_rows(np.random.default_rng(3), 300, synthetic_classes.n_classes)
        prob = _field(rows, synthetic_classes)
        relabeled = detection_relabel(prob, 'vehicle')
        np.testing.assert_array_equal(relabeled.probs[:, 2], rows[:, 0])
        np.testing.assert_allclose(relabeled.probs.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_array_equal(relabeled.observed, prob.observed)

    def test_detection_mode_score(self, three_classes):
        relabeled = detection_relabel(_field([[0.3, 0.4, 0.3]], three_classes), 'car')
        score = msog(relabeled, _all(relabeled))
        assert (score.mode, score.target) == ('detection', 'car')
        assert -np.log(3.0) <= score.value <= 0.0

    def test_semantic_table_with_detection_names(self):
        classes = ClassTable(('pedestrian', 'other', 'empty'), 2)
        prob = _field([[0.5, 0.25, 0.25]], classes)
        score = msog(prob, _all(prob))
        assert (score.mode, score.target) == ('segmentation', None)


class TestSmig:
    def test_deterministic(self, binary_classes):
        prob = _field([[1.0, 0.0], [0.0, 1.0]], binary_classes)
        assert smig(prob, _all(prob)).value == 0.0

    def test_half_occupied(self, binary_classes):
        prob = _field([[0.5, 0.5]], binary_classes)
        assert smig(prob, _all(prob)).value == pytest.approx(-np.log(2.0), abs=1e-12)

    def test_unnormalized_sum(self, binary_classes):
        prob = _field([[0.75, 0.25], [0.25, 0.75]], binary_classes)
        score = smig(prob, _all(prob))
        assert score.value == pytest.approx(-1.124670, abs=1e-6)
        assert score.per_voxel == pytest.approx(-H_QUARTER, abs=1e-12)
        assert score.mode == 'smig'

    def test_uses_occupancy_only(self, three_classes):
        # the split between car and pedestrian does not matter
        prob = _field([[0.5, 0.5, 0.0], [0.5, 0.25, 0.25]], three_classes)
        score = smig(prob, _all(prob))
        assert score.value == pytest.approx(-2 * np.log(2.0), abs=1e-12)

    def test_binary_entropy_edges(self):
        np.testing.assert_array_equal(binary_entropy([0.0, 1.0]), [0.0, 0.0])
        assert binary_entropy(0.25) == pytest.approx(H_QUARTER, abs=1e-15)


class TestPearson:
    def test_perfect_linear(self):
        xs = np.arange(6.0)
        assert pearson(xs, 2 * xs + 1) == 1.0
        assert pearson(xs, -xs) == -1.0

    @pytest.mark.parametrize('n', [3, 5, 12, 40, 257])
    @pytest.mark.parametrize('slope,intercept', [(0.3, 11.0), (-3.7, 0.25), (1e-3, -2.0), (42.0, 1e3)])
    def test_linear_series_are_exact(self, n, slope, intercept):
        xs = np.random.default_rng(n).uniform(-5.0, 5.0, n)
        expected = 1.0 if slope > 0 else -1.0
        assert pearson(xs, slope * xs + intercept) == expected
        assert pearson(slope * xs + intercept, xs) == expected

    def test_hand_computed(self):
        assert pearson([1, 2, 3, 4, 5], [2, 1, 4, 3, 5]) == pytest.approx(0.8, abs=1e-12)

    def test_zero_variance(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1, 2, 3], [4, 4, 4])

    @pytest.mark.parametrize('xs,ys', [([1.0], [2.0]), ([1, 2, 3], [1, 2])])
    def test_bad_lengths(self, xs, ys):
        with pytest.raises(UndefinedCorrelationError):
            pearson(xs, ys)


class TestRanking:
    def test_log_base_does_not_change_ranking(self, desk_grid, desk_prob, small_spec):
        placements = load_baselines(small_spec)
        covers = [coverage(p, desk_grid, desk_prob) for p in placements]
        nats = np.array([msog(desk_prob, cov).value for cov in covers])
        bits_entropy = entropy_rows(desk_prob.probs) / np.log(2.0)
        bits = np.array([-bits_entropy[cov.ids].mean() for cov in covers])
        np.testing.assert_array_equal(np.argsort(nats, kind='stable'),
                                      np.argsort(bits, kind='stable'))
        assert np.argmax(nats) == np.argmax(bits)


class TestReport:
    @pytest.fixture
    def table(self, binary_classes):
        prob = _field([[0.75, 0.25], [0.5, 0.5], [1.0, 0.0], [0.9, 0.1]], binary_classes)
        rows = []
        for i, ids in enumerate(([0], [0, 1], [1, 2, 3], [2, 3], [0, 3])):
            cov = CoverageSet(ids, 4)
            rows.append(metric_row(f"p{i}", msog(prob, cov), smig(prob, cov)))
        return metric_table(rows)

    def test_columns(self, table):
        assert list(table.columns) == METRIC_COLUMNS
        assert table.loc[1, 'n_covered'] == 2
        assert table.loc[1, 'smig_per_voxel'] == pytest.approx(table.loc[1, 'smig'] / 2)

    def test_round_trip(self, tmp_path, table):
        write_table(table, tmp_path / 'metrics.csv')
        loaded = read_table(tmp_path / 'metrics.csv')
        pd.testing.assert_frame_equal(loaded, table)

    def test_correlations(self, table):
        perf = pd.DataFrame({'name': table['name'], 'mAP': 3.0 * table['msog'] + 50.0,
                             'note': ['a'] * len(table)})
        joined = join_performance(table, perf)
        assert performance_columns(perf) == ['mAP']
        corr = correlation_table(joined, ['mAP'])
        r = corr.set_index('metric').loc['msog', 'pearson_r']
        assert r == pytest.approx(1.0)
        assert set(corr['n']) == {len(table)}

    def test_unmatched_rows_dropped(self, table):
        perf = pd.DataFrame({'name': ['p0', 'p1', 'other'], 'mAP': [1.0, 2.0, 3.0]})
        assert list(join_performance(table, perf)['name']) == ['p0', 'p1']

    def test_chart(self, tmp_path, table):
        perf = pd.DataFrame({'name': table['name'], 'mIoU': np.arange(len(table), dtype=float)})
        joined = join_performance(table, perf)
        corr = correlation_table(joined, ['mIoU'])
        path = CorrelationChartRenderer(320, 240).render(joined, corr, tmp_path / 'corr.png')
        assert path.read_bytes()[:8] == b'\x89PNG\r\n\x1a\n'
