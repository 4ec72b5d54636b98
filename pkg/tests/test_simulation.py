"""Designs, data generation, replicated studies, and the local-power table."""

import numpy as np
import pytest

from renyireg.exceptions import DomainError
from renyireg.model import Theta
from renyireg.numerics import RngStream
from renyireg.simulation import (
    ContaminationSpec,
    DesignSpec,
    StudyConfig,
    contiguous_table,
    generate_data,
    make_design,
    run_study,
    study_result_rows,
    write_study_csv,
)


class TestMakeDesign:
    def test_two_point_rows(self):
        x = make_design(DesignSpec(kind="two_point", n=4, a=1.0, b=5.0))
        np.testing.assert_array_equal(
            x, np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 5.0], [1.0, 5.0]])
        )

    def test_odd_n_rejected(self):
        with pytest.raises(DomainError):
            DesignSpec(kind="two_point", n=5)

    def test_fixed_normal_deterministic(self):
        a = make_design(DesignSpec(kind="fixed_normal", n=100, seed=7))
        b = make_design(DesignSpec(kind="fixed_normal", n=100, seed=7))
        np.testing.assert_array_equal(a, b)
        c = make_design(DesignSpec(kind="fixed_normal", n=100, seed=8))
        assert not np.allclose(a, c)

    def test_fixed_normal_moments(self):
        n = 400
        means, sds = [], []
        for seed in range(20):
            x = make_design(DesignSpec(kind="fixed_normal", n=n, seed=seed))[:, 1]
            means.append(float(np.mean(x)))
            sds.append(float(np.std(x, ddof=1)))
        assert np.all(np.abs(means) < 3.0 / np.sqrt(n))
        assert np.all(np.abs(np.array(sds) - 1.0) < 3.0 / np.sqrt(2 * n))


class TestGenerateData:
    def test_noiseless_limit(self):
        design = make_design(DesignSpec(n=10))
        theta = Theta(beta=np.array([1.0, 1.0]), sigma=1e-12)
        y = generate_data(design, theta, None, RngStream(3, 0))
        np.testing.assert_allclose(y, design @ theta.beta, atol=1e-9)

    def test_zero_fraction_matches_clean(self):
        design = make_design(DesignSpec(n=20))
        theta = Theta(beta=np.array([1.0, 1.0]), sigma=1.0)
        y1 = generate_data(design, theta, None, RngStream(5, 1))
        y2 = generate_data(design, theta, ContaminationSpec(fraction=0.0), RngStream(5, 1))
        np.testing.assert_array_equal(y1, y2)

    def test_contaminated_count_and_mean(self):
        design = make_design(DesignSpec(n=40))
        theta = Theta(beta=np.array([1.0, 1.0]), sigma=1e-12)
        spec = ContaminationSpec(fraction=0.10)
        y = generate_data(design, theta, spec, RngStream(6, 0))
        bad = np.asarray([1.5, 2.0])
        expected_bad = design[:4] @ bad
        np.testing.assert_allclose(y[:4], expected_bad, atol=1e-9)
        np.testing.assert_allclose(y[4:], (design @ theta.beta)[4:], atol=1e-9)

    def test_random_placement_deterministic(self):
        spec = ContaminationSpec(fraction=0.2, placement="random_indices", placement_seed=11)
        assert np.array_equal(spec.indices(50), spec.indices(50))
        other = ContaminationSpec(fraction=0.2, placement="random_indices", placement_seed=12)
        assert not np.array_equal(spec.indices(50), other.indices(50))


def tiny_config(**kwargs):
    defaults = dict(
        design=DesignSpec(n=40),
        alphas=(0.0, 0.5),
        replications=30,
        seed=99,
    )
    defaults.update(kwargs)
    return StudyConfig(**defaults)


class TestRunStudy:
    def test_deterministic_across_worker_counts(self):
        serial = run_study(tiny_config(n_workers=1))
        parallel = run_study(tiny_config(n_workers=2))
        assert study_result_rows(serial) == study_result_rows(parallel)

    def test_deterministic_repeat(self):
        r1 = run_study(tiny_config())
        r2 = run_study(tiny_config())
        assert study_result_rows(r1) == study_result_rows(r2)

    def test_seed_changes_results(self):
        r1 = run_study(tiny_config())
        r2 = run_study(tiny_config(seed=100))
        assert study_result_rows(r1) != study_result_rows(r2)

    def test_cells_and_ranges(self):
        result = run_study(tiny_config())
        assert set(result.cells) == {(0.0, 40), (0.5, 40)}
        for cell in result.cells.values():
            assert cell["rmse"] >= 0.0
            for value in cell["level"].values():
                assert 0.0 <= value <= 1.0
            for value in cell["power"].values():
                assert 0.0 <= value <= 1.0

    def test_power_exceeds_level_at_distant_alternative(self):
        # the beta1 alternative 0.45 sits far from the null at n = 40
        result = run_study(tiny_config(replications=60))
        cell = result.cells[(0.0, 40)]
        assert cell["power"]["beta1"] > cell["level"]["beta1"]

    def test_sample_size_sweep(self):
        result = run_study(tiny_config(sample_sizes=(20, 40)))
        assert set(result.cells) == {(0.0, 20), (0.5, 20), (0.0, 40), (0.5, 40)}

    def test_csv_round_trip(self, tmp_path):
        result = run_study(tiny_config())
        path = tmp_path / "study.csv"
        write_study_csv(result, path)
        import csv as csv_mod

        with open(path) as handle:
            rows = list(csv_mod.DictReader(handle))
        originals = study_result_rows(result)
        assert len(rows) == len(originals)
        for got, want in zip(rows, originals):
            assert float(got["rmse_theta"]) == want["rmse_theta"]
            assert float(got["empirical_level"]) == want["empirical_level"]


class TestContiguousTable:
    def test_zero_shift_column_is_level(self):
        table = contiguous_table([0.0, 0.5, 1.5], [0.0, 5.0], sigma=1.0, level=0.05)
        for row in table.values():
            assert row[0.0] == 0.05

    def test_published_cells(self):
        table = contiguous_table([0.0, 0.2, 0.5, 1.0], [0.0, 5.0, 10.0, 20.0, 30.0], 1.0, 0.05)
        assert table[0.0][10.0] == pytest.approx(0.88, abs=0.01)
        assert table[0.5][10.0] == pytest.approx(0.81, abs=0.02)
        assert table[1.0][20.0] == pytest.approx(0.95, abs=0.02)
        assert table[0.2][30.0] == pytest.approx(1.00, abs=0.005)

    def test_sigma_validation(self):
        with pytest.raises(DomainError):
            contiguous_table([0.0], [0.0], sigma=0.0, level=0.05)


class TestCalibrationProperties:
    def test_level_approaches_nominal_with_n(self):
        # absolute deviation from the nominal level does not grow from
        # n = 50 to n = 200 beyond two binomial standard errors
        levels = {}
        for n in (50, 200):
            config = StudyConfig(
                design=DesignSpec(n=n),
                alphas=(0.0,),
                replications=400,
                seed=2024,
                hypotheses=(("beta1", 1, 1.0, None),),
            )
            levels[n] = run_study(config).cells[(0.0, n)]["level"]["beta1"]
        se2 = 2.0 * (0.05 * 0.95 / 400) ** 0.5
        assert abs(levels[200] - 0.05) <= abs(levels[50] - 0.05) + se2

    def test_power_increases_with_alternative_distance(self):
        powers = {}
        for alt in (0.8, 0.45):
            config = StudyConfig(
                design=DesignSpec(n=80),
                alphas=(0.3,),
                replications=200,
                seed=77,
                hypotheses=(("beta1", 1, 1.0, alt),),
            )
            cell = run_study(config).cells[(0.3, 80)]
            powers[alt] = cell["power"]["beta1"]
            assert 0.0 <= powers[alt] <= 1.0
        # the alternative 0.45 is further from the null of 1.0 than 0.8 is
        assert powers[0.45] > powers[0.8]

    def test_rmse_nonincreasing_in_alpha_under_contamination(self):
        config = StudyConfig(
            design=DesignSpec(n=200),
            alphas=(0.0, 0.3, 0.7, 1.0),
            replications=300,
            seed=11,
            contamination=ContaminationSpec(fraction=0.10),
            hypotheses=(("beta1", 1, 1.0, None),),
        )
        result = run_study(config)
        rmses = [result.cells[(a, 200)]["rmse"] for a in (0.0, 0.3, 0.7, 1.0)]
        assert all(r2 <= r1 + 0.01 for r1, r2 in zip(rmses, rmses[1:]))
