import numpy as np
import pytest

from rbmtomo.rbm import RbmParams, exact_distribution, free_energy
from rbmtomo.symmetry import (
    SpinRbm,
    bias_ratios,
    full_symmetry_report,
    spin_to_occupation,
    z2_invariance_check,
)


class TestSpinToOccupation:
    def test_zero_couplings_map_to_zero(self):
        params = spin_to_occupation(SpinRbm(np.zeros((3, 2))))
        assert np.all(params.weights == 0.0)
        assert np.all(params.visible_bias == 0.0)
        assert np.all(params.hidden_bias == 0.0)

    def test_single_coupling_hand_values(self):
        params = spin_to_occupation(SpinRbm(np.array([[0.7]])))
        assert params.weights[0, 0] == pytest.approx(2.8)
        assert params.visible_bias[0] == pytest.approx(-1.4)
        assert params.hidden_bias[0] == pytest.approx(-1.4)

    def test_distribution_matches_spin_model_enumeration(self):
        # oracle: enumerate the spin model joint over (s, t) in {-1, +1}
        # directly and marginalize; the mapped model must agree
        rng = np.random.default_rng(0)
        wt = rng.normal(0.0, 0.6, size=(3, 2))
        mapped = spin_to_occupation(SpinRbm(wt))

        n, n_h = wt.shape
        probs = np.zeros(1 << n)
        for v_idx in range(1 << n):
            v = np.array([(v_idx >> (n - 1 - i)) & 1 for i in range(n)])
            s = 2.0 * v - 1.0
            total = 0.0
            for h_idx in range(1 << n_h):
                t = np.array(
                    [2.0 * ((h_idx >> (n_h - 1 - j)) & 1) - 1.0 for j in range(n_h)]
                )
                total += np.exp(s @ wt @ t)
            probs[v_idx] = total
        probs /= probs.sum()

        np.testing.assert_allclose(
            exact_distribution(mapped).probabilities, probs, atol=1e-12
        )

    def test_spin_rbm_validation(self):
        with pytest.raises(ValueError):
            SpinRbm(np.zeros(3))
        with pytest.raises(ValueError):
            SpinRbm(np.array([[np.inf]]))


class TestBiasRatios:
    def test_mapped_models_have_ratio_minus_two(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            n_h = int(rng.integers(1, 6))
            wt = rng.normal(0.0, 1.0, size=(n, n_h))
            report = bias_ratios(spin_to_occupation(SpinRbm(wt)))
            defined_a = ~np.isnan(report.alpha)
            defined_b = ~np.isnan(report.beta)
            np.testing.assert_allclose(report.alpha[defined_a], -2.0, atol=1e-10)
            np.testing.assert_allclose(report.beta[defined_b], -2.0, atol=1e-10)

    def test_near_zero_bias_flagged_undefined(self):
        params = RbmParams(
            np.array([[1.0], [1.0]]), np.array([0.0, 2.0]), np.array([4.0])
        )
        report = bias_ratios(params)
        assert report.undefined_alpha == (0,)
        assert np.isnan(report.alpha[0])
        assert report.alpha[1] == pytest.approx(0.5)
        assert report.beta[0] == pytest.approx(0.5)
        assert report.undefined_beta == ()

    def test_z2_deviation_not_evaluated_here(self):
        report = bias_ratios(RbmParams(np.ones((2, 2)), np.ones(2), np.ones(2)))
        assert np.isnan(report.z2_deviation)


class TestZ2Invariance:
    def test_zero_parameters_exactly_invariant(self):
        params = RbmParams(np.zeros((3, 3)), np.zeros(3), np.zeros(3))
        assert z2_invariance_check(params) == 0.0

    def test_mapped_models_invariant_to_enumeration_precision(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            n_h = int(rng.integers(1, 6))
            wt = rng.normal(0.0, 1.0, size=(n, n_h))
            deviation = z2_invariance_check(spin_to_occupation(SpinRbm(wt)))
            assert deviation <= 1e-12

    def test_visible_bias_breaks_invariance(self):
        params = RbmParams(np.zeros((2, 2)), np.array([5.0, 0.0]), np.zeros(2))
        assert z2_invariance_check(params) > 0.1

    def test_flip_map_is_index_reversal(self):
        # p(v-bar) for the lexicographic basis is exactly the reversed vector
        rng = np.random.default_rng(3)
        params = RbmParams(
            rng.normal(size=(3, 2)), rng.normal(size=3), rng.normal(size=2)
        )
        states = np.array(
            [[(i >> 2) & 1, (i >> 1) & 1, i & 1] for i in range(8)], dtype=np.uint8
        )
        flipped = 1 - states
        f = free_energy(params, states)
        f_flipped = free_energy(params, flipped)
        np.testing.assert_allclose(f_flipped, f[::-1], atol=1e-12)


class TestFullReport:
    def test_combines_ratios_and_deviation(self):
        wt = np.array([[0.5, -0.3], [0.2, 0.8]])
        report = full_symmetry_report(spin_to_occupation(SpinRbm(wt)))
        assert report.z2_deviation <= 1e-12
        defined = ~np.isnan(report.alpha)
        np.testing.assert_allclose(report.alpha[defined], -2.0, atol=1e-10)
