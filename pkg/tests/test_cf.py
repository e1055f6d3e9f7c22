import math

import numpy as np
import pytest

from sncsim.cf_baseline import cf_computation_rate, cf_select_coeffs, cf_trial_sum_rate
from sncsim.channel import ChannelRealization, expand_mimo_to_virtual, sample_extended_channel, single_antenna
from sncsim.gf import PrimeField


def real_channel(K, N, seed):
    vt = expand_mimo_to_virtual(single_antenna(K))
    return sample_extended_channel(vt, N, "real", np.random.default_rng(seed))


class TestComputationRate:
    def test_direct_evaluation(self):
        # ||a||^2 = 2, (h.a)^2 = 4, ||h||^2 = 2, rho = 1:
        # denom = 2 - 4/3 = 2/3 -> R = 0.5 log2(3/2)
        r = cf_computation_rate([1.0, 1.0], [1, 1], rho=1.0)
        assert r == pytest.approx(0.5 * math.log2(1.5), rel=1e-12)

    def test_mismatched_coefficients_clamp_to_zero(self):
        assert cf_computation_rate([1.0, 0.0], [0, 1], rho=1e6) == 0.0

    def test_asymptotic_growth(self):
        rho = 1e6
        r = cf_computation_rate([1.0, 0.0], [1, 0], rho)
        assert r == pytest.approx(0.5 * math.log2(1 + rho), rel=1e-3)

    def test_sign_flip_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            h = rng.standard_normal(3)
            a = rng.integers(-3, 4, size=3)
            if not np.any(a):
                continue
            for rho in (1.0, 100.0):
                assert cf_computation_rate(h, a, rho) == pytest.approx(
                    cf_computation_rate(h, -a, rho))

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            cf_computation_rate([1.0, 1.0], [0, 0], 1.0)


class TestCoefficientSelection:
    def test_matched_channel_picks_all_ones(self):
        a = cf_select_coeffs([1.0, 1.0], rho=1e4, radius=3)
        assert list(a) == [1, 1]

    def test_single_dominant_coefficient(self):
        assert list(cf_select_coeffs([1.0, 0.0], rho=100.0)) == [1, 0]

    def test_never_all_zero(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a = cf_select_coeffs(rng.standard_normal(2), rho=10.0)
            assert np.any(a)

    def test_beats_every_candidate(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            h = rng.standard_normal(2)
            rho = float(rng.uniform(1, 1000))
            best = cf_select_coeffs(h, rho, radius=2)
            r_best = cf_computation_rate(h, best, rho)
            for a0 in range(-2, 3):
                for a1 in range(-2, 3):
                    if a0 == a1 == 0:
                        continue
                    assert cf_computation_rate(h, [a0, a1], rho) <= r_best + 1e-12

    def test_radius_saturation(self):
        # radius 3 almost always matches a radius-4 re-search at moderate
        # SNR (the optimal coefficient magnitude grows with SNR, so the
        # bound is checked in the 0-15 dB regime)
        rng = np.random.default_rng(3)
        agree = 0
        trials = 200
        for _ in range(trials):
            h = rng.standard_normal(2)
            rho = 10 ** rng.uniform(0, 1.5)
            r3 = cf_computation_rate(h, cf_select_coeffs(h, rho, 3), rho)
            r4 = cf_computation_rate(h, cf_select_coeffs(h, rho, 4), rho)
            if abs(r3 - r4) < 1e-9:
                agree += 1
        assert agree >= 0.99 * trials

    def test_bad_radius_rejected(self):
        with pytest.raises(ValueError):
            cf_select_coeffs([1.0], 1.0, radius=0)


class TestTrialSumRate:
    def test_single_user_never_rank_deficient(self):
        h = real_channel(1, 4, seed=0)
        rho = 100.0
        cap = math.log2(1 + rho)
        total, outage = cf_trial_sum_rate(h, rho, PrimeField(2), cap=cap)
        assert outage == 0.0
        expected = sum(
            min(cf_computation_rate([h.diag[0, 0][i]],
                                    cf_select_coeffs([h.diag[0, 0][i]], rho), rho), cap)
            for i in range(4))
        assert total == pytest.approx(expected)

    def test_identical_receivers_force_outage(self):
        # both receivers see the same channel row -> same coefficients ->
        # rank-deficient stack, slot contributes nothing
        row = np.array([1.3, 0.7])
        diag = {(l, k): np.array([row[k]]) for l in range(2) for k in range(2)}
        h = ChannelRealization(n_ext=1, n_rx=2, n_tx=2, model="real", diag=diag)
        total, outage = cf_trial_sum_rate(h, rho=100.0, field=PrimeField(2))
        assert total == 0.0
        assert outage == 1.0

    def test_outage_iff_determinant_vanishes_mod_q(self):
        rng = np.random.default_rng(4)
        field = PrimeField(2)
        for seed in range(30):
            h = real_channel(2, 1, seed=seed)
            rho = 10 ** rng.uniform(1, 4)
            rows = [np.array([h.diag[l, k][0] for k in range(2)]) for l in range(2)]
            A = np.vstack([cf_select_coeffs(r, rho) for r in rows])
            total, outage = cf_trial_sum_rate(h, rho, field)
            det_zero = int(round(np.linalg.det(A))) % 2 == 0
            assert (outage == 1.0) == det_zero
            assert (total == 0.0) == det_zero

    def test_complex_channels_rejected(self):
        vt = expand_mimo_to_virtual(single_antenna(2))
        h = sample_extended_channel(vt, 2, "complex", np.random.default_rng(0))
        with pytest.raises(ValueError):
            cf_trial_sum_rate(h, 10.0, PrimeField(2))
