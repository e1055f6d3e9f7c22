import numpy as np
import pytest

from sncsim.channel import (
    NoiseModel,
    Topology,
    average_link_snr,
    expand_mimo_to_virtual,
    sample_extended_channel,
    sample_noise,
    single_antenna,
)


def test_topology_validation():
    with pytest.raises(ValueError):
        Topology(0, 1, (), (1,))
    with pytest.raises(ValueError):
        Topology(2, 2, (1,), (1, 1))
    with pytest.raises(ValueError):
        Topology(1, 1, (0,), (1,))


class TestVirtualExpansion:
    def test_single_antenna_identity(self):
        vt = expand_mimo_to_virtual(single_antenna(2))
        assert vt.M == 2
        assert vt.tx_map == ((0, 0), (1, 0))
        assert vt.rx_map == ((0, 0), (1, 0))

    def test_min_rule_with_asymmetric_antennas(self):
        vt = expand_mimo_to_virtual(Topology(2, 2, (2, 1), (1, 1)))
        assert vt.M == 2
        # antennas taken in node order then antenna order
        assert vt.tx_map == ((0, 0), (0, 1))

    def test_three_by_two(self):
        vt = expand_mimo_to_virtual(Topology(3, 2, (1, 1, 1), (2, 2)))
        assert vt.M == 3
        assert vt.rx_map == ((0, 0), (0, 1), (1, 0))


class TestChannelSampling:
    def test_deterministic_under_fixed_seed(self):
        vt = expand_mimo_to_virtual(single_antenna(2))
        a = sample_extended_channel(vt, 3, "complex", np.random.default_rng(42))
        b = sample_extended_channel(vt, 3, "complex", np.random.default_rng(42))
        for key in a.diag:
            assert np.array_equal(a.diag[key], b.diag[key])

    def test_unit_variance(self):
        vt = expand_mimo_to_virtual(single_antenna(1, 1))
        rng = np.random.default_rng(0)
        draws = np.concatenate([
            sample_extended_channel(vt, 10**4, "complex", rng).diag[0, 0]
            for _ in range(10)
        ])
        assert np.mean(np.abs(draws) ** 2) == pytest.approx(1.0, abs=0.02)

    def test_real_model_has_no_imaginary_part(self):
        vt = expand_mimo_to_virtual(single_antenna(2))
        h = sample_extended_channel(vt, 4, "real", np.random.default_rng(1))
        for d in h.diag.values():
            assert np.isrealobj(d)

    def test_no_zero_entries(self):
        vt = expand_mimo_to_virtual(single_antenna(2))
        h = sample_extended_channel(vt, 64, "real", np.random.default_rng(5))
        for d in h.diag.values():
            assert np.all(d != 0)

    def test_link_independence_spot_check(self):
        vt = expand_mimo_to_virtual(single_antenna(2))
        rng = np.random.default_rng(9)
        n = 10**5
        h = sample_extended_channel(vt, n, "real", rng)
        c = np.corrcoef(h.diag[0, 0], h.diag[0, 1])[0, 1]
        assert abs(c) < 0.02
        # distinct slots of one link
        d = h.diag[1, 1]
        assert abs(np.corrcoef(d[:-1], d[1:])[0, 1]) < 0.02

    def test_matrix_is_diagonal(self):
        vt = expand_mimo_to_virtual(single_antenna(2))
        h = sample_extended_channel(vt, 3, "complex", np.random.default_rng(2))
        m = h.matrix(0, 1)
        assert np.array_equal(m - np.diag(np.diag(m)), np.zeros_like(m))


class TestNoise:
    def test_zero_variance_gives_zero_vector(self):
        v = sample_noise(5, NoiseModel(0.0), "complex", np.random.default_rng(0))
        assert np.all(v == 0)

    def test_empirical_variance(self):
        rng = np.random.default_rng(11)
        v = sample_noise(10**5, NoiseModel(2.0), "complex", rng)
        assert np.mean(np.abs(v) ** 2) == pytest.approx(2.0, abs=0.05)
        v = sample_noise(10**5, NoiseModel(2.0), "real", rng)
        assert np.var(v) == pytest.approx(2.0, abs=0.05)

    def test_seed_replay(self):
        a = sample_noise(8, NoiseModel(1.0), "real", np.random.default_rng(3))
        b = sample_noise(8, NoiseModel(1.0), "real", np.random.default_rng(3))
        assert np.array_equal(a, b)

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            NoiseModel(-1.0)


def test_average_link_snr():
    assert average_link_snr(1.0, NoiseModel(1.0)) == 1.0
    assert average_link_snr(100.0, NoiseModel(1.0)) == 100.0
    assert average_link_snr(0.0, NoiseModel(2.0)) == 0.0
