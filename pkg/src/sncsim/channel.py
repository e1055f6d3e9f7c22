"""
Time-varying extended channels, noise, and MIMO virtual-node expansion.

A channel realization holds one diagonal N x N extended-channel matrix per
(receiver, transmitter) link; each diagonal slot is an independent draw
(time-varying channel).  Multi-antenna topologies are mapped to an
equivalent single-antenna network by treating every antenna as a virtual
node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Topology:
    """Physical network: K transmitters, L receivers, antennas per node."""

    K: int
    L: int
    tx_antennas: tuple[int, ...]
    rx_antennas: tuple[int, ...]

    def __post_init__(self):
        if self.K < 1 or self.L < 1:
            raise ValueError("need at least one transmitter and receiver")
        if len(self.tx_antennas) != self.K or len(self.rx_antennas) != self.L:
            raise ValueError("antenna list lengths must match K and L")
        if min(self.tx_antennas) < 1 or min(self.rx_antennas) < 1:
            raise ValueError("antenna counts must be >= 1")


def single_antenna(K: int, L: int | None = None) -> Topology:
    """Topology with one antenna per node (L defaults to K)."""
    L = K if L is None else L
    return Topology(K, L, (1,) * K, (1,) * L)


@dataclass(frozen=True)
class VirtualTopology:
    """Expansion of a physical topology into M single-antenna virtual nodes.

    tx_map / rx_map give, for each virtual index, the originating
    (physical node, antenna) pair.
    """

    M: int
    tx_map: tuple[tuple[int, int], ...]
    rx_map: tuple[tuple[int, int], ...]


def expand_mimo_to_virtual(t: Topology) -> VirtualTopology:
    """Treat each antenna as a virtual single-antenna node.

    Activates M = min(total tx antennas, total rx antennas) virtual
    transmitters and M virtual receivers, taking antennas in node order
    then antenna order (lowest indices first).
    """
    M = min(sum(t.tx_antennas), sum(t.rx_antennas))
    tx_all = [(node, ant) for node in range(t.K) for ant in range(t.tx_antennas[node])]
    rx_all = [(node, ant) for node in range(t.L) for ant in range(t.rx_antennas[node])]
    return VirtualTopology(M, tuple(tx_all[:M]), tuple(rx_all[:M]))


@dataclass(frozen=True)
class NoiseModel:
    """Per-receiver noise variance (power units)."""

    sigma2: float

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("noise variance must be nonnegative")


@dataclass(frozen=True)
class ChannelRealization:
    """All diagonal extended-channel matrices for one trial.

    ``diag[l, k]`` is the length-N diagonal of the extended channel from
    virtual transmitter k to virtual receiver l.  Off-diagonals are zero
    by representation.
    """

    n_ext: int
    n_rx: int
    n_tx: int
    model: str  # "real" | "complex"
    diag: dict[tuple[int, int], np.ndarray] = field(repr=False, default_factory=dict)

    def matrix(self, l: int, k: int) -> np.ndarray:
        return np.diag(self.diag[l, k])


def _draw_coeffs(size, model, rng):
    if model == "complex":
        # circularly-symmetric unit variance: real/imag each variance 1/2
        return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
    if model == "real":
        return rng.standard_normal(size)
    raise ValueError(f"unknown channel model {model!r}")


def sample_extended_channel(
    vt: VirtualTopology, n_ext: int, model: str, rng: np.random.Generator
) -> ChannelRealization:
    """Draw i.i.d. unit-variance channel coefficients for every link and slot.

    Exact-zero draws are resampled (measure-zero event that would break
    channel inverses).
    """
    if n_ext < 1:
        raise ValueError("extension length must be >= 1")
    diag = {}
    for l in range(vt.M):
        for k in range(vt.M):
            h = _draw_coeffs(n_ext, model, rng)
            while np.any(h == 0):
                zero = h == 0
                h[zero] = _draw_coeffs(int(zero.sum()), model, rng)
            diag[l, k] = h
    return ChannelRealization(n_ext=n_ext, n_rx=vt.M, n_tx=vt.M, model=model, diag=diag)


def sample_noise(
    n_ext: int, noise: NoiseModel, model: str, rng: np.random.Generator
) -> np.ndarray:
    """Length-N noise vector with total variance sigma2 per entry.

    The complex model splits the variance equally across real/imag parts.
    """
    scale = np.sqrt(noise.sigma2)
    if model == "complex":
        return scale * (
            rng.standard_normal(n_ext) + 1j * rng.standard_normal(n_ext)
        ) / np.sqrt(2.0)
    if model == "real":
        return scale * rng.standard_normal(n_ext)
    raise ValueError(f"unknown channel model {model!r}")


def average_link_snr(p_signal: float, noise: NoiseModel) -> float:
    """Average per-link SNR: transmit power over noise power.

    Channels have unit variance, so this equals the average link SNR.
    """
    if p_signal < 0:
        raise ValueError("signal power must be nonnegative")
    return p_signal / noise.sigma2
