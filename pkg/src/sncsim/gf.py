"""
Exact arithmetic and dense linear algebra over prime fields GF(q).

Matrices are plain numpy integer arrays with entries reduced to [0, q).
All elimination is done with Python/numpy integer arithmetic, so results
are exact for any prime q that fits in int64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GfError(Exception):
    """Base class for finite-field errors."""


class ZeroInversionError(GfError):
    """Attempted multiplicative inverse of 0."""


class RankDeficientError(GfError):
    """Linear system has no unique solution (column-rank deficiency)."""


class InconsistentSystemError(GfError):
    """Redundant equations disagree with the unique solution."""


class FieldSearchExhaustedError(GfError):
    """No prime modulus below the search bound preserves the target rank."""


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    d = 2
    while d * d <= q:
        if q % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PrimeField:
    """Prime field GF(q); primality is verified at construction."""

    q: int

    def __post_init__(self):
        if not _is_prime(self.q):
            raise ValueError(f"field size must be prime, got {self.q}")

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise ZeroInversionError("0 has no multiplicative inverse")
        return pow(int(a), -1, self.q)

    def reduce(self, m) -> np.ndarray:
        """Return *m* as an int64 array with entries reduced mod q."""
        return np.asarray(m, dtype=np.int64) % self.q


def _eliminate(m: np.ndarray, field: PrimeField):
    """Row-reduce a copy of *m* mod q.

    Returns (reduced matrix, pivot column list, row permutation applied).
    """
    q = field.q
    a = field.reduce(m).copy()
    rows, cols = a.shape
    pivot_cols: list[int] = []
    perm = list(range(rows))
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot = -1
        for i in range(r, rows):
            if a[i, c] != 0:
                pivot = i
                break
        if pivot == -1:
            continue
        if pivot != r:
            a[[r, pivot]] = a[[pivot, r]]
            perm[r], perm[pivot] = perm[pivot], perm[r]
        inv = field.inv(int(a[r, c]))
        a[r] = (a[r] * inv) % q
        for i in range(rows):
            if i != r and a[i, c] != 0:
                a[i] = (a[i] - a[i, c] * a[r]) % q
        pivot_cols.append(c)
        r += 1
    return a, pivot_cols, perm


def gf_rank(m, field: PrimeField) -> int:
    """Rank of *m* over GF(q) via Gaussian elimination."""
    a = field.reduce(m)
    if a.size == 0:
        return 0
    _, pivots, _ = _eliminate(a, field)
    return len(pivots)


def gf_select_independent_rows(m, field: PrimeField) -> list[int]:
    """Indices of a maximal independent row set, chosen greedily.

    Rows are scanned in ascending order; a row is kept iff it increases
    the rank of the set kept so far.  The result has length gf_rank(m).
    """
    a = field.reduce(m)
    rows, cols = a.shape
    q = field.q
    basis: list[np.ndarray] = []  # reduced rows, each with a leading 1
    lead: list[int] = []  # leading column of each basis row
    kept: list[int] = []
    for i in range(rows):
        v = a[i].copy()
        for b, c in zip(basis, lead):
            if v[c] != 0:
                v = (v - v[c] * b) % q
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            continue
        c = int(nz[0])
        v = (v * field.inv(int(v[c]))) % q
        basis.append(v)
        lead.append(c)
        kept.append(i)
    return kept


def gf_solve(a, rhs, field: PrimeField) -> np.ndarray:
    """Solve a @ x = rhs (mod q) for the unique x.

    *a* must have full column rank over GF(q).  The solution is computed
    from an independent-row subsystem; every redundant row is then checked
    against it and a mismatch raises InconsistentSystemError (upstream this
    signals a demodulation error).
    """
    a = field.reduce(a)
    rhs = field.reduce(rhs).ravel()
    rows, cols = a.shape
    if rhs.shape[0] != rows:
        raise ValueError("rhs length must equal the number of rows")
    idx = gf_select_independent_rows(a, field)
    if len(idx) < cols:
        raise RankDeficientError(
            f"column rank {len(idx)} < {cols}; system has no unique solution"
        )
    sub = a[idx]
    red, pivots, perm = _eliminate(
        np.hstack([sub, rhs[idx].reshape(-1, 1)]), field
    )
    if len(pivots) != cols or pivots != list(range(cols)):
        raise RankDeficientError("independent-row subsystem is singular")
    x = red[:cols, cols].copy()
    residual = (a @ x - rhs) % field.q
    if np.any(residual != 0):
        raise InconsistentSystemError("redundant rows disagree with solution")
    return x


def find_valid_field_size(f_int, target_rank: int, q_max: int = 101) -> PrimeField:
    """Smallest prime q <= q_max with gf_rank(f_int mod q) == target_rank."""
    f_int = np.asarray(f_int, dtype=np.int64)
    for q in range(2, q_max + 1):
        if not _is_prime(q):
            continue
        field = PrimeField(q)
        if gf_rank(f_int, field) == target_rank:
            return field
    raise FieldSearchExhaustedError(
        f"no prime <= {q_max} preserves rank {target_rank}"
    )
