"""Partitions, Schur and zonal polynomials, and matrix-argument hypergeometric series.

Matrix-argument hypergeometric functions of Hermitian argument reduce to sums
over integer partitions tau graded by weight k:

    pFq(a; b; X) = sum_k sum_{tau of weight k, length <= m}
                   prod_i (a_i)_tau / prod_j (b_j)_tau * C_tau(X) / k!

where (a)_tau is the generalized Pochhammer symbol and C_tau the zonal
polynomial of the complex (beta = 2) case, identified with a normalized Schur
function:  C_tau(X) = k! d_tau / (m)_tau * s_tau(x_1, ..., x_m).

Everything here is a pure function of its inputs and safe to call from
multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import poch

from .errors import DivergenceError, NonConvergedError, PoleError

__all__ = [
    "Partition",
    "enumerate_partitions",
    "gen_pochhammer",
    "schur",
    "schur_bialternant",
    "schur_jacobi_trudi",
    "schur_dimension",
    "zonal",
    "HypSeriesResult",
    "hyp_matrix_series",
    "hyp_matrix_series_two",
]

#: relative eigenvalue gap below which the bialternant ratio is abandoned
DEGENERATE_GAP = 1e-8

#: hard cap on the total weight of the partition sums
MAX_WEIGHT = 60


@dataclass(frozen=True)
class Partition:
    """Non-increasing tuple of positive integers (trailing zeros stripped)."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 0 for p in parts):
            raise ValueError(f"negative part in {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"parts not non-increasing: {parts}")
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        object.__setattr__(self, "parts", parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def conjugate(self) -> "Partition":
        if not self.parts:
            return Partition(())
        return Partition(tuple(sum(1 for p in self.parts if p > j)
                               for j in range(self.parts[0])))

    def padded(self, m: int) -> tuple:
        return self.parts + (0,) * (m - len(self.parts))

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)


def _as_parts(tau) -> tuple:
    if isinstance(tau, Partition):
        return tau.parts
    return Partition(tuple(tau)).parts


def enumerate_partitions(k: int, m: int) -> list[Partition]:
    """All partitions of weight k with at most m parts, lexicographically decreasing."""
    if k < 0 or m < 1:
        raise ValueError("need k >= 0 and m >= 1")
    return [Partition(t) for t in _partition_tuples(k, m)]


@lru_cache(maxsize=None)
def _partition_tuples(k: int, m: int, max_part: int | None = None) -> tuple:
    if max_part is None:
        max_part = k
    if k == 0:
        return ((),)
    if m == 0:
        return ()
    out = []
    for first in range(min(k, max_part), 0, -1):
        for rest in _partition_tuples(k - first, m - 1, first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _partition_array(k: int, m: int) -> np.ndarray:
    """Partitions of weight k, length <= m, zero-padded to m columns."""
    tuples = _partition_tuples(k, m)
    arr = np.zeros((len(tuples), m), dtype=np.int64)
    for r, t in enumerate(tuples):
        arr[r, : len(t)] = t
    arr.setflags(write=False)
    return arr


def gen_pochhammer(a: float, tau, m: int) -> float:
    """Generalized Pochhammer symbol (a)_tau over m rows.

    Computed as a product of rising factorials (a - i + 1)_{tau_i}, which is a
    polynomial in a and never overflows for weights up to the series cap.
    """
    parts = _as_parts(tau)
    if len(parts) > m:
        raise ValueError(f"partition longer than ambient size m={m}")
    val = 1.0
    for i in range(1, m + 1):
        ki = parts[i - 1] if i <= len(parts) else 0
        if ki:
            val *= float(poch(a - i + 1, ki))
    if not np.isfinite(val):
        raise PoleError(f"({a})_{parts} is singular for m={m}")
    return val


def _h_table(x: np.ndarray, rmax: int) -> np.ndarray:
    """Complete homogeneous symmetric polynomials h_0 .. h_rmax of x."""
    h = np.zeros(rmax + 1)
    h[0] = 1.0
    for xi in x:
        for r in range(1, rmax + 1):
            h[r] += xi * h[r - 1]
    return h


def _det_small(mats: np.ndarray) -> np.ndarray:
    """Determinants of a stack of n x n matrices, n <= 4, by cofactors."""
    n = mats.shape[-1]
    if n == 1:
        return mats[..., 0, 0]
    if n == 2:
        return mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    if n == 3:
        a, b, c = mats[..., 0, 0], mats[..., 0, 1], mats[..., 0, 2]
        d, e, f = mats[..., 1, 0], mats[..., 1, 1], mats[..., 1, 2]
        g, h, i = mats[..., 2, 0], mats[..., 2, 1], mats[..., 2, 2]
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    if n == 4:
        out = np.zeros(mats.shape[:-2])
        for j in range(4):
            minor = np.delete(np.delete(mats, 0, axis=-2), j, axis=-1)
            out += (-1.0) ** j * mats[..., 0, j] * _det_small(minor)
        return out
    return np.linalg.det(mats)


def _schur_layer(parr: np.ndarray, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Schur values s_tau(x) for a whole weight layer of partitions.

    Jacobi-Trudi determinants det(h_{tau_i - i + j}) after factoring out the
    common minimum part, which avoids cancellation for fat partitions.
    """
    n, m = parr.shape
    mu = parr[:, m - 1]
    stripped = parr - mu[:, None]
    # index matrix tau_i - i + j (0-based i, j), clipped: h_{r<0} = 0
    i_idx = np.arange(m)
    idx = stripped[:, :, None] - i_idx[None, :, None] + i_idx[None, None, :]
    vals = np.where(idx >= 0, h[np.clip(idx, 0, None)], 0.0)
    dets = _det_small(vals)
    base = np.where(mu > 0, np.prod(x) ** mu, 1.0)
    return base * dets


def _dim_layer(parr: np.ndarray) -> np.ndarray:
    """d_tau = s_tau(1,...,1) for a layer, by the hook-type product formula."""
    n, m = parr.shape
    out = np.ones(n)
    for i in range(m):
        for j in range(i + 1, m):
            out *= (parr[:, i] - parr[:, j] + j - i) / (j - i)
    return out


def _poch_layer(a: float, parr: np.ndarray) -> np.ndarray:
    """(a)_tau for a layer of partitions."""
    n, m = parr.shape
    out = np.ones(n)
    for i in range(m):
        col = parr[:, i]
        nz = col > 0
        if np.any(nz):
            out[nz] *= poch(a - i, col[nz].astype(float))
    return out


def schur_jacobi_trudi(tau, x) -> float:
    """Schur polynomial via the Jacobi-Trudi determinant in the h basis."""
    x = np.asarray(x, dtype=float)
    parts = _as_parts(tau)
    m = len(x)
    if len(parts) > m:
        return 0.0
    parr = np.zeros((1, m), dtype=np.int64)
    parr[0, : len(parts)] = parts
    rmax = (parts[0] if parts else 0) + m
    h = _h_table(x, rmax)
    return float(_schur_layer(parr, x, h)[0])


def schur_bialternant(tau, x) -> float:
    """Schur polynomial as det(x_i^{tau_j + m - j}) / det(x_i^{m - j})."""
    x = np.asarray(x, dtype=float)
    m = len(x)
    parts = _as_parts(tau)
    if len(parts) > m:
        return 0.0
    padded = np.array(parts + (0,) * (m - len(parts)))
    jj = np.arange(m)
    num = x[:, None] ** (padded[None, :] + m - 1 - jj[None, :])
    den = x[:, None] ** (m - 1 - jj[None, :])
    return float(np.linalg.det(num) / np.linalg.det(den))


def schur(tau, x) -> float:
    """Schur polynomial s_tau(x); total on real inputs.

    Uses the bialternant ratio for well-separated eigenvalues and switches to
    Jacobi-Trudi when the minimum gap drops below DEGENERATE_GAP relative,
    where the ratio is 0/0.
    """
    x = np.asarray(x, dtype=float)
    if len(x) == 1:
        return schur_jacobi_trudi(tau, x)
    xs = np.sort(x)
    scale = np.max(np.abs(x)) if np.max(np.abs(x)) > 0 else 1.0
    if np.min(np.diff(xs)) < DEGENERATE_GAP * scale:
        return schur_jacobi_trudi(tau, x)
    return schur_bialternant(tau, x)


def schur_dimension(tau, m: int) -> float:
    """d_tau = s_tau(1,...,1), by the closed product over part pairs."""
    parts = _as_parts(tau)
    if len(parts) > m:
        return 0.0
    padded = parts + (0,) * (m - len(parts))
    val = 1.0
    for i in range(m):
        for j in range(i + 1, m):
            val *= (padded[i] - padded[j] + j - i) / (j - i)
    return val


def zonal(tau, x) -> float:
    """Zonal polynomial C_tau(X) = k! d_tau / (m)_tau * s_tau(x) of the spectrum x.

    Normalized so that (tr X)^k = sum over |tau| = k of C_tau(X).
    """
    x = np.asarray(x, dtype=float)
    m = len(x)
    parts = _as_parts(tau)
    k = sum(parts)
    if len(parts) > m:
        return 0.0
    return (math.factorial(k) * schur_dimension(parts, m)
            / gen_pochhammer(m, parts, m) * schur(parts, x))


@dataclass(frozen=True)
class HypSeriesResult:
    """Partial sum of a matrix-argument hypergeometric series.

    tail is the absolute sum of the last weight layer, a crude bound on the
    truncation error when the layers are decaying.
    """

    value: float
    tail: float
    converged: bool
    top_weight: int

    def __float__(self):
        return self.value


def _check_domain(a, b, radius) -> None:
    p, q = len(a), len(b)
    if p > q + 1:
        raise DivergenceError(f"pFq with p={p} > q+1={q + 1} diverges")
    if p == q + 1 and radius >= 1.0:
        raise DivergenceError(
            f"p = q+1 series requires spectral radius < 1, got {radius:.6g}")


def _series_sum(a, b, x, layer_fn, tol, max_weight, strict, what):
    total = 0.0
    tail = 0.0
    small_layers = 0
    k = 0
    for k in range(max_weight + 1):
        layer, layer_abs = layer_fn(k)
        total += layer
        tail = layer_abs
        if layer_abs <= tol * max(abs(total), 1e-300):
            small_layers += 1
            if small_layers >= 2:
                return HypSeriesResult(total, tail, True, k)
        else:
            small_layers = 0
    result = HypSeriesResult(total, tail, False, k)
    if strict:
        raise NonConvergedError(
            f"{what} did not converge by weight {max_weight}: tail {tail:.3e}",
            value=total, tail=tail)
    return result


def hyp_matrix_series(a: Sequence[float], b: Sequence[float], x,
                      tol: float = 1e-12, max_weight: int = MAX_WEIGHT,
                      strict: bool = True) -> HypSeriesResult:
    """pFq(a; b; X) by the zonal series, X given through its real spectrum x.

    Sums whole weight layers and stops once two consecutive layers fall below
    tol relative to the accumulated sum.  Raises DivergenceError outside the
    convergence domain and, if strict, NonConvergedError at the weight cap.
    """
    x = np.asarray(x, dtype=float)
    m = len(x)
    a = tuple(float(v) for v in a)
    b = tuple(float(v) for v in b)
    _check_domain(a, b, float(np.max(np.abs(x))) if m else 0.0)
    h = _h_table(x, max_weight + m + 1)

    def layer(k):
        parr = _partition_array(k, m)
        coeff = np.ones(len(parr))
        for ai in a:
            coeff *= _poch_layer(ai, parr)
        for bi in b:
            den = _poch_layer(bi, parr)
            if np.any(den == 0.0) or np.any(~np.isfinite(den)):
                raise PoleError(f"denominator Pochhammer ({bi})_tau vanishes at weight {k}")
            coeff /= den
        # C_tau(X)/k! = d_tau/(m)_tau * s_tau(x)
        coeff *= _dim_layer(parr) / _poch_layer(float(m), parr)
        terms = coeff * _schur_layer(parr, x, h)
        return float(np.sum(terms)), float(np.sum(np.abs(terms)))

    return _series_sum(a, b, x, layer, tol, max_weight, strict, "hyp_matrix_series")


def hyp_matrix_series_two(a: Sequence[float], b: Sequence[float], x, y,
                          tol: float = 1e-12, max_weight: int = MAX_WEIGHT,
                          strict: bool = True) -> HypSeriesResult:
    """Two-argument series pFq(a; b; X, Y) with kernel C_tau(X) C_tau(Y) / C_tau(I).

    After the zonal-to-Schur reduction each term is
    prod (a)_tau / prod (b)_tau * s_tau(x) s_tau(y) / (m)_tau.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("spectra must share the ambient size m")
    m = len(x)
    a = tuple(float(v) for v in a)
    b = tuple(float(v) for v in b)
    rad = float(np.max(np.abs(x)) * np.max(np.abs(y))) if m else 0.0
    _check_domain(a, b, rad)
    hx = _h_table(x, max_weight + m + 1)
    hy = _h_table(y, max_weight + m + 1)

    def layer(k):
        parr = _partition_array(k, m)
        coeff = np.ones(len(parr))
        for ai in a:
            coeff *= _poch_layer(ai, parr)
        for bi in b:
            den = _poch_layer(bi, parr)
            if np.any(den == 0.0) or np.any(~np.isfinite(den)):
                raise PoleError(f"denominator Pochhammer ({bi})_tau vanishes at weight {k}")
            coeff /= den
        coeff /= _poch_layer(float(m), parr)
        terms = coeff * _schur_layer(parr, x, hx) * _schur_layer(parr, y, hy)
        return float(np.sum(terms)), float(np.sum(np.abs(terms)))

    return _series_sum(a, b, x, layer, tol, max_weight, strict, "hyp_matrix_series_two")
