"""Scalar special functions and determinantal evaluators for matrix-argument
hypergeometric functions.

The determinantal route expresses a matrix-argument pFq through scalar
hypergeometric functions of the eigenvalues, divided by a Vandermonde
determinant.  It is the workhorse for the closed-form laws; the zonal series
in `symfun` serves as its independent cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln, gammasgn, iv, modstruve

from .errors import (DegenerateSpectrumWarning, DivergenceError,
                     NonConvergedError, PoleError)

__all__ = [
    "gamma_multivariate",
    "gamma_multivariate_ratio",
    "bessel_i",
    "struve_l",
    "ScalarHypParams",
    "hyp_scalar",
    "gross_richards",
    "two_matrix_determinantal",
    "harish_chandra_0f0",
]

#: relative spectral gap below which determinant formulas take the jitter path
DEGENERATE_GAP = 1e-7

#: relative size of the symmetric perturbation applied on the jitter path
JITTER = 1e-6

_MAX_TERMS = 500
_KUMMER_SWITCH = -30.0
_ASYMPTOTIC_SWITCH = -50.0


def _is_nonpositive_int(x: float, tol: float = 1e-12) -> bool:
    return x <= tol and abs(x - round(x)) <= tol


def gamma_multivariate(a: float, m: int) -> float:
    """Complex multivariate gamma pi^{m(m-1)/2} prod_{j=1}^m Gamma(a - j + 1)."""
    val = math.pi ** (m * (m - 1) / 2)
    for j in range(1, m + 1):
        if _is_nonpositive_int(a - j + 1):
            raise PoleError(f"Gamma_{m}({a}) hits a gamma pole at j={j}")
        val *= math.gamma(a - j + 1)
    return val


def gamma_multivariate_ratio(a: float, b: float, m: int) -> float:
    """Gamma_m(a) / Gamma_m(b); the pi factors cancel, computed in log space."""
    logr, sign = 0.0, 1.0
    for j in range(1, m + 1):
        for arg, s in ((a - j + 1, +1), (b - j + 1, -1)):
            if _is_nonpositive_int(arg):
                raise PoleError(f"gamma pole at argument {arg}")
            logr += s * gammaln(arg)
            sign *= gammasgn(arg) ** s
    return sign * math.exp(logr)


def bessel_i(nu: float, z) -> float | np.ndarray:
    """Modified Bessel function I_nu(z) for z >= 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("bessel_i requires z >= 0")
    out = iv(nu, z)
    if out.ndim == 0:
        return float(out)
    return out


def struve_l(nu: float, z) -> float | np.ndarray:
    """Modified Struve function L_nu(z) for z >= 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("struve_l requires z >= 0")
    out = modstruve(nu, z)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ScalarHypParams:
    """Numerator/denominator parameters of a scalar pFq."""

    a: tuple
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        for bj in self.b:
            if _is_nonpositive_int(bj):
                raise PoleError(f"denominator parameter {bj} is a non-positive integer")


def _hyp_series(a, b, z, tol, max_terms):
    """Plain power series with periodic rescaling; returns (mantissa, exponent)."""
    term, total, expo = 1.0, 1.0, 0.0
    for k in range(max_terms):
        fac = z / (k + 1.0)
        for ai in a:
            fac *= ai + k
        for bj in b:
            fac /= bj + k
        term *= fac
        total += term
        if abs(term) <= tol * abs(total):
            return total, expo
        if abs(total) > 1e250:
            total *= 1e-250
            term *= 1e-250
            expo += 250.0 * math.log(10.0)
    raise NonConvergedError(
        f"scalar {len(a)}F{len(b)}({a};{b};{z}) needs more than {max_terms} terms",
        value=total * math.exp(expo), tail=term)


def _hyp1f1_asymptotic_negative(a, b, x, tol):
    """1F1(a, b, -x) for large x > 0 via the algebraic asymptotic expansion.

    M(a,b,-x) ~ Gamma(b)/Gamma(b-a) x^{-a} sum_n (a)_n (a-b+1)_n / (n! x^n),
    truncated at the smallest term; the e^{-x} companion branch is negligible.
    """
    s, term = 1.0, 1.0
    prev = math.inf
    for n in range(60):
        term *= (a + n) * (a - b + 1 + n) / ((n + 1.0) * x)
        if abs(term) >= prev:
            break
        s += term
        prev = abs(term)
        if abs(term) <= tol * abs(s):
            break
    logpref = gammaln(b) - gammaln(b - a) - a * math.log(x)
    sign = gammasgn(b) * gammasgn(b - a)
    return sign * math.exp(logpref) * s


def hyp_scalar(params: ScalarHypParams | tuple, z: float,
               tol: float = 1e-12, max_terms: int = _MAX_TERMS) -> float:
    """Scalar hypergeometric pFq(a; b; z) with tail below tol.

    Entire for p <= q; |z| < 1 required for p = q+1.  A 1F1 at z < -30 goes
    through the Kummer transform 1F1(a,b,z) = e^z 1F1(b-a,b,-z) in scaled
    arithmetic, and below -50 through the algebraic large-argument expansion,
    so that deeply negative arguments lose no precision to cancellation.
    """
    if not isinstance(params, ScalarHypParams):
        params = ScalarHypParams(*params)
    a, b = params.a, params.b
    p, q = len(a), len(b)
    if p > q + 1:
        raise DivergenceError(f"scalar {p}F{q} diverges for z != 0")
    if p == q + 1 and abs(z) >= 1.0:
        raise DivergenceError(f"scalar {p}F{q} requires |z| < 1, got {z}")
    if z == 0.0:
        return 1.0
    if p == 1 and q == 1 and z < _KUMMER_SWITCH:
        aa, bb = a[0], b[0]
        if _is_nonpositive_int(bb - aa):
            # Kummer partner parameter is a polynomial case; direct series
            # still cancels, but these do not occur in the laws of interest.
            total, expo = _hyp_series(a, b, z, tol, max_terms)
            return total * math.exp(expo)
        if z < _ASYMPTOTIC_SWITCH:
            return _hyp1f1_asymptotic_negative(aa, bb, -z, tol)
        total, expo = _hyp_series((bb - aa,), (bb,), -z, tol, max_terms)
        return math.copysign(math.exp(z + expo + math.log(abs(total))), total)
    total, expo = _hyp_series(a, b, z, tol, max_terms)
    return total * math.exp(expo)


def _spread_degenerate(x: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Split coincident eigenvalue groups by two mirrored perturbation patterns.

    Returns the +pattern and -pattern spectra; averaging an evaluation over
    both cancels the O(eps) error by permutation symmetry, leaving O(eps^2).
    """
    x = np.sort(np.asarray(x, dtype=float))[::-1]
    scale = max(np.max(np.abs(x)), 1e-30)
    groups = []
    start = 0
    for i in range(1, len(x) + 1):
        if i == len(x) or (x[i - 1] - x[i]) > DEGENERATE_GAP * scale:
            groups.append((start, i))
            start = i
    plus = x.copy()
    minus = x.copy()
    for lo, hi in groups:
        g = hi - lo
        if g > 1:
            steps = np.arange(g, dtype=float)
            plus[lo:hi] = x[lo:hi] + eps * scale * steps[::-1]
            minus[lo:hi] = x[lo:hi] - eps * scale * steps
    return plus, minus


def _vandermonde(x: np.ndarray) -> float:
    v = 1.0
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            v *= x[i] - x[j]
    return v


def _gross_richards_raw(a, b, x, tol) -> float:
    m = len(x)
    cols = np.empty((m, m))
    for j in range(1, m + 1):
        pa = tuple(ai - j + 1 for ai in a)
        pb = tuple(bi - j + 1 for bi in b)
        params = ScalarHypParams(pa, pb)
        for i in range(m):
            cols[i, j - 1] = x[i] ** (m - j) * hyp_scalar(params, x[i], tol=tol)
    return float(np.linalg.det(cols) / _vandermonde(x))


def gross_richards(a: Sequence[float], b: Sequence[float], x,
                   tol: float = 1e-12) -> float:
    """Matrix-argument pFq(a; b; X) by the determinantal reduction.

    value = det( x_i^{m-j} pFq(a_1-j+1, ..., b_q-j+1; x_i) ) / V(X)
    over the spectrum x of X.  Near-coincident eigenvalues are perturbed
    symmetrically and two evaluations averaged (DegenerateSpectrumWarning).
    """
    x = np.sort(np.asarray(x, dtype=float))[::-1]
    a = tuple(float(v) for v in a)
    b = tuple(float(v) for v in b)
    m = len(x)
    if m == 1:
        return hyp_scalar(ScalarHypParams(a, b), float(x[0]), tol=tol)
    scale = max(np.max(np.abs(x)), 1e-30)
    if np.min(-np.diff(x)) < DEGENERATE_GAP * scale:
        warnings.warn("near-degenerate spectrum, using symmetric perturbation",
                      DegenerateSpectrumWarning, stacklevel=2)
        xp, xm = _spread_degenerate(x, JITTER)
        return 0.5 * (_gross_richards_raw(a, b, xp, tol)
                      + _gross_richards_raw(a, b, xm, tol))
    return _gross_richards_raw(a, b, x, tol)


def _two_matrix_raw(mu, phi, bx, cx, tol) -> float:
    m = len(bx)
    p, q = len(mu), len(phi)
    logpref = (m * (m - 1) / 2) * (p - q - 1) * math.log(math.pi)
    logpref += math.log(gamma_multivariate(m, m))
    for mi in mu:
        logpref += m * gammaln(mi + 1) - math.log(gamma_multivariate(m + mi, m))
    for pj in phi:
        logpref += math.log(gamma_multivariate(m + pj, m)) - m * gammaln(pj + 1)
    params = ScalarHypParams(tuple(mi + 1 for mi in mu), tuple(pj + 1 for pj in phi))
    mat = np.empty((m, m))
    for l in range(m):
        for f in range(m):
            mat[l, f] = hyp_scalar(params, float(bx[l] * cx[f]), tol=tol)
    det = np.linalg.det(mat)
    return math.exp(logpref) * det / (_vandermonde(bx) * _vandermonde(cx))


def two_matrix_determinantal(mu: Sequence[float], phi: Sequence[float],
                             bx, cx, tol: float = 1e-12) -> float:
    """Two-argument pFq((m+mu_i); (m+phi_j); B, C) by the determinantal formula.

    Requires mu_i, phi_j > -1.  bx, cx are the spectra of B and C.
    """
    bx = np.sort(np.asarray(bx, dtype=float))[::-1]
    cx = np.sort(np.asarray(cx, dtype=float))[::-1]
    if len(bx) != len(cx):
        raise ValueError("spectra must share the ambient size m")
    for v in tuple(mu) + tuple(phi):
        if v <= -1:
            raise ValueError("parameters must exceed -1")
    m = len(bx)
    if m == 1:
        params = ScalarHypParams(tuple(v + 1 for v in mu), tuple(v + 1 for v in phi))
        return hyp_scalar(params, float(bx[0] * cx[0]), tol=tol)

    def evaluate(bs, cs):
        return _two_matrix_raw(mu, phi, bs, cs, tol)

    degenerate = any(
        np.min(-np.diff(spec)) < DEGENERATE_GAP * max(np.max(np.abs(spec)), 1e-30)
        for spec in (bx, cx))
    if degenerate:
        warnings.warn("near-degenerate spectrum, using symmetric perturbation",
                      DegenerateSpectrumWarning, stacklevel=2)
        bp, bm = _spread_degenerate(bx, JITTER)
        cp, cm = _spread_degenerate(cx, JITTER)
        return 0.5 * (evaluate(bp, cp) + evaluate(bm, cm))
    return evaluate(bx, cx)


def harish_chandra_0f0(bx, cx) -> float:
    """0F0(B, C) = Gamma_m(m)/pi^{m(m-1)/2} det(e^{b_i c_j}) / (V(B) V(C))."""
    bx = np.sort(np.asarray(bx, dtype=float))[::-1]
    cx = np.sort(np.asarray(cx, dtype=float))[::-1]
    m = len(bx)
    if m == 1:
        return math.exp(bx[0] * cx[0])

    def evaluate(bs, cs):
        pref = gamma_multivariate(m, m) / math.pi ** (m * (m - 1) / 2)
        det = np.linalg.det(np.exp(np.outer(bs, cs)))
        return pref * det / (_vandermonde(bs) * _vandermonde(cs))

    degenerate = False
    for spec in (bx, cx):
        scale = max(np.max(np.abs(spec)), 1e-30)
        if np.min(-np.diff(spec)) < DEGENERATE_GAP * scale:
            degenerate = True
    if degenerate:
        warnings.warn("near-degenerate spectrum, using symmetric perturbation",
                      DegenerateSpectrumWarning, stacklevel=2)
        bp, bm = _spread_degenerate(bx, JITTER)
        cp, cm = _spread_degenerate(cx, JITTER)
        return 0.5 * (evaluate(bp, cp) + evaluate(bm, cm))
    return evaluate(bx, cx)
