"""Generalized Hartman-Watson law for 2 x 2 matrices: oscillatory quadrature engine.

The density at v of the conditional additive functional has the form

    f(v) = pref(v) * N(v) / D,
    N(v) = int_0^1 int_0^inf z * amp(z) * e^{-2 q z cosh y}
           * e^{-2(y^2 - pi^2)/v} sinh(y) sin(4 pi y / v) dz dy

with q = sqrt(lambda1 lambda2), amp(z) = sinh(p sqrt(1-z^2))/p for distinct
eigenvalues (p = lambda1 - lambda2) and its p -> 0 limit sqrt(1-z^2) for the
equal case.  The e^{2 pi^2 / v} factor makes the plain sum catastrophically
cancellous for v < ~1, so three regimes are used:

  * v >= direct_min: real-axis cells of half-period v/4 (width-capped), GL
    nodes per cell, compensated summation;
  * shifted_min <= v < direct_min: the contour y = s + i pi/2, along which the
    blow-up factor drops from e^{2 pi^2/v} to e^{pi^2/(2 v)} and the
    inner z-integral becomes a pair of bounded Fourier moments;
  * v < shifted_min: a rigorous rectangle-contour bound certifies |f| below
    the requested tolerance and 0.0 is returned, else QuadratureError.

The heavy v^{-3/2} right tail is integrated with a three-term 1/v expansion
whose coefficients are moments of h(y) = sinh(y) * inner(y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

from .errors import QuadratureError

__all__ = ["QuadratureSpec", "HWQuery", "hw_density_m2", "hw_density_equal",
           "hw_normalization", "hw_laplace_quadrature"]

_GL16 = roots_legendre(16)
_GL64 = roots_legendre(64)

#: inner z-integral switches from GL to the Watson expansion above this
_WATSON_SWITCH = 45.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Truncation and subdivision policy for the oscillatory integrals."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    envelope_log_cut: float = 40.0     # e^{-L} envelope threshold for y_max
    max_cells: int = 200000
    cell_width_cap: float = 2.0        # resolves the envelope when v/4 is wide
    direct_min: float = 1.0            # smallest v for the real-axis route
    shifted_min: float = 0.32          # smallest v for the contour route
    tail_start: float = 120.0          # switch to the 1/v expansion beyond

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class HWQuery:
    """Evaluation point of the m=2 Hartman-Watson density (t fixed to 1).

    lambda1 >= lambda2 > 0 are the eigenvalues of sqrt(xy); p their gap.
    """

    lambda1: float
    lambda2: float
    v: float

    def __post_init__(self):
        if not (self.lambda1 >= self.lambda2 > 0):
            raise ValueError("need lambda1 >= lambda2 > 0")
        if self.v <= 0:
            raise ValueError("need v > 0")

    @property
    def p(self) -> float:
        return self.lambda1 - self.lambda2

    @property
    def q(self) -> float:
        return math.sqrt(self.lambda1 * self.lambda2)


def _gl_cells(edges: np.ndarray, rule) -> tuple[np.ndarray, np.ndarray]:
    x, w = rule
    a, b = edges[:-1, None], edges[1:, None]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x[None, :], half * w[None, :]


def _amp_factor(c: np.ndarray, p: float) -> np.ndarray:
    """sinh(p c)/p with the p = 0 limit c; c = sqrt(1 - z^2)."""
    if p == 0.0:
        return c
    return np.sinh(p * c) / p


def _inner_watson_coeffs(p: float) -> tuple[float, float, float, float]:
    if p == 0.0:
        return 1.0, -0.5, -1.0 / 8.0, -3.0 / 48.0
    sh, ch = math.sinh(p), math.cosh(p)
    return (sh / p, -ch / 2.0, (p * sh - ch) / 8.0,
            (3 * p * sh - 3 * ch - p * p * ch) / 48.0)


def _inner_blend(a: np.ndarray, p: float) -> np.ndarray:
    """int_0^1 z (sinh(p sqrt(1-z^2))/p) e^{-a z} dz for an array of a >= 0.

    Gauss-Legendre after z = sin(theta) for a <= 45; four-term Watson
    expansion beyond, where the integrand concentrates at z = 0.
    """
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    small = a <= _WATSON_SWITCH
    if np.any(small):
        th, w = _gl_cells(np.array([0.0, np.pi / 4, np.pi / 2]), _GL64)
        th, w = th.ravel(), w.ravel()
        s, c = np.sin(th), np.cos(th)
        base = s * c * _amp_factor(c, p)
        out[small] = np.exp(-a[small, None] * s[None, :]) @ (base * w)
    if np.any(~small):
        ab = np.clip(a[~small], None, 1e60)
        c0, c1, c2, c3 = _inner_watson_coeffs(p)
        ia2 = 1.0 / (ab * ab)
        out[~small] = ia2 * (c0 + ia2 * (6.0 * c1 + ia2 * (120.0 * c2 + ia2 * 5040.0 * c3)))
    return out


def _prefactor(v: float, q: float) -> float:
    return q * v / (math.pi * math.sqrt(2 * math.pi * v ** 3))


def _y_cut(v: float, logc: float) -> float:
    """y beyond which e^{2(pi^2-y^2)/v} e^y < e^{-logc}: root of 2(y^2-pi^2)/v - y = logc."""
    return v / 4 + math.sqrt(v * v / 16 + math.pi ** 2 + v * (logc + 2 * math.pi ** 2 / v) / 2)


def _numerator_direct(v: float, p: float, q: float, spec: QuadratureSpec) -> float:
    ymax = _y_cut(v, spec.envelope_log_cut)
    width = min(v / 4.0, spec.cell_width_cap)
    ncell = int(math.ceil(ymax / width))
    if ncell > spec.max_cells:
        raise QuadratureError(f"{ncell} cells exceed the subdivision cap")
    edges = np.linspace(0.0, ncell * width, ncell + 1)
    y, w = _gl_cells(edges, _GL16)
    yf, wf = y.ravel(), w.ravel()
    inner = _inner_blend(2 * q * np.cosh(yf), p)
    vals = inner * np.exp(2 * (np.pi ** 2 - yf * yf) / v) * np.sinh(yf) \
        * np.sin(4 * np.pi * yf / v)
    cells = np.sum((vals * wf).reshape(ncell, -1), axis=1)
    return math.fsum(cells.tolist())


def _fourier_moments(s: np.ndarray, p: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    """A(s) - i B(s) = int_0^1 z amp(z) e^{-i 2 q sinh(s) z} dz, via z = sin(theta)."""
    om = 2 * q * np.sinh(s)
    # one fixed subdivision for every s keeps the quadrature error smooth in s,
    # which the oscillatory outer integral then cancels like the integrand itself
    omax = float(np.max(np.abs(om))) if len(om) else 0.0
    nsub = max(2, int(math.ceil(omax / (2 * math.pi))))
    th, w = _gl_cells(np.linspace(0.0, np.pi / 2, nsub + 1), _GL16)
    th, w = th.ravel(), w.ravel()
    zz, cc = np.sin(th), np.cos(th)
    base = zz * cc * _amp_factor(cc, p) * w
    phase = om[:, None] * zz[None, :]
    return np.cos(phase) @ base, np.sin(phase) @ base


def _numerator_shifted(v: float, p: float, q: float, spec: QuadratureSpec) -> float:
    """Contour y = s + i pi/2: residual blow-up only e^{pi^2/(2v)}."""
    logc = spec.envelope_log_cut
    smax = v / 4 + math.sqrt(v * v / 16 + v * logc / 2)
    width = min(v / 4.0, spec.cell_width_cap)
    ncell = int(math.ceil(smax / width))
    if ncell > spec.max_cells:
        raise QuadratureError(f"{ncell} cells exceed the subdivision cap")
    edges = np.linspace(0.0, ncell * width, ncell + 1)
    s, w = _gl_cells(edges, _GL16)
    sf, wf = s.ravel(), w.ravel()
    A, B = _fourier_moments(sf, p, q)
    vals = np.cosh(sf) * np.exp(-2 * sf * sf / v) * (
        A * np.cos(2 * np.pi * sf / v) + B * np.sin(2 * np.pi * sf / v))
    cells = np.sum((vals * wf).reshape(ncell, -1), axis=1)
    return math.exp(np.pi ** 2 / (2 * v)) * math.fsum(cells.tolist())


def _small_v_bound(v: float, p: float, q: float) -> float:
    """Rectangle-contour bound on |N(v)| for tiny v.

    Deforming the middle of the line Im y = pi up to the segment through
    i pi (where the integrand is real and contributes nothing to the
    imaginary part) leaves vertical connectors at Re y = R bounded by
    pi * max|h| * e^{-2(R^2 - pi^2)/v}, max|h| <= cosh(R) sinh(p R')/p-type
    growth e^{2 q cosh R}; the real-axis tails beyond R are smaller still.
    """
    best = math.inf
    amp_log = math.log(max(math.sinh(p) / p if p > 0 else 1.0, 1.0) + 1.0)
    for r in np.linspace(math.pi * 1.05, 6.0, 60):
        expo = -2 * (r * r - math.pi ** 2) / v + 2 * q * math.cosh(r) + r + amp_log
        best = min(best, expo)
    return math.exp(min(best + math.log(2 * math.pi + 2), 700.0))


def _hw_density(lambda1: float, lambda2: float, v: float, denom: float,
                spec: QuadratureSpec) -> float:
    p = lambda1 - lambda2
    q = math.sqrt(lambda1 * lambda2)
    if v >= spec.direct_min:
        num = _numerator_direct(v, p, q, spec)
    elif v >= spec.shifted_min:
        num = _numerator_shifted(v, p, q, spec)
    else:
        bound = _small_v_bound(v, p, q) * _prefactor(v, q) / denom
        if bound < spec.abs_tol:
            return 0.0
        raise QuadratureError(
            f"v={v} below the resolvable range: cancellation scale "
            f"e^(2 pi^2/v) exceeds double precision and the small-v bound "
            f"{bound:.2e} is above abs_tol={spec.abs_tol}")
    return _prefactor(v, q) * num / denom


def hw_denominator(lambda1: float, lambda2: float) -> float:
    """int_0^1 int_0^1 u cosh(p u sqrt(1-x^2))/sqrt(1-x^2) I0(2 q u x) du dx.

    The 1/sqrt(1-x^2) endpoint is removed exactly by x = sin(theta).
    """
    from .specfun import bessel_i
    p = lambda1 - lambda2
    q = math.sqrt(lambda1 * lambda2)
    th, wt = _gl_cells(np.array([0.0, np.pi / 2]), _GL64)
    u, wu = _gl_cells(np.array([0.0, 1.0]), _GL64)
    th, wt, u, wu = th.ravel(), wt.ravel(), u.ravel(), wu.ravel()
    uu, tt = u[:, None], th[None, :]
    vals = uu * np.cosh(p * uu * np.cos(tt)) * bessel_i(0, 2 * q * uu * np.sin(tt))
    return float(wu @ vals @ wt)


def hw_denominator_equal(lam: float) -> float:
    """(pi/4) 1F2(1/2; 1; 2; lam^2), the p -> 0 limit of the double integral."""
    from .specfun import hyp_scalar
    return math.pi / 4 * hyp_scalar(((0.5,), (1.0, 2.0)), lam * lam)


def hw_density_m2(query: HWQuery, spec: QuadratureSpec | None = None) -> float:
    """Density of the m=2 generalized Hartman-Watson law, distinct eigenvalues."""
    spec = spec or QuadratureSpec()
    if query.p == 0.0:
        return hw_density_equal(query.lambda1, query.v, spec)
    denom = hw_denominator(query.lambda1, query.lambda2)
    return _hw_density(query.lambda1, query.lambda2, query.v, denom, spec)


def hw_density_equal(lam: float, v: float, spec: QuadratureSpec | None = None) -> float:
    """Equal-eigenvalue density; the amplitude degenerates to z sqrt(1-z^2)."""
    spec = spec or QuadratureSpec()
    if lam <= 0 or v <= 0:
        raise ValueError("need lam > 0 and v > 0")
    denom = hw_denominator_equal(lam)
    return _hw_density(lam, lam, v, denom, spec)


def _tail_coefficients(lambda1: float, lambda2: float, denom: float):
    """Moments M1, M3, M5 of h(y) = sinh(y) inner(y) and the 1/v tail weights."""
    p = lambda1 - lambda2
    q = math.sqrt(lambda1 * lambda2)

    def h(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return np.sinh(y) * _inner_blend(2 * q * np.cosh(y), p)

    moms = []
    for k in (1, 3, 5):
        val, _ = quad(lambda y, kk=k: float(y ** kk * h(y)[0]), 0.0, 80.0, limit=400)
        moms.append(val)
    m1, m3, m5 = moms
    a1 = 4 * math.pi * m1
    a2 = 8 * math.pi * (math.pi ** 2 * m1 - m3)
    a3 = 8 * math.pi ** 5 * m1 - 80 * math.pi ** 3 / 3 * m3 + 8 * math.pi * m5
    cpref = q / (math.pi * math.sqrt(2 * math.pi) * denom)
    return cpref, (a1, a2, a3)


def _tail_density(v, cpref, coeffs):
    a1, a2, a3 = coeffs
    return cpref * v ** -0.5 * (a1 / v + a2 / v ** 2 + a3 / v ** 3)


def _integrate_density(lambda1: float, lambda2: float, weight_s: float,
                       spec: QuadratureSpec, v_min: float) -> tuple[float, float]:
    """(integral of e^{-s v} f(v) dv over (v_min, inf), error estimate)."""
    equal = lambda1 == lambda2
    denom = hw_denominator_equal(lambda1) if equal else hw_denominator(lambda1, lambda2)

    def f(v):
        return _hw_density(lambda1, lambda2, v, denom, spec)

    V = spec.tail_start
    main, err1 = quad(lambda v: math.exp(-weight_s * v) * f(v), v_min, V,
                      limit=400, epsabs=1e-10, epsrel=1e-9,
                      points=[spec.direct_min, 2.0, 5.0, 20.0, 60.0])
    cpref, coeffs = _tail_coefficients(lambda1, lambda2, denom)
    vtop = V + 60.0 / weight_s if weight_s > 0 else np.inf
    tail, err2 = quad(lambda v: math.exp(-weight_s * v) * _tail_density(v, cpref, coeffs),
                      V, vtop, limit=200)
    return main + tail, err1 + err2


def hw_left_mass_bound(lambda1: float, lambda2: float, v0: float) -> float:
    """Chernoff bound P(V <= v0) <= inf_nu e^{nu^2 v0 / 2} E[e^{-nu^2 V / 2}]."""
    from .laws import hw_laplace
    z = np.array([lambda1 ** 2 / 4, lambda2 ** 2 / 4])
    best = 1.0
    for nu in np.linspace(0.5, 40.0, 80):
        val = math.exp(min(nu * nu * v0 / 2, 600.0)) * hw_laplace(nu, z)
        best = min(best, val)
        if val > 10 * best:
            break
    return best


def hw_normalization(lambda1: float, lambda2: float,
                     spec: QuadratureSpec | None = None,
                     v_min: float = 0.4) -> tuple[float, float]:
    """(integral of f over (v_min, inf), bound on the missing left mass)."""
    spec = spec or QuadratureSpec()
    total, _ = _integrate_density(lambda1, lambda2, 0.0, spec, v_min)
    return total, hw_left_mass_bound(lambda1, lambda2, v_min)


def hw_laplace_quadrature(nu: float, lambda1: float, lambda2: float,
                          spec: QuadratureSpec | None = None,
                          v_min: float = 0.4) -> float:
    """int e^{-nu^2 v / 2} f(v) dv by quadrature; oracle partner of hw_laplace."""
    spec = spec or QuadratureSpec()
    total, _ = _integrate_density(lambda1, lambda2, nu * nu / 2.0, spec, v_min)
    return total
