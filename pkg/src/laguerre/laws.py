"""Closed-form laws of the Laguerre process.

Laplace transform, transition density on Hermitian matrices, eigenvalue
semigroup on the Weyl chamber, the generalized Hartman-Watson Laplace
transform and m=2 densities, the det(X)=0 hitting-time tail, the S0 = 1/(2 T0)
density, determinant moments and the pathwise change-of-measure weight.

Densities are taken with respect to the measures of their defining formulas:
flat Lebesgue measure on Hermitian matrices for the matrix transition density
and Lebesgue measure on the ordered chamber y_1 > ... > y_m > 0 for the
eigenvalue semigroup.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, SingularStateError
from .hw import (HWQuery, QuadratureSpec, hw_density_equal, hw_density_m2,  # noqa: F401
                 hw_laplace_quadrature, hw_left_mass_bound, hw_normalization)
from .process import EigenPath, LaguerreModel, MatrixPath
from .specfun import (bessel_i, gamma_multivariate, gamma_multivariate_ratio,
                      gross_richards, hyp_scalar)
from .symfun import hyp_matrix_series

__all__ = [
    "laplace_transform",
    "transition_density",
    "eigen_semigroup",
    "hw_laplace",
    "hw_laplace_bessel_m2",
    "hw_density_m2",
    "hw_density_equal",
    "HWQuery",
    "QuadratureSpec",
    "t0_tail",
    "s0_density",
    "det_moment",
    "girsanov_weight",
]

#: relative eigenvalue gap for the equal-eigenvalue branches
EQUAL_GAP = 1e-7

_MIN_EIG = 1e-12


def _as_hermitian(u, m) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim == 0:
        u = np.eye(m) * u
    elif u.ndim == 1:
        u = np.diag(u)
    if u.shape != (m, m):
        raise ValueError(f"expected an {m} x {m} Hermitian matrix")
    return 0.5 * (u + u.conj().T)


def laplace_transform(model: LaguerreModel, t: float, u) -> float:
    """E[exp(-tr(u X_t))] = det(I + 2tu)^{-delta} exp(-tr(x0 (I + 2tu)^{-1} u))."""
    if t <= 0:
        raise DomainError("need t > 0")
    m = model.m
    u = _as_hermitian(u, m)
    a = np.eye(m) + 2.0 * t * u
    evals = np.linalg.eigvalsh(a)
    if evals.min() <= 0:
        raise DomainError("u must be positive semidefinite")
    w = np.linalg.solve(a, u)
    trace_term = float(np.trace(model.x0 @ w).real)
    return float(np.prod(evals) ** (-model.delta) * math.exp(-trace_term))


def transition_density(model: LaguerreModel, t: float, x, y,
                       tol: float = 1e-10) -> float:
    """Semigroup density p_t(x, y) with respect to flat measure on Hermitians.

    Requires delta > m - 1.  x = 0 uses the degenerate closed form; otherwise
    the matrix 0F1 is evaluated on the spectrum of x^{1/2} y x^{1/2} / (4 t^2)
    by the determinantal route, with the zonal series as fallback near
    degenerate spectra.
    """
    m = model.m
    delta = model.delta
    if delta <= m - 1:
        raise DomainError(f"transition density requires delta > m-1, got {delta}")
    if t <= 0:
        raise DomainError("need t > 0")
    x = _as_hermitian(x, m)
    y = _as_hermitian(y, m)
    ey = np.linalg.eigvalsh(y)
    if ey.min() <= 0:
        return 0.0
    logdet_y = float(np.sum(np.log(ey)))
    base = (-m * delta * math.log(2 * t) - math.log(gamma_multivariate(delta, m))
            - float(np.trace(x + y).real) / (2 * t) + (delta - m) * logdet_y)
    ex = np.linalg.eigvalsh(x)
    if ex.max() <= 0:
        return math.exp(base)
    xh = _sqrtm(x)
    arg = xh @ y @ xh / (4.0 * t * t)
    spec = np.sort(np.linalg.eigvalsh(arg).real)[::-1]
    scale = max(spec.max(), 1e-30)
    if m > 1 and np.min(-np.diff(spec)) < EQUAL_GAP * scale:
        f01 = hyp_matrix_series((), (delta,), spec, tol=tol).value
    else:
        f01 = gross_richards((), (delta,), spec, tol=tol)
    return math.exp(base) * f01


def _sqrtm(x: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(x)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w[None, :]) @ v.conj().T


def eigen_semigroup(model: LaguerreModel, t: float, x, y) -> float:
    """Ordered-eigenvalue transition density q_t(x, y) on the Weyl chamber.

    q_t(x,y) = V(y)/V(x) det( (1/2t) (y_j/x_i)^{nu/2} e^{-(x_i+y_j)/2t}
                              I_nu(sqrt(x_i y_j)/t) ).
    """
    nu = model.nu
    if nu <= -1:
        raise DomainError("eigenvalue semigroup requires nu > -1")
    if t <= 0:
        raise DomainError("need t > 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = model.m
    if np.any(np.diff(x) >= 0) or x[-1] <= 0:
        raise DomainError("x must be strictly ordered positive")
    if np.any(np.diff(y) >= 0) or y[-1] <= 0:
        return 0.0
    xi = x[:, None]
    yj = y[None, :]
    kern = (0.5 / t) * (yj / xi) ** (nu / 2) * np.exp(-(xi + yj) / (2 * t)) \
        * bessel_i(nu, np.sqrt(xi * yj) / t)
    vx = _vandermonde(x)
    vy = _vandermonde(y)
    return float(vy / vx * np.linalg.det(kern))


def _vandermonde(x):
    v = 1.0
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            v *= x[i] - x[j]
    return v


def hw_laplace(nu: float, z) -> float:
    """Laplace transform of the generalized Hartman-Watson law at nu.

    Gamma_m(m)/Gamma_m(m+nu) det(z)^{nu/2} 0F1(m+nu; z)/0F1(m; z) over the
    spectrum z of xy/(4t^2).  Exactly 1 at nu = 0.
    """
    if nu < 0:
        raise DomainError("need nu >= 0")
    if nu == 0.0:
        return 1.0
    z = np.sort(np.atleast_1d(np.asarray(z, dtype=float)))[::-1]
    if np.any(z < 0):
        raise DomainError("spectrum entries must be >= 0")
    m = len(z)
    if m == 1:
        lam = 2.0 * math.sqrt(z[0])
        return float(bessel_i(nu, lam) / bessel_i(0.0, lam))
    scale = max(z.max(), 1e-30)
    if m == 2 and np.min(-np.diff(z)) < EQUAL_GAP * scale:
        lam = 2.0 * math.sqrt(float(np.mean(z)))
        return _hw_laplace_equal_m2(nu, lam)
    num = gross_richards((), (m + nu,), z)
    den = gross_richards((), (float(m),), z)
    pref = gamma_multivariate_ratio(m, m + nu, m) * float(np.prod(z)) ** (nu / 2)
    return pref * num / den


def hw_laplace_bessel_m2(nu: float, lambda1: float, lambda2: float) -> float:
    """m=2 Bessel-ratio form of hw_laplace at lambda_i = 2 sqrt(z_i)."""
    if lambda1 == lambda2:
        return _hw_laplace_equal_m2(nu, lambda1)
    l1, l2 = lambda1, lambda2
    num = l1 * bessel_i(nu + 1, l1) * bessel_i(nu, l2) \
        - l2 * bessel_i(nu + 1, l2) * bessel_i(nu, l1)
    den = l1 * bessel_i(1, l1) * bessel_i(0, l2) \
        - l2 * bessel_i(1, l2) * bessel_i(0, l1)
    return float(num / den)


def _hw_laplace_equal_m2(nu: float, lam: float) -> float:
    num = bessel_i(nu, lam) ** 2 - bessel_i(nu + 1, lam) * bessel_i(nu - 1, lam)
    den = bessel_i(0, lam) ** 2 - bessel_i(1, lam) * bessel_i(-1, lam)
    return float(num / den)


def t0_tail(model: LaguerreModel, x, t: float, tol: float = 1e-12) -> float:
    """P(T0 > t) for the index -nu process (delta = m - nu), 0 < nu < 1.

    Gamma_m(m)/Gamma_m(m+nu) det(x/2t)^nu 1F1(nu; m+nu; -x/2t); the deeply
    negative arguments go through the stable Kummer/asymptotic branches of
    the scalar series inside the determinantal evaluation.
    """
    m = model.m
    nu = m - model.delta
    if not 0 < nu < 1:
        raise DomainError(f"hitting-time tail requires delta = m - nu with nu in (0,1); "
                          f"model has delta = {model.delta}")
    if t <= 0:
        raise DomainError("need t > 0")
    x = _as_hermitian(x, m)
    z = np.sort(np.linalg.eigvalsh(x).real)[::-1] / (2.0 * t)
    if z.min() <= 0:
        raise DomainError("x must be positive definite")
    scale = max(z.max(), 1e-30)
    if m > 1 and np.min(-np.diff(z)) < EQUAL_GAP * scale and z.max() < 30.0:
        f11 = hyp_matrix_series((nu,), (m + nu,), -z, tol=tol).value
    else:
        f11 = gross_richards((nu,), (m + nu,), -z, tol=tol)
    pref = gamma_multivariate_ratio(m, m + nu, m) * float(np.prod(z)) ** nu
    return min(max(pref * f11, 0.0), 1.0)


def s0_density(nu: float, lambda1: float, lambda2: float, u: float) -> float:
    """Density of S0 = 1/(2 T0) for m = 2, eigenvalues (lambda1, lambda2) of x.

    Distinct form
        (l1 l2)^nu u^{2nu-2} e^{-(l1+l2)u} / (G(nu+1) G(nu))
        * [1F1(2, nu+1, l1 u) - 1F1(2, nu+1, l2 u)] / (l1 - l2)
    evaluated through the Kummer-transformed factors
    e^{-l u} 1F1(2, nu+1, l u) = 1F1(nu-1, nu+1, -l u), which stay bounded for
    large u; the equal branch is taken below EQUAL_GAP relative.
    """
    if not 0 < nu < 1:
        raise DomainError("need nu in (0, 1)")
    if not (lambda1 >= lambda2 > 0):
        raise DomainError("need lambda1 >= lambda2 > 0")
    if u <= 0:
        raise DomainError("need u > 0")
    l1, l2 = float(lambda1), float(lambda2)
    if l1 - l2 < EQUAL_GAP * l1:
        lam = 0.5 * (l1 + l2)
        pref = (2 * lam ** (2 * nu) * u ** (2 * nu - 1) * math.exp(-lam * u)
                / (math.gamma(nu + 2) * math.gamma(nu)))
        return pref * hyp_scalar(((nu - 1,), (nu + 2,)), -lam * u)
    pref = (l1 * l2) ** nu * u ** (2 * nu - 2) / (math.gamma(nu + 1) * math.gamma(nu))
    g1 = hyp_scalar(((nu - 1,), (nu + 1,)), -l1 * u) * math.exp(-l2 * u)
    g2 = hyp_scalar(((nu - 1,), (nu + 1,)), -l2 * u) * math.exp(-l1 * u)
    return pref * (g1 - g2) / (l1 - l2)


def det_moment(model: LaguerreModel, t: float, s: float,
               method: str = "direct", tol: float = 1e-12) -> float:
    """E[det(X_t)^s] = (2t)^{ms} Gamma_m(s+delta)/Gamma_m(delta) 1F1(-s; delta; -x/2t).

    method="kummer" evaluates the transform partner
    e^{-tr(x/2t)} 1F1(delta+s; delta; x/2t) instead.
    """
    m = model.m
    delta = model.delta
    if t <= 0:
        raise DomainError("need t > 0")
    for j in range(1, m + 1):
        if s + delta - j + 1 <= 0:
            raise DomainError(f"moment requires s + delta - j + 1 > 0 (j={j})")
    z = np.sort(np.linalg.eigvalsh(np.asarray(model.x0)).real)[::-1] / (2.0 * t)
    pref = (2 * t) ** (m * s) * gamma_multivariate_ratio(s + delta, delta, m)
    scale = max(abs(z).max(), 1e-30)
    degen = m > 1 and np.min(-np.diff(z)) < EQUAL_GAP * scale
    if method == "kummer":
        if degen:
            f = hyp_matrix_series((delta + s,), (delta,), z, tol=tol).value
        else:
            f = gross_richards((delta + s,), (delta,), z, tol=tol)
        return pref * math.exp(-2 * t * float(np.sum(z))) * f
    if degen:
        f = hyp_matrix_series((-s,), (delta,), -z, tol=tol).value
    else:
        f = gross_richards((-s,), (delta,), -z, tol=tol)
    return pref * f


def girsanov_weight(path: MatrixPath | EigenPath, nu: float) -> float:
    """Pathwise change-of-measure weight from index 0 to index nu.

    (det(X_t)/det(x0))^{nu/2} exp(-(nu^2/2) int_0^t tr(X_s^{-1}) ds) with the
    time integral by the trapezoid rule on the path grid.  The path model
    must have delta = m (the base measure), and every state must stay
    positive definite above 1e-12.
    """
    model = path.model
    if abs(model.delta - model.m) > 1e-12:
        raise DomainError("the change-of-measure base requires delta = m")
    if nu == 0.0:
        return 1.0
    if isinstance(path, EigenPath):
        lam = np.asarray(path.lambdas)
        if lam.min() < _MIN_EIG:
            raise SingularStateError("a state has an eigenvalue below 1e-12")
        trinv = np.sum(1.0 / lam, axis=1)
        logdet_end = float(np.sum(np.log(lam[-1])))
        logdet_start = float(np.sum(np.log(lam[0])))
    else:
        states = np.asarray(path.states)
        evals = np.linalg.eigvalsh(states)
        if evals.min() < _MIN_EIG:
            raise SingularStateError("a state has an eigenvalue below 1e-12")
        trinv = np.sum(1.0 / evals, axis=1)
        logdet_end = float(np.sum(np.log(evals[-1])))
        logdet_start = float(np.sum(np.log(evals[0])))
    dt = np.diff(path.times)
    integral = float(np.sum(0.5 * dt * (trinv[:-1] + trinv[1:])))
    log_w = 0.5 * nu * (logdet_end - logdet_start) - 0.5 * nu * nu * integral
    return math.exp(log_w)
