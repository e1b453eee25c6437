"""Monte Carlo verification harness.

Estimators over blocks of vectorized paths, standard errors, and pass/fail
reports against the closed-form laws.  Per-path randomness follows the
process-module contract (pure function of master seed and path index), so a
report is bit-identical for identical inputs regardless of block sizes.
Reductions use compensated summation and run in fixed index order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import chi2 as chi2_dist
from scipy.stats import norm as norm_dist

from .errors import ConfigError
from .laws import eigen_semigroup, laplace_transform, t0_tail
from .process import LaguerreModel, PathStreams, eigen_step, matrix_step

__all__ = [
    "McReport",
    "check_laplace",
    "check_trace_besq",
    "check_additivity",
    "check_t0",
    "check_eigen_density",
    "check_girsanov",
    "check_log_asymptotic",
    "default_suite",
    "run_suite",
]

_BLOCK_PATHS = 8192
_CHUNK_TARGET = 3_000_000  # doubles per increment buffer per block


@dataclass(frozen=True)
class McReport:
    """One statistical comparison: estimate vs reference with a z gate."""

    name: str
    estimate: float
    se: float
    reference: float
    z: float
    paths: int
    seed: int
    passed: bool
    threshold: float = 3.0
    gating: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    n = len(values)
    mean = math.fsum(values.tolist()) / n
    var = math.fsum(((values - mean) ** 2).tolist()) / (n - 1) if n > 1 else 0.0
    return mean, math.sqrt(var / n)


def _zscore(estimate: float, se: float, reference: float) -> float:
    if se == 0.0:
        return 0.0 if estimate == reference else math.inf
    return (estimate - reference) / se


def _blocks(n_paths: int) -> list[tuple[int, int]]:
    out = []
    start = 0
    while start < n_paths:
        size = min(_BLOCK_PATHS, n_paths - start)
        out.append((start, size))
        start += size
    return out


def _chunk_steps(block: int, per_step: int, n_steps: int) -> int:
    return max(1, min(n_steps, _CHUNK_TARGET // max(block * per_step, 1)))


def _trinv_det_min(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """tr(X^{-1}), det X and the smallest eigenvalue for a stack of states."""
    m = x.shape[-1]
    if m == 1:
        a = x[..., 0, 0].real
        safe = np.where(a > 0, a, 1.0)
        return 1.0 / safe, a, a
    if m == 2:
        a = x[..., 0, 0].real
        c = x[..., 1, 1].real
        b = x[..., 0, 1]
        t = a + c
        det = a * c - (b.real ** 2 + b.imag ** 2)
        g = np.sqrt(np.maximum((a - c) ** 2 + 4 * (b.real ** 2 + b.imag ** 2), 0.0))
        lmin = 0.5 * (t - g)
        safe = np.where(det > 0, det, 1.0)
        return t / safe, det, lmin
    evals = np.linalg.eigvalsh(x)
    safe = np.where(evals > 0, evals, 1.0)
    return np.sum(1.0 / safe, axis=-1), np.prod(evals, axis=-1), evals[..., 0]


def _run_matrix_paths(model: LaguerreModel, dt: float, T: float, seed: int,
                      n_paths: int, girsanov: bool = False,
                      seed_offset: int = 0) -> dict:
    """Terminal states of vectorized matrix paths, optionally with the
    trapezoidal integral of tr(X_s^{-1}) and singularity flags."""
    n_steps = int(round(T / dt))
    m = model.m
    per = 2 * m * m
    finals = np.empty((n_paths, m, m), dtype=complex)
    integrals = np.zeros(n_paths) if girsanov else None
    singular = np.zeros(n_paths, dtype=bool) if girsanov else None
    sqdt = math.sqrt(dt)
    for start, size in _blocks(n_paths):
        streams = PathStreams(seed, size, start_index=start + seed_offset)
        x = np.broadcast_to(model.x0, (size, m, m)).copy()
        if girsanov:
            trinv_prev, det0, lmin = _trinv_det_min(x)
            acc = np.zeros(size)
            sing = (lmin < 1e-12) | (det0 <= 0)
        chunk = _chunk_steps(size, per, n_steps)
        done = 0
        while done < n_steps:
            take = min(chunk, n_steps - done)
            g = streams.draw(take, (2, m, m))
            for k in range(take):
                db = (g[:, k, 0] + 1j * g[:, k, 1]) * sqdt
                x = matrix_step(x, db, model.delta, dt)
                if girsanov:
                    trinv, det, lmin = _trinv_det_min(x)
                    sing |= (lmin < 1e-12) | (det <= 0)
                    acc += 0.5 * dt * (trinv_prev + trinv)
                    trinv_prev = trinv
            done += take
        finals[start:start + size] = x
        if girsanov:
            integrals[start:start + size] = acc
            singular[start:start + size] = sing
    out = {"finals": finals}
    if girsanov:
        out["trinv_integral"] = integrals
        out["singular"] = singular
    return out


def _run_eigen_paths(model: LaguerreModel, dt: float, T: float, seed: int,
                     n_paths: int, crossing: bool = False) -> dict:
    """Terminal spectra of vectorized eigenvalue paths.

    With crossing=True also returns the interpolated first time the raw
    smallest eigenvalue reaches zero (inf if never) and the global minimum
    gap observed across all steps.
    """
    n_steps = int(round(T / dt))
    m = model.m
    lam0 = model.x0_spectrum.astype(float)
    if m >= 2 and np.min(-np.diff(lam0)) <= 0:
        raise ConfigError("eigenvalue scheme requires a strictly ordered initial spectrum")
    finals = np.empty((n_paths, m))
    t0s = np.full(n_paths, np.inf) if crossing else None
    min_gap = math.inf
    sqdt = math.sqrt(dt)
    for start, size in _blocks(n_paths):
        streams = PathStreams(seed, size, start_index=start)
        lam = np.broadcast_to(lam0, (size, m)).copy()
        prev_min = lam[:, -1].copy()
        if crossing:
            t0 = np.full(size, np.inf)
        chunk = _chunk_steps(size, m, n_steps)
        done = 0
        while done < n_steps:
            take = min(chunk, n_steps - done)
            dw = streams.draw(take, (m,)) * sqdt
            for k in range(take):
                lam = eigen_step(lam, dw[:, k], model.delta, dt)
                if m > 1:
                    gaps = -np.diff(lam, axis=1)
                    gmin = float(gaps.min())
                    if gmin < min_gap:
                        min_gap = gmin
                if crossing:
                    cur = lam[:, -1]
                    newly = np.isinf(t0) & (cur <= 0.0)
                    if np.any(newly):
                        tk = (done + k + 1) * dt
                        frac = prev_min[newly] / (prev_min[newly] - cur[newly])
                        t0[newly] = tk - dt + dt * frac
                    prev_min = cur.copy()
            done += take
        finals[start:start + size] = lam
        if crossing:
            t0s[start:start + size] = t0
    out = {"finals": finals, "min_gap": min_gap}
    if crossing:
        out["t0"] = t0s
    return out


def check_laplace(model: LaguerreModel, t: float, u, n_paths: int, seed: int,
                  dt: float = 1e-3, threshold: float = 3.0) -> McReport:
    """MC mean of exp(-tr(u X_t)) against the closed-form Laplace transform."""
    u = np.asarray(u, dtype=complex)
    if u.ndim == 1:
        u = np.diag(u)
    res = _run_matrix_paths(model, dt, t, seed, n_paths)
    vals = np.einsum("pij,ji->p", res["finals"], u).real
    est, se = _mean_se(np.exp(-vals))
    ref = laplace_transform(model, t, u)
    z = _zscore(est, se, ref)
    return McReport("laplace", est, se, ref, z, n_paths, seed,
                    abs(z) <= threshold, threshold)


def check_trace_besq(model: LaguerreModel, t: float, u_scalar: float,
                     n_paths: int, seed: int, dt: float = 1e-3,
                     threshold: float = 3.0) -> McReport:
    """tr(X_t) against the BESQ(2*delta*m, tr x0) Laplace transform."""
    res = _run_matrix_paths(model, dt, t, seed, n_paths)
    tr = np.einsum("pii->p", res["finals"]).real
    est, se = _mean_se(np.exp(-u_scalar * tr))
    trace0 = float(np.trace(model.x0).real)
    ref = (1.0 + 2 * t * u_scalar) ** (-model.delta * model.m) \
        * math.exp(-u_scalar * trace0 / (1.0 + 2 * t * u_scalar))
    z = _zscore(est, se, ref)
    return McReport("trace_besq", est, se, ref, z, n_paths, seed,
                    abs(z) <= threshold, threshold)


def check_additivity(model_a: LaguerreModel, model_b: LaguerreModel, t: float,
                     u, n_paths: int, seed: int, dt: float = 1e-3,
                     threshold: float = 3.0) -> McReport:
    """Sum of independent paths against the law of the summed model."""
    if model_a.m != model_b.m:
        raise ConfigError("additivity requires matching matrix sizes")
    u = np.asarray(u, dtype=complex)
    if u.ndim == 1:
        u = np.diag(u)
    seed_a = int(np.random.SeedSequence((seed, 1)).generate_state(1)[0])
    seed_b = int(np.random.SeedSequence((seed, 2)).generate_state(1)[0])
    res_a = _run_matrix_paths(model_a, dt, t, seed_a, n_paths)
    res_b = _run_matrix_paths(model_b, dt, t, seed_b, n_paths)
    tot = res_a["finals"] + res_b["finals"]
    vals = np.einsum("pij,ji->p", tot, u).real
    est, se = _mean_se(np.exp(-vals))
    combined = LaguerreModel(m=model_a.m, delta=model_a.delta + model_b.delta,
                             x0=model_a.x0 + model_b.x0)
    ref = laplace_transform(combined, t, u)
    z = _zscore(est, se, ref)
    return McReport("additivity", est, se, ref, z, n_paths, seed,
                    abs(z) <= threshold, threshold)


def check_t0(model: LaguerreModel, t_grid: Sequence[float], n_paths: int,
             seed: int, dt: float = 1e-5, threshold: float = 3.0,
             horizon: Optional[float] = None) -> list[McReport]:
    """Empirical survival P(T0 > t) against the closed-form tail, binomial SEs."""
    t_grid = sorted(float(t) for t in t_grid)
    T = horizon if horizon is not None else max(t_grid)
    res = _run_eigen_paths(model, dt, T, seed, n_paths, crossing=True)
    t0s = res["t0"]
    reports = []
    for t in t_grid:
        if t > T:
            reports.append(McReport(f"t0_tail@t={t:g}", math.nan, 0.0, math.nan,
                                    math.nan, n_paths, seed, False, threshold,
                                    gating=False, note="censored: t beyond horizon"))
            continue
        phat = float(np.mean(t0s > t))
        se = math.sqrt(max(phat * (1 - phat), 1e-300) / n_paths)
        ref = t0_tail(model, model.x0, t)
        z = _zscore(phat, se, ref)
        reports.append(McReport(f"t0_tail@t={t:g}", phat, se, ref, z,
                                n_paths, seed, abs(z) <= threshold, threshold))
    return reports


def _chamber_cell_mass(model, t, x_spec, lo1, hi1, lo2, hi2, order=12) -> float:
    """Mass of q_t(x, .) over a rectangle intersected with {y1 > y2}."""
    from scipy.special import roots_legendre
    nodes, weights = roots_legendre(order)
    mid1, half1 = 0.5 * (lo1 + hi1), 0.5 * (hi1 - lo1)
    total = 0.0
    for n1, w1 in zip(nodes, weights):
        y1 = mid1 + half1 * n1
        top = min(hi2, y1)
        if top <= lo2:
            continue
        mid2, half2 = 0.5 * (lo2 + top), 0.5 * (top - lo2)
        for n2, w2 in zip(nodes, weights):
            y2 = mid2 + half2 * n2
            total += w1 * w2 * half1 * half2 * eigen_semigroup(
                model, t, x_spec, np.array([y1, y2]))
    return total


def check_eigen_density(model: LaguerreModel, t: float, n_paths: int, seed: int,
                        dt: float = 1e-3, bins: int = 6, y_hi: float = None,
                        p_threshold: float = 0.01) -> McReport:
    """Binned chi-square of simulated ordered spectra against the semigroup.

    m = 2 only.  Cells with expected count below 20 are merged into the
    catch-all complement cell.
    """
    if model.m != 2:
        raise ConfigError("the binned density check is implemented for m = 2")
    x_spec = model.x0_spectrum
    if y_hi is None:
        y_hi = float(np.max(x_spec) + 2 * model.delta * t * 4 + 8 * t)
    res = _run_eigen_paths(model, dt, t, seed, n_paths)
    finals = res["finals"]
    edges = np.linspace(0.0, y_hi, bins + 1)
    cells = []
    for i in range(bins):
        for j in range(bins):
            if edges[j] >= edges[i + 1]:
                continue  # entirely above the diagonal
            mass = _chamber_cell_mass(model, t, x_spec,
                                      edges[i], edges[i + 1], edges[j], edges[j + 1])
            if mass * n_paths >= 20.0:
                cells.append((edges[i], edges[i + 1], edges[j], edges[j + 1], mass))
    counts = []
    for lo1, hi1, lo2, hi2, _ in cells:
        inside = ((finals[:, 0] >= lo1) & (finals[:, 0] < hi1)
                  & (finals[:, 1] >= lo2) & (finals[:, 1] < hi2))
        counts.append(int(np.sum(inside)))
    expected = [n_paths * c[4] for c in cells]
    rest_e = n_paths - sum(expected)
    rest_o = n_paths - sum(counts)
    stat = sum((o - e) ** 2 / e for o, e in zip(counts, expected))
    if rest_e > 0:
        stat += (rest_o - rest_e) ** 2 / rest_e
        df = len(cells)
    else:
        df = len(cells) - 1
    pval = float(chi2_dist.sf(stat, df))
    z = float(norm_dist.isf(max(pval, 1e-300)))
    threshold = float(norm_dist.isf(p_threshold))
    return McReport("eigen_density_chi2", stat, math.sqrt(2 * df), float(df), z,
                    n_paths, seed, pval > p_threshold, threshold,
                    note=f"p={pval:.4f}, cells={len(cells)}+rest, df={df}")


def _run_eigen_girsanov(model: LaguerreModel, dt: float, T: float, seed: int,
                        n_paths: int) -> dict:
    """Spectra plus the trapezoidal integral of sum(1/lambda) along each path."""
    n_steps = int(round(T / dt))
    m = model.m
    lam0 = model.x0_spectrum.astype(float)
    finals = np.empty((n_paths, m))
    integrals = np.zeros(n_paths)
    singular = np.zeros(n_paths, dtype=bool)
    sqdt = math.sqrt(dt)
    for start, size in _blocks(n_paths):
        streams = PathStreams(seed, size, start_index=start)
        lam = np.broadcast_to(lam0, (size, m)).copy()
        acc = np.zeros(size)
        sing = np.zeros(size, dtype=bool)
        trinv_prev = np.sum(1.0 / lam, axis=1)
        chunk = _chunk_steps(size, m, n_steps)
        done = 0
        while done < n_steps:
            take = min(chunk, n_steps - done)
            dw = streams.draw(take, (m,)) * sqdt
            for k in range(take):
                lam = eigen_step(lam, dw[:, k], model.delta, dt)
                sing |= lam[:, -1] < 1e-12
                trinv = np.sum(1.0 / np.maximum(lam, 1e-12), axis=1)
                acc += 0.5 * dt * (trinv_prev + trinv)
                trinv_prev = trinv
            done += take
        finals[start:start + size] = lam
        integrals[start:start + size] = acc
        singular[start:start + size] = sing
    return {"finals": finals, "trinv_integral": integrals, "singular": singular}


def check_girsanov(model: LaguerreModel, nu: float, t: float, u, n_paths: int,
                   seed: int, dt: float = 2e-4, threshold: float = 3.0) -> McReport:
    """Weighted expectation under delta = m against the delta = m + nu law.

    Scalar u (or u = c*I) runs on the eigenvalue scheme, where the weight and
    tr(u X_t) are spectral functions; a general Hermitian u falls back to the
    slower matrix scheme.  Paths whose discretized state loses positive
    definiteness (smallest eigenvalue below 1e-12) get weight zero: a path
    only crosses after dipping to the O(dt) scale, where its exact weight is
    exp(-(nu^2/2) O(log^2 dt)), below the statistical resolution.
    """
    if abs(model.delta - model.m) > 1e-12:
        raise ConfigError("the base model must have delta = m")
    u_mat = np.asarray(u, dtype=complex)
    if u_mat.ndim == 1:
        u_mat = np.diag(u_mat)
    elif u_mat.ndim == 0:
        u_mat = np.eye(model.m) * u_mat
    off = u_mat - np.diag(np.diag(u_mat))
    diag = np.diag(u_mat).real
    scalar_u = np.max(np.abs(off)) == 0.0 and np.ptp(diag) == 0.0
    det_0 = float(np.prod(model.x0_spectrum))
    if scalar_u:
        res = _run_eigen_girsanov(model, dt, t, seed, n_paths)
        det_t = np.prod(res["finals"], axis=1)
        vals = diag[0] * np.sum(res["finals"], axis=1)
    else:
        res = _run_matrix_paths(model, dt, t, seed, n_paths, girsanov=True)
        _, det_t, _ = _trinv_det_min(res["finals"])
        vals = np.einsum("pij,ji->p", res["finals"], u_mat).real
    ok = ~res["singular"] & (det_t > 0)
    weights = np.zeros(n_paths)
    ratio = np.where(ok, det_t / det_0, 1.0)
    weights[ok] = ratio[ok] ** (nu / 2) \
        * np.exp(-0.5 * nu * nu * res["trinv_integral"][ok])
    est, se = _mean_se(weights * np.exp(-vals))
    target = LaguerreModel(m=model.m, delta=model.m + nu, x0=model.x0)
    ref = laplace_transform(target, t, u_mat)
    z = _zscore(est, se, ref)
    n_sing = int(np.sum(~ok))
    return McReport("girsanov", est, se, ref, z, n_paths, seed,
                    abs(z) <= threshold, threshold,
                    note=f"zero-weighted singular paths: {n_sing}")


def check_log_asymptotic(m: int, t_large: float, theta: float, n_paths: int,
                         seed: int, threshold: float = 4.0) -> McReport:
    """Long-horizon law of the normalized inverse-trace functional (stretch).

    (4 / (m log t)^2) int_0^t tr(X_s^{-1}) ds converges in law to the first
    hitting time of 1 by Brownian motion, with Laplace transform
    e^{-sqrt(2 theta)}.  Non-gating: log-scale convergence is slow.
    """
    spectrum = np.arange(m, 0, -1, dtype=float)  # strictly ordered start
    model = LaguerreModel(m=m, delta=float(m), x0=np.diag(spectrum))
    # piecewise grid: fine on [0,1], then dt proportional to the decade
    segments = [(0.0, 1.0, 1e-3)]
    lo = 1.0
    while lo < t_large:
        hi = min(lo * 10.0, t_large)
        segments.append((lo, hi, lo * 1e-2))
        lo = hi
    integrals = np.zeros(n_paths)
    for start, size in _blocks(n_paths):
        streams = PathStreams(seed, size, start_index=start)
        lam = np.broadcast_to(spectrum, (size, m)).copy()
        acc = np.zeros(size)
        trinv_prev = np.sum(1.0 / lam, axis=1)
        for (lo, hi, seg_dt) in segments:
            n_steps = int(round((hi - lo) / seg_dt))
            sqdt = math.sqrt(seg_dt)
            chunk = _chunk_steps(size, m, n_steps)
            done = 0
            while done < n_steps:
                take = min(chunk, n_steps - done)
                dw = streams.draw(take, (m,)) * sqdt
                for k in range(take):
                    lam = eigen_step(lam, dw[:, k], model.delta, seg_dt)
                    trinv = np.sum(1.0 / np.maximum(lam, 1e-12), axis=1)
                    acc += 0.5 * seg_dt * (trinv_prev + trinv)
                    trinv_prev = trinv
                done += take
        integrals[start:start + size] = acc
    norm_fun = 4.0 / (m * math.log(t_large)) ** 2 * integrals
    est, se = _mean_se(np.exp(-theta * norm_fun))
    ref = math.exp(-math.sqrt(2 * theta))
    z = _zscore(est, se, ref)
    return McReport(f"log_asymptotic@theta={theta:g}", est, se, ref, z,
                    n_paths, seed, abs(z) <= threshold, threshold, gating=False,
                    note=f"t={t_large:g}; slow log-scale convergence, non-gating")


#: fixed seeds of the gating suite; re-rolling a failing seed is forbidden
SUITE_SEEDS = {
    "laplace": 20250811,
    "trace_besq": 20250812,
    "additivity": 20250813,
    "t0": 20250814,
    "eigen_density": 20250815,
    "girsanov": 20250816,
    "log_asymptotic": 20250817,
}


def default_suite(fast: bool = False, paths_override: Optional[int] = None) -> list:
    """Verification-suite plan: (name, thunk) pairs in fixed order.

    fast=True shrinks path counts and coarsens dt by an order of magnitude
    for smoke runs; the recorded gating configuration is fast=False.
    paths_override forces one path count for every check.
    """
    scale = 10 if fast else 1

    def n(default):
        return paths_override if paths_override is not None else default // scale
    x_12 = np.diag([1.0, 2.0])
    x_21 = np.diag([2.0, 1.0])
    return [
        ("laplace", lambda: check_laplace(
            LaguerreModel(2, 2.5, x_12), 1.0, np.diag([0.3, 0.1]),
            n(100_000), SUITE_SEEDS["laplace"], dt=1e-3)),
        ("trace_besq", lambda: check_trace_besq(
            LaguerreModel(2, 2.0, x_21), 1.0, 0.25,
            n(20_000), SUITE_SEEDS["trace_besq"], dt=1e-3)),
        ("additivity", lambda: check_additivity(
            LaguerreModel(2, 1.0, np.diag([1.0, 0.5])),
            LaguerreModel(2, 1.0, np.diag([0.7, 0.2])),
            1.0, np.diag([0.3, 0.1]), n(20_000),
            SUITE_SEEDS["additivity"], dt=1e-3)),
        ("t0", lambda: check_t0(
            LaguerreModel(2, 1.5, x_21), [0.25, 0.5, 1.0, 2.0],
            n(10_000), SUITE_SEEDS["t0"], dt=1e-4 if fast else 1e-5)),
        ("eigen_density", lambda: check_eigen_density(
            LaguerreModel(2, 2.5, x_21), 1.0, n(20_000),
            SUITE_SEEDS["eigen_density"], dt=1e-3)),
        ("girsanov", lambda: check_girsanov(
            LaguerreModel(2, 2.0, np.diag([8.0, 4.0])), 0.5, 1.0, 0.1,
            n(100_000), SUITE_SEEDS["girsanov"], dt=2e-4)),
        ("log_asymptotic", lambda: check_log_asymptotic(
            2, 1e3 if fast else 1e4, 0.5, n(2_000),
            SUITE_SEEDS["log_asymptotic"])),
    ]


def run_suite(fast: bool = False, only: Optional[str] = None,
              threads: int = 1, paths_override: Optional[int] = None) -> list[McReport]:
    """Run the verification suite; reports come back in plan order.

    Each check is a pure function of its fixed seed, so any thread count
    yields identical reports.
    """
    plan = default_suite(fast, paths_override)
    if only is not None:
        plan = [(n, f) for n, f in plan if n == only]
        if not plan:
            raise ConfigError(f"unknown check {only!r}; choose from "
                              f"{[n for n, _ in default_suite(fast)]}")
    if threads > 1 and len(plan) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [(name, pool.submit(fn)) for name, fn in plan]
            results = [(name, fut.result()) for name, fut in futures]
    else:
        results = [(name, fn()) for name, fn in plan]
    reports: list[McReport] = []
    for _, res in results:
        if isinstance(res, list):
            reports.extend(res)
        else:
            reports.append(res)
    return reports
