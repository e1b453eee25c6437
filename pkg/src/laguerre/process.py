"""Path simulation of the Laguerre matrix SDE and its eigenvalue system.

Matrix scheme (full-truncation Euler for dX = sqrt(X^+) dB + dB* sqrt(X^+) + 2 delta I dt):

    X_{k+1} = sym( X_k + sqrt(X_k^+) dB + dB* sqrt(X_k^+) ) + 2 delta I dt

with dB an m x m matrix of complex Gaussian increments whose real and
imaginary parts each have variance dt (so that tr X is a BESQ(2*delta*m)).

Eigenvalue scheme (ordered spectrum, full truncation, tamed interaction):

    dlam_i = 2 sqrt(lam_i^+) dW_i + 2[ delta + sum_{k != i} (lam_i^+ + lam_k^+)/(lam_i - lam_k) ] dt

The Coulomb interaction term is tamed by I/(1 + dt |I|) per coordinate; the
constant 2*delta part is left exact so the m = 1 scheme coincides with the
matrix scheme driven by the same scalar increments.

Randomness contract: path p of a run with master seed s draws its increments
from Generator(Philox(SeedSequence((s, p)))), consumed step-major; for the
matrix scheme each step consumes the real part (row-major m x m) then the
imaginary part, each scaled by sqrt(dt); for the eigenvalue scheme each step
consumes m standard normals.  Per-path output is therefore a pure function of
(model, dt, T, master seed, path index), independent of blocking or worker
scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CollisionError, ConfigError, GridMismatchError

__all__ = [
    "LaguerreModel",
    "SeedInfo",
    "MatrixPath",
    "EigenPath",
    "simulate_matrix",
    "simulate_eigen",
    "detect_t0",
    "superpose",
]

_HERMITIAN_TOL = 1e-12
_PSD_TOL = 1e-10
_GAP_FLOOR = 1e-300


@dataclass(frozen=True)
class LaguerreModel:
    """Size m, dimension delta and initial state of a Laguerre process.

    The index is nu = delta - m.  x0 may be an m x m Hermitian PSD matrix or
    a spectrum (sequence of m nonnegative reals, taken as a diagonal matrix).
    """

    m: int
    delta: float
    x0: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError(f"matrix size m must be >= 1, got {self.m}")
        if self.delta < 0:
            raise ConfigError(f"dimension delta must be >= 0, got {self.delta}")
        x0 = self.x0
        if x0 is None:
            x0 = np.zeros((self.m, self.m), dtype=complex)
        else:
            x0 = np.asarray(x0)
            if x0.ndim == 1:
                if len(x0) != self.m:
                    raise ConfigError("spectrum length does not match m")
                x0 = np.diag(np.sort(np.asarray(x0, dtype=float))[::-1]).astype(complex)
            elif x0.shape == (self.m, self.m):
                x0 = x0.astype(complex)
            else:
                raise ConfigError(f"x0 has shape {x0.shape}, expected ({self.m}, {self.m})")
        herm_defect = np.max(np.abs(x0 - x0.conj().T)) if self.m else 0.0
        scale = max(np.max(np.abs(x0)), 1.0)
        if herm_defect > _HERMITIAN_TOL * scale:
            raise ConfigError(f"x0 is not Hermitian (defect {herm_defect:.2e})")
        x0 = 0.5 * (x0 + x0.conj().T)
        evals = np.linalg.eigvalsh(x0)
        if evals.min() < -_PSD_TOL * scale:
            raise ConfigError(f"x0 has negative eigenvalue {evals.min():.2e}")
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)

    @classmethod
    def from_nu(cls, m: int, nu: float, x0=None) -> "LaguerreModel":
        return cls(m=m, delta=m + nu, x0=x0)

    @property
    def nu(self) -> float:
        return self.delta - self.m

    @property
    def x0_spectrum(self) -> np.ndarray:
        return np.sort(np.linalg.eigvalsh(self.x0))[::-1]

    @property
    def regime(self) -> str:
        """Strong-solution regime of the SDE for this dimension."""
        if self.delta >= self.m:
            return "strong"          # unique strong solution, stays PD
        if self.delta > self.m - 1:
            return "positive"        # unique in law, spectrum stays >= 0
        return "truncated"           # full-truncation scheme only


@dataclass(frozen=True)
class SeedInfo:
    """RNG provenance: per-path stream is Philox(SeedSequence((master, path_index)))."""

    master: int
    path_index: int = 0


def path_generator(seed: SeedInfo | int, path_index: int = 0) -> np.random.Generator:
    """Counter-based generator for one path, derived from (master seed, path index)."""
    if isinstance(seed, SeedInfo):
        master, idx = seed.master, seed.path_index
    else:
        master, idx = int(seed), path_index
    ss = np.random.SeedSequence((int(master), int(idx)))
    return np.random.Generator(np.random.Philox(ss))


def _time_grid(dt: float, T: float) -> np.ndarray:
    if dt <= 0 or T < dt:
        raise ConfigError(f"need dt > 0 and T >= dt, got dt={dt}, T={T}")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * T:
        n = int(np.ceil(T / dt))
    return np.linspace(0.0, n * dt, n + 1)


def sqrtm_psd(x: np.ndarray) -> np.ndarray:
    """Hermitian square root of the positive part, for a stack of matrices.

    Closed form for m in {1, 2}; spectral decomposition otherwise.
    """
    x = np.asarray(x)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[None]
    m = x.shape[-1]
    if m == 1:
        out = np.sqrt(np.clip(x.real, 0.0, None)).astype(complex)
    elif m == 2:
        a = x[..., 0, 0].real
        c = x[..., 1, 1].real
        b = x[..., 0, 1]
        t = a + c
        g = np.sqrt(np.maximum((a - c) ** 2 + 4 * (b.real ** 2 + b.imag ** 2), 0.0))
        lp = np.maximum(0.5 * (t + g), 0.0)
        lm = np.maximum(0.5 * (t - g), 0.0)
        sp, sm = np.sqrt(lp), np.sqrt(lm)
        ok = g > 1e-14 * np.maximum(np.abs(t), 1e-300)
        gsafe = np.where(ok, g, 1.0)
        # sqrt(X^+) = w1 * X + w0 * I on each eigenspace pair
        w1 = np.where(ok, (sp - sm) / gsafe, 0.0)
        w0 = np.where(ok, (sm * (t + g) - sp * (t - g)) / (2 * gsafe),
                      np.sqrt(np.maximum(t / 2, 0.0)))
        out = np.empty_like(x, dtype=complex)
        out[..., 0, 0] = w1 * a + w0
        out[..., 1, 1] = w1 * c + w0
        out[..., 0, 1] = w1 * b
        out[..., 1, 0] = w1 * np.conj(b)
    else:
        w, v = np.linalg.eigh(x)
        w = np.sqrt(np.clip(w, 0.0, None))
        out = (v * w[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    return out[0] if squeeze else out


def matrix_step(x: np.ndarray, db: np.ndarray, delta: float, dt: float) -> np.ndarray:
    """One full-truncation Euler step of the matrix SDE for a stack of states.

    db carries the already scaled complex increments (std sqrt(dt) per
    real/imaginary component).
    """
    s = sqrtm_psd(x)
    y = x + s @ db + np.conj(np.swapaxes(db, -1, -2)) @ s
    y = 0.5 * (y + np.conj(np.swapaxes(y, -1, -2)))
    idx = np.arange(x.shape[-1])
    y[..., idx, idx] += 2.0 * delta * dt
    return y


def eigen_step(lam: np.ndarray, dw: np.ndarray, delta: float, dt: float) -> np.ndarray:
    """One tamed full-truncation Euler step of the eigenvalue system.

    lam is a stack of raw (possibly negative) ordered spectra; dw the scaled
    Gaussian increments (std sqrt(dt)).  Returns re-sorted raw spectra.
    """
    m = lam.shape[-1]
    lplus = np.maximum(lam, 0.0)
    if m == 1:
        return lam + 2.0 * np.sqrt(lplus) * dw + 2.0 * delta * dt
    if m == 2:
        # ordered input: gap >= 0, the two interactions are +/- the same value
        gap = lam[..., 0] - lam[..., 1]
        gap = np.where(gap < _GAP_FLOOR, _GAP_FLOOR, gap)
        inter = 2.0 * (lplus[..., 0] + lplus[..., 1]) / gap
        tamed = inter / (1.0 + dt * inter)
        if not np.all(np.isfinite(tamed)):
            raise CollisionError("eigenvalue gap collapsed and taming failed")
        out = np.empty_like(lam)
        out[..., 0] = lam[..., 0] + 2.0 * np.sqrt(lplus[..., 0]) * dw[..., 0] \
            + (2.0 * delta + tamed) * dt
        out[..., 1] = lam[..., 1] + 2.0 * np.sqrt(lplus[..., 1]) * dw[..., 1] \
            + (2.0 * delta - tamed) * dt
        lo = np.minimum(out[..., 0], out[..., 1])
        out[..., 0] = np.maximum(out[..., 0], out[..., 1])
        out[..., 1] = lo
        return out
    inter = np.zeros_like(lam)
    for i in range(m):
        for k in range(m):
            if k == i:
                continue
            gap = lam[..., i] - lam[..., k]
            gap = np.where(np.abs(gap) < _GAP_FLOOR,
                           np.where(gap >= 0, _GAP_FLOOR, -_GAP_FLOOR), gap)
            inter[..., i] += (lplus[..., i] + lplus[..., k]) / gap
    inter *= 2.0
    tamed = inter / (1.0 + dt * np.abs(inter))
    if not np.all(np.isfinite(tamed)):
        raise CollisionError("eigenvalue gap collapsed and taming failed")
    out = lam + 2.0 * np.sqrt(lplus) * dw + (2.0 * delta + tamed) * dt
    return np.sort(out, axis=-1)[..., ::-1]


@dataclass(frozen=True)
class MatrixPath:
    """Time grid, Hermitian states of one matrix path, and RNG provenance."""

    model: LaguerreModel
    times: np.ndarray
    states: np.ndarray
    seed: SeedInfo

    def __post_init__(self):
        self.times.setflags(write=False)
        self.states.setflags(write=False)

    def to_csv(self, path) -> None:
        """Header t,re_ij,im_ij over the row-major upper triangle."""
        from .csvio import write_matrix_path_csv
        write_matrix_path_csv(self, path)


@dataclass(frozen=True)
class EigenPath:
    """Time grid, ordered nonnegative spectra, and the pre-truncation minimum.

    lambdas holds the clipped spectra (entries >= 0, non-increasing rows);
    raw_min keeps the smallest eigenvalue before truncation at every grid
    time, which is what boundary-hitting detection interpolates.
    """

    model: LaguerreModel
    times: np.ndarray
    lambdas: np.ndarray
    raw_min: np.ndarray
    seed: SeedInfo

    def __post_init__(self):
        self.times.setflags(write=False)
        self.lambdas.setflags(write=False)
        self.raw_min.setflags(write=False)

    def to_csv(self, path) -> None:
        """Header t,lambda1,...,lambdam."""
        from .csvio import write_eigen_path_csv
        write_eigen_path_csv(self, path)


def simulate_matrix(model: LaguerreModel, dt: float, T: float,
                    seed: int, path_index: int = 0) -> MatrixPath:
    """Euler path of the matrix SDE on a uniform grid."""
    times = _time_grid(dt, T)
    n = len(times) - 1
    gen = path_generator(seed, path_index)
    g = gen.standard_normal((n, 2, model.m, model.m))
    sqdt = np.sqrt(dt)
    states = np.empty((n + 1, model.m, model.m), dtype=complex)
    states[0] = model.x0
    x = model.x0.copy()
    for k in range(n):
        db = (g[k, 0] + 1j * g[k, 1]) * sqdt
        x = matrix_step(x, db, model.delta, dt)
        states[k + 1] = x
    return MatrixPath(model, times, states, SeedInfo(int(seed), path_index))


def simulate_eigen(model: LaguerreModel, dt: float, T: float,
                   seed: int, path_index: int = 0) -> EigenPath:
    """Euler path of the ordered eigenvalue system on a uniform grid."""
    lam0 = model.x0_spectrum.astype(float)
    if model.m >= 2 and np.min(-np.diff(lam0)) <= 0:
        raise ConfigError("eigenvalue scheme requires a strictly ordered initial spectrum")
    times = _time_grid(dt, T)
    n = len(times) - 1
    gen = path_generator(seed, path_index)
    dw = gen.standard_normal((n, model.m)) * np.sqrt(dt)
    lambdas = np.empty((n + 1, model.m))
    raw_min = np.empty(n + 1)
    lam = lam0.copy()
    lambdas[0] = np.maximum(lam, 0.0)
    raw_min[0] = lam.min()
    for k in range(n):
        lam = eigen_step(lam, dw[k], model.delta, dt)
        lambdas[k + 1] = np.maximum(lam, 0.0)
        raw_min[k + 1] = lam.min()
    return EigenPath(model, times, lambdas, raw_min, SeedInfo(int(seed), path_index))


def detect_t0(path: EigenPath) -> Optional[float]:
    """First time the smallest eigenvalue crosses zero, or None.

    Takes the first grid time with pre-truncation lambda_min <= 0 and refines
    it by linear interpolation across the crossing step.
    """
    v = path.raw_min
    hits = np.nonzero(v <= 0.0)[0]
    if len(hits) == 0:
        return None
    k = int(hits[0])
    if k == 0:
        return 0.0
    t0, t1 = path.times[k - 1], path.times[k]
    v0, v1 = v[k - 1], v[k]
    return float(t0 + (t1 - t0) * v0 / (v0 - v1))


def superpose(path_a: MatrixPath, path_b: MatrixPath) -> MatrixPath:
    """Pointwise sum of two independent matrix paths on the same grid."""
    if path_a.times.shape != path_b.times.shape or \
            not np.array_equal(path_a.times, path_b.times):
        raise GridMismatchError("paths do not share a time grid")
    if path_a.seed == path_b.seed:
        raise ConfigError("superposed paths must use independent seeds")
    if path_a.model.m != path_b.model.m:
        raise ConfigError("superposed paths must share the matrix size m")
    model = LaguerreModel(m=path_a.model.m,
                          delta=path_a.model.delta + path_b.model.delta,
                          x0=path_a.model.x0 + path_b.model.x0)
    return MatrixPath(model, path_a.times.copy(),
                      path_a.states + path_b.states, path_a.seed)


class PathStreams:
    """Per-path generators for a block of paths, drawn in step-major chunks.

    Drawing through this class yields, per path, exactly the stream a
    single-path simulation consumes, regardless of chunk boundaries.
    """

    def __init__(self, master_seed: int, n_paths: int, start_index: int = 0):
        self.master_seed = int(master_seed)
        self.start_index = start_index
        self._gens = [path_generator(master_seed, start_index + i)
                      for i in range(n_paths)]

    def __len__(self):
        return len(self._gens)

    def draw(self, steps: int, per_step: tuple) -> np.ndarray:
        """Array of shape (n_paths, steps, *per_step) of standard normals."""
        out = np.empty((len(self._gens), steps) + tuple(per_step))
        for i, gen in enumerate(self._gens):
            gen.standard_normal(out=out[i])
        return out
