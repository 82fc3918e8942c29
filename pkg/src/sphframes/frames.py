"""Frame analysis over scale sequences and phase-space grids.

Bandlimited test functions are combinations of truncated zonal kernels,
f = sum_i c_i K^(L)(x . z_i) with K^(L)(t) = sum_{l=l_min}^{L} K_l(t).
Their squared norm (in the normalized inner product (1/Sigma_n) int f g
dsigma) is c^T G c with Gram G[i,j] = K^(L)(z_i . z_j), by the reproducing
property of K^(L).

The module provides the semi-continuous frame-bound sweep S(l), discrete
frame quotients over a phase-space grid, Monte-Carlo and exact generalized
eigenvalue frame bounds on the kernel span, and frame-algorithm
reconstruction.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .backend import zonal_series
from .errors import ConfigurationError, DegenerateInputError, NumericError
from .families import WaveletFamily
from .scales import ScaleSequence, make_scales
from .special import Dimension, harmonic_dim
from .sphere import PhaseSpaceGrid, sample_uniform

__all__ = [
    "ScaleSequence",
    "make_scales",
    "BandFunction",
    "band_kernel",
    "gram_matrix",
    "band_dimension",
    "SemiframeBounds",
    "semiframe_bounds",
    "analysis_coeff",
    "frame_quotient",
    "FrameReport",
    "frame_bounds_mc",
    "frame_bounds_eig",
    "random_band_function",
    "ReconstructionReport",
    "reconstruct",
]

_GRAM_TRUNCATION = 1e-8


def band_dimension(dim: Dimension, L: int, l_min: int = 1) -> int:
    """Dimension of the harmonic band l_min..L on S^n."""
    return int(sum(harmonic_dim(dim, l) for l in range(l_min, L + 1)))


def _band_base(dim: Dimension, L: int, l_min: int) -> np.ndarray:
    """Gegenbauer coefficients of sum_{l=l_min}^{L} K_l: (l+lam)/lam on the band."""
    ls = np.arange(L + 1, dtype=np.float64)
    base = np.zeros(L + 1)
    base[l_min:] = (ls[l_min:] + dim.lam) / dim.lam
    return base


def band_kernel(dim: Dimension, L: int, l_min: int, t):
    """K^(L)(t) = sum_{l=l_min}^{L} K_l(t), elementwise in t."""
    t = np.asarray(t, dtype=np.float64)
    coef = _band_base(dim, L, l_min)
    vals = zonal_series(coef, dim.lam, t.ravel())
    return float(vals) if t.ndim == 0 else np.asarray(vals).reshape(t.shape)


@dataclass(frozen=True)
class BandFunction:
    """f(x) = sum_i coeffs[i] * K^(L)(x . centers[i]); bandlimited to degree L."""

    dim: Dimension
    L: int
    l_min: int
    centers: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        centers = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        coeffs = np.asarray(self.coeffs, dtype=np.float64).ravel()
        if int(self.L) != self.L or int(self.l_min) != self.l_min:
            raise ConfigurationError("band limits must be integers")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "l_min", int(self.l_min))
        if not 0 <= self.l_min <= self.L:
            raise ConfigurationError(
                f"need 0 <= l_min <= L, got l_min={self.l_min}, L={self.L}"
            )
        if centers.shape[1] != self.dim.n + 1:
            raise ConfigurationError(f"centers must have {self.dim.n + 1} coordinates")
        if coeffs.size != centers.shape[0]:
            raise ConfigurationError("one coefficient per center required")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        dots = np.clip(x @ self.centers.T, -1.0, 1.0)
        return band_kernel(self.dim, self.L, self.l_min, dots) @ self.coeffs

    @property
    def norm_sq(self) -> float:
        """Squared norm c^T G c under (1/Sigma_n) int |f|^2 dsigma."""
        return float(self.coeffs @ gram_matrix(self) @ self.coeffs)


def gram_matrix(fn: BandFunction) -> np.ndarray:
    """G[i,j] = K^(L)(z_i . z_j) for the function's centers."""
    dots = np.clip(fn.centers @ fn.centers.T, -1.0, 1.0)
    return band_kernel(fn.dim, fn.L, fn.l_min, dots)


def random_band_function(
    dim: Dimension, L: int, centers: int, rng, l_min: int = 1
) -> BandFunction:
    """Uniform centers, standard-normal coefficients."""
    z = sample_uniform(dim, centers, rng)
    return BandFunction(dim, L, l_min, z, rng.standard_normal(centers))


# ---------------------------------------------------------------------------
# semi-continuous bounds


class SemiframeBounds(NamedTuple):
    A: float
    B: float
    ls: np.ndarray
    profile: np.ndarray


def semiframe_bounds(
    family: WaveletFamily, scales: ScaleSequence, l_range
) -> SemiframeBounds:
    """Scale-discretized frame profile S(l) and its extremes over a degree range.

    S(l) = C kappa^2 sum_j gamma(b_j tau(l))^2 nu_j is a Riemann sum of the
    admissibility integral, so a fine geometric sequence drives S(l) -> 1
    uniformly over the range; A = min S, B = max S are the semi-continuous
    frame bounds on the band.
    """
    l_lo, l_hi = int(l_range[0]), int(l_range[1])
    l_floor = 1 if family.zero_mean else 0
    if l_lo < l_floor:
        raise ConfigurationError(
            f"degree range must start at {l_floor} or above for this family, got {l_lo}"
        )
    if l_hi < l_lo:
        raise ConfigurationError(f"empty degree range [{l_lo}, {l_hi}]")
    ls = np.arange(l_lo, l_hi + 1)
    t = np.multiply.outer(scales.scales, family.tau(ls.astype(np.float64)))
    g = family.profile(t)
    S = family.frame_constant * family.kappa**2 * (scales.nu[:, None] * g * g).sum(axis=0)
    return SemiframeBounds(float(S.min()), float(S.max()), ls, S)


# ---------------------------------------------------------------------------
# discrete analysis


def _check_dims(family: WaveletFamily, *dims: Dimension) -> None:
    for d in dims:
        if d != family.dim:
            raise ConfigurationError(
                f"dimension mismatch: family is n={family.dim.n}, argument is n={d.n}"
            )


def _analysis_matrix(family, b, y, centers, L, l_min) -> np.ndarray:
    """W[p, i] = kappa sum_{l=l_min}^{L} gamma(b_p tau(l)) K_l(y_p . z_i).

    Rows sharing a scale share their coefficient vector, so the series runs
    once per distinct scale over that block of the dot-product matrix.
    """
    dim = family.dim
    b = np.asarray(b, dtype=np.float64)
    dots = np.clip(np.atleast_2d(y) @ np.atleast_2d(centers).T, -1.0, 1.0)
    base = _band_base(dim, L, l_min)
    ls = np.arange(L + 1, dtype=np.float64)
    W = np.empty(dots.shape)
    for bj in np.unique(b):
        rows = np.nonzero(b == bj)[0]
        s = family.scale_arg(float(bj))
        coef = family.kappa * family.profile(s * family.tau(ls)) * base
        vals = zonal_series(coef, dim.lam, dots[rows].ravel())
        W[rows] = np.asarray(vals).reshape(rows.size, dots.shape[1])
    return W


def analysis_coeff(family: WaveletFamily, b: float, y, fn: BandFunction) -> float:
    """Wavelet analysis coefficient W f(b, y) of a band function (exact finite sum)."""
    _check_dims(family, fn.dim)
    y = np.asarray(y, dtype=np.float64)
    W = _analysis_matrix(family, [b], y[None, :], fn.centers, fn.L, fn.l_min)
    return float(W[0] @ fn.coeffs)


def _nu_per_point(grid: PhaseSpaceGrid) -> np.ndarray:
    lut = {float(b): float(nu) for b, nu in zip(grid.scales.scales, grid.scales.nu)}
    try:
        return np.array([lut[float(b)] for b in grid.b])
    except KeyError as exc:
        raise ConfigurationError(
            f"grid point scale {exc.args[0]} is not in the grid's scale sequence"
        ) from None


def _norm_sq_checked(fn: BandFunction) -> float:
    G = gram_matrix(fn)
    nsq = float(fn.coeffs @ G @ fn.coeffs)
    floor = 1e-12 * float(fn.coeffs @ fn.coeffs) * float(np.abs(G).max(initial=0.0))
    if nsq <= floor:
        raise DegenerateInputError(
            f"band function norm {nsq:.3e} is numerically zero (floor {floor:.3e})"
        )
    return nsq


def frame_quotient(family: WaveletFamily, grid: PhaseSpaceGrid, fn: BandFunction) -> float:
    """Q(f) = C sum_p nu_p mu_p |W f(b_p, y_p)|^2 / ||f||^2.

    Scale- and rotation-invariant in f; its extremes over a subspace are the
    frame bounds there.
    """
    _check_dims(family, grid.dim, fn.dim)
    nsq = _norm_sq_checked(fn)
    if len(grid) == 0:
        return 0.0
    nu = _nu_per_point(grid)
    w = _analysis_matrix(family, grid.b, grid.y, fn.centers, fn.L, fn.l_min) @ fn.coeffs
    return float(family.frame_constant * np.sum(nu * grid.mu * w * w) / nsq)


# ---------------------------------------------------------------------------
# frame bounds


@dataclass(frozen=True)
class FrameReport:
    """Estimated (mc) or subspace-exact (eig) frame bounds for one grid."""

    family: str
    method: str
    L: int
    l_min: int
    A_hat: float
    B_hat: float
    seed: int
    centers: int
    grid_points: int
    trials: int | None = None
    degenerate: int = 0
    retained: int | None = None
    runtime: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.A_hat <= self.B_hat:
            raise NumericError(
                f"frame bounds out of order: A_hat={self.A_hat}, B_hat={self.B_hat}"
            )


def _resolve_l_min(family: WaveletFamily, l_min) -> int:
    if l_min is None:
        return 1 if family.zero_mean else 0
    return int(l_min)


def frame_bounds_mc(
    family: WaveletFamily,
    grid: PhaseSpaceGrid,
    L: int,
    trials: int,
    seed: int,
    l_min: int | None = None,
    centers_per_trial: int = 32,
) -> FrameReport:
    """Monte-Carlo frame-bound brackets from random band functions.

    Each trial draws uniform centers and standard-normal coefficients from a
    per-trial derived seed and records the frame quotient.  A_hat = min Q and
    B_hat = max Q bracket INWARD: the true bounds satisfy A <= A_hat and
    B_hat <= B.  Degenerate draws (numerically null functions) are resampled
    and counted.
    """
    _check_dims(family, grid.dim)
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    lm = _resolve_l_min(family, l_min)
    t0 = time.perf_counter()
    quotients = []
    degenerate = 0
    for trial in range(trials):
        for retry in range(64):
            rng = np.random.default_rng(np.random.SeedSequence((int(seed), trial, retry)))
            fn = random_band_function(grid.dim, L, centers_per_trial, rng, lm)
            try:
                quotients.append(frame_quotient(family, grid, fn))
                break
            except DegenerateInputError:
                degenerate += 1
        else:
            raise NumericError("could not draw a non-degenerate band function")
    return FrameReport(
        family=family.label,
        method="mc",
        L=int(L),
        l_min=lm,
        A_hat=float(min(quotients)),
        B_hat=float(max(quotients)),
        seed=int(seed),
        centers=centers_per_trial,
        grid_points=len(grid),
        trials=trials,
        degenerate=degenerate,
        runtime=time.perf_counter() - t0,
    )


class _WhitenedFrame(NamedTuple):
    X: np.ndarray  # whitened coords -> kernel coefficients, N x R
    Y: np.ndarray  # kernel coefficients -> whitened coords (transpose), N x R
    W: np.ndarray  # analysis matrix, P x N
    D: np.ndarray  # grid weights C nu mu, P
    T: np.ndarray  # frame operator on the span, R x R
    retained: int


def _whitened_frame_matrix(family, grid, z, L, lm) -> _WhitenedFrame:
    """Gram whitening and the frame operator compressed to span{K^(L)(., z_i)}.

    G = U diag(e) U^T is truncated at relative threshold 1e-8; with
    X = U e^(-1/2) and Y = U e^(1/2) the Gram norm of coefficients c is the
    Euclidean norm of Y^T c, and T = X^T W^T D W X has the subspace frame
    bounds as extreme eigenvalues.
    """
    dots = np.clip(z @ z.T, -1.0, 1.0)
    G = band_kernel(grid.dim, L, lm, dots)
    evals, evecs = np.linalg.eigh(G)
    keep = evals > _GRAM_TRUNCATION * float(evals.max(initial=0.0))
    retained = int(keep.sum())
    if retained < 3:
        raise ConfigurationError(
            f"Gram matrix of the centers is numerically rank {retained} (< 3); "
            "spread the centers or lower the band"
        )
    roots = np.sqrt(evals[keep])
    X = evecs[:, keep] / roots
    Y = evecs[:, keep] * roots
    W = _analysis_matrix(family, grid.b, grid.y, z, L, lm)
    D = family.frame_constant * _nu_per_point(grid) * grid.mu
    M = W @ X
    T = M.T @ (D[:, None] * M)
    return _WhitenedFrame(X, Y, W, D, T, retained)


def frame_bounds_eig(
    family: WaveletFamily,
    grid: PhaseSpaceGrid,
    L: int,
    centers,
    l_min: int | None = None,
    seed: int = 0,
) -> FrameReport:
    """Exact frame bounds on the span of a set of kernel centers.

    ``centers`` is either a count (points drawn uniformly with the given
    seed) or an explicit (N, n+1) array.  The extreme generalized eigenvalues
    of (W^T D W, G) — computed after spectral truncation of G at relative
    threshold 1e-8 — are the exact frame bounds A, B restricted to
    span{K^(L)(., z_i)}; with enough centers in generic position that span is
    the whole band and the bounds are global.
    """
    _check_dims(family, grid.dim)
    t0 = time.perf_counter()
    lm = _resolve_l_min(family, l_min)
    if isinstance(centers, (int, np.integer)):
        z = sample_uniform(grid.dim, int(centers), np.random.default_rng(int(seed)))
    else:
        z = np.atleast_2d(np.asarray(centers, dtype=np.float64))
        z = z / np.linalg.norm(z, axis=1, keepdims=True)
    needed = band_dimension(grid.dim, L, lm)
    if z.shape[0] < needed:
        warnings.warn(
            f"{z.shape[0]} centers span at most a strict subspace of the "
            f"{needed}-dimensional band; bounds are subspace bounds only",
            stacklevel=2,
        )
    wf = _whitened_frame_matrix(family, grid, z, L, lm)
    evals = np.linalg.eigvalsh(wf.T)
    return FrameReport(
        family=family.label,
        method="eig",
        L=int(L),
        l_min=lm,
        A_hat=float(max(evals[0], 0.0)),
        B_hat=float(max(evals[-1], 0.0)),
        seed=int(seed),
        centers=z.shape[0],
        grid_points=len(grid),
        retained=wf.retained,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# reconstruction


class ReconstructionReport(NamedTuple):
    rel_error: float
    residual: float
    iterations: int
    iteration_bound: int
    A_hat: float
    B_hat: float
    converged: bool


def reconstruct(
    family: WaveletFamily,
    grid: PhaseSpaceGrid,
    L: int,
    fn: BandFunction,
    tol: float = 1e-6,
    max_iterations: int | None = None,
):
    """Recover a band function from its frame coefficients on the grid.

    Runs the frame algorithm u <- u + (2/(A+B)) (S f - S u) in the kernel
    coefficient representation on the target's centers, where S is the grid
    frame operator and (A, B) are the exact subspace bounds from the
    generalized eigenproblem.  The error contracts by (B-A)/(B+A) per
    iteration, so rel. error <= tol is certified after
    bound = ceil(log(1/tol)/log((B+A)/(B-A))) iterations; the loop exits
    earlier when the a-posteriori bound ||residual||/A <= tol*||u|| already
    certifies it.  Returns the reconstruction and a report with the actual
    relative L2 error against the target.

    Raises NumericError (with the residual trace) when ``max_iterations`` is
    set below the contraction bound and neither certificate is reached.
    """
    _check_dims(family, grid.dim, fn.dim)
    if not 0.0 < tol < 1.0:
        raise ConfigurationError(f"tol must lie in (0, 1), got {tol}")
    wf = _whitened_frame_matrix(family, grid, fn.centers, int(L), fn.l_min)
    evals = np.linalg.eigvalsh(wf.T)
    A, B = float(max(evals[0], 0.0)), float(evals[-1])
    if A <= 0.0:
        raise NumericError(
            f"frame lower bound vanishes on the working subspace (A={A:.3e}); "
            "the grid does not frame these centers"
        )
    contraction = (B - A) / (B + A)
    if contraction <= 0.0:
        bound = 1
    else:
        bound = math.ceil(math.log(1.0 / tol) / -math.log(contraction))
    if max_iterations is None:
        max_iterations = bound + 10

    # analysis data of the target, pulled back to whitened coordinates
    data = wf.X.T @ (wf.W.T @ (wf.D * (wf.W @ fn.coeffs)))
    f_tilde = wf.Y.T @ fn.coeffs  # the target itself, whitened; Gram norm = 2-norm

    # Two stopping rules: the a-posteriori bound ||res||/A <= tol * ||v||
    # certifies the error directly; failing that, `bound` iterations certify
    # it through the contraction factor (error shrinks by (B-A)/(B+A) per
    # step from a relative starting error of exactly 1).
    v = np.zeros_like(data)
    step = 2.0 / (A + B)
    trace = []
    iterations = 0
    converged = False
    for iterations in range(max_iterations + 1):
        res = data - wf.T @ v
        res_norm = float(np.linalg.norm(res))
        trace.append(res_norm)
        if res_norm <= tol * A * float(np.linalg.norm(v)) or iterations >= bound:
            converged = True
            break
        if iterations == max_iterations:
            break
        v = v + step * res
    if not converged:
        tail = ", ".join(f"{x:.3e}" for x in trace[-8:])
        raise NumericError(
            f"frame algorithm did not converge in {max_iterations} iterations "
            f"(contraction bound {bound}); trailing residual norms: [{tail}]"
        )

    f_norm = float(np.linalg.norm(f_tilde))
    rel_error = float(np.linalg.norm(v - f_tilde)) / f_norm if f_norm > 0.0 else 0.0
    data_norm = float(np.linalg.norm(data))
    result = BandFunction(fn.dim, fn.L, fn.l_min, fn.centers, wf.X @ v)
    report = ReconstructionReport(
        rel_error=rel_error,
        residual=trace[-1] / data_norm if data_norm > 0.0 else 0.0,
        iterations=iterations,
        iteration_bound=bound,
        A_hat=A,
        B_hat=B,
        converged=converged,
    )
    return result, report
