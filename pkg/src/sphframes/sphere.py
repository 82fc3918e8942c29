"""Geometry of S^n and of the unit ball.

Points on the sphere are plain unit vectors in R^(n+1) (shape (n+1,) arrays,
or (P, n+1) for batches).  The module provides uniform sampling, the
cube-projection partition (facets of the inscribed cube subdivided into
2^(nk) sub-cubes and projected centrally), phase-space grids over a scale
sequence with one point and one measure weight per cell, and the hyperbolic
metric on the ball used to audit grid density.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, DomainError
from .scales import ScaleSequence
from .special import Dimension

__all__ = [
    "geodesic_distance",
    "sample_uniform",
    "ehat",
    "Partition",
    "build_partition",
    "locate_cell",
    "locate_cells",
    "cell_center",
    "cell_measure",
    "all_cell_measures",
    "sample_in_cell",
    "CellMeasure",
    "PhaseSpaceGrid",
    "build_phase_grid",
    "write_grid",
    "read_grid",
    "BallPoint",
    "hyperbolic_distance",
    "HyperbolicDistance",
    "density_check",
    "DensityReport",
]

_CELL_CAP = 5_000_000
_MEASURE_TARGETS = {"fast": 1e-2, "default": 1e-3}


def geodesic_distance(x, y) -> float:
    """Angle arccos(x . y) between two unit vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.arccos(np.clip(np.dot(x, y), -1.0, 1.0)))


def ehat(dim: Dimension) -> np.ndarray:
    """The distinguished pole (1, 0, ..., 0)."""
    e = np.zeros(dim.n + 1)
    e[0] = 1.0
    return e


def sample_uniform(dim: Dimension, count: int, seed) -> np.ndarray:
    """count i.i.d. uniform points on S^n, deterministic given the seed.

    Standard Gaussian vectors normalized to unit length; accepts a seed or
    an existing numpy Generator.
    """
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = rng.standard_normal((count, dim.n + 1))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# cube-projection partition


class CellMeasure(NamedTuple):
    value: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class Partition:
    """Central projection of the subdivided inscribed-cube boundary.

    The cube inscribed in S^n has half-side c = 1/sqrt(n+1) and 2(n+1)
    facets; each facet is split into m^n sub-cubes with m = 2^k.  Cell ids
    enumerate facet-major, then row-major over the free axes in ascending
    order: id = facet * m^n + sum_i idx_i * m^(n-1-i), with facet = 2*axis
    for the positive side and 2*axis + 1 for the negative side.
    """

    dim: Dimension
    k: int
    _measures: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def m(self) -> int:
        """Sub-divisions per facet axis, 2^k."""
        return 2**self.k

    @property
    def c(self) -> float:
        """Half-side of the inscribed cube, 1/sqrt(n+1)."""
        return 1.0 / math.sqrt(self.dim.n + 1)

    @property
    def cells_per_facet(self) -> int:
        return self.m**self.dim.n

    @property
    def cell_count(self) -> int:
        return 2 * (self.dim.n + 1) * self.cells_per_facet

    @property
    def diameter_bound(self) -> float:
        """Nominal per-cell geodesic diameter bound arctan(sqrt(n)/2^(k-1)).

        This is the bound the partition construction is quoted with and the
        value used for grid typing.  Sampled cell diameters can exceed it
        (the corner-to-corner distance of a projected sub-cube is larger);
        the coarser bound 2*arctan(sqrt(n)/2^k) does hold empirically, see
        ``diameter_bound_safe``.
        """
        return math.atan(math.sqrt(self.dim.n) / 2.0 ** (self.k - 1))

    @property
    def diameter_bound_safe(self) -> float:
        """Empirically valid diameter bound 2*arctan(sqrt(n)/2^k)."""
        return 2.0 * math.atan(math.sqrt(self.dim.n) / 2.0**self.k)

    @property
    def inradius_bound(self) -> float:
        """Nominal inscribed-ball radius, diameter_bound / (2 sqrt(n(n+1)))."""
        n = self.dim.n
        return self.diameter_bound / (2.0 * math.sqrt(n * (n + 1)))

    def facet_of(self, cid: int) -> int:
        self._check_cid(cid)
        return cid // self.cells_per_facet

    def multi_index(self, cid: int) -> tuple:
        """Row-major sub-cube index along the facet's free axes."""
        self._check_cid(cid)
        rem = cid % self.cells_per_facet
        out = []
        for i in range(self.dim.n):
            p = self.m ** (self.dim.n - 1 - i)
            out.append(rem // p)
            rem %= p
        return tuple(out)

    def _check_cid(self, cid: int) -> None:
        if not 0 <= cid < self.cell_count:
            raise ConfigurationError(f"cell id {cid} out of range [0, {self.cell_count})")

    def _free_axes(self, facet: int):
        axis = facet // 2
        return axis, [i for i in range(self.dim.n + 1) if i != axis]

    def _bounds(self, cid: int):
        """(low, high) corners of the sub-cube in facet coordinates."""
        idx = np.array(self.multi_index(cid), dtype=np.float64)
        step = 2.0 * self.c / self.m
        low = -self.c + idx * step
        return low, low + step

    def _embed(self, facet: int, free_vals: np.ndarray) -> np.ndarray:
        """Lift free-axis coordinates onto the facet hyperplane in R^(n+1)."""
        axis, free = self._free_axes(facet)
        sign = 1.0 if facet % 2 == 0 else -1.0
        out = np.empty(free_vals.shape[:-1] + (self.dim.n + 1,))
        out[..., axis] = sign * self.c
        for j, ax in enumerate(free):
            out[..., ax] = free_vals[..., j]
        return out

    def orbit_key(self, cid: int) -> tuple:
        """Symmetry-class key of a cell under the cube's isometries.

        Cells whose sub-cube center offsets agree up to permutations and
        sign flips of the free axes (and across facets) are congruent, so
        they share one measure.  The key is the sorted tuple of odd integers
        |2 idx + 1 - m|.
        """
        idx = self.multi_index(cid)
        return tuple(sorted(abs(2 * i + 1 - self.m) for i in idx))


def build_partition(dim: Dimension, k: int) -> Partition:
    if int(k) != k or k < 0:
        raise ConfigurationError(f"partition level k must be an integer >= 0, got {k!r}")
    k = int(k)
    count = 2 * (dim.n + 1) * (2**k) ** dim.n
    if count > _CELL_CAP:
        raise ConfigurationError(
            f"partition would have {count} cells (cap {_CELL_CAP}); reduce k"
        )
    return Partition(dim, k)


def locate_cells(p: Partition, x: np.ndarray) -> np.ndarray:
    """Cell ids of an array of points, shape (P, n+1) -> (P,).

    The dominant coordinate picks the facet (ties resolve to the lowest
    facet index via first-occurrence argmax); the point is scaled onto the
    facet hyperplane and binned along the free axes, with bin boundaries
    assigned to the lower (lexicographically smaller) cell.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != p.dim.n + 1:
        raise ConfigurationError(f"points must have {p.dim.n + 1} coordinates")
    m, c = p.m, p.c
    absx = np.abs(x)
    axis = np.argmax(absx, axis=1)
    dom = x[np.arange(x.shape[0]), axis]
    facet = 2 * axis + (dom < 0)
    scale = c / np.abs(dom)
    out = np.empty(x.shape[0], dtype=np.int64)
    for ax in range(p.dim.n + 1):
        rows = np.nonzero(axis == ax)[0]
        if rows.size == 0:
            continue
        free = [i for i in range(p.dim.n + 1) if i != ax]
        v = x[rows][:, free] * scale[rows, None]
        unorm = (v + c) / (2.0 * c) * m
        idx = np.clip(np.ceil(unorm) - 1.0, 0, m - 1).astype(np.int64)
        powers = m ** np.arange(p.dim.n - 1, -1, -1, dtype=np.int64)
        out[rows] = facet[rows] * p.cells_per_facet + idx @ powers
    return out


def locate_cell(p: Partition, x) -> int:
    """Cell id containing a single point."""
    return int(locate_cells(p, np.asarray(x, dtype=np.float64)[None, :])[0])


def cell_center(p: Partition, cid: int) -> np.ndarray:
    """Central projection of the sub-cube center (a unit vector)."""
    low, high = p._bounds(cid)
    v = p._embed(p.facet_of(cid), 0.5 * (low + high))
    return v / np.linalg.norm(v)


def sample_in_cell(p: Partition, cid: int, count: int, rng) -> np.ndarray:
    """Points of the cell: uniform draws over the sub-cube, projected.

    Uniform with respect to the flat sub-cube measure, not to sigma; every
    returned point lies in the cell by construction.
    """
    low, high = p._bounds(cid)
    v = rng.uniform(low, high, size=(count, p.dim.n))
    emb = p._embed(p.facet_of(cid), v)
    return emb / np.linalg.norm(emb, axis=1, keepdims=True)


def cell_measure(p: Partition, cid: int, profile: str = "default") -> CellMeasure:
    """sigma-measure of one cell by seeded Monte Carlo.

    The central projection of the facet onto the sphere has Jacobian
    c / |v|^(n+1) at the facet point v, so sigma(cell) is the sub-cube
    volume times the mean of that Jacobian over uniform draws.  Sampling
    continues until the standard error is below the profile's relative
    target (fast: 1e-2, default: 1e-3).  Congruent cells (same orbit under
    the cube symmetries) share a cached value; seeds derive from (n, k,
    orbit key, profile), not from call order.
    """
    if profile not in _MEASURE_TARGETS:
        raise ConfigurationError(f"unknown precision profile {profile!r}")
    key = p.orbit_key(cid)
    cached = p._measures.get((key, profile))
    if cached is not None:
        return cached
    target = _MEASURE_TARGETS[profile]
    n, m, c = p.dim.n, p.m, p.c
    half = c / m
    center = np.array(key, dtype=np.float64) * half  # representative sub-cube
    seed = np.random.SeedSequence((n, p.k, 0 if profile == "default" else 1) + key)
    rng = np.random.default_rng(seed)
    vol = (2.0 * half) ** n
    total = 0.0
    total_sq = 0.0
    count = 0
    batch = 8192
    while True:
        v = rng.uniform(center - half, center + half, size=(batch, n))
        f = c * (c * c + (v * v).sum(axis=1)) ** (-0.5 * (n + 1))
        total += f.sum()
        total_sq += (f * f).sum()
        count += batch
        mean = total / count
        var = max(total_sq / count - mean * mean, 0.0)
        stderr = math.sqrt(var / count)
        if stderr <= target * mean or count >= 2**22:
            break
    result = CellMeasure(vol * mean, vol * stderr, count)
    p._measures[(key, profile)] = result
    return result


def all_cell_measures(p: Partition, profile: str = "default") -> np.ndarray:
    """Measures of every cell (cell-id order), one MC run per orbit."""
    return np.array([cell_measure(p, cid, profile).value for cid in range(p.cell_count)])


# ---------------------------------------------------------------------------
# phase-space grids


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Discrete (scale, position) grid with per-point measure weights."""

    dim: Dimension
    scales: ScaleSequence
    b: np.ndarray
    y: np.ndarray
    mu: np.ndarray
    cell: np.ndarray
    meta: dict

    def __len__(self) -> int:
        return self.b.size

    @property
    def delta(self) -> float:
        return self.meta["delta"]

    @property
    def xi(self) -> float:
        return self.meta["xi"]


def build_phase_grid(
    dim: Dimension,
    scales: ScaleSequence,
    k,
    placement: str = "center",
    seed: int = 0,
    jitter_fraction: float = 0.5,
    declared_xi: float | None = None,
    measure_profile: str = "default",
) -> PhaseSpaceGrid:
    """One grid point per (scale, partition cell), weighted by cell measure.

    ``k`` is the partition level, either a single int for all scales or a
    sequence with one level per scale.  Placements: "center" projects the
    sub-cube centers (deterministic, seed ignored); "random" draws uniform
    points in each sub-cube; "jitter" displaces the centers by
    jitter_fraction of the half-width.  Every placement keeps each point
    inside its cell, so the grid is always of the constructed type.

    The grid's type constants are recorded in ``meta``: delta is the largest
    scale ratio and xi the largest diameter-bound/scale quotient.  If
    ``declared_xi`` is given, the built grid must satisfy it and the
    declared cap must be meaningful (declared_xi * b_j <= pi at every
    scale); violations raise ConfigurationError.
    """
    J = len(scales)
    if isinstance(k, (int, np.integer)):
        ks = [int(k)] * J
    else:
        ks = [int(v) for v in k]
        if len(ks) != J:
            raise ConfigurationError(f"need one partition level per scale ({J}), got {len(ks)}")
    if placement not in ("center", "random", "jitter"):
        raise ConfigurationError(f"unknown placement {placement!r}")
    if not 0.0 <= jitter_fraction <= 1.0:
        raise ConfigurationError(f"jitter_fraction must lie in [0, 1], got {jitter_fraction}")

    parts = {}
    for lvl in ks:
        if lvl not in parts:
            parts[lvl] = build_partition(dim, lvl)

    b_list, y_list, mu_list, cell_list = [], [], [], []
    for j in range(J):
        part = parts[ks[j]]
        bj = float(scales.scales[j])
        measures = all_cell_measures(part, measure_profile)
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), j)))
        for cid in range(part.cell_count):
            if placement == "center":
                y = cell_center(part, cid)
            elif placement == "random":
                y = sample_in_cell(part, cid, 1, rng)[0]
            else:
                low, high = part._bounds(cid)
                mid = 0.5 * (low + high)
                half = 0.5 * (high - low)
                v = mid + jitter_fraction * rng.uniform(-1.0, 1.0, dim.n) * half
                emb = part._embed(part.facet_of(cid), v)
                y = emb / np.linalg.norm(emb)
            b_list.append(bj)
            y_list.append(y)
            mu_list.append(measures[cid])
            cell_list.append(cid)

    xi = max(parts[ks[j]].diameter_bound / float(scales.scales[j]) for j in range(J))
    delta = scales.delta_hi
    if declared_xi is not None:
        if xi > declared_xi:
            raise ConfigurationError(
                f"built grid has xi={xi:.6g}, above the declared bound {declared_xi:.6g}"
            )
        bad = [float(bj) for bj in scales.scales if declared_xi * float(bj) > math.pi]
        if bad:
            raise ConfigurationError(
                f"declared xi={declared_xi:.6g} is vacuous at scales {bad} (xi * b > pi)"
            )
    meta = {
        "k": ks[0] if all(v == ks[0] for v in ks) else ks,
        "placement": placement,
        "seed": int(seed),
        "delta": float(delta),
        "xi": float(xi),
    }
    if declared_xi is not None:
        meta["declared_xi"] = float(declared_xi)
    return PhaseSpaceGrid(
        dim=dim,
        scales=scales,
        b=np.array(b_list),
        y=np.array(y_list),
        mu=np.array(mu_list),
        cell=np.array(cell_list, dtype=np.int64),
        meta=meta,
    )


def write_grid(grid: PhaseSpaceGrid, path) -> None:
    """Serialize a grid to JSON (deterministic bytes for identical grids)."""
    points = [
        {
            "b": float(grid.b[i]),
            "y": [float(v) for v in grid.y[i]],
            "mu": float(grid.mu[i]),
            "cell": int(grid.cell[i]),
        }
        for i in range(len(grid))
    ]
    meta = {key: grid.meta[key] for key in ("k", "placement", "seed", "delta", "xi")}
    if "declared_xi" in grid.meta:
        meta["declared_xi"] = grid.meta["declared_xi"]
    obj = {
        "n": grid.dim.n,
        "scales": [float(v) for v in grid.scales.scales],
        "nu": [float(v) for v in grid.scales.nu],
        "points": points,
        "meta": meta,
    }
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def read_grid(path) -> PhaseSpaceGrid:
    """Load a grid written by :func:`write_grid`."""
    obj = json.loads(Path(path).read_text())
    dim = Dimension(int(obj["n"]))
    scales_arr = np.array(obj["scales"], dtype=np.float64)
    nu = np.array(obj["nu"], dtype=np.float64)
    seq = ScaleSequence(
        scales=scales_arr,
        nu=nu,
        closing_ratio=float(math.exp(nu[-1])),
        single_scale=scales_arr.size == 1,
        kind="explicit",
    )
    pts = obj["points"]
    return PhaseSpaceGrid(
        dim=dim,
        scales=seq,
        b=np.array([p["b"] for p in pts]),
        y=np.array([p["y"] for p in pts]),
        mu=np.array([p["mu"] for p in pts]),
        cell=np.array([p["cell"] for p in pts], dtype=np.int64),
        meta=obj["meta"],
    )


# ---------------------------------------------------------------------------
# hyperbolic ball metric


@dataclass(frozen=True)
class BallPoint:
    """Point of the open unit ball: radius r in [0, 1) and a unit direction."""

    r: float
    direction: np.ndarray

    def __post_init__(self) -> None:
        if not 0.0 <= self.r < 1.0:
            raise DomainError(f"ball radius must lie in [0, 1), got {self.r}")

    @property
    def u(self) -> float:
        """Radial coordinate u = log((1+r)/(1-r)); du is the radial metric."""
        return math.log((1.0 + self.r) / (1.0 - self.r))


class HyperbolicDistance(NamedTuple):
    value: float
    delta: float
    converged: bool


_GL3_NODES = np.array([0.5 - 0.5 * math.sqrt(0.6), 0.5, 0.5 + 0.5 * math.sqrt(0.6)])
_GL3_WEIGHTS = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])
_MOVES = [(0, 1), (1, 0), (1, 1), (1, -1), (1, 2), (1, -2), (2, 1), (2, -1)]


def _segment_lengths(u1, u2, dpsi, h):
    """Metric length of straight (u, psi) segments by 3-point Gauss-Legendre.

    In the radial coordinate u the metric is ds^2 = du^2 +
    h^2 (1 + cosh u)^2 dpsi^2.
    """
    u1 = np.asarray(u1, dtype=np.float64)
    u2 = np.asarray(u2, dtype=np.float64)
    dpsi = np.asarray(dpsi, dtype=np.float64)
    du = u2 - u1
    acc = 0.0
    for t, w in zip(_GL3_NODES, _GL3_WEIGHTS):
        u = u1 + t * du
        acc = acc + w * np.sqrt(du * du + (h * (1.0 + np.cosh(u)) * dpsi) ** 2)
    return acc


def _hyper_graph(u_grid: np.ndarray, psi_grid: np.ndarray, h: float):
    """Sparse edge graph on the (u, psi) lattice with graded moves.

    Nodes are indexed iu * len(psi_grid) + ipsi.  The u = 0 row is a single
    point of the ball (all directions coincide), so its angular edges get a
    negligible weight instead of the metric one.
    """
    from scipy.sparse import coo_matrix

    nu, npsi = u_grid.size, psi_grid.size
    rows, cols, weights = [], [], []
    for du_i, dpsi_i in _MOVES:
        iu = np.arange(0, nu - du_i)
        ipsi = np.arange(max(0, -dpsi_i), min(npsi, npsi - dpsi_i))
        if iu.size == 0 or ipsi.size == 0:
            continue
        IU, IP = np.meshgrid(iu, ipsi, indexing="ij")
        src = IU * npsi + IP
        dst = (IU + du_i) * npsi + (IP + dpsi_i)
        w = _segment_lengths(
            u_grid[IU], u_grid[IU + du_i], psi_grid[IP + dpsi_i] - psi_grid[IP], h
        )
        if du_i == 0 and u_grid[0] == 0.0:
            w = w.copy()
            w[IU == 0] = 1e-300  # u = 0 is one point: angular motion is free there
        rows.append(src.ravel())
        cols.append(dst.ravel())
        weights.append(np.asarray(w).ravel())
    n_nodes = nu * npsi
    return coo_matrix(
        (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_nodes, n_nodes),
    ).tocsr()


def _u_grid(u_max: float, count: int, extra) -> np.ndarray:
    base = np.linspace(0.0, u_max, count + 1)
    return np.unique(np.concatenate([base, np.asarray(extra, dtype=np.float64)]))


def hyperbolic_distance(
    p: BallPoint, q: BallPoint, h: float, resolution: int = 48, refine: bool = True
) -> HyperbolicDistance:
    """Distance in the metric (2/(1-r^2)) ||(dr, h dpsi)||.

    Reduced to the (u, psi) half-plane spanned by the two directions and
    computed as a shortest path on a graded lattice graph (an upper bound
    on the true geodesic length).  Radial pairs are exact: |u_p - u_q|.
    One refinement step (lattice density doubled) estimates convergence;
    a relative change above 1% is reported by converged=False rather than
    raised.
    """
    if h <= 0:
        raise ConfigurationError(f"angular constant h must be positive, got {h}")
    psi = geodesic_distance(p.direction, q.direction)
    if psi == 0.0:
        return HyperbolicDistance(abs(p.u - q.u), 0.0, True)
    from scipy.sparse.csgraph import dijkstra

    u_max = max(p.u, q.u)

    def solve(count):
        u_grid = _u_grid(u_max, count, [p.u, q.u])
        psi_grid = np.linspace(0.0, psi, count + 1)
        graph = _hyper_graph(u_grid, psi_grid, h)
        src = int(np.searchsorted(u_grid, p.u)) * psi_grid.size
        dst = int(np.searchsorted(u_grid, q.u)) * psi_grid.size + (psi_grid.size - 1)
        dist = dijkstra(graph, directed=False, indices=src)
        return float(dist[dst])

    coarse = solve(resolution)
    if not refine:
        return HyperbolicDistance(coarse, math.nan, True)
    fine = solve(2 * resolution)
    delta = abs(coarse - fine) / max(fine, 1e-300)
    return HyperbolicDistance(fine, delta, delta <= 0.01)


class DensityReport(NamedTuple):
    covering_radius: float
    rho: float
    passed: bool
    probes: int
    h: float
    seed: int
    worst_b: float
    worst_direction: np.ndarray


def density_check(
    grid: PhaseSpaceGrid,
    rho: float,
    h: float = 1.0,
    probes: int = 64,
    seed: int = 0,
    resolution: int = 48,
) -> DensityReport:
    """Monte-Carlo covering-radius audit of a grid in the ball metric.

    Grid points map to ball points via r = e^{-b}.  Probe centers are drawn
    with b uniform over the grid's scale range and uniform directions; for
    each probe one lattice shortest-path solve bounds the distance to every
    grid point from above (graph paths are admissible curves, and the final
    off-lattice hop to each grid point is added explicitly), so the reported
    covering radius is conservative: a pass at level rho is trustworthy, a
    marginal failure may be lattice slack.  This is a necessary check, not a
    proof of density.
    """
    if len(grid) == 0:
        raise ConfigurationError("density check needs a nonempty grid")
    if rho <= 0:
        raise ConfigurationError(f"rho must be positive, got {rho}")
    from scipy.sparse.csgraph import dijkstra

    rng = np.random.default_rng(seed)
    b_lo, b_hi = float(grid.b.min()), float(grid.b.max())
    r_grid = np.exp(-grid.b)
    u_grid_pts = np.log((1.0 + r_grid) / (1.0 - r_grid))
    probe_b = rng.uniform(b_lo, b_hi, probes)
    probe_dirs = sample_uniform(grid.dim, probes, rng)

    covering = -math.inf
    worst = (math.nan, None)
    for i in range(probes):
        r_p = math.exp(-probe_b[i])
        u_p = math.log((1.0 + r_p) / (1.0 - r_p))
        u_max = max(u_p, float(u_grid_pts.max()))
        u_lattice = _u_grid(u_max, resolution, [u_p])
        psi_lattice = np.linspace(0.0, math.pi, 2 * resolution + 1)
        graph = _hyper_graph(u_lattice, psi_lattice, h)
        src = int(np.searchsorted(u_lattice, u_p)) * psi_lattice.size
        dist = dijkstra(graph, directed=False, indices=src)

        psi_targets = np.arccos(np.clip(grid.y @ probe_dirs[i], -1.0, 1.0))
        iu = np.clip(np.searchsorted(u_lattice, u_grid_pts), 0, u_lattice.size - 1)
        ip = np.clip(np.searchsorted(psi_lattice, psi_targets), 0, psi_lattice.size - 1)
        best = np.full(len(grid), np.inf)
        for diu in (0, -1):
            for dip in (0, -1):
                ju = np.clip(iu + diu, 0, u_lattice.size - 1)
                jp = np.clip(ip + dip, 0, psi_lattice.size - 1)
                hop = _segment_lengths(
                    u_lattice[ju], u_grid_pts, psi_targets - psi_lattice[jp], h
                )
                best = np.minimum(best, dist[ju * psi_lattice.size + jp] + hop)
        nearest = float(best.min())
        if nearest > covering:
            covering = nearest
            worst = (float(probe_b[i]), probe_dirs[i])

    return DensityReport(
        covering_radius=covering,
        rho=rho,
        passed=covering <= rho,
        probes=probes,
        h=h,
        seed=int(seed),
        worst_b=worst[0],
        worst_direction=worst[1],
    )
