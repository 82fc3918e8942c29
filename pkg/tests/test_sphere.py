"""Cube-facet partitions, cell measures, phase-space grids, ball geometry."""

import json
import math
from collections import Counter

import numpy as np
import pytest
from numpy.testing import assert_allclose

from sphframes.errors import ConfigurationError, DomainError
from sphframes.frames import make_scales
from sphframes.special import Dimension
from sphframes.sphere import (
    BallPoint,
    build_partition,
    build_phase_grid,
    cell_center,
    cell_measure,
    density_check,
    geodesic_distance,
    hyperbolic_distance,
    locate_cell,
    locate_cells,
    read_grid,
    sample_in_cell,
    sample_uniform,
    write_grid,
)

D2 = Dimension(2)
D3 = Dimension(3)


# ---------------------------------------------------------------------------
# partitions


def test_partition_counts():
    p = build_partition(D2, 3)
    assert p.m == 8
    assert p.cells_per_facet == 64
    assert p.cell_count == 2 * 3 * 64
    assert build_partition(D3, 2).cell_count == 2 * 4 * 4**3


def test_partition_rejects_bad_level():
    with pytest.raises(ConfigurationError):
        build_partition(D2, -1)
    with pytest.raises(ConfigurationError):
        build_partition(D2, 1.5)


@pytest.mark.parametrize("n, k", [(2, 1), (2, 3), (3, 2)])
def test_locate_roundtrips_cell_centers(n, k):
    p = build_partition(Dimension(n), k)
    for cid in range(p.cell_count):
        assert locate_cell(p, cell_center(p, cid)) == cid


@pytest.mark.parametrize("n, k", [(2, 2), (3, 1)])
def test_locate_roundtrips_sampled_points(n, k):
    p = build_partition(Dimension(n), k)
    rng = np.random.default_rng(5)
    for cid in range(0, p.cell_count, 3):
        pts = sample_in_cell(p, cid, 40, rng)
        assert (locate_cells(p, pts) == cid).all()


def test_every_uniform_point_lands_in_exactly_one_cell():
    p = build_partition(D2, 2)
    pts = sample_uniform(D2, 500, np.random.default_rng(11))
    cids = locate_cells(p, pts)
    assert cids.min() >= 0 and cids.max() < p.cell_count


def test_cell_measure_level_zero():
    # k = 0: one cell per facet, measure Sigma_n / (2 (n+1))
    p = build_partition(D2, 0)
    m = cell_measure(p, 0)
    expect = D2.sigma / 6.0
    assert abs(m.value - expect) <= 3.0 * m.stderr
    assert_allclose(m.value, expect, rtol=5e-3)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_cell_measures_sum_to_sphere_area(n, k):
    # orbit-cached estimates are shared between cells, so the uncertainties
    # of an orbit's cells add linearly, not in quadrature
    d = Dimension(n)
    p = build_partition(d, k)
    counts = Counter(p.orbit_key(cid) for cid in range(p.cell_count))
    reps = {}
    for cid in range(p.cell_count):
        reps.setdefault(p.orbit_key(cid), cid)
    total, var = 0.0, 0.0
    for key, cnt in counts.items():
        m = cell_measure(p, reps[key])
        total += cnt * m.value
        var += (cnt * m.stderr) ** 2
    assert abs(total - d.sigma) <= 3.0 * math.sqrt(var)


def test_cell_measure_is_cached_per_orbit():
    p = build_partition(D2, 2)
    a = cell_measure(p, 0)
    b = cell_measure(p, 0)
    assert a == b
    # cells in one orbit share the estimate
    key = p.orbit_key(0)
    twin = next(c for c in range(1, p.cell_count) if p.orbit_key(c) == key)
    assert cell_measure(p, twin) == a


def test_sampled_diameters_respect_safe_bound_but_not_nominal():
    # the nominal per-cell diameter estimate arctan(sqrt(n)/2^(k-1)) is
    # violated by actual cells at k = 1 (documented); the conservative bound
    # 2 arctan(sqrt(n)/2^k) holds everywhere we sample
    for n, k in [(2, 1), (2, 2), (3, 1)]:
        p = build_partition(Dimension(n), k)
        rng = np.random.default_rng((n, k, 77))
        worst = 0.0
        for cid in range(p.cell_count):
            pts = sample_in_cell(p, cid, 96, rng)
            dots = np.clip(pts @ pts.T, -1.0, 1.0)
            worst = max(worst, float(np.arccos(dots).max()))
        assert worst <= p.diameter_bound_safe + 1e-12
        if k == 1:
            assert worst > p.diameter_bound  # the nominal bound fails here


def test_inradius_ball_escapes_cells_at_fine_levels():
    # the stated inradius underestimates how asymmetric the cells are: at
    # (n, k) = (2, 2) a ball of that radius around the center leaves some cells
    p = build_partition(D2, 2)
    rng = np.random.default_rng(88)
    escapes = 0
    for cid in range(p.cell_count):
        ctr = cell_center(p, cid)
        for _ in range(48):
            v = rng.standard_normal(D2.ambient)
            v -= (v @ ctr) * ctr
            v /= np.linalg.norm(v)
            x = math.cos(p.inradius_bound) * ctr + math.sin(p.inradius_bound) * v
            if locate_cell(p, x) != cid:
                escapes += 1
                break
    assert escapes > 0


def test_geodesic_distance_basics():
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0])
    assert_allclose(geodesic_distance(e1, e2), math.pi / 2.0, rtol=1e-14)
    assert geodesic_distance(e1, e1) == 0.0
    assert_allclose(geodesic_distance(e1, -e1), math.pi, rtol=1e-14)


def test_sample_uniform_accepts_seed_or_generator():
    a = sample_uniform(D2, 8, 42)
    b = sample_uniform(D2, 8, np.random.default_rng(42))
    assert_allclose(a, b)
    assert_allclose(np.linalg.norm(a, axis=1), 1.0, rtol=1e-12)


# ---------------------------------------------------------------------------
# phase-space grids


@pytest.fixture(scope="module")
def small_grid():
    scales = make_scales("geometric", b0=1.0, q=0.9, J=12)
    return build_phase_grid(D2, scales, 2, measure_profile="fast")


def test_grid_shape_and_weights(small_grid):
    p = build_partition(D2, 2)
    assert len(small_grid) == 12 * p.cell_count
    assert small_grid.b.shape == (len(small_grid),)
    assert small_grid.y.shape == (len(small_grid), 3)
    assert (small_grid.mu > 0).all()
    # per-scale measures sum to roughly the sphere area ("fast" profile: 1%)
    first = small_grid.b == small_grid.b.max()
    assert_allclose(small_grid.mu[first].sum(), D2.sigma, rtol=0.05)


def test_grid_type_constants(small_grid):
    assert_allclose(small_grid.delta, 1.0 / 0.9, rtol=1e-12)
    p = build_partition(D2, 2)
    b_min = 0.9**11
    assert_allclose(small_grid.xi, p.diameter_bound / b_min, rtol=1e-12)


def test_grid_placements_stay_in_cells():
    scales = make_scales("geometric", b0=1.0, q=0.8, J=3)
    p = build_partition(D2, 1)
    for placement in ("center", "random", "jitter"):
        g = build_phase_grid(D2, scales, 1, placement=placement, seed=9,
                             measure_profile="fast")
        per_scale = p.cell_count
        cids = locate_cells(p, g.y[:per_scale])
        assert sorted(cids.tolist()) == list(range(per_scale))


def test_grid_random_placement_is_seeded():
    scales = make_scales("geometric", b0=1.0, q=0.8, J=2)
    g1 = build_phase_grid(D2, scales, 1, placement="random", seed=4, measure_profile="fast")
    g2 = build_phase_grid(D2, scales, 1, placement="random", seed=4, measure_profile="fast")
    g3 = build_phase_grid(D2, scales, 1, placement="random", seed=5, measure_profile="fast")
    assert_allclose(g1.y, g2.y)
    assert not np.allclose(g1.y, g3.y)


def test_grid_per_scale_levels():
    scales = make_scales("geometric", b0=1.0, q=0.5, J=2)
    g = build_phase_grid(D2, scales, [1, 2], measure_profile="fast")
    assert len(g) == build_partition(D2, 1).cell_count + build_partition(D2, 2).cell_count
    assert g.meta["k"] == [1, 2]


def test_declared_xi_paths():
    scales = make_scales("geometric", b0=1.0, q=0.9, J=12)
    g = build_phase_grid(D2, scales, 2, declared_xi=2.5, measure_profile="fast")
    assert g.meta["declared_xi"] == 2.5
    with pytest.raises(ConfigurationError):
        # tighter than the built grid actually achieves
        build_phase_grid(D2, scales, 2, declared_xi=1.0, measure_profile="fast")
    with pytest.raises(ConfigurationError):
        # vacuous: declared_xi * b0 exceeds pi
        build_phase_grid(D2, scales, 2, declared_xi=3.5, measure_profile="fast")


def test_grid_json_roundtrip_is_byte_stable(tmp_path, small_grid):
    p1 = tmp_path / "g1.json"
    p2 = tmp_path / "g2.json"
    write_grid(small_grid, p1)
    back = read_grid(p1)
    write_grid(back, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert_allclose(back.y, small_grid.y)
    assert_allclose(back.mu, small_grid.mu)
    assert back.dim == small_grid.dim
    doc = json.loads(p1.read_text())
    assert doc["n"] == 2
    assert doc["meta"]["placement"] == "center"


def test_density_check_passes_on_regular_grid(small_grid):
    rep = density_check(small_grid, 4.0, probes=12, seed=0)
    assert rep.passed
    assert 0.0 < rep.covering_radius < 4.0
    assert rep.probes == 12


def test_density_check_validates():
    with pytest.raises(ConfigurationError):
        density_check(build_phase_grid(D2, make_scales("geometric", b0=1.0, q=0.5, J=1),
                                       0, measure_profile="fast"), -1.0)


# ---------------------------------------------------------------------------
# ball geometry


def test_ball_point_domain():
    with pytest.raises(DomainError):
        BallPoint(1.0, np.array([0.0, 0.0, 1.0]))
    assert BallPoint(0.0, np.array([0.0, 0.0, 1.0])).u == 0.0


def test_hyperbolic_radial_pair_is_exact():
    d = np.array([0.0, 0.0, 1.0])
    res = hyperbolic_distance(BallPoint(0.0, d), BallPoint(0.5, d), h=1.0)
    assert res.value == pytest.approx(math.log(3.0), rel=1e-14)
    assert res.converged


def test_hyperbolic_symmetry_and_lower_bound():
    da = np.array([0.0, 0.0, 1.0])
    db = np.array([0.0, 1.0, 0.0])
    p, q = BallPoint(0.3, da), BallPoint(0.7, db)
    ab = hyperbolic_distance(p, q, h=1.0, resolution=32)
    ba = hyperbolic_distance(q, p, h=1.0, resolution=32)
    assert_allclose(ab.value, ba.value, rtol=1e-12)
    assert ab.value >= abs(p.u - q.u) - 1e-12
    assert ab.converged


def test_hyperbolic_angular_cost_scales_with_h():
    da = np.array([0.0, 0.0, 1.0])
    db = np.array([0.0, 1.0, 0.0])
    p, q = BallPoint(0.5, da), BallPoint(0.5, db)
    lo = hyperbolic_distance(p, q, h=0.5, resolution=32).value
    hi = hyperbolic_distance(p, q, h=2.0, resolution=32).value
    assert lo < hi


def test_hyperbolic_rejects_bad_h():
    d = np.array([0.0, 0.0, 1.0])
    with pytest.raises(ConfigurationError):
        hyperbolic_distance(BallPoint(0.1, d), BallPoint(0.2, d), h=0.0)
