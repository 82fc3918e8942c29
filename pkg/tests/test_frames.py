"""Semi-continuous bounds, discrete frame audits, reconstruction.

The eigenvalue route gives exact bounds on the span of the kernel centers;
random frame quotients must respect them, and the Monte-Carlo brackets must
lie inside.  The semiframe profile is a Riemann sum of the admissibility
integral, so refining the scale sequence drives it to 1.
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from sphframes.errors import (
    ConfigurationError,
    DegenerateInputError,
    NumericError,
)
from sphframes.families import make_family
from sphframes.frames import (
    BandFunction,
    FrameReport,
    analysis_coeff,
    band_dimension,
    band_kernel,
    frame_bounds_eig,
    frame_bounds_mc,
    frame_quotient,
    gram_matrix,
    make_scales,
    random_band_function,
    reconstruct,
    semiframe_bounds,
)
from sphframes.special import Dimension, gauss_jacobi
from sphframes.sphere import build_phase_grid, sample_uniform

D2 = Dimension(2)
FAM = make_family("poisson", D2, m=2)


@pytest.fixture(scope="module")
def grid():
    scales = make_scales("geometric", b0=1.0, q=0.8, J=8)
    return build_phase_grid(D2, scales, 2, measure_profile="fast")


# ---------------------------------------------------------------------------
# band functions


def test_band_dimension_counts_harmonics():
    # sum of 2l+1 for l = 1..10
    assert band_dimension(D2, 10, 1) == 120
    assert band_dimension(D2, 10, 0) == 121
    assert band_dimension(Dimension(3), 3, 1) == 4 + 9 + 16


def test_band_function_validation():
    z = sample_uniform(D2, 5, 1)
    c = np.ones(5)
    with pytest.raises(ConfigurationError):
        BandFunction(D2, 4, 5, z, c)  # l_min > L
    with pytest.raises(ConfigurationError):
        BandFunction(D2, 4, 1, z, np.ones(4))  # shape mismatch


def test_gram_matrix_is_kernel_of_center_angles():
    fn = random_band_function(D2, 6, 10, np.random.default_rng(2))
    G = gram_matrix(fn)
    direct = band_kernel(D2, 6, 1, np.clip(fn.centers @ fn.centers.T, -1.0, 1.0))
    assert_allclose(G, direct, rtol=1e-12)
    evals = np.linalg.eigvalsh(G)
    assert evals.min() > -1e-8 * evals.max()  # PSD up to roundoff


def test_norm_sq_matches_surface_quadrature():
    # Sigma_n * norm_sq equals the L^2(sigma) integral of fn^2, computed by a
    # product rule: Gauss-Legendre in cos(theta) x uniform trapezoid in phi
    fn = random_band_function(D2, 8, 20, np.random.default_rng(42))
    rule = gauss_jacobi(32, 0.5)
    M = 64
    phis = np.arange(M) * (2.0 * math.pi / M)
    t = rule.nodes
    st = np.sqrt(1.0 - t**2)
    pts = np.stack(
        [
            np.outer(st, np.cos(phis)),
            np.outer(st, np.sin(phis)),
            np.broadcast_to(t[:, None], (t.size, M)),
        ],
        axis=-1,
    )
    vals = fn(pts.reshape(-1, 3)).reshape(t.size, M) ** 2
    integral = float(rule.weights @ vals.sum(axis=1)) * (2.0 * math.pi / M)
    # exact for this band/quadrature pairing, so only roundoff remains
    assert_allclose(integral, D2.sigma * fn.norm_sq, rtol=1e-9)


# ---------------------------------------------------------------------------
# semi-continuous bounds


def test_semiframe_profile_tends_to_one_under_refinement():
    # refining both ends of the scale sequence shrinks |S - 1| (down to
    # roundoff, where the comparison saturates)
    ladder = [(5.0, 0.7, 25), (10.0, 0.85, 100), (20.0, 0.95, 280)]
    for l in (1, 7, 50):
        errs = []
        for b0, q, J in ladder:
            sb = semiframe_bounds(FAM, make_scales("geometric", b0=b0, q=q, J=J), (l, l))
            errs.append(abs(sb.A - 1.0))
        for coarse, fine in zip(errs, errs[1:]):
            assert fine <= coarse or fine < 1e-12


def test_semiframe_single_scale_is_far_from_tight():
    sb = semiframe_bounds(FAM, make_scales("geometric", b0=2.0, q=0.5, J=1), (1, 50))
    assert sb.B / sb.A > 100.0


def test_semiframe_respects_zero_mean_floor():
    with pytest.raises(ConfigurationError):
        semiframe_bounds(FAM, make_scales("geometric", b0=1.0, q=0.9, J=5), (0, 10))


def test_semiframe_profile_shape():
    sb = semiframe_bounds(FAM, make_scales("geometric", b0=10.0, q=0.9, J=100), (1, 30))
    assert sb.ls.shape == sb.profile.shape == (30,)
    assert sb.A <= sb.profile.min() + 1e-15
    assert sb.B >= sb.profile.max() - 1e-15


# ---------------------------------------------------------------------------
# discrete quotients and bounds


def test_quotient_homogeneity_and_rotation_invariance(grid):
    z = sample_uniform(D2, 40, np.random.default_rng(5))
    cf = np.random.default_rng(6).standard_normal(40)
    fn = BandFunction(D2, 6, 1, z, cf)
    q0 = frame_quotient(FAM, grid, fn)
    q_scaled = frame_quotient(FAM, grid, BandFunction(D2, 6, 1, z, -2.5 * cf))
    assert_allclose(q_scaled, q0, rtol=1e-10)

    R, _ = np.linalg.qr(np.random.default_rng(7).standard_normal((3, 3)))
    grid_rot = replace(grid, y=np.ascontiguousarray(grid.y @ R.T))
    fn_rot = BandFunction(D2, 6, 1, z @ R.T, cf)
    assert_allclose(frame_quotient(FAM, grid_rot, fn_rot), q0, rtol=1e-10)


def test_quotient_rejects_degenerate_function(grid):
    z = sample_uniform(D2, 4, 1)
    with pytest.raises(DegenerateInputError):
        frame_quotient(FAM, grid, BandFunction(D2, 5, 1, z, np.zeros(4)))


def test_eig_bounds_dominate_random_quotients(grid):
    L = 6
    n_centers = band_dimension(D2, L, 1) + 12
    rep = frame_bounds_eig(FAM, grid, L, n_centers, seed=3)
    assert 0.0 < rep.A_hat < rep.B_hat
    assert rep.retained == band_dimension(D2, L, 1)  # centers span the band
    # regression pins: the whole computation is seeded and deterministic
    assert_allclose(rep.A_hat, 2.329742, rtol=1e-4)
    assert_allclose(rep.B_hat, 15.151371, rtol=1e-4)

    z = sample_uniform(D2, n_centers, np.random.default_rng(3))
    rng = np.random.default_rng(8)
    qs = np.array([
        frame_quotient(FAM, grid, BandFunction(D2, L, 1, z, rng.standard_normal(n_centers)))
        for _ in range(1000)
    ])
    slack = 1e-9 * rep.B_hat
    assert qs.min() >= rep.A_hat - slack
    assert qs.max() <= rep.B_hat + slack


def test_eig_accepts_explicit_centers_and_warns_when_few(grid):
    z = sample_uniform(D2, 10, np.random.default_rng(0))
    with pytest.warns(UserWarning, match="subspace"):
        rep = frame_bounds_eig(FAM, grid, 6, z)
    assert rep.centers == 10
    assert rep.A_hat <= rep.B_hat


def test_mc_brackets_inside_eig(grid):
    L = 6
    eig = frame_bounds_eig(FAM, grid, L, band_dimension(D2, L, 1) + 12, seed=3)
    mc = frame_bounds_mc(FAM, grid, L, trials=20, seed=11)
    assert eig.A_hat <= mc.A_hat <= mc.B_hat <= eig.B_hat
    assert mc.trials == 20


def test_analysis_coeff_matches_quotient_route(grid):
    fn = random_band_function(D2, 5, 8, np.random.default_rng(9))
    b0 = float(grid.b[0])
    direct = analysis_coeff(FAM, b0, grid.y[0], fn)
    # same number through the quotient definition on a single-point grid
    single = replace(
        grid, b=grid.b[:1], y=grid.y[:1], mu=grid.mu[:1], cell=grid.cell[:1]
    )
    q = frame_quotient(FAM, single, fn)
    nu0 = float(grid.scales.nu[np.argmin(np.abs(grid.scales.scales - b0))])
    expect = FAM.frame_constant * nu0 * float(grid.mu[0]) * direct**2 / fn.norm_sq
    assert_allclose(q, expect, rtol=1e-12)


# ---------------------------------------------------------------------------
# reconstruction


def test_reconstruction_certified(grid):
    target = random_band_function(D2, 6, 30, np.random.default_rng(12))
    rec, rep = reconstruct(FAM, grid, 6, target, tol=1e-8)
    assert rep.converged
    assert rep.rel_error <= 1e-8
    assert rep.iterations <= rep.iteration_bound
    # recovered function agrees pointwise with the target
    probes = sample_uniform(D2, 50, np.random.default_rng(13))
    scale = float(np.abs(target(probes)).max())
    assert np.abs(rec(probes) - target(probes)).max() <= 1e-6 * scale


def test_reconstruction_zero_target(grid):
    z = sample_uniform(D2, 5, 2)
    fn = BandFunction(D2, 5, 1, z, np.zeros(5))
    rec, rep = reconstruct(FAM, grid, 5, fn)
    assert rep.iterations == 0
    assert rep.converged
    assert rep.rel_error == 0.0


def test_reconstruction_iteration_cap_raises(grid):
    target = random_band_function(D2, 6, 30, np.random.default_rng(12))
    with pytest.raises(NumericError):
        reconstruct(FAM, grid, 6, target, tol=1e-10, max_iterations=1)


def test_reconstruction_rejects_bad_tol(grid):
    target = random_band_function(D2, 5, 5, np.random.default_rng(1))
    with pytest.raises(ConfigurationError):
        reconstruct(FAM, grid, 5, target, tol=0.0)
    with pytest.raises(ConfigurationError):
        reconstruct(FAM, grid, 5, target, tol=1.5)


def test_frame_report_orders_bounds(grid):
    rep = frame_bounds_mc(FAM, grid, 5, trials=5, seed=0)
    assert 0.0 <= rep.A_hat <= rep.B_hat
    assert rep.method == "mc"
    assert rep.grid_points == len(grid)
    with pytest.raises(NumericError):
        FrameReport(
            family="poisson(2)",
            method="mc",
            L=3,
            l_min=1,
            A_hat=2.0,
            B_hat=1.0,
            seed=0,
            centers=4,
            grid_points=10,
        )
