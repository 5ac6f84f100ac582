import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfline_ie import (
    Grid,
    Profile,
    TailModel,
    apply_sum_difference,
    apply_weighted_sum_difference,
    apply_wiener_hopf,
    build_grid,
    derivative_moment,
    make_gaussian_kernel,
)
from halfline_ie.quadrature import SCHEME_GAUSS, SCHEME_SIMPSON


def test_build_grid_endpoints(small_grid):
    assert small_grid.nodes[0] == 0.0
    assert small_grid.nodes[-1] == small_grid.x_max
    assert np.sum(small_grid.weights) == pytest.approx(small_grid.x_max, rel=1e-13)


def test_simpson_needs_odd():
    with pytest.raises(ValueError, match="odd node count"):
        build_grid(8.0, 400, SCHEME_SIMPSON)


def test_gauss_needs_4k_plus_1():
    with pytest.raises(ValueError, match="4k"):
        build_grid(8.0, 403, SCHEME_GAUSS)
    grid = build_grid(8.0, 401, SCHEME_GAUSS)
    assert grid.nodes[0] == 0.0 and grid.nodes[-1] == 8.0


def test_simpson_polynomial_exactness():
    grid = build_grid(2.0, 65)
    # composite Simpson integrates cubics exactly
    vals = grid.nodes**3
    assert float(grid.weights @ vals) == pytest.approx(4.0, rel=1e-13)


def test_gauss_polynomial_exactness():
    grid = build_grid(2.0, 65, SCHEME_GAUSS)
    # 5-point Lobatto panels integrate degree-7 polynomials exactly
    vals = grid.nodes**7
    assert float(grid.weights @ vals) == pytest.approx(2.0**8 / 8.0, rel=1e-12)


def test_operator_vanishes_at_origin(gaussian_kernel, small_grid):
    p = Profile(small_grid, np.ones(len(small_grid)))
    out = apply_sum_difference(gaussian_kernel, p, TailModel.constant(1.0))
    assert out.values[0] == 0.0


def test_operator_identity_on_linear(gaussian_kernel):
    # the conservative sum-difference operator maps t to x exactly
    grid = build_grid(12.0, 1201)
    p = Profile(grid, grid.nodes.copy())
    out = apply_sum_difference(gaussian_kernel, p, TailModel.linear(1.0, 0.0))
    cut = np.searchsorted(grid.nodes, 0.8 * grid.x_max)
    err = np.max(np.abs(out.values[:cut] - grid.nodes[:cut]))
    assert err <= 5e-6


def test_operator_positivity(gaussian_kernel, small_grid):
    rng = np.random.default_rng(7)
    vals = rng.uniform(0.0, 1.0, len(small_grid))
    out = apply_sum_difference(gaussian_kernel, Profile(small_grid, vals), TailModel.zero())
    assert np.all(out.values >= -1e-14)


def test_operator_monotonicity(gaussian_kernel, small_grid):
    rng = np.random.default_rng(11)
    lo = rng.uniform(0.0, 1.0, len(small_grid))
    hi = lo + rng.uniform(0.0, 1.0, len(small_grid))
    out_lo = apply_sum_difference(gaussian_kernel, Profile(small_grid, lo), TailModel.zero())
    out_hi = apply_sum_difference(gaussian_kernel, Profile(small_grid, hi), TailModel.zero())
    assert np.all(out_hi.values >= out_lo.values - 1e-14)


def test_weighted_operator_reduces_to_plain(gaussian_kernel, small_grid):
    vals = np.sin(small_grid.nodes) ** 2
    plain = apply_sum_difference(gaussian_kernel, Profile(small_grid, vals), TailModel.constant(vals[-1]))
    weighted = apply_weighted_sum_difference(
        gaussian_kernel, Profile(small_grid, vals), np.ones(len(small_grid)),
        TailModel.constant(vals[-1]),
    )
    assert np.allclose(plain.values, weighted.values, atol=1e-14)


def test_wiener_hopf_constant_input(gaussian_kernel, small_grid):
    # int_0^inf K(x - t) dt = 1 - tail_mass(x) -> cdf(x) for constant input 1
    out = apply_wiener_hopf(
        gaussian_kernel, Profile(small_grid, np.ones(len(small_grid))), TailModel.constant(1.0)
    )
    expected = np.array([gaussian_kernel.cdf(x) for x in small_grid.nodes])
    assert np.allclose(out.values, expected, atol=1e-9)


def test_constant_input_sum_difference(gaussian_kernel, small_grid):
    # int_0^inf (K(x-t) - K(x+t)) dt = cdf(x) - tail_mass(x) = 2*cdf(x) - 1
    out = apply_sum_difference(
        gaussian_kernel, Profile(small_grid, np.ones(len(small_grid))), TailModel.constant(1.0)
    )
    expected = np.array([2.0 * gaussian_kernel.cdf(x) - 1.0 for x in small_grid.nodes])
    assert np.allclose(out.values, expected, atol=1e-9)


def test_tail_model_constructors():
    assert TailModel.zero().kind == "zero"
    assert TailModel.constant(2.0).const == 2.0
    lin = TailModel.linear(0.5, -1.0)
    assert lin.slope == 0.5 and lin.intercept == -1.0


def test_profile_rejects_nonfinite(small_grid):
    bad = np.ones(len(small_grid))
    bad[3] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        Profile(small_grid, bad)


def test_grid_validation_rejects_bad_span():
    nodes = np.linspace(1.0, 8.0, 101)
    weights = np.full(101, 7.0 / 101)
    with pytest.raises(ValueError, match="span"):
        Grid(8.0, nodes, weights, SCHEME_SIMPSON)


def test_derivative_moment_sign(gaussian_kernel, small_grid):
    # K' < 0 on (0, inf), so the moment of a positive profile is negative
    val = derivative_moment(gaussian_kernel, small_grid, np.ones(len(small_grid)))
    assert val < 0.0


def test_workspace_cache_reuse(gaussian_kernel, small_grid):
    from halfline_ie.quadrature import _workspace

    assert _workspace(gaussian_kernel, small_grid) is _workspace(gaussian_kernel, small_grid)


@given(scale=st.floats(min_value=0.1, max_value=10.0))
@settings(max_examples=25, deadline=None)
def test_operator_homogeneity_property(scale):
    kernel = make_gaussian_kernel()
    grid = build_grid(4.0, 65)
    vals = np.sqrt(grid.nodes)
    base = apply_sum_difference(kernel, Profile(grid, vals), TailModel.constant(vals[-1]))
    scaled = apply_sum_difference(
        kernel, Profile(grid, scale * vals), TailModel.constant(scale * vals[-1])
    )
    assert np.allclose(scaled.values, scale * base.values, rtol=1e-12, atol=1e-12)
