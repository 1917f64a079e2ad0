"""Simplex and line quadrature engines."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twovortex.quadrature import (
    MAX_DIM,
    QuadratureSpec,
    SimplexDomain,
    SimplexNonconvergenceError,
    _graded_edges,
    integrate_line,
    integrate_simplex,
)

SPEC = QuadratureSpec()


def _ones(t):
    return np.ones(t.shape[1])


# ------------------------------------------------------------- volumes

@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_simplex_volume(dim):
    # vol{t_0..t_dim > 0, sum t = T} = T^dim / dim!
    total = 1.7
    value, err = integrate_simplex(_ones, SimplexDomain(dim, total), SPEC)
    np.testing.assert_allclose(value, total**dim / math.factorial(dim),
                               rtol=1e-12)
    assert err <= max(SPEC.abs_tol, SPEC.rel_tol * abs(value))


plan_strategy = st.one_of(
    st.tuples(st.floats(0.05, 0.95), st.floats(1e-3, 10.0)),
    st.tuples(st.floats(0.05, 0.95), st.floats(1e-3, 10.0),
              st.floats(1e-6, 0.3), st.floats(1e-6, 0.3)),
)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.floats(0.1, 4.0), plan_strategy)
def test_last_axis_plans_preserve_measure(dim, total, plan):
    """The sinh stretch and layer-graded tails only move nodes around;
    they must not change what the rule integrates."""
    value, _ = integrate_simplex(_ones, SimplexDomain(dim, total), SPEC,
                                 last_axis=plan)
    np.testing.assert_allclose(value, total**dim / math.factorial(dim),
                               rtol=1e-10)


def test_polynomial_moments():
    # Dirichlet integrals: int t0 t1 = T^3/6 (dim 1), int t0 t1 t2 = T^5/120
    total = 0.8
    v1, _ = integrate_simplex(lambda t: t[0] * t[1],
                              SimplexDomain(1, total), SPEC)
    np.testing.assert_allclose(v1, total**3 / 6.0, rtol=1e-13)
    v2, _ = integrate_simplex(lambda t: t[0] * t[1] * t[2],
                              SimplexDomain(2, total), SPEC)
    np.testing.assert_allclose(v2, total**5 / 120.0, rtol=1e-13)


def test_error_estimate_honest_on_smooth_integrand():
    # int_0^T e^{t0} (T - t0) dt0 = e^T - T - 1
    total = 2.0
    exact = math.exp(total) - total - 1.0
    value, err = integrate_simplex(lambda t: np.exp(t[0]) * t[1],
                                   SimplexDomain(1, total), SPEC)
    assert abs(value - exact) <= max(err, 5e-13)


def _first_passage(a, t):
    """Density of the first time Brownian motion (variance 2t) reaches a."""
    return a / math.sqrt(4.0 * math.pi) * t**-1.5 * np.exp(-a * a / (4.0 * t))


def test_first_passage_convolution_identity():
    """First-passage densities form a semigroup under convolution in the
    barrier height: g_a * g_b = g_{a+b}.  The integrand has the same
    essential-singularity boundary layers exp(-a^2/4t) t^{-3/2} as the
    per-leg kernel factors, so this is the realistic convergence oracle."""
    a, b, total = 1.0, 0.6, 2.0
    f = lambda t: _first_passage(a, t[0]) * _first_passage(b, t[1])
    exact = float(_first_passage(a + b, np.asarray(total)))
    value, err = integrate_simplex(f, SimplexDomain(1, total),
                                   QuadratureSpec(rel_tol=1e-9, abs_tol=1e-14,
                                                  max_subdivisions=10))
    np.testing.assert_allclose(value, exact, rtol=1e-10)


def test_first_passage_identity_with_thin_layer_plan():
    # a = 0.1 puts the left boundary layer at a^2/(4T) = 1.25e-3, thinner
    # than the default dyadic grading reaches; the last-axis layer entries
    # must grade the tail panels deep enough to resolve it
    a, b, total = 0.1, 0.6, 2.0
    f = lambda t: _first_passage(a, t[0]) * _first_passage(b, t[1])
    exact = float(_first_passage(a + b, np.asarray(total)))
    plan = (0.5, 10.0, a * a / (4.0 * total), b * b / (4.0 * total))
    value, err = integrate_simplex(f, SimplexDomain(1, total),
                                   QuadratureSpec(rel_tol=1e-8, abs_tol=1e-14,
                                                  max_subdivisions=10),
                                   last_axis=plan)
    np.testing.assert_allclose(value, exact, rtol=1e-9)


# -------------------------------------------------------- failure modes

def test_nonconvergence_carries_partial_result():
    # a bare 1/sqrt edge (no short-time suppression) converges like
    # 2^(-level/2), far too slowly for a two-level budget at tight tolerance
    spec = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-300, max_subdivisions=2)
    with pytest.raises(SimplexNonconvergenceError) as exc_info:
        integrate_simplex(lambda t: 1.0 / np.sqrt(t[0] * t[1]),
                          SimplexDomain(1, 1.0), spec)
    exc = exc_info.value
    assert 2.8 < exc.value.real < 3.2  # partial estimate of pi
    assert exc.err_est > 0.1


def test_spec_and_domain_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=-1e-12)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)
    with pytest.raises(ValueError):
        QuadratureSpec(points_per_panel=1)
    with pytest.raises(ValueError):
        SimplexDomain(0, 1.0)
    with pytest.raises(ValueError):
        SimplexDomain(MAX_DIM + 1, 1.0)
    with pytest.raises(ValueError):
        SimplexDomain(2, 0.0)
    with pytest.raises(ValueError):
        SimplexDomain(2, math.inf)


# ----------------------------------------------------------- panel edges

def test_graded_edges_partition_unit_interval():
    for level in range(6):
        edges = _graded_edges(level)
        assert edges[0] == 0.0 and edges[-1] == 1.0
        assert np.all(np.diff(edges) > 0.0)
    assert list(_graded_edges(0)) == [0.0, 1.0]


def test_graded_edges_depth_cap_and_tails():
    edges = _graded_edges(100)
    assert edges[1] == 2.0**-48  # depth saturates
    # extra grading deepens only the requested endpoint
    e = _graded_edges(3, extra0=5)
    assert e[1] == 2.0**-8
    assert 1.0 - e[-2] == 2.0**-3
    e = _graded_edges(3, extra1=5)
    assert e[1] == 2.0**-3
    np.testing.assert_allclose(1.0 - e[-2], 2.0**-8)


# ---------------------------------------------------------- line integral

def test_line_integral_gaussian():
    value, err = integrate_line(lambda x: np.exp(-x * x) + 0.0j, 8.0, SPEC)
    np.testing.assert_allclose(value, math.sqrt(math.pi), rtol=1e-12)
    assert err < 1e-6


def test_line_integral_tail_warning():
    # a non-decaying integrand cannot be truncated honestly
    with pytest.warns(UserWarning, match="tail"):
        value, err = integrate_line(lambda x: 1.0 + 0.0j, 1.0, SPEC)
    np.testing.assert_allclose(value, 2.0, rtol=1e-12)
    assert err > 1.0


def test_line_integral_validation():
    with pytest.raises(ValueError):
        integrate_line(lambda x: 0.0j, 0.0, SPEC)
    with pytest.raises(ValueError):
        integrate_line(lambda x: 0.0j, math.inf, SPEC)
