"""Verification checks: identities, oracles, PDE/semigroup structure."""

import math

import numpy as np
import pytest

from twovortex.geometry import Flux, VortexConfig
from twovortex.kernels import EvalMode, kernel_Z
from twovortex.propagator import PropagatorRequest
from twovortex.quadrature import QuadratureSpec
from twovortex.verify import (
    CheckReport,
    OracleSeriesError,
    StencilCrossesCutError,
    check_auxrel_euler,
    check_boundary_condition,
    check_chapman_kolmogorov,
    check_hermiticity,
    check_integral_identity,
    check_one_vortex_oracle,
    check_pde_residual,
    check_schulman_agreement,
    check_sum_identity,
    check_vortex_boundary_value,
    one_vortex_series,
)

CFG = VortexConfig(separation=2.0)
TAU1 = EvalMode("euclidean", 1.0)


def test_check_report_build_semantics():
    ok = CheckReport.build("x", 0.5, 0.5, {"k": 1})
    assert ok.passed  # boundary counts as a pass
    bad = CheckReport.build("x", 0.6, 0.5)
    assert not bad.passed
    d = ok.as_dict()
    assert set(d) == {"name", "discrepancy", "tolerance", "passed", "details"}
    assert d["details"] == {"k": 1}


# ------------------------------------------------------- scalar identities

@pytest.mark.parametrize("alpha,theta,s", [
    (0.3, 1.0, 0.5), (0.7, -2.0, -1.2), (0.5, 0.0, 3.0),
])
def test_sum_identity_within_tail_bound(alpha, theta, s):
    rep = check_sum_identity(alpha, theta, s, k_max=500)
    assert rep.passed
    assert rep.details["tail_bound"] == 1.0 / (math.pi * 500)


def test_sum_identity_validation():
    with pytest.raises(ValueError):
        check_sum_identity(1.0, 0.5, 0.0)
    with pytest.raises(ValueError):
        check_sum_identity(0.3, math.pi, 0.0)
    with pytest.raises(ValueError):
        check_sum_identity(0.3, 0.5, 0.0, k_max=0)


@pytest.mark.parametrize("alpha,theta,s", [
    (0.3, 0.5, 0.4), (0.9, -2.8, 1.5), (0.5, 2.8, -0.7),
])
def test_integral_identity(alpha, theta, s):
    # includes near-edge angles where the decay window stretches to ~200
    rep = check_integral_identity(alpha, theta, s)
    assert rep.passed
    assert not rep.details["tail_dominated"]


def test_auxrel_scaling_annihilation():
    rep = check_auxrel_euler(0.7, 1.3, 0.9)
    assert rep.passed
    with pytest.raises(ValueError):
        check_auxrel_euler(-1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        check_auxrel_euler(1.0, 1.0, 0.0)  # pole of the reciprocal


# ----------------------------------------------------------- series oracle

def test_one_vortex_series_frozen_value():
    v = one_vortex_series(0.3, 1.0, 1.2, 0.7, 0.9, -0.4, m_max=60)
    np.testing.assert_allclose(v, 0.04803500079565863 - 0.0017315528385139186j,
                               rtol=1e-12)


def test_one_vortex_series_limits():
    # integer flux collapses the series onto the free gaussian kernel
    r0, th0, r1, th1, tau = 1.2, 0.7, 0.9, -0.4, 1.0
    v = one_vortex_series(0.0, tau, r0, th0, r1, th1)
    dsq = r0 * r0 + r1 * r1 - 2.0 * r0 * r1 * math.cos(th1 - th0)
    np.testing.assert_allclose(v, kernel_Z(tau, math.sqrt(dsq), euclidean=True),
                               rtol=1e-12)
    # a full angular turn multiplies by the flux phase
    alpha = 0.3
    base = one_vortex_series(alpha, tau, r0, th0, r1, th1)
    turned = one_vortex_series(alpha, tau, r0, th0, r1, th1 + 2.0 * math.pi)
    np.testing.assert_allclose(turned, base * np.exp(2j * math.pi * alpha),
                               rtol=1e-12)


def test_one_vortex_series_truncation_guard():
    with pytest.raises(OracleSeriesError):
        one_vortex_series(0.3, 0.1, 6.0, 0.0, 6.0, 1.0, m_max=10)


def test_one_vortex_oracle_agreement():
    rep = check_one_vortex_oracle(0.5, TAU1, (1.2, 0.7), (0.5, -0.9))
    assert rep.passed
    assert rep.discrepancy < 1e-8


# --------------------------------------------------------------- PDE check

def test_pde_residual_small():
    cfg = VortexConfig(separation=3.0)
    req = PropagatorRequest((1.3, 0.6), (0.8, 1.1), TAU1, Flux(0.5, 0.3), cfg,
                            n_max=2,
                            quad=QuadratureSpec(rel_tol=1e-9, abs_tol=1e-15))
    rep = check_pde_residual(req)
    assert rep.passed
    assert rep.discrepancy < 1e-3


def test_pde_stencil_cut_guard():
    cfg = VortexConfig(separation=3.0)
    req = PropagatorRequest((1.3, 0.6), (3.5, 0.005), TAU1, Flux(0.5, 0.3),
                            cfg, n_max=2)
    with pytest.raises(StencilCrossesCutError):
        check_pde_residual(req, grid_step=1e-2)


# ------------------------------------------------------- kernel relations

def test_boundary_condition_jump():
    rep = check_boundary_condition(Flux(0.3, 0.7), CFG, TAU1, (1.3, 0.6),
                                   "a", n_max=3)
    assert rep.passed
    assert rep.discrepancy < 1e-3
    # extrapolation must actually help over the raw eps defect
    assert rep.discrepancy < rep.details["raw_rel_eps"]


def test_chapman_kolmogorov_composition():
    req = PropagatorRequest((1.3, 0.6), (0.9, -0.2), EvalMode("euclidean", 0.5),
                            Flux(0.5, 0.5), CFG, n_max=2,
                            quad=QuadratureSpec(rel_tol=1e-7, abs_tol=1e-11))
    rep = check_chapman_kolmogorov(req, grid_count=12)
    assert rep.passed
    assert rep.details["skipped_cells"] == 0
    assert rep.details["boundary_mass_rel"] < 1e-4


def test_chapman_kolmogorov_validation():
    req = PropagatorRequest((1.3, 0.6), (0.9, -0.2), TAU1, Flux(0.5, 0.5), CFG)
    with pytest.raises(ValueError):
        check_chapman_kolmogorov(req, split=1.0)
    rot = PropagatorRequest((1.3, 0.6), (0.9, -0.2),
                            EvalMode("rotated", 1.0, 0.7), Flux(0.5, 0.5), CFG)
    with pytest.raises(ValueError):
        check_chapman_kolmogorov(rot)


def test_schulman_agreement_quick():
    req = PropagatorRequest((1.3, 0.6), (0.4, -0.9), TAU1, Flux(0.5, 0.5),
                            CFG, n_max=2,
                            quad=QuadratureSpec(rel_tol=1e-8, abs_tol=1e-12))
    rep = check_schulman_agreement(req, k_max=50, tolerance=1e-3)
    assert rep.passed
    assert rep.details["k_tail_estimate"] == pytest.approx(2 / (math.pi * 50))


def test_hermiticity_with_derived_tolerance():
    req = PropagatorRequest((1.3, 0.6), (0.4, -0.9), TAU1, Flux(0.3, 0.7),
                            CFG, n_max=2,
                            quad=QuadratureSpec(rel_tol=1e-8, abs_tol=1e-12))
    rep = check_hermiticity(req)
    assert rep.passed
    assert rep.tolerance == rep.details["combined_error"]


def test_vortex_boundary_value_decreases():
    rep = check_vortex_boundary_value(
        Flux(0.5, 0.5), CFG, TAU1, (1.3, 0.6), "a", radii=(0.2, 0.1),
        n_max=2, quad=QuadratureSpec(rel_tol=1e-4, abs_tol=1e-10))
    assert rep.passed
    assert rep.discrepancy < 1.0
    assert len(rep.details["magnitudes"]) == 2
