"""Acceptance gate: end-to-end checks with stated tolerances and budgets.

Each test prints one summary line (visible with -rA or -s) and asserts both
the accuracy target and a wall-clock budget.
"""

import json
import math
import time

import numpy as np

from twovortex.cli import main as cli_main
from twovortex.geometry import Flux, VortexConfig, polar_around
from twovortex.kernels import EvalMode, kernel_Z
from twovortex.propagator import (
    K_closed,
    K_schulman_truncated,
    PropagatorRequest,
)
from twovortex.quadrature import QuadratureSpec
from twovortex.verify import (
    check_boundary_condition,
    check_chapman_kolmogorov,
    check_hermiticity,
    check_integral_identity,
    check_one_vortex_oracle,
    check_pde_residual,
    check_sum_identity,
)

CFG = VortexConfig(separation=2.0)
TAU1 = EvalMode("euclidean", 1.0)


def _report(num, label, ok, detail, elapsed, budget):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num} ({label}): {status} {detail} "
          f"[{elapsed:.1f}s of {budget:.0f}s budget]")
    assert ok, f"criterion {num}: {detail}"
    assert elapsed < budget, f"criterion {num} exceeded budget: {elapsed:.1f}s"


def test_criterion_1_zero_flux_reduction():
    rng = np.random.default_rng(20260823)
    t0 = time.monotonic()
    worst = 0.0
    for _ in range(200):
        tau = rng.uniform(0.1, 5.0)
        x0 = tuple(rng.uniform(-3.0, 3.0, 2))
        x = tuple(rng.uniform(-3.0, 3.0, 2))
        res = K_closed(PropagatorRequest(
            x0, x, EvalMode("euclidean", tau), Flux(0.0, 0.0), CFG, n_max=3))
        d = math.hypot(x[0] - x0[0], x[1] - x0[1])
        worst = max(worst, abs(res.value - kernel_Z(tau, d, euclidean=True)))
    elapsed = time.monotonic() - t0
    _report(1, "zero-flux reduction", worst <= 1e-12,
            f"max |K - gaussian| = {worst:.2e} over 200 draws", elapsed, 10.0)


ALPHAS = np.linspace(0.1, 0.9, 9)
THETAS = np.linspace(-2.8, 2.8, 9)
LOG_RATIOS = np.linspace(-2.0, 2.0, 5)


def test_criterion_2_summation_identity():
    t0 = time.monotonic()
    worst = 0.0
    all_within_tail = True
    for a in ALPHAS:
        for th in THETAS:
            for s in LOG_RATIOS:
                rep = check_sum_identity(float(a), float(th), float(s),
                                         k_max=10_000)
                worst = max(worst, rep.discrepancy)
                all_within_tail &= rep.passed  # default tolerance = tail bound
    elapsed = time.monotonic() - t0
    ok = all_within_tail and worst <= 1e-3
    _report(2, "summation identity", ok,
            f"max |partial - closed| = {worst:.2e} on the 9x9x5 grid, "
            f"all within the 1/(pi k_max) tail bound", elapsed, 30.0)


def test_criterion_3_integral_identity():
    t0 = time.monotonic()
    worst = 0.0
    for a in ALPHAS:
        for th in THETAS:
            for s in LOG_RATIOS:
                rep = check_integral_identity(float(a), float(th), float(s))
                worst = max(worst, rep.discrepancy)
    elapsed = time.monotonic() - t0
    _report(3, "integral identity", worst <= 1e-8,
            f"max |line integral - closed| = {worst:.2e} on the 9x9x5 grid",
            elapsed, 60.0)


def test_criterion_4_single_vortex_oracle():
    rng = np.random.default_rng(42)
    pairs = []
    for _ in range(20):
        r0, r1 = rng.uniform(0.4, 2.2, 2)
        a0, a1 = rng.uniform(-2.6, 2.6, 2)
        pairs.append(((r0 * math.cos(a0), r0 * math.sin(a0)),
                      (r1 * math.cos(a1), r1 * math.sin(a1))))
    t0 = time.monotonic()
    worst = 0.0
    for alpha in (0.1, 0.3, 0.5, 0.7, 0.9):
        for tau in (0.5, 1.0, 2.0):
            mode = EvalMode("euclidean", tau)
            for x0, x1 in pairs:
                rep = check_one_vortex_oracle(alpha, mode, x0, x1)
                worst = max(worst, rep.discrepancy)
    elapsed = time.monotonic() - t0
    _report(4, "single-vortex oracle", worst <= 1e-6,
            f"max relative deviation from the Bessel series = {worst:.2e} "
            f"(5 fluxes x 3 times x 20 pairs)", elapsed, 120.0)


# Frozen three-visit reference (word a-b-a) discriminating the interior
# chain index pairing; computed independently from flux-weighted winding
# sums with |k| <= 400 per visit (tail error ~3e-14).  At the main
# criterion-5 parameters (n_max = 2) no interior visit exists and both
# pairings coincide identically, so the discrimination needs this length-3
# sector with unequal fluxes.
ABA_REF = -1.724913e-04 - 2.894015e-05j
ABA_REQ = dict(x0=(0.5, 0.45), x=(0.9, -0.40), mode=EvalMode("euclidean", 2.0),
               flux=Flux(0.3, 0.7), cfg=VortexConfig(separation=1.2), n_max=3,
               quad=QuadratureSpec(rel_tol=1e-8, abs_tol=1e-13))


def _capped_oracle_admissible(x0, x1):
    """Restrict endpoint pairs to where the k_max = 50 winding cap is a
    1e-4-level oracle.  The cap tail is an absolute-scale error per sector
    (~1/(2 pi k_max^2) per vertex at half-integer flux, growing as swept
    angles approach +-pi), so pairs with strongly suppressed kernels or
    near-cut angles would measure the cap, not the implementation."""
    if math.hypot(x1[0] - x0[0], x1[1] - x0[1]) > 1.8:
        return False
    pol = {}
    for tag, p in (("0", x0), ("1", x1)):
        for c in ("a", "b"):
            q = polar_around(p, c, CFG)
            if q.r < 0.5 or abs(q.theta) > math.pi - 0.5:
                return False
            pol[tag + c] = q
    return all(abs(pol["1" + c].theta - pol["0" + c].theta) <= 2.2
               for c in ("a", "b"))


def test_criterion_5_winding_sum_agreement_and_variant_discrimination():
    rng = np.random.default_rng(11)
    pairs = []
    while len(pairs) < 10:
        x0 = (rng.uniform(-1.0, 3.0), rng.uniform(0.2, 1.3))
        x1 = (rng.uniform(-1.0, 3.0), rng.uniform(-1.3, -0.2))
        if _capped_oracle_admissible(x0, x1):
            pairs.append((x0, x1))
    t0 = time.monotonic()
    worst = 0.0
    for x0, x1 in pairs:
        req = PropagatorRequest(x0, x1, TAU1, Flux(0.5, 0.5), CFG, n_max=2,
                                quad=QuadratureSpec(rel_tol=1e-8,
                                                    abs_tol=1e-12))
        closed = K_closed(req).value
        capped = K_schulman_truncated(req, k_max=50)
        worst = max(worst, abs(closed - capped) / abs(closed))

    dev = {}
    for variant in ("matched", "printed_mixed"):
        term = K_closed(PropagatorRequest(
            chain_variant=variant, **ABA_REQ)).terms[("a", "b", "a")]
        dev[variant] = abs(term - ABA_REF) / abs(ABA_REF)
    elapsed = time.monotonic() - t0
    ok = (worst <= 1e-4 and dev["matched"] < 1e-3
          and dev["printed_mixed"] > 1e-2)
    _report(5, "winding-sum agreement", ok,
            f"max relative deviation = {worst:.2e} over 10 pairs; "
            f"3-visit reference deviation matched={dev['matched']:.1e}, "
            f"printed_mixed={dev['printed_mixed']:.1e}", elapsed, 600.0)


def test_criterion_6_boundary_condition_jumps():
    flux = Flux(0.3, 0.7)
    t0 = time.monotonic()
    reps = [check_boundary_condition(flux, CFG, TAU1, (1.3, 0.6), c, n_max=4)
            for c in ("a", "b")]
    elapsed = time.monotonic() - t0
    worst = max(r.discrepancy for r in reps)
    _report(6, "quasi-periodic boundary conditions", worst <= 1e-3,
            f"extrapolated jump defect: cut a = {reps[0].discrepancy:.2e}, "
            f"cut b = {reps[1].discrepancy:.2e}", elapsed, 120.0)


PDE_PROBES = [(0.8, 1.1), (-0.6, 0.9), (1.9, 1.4), (0.5, -1.2), (2.2, -0.8),
              (-1.1, -0.7), (1.4, 2.0), (2.8, 1.6), (-0.3, 1.8), (1.0, -1.9)]


def test_criterion_7_heat_equation_residual():
    cfg = VortexConfig(separation=3.0)
    t0 = time.monotonic()
    worst_res = 0.0
    worst_order = math.inf
    for probe in PDE_PROBES:
        req = PropagatorRequest((1.3, 0.6), probe, TAU1, Flux(0.5, 0.3), cfg,
                                n_max=3, quad=QuadratureSpec(rel_tol=1e-9,
                                                             abs_tol=1e-15))
        full = check_pde_residual(req, grid_step=1e-2)
        half = check_pde_residual(req, grid_step=5e-3)
        worst_res = max(worst_res, full.discrepancy)
        worst_order = min(worst_order,
                          math.log2(full.discrepancy / half.discrepancy))
    elapsed = time.monotonic() - t0
    ok = worst_res <= 1e-3 and worst_order >= 1.8
    _report(7, "heat-equation residual", ok,
            f"max relative residual = {worst_res:.2e} at h = 1e-2, "
            f"min fitted order = {worst_order:.2f} over 10 probes",
            elapsed, 300.0)


def test_criterion_8_hermiticity_and_semigroup():
    t0 = time.monotonic()
    herm_req = PropagatorRequest((1.3, 0.6), (0.4, -0.9), TAU1, Flux(0.3, 0.7),
                                 CFG, n_max=3,
                                 quad=QuadratureSpec(rel_tol=1e-8,
                                                     abs_tol=1e-12))
    herm = check_hermiticity(herm_req)  # tolerance = combined error estimates
    ck_req = PropagatorRequest((0.9, 0.5), (-0.4, 0.8), TAU1, Flux(0.5, 0.5),
                               CFG, n_max=2,
                               quad=QuadratureSpec(rel_tol=1e-5,
                                                   abs_tol=1e-10))
    ck = check_chapman_kolmogorov(ck_req, grid_count=60, tolerance=5e-2)
    elapsed = time.monotonic() - t0
    ok = herm.passed and ck.passed
    _report(8, "hermiticity and semigroup", ok,
            f"hermiticity deviation = {herm.discrepancy:.2e} "
            f"(combined estimate {herm.tolerance:.1e}); "
            f"60x60 composition deviation = {ck.discrepancy:.2e}",
            elapsed, 600.0)


GRID_CONFIG = """\
[vortices]
separation = 2.0
[flux]
a = 0.5
b = 0.5
[mode]
kind = "euclidean"
time = 1.0
[truncation]
n_max = 2
[quadrature]
rel_tol = 1e-7
abs_tol = 1e-12
[grid]
x0 = [1.0, 0.5]
x_range = [-0.5, 2.5]
y_range = [-0.6, 0.6]
nx = 5
ny = 5
times = [0.5, 1.0]
"""


def test_criterion_9_grid_determinism(tmp_path):
    cfg_path = tmp_path / "grid.toml"
    cfg_path.write_text(GRID_CONFIG)
    t0 = time.monotonic()
    outputs = []
    for workers in ("1", "4"):
        out = tmp_path / f"grid_{workers}.csv"
        code = cli_main(["grid", "--config", str(cfg_path),
                         "--out", str(out), "--threads", workers])
        assert code == 0
        outputs.append(out.read_bytes())
    elapsed = time.monotonic() - t0
    identical = outputs[0] == outputs[1]
    _report(9, "grid determinism", identical,
            f"{len(outputs[0])} bytes, 1 vs 4 workers "
            f"{'identical' if identical else 'DIFFER'}", elapsed, 600.0)
