"""Checks for every identity and limit the propagator construction rests on.

Each check compares an implementation quantity against an independent route
(partial sums, line quadrature, finite differences, Bessel series, grid
composition) and returns a :class:`CheckReport` with the measured
discrepancy, the tolerance it was held to, and named intermediates.  The
checks are side-effect free and independent of each other.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import iv

from .geometry import (
    Flux,
    PlanePoint,
    VortexConfig,
    as_point,
    polar_around,
    segment_cut_crossing,
    vortex_position,
)
from .kernels import EvalMode, chain_factor, pole_bracket
from .propagator import (
    K_closed,
    K_schulman_truncated,
    PropagatorRequest,
)
from .quadrature import QuadratureSpec, integrate_line

PI = math.pi
TWO_PI = 2.0 * math.pi

__all__ = [
    "CheckReport",
    "OracleSeriesError",
    "StencilCrossesCutError",
    "check_auxrel_euler",
    "check_boundary_condition",
    "check_chapman_kolmogorov",
    "check_hermiticity",
    "check_integral_identity",
    "check_one_vortex_oracle",
    "check_pde_residual",
    "check_schulman_agreement",
    "check_sum_identity",
    "check_vortex_boundary_value",
]


class StencilCrossesCutError(ValueError):
    """A finite-difference stencil leg would step across a branch cut."""


class OracleSeriesError(RuntimeError):
    """The Bessel series was truncated before its tail became negligible."""


@dataclass(frozen=True)
class CheckReport:
    name: str
    discrepancy: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name: str, discrepancy: float, tolerance: float,
              details: dict | None = None) -> "CheckReport":
        return cls(name, float(discrepancy), float(tolerance),
                   bool(discrepancy <= tolerance), dict(details or {}))

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "discrepancy": self.discrepancy,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": self.details,
        }


def _require_strip(alpha: float, theta: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"flux parameter {alpha} outside the open interval (0,1)")
    if not abs(theta) < PI:
        raise ValueError(f"angle {theta} outside the open strip (-pi, pi)")


def check_sum_identity(alpha: float, theta: float, s: float,
                       k_max: int = 10_000,
                       tolerance: float | None = None) -> CheckReport:
    """Winding sum of pole brackets vs. its closed form.

    The symmetric partial sum over |k| <= k_max of
    exp(-2 pi i alpha k) * bracket(theta + 2 pi k + i s) is compared against
    -2 sin(pi alpha) * chain_factor(alpha, s, theta).  The omitted tail is
    bounded by 1/(pi k_max) (telescoping majorant of the bracket decay), and
    that bound is the default tolerance.
    """
    _require_strip(alpha, theta)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    k = np.arange(-k_max, k_max + 1)
    partial = np.sum(np.exp(-2j * PI * alpha * k)
                     * pole_bracket(theta + TWO_PI * k + 1j * s))
    closed = -2.0 * math.sin(PI * alpha) * chain_factor(alpha, s, theta)
    tail_bound = 1.0 / (PI * k_max)
    disc = abs(partial - closed)
    tol = tail_bound if tolerance is None else tolerance
    return CheckReport.build(
        "sum_identity", disc, tol,
        {"partial_sum": complex(partial), "closed_form": complex(closed),
         "k_max": k_max, "tail_bound": tail_bound},
    )


def _inv_sin_pi(alpha: float, tau: float) -> complex:
    """1/sin(pi(alpha + i tau)) without overflow at large |tau|.

    Factors out the dominant exponential so both branches only ever see
    decaying factors.
    """
    if tau >= 0.0:
        e1 = np.exp(1j * PI * alpha - PI * tau)
        return -2j * e1 / (1.0 - e1 * e1)
    e1 = np.exp(-1j * PI * alpha + PI * tau)
    return 2j * e1 / (1.0 - e1 * e1)


def check_integral_identity(alpha: float, theta: float, s: float,
                            quad: QuadratureSpec | None = None,
                            tolerance: float = 1e-8) -> CheckReport:
    """Line-integral representation of the chain factor vs. its closed form.

    Integrates exp((theta + i s) tau) / sin(pi (alpha + i tau)) over the real
    line (window chosen from the exp(-(pi-|theta|)|tau|) decay) and compares
    with 2 * chain_factor(alpha, s, theta).
    """
    _require_strip(alpha, theta)
    spec = quad or QuadratureSpec(rel_tol=1e-10, abs_tol=1e-12)
    window = min(80.0 / (PI - abs(theta)), 5000.0)

    def f(tau: float) -> complex:
        # exponential prefactor merged into the reciprocal sine's dominant
        # term so the net exponent (theta -+ pi) tau always decays
        if tau >= 0.0:
            num = -2j * np.exp(1j * PI * alpha + (theta - PI + 1j * s) * tau)
            den = 1.0 - np.exp(2j * PI * alpha - TWO_PI * tau)
        else:
            num = 2j * np.exp(-1j * PI * alpha + (theta + PI + 1j * s) * tau)
            den = 1.0 - np.exp(-2j * PI * alpha + TWO_PI * tau)
        return num / den

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        value, err = integrate_line(f, window, spec)
    tail_dominated = any("tail" in str(w.message) for w in caught)
    closed = 2.0 * chain_factor(alpha, s, theta)
    disc = abs(value - closed)
    return CheckReport.build(
        "integral_identity", disc, tolerance,
        {"line_integral": complex(value), "closed_form": complex(closed),
         "window": window, "quad_err": err, "tail_dominated": tail_dominated},
    )


def check_auxrel_euler(t: float, r: float, theta: float, h: float = 1e-4,
                       tolerance: float = 1e-6) -> CheckReport:
    """Scaling annihilation of the vertex argument reciprocal.

    g(t, r) = 1/(theta + i log(t/r)) depends on t/r only, so the combined
    radial/time scaling derivative r*dg/dr + t*dg/dt vanishes identically;
    the check measures it by central differences.
    """
    if t <= 0.0 or r <= 0.0:
        raise ValueError("t and r must be positive")
    if theta == 0.0 and t == r:
        raise ValueError("pole of the reciprocal at theta=0, t=r")

    def g(tt: float, rr: float) -> complex:
        return 1.0 / (theta + 1j * math.log(tt / rr))

    d_r = r * (g(t, r + h) - g(t, r - h)) / (2.0 * h)
    d_t = t * (g(t + h, r) - g(t - h, r)) / (2.0 * h)
    disc = abs(d_r + d_t)
    return CheckReport.build(
        "auxrel_euler", disc, tolerance,
        {"value": g(t, r), "radial_part": complex(d_r),
         "time_part": complex(d_t), "step": h},
    )


def _shifted(req: PropagatorRequest, x: PlanePoint | None = None,
             time: float | None = None) -> PropagatorRequest:
    out = req
    if x is not None:
        out = replace(out, x=x)
    if time is not None:
        out = replace(out, mode=replace(req.mode, time=time))
    return out


def check_pde_residual(req: PropagatorRequest, grid_step: float = 1e-2,
                       time_step: float | None = None,
                       tolerance: float = 1e-3) -> CheckReport:
    """Heat-equation residual of the closed evaluation by finite differences.

    Five-point Laplacian in x plus a central time difference; the residual
    |dK/dtau - lap K| is reported relative to |K| at the stencil center.
    Raises :class:`StencilCrossesCutError` when a spatial leg of the stencil
    would cross a branch cut (the kernel jumps there, so the difference
    quotient would be meaningless).
    """
    if req.mode.kind != "euclidean":
        raise ValueError("residual check runs on the heat-kernel form only")
    h = grid_step
    k = time_step if time_step is not None else grid_step
    x, T = req.x, req.mode.time
    if T - k <= 0.0:
        raise ValueError("time_step too large for the requested time")
    neighbors = [
        PlanePoint(x.x + h, x.y), PlanePoint(x.x - h, x.y),
        PlanePoint(x.x, x.y + h), PlanePoint(x.x, x.y - h),
    ]
    for p in neighbors:
        if segment_cut_crossing(x, p, req.cfg) is not None:
            raise StencilCrossesCutError(
                f"stencil leg from ({x.x},{x.y}) to ({p.x},{p.y}) crosses a cut"
            )
    center = K_closed(req)
    ring = [K_closed(_shifted(req, x=p)).value for p in neighbors]
    later = K_closed(_shifted(req, time=T + k)).value
    earlier = K_closed(_shifted(req, time=T - k)).value
    lap = (sum(ring) - 4.0 * center.value) / (h * h)
    dt = (later - earlier) / (2.0 * k)
    resid = abs(dt - lap)
    rel = resid / abs(center.value)
    return CheckReport.build(
        "pde_residual", rel, tolerance,
        {"residual_abs": resid, "value": center.value, "grid_step": h,
         "time_step": k, "time_derivative": dt, "laplacian": complex(lap),
         "quad_err": center.quad_err, "truncation_bound": center.truncation_bound},
    )


def _cut_probe_point(carrier: str, radius: float, theta: float,
                     cfg: VortexConfig) -> PlanePoint:
    """Ambient position at adapted-frame angle theta around a carrier."""
    c = vortex_position(carrier, cfg)
    if carrier == "a":
        ambient = theta
    else:
        ambient = theta + PI
    return PlanePoint(c.x + radius * math.cos(ambient),
                      c.y + radius * math.sin(ambient))


def check_boundary_condition(flux: Flux, cfg: VortexConfig, mode: EvalMode,
                             x0, carrier: str, radius: float = 0.7,
                             eps: float = 0.08, n_max: int = 4,
                             quad: QuadratureSpec | None = None,
                             tolerance: float = 1e-3) -> CheckReport:
    """Quasi-periodic jump across one branch cut.

    Evaluates the kernel just above and just below the carrier's cut at
    angular distances eps and eps/2, forms the jump defect
    D = K(pi - eps) - exp(2 pi i sigma) K(-pi + eps), and removes its linear
    part by Richardson extrapolation of the two eps values.  Reported
    relative to the kernel magnitude at the closest probe.
    """
    x0 = as_point(x0)
    sigma = flux.of(carrier)
    jump = np.exp(2j * PI * sigma)
    spec = quad or QuadratureSpec(rel_tol=1e-6, abs_tol=1e-12)

    def defect(e: float) -> tuple[complex, float]:
        vals = {}
        for sign in (+1, -1):
            xp = _cut_probe_point(carrier, radius, sign * (PI - e), cfg)
            rq = PropagatorRequest(x0, xp, mode, flux, cfg, n_max=n_max,
                                   quad=spec)
            vals[sign] = K_closed(rq).value
        return vals[+1] - jump * vals[-1], max(abs(vals[+1]), abs(vals[-1]))

    d_full, scale_full = defect(eps)
    d_half, scale_half = defect(eps / 2.0)
    extrapolated = 2.0 * d_half - d_full
    rel = abs(extrapolated) / scale_half
    return CheckReport.build(
        f"boundary_condition_{carrier}", rel, tolerance,
        {"defect_eps": d_full, "defect_half": d_half,
         "extrapolated": extrapolated, "eps": eps, "radius": radius,
         "kernel_scale": scale_half, "jump_phase": complex(jump),
         "raw_rel_eps": abs(d_full) / scale_full},
    )


def one_vortex_series(alpha: float, tau: float, r0: float, th0: float,
                      r1: float, th1: float, m_max: int = 60) -> complex:
    """Independent single-carrier heat kernel as a Bessel series.

    The angular index convention is pinned operationally: at alpha=0 the
    series collapses to the free Gaussian kernel, and shifting either angle
    by a full turn multiplies the value by exp(2 pi i alpha).
    """
    z = r0 * r1 / (2.0 * tau)
    m = np.arange(-m_max, m_max + 1)
    terms = iv(np.abs(m + alpha), z) * np.exp(1j * (m + alpha) * (th1 - th0))
    edge = max(abs(terms[0]), abs(terms[-1]))
    total = np.sum(terms)
    if not abs(total) == 0.0 and edge > 1e-13 * abs(total):
        raise OracleSeriesError(
            f"series edge term {edge:.2e} not negligible vs sum "
            f"{abs(total):.2e}; raise m_max (argument {z:.2f})"
        )
    return complex(math.exp(-(r0 * r0 + r1 * r1) / (4.0 * tau))
                   / (4.0 * PI * tau) * total)


def check_one_vortex_oracle(alpha: float, mode: EvalMode, x0, x,
                            m_max: int = 60,
                            cfg: VortexConfig | None = None,
                            n_max: int = 2,
                            quad: QuadratureSpec | None = None,
                            tolerance: float = 1e-6) -> CheckReport:
    """Closed evaluation at vanishing second flux vs. the Bessel series.

    With the second flux parameter zero every scattering sequence visiting
    the second carrier drops out, so the closed formula must reproduce the
    classical single-flux-line heat kernel regardless of where the second
    carrier sits.
    """
    if mode.kind != "euclidean":
        raise ValueError("the series oracle is for the heat-kernel form")
    x0, x = as_point(x0), as_point(x)
    cfg = cfg or VortexConfig(separation=1e6)
    spec = quad or QuadratureSpec(rel_tol=1e-9, abs_tol=1e-14)
    req = PropagatorRequest(x0, x, mode, Flux(alpha, 0.0), cfg,
                            n_max=n_max, quad=spec)
    res = K_closed(req)
    p0 = polar_around(x0, "a", cfg)
    p1 = polar_around(x, "a", cfg)
    oracle = one_vortex_series(alpha, mode.time, p0.r, p0.theta,
                               p1.r, p1.theta, m_max)
    rel = abs(res.value - oracle) / abs(oracle)
    return CheckReport.build(
        "one_vortex_oracle", rel, tolerance,
        {"closed": res.value, "series": oracle, "m_max": m_max,
         "quad_err": res.quad_err, "truncation_bound": res.truncation_bound},
    )


def check_chapman_kolmogorov(req: PropagatorRequest, split: float = 0.5,
                             grid_count: int = 60,
                             half_width: float | None = None,
                             tolerance: float = 5e-2) -> CheckReport:
    """Semigroup composition on a midpoint grid.

    Compares K(T, x, x0) with the grid quadrature of
    K(split*T, x, y) K((1-split)*T, y, x0) over a square covering the
    Gaussian support of both factors.  Cell centers avoid the axis rows, so
    no midpoint lands on a cut; cells whose evaluation still fails a
    geometry precondition are skipped and counted.
    """
    if req.mode.kind != "euclidean":
        raise ValueError("composition check runs on the heat-kernel form only")
    if not 0.0 < split < 1.0:
        raise ValueError("split must lie strictly between 0 and 1")
    x0, x, T = req.x0, req.x, req.mode.time
    t1, t2 = split * T, (1.0 - split) * T
    d = math.hypot(x.x - x0.x, x.y - x0.y)
    if half_width is None:
        half_width = d / 2.0 + math.sqrt(4.0 * max(t1, t2) * math.log(1e3))
    cx, cy = (x.x + x0.x) / 2.0, (x.y + x0.y) / 2.0
    step = 2.0 * half_width / grid_count
    centers = cx - half_width + (np.arange(grid_count) + 0.5) * step, \
        cy - half_width + (np.arange(grid_count) + 0.5) * step

    mode1 = replace(req.mode, time=t1)
    mode2 = replace(req.mode, time=t2)
    acc = 0.0 + 0.0j
    skipped = 0
    boundary = 0.0
    for i, yx in enumerate(centers[0]):
        for j, yy in enumerate(centers[1]):
            y = PlanePoint(float(yx), float(yy))
            try:
                first = K_closed(replace(req, x=y, mode=mode2)).value
                second = K_closed(replace(req, x0=y, mode=mode1)).value
            except ValueError:
                skipped += 1
                continue
            prod = second * first
            acc += prod
            if i in (0, grid_count - 1) or j in (0, grid_count - 1):
                boundary += abs(prod)
    composed = acc * step * step
    direct = K_closed(req).value
    rel = abs(composed - direct) / abs(direct)
    boundary_rel = boundary * step * step / abs(direct)
    if boundary_rel > 0.2 * tolerance:
        warnings.warn(
            f"composition grid may be too small: boundary ring carries "
            f"{boundary_rel:.2e} of the direct value", stacklevel=2)
    return CheckReport.build(
        "chapman_kolmogorov", rel, tolerance,
        {"direct": direct, "composed": complex(composed), "split": split,
         "grid_count": grid_count, "half_width": half_width,
         "skipped_cells": skipped, "boundary_mass_rel": boundary_rel},
    )


def check_schulman_agreement(req: PropagatorRequest, k_max: int,
                             tolerance: float = 1e-4) -> CheckReport:
    """Closed word-sum evaluation vs. the capped winding-path sum.

    Runs the closed route under both interior chain index conventions and
    reports which one agrees with the winding sum; the discrepancy is the
    one for the convention the request selected.
    """
    wind = K_schulman_truncated(req, k_max)
    rels = {}
    for variant in ("matched", "printed_mixed"):
        closed = K_closed(replace(req, chain_variant=variant)).value
        rels[variant] = abs(closed - wind) / abs(closed)
    rel = rels[req.chain_variant]
    agreeing = min(rels, key=rels.get)
    # heuristic cap-tail scale: each vertex sum omits O(1/(pi k_max))
    tail_estimate = req.n_max / (PI * k_max)
    return CheckReport.build(
        "schulman_agreement", rel, tolerance,
        {"winding_sum": complex(wind), "k_max": k_max,
         "rel_matched": rels["matched"],
         "rel_printed_mixed": rels["printed_mixed"],
         "agreeing_variant": agreeing, "k_tail_estimate": tail_estimate},
    )


def check_hermiticity(req: PropagatorRequest,
                      tolerance: float | None = None) -> CheckReport:
    """Kernel symmetry under endpoint exchange with conjugation.

    The heat semigroup is self-adjoint, so K(T, x, x0) must equal
    conj(K(T, x0, x)); the default tolerance combines both evaluations'
    quadrature and truncation estimates.
    """
    forward = K_closed(req)
    backward = K_closed(replace(req, x0=req.x, x=req.x0))
    scale = abs(forward.value)
    disc = abs(forward.value - np.conj(backward.value)) / scale
    if tolerance is None:
        tolerance = (forward.quad_err + backward.quad_err
                     + forward.truncation_bound + backward.truncation_bound
                     ) / scale + 1e-9
    return CheckReport.build(
        "hermiticity", disc, tolerance,
        {"forward": forward.value, "backward": backward.value,
         "combined_error": tolerance},
    )


def check_vortex_boundary_value(flux: Flux, cfg: VortexConfig, mode: EvalMode,
                                x0, carrier: str = "a",
                                radii: tuple = (0.1, 0.05, 0.025),
                                approach_angle: float = 2.0,
                                n_max: int = 3,
                                quad: QuadratureSpec | None = None) -> CheckReport:
    """Kernel magnitude decreasing toward a carrier.

    At fractional flux the kernel vanishes at the carriers; the check walks
    the arrival point inward along a fixed ray and requires strictly
    decreasing magnitudes.  Discrepancy is the worst consecutive magnitude
    ratio (must stay below 1; for half-integer flux it approaches
    2**-0.5 ~ 0.707 per radius halving).  Quadrature stays loose because the
    assertion is about factors, not digits.
    """
    x0 = as_point(x0)
    spec = quad or QuadratureSpec(rel_tol=1e-5, abs_tol=1e-11)
    mags = []
    for r in radii:
        xp = _cut_probe_point(carrier, r, approach_angle, cfg)
        rq = PropagatorRequest(x0, xp, mode, flux, cfg, n_max=n_max, quad=spec)
        mags.append(abs(K_closed(rq).value))
    ratios = [b / a for a, b in zip(mags, mags[1:])]
    return CheckReport.build(
        f"vortex_boundary_value_{carrier}", max(ratios), 1.0,
        {"radii": list(radii), "magnitudes": mags, "ratios": ratios},
    )
