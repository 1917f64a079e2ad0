"""Propagator assembly for the plane with two flux carriers.

Three routes to the same object:

* ``K_closed`` — the closed formula: a direct Gaussian dressed by crossing
  phases plus, for every alternating word of carrier visits, a time-simplex
  integral of Gaussian leg weights against a scattering chain.
* ``K_path`` / ``K_cover_free`` — amplitudes of individual winding paths on
  the universal cover and their sheet-restricted sums (no flux weighting).
* ``K_schulman_truncated`` — the flux-weighted sum over winding paths with
  windings capped at ``k_max``; converges to ``K_closed`` as the cap grows.

All routes share one evaluation-contour convention (see
:class:`~twovortex.kernels.EvalMode`): each term equals a common complex
scale times an integral over real simplex times whose Gaussian factors carry
the complex rate of the contour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad

from .cover import (
    enumerate_alternating_words,
    enumerate_winding_paths,
    path_deck_element,
    rep_value,
    segment_deck_element,
)
from .geometry import (
    Flux,
    PlanePoint,
    VortexConfig,
    as_point,
    crossing_factors,
    polar_around,
    wrap_angle,
)
from .kernels import (
    EvalMode,
    chain_S,
    chain_factor,
    kernel_Z,
    log_ratios,
    mode_rate,
    pole_bracket,
)
from .quadrature import QuadratureSpec, SimplexDomain, integrate_simplex

__all__ = [
    "ValidityDomainError",
    "VisibilityError",
    "PropagatorRequest",
    "PropagatorResult",
    "K_closed",
    "K_path",
    "K_cover_free",
    "K_schulman_truncated",
    "schulman_literal",
    "winding_bracket_sum",
]

FOUR_PI = 4.0 * math.pi
PI = math.pi


class ValidityDomainError(ValueError):
    """An opening angle required by a scattering chain sits on the cut."""


class VisibilityError(ValueError):
    """A path visits the same carrier twice in a row (no sightline)."""


@dataclass(frozen=True)
class PropagatorRequest:
    """Everything needed to evaluate the propagator between two points."""

    x0: PlanePoint
    x: PlanePoint
    mode: EvalMode
    flux: Flux
    cfg: VortexConfig
    n_max: int = 4
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    chain_variant: str = "matched"

    def __post_init__(self):
        object.__setattr__(self, "x0", as_point(self.x0))
        object.__setattr__(self, "x", as_point(self.x))
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")


@dataclass(frozen=True)
class PropagatorResult:
    """Value plus per-word breakdown and error accounting.

    ``value`` always equals the sum of ``terms`` values; ``truncation_bound``
    estimates the magnitude of all omitted longer words, ``quad_err`` the
    accumulated quadrature error of the computed ones.
    """

    value: complex
    terms: dict
    truncation_bound: float
    quad_err: float
    warnings: tuple = ()


def _distance(p: PlanePoint, q: PlanePoint) -> float:
    return math.hypot(p.x - q.x, p.y - q.y)


def _free_term(E: complex, T: float, r: float) -> complex:
    return E * np.exp(-E * r * r / (4.0 * T)) / (FOUR_PI * T)


def _word_radii(word, pol0, pol1, cfg: VortexConfig) -> list[float]:
    return [pol0[word[0]].r] + [cfg.separation] * (len(word) - 1) + [pol1[word[-1]].r]


def _single_visit_integral(E, T, r0, r1, delta_angle, sigma, spec: QuadratureSpec):
    """Dedicated quadrature for one-visit terms (an integral over the split
    of the total time at the single scattering event)."""

    def g(u: float) -> complex:
        if u <= 0.0 or u >= T:
            return 0.0 + 0.0j
        s = math.log((T - u) * r0 / (u * r1))
        weight = np.exp(-E * (r1 * r1 / (4.0 * (T - u)) + r0 * r0 / (4.0 * u)))
        weight = weight / (u * (T - u))
        return weight * chain_factor(sigma, s, delta_angle)

    # breakpoints: the ridge where the ratio in the log vanishes, plus the
    # short-time Gaussian layers when an end leg is much shorter than sqrt(T)
    pts = [T * r0 / (r0 + r1)]
    for edge in (0.25 * r0 * r0, T - 0.25 * r1 * r1):
        if 0.0 < edge < T:
            pts.append(edge)
    pts.sort()
    re, re_err = quad(lambda u: g(u).real, 0.0, T, epsabs=spec.abs_tol,
                      epsrel=spec.rel_tol, limit=300, points=pts)
    im, im_err = quad(lambda u: g(u).imag, 0.0, T, epsabs=spec.abs_tol,
                      epsrel=spec.rel_tol, limit=300, points=pts)
    return complex(re, im), re_err + im_err


def _sector_tolerance(spec: QuadratureSpec, kernel_scale: float) -> QuadratureSpec:
    """Distribute the error budget for the full kernel over its sectors.

    Each sector only needs an absolute accuracy set by the requested relative
    tolerance times the kernel magnitude; resolving sectors far below that
    scale to their own relative tolerance would waste deep refinements."""
    target = max(spec.abs_tol, 0.1 * spec.rel_tol * kernel_scale)
    if target <= spec.abs_tol:
        return spec
    return replace(spec, abs_tol=target)


def _decay_scale(rE: float, T: float, length: float) -> float:
    arg = rE * length * length / (4.0 * T)
    return math.exp(-arg) if arg < 745.0 else 0.0


def _ridge_axis(radii, gap0: float, gap1: float, total: float):
    """Plan the specially resolved final time-integration axis.

    Two features can be narrow there.  The boundary factors develop a ridge
    of width ``gap`` (distance of the departure / arrival angle from the
    nearest pole) along the surface where the adjacent leg times balance the
    adjacent radii.  And when an end leg is much shorter than the others, its
    Gaussian confines that leg's time to a thin layer ``r**2/(4 total)`` at
    the cube face.  In stick-breaking coordinates the final axis alone
    controls the arrival end directly, or the departure end after reversing
    the draw order; the needier end (smaller gap or shorter leg) wins.
    Returns ``(reverse, (center, width, layer0, layer1))`` for the
    quadrature.
    """
    reverse = min(gap0, radii[0]) < min(gap1, radii[-1])
    if reverse:
        r_in, r_out = radii[1], radii[0]
        gap = gap0
    else:
        r_in, r_out = radii[-2], radii[-1]
        gap = gap1
    ustar = r_in / (r_in + r_out)
    width = max(gap, 1e-12) * ustar * (1.0 - ustar)
    lam0 = r_in * r_in / (4.0 * total)
    lam1 = r_out * r_out / (4.0 * total)
    return reverse, (ustar, width, lam0, lam1)


def K_closed(req: PropagatorRequest) -> PropagatorResult:
    """Evaluate the propagator by the closed word-sum formula.

    Words of length up to ``req.n_max`` are summed; the result carries the
    per-word terms, a bound on the omitted tail, and the accumulated
    quadrature error.  Raises the geometry errors for degenerate endpoint
    configurations and :class:`ValidityDomainError` when a required chain
    angle lies on a cut.
    """
    cfg, flux, mode = req.cfg, req.flux, req.mode
    E = mode_rate(mode)
    rE = E.real
    T = mode.time
    cf = crossing_factors(req.x0, req.x, flux, cfg)
    pol0 = {c: polar_around(req.x0, c, cfg) for c in ("a", "b")}
    pol1 = {c: polar_around(req.x, c, cfg) for c in ("a", "b")}
    warns = []
    for label, pol in (("x0", pol0), ("x", pol1)):
        for c in ("a", "b"):
            if abs(pol[c].theta) == PI:
                warns.append(f"{label} lies on the cut of {c} (tie-break +pi)")

    d = _distance(req.x0, req.x)
    terms: dict = {(): cf.zeta_a * cf.zeta_b * _free_term(E, T, d)}
    quad_err = 0.0
    base_scale = abs(terms[()])
    sec_spec = _sector_tolerance(req.quad, base_scale)

    for word in enumerate_alternating_words(req.n_max)[1:]:
        sigmas = [flux.of(c) for c in word]
        if any(math.sin(PI * s) == 0.0 for s in sigmas):
            terms[word] = 0.0 + 0.0j
            continue
        n = len(word)
        if n == 1:
            c = word[0]
            sig = sigmas[0]
            delta = pol1[c].theta - pol0[c].theta
            ang = wrap_angle(delta)
            if abs(ang) >= PI:
                raise ValidityDomainError(
                    f"single-visit angle at carrier {c} sits on the cut"
                )
            zeta = cf.zeta_a if c == "a" else cf.zeta_b
            val, err = _single_visit_integral(
                E, T, pol0[c].r, pol1[c].r, ang, sig, sec_spec
            )
            coeff = math.sin(PI * sig) / (4.0 * PI * PI)
            terms[word] = -zeta * coeff * E * val
            quad_err += coeff * err
            continue
        th0 = pol0[word[0]].theta
        th1 = pol1[word[-1]].theta
        if abs(th0) >= PI or abs(th1) >= PI:
            raise ValidityDomainError(
                f"opening angle for word {''.join(word)} sits on a cut"
            )
        radii = _word_radii(word, pol0, pol1, cfg)
        rsq = np.array(radii) ** 2
        reverse, axis = _ridge_axis(radii, PI - abs(th0), PI - abs(th1), T)

        def integrand(t, _word=word, _rsq=rsq, _radii=radii, _th0=th0,
                      _th1=th1, _rev=reverse):
            if _rev:
                t = t[::-1]
            s = log_ratios(t, _radii)
            chain = chain_S(_word, s, _th1, _th0, flux, req.chain_variant)
            gauss = np.exp(-0.25 * E * np.sum(_rsq[:, None] / t, axis=0))
            return chain * gauss / np.prod(t, axis=0)

        val, err = integrate_simplex(
            integrand, SimplexDomain(n, T), sec_spec, last_axis=axis
        )
        sign = -1.0 if n % 2 else 1.0
        terms[word] = sign / (4.0 * PI) * E * val
        quad_err += err / (4.0 * PI)

    bound = _truncation_bound(req, terms, pol0, pol1, rE, T)
    value = sum(terms.values())
    return PropagatorResult(value, terms, bound, quad_err, tuple(warns))


def _truncation_bound(req, terms, pol0, pol1, rE, T) -> float:
    """Estimate for the total magnitude of all words longer than n_max,
    from the Gaussian decay of the shortest possible path length at each
    word length, calibrated against the computed terms."""
    cfg = req.cfg
    r0_min = min(pol0["a"].r, pol0["b"].r)
    r1_min = min(pol1["a"].r, pol1["b"].r)

    def lmin(n: int) -> float:
        return r0_min + (n - 1) * cfg.separation + r1_min

    ratios = []
    for word, val in terms.items():
        if not word:
            continue
        dec = _decay_scale(rE, T, lmin(len(word)))
        if dec > 0.0 and abs(val) > 0.0:
            ratios.append(abs(val) / dec)
    if ratios:
        cal = max(ratios)
    elif all(abs(v) == 0.0 for w, v in terms.items() if w):
        scattering_on = (
            math.sin(PI * req.flux.alpha) != 0.0 or math.sin(PI * req.flux.beta) != 0.0
        )
        if req.n_max >= 1 and not scattering_on:
            return 0.0  # no scattering at integer flux: the word sum is exact
        cal = 1.0 / (FOUR_PI * T)
    else:
        cal = 1.0 / (FOUR_PI * T)
    nn = req.n_max + 1
    first = _decay_scale(rE, T, lmin(nn))
    if first == 0.0:
        return 0.0
    q = math.exp(-rE * (2.0 * cfg.separation * lmin(nn) + cfg.separation**2) / (4.0 * T))
    return 2.0 * cal * first / max(1.0 - q, 1e-12)


def _branch_angles(word, windings, th0, th1, raw_delta):
    """Vertex branch angles of a winding path.

    One visit: the full swept angle is the raw frame difference shifted by
    complete turns.  Several visits: the first sweep runs from the departure
    angle to the cut (hence the negated opening angle), interior sweeps are
    whole turns, and the last runs out to the arrival angle.
    """
    n = len(word)
    if n == 1:
        return [raw_delta + 2.0 * PI * windings[0]]
    out = [-th0 + 2.0 * PI * windings[0]]
    out += [2.0 * PI * k for k in windings[1:-1]]
    out.append(th1 + 2.0 * PI * windings[-1])
    return out


def _path_setup(word, x0, x, cfg):
    """Common validation and polar data for the path-sum routes."""
    for u, v in zip(word, word[1:]):
        if u == v:
            raise VisibilityError("consecutive visits to the same carrier")
    pol0 = polar_around(x0, word[0], cfg)
    pol1 = polar_around(x, word[-1], cfg)
    if len(word) == 1:
        raw_delta = pol1.theta - pol0.theta
        if abs(wrap_angle(raw_delta)) >= PI:
            raise ValidityDomainError("endpoints collinear through the carrier")
    else:
        if abs(pol0.theta) >= PI or abs(pol1.theta) >= PI:
            raise ValidityDomainError("opening angle sits on a cut")
        raw_delta = None
    radii = [pol0.r] + [cfg.separation] * (len(word) - 1) + [pol1.r]
    return pol0, pol1, raw_delta, radii


def K_path(word, windings, x0, x, mode: EvalMode, cfg: VortexConfig,
           spec: QuadratureSpec | None = None) -> complex:
    """Amplitude of a single winding path on the free cover (no flux weight).

    The empty word is the direct segment and returns the free kernel exactly.
    Longer words integrate a product of per-visit pole brackets over the time
    simplex.
    """
    x0, x = as_point(x0), as_point(x)
    if len(word) != len(windings):
        raise ValueError("word and windings lengths differ")
    spec = spec or QuadratureSpec()
    if len(word) == 0:
        segment_deck_element(x0, x, cfg)  # surfaces degenerate-geometry errors
        d = _distance(x0, x)
        if mode.kind == "euclidean":
            return complex(kernel_Z(mode.time, d, euclidean=True))
        return kernel_Z(mode.complex_time(), d)
    E = mode_rate(mode)
    T = mode.time
    n = len(word)
    pol0, pol1, raw_delta, radii = _path_setup(word, x0, x, cfg)
    angles = _branch_angles(word, windings, pol0.theta, pol1.theta, raw_delta)
    rsq = np.array(radii) ** 2
    ang = np.array(angles)
    gap0 = min(abs(angles[0] - PI), abs(angles[0] + PI))
    gap1 = min(abs(angles[-1] - PI), abs(angles[-1] + PI))
    if n == 1:
        gap0 = gap1 = min(gap0, gap1)
    reverse, axis = _ridge_axis(radii, gap0, gap1, T)

    def integrand(t):
        if reverse:
            t = t[::-1]
        s = log_ratios(t, radii)
        br = np.prod(pole_bracket(ang[:, None] + 1j * s), axis=0)
        gauss = np.exp(-0.25 * E * np.sum(rsq[:, None] / t, axis=0))
        return br * gauss / np.prod(t, axis=0)

    val, _ = integrate_simplex(integrand, SimplexDomain(n, T), spec,
                               last_axis=axis)
    return E * (2.0**n / (4.0 * PI) ** (n + 1)) * val


def K_cover_free(x0, x, sheet, mode: EvalMode, cfg: VortexConfig,
                 n_max: int, k_max: int,
                 spec: QuadratureSpec | None = None) -> complex:
    """Propagator on the universal cover between lifts differing by ``sheet``.

    Sums the amplitudes of all capped winding paths whose composite deck word
    equals ``sheet``.  No flux enters: this is the free particle on the cover.
    """
    x0, x = as_point(x0), as_point(x)
    spec = spec or QuadratureSpec()
    total = 0.0 + 0.0j
    if segment_deck_element(x0, x, cfg) == sheet:
        total += K_path((), (), x0, x, mode, cfg, spec)
    for word in enumerate_alternating_words(n_max)[1:]:
        for path in enumerate_winding_paths(word, k_max):
            if path_deck_element(path) == sheet:
                total += K_path(word, path.windings, x0, x, mode, cfg, spec)
    return total


def winding_bracket_sum(sigma: float, base_angle: float, s, k_max: int):
    """Flux-weighted finite winding sum of pole brackets at one visit:
    sum over |k| <= k_max of exp(-2 pi i sigma k) * bracket(base + 2 pi k + i s).
    Vectorized over the log ratio ``s``."""
    s = np.asarray(s, dtype=float)
    acc = np.zeros(s.shape, dtype=complex)
    for k in range(-k_max, k_max + 1):
        acc += np.exp(-2j * PI * sigma * k) * pole_bracket(
            base_angle + 2.0 * PI * k + 1j * s
        )
    return acc


def K_schulman_truncated(req: PropagatorRequest, k_max: int) -> complex:
    """Flux-weighted sum over winding paths with windings capped at k_max.

    Equals the sum over all paths of the representation weight of the inverse
    composite deck word times ``K_path``; evaluated with the winding sums
    carried out inside the time integrals, which factorize per visit.
    """
    cfg, flux, mode = req.cfg, req.flux, req.mode
    E = mode_rate(mode)
    T = mode.time
    cf = crossing_factors(req.x0, req.x, flux, cfg)
    d = _distance(req.x0, req.x)
    total = cf.zeta_a * cf.zeta_b * _free_term(E, T, d)
    sec_spec = _sector_tolerance(req.quad, abs(total))
    pol0 = {c: polar_around(req.x0, c, cfg) for c in ("a", "b")}
    pol1 = {c: polar_around(req.x, c, cfg) for c in ("a", "b")}
    for word in enumerate_alternating_words(req.n_max)[1:]:
        n = len(word)
        _, _, raw_delta, radii = _path_setup(word, req.x0, req.x, cfg)
        th0 = pol0[word[0]].theta
        th1 = pol1[word[-1]].theta
        bases = _branch_angles(word, [0] * n, th0, th1, raw_delta)
        sigmas = [flux.of(c) for c in word]
        rsq = np.array(radii) ** 2
        if n == 1:
            g = PI - abs(wrap_angle(raw_delta))
            gap0 = gap1 = g
        else:
            gap0, gap1 = PI - abs(th0), PI - abs(th1)
        reverse, axis = _ridge_axis(radii, gap0, gap1, T)

        def integrand(t, _bases=bases, _sigmas=sigmas, _radii=radii,
                      _rsq=rsq, _rev=reverse):
            if _rev:
                t = t[::-1]
            s = log_ratios(t, _radii)
            prod = np.ones(t.shape[1], dtype=complex)
            for j in range(len(_bases)):
                prod = prod * winding_bracket_sum(_sigmas[j], _bases[j], s[j], k_max)
            gauss = np.exp(-0.25 * E * np.sum(_rsq[:, None] / t, axis=0))
            return prod * gauss / np.prod(t, axis=0)

        val, _ = integrate_simplex(
            integrand, SimplexDomain(n, T), sec_spec, last_axis=axis
        )
        total += E * (2.0**n / (4.0 * PI) ** (n + 1)) * val
    return complex(total)


def schulman_literal(req: PropagatorRequest, k_max: int) -> complex:
    """Reference path-by-path evaluation of the capped winding sum: the
    representation weight of each path's inverse deck word times K_path.
    Exponentially slower than :func:`K_schulman_truncated`; used for
    cross-validation on small caps."""
    cfg, flux, mode = req.cfg, req.flux, req.mode
    g_dir = segment_deck_element(req.x0, req.x, cfg)
    total = rep_value(g_dir.inverse(), flux) * K_path(
        (), (), req.x0, req.x, mode, cfg, req.quad
    )
    for word in enumerate_alternating_words(req.n_max)[1:]:
        for path in enumerate_winding_paths(word, k_max):
            weight = rep_value(path_deck_element(path).inverse(), flux)
            total += weight * K_path(
                path.word, path.windings, req.x0, req.x, mode, cfg, req.quad
            )
    return complex(total)
