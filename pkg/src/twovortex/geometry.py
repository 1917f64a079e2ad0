"""Planar geometry of two marked points (flux carriers) with branch cuts.

The plane carries two distinguished points, ``a`` at the origin and ``b`` at
``(separation, 0)``.  Each carries a straight branch cut pointing away from
the other: the cut of ``a`` is the negative x-axis, the cut of ``b`` the ray
``x > separation`` on the axis.  Angles around each point are measured in an
adapted frame whose zero direction points toward the *other* point and whose
discontinuity sits on that point's own cut, counterclockwise positive.  With
that choice the frame of ``b`` is the ambient frame rotated by pi.

Everything downstream (crossing phases, scattering chains, boundary-condition
checks) is phrased in these adapted frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TWO_PI",
    "PlanePoint",
    "VortexConfig",
    "FrameMap",
    "Flux",
    "PolarAround",
    "CrossingFactor",
    "GeometryError",
    "DegeneratePointError",
    "DegenerateCrossingError",
    "VortexOnSegmentError",
    "wrap_angle",
    "as_point",
    "vortex_position",
    "polar_around",
    "opening_angles",
    "crossing_factors",
    "segment_cut_crossing",
]

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Base class for geometric domain errors."""


class DegeneratePointError(GeometryError):
    """A query point coincides with a flux carrier."""


class DegenerateCrossingError(GeometryError):
    """A segment runs along a branch cut, so its crossing side is undefined."""


class VortexOnSegmentError(GeometryError):
    """A segment passes through a flux carrier."""


def wrap_angle(x: float) -> float:
    """Reduce an angle to the principal interval (-pi, pi].

    The cut point itself maps to +pi, which is the tie-break used everywhere
    for points lying exactly on a branch cut.
    """
    return x - TWO_PI * math.ceil((x - math.pi) / TWO_PI)


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


def as_point(p) -> PlanePoint:
    """Coerce a pair-like object (tuple, list, array, PlanePoint) to PlanePoint."""
    if isinstance(p, PlanePoint):
        return p
    px, py = float(p[0]), float(p[1])
    return PlanePoint(px, py)


@dataclass(frozen=True)
class VortexConfig:
    """Normalized two-carrier geometry: a at the origin, b on the positive x-axis."""

    separation: float

    def __post_init__(self):
        if not (self.separation > 0.0 and math.isfinite(self.separation)):
            raise GeometryError(f"separation must be positive, got {self.separation}")

    @classmethod
    def from_positions(cls, pos_a, pos_b) -> tuple["VortexConfig", "FrameMap"]:
        """Build a config from arbitrary carrier positions.

        Returns the config together with the rigid motion taking original
        coordinates into the normalized frame (a at origin, b on the +x axis).
        """
        pa, pb = as_point(pos_a), as_point(pos_b)
        dx, dy = pb.x - pa.x, pb.y - pa.y
        sep = math.hypot(dx, dy)
        if sep == 0.0:
            raise GeometryError("carrier positions coincide")
        c, s = dx / sep, dy / sep
        return cls(sep), FrameMap(shift_x=pa.x, shift_y=pa.y, cos=c, sin=s)


@dataclass(frozen=True)
class FrameMap:
    """Rigid motion mapping original coordinates to the normalized frame."""

    shift_x: float
    shift_y: float
    cos: float
    sin: float

    def apply(self, p) -> PlanePoint:
        q = as_point(p)
        ux, uy = q.x - self.shift_x, q.y - self.shift_y
        # rotate by the inverse of the carrier-axis rotation
        return PlanePoint(self.cos * ux + self.sin * uy, -self.sin * ux + self.cos * uy)


@dataclass(frozen=True)
class Flux:
    """Flux fractions at the two carriers, each reduced to [0, 1)."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name, v in (("alpha", self.alpha), ("beta", self.beta)):
            if not (0.0 <= v < 1.0):
                raise ValueError(f"{name} must lie in [0, 1), got {v}")

    def of(self, which: str) -> float:
        if which == "a":
            return self.alpha
        if which == "b":
            return self.beta
        raise ValueError(f"unknown carrier {which!r}")


def vortex_position(which: str, cfg: VortexConfig) -> PlanePoint:
    if which == "a":
        return PlanePoint(0.0, 0.0)
    if which == "b":
        return PlanePoint(cfg.separation, 0.0)
    raise ValueError(f"unknown carrier {which!r}")


@dataclass(frozen=True)
class PolarAround:
    """Polar data of a point in the adapted frame of one carrier."""

    center: str
    r: float
    theta: float


def polar_around(p, center: str, cfg: VortexConfig) -> PolarAround:
    """Adapted-frame polar coordinates of ``p`` about one carrier.

    The angular zero direction points toward the other carrier and the
    discontinuity lies on the carrier's own cut; theta is in (-pi, pi] with
    on-cut points tie-broken to +pi.  Raises DegeneratePointError if ``p``
    coincides with the carrier.
    """
    q = as_point(p)
    c = vortex_position(center, cfg)
    ux, uy = q.x - c.x, q.y - c.y
    r = math.hypot(ux, uy)
    if r == 0.0:
        raise DegeneratePointError(f"point coincides with carrier {center!r}")
    if uy == 0.0:
        uy = 0.0  # normalize -0.0 so the on-cut tie-break is stable
    if center == "a":
        theta = math.atan2(uy, ux)
    else:
        theta = wrap_angle(math.atan2(uy, ux) - math.pi)
    return PolarAround(center, r, theta)


def opening_angles(word, x0, x, cfg: VortexConfig) -> tuple[float, float]:
    """End angles of a scattering chain: x0 seen from the first carrier of
    ``word`` and x seen from the last, both in adapted frames.

    Requires ``len(word) >= 2``; single-carrier chains use the raw frame
    difference instead and never call this.
    """
    if len(word) < 2:
        raise ValueError("opening_angles requires a word of length >= 2")
    th0 = polar_around(x0, word[0], cfg).theta
    th = polar_around(x, word[-1], cfg).theta
    return th0, th


@dataclass(frozen=True)
class CrossingFactor:
    """Winding offsets and phases picked up by a straight segment.

    ``eta_*`` is the angular branch offset in {0, +-2pi} for the frame of each
    carrier; ``zeta_*`` the corresponding flux phase exp(i * flux * eta).
    """

    eta_a: float
    eta_b: float
    zeta_a: complex
    zeta_b: complex


def _axis_interval_checks(px: float, qx: float, cfg: VortexConfig) -> None:
    # Both endpoints on the carrier axis: the open segment may contain a
    # carrier or run along a cut, both of which are domain errors.
    lo, hi = min(px, qx), max(px, qx)
    if lo < hi:
        if lo < 0.0 < hi:
            raise VortexOnSegmentError("segment passes through carrier a")
        if lo < cfg.separation < hi:
            raise VortexOnSegmentError("segment passes through carrier b")
        if hi <= 0.0:
            raise DegenerateCrossingError("segment runs along the cut of a")
        if lo >= cfg.separation:
            raise DegenerateCrossingError("segment runs along the cut of b")


def segment_cut_crossing(p, q, cfg: VortexConfig) -> tuple[str, int] | None:
    """Transversal cut crossing of the open segment p -> q, if any.

    Returns ``(carrier, winding)`` where ``winding`` is the signed number of
    counterclockwise turns added around that carrier (+1 or -1), or None when
    no cut is crossed.  A straight segment can cross at most one cut.  Raises
    VortexOnSegmentError / DegenerateCrossingError for degenerate geometry.
    """
    pp, qq = as_point(p), as_point(q)
    py = 0.0 if pp.y == 0.0 else pp.y
    qy = 0.0 if qq.y == 0.0 else qq.y
    if py == 0.0 and qy == 0.0:
        _axis_interval_checks(pp.x, qq.x, cfg)
        return None
    if py == 0.0 or qy == 0.0 or (py > 0.0) == (qy > 0.0):
        return None  # touches the axis at most at an endpoint
    xc = pp.x + (qq.x - pp.x) * (-py) / (qy - py)
    if xc == 0.0:
        raise VortexOnSegmentError("segment passes through carrier a")
    if xc == cfg.separation:
        raise VortexOnSegmentError("segment passes through carrier b")
    upward = qy > py
    if xc < 0.0:
        # crossing the cut of a; moving upward is clockwise around a
        return ("a", -1 if upward else 1)
    if xc > cfg.separation:
        # crossing the cut of b; moving upward is counterclockwise around b
        return ("b", 1 if upward else -1)
    return None  # crosses the axis strictly between the carriers: no cut


def crossing_factors(x0, x, flux: Flux, cfg: VortexConfig) -> CrossingFactor:
    """Branch offsets and flux phases of the straight segment x0 -> x.

    For each carrier, the raw adapted-frame angle difference delta lies in
    (-2pi, 2pi); its non-principal part eta = delta - wrap(delta) is 0 when
    the segment avoids that carrier's cut and +-2pi when it crosses.  The
    phase is exp(i * flux * eta).  Degenerate segments (through a carrier, or
    running along a cut) raise the corresponding geometry error.
    """
    # run the segment classification first so degenerate geometry surfaces
    # as the specific error rather than as an angle artifact
    segment_cut_crossing(x0, x, cfg)
    etas = {}
    zetas = {}
    for which in ("a", "b"):
        d = polar_around(x, which, cfg).theta - polar_around(x0, which, cfg).theta
        eta = d - wrap_angle(d)
        etas[which] = eta
        zetas[which] = complex(np.exp(1j * flux.of(which) * eta))
    return CrossingFactor(etas["a"], etas["b"], zetas["a"], zetas["b"])
