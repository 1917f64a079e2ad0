"""Quantum propagator for a charged particle moving around two magnetic
flux lines piercing the plane.

The wavefunction picks up a fixed phase for every loop around either flux
carrier, so the propagator lives on an infinite-sheeted cover of the twice
punctured plane.  This package evaluates it three ways and cross-checks
them:

* a closed formula summing finitely many scattering sequences, each a low
  dimensional time integral (`K_closed`);
* the free propagator between lifts on the universal cover, summed over
  winding classes with phase weights (`K_schulman_truncated`);
* a single-carrier Bessel series in the limit where the other carrier is
  far away (`twovortex.verify.check_one_vortex_oracle`).

Geometry conventions: carriers sit at the origin and at ``(separation, 0)``;
the branch cuts run along the negative x-axis and along the positive x-axis
beyond the second carrier.
"""

from .geometry import (
    DegenerateCrossingError,
    DegeneratePointError,
    Flux,
    FrameMap,
    GeometryError,
    PlanePoint,
    VortexConfig,
    VortexOnSegmentError,
    as_point,
    crossing_factors,
    opening_angles,
    polar_around,
    segment_cut_crossing,
    wrap_angle,
)
from .cover import (
    GroupWord,
    IDENTITY,
    LiftedPoint,
    WindingPath,
    chi_visible,
    enumerate_alternating_words,
    enumerate_winding_paths,
    path_deck_element,
    rep_value,
    segment_deck_element,
)
from .kernels import (
    CHAIN_VARIANTS,
    EvalMode,
    chain_S,
    chain_factor,
    kernel_Z,
    mode_rate,
    pole_bracket,
    vertex_V,
)
from .quadrature import (
    QuadratureSpec,
    SimplexDomain,
    SimplexNonconvergenceError,
    integrate_line,
    integrate_simplex,
)
from .propagator import (
    K_closed,
    K_cover_free,
    K_path,
    K_schulman_truncated,
    PropagatorRequest,
    PropagatorResult,
    ValidityDomainError,
    VisibilityError,
    schulman_literal,
    winding_bracket_sum,
)
from . import verify

__version__ = "0.1.0"

__all__ = [
    "CHAIN_VARIANTS",
    "DegenerateCrossingError",
    "DegeneratePointError",
    "EvalMode",
    "Flux",
    "FrameMap",
    "GeometryError",
    "GroupWord",
    "IDENTITY",
    "K_closed",
    "K_cover_free",
    "K_path",
    "K_schulman_truncated",
    "LiftedPoint",
    "PlanePoint",
    "PropagatorRequest",
    "PropagatorResult",
    "QuadratureSpec",
    "SimplexDomain",
    "SimplexNonconvergenceError",
    "ValidityDomainError",
    "VisibilityError",
    "VortexConfig",
    "VortexOnSegmentError",
    "WindingPath",
    "as_point",
    "chain_S",
    "chain_factor",
    "chi_visible",
    "crossing_factors",
    "enumerate_alternating_words",
    "enumerate_winding_paths",
    "integrate_line",
    "integrate_simplex",
    "kernel_Z",
    "mode_rate",
    "opening_angles",
    "path_deck_element",
    "polar_around",
    "rep_value",
    "schulman_literal",
    "segment_cut_crossing",
    "segment_deck_element",
    "verify",
    "vertex_V",
    "winding_bracket_sum",
    "wrap_angle",
]
