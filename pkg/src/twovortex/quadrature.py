"""Quadrature engines for time-ordered simplex integrals and line integrals.

The simplex integrals come from summing over intermediate scattering times:
an n-visit path contributes an integral over t_0..t_n > 0 with fixed total
time.  The last time is eliminated against the constraint and the remaining
block is mapped to the unit cube by a stick-breaking substitution; panels of
Gauss-Legendre nodes with dyadic grading toward the cube faces resolve the
integrable edge behavior.  Refinement stops when two consecutive levels agree
within tolerance; the reported error estimate is ten times that difference.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

__all__ = [
    "QuadratureSpec",
    "SimplexDomain",
    "SimplexNonconvergenceError",
    "integrate_simplex",
    "integrate_line",
]

MAX_DIM = 8
# cap on the node-tensor size held in memory at once; additional axes are
# looped over, and levels whose total node count exceeds the hard budget
# abort the refinement
_TENSOR_NODES = 4_000_000
_NODE_BUDGET = 400_000_000


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 8
    points_per_panel: int = 10

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1 or self.points_per_panel < 2:
            raise ValueError("need max_subdivisions >= 1 and points_per_panel >= 2")


@dataclass(frozen=True)
class SimplexDomain:
    """Open simplex t_0..t_dim > 0, sum = total; ``dim`` free variables."""

    dim: int
    total: float

    def __post_init__(self):
        if not (1 <= self.dim <= MAX_DIM):
            raise ValueError(f"simplex dimension must be in 1..{MAX_DIM}")
        if not (self.total > 0.0 and math.isfinite(self.total)):
            raise ValueError("total time must be positive")


class SimplexNonconvergenceError(RuntimeError):
    """Raised when panel refinement exhausts its budget before converging."""

    def __init__(self, message: str, value: complex, err_est: float):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


_MAX_EDGE_DEPTH = 48


def _graded_edges(level: int, extra0: int = 0, extra1: int = 0) -> np.ndarray:
    """Dyadic panel edges of [0, 1] refined toward both endpoints.

    ``extra0`` / ``extra1`` push the grading at the respective endpoint that
    many dyadic levels deeper than the standard ``2**-level`` floor; each
    refinement level still deepens both ends by one, so the convergence
    estimator keeps seeing level-to-level changes."""
    d0 = min(level + extra0, _MAX_EDGE_DEPTH)
    d1 = min(level + extra1, _MAX_EDGE_DEPTH)
    if d0 == 0 and d1 == 0:
        return np.array([0.0, 1.0])
    left = [2.0 ** (-k) for k in range(d0, 0, -1)]
    right = [1.0 - 2.0 ** (-k) for k in range(2, d1 + 1)]
    return np.array([0.0] + left + right + [1.0])


def _panel_nodes(level: int, order: int, extra0: int = 0,
                 extra1: int = 0) -> tuple[np.ndarray, np.ndarray]:
    edges = _graded_edges(level, extra0, extra1)
    xi, wi = leggauss(order)
    nodes, wts = [], []
    for e0, e1 in zip(edges[:-1], edges[1:]):
        half = 0.5 * (e1 - e0)
        nodes.append(0.5 * (e0 + e1) + half * xi)
        wts.append(half * wi)
    return np.concatenate(nodes), np.concatenate(wts)


def _sinh_stretch(nodes: np.ndarray, wts: np.ndarray, center: float,
                  width: float) -> tuple[np.ndarray, np.ndarray]:
    """Remap unit-interval nodes to cluster around ``center`` at scale
    ``width`` (a sinh substitution).  Used to resolve narrow integrand ridges
    whose location along one axis is known in advance; for width >> 1 the map
    is close to the identity."""
    a = math.asinh((0.0 - center) / width)
    b = math.asinh((1.0 - center) / width)
    arg = a + (b - a) * nodes
    mapped = center + width * np.sinh(arg)
    jac = width * (b - a) * np.cosh(arg)
    return mapped, wts * jac


def _tail_depth(pre_gap: float) -> int:
    """Extra dyadic levels needed so the end panels resolve a boundary layer
    whose pre-image thickness is ``pre_gap``."""
    if not (0.0 < pre_gap < 0.25):
        return 0
    return min(_MAX_EDGE_DEPTH, math.ceil(2.0 - math.log2(pre_gap)))


def _last_axis_nodes(level: int, order: int,
                     plan: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the specially treated final cube axis.

    ``plan`` is ``(center, width)`` or ``(center, width, layer0, layer1)``:
    a sinh stretch clustering nodes around ``center`` at scale ``width``,
    optionally with dyadic tail panels deep enough to resolve boundary
    layers of the given thicknesses at the two endpoints (thicknesses are
    measured in the mapped variable and translated through the stretch)."""
    center, width = plan[0], plan[1]
    a = math.asinh((0.0 - center) / width)
    b = math.asinh((1.0 - center) / width)

    def pre(v: float) -> float:
        return (math.asinh((v - center) / width) - a) / (b - a)

    extra0 = extra1 = 0
    if len(plan) > 2 and plan[2] is not None and plan[2] < 0.25:
        extra0 = _tail_depth(pre(max(plan[2], 2.0**-_MAX_EDGE_DEPTH)))
    if len(plan) > 3 and plan[3] is not None and plan[3] < 0.25:
        extra1 = _tail_depth(
            1.0 - pre(1.0 - max(plan[3], 2.0**-_MAX_EDGE_DEPTH))
        )
    nodes, wts = _panel_nodes(level, order, extra0, extra1)
    return _sinh_stretch(nodes, wts, center, width)


def _stick_break(u: np.ndarray, total: float) -> tuple[np.ndarray, np.ndarray]:
    """Map cube points u (dim, N) to simplex times t (dim+1, N) with jacobian."""
    dim, n = u.shape
    t = np.empty((dim + 1, n))
    jac = np.full(n, total**dim)
    remaining = np.full(n, total)
    for i in range(dim):
        t[i] = remaining * u[i]
        remaining = remaining * (1.0 - u[i])
        if i < dim - 1:
            jac = jac * (1.0 - u[i]) ** (dim - 1 - i)
    t[dim] = remaining
    return t, jac


def _level_value(f, domain: SimplexDomain, level: int, order: int,
                 last_axis: tuple | None) -> complex:
    nodes, wts = _panel_nodes(level, order)
    m = nodes.size
    dim = domain.dim
    if last_axis is not None:
        last_nodes, last_wts = _last_axis_nodes(level, order, last_axis)
    else:
        last_nodes, last_wts = nodes, wts
    if float(m) ** (dim - 1) * last_nodes.size > _NODE_BUDGET:
        raise SimplexNonconvergenceError(
            f"refinement level {level} needs more than {_NODE_BUDGET} nodes "
            f"in dimension {dim}",
            0.0 + 0.0j,
            math.inf,
        )
    axes_nodes = [nodes] * (dim - 1) + [last_nodes]
    axes_wts = [wts] * (dim - 1) + [last_wts]
    inner = dim
    while inner > 1 and math.prod(ax.size for ax in axes_nodes[dim - inner:]) > _TENSOR_NODES:
        inner -= 1
    outer = dim - inner
    # cached tensor grid over the trailing `inner` axes
    grids = np.meshgrid(*axes_nodes[outer:], indexing="ij")
    inner_u = np.stack([g.ravel() for g in grids])
    inner_w = np.ones(1)
    for w_ax in axes_wts[outer:]:
        inner_w = np.multiply.outer(inner_w, w_ax)
    inner_w = inner_w.ravel()
    total = 0.0 + 0.0j
    if outer == 0:
        t, jac = _stick_break(inner_u, domain.total)
        return complex(np.sum(f(t) * jac * inner_w))
    for idx in itertools.product(range(m), repeat=outer):
        u = np.vstack(
            [np.full(inner_u.shape[1], axes_nodes[pos][i]) for pos, i in enumerate(idx)]
            + [inner_u]
        )
        w_out = math.prod(axes_wts[pos][i] for pos, i in enumerate(idx))
        t, jac = _stick_break(u, domain.total)
        total += w_out * np.sum(f(t) * jac * inner_w)
    return complex(total)


def integrate_simplex(f, domain: SimplexDomain, spec: QuadratureSpec,
                      last_axis: tuple | None = None) -> tuple[complex, float]:
    """Integrate ``f`` over the time simplex.

    ``f`` maps an array of times with shape (dim+1, N) to complex values of
    shape (N,).  Returns (value, err_est); raises
    SimplexNonconvergenceError when consecutive refinement levels fail to
    agree within max(abs_tol, rel_tol * |value|) before the subdivision
    budget runs out.

    ``last_axis=(center, width)`` concentrates nodes of the final unit-cube
    axis near ``center`` on scale ``width`` via a sinh map; use it when the
    integrand has a narrow ridge controlled by the last stick-breaking ratio.
    Two further optional entries ``(..., layer0, layer1)`` give thicknesses
    of boundary layers at the axis endpoints (e.g. the short-time layer of a
    Gaussian with a small prefactor radius); the end panels are then graded
    deep enough to resolve them.
    """
    prev = None
    err = math.inf
    value = 0.0 + 0.0j
    for level in range(spec.max_subdivisions + 1):
        value = _level_value(f, domain, level, spec.points_per_panel, last_axis)
        if prev is not None:
            err = 10.0 * abs(value - prev)
            if err <= max(spec.abs_tol, spec.rel_tol * abs(value)):
                return value, err
        prev = value
    raise SimplexNonconvergenceError(
        f"simplex quadrature did not converge in {spec.max_subdivisions} refinements "
        f"(last error estimate {err:.3e})",
        value,
        err,
    )


def integrate_line(f, half_width: float, spec: QuadratureSpec) -> tuple[complex, float]:
    """Integrate a decaying complex integrand over [-W, W].

    The truncation tail is estimated from the observed decay of |f| near the
    endpoints and folded into the returned error estimate; when the tail
    dominates the requested tolerance a warning is emitted.
    """
    if not (half_width > 0.0 and math.isfinite(half_width)):
        raise ValueError("half_width must be positive and finite")
    w = half_width
    re, re_err = quad(
        lambda x: f(x).real, -w, w, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=400
    )
    im, im_err = quad(
        lambda x: f(x).imag, -w, w, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=400
    )
    value = complex(re, im)
    tail = 0.0
    for sgn in (-1.0, 1.0):
        fa, fb = abs(f(sgn * 0.9 * w)), abs(f(sgn * w))
        if fb == 0.0:
            continue
        if 0.0 < fb < fa:
            rate = math.log(fa / fb) / (0.1 * w)
            tail += fb / rate
        else:
            tail += fb * w  # no decay detected; charge a whole width
    err = re_err + im_err + tail
    if tail > max(spec.abs_tol, spec.rel_tol * abs(value)):
        warnings.warn(
            f"line-quadrature tail estimate {tail:.2e} dominates the tolerance",
            stacklevel=2,
        )
    return value, err
