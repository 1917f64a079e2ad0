"""Kernel building blocks: free propagator, vertex factors, scattering chains.

Everything is written for a unit-diffusion / unit-mass convention: the
Euclidean (heat) kernel is exp(-r^2/4t)/(4 pi t) and the real-time kernel its
analytic continuation t -> i t.  Complex evaluation times on the lower-half
ray t = exp(-i phi) T are supported through :class:`EvalMode`; phi = pi/2
reproduces the Euclidean values exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Flux

__all__ = [
    "EvalMode",
    "mode_rate",
    "kernel_Z",
    "pole_bracket",
    "vertex_V",
    "chain_factor",
    "log_ratios",
    "chain_S",
    "CHAIN_VARIANTS",
]

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class EvalMode:
    """Evaluation contour for the propagator.

    kind="euclidean": positive diffusion time ``time``.
    kind="rotated":   complex time exp(-i phi) * time with phi in (0, pi/2];
                      phi = pi/2 coincides with the Euclidean evaluation.
    """

    kind: str
    time: float
    phi: float = 0.0

    def __post_init__(self):
        if self.kind not in ("euclidean", "rotated"):
            raise ValueError(f"unknown mode kind {self.kind!r}")
        if not (self.time > 0.0 and math.isfinite(self.time)):
            raise ValueError(f"mode time must be positive, got {self.time}")
        if self.kind == "rotated" and not (0.0 < self.phi <= math.pi / 2.0):
            raise ValueError("contour angle must lie in (0, pi/2]")

    def complex_time(self) -> complex:
        if self.kind == "euclidean":
            # Euclidean time sits at the phi = pi/2 end of the contour
            return complex(0.0, -self.time)
        return self.time * np.exp(-1j * self.phi)


def mode_rate(mode: EvalMode) -> complex:
    """Complex decay rate multiplying r^2/(4u) factors in contour integrals.

    Equals 1 for Euclidean evaluation and exp(i(phi - pi/2)) on the rotated
    contour; its real part sin(phi) > 0 guarantees absolute convergence.
    """
    if mode.kind == "euclidean":
        return 1.0 + 0.0j
    return complex(np.exp(1j * (mode.phi - math.pi / 2.0)))


def kernel_Z(t, r: float, visible: int = 1, *, euclidean: bool = False) -> complex:
    """Free kernel on the plane at (possibly complex) time ``t``.

    With ``euclidean=True``, t must be a positive real diffusion time and the
    value is the Gaussian heat kernel.  Otherwise t is a unitary-evolution
    time: real negative t gives 0 (no backward propagation), t = 0 is an
    error, and complex t on the lower half-plane evaluates the continued
    kernel exp(i r^2 / 4t) / (4 pi i t).

    ``visible`` in {0, 1} multiplies the result (sightline indicator on the
    cover).
    """
    if visible not in (0, 1):
        raise ValueError("visible must be 0 or 1")
    if euclidean:
        tt = float(t)
        if tt <= 0.0:
            raise ValueError("euclidean time must be positive")
        return visible * math.exp(-r * r / (4.0 * tt)) / (FOUR_PI * tt)
    tc = complex(t)
    if tc == 0:
        raise ValueError("kernel is singular at time zero")
    if tc.imag == 0.0 and tc.real < 0.0:
        return 0.0 + 0.0j
    return visible * np.exp(1j * r * r / (4.0 * tc)) / (FOUR_PI * 1j * tc)


def pole_bracket(w):
    """Difference of simple poles at +-pi: 1/(w - pi) - 1/(w + pi).

    Accepts complex scalars or arrays.  This is the elementary factor whose
    winding sums build the scattering chains.
    """
    w = np.asarray(w, dtype=complex)
    out = 1.0 / (w - math.pi) - 1.0 / (w + math.pi)
    if out.ndim == 0:
        return complex(out)
    return out


def vertex_V(theta: float, r1: float, r2: float, t1, t2) -> complex:
    """Single-scattering vertex factor.

    theta is the (branch-resolved) angle swept at the vertex; the time/radius
    combination enters through ell = log(t2 r1 / (t1 r2)).  Poles occur when
    theta + i*ell hits +-pi; that raises.
    """
    ell = np.log(np.asarray(t2, dtype=complex) * r1 / (np.asarray(t1, dtype=complex) * r2))
    w = theta + 1j * ell
    if np.any(np.abs(w - math.pi) < 1e-300) or np.any(np.abs(w + math.pi) < 1e-300):
        raise ArithmeticError("vertex factor pole at theta + i log-ratio = +-pi")
    out = 2j * pole_bracket(w)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def chain_factor(mu: float, s, theta: float):
    """Exponentially weighted logistic factor exp(-mu(s - i theta)) / (1 + exp(-s + i theta)).

    Stable for large |s| of either sign (the naive form overflows for s << 0).
    Vectorized over ``s``.
    """
    s = np.asarray(s, dtype=float)
    phase = np.exp(1j * mu * theta)
    # the branch np.where discards may overflow to inf/inf = nan; that is fine
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.exp(-mu * s) * phase / (1.0 + np.exp(-s + 1j * theta))
        flipped = np.exp((1.0 - mu) * s) * phase / (np.exp(s) + np.exp(1j * theta))
    out = np.where(s >= 0.0, direct, flipped)
    if out.ndim == 0:
        return complex(out)
    return out


def log_ratios(times, radii):
    """Per-leg log ratios s_j = log(t_j r_{j-1} / (t_{j-1} r_j)), j = 1..n.

    ``times`` has n+1 entries (optionally with trailing vector axes),
    ``radii`` n+1 scalars.  Returns an array of shape (n, ...).
    """
    t = np.asarray(times, dtype=float)
    r = np.asarray(radii, dtype=float)
    if t.shape[0] != r.shape[0]:
        raise ValueError("times and radii must have equal leading length")
    if t.shape[0] < 2:
        raise ValueError("need at least two legs")
    logt = np.log(t)
    logr = np.log(r).reshape((-1,) + (1,) * (t.ndim - 1))
    return (logt[1:] - logt[:-1]) + (logr[:-1] - logr[1:])


CHAIN_VARIANTS = ("matched", "printed_mixed")


def chain_S(word, s, theta: float, theta0: float, flux: Flux, variant: str = "matched"):
    """Scattering-chain weight for a carrier word of length n >= 2.

    ``s`` holds the n per-leg log ratios (shape (n,) or (n, N)).  The chain is
    a product of one factor per visit: the final visit carries the opening
    angle ``theta`` of the arrival point, the first visit the *negated*
    opening angle of the departure point, and interior visits angle zero:

        prod_j sin(pi sigma_j)/pi * chain_factor(sigma_j, s_j, angle_j)

    ``variant`` selects how interior factors pair numerator and denominator
    indices: "matched" uses the same leg for both (the default; this is the
    form consistent with the winding-sum construction), "printed_mixed" pairs
    the numerator of leg j with the denominator of leg j+1 (kept as a
    diagnostic alternative).

    Angles must satisfy |theta|, |theta0| < pi; on that boundary the final or
    first factor degenerates and a ValueError is raised.
    """
    n = len(word)
    if n < 2:
        raise ValueError("chain_S requires a word of length >= 2")
    for u, v in zip(word, word[1:]):
        if u == v:
            raise ValueError("consecutive visits to the same carrier")
    if variant not in CHAIN_VARIANTS:
        raise ValueError(f"unknown chain variant {variant!r}")
    if not (abs(theta) < math.pi and abs(theta0) < math.pi):
        raise ValueError("opening angles must lie strictly inside (-pi, pi)")
    s = np.asarray(s, dtype=float)
    if s.shape[0] != n:
        raise ValueError("need one log ratio per visit")
    sigmas = [flux.of(c) for c in word]
    value = np.ones(s.shape[1:], dtype=complex) if s.ndim > 1 else complex(1.0)
    value = value * (math.sin(math.pi * sigmas[-1]) / math.pi) * chain_factor(
        sigmas[-1], s[-1], theta
    )
    for j in range(n - 2, 0, -1):  # interior visits, 1-based j = 2..n-1
        mu = sigmas[j]
        if variant == "matched":
            fac = chain_factor(mu, s[j], 0.0)
        else:
            with np.errstate(over="ignore"):
                fac = np.exp(-mu * s[j]) / (1.0 + np.exp(-s[j + 1]))
        value = value * (math.sin(math.pi * mu) / math.pi) * fac
    value = value * (math.sin(math.pi * sigmas[0]) / math.pi) * chain_factor(
        sigmas[0], s[0], -theta0
    )
    bad = ~np.isfinite(np.asarray(value))
    if np.any(bad):
        raise ArithmeticError("chain factor pole or overflow in chain_S")
    if np.ndim(value) == 0 and not isinstance(value, complex):
        return complex(value)
    return value
