"""
Capped winding sums converging to the closed formula
====================================================

The propagator can also be assembled by summing free-cover paths over
their winding numbers, with the flux entering as a phase per winding.
Capping the windings at |k| <= k_max leaves a truncation tail; the
winding phases cancel the 1/k^2 bracket terms down to a tail of order
1/k_max^2 for any fractional flux, with a prefactor that grows as either
flux approaches an integer.  The closed evaluation needs no cap at all.
"""

from twovortex import (
    EvalMode, Flux, K_closed, K_schulman_truncated, PropagatorRequest,
    QuadratureSpec, VortexConfig,
)

cfg = VortexConfig(separation=2.0)
mode = EvalMode("euclidean", 1.0)
quad = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-12)
x0, x1 = (1.3, 0.6), (0.4, -0.9)

caps = [5, 10, 20, 50, 100, 200]
print(f"{'k_max':>6}  {'rel dev (0.5, 0.5)':>20}  {'rel dev (0.3, 0.7)':>20}")
rows = {}
for flux in (Flux(0.5, 0.5), Flux(0.3, 0.7)):
    req = PropagatorRequest(x0, x1, mode, flux, cfg, n_max=2, quad=quad)
    closed = K_closed(req).value
    rows[flux] = [abs(K_schulman_truncated(req, k) - closed) / abs(closed)
                  for k in caps]
for i, k in enumerate(caps):
    print(f"{k:6d}  {rows[Flux(0.5, 0.5)][i]:20.3e}  "
          f"{rows[Flux(0.3, 0.7)][i]:20.3e}")

print("\nobserved decay order between successive caps (0.5, 0.5):")
import math
r = rows[Flux(0.5, 0.5)]
for i in range(1, len(caps)):
    order = math.log(r[i - 1] / r[i]) / math.log(caps[i] / caps[i - 1])
    print(f"  k {caps[i-1]:>3} -> {caps[i]:>3}:  {order:.2f}")
