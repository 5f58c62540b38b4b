"""
A tour of hybrid time domains
=============================

A time scale is any nonempty closed subset of the reals.  The same
derivative and integral definitions specialize to ordinary calculus on
intervals and to difference calculus on grids, so one solver can walk
domains that mix both.
"""

import math

from tsdecay import (
    ArithmeticGrid,
    DenseInterval,
    TimeScale,
    delta_derivative,
    delta_integral,
)

# Four classic domains plus one that glues an interval to a grid.
Z = TimeScale.integers()
H = TimeScale.h_grid(0.5)
G = TimeScale.q_grid(2.0, nmin=-2)          # ..., 0.25, 0.5, 1, 2, 4, ...
R = TimeScale.reals()
M = TimeScale([DenseInterval(0.0, 1.0), ArithmeticGrid(1.5, 0.5, None)])

print("forward jump sigma and graininess mu at a few points")
for name, ts, t in [("Z", Z, 3.0), ("0.5Z", H, 3.0), ("2^Z", G, 4.0), ("R", R, 3.0), ("mixed", M, 1.0)]:
    print(f"  {name:>5}: sigma({t}) = {ts.sigma(t)}, mu({t}) = {ts.mu(t)}")

# On the mixed scale the point 1.0 is the right edge of the interval:
# it is right-scattered even though everything left of it is dense.
print("\nmixed scale around the seam:")
for t in (0.9, 1.0, 1.5):
    print(f"  t={t}: right-scattered={M.is_right_scattered(t)}, mu={M.mu(t)}")

# The delta derivative of t^2 is t + sigma(t): 2t on R, 2t+mu on grids.
f = lambda t: t * t
print("\ndelta derivative of t^2 at t=2:")
for name, ts in [("Z", Z), ("0.5Z", H), ("2^Z", G), ("R", R)]:
    d = delta_derivative(ts, f, 2.0)
    print(f"  {name:>5}: {d}   (t + sigma(t) = {2.0 + ts.sigma(2.0)})")

# Integrals interpolate between sums and Riemann integrals.  Over [0, 4]
# on Z the integral of t^2 is 0+1+4+9 = 14; on R it is 64/3.
print("\nintegral of t^2 over [0, 4]:")
for name, ts in [("Z", Z), ("0.5Z", H), ("R", R)]:
    v = delta_integral(ts, f, 0.0, 4.0)
    print(f"  {name:>5}: {v}")
print(f"  exact on R: {64 / 3}")

# The mixed scale splits the window into a quadrature piece and a sum.
v = delta_integral(M, f, 0.0, 3.0)
hand = 1.0 / 3 + 0.5 * (1.0 + 1.5**2 + 2.0**2 + 2.5**2)
print(f"\nmixed [0,3]: {v} vs hand value {hand}")

# decompose() is the walking primitive the simulator uses: it reports
# maximal dense runs and individual scattered steps.
print("\ndecomposition of [0, 3] on the mixed scale:")
for piece in M.decompose(0.0, 3.0):
    print(f"  {piece}")
