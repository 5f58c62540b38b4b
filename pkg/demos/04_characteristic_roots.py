"""
Characteristic roots of delayed equations
=========================================

For x^delta = -p x + sum_i q_i x(delta_minus(h_i, t))^ell the decay
rate candidate at time t is the largest negative root lambda(t) of a
characteristic polynomial built from generalized exponentials.  The
admissible interval is S(t) = (-1/mu_tilde(t), 0), where mu_tilde is
the largest graininess seen over the delay window: on a grid you cannot
decay faster than one full step.
"""

import numpy as np

from tsdecay import (
    HalanayProblem,
    TimeScale,
    builtin_shift,
    char_poly,
    default_root_grid,
    largest_root,
    make_delay_spec,
    root_field,
    s_window,
)

# Reference problem on the integers: p=0.5, instantaneous gain 0.2,
# one-step delayed gain 0.1.  The characteristic polynomial reduces to
# the quadratic k^2 + 1.3 k + 0.2.
Z = TimeScale.integers()
spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0))
prob = HalanayProblem(spec, "sum_power", 0.5, (0.2, 0.1))

lam, residual = largest_root(prob, 3.0)
oracle = (-1.3 + np.sqrt(1.3**2 - 0.8)) / 2
print(f"integer problem: lambda = {lam}")
print(f"quadratic oracle: {oracle},  |P(lambda)| = {residual:.2e}")
print(f"admissible window S(3) = {s_window(prob, 3.0)}")

# The polynomial itself is an ordinary callable; sign change visible.
for k in (-0.5, -0.3, -0.1, 0.0):
    print(f"  P(3, {k:+.1f}) = {char_poly(prob, 3.0, k):+.6f}")

# Continuous classical case: p=2, q=1, lag 1.  The root solves
# k + 2 = exp(-k), the textbook transcendental equation.
R = TimeScale.reals()
rspec = make_delay_spec(builtin_shift("translation", R, t0=0.0), (0.0, 1.0))
rprob = HalanayProblem(rspec, "sum_power", 2.0, (0.0, 1.0))
lam, _ = largest_root(rprob, 5.0)
print(f"\ncontinuous problem: lambda = {lam}   (k+2-exp(-k) = {lam + 2 - np.exp(-lam):.2e})")

# On the doubling grid the window shrinks like 1/t and the root moves
# with it.  root_field samples lambda along a grid and flags jumps.
G = TimeScale.q_grid(2.0, nmin=-1)
gspec = make_delay_spec(builtin_shift("scaling", G, t0=1.0), (1.0, 2.0))
gprob = HalanayProblem(gspec, "sum_power", 0.6, (0.0, 0.3))
field = root_field(gprob, [float(2**j) for j in range(0, 6)])
print("\ndoubling grid root field:")
for t, lam, lo in zip(field.grid, field.lam, field.s_lower):
    print(f"  t={t:5g}: lambda={lam:+.6f}, S(t) lower edge {lo:+.6f}")

# Other polynomial shapes: sup form (worst delayed state over the
# window) and product form (geometric mixture of delays).
sup_prob = HalanayProblem(spec, "sup", 0.5, (0.2,))
print(f"\nsup form root: {largest_root(sup_prob, 3.0)[0]}")
mix = HalanayProblem(spec, "product", 0.5, (0.15, 0.2), alpha=(0.3, 0.7))
print(f"product form root: {largest_root(mix, 3.0)[0]}")

# default_root_grid picks scattered points plus dense samples; handy
# before a simulation run.
print(f"\ndefault grid out to t=10 on Z: {default_root_grid(prob, 10.0)[:6]} ...")
