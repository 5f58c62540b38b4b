"""
Generalized exponential functions
=================================

e_p(t, s) solves y^delta = p(t) y with y(s) = 1.  On the reals it is the
ordinary exponential exp(p (t-s)); on grids it is a product of
(1 + mu p) factors.  Decay certificates later in this package are built
from e_lambda with lambda < 0, so the behavior for negative rates and
the regressivity boundary matter most.
"""

import math

from tsdecay import TimeScale, exp_ts, ominus
from tsdecay.errors import NegativeOneplus
from tsdecay.tsexp import check_exp_identities, exp_bounds_check

Z = TimeScale.integers()
R = TimeScale.reals()
G = TimeScale.q_grid(2.0, nmin=0)

# Constant rate on the integers: e_p(t, 0) = (1+p)^t.
for p in (0.2, -0.5):
    v = exp_ts(Z, p, 5.0, 0.0)
    print(f"Z:  e_{p}(5, 0) = {v}   vs (1+p)^5 = {(1 + p) ** 5}")

# Same rate on the reals.
print(f"R:  e_0.2(5, 0) = {exp_ts(R, 0.2, 5.0, 0.0)}   vs exp(1) = {math.exp(1.0)}")

# On the doubling grid the graininess grows with t, so a fixed negative
# rate eventually breaks regressivity: 1 + mu p crosses zero.
print(f"2^N: e_-0.2(4, 1) = {exp_ts(G, -0.2, 4.0, 1.0)}")
try:
    exp_ts(G, -0.6, 4.0, 1.0)
except NegativeOneplus as exc:
    print(f"2^N: p=-0.6 rejected: {exc}")

# The circle-minus rate inverts e_p: e_{ominus p} = 1 / e_p.
p = 0.3
om = ominus(p, Z, 2.0)
print(f"\nominus(0.3) on Z = {om}  (equals -p/(1+mu p) = {-p / (1 + p)})")
print(f"product check: {exp_ts(Z, p, 6.0, 0.0) * exp_ts(Z, lambda t: ominus(p, Z, t), 6.0, 0.0)}")

# Identity suite: semigroup, reciprocal, and the sigma-shift law
# e_p(sigma(t), s) = (1 + mu(t) p(t)) e_p(t, s).
rep = check_exp_identities(Z, 0.4, [(0.0, 3.0, 7.0), (1.0, 1.0, 9.0)])
print(f"\nidentities on Z: {rep.summary()}")

# Sandwich bounds for nonnegative coefficients:
# 1 - I <= e_{-phi}(t,s) <= exp(-I) with I the integral of phi.
for ts, name in [(Z, "Z"), (R, "R")]:
    b = exp_bounds_check(ts, 0.15, 0.0, 6.0)
    print(f"bounds on {name}: {b.summary()}")
