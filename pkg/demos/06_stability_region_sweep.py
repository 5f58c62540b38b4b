"""
Stability regions and a counterexample on the doubling grid
===========================================================

Two studies.  First, a (p, q) sweep on the integers reproducing the
expected triangle: certified exactly where p > q and p <= 1.  Second,
the doubling grid 2^N, where the decay bound can fail even though every
audited hypothesis holds; the certificate machinery reports the
violation instead of hiding it.
"""

import numpy as np

from tsdecay import (
    HalanayProblem,
    TimeScale,
    builtin_shift,
    certify,
    make_delay_spec,
    sweep_grid,
)

Z = TimeScale.integers()
spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0))


def factory(pv, qv):
    return HalanayProblem(spec, "sum_power", pv, (0.0, qv))


p_values = [round(0.2 + 0.2 * i, 2) for i in range(5)]   # 0.2 .. 1.0
q_values = [round(0.1 + 0.2 * j, 2) for j in range(5)]   # 0.1 .. 0.9
res = sweep_grid(factory, 1.0, 25.0, p_values, q_values)

print("verdict codes (rows p, cols q); 0 certified, 2 hypotheses failed")
print("      " + "  ".join(f"q={q}" for q in q_values))
for i, pv in enumerate(p_values):
    print(f"p={pv}  " + "      ".join(str(c) for c in res.codes[i]))

# The doubling grid study.  Graininess mu(t) = t grows without bound,
# so constant coefficients violate the graininess-vs-decay condition.
# Coefficients shaped like 1/t keep every hypothesis satisfied:
#   p(t) = 1/t, q(t) = 0.5/t  gives 1 - mu_tilde p = 0 and margin 0.5/t.
G = TimeScale.q_grid(2.0, nmin=-1)
gspec = make_delay_spec(builtin_shift("scaling", G, t0=1.0), (1.0, 2.0))
gprob = HalanayProblem(gspec, "sum_power", lambda t: 1.0 / t, (0.0, lambda t: 0.5 / t))

cert = certify(gprob, 1.0, 64.0)
print(f"\ndoubling grid, 1/t coefficients: audit passed = {cert.audit.passed}")
print(f"verdict: {cert.verdict} at t = {cert.t_violation}")

# Why: the recursion halves x every second grid point, a factor of
# 1/sqrt(2) per step, but the characteristic construction promises a
# contraction of (sqrt(5)-1)/2 per step, which is faster.  The envelope
# undershoots the true solution and the pointwise check reports it.
print("\n   t     x(t)      envelope   margin")
for i, t in enumerate(cert.trajectory.times):
    print(
        f"  {t:4g}  {cert.trajectory.values[i]:.6f}  {cert.envelope[i]:.6f}  {cert.margins[i]:+.6f}"
    )
print("\nstep contraction promised:", (np.sqrt(5) - 1) / 2)
print("step contraction delivered:", 1 / np.sqrt(2))
