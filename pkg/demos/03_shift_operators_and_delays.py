"""
Shift operators and delay functions
===================================

Fixed lags like x(t - 1) only make sense on scales closed under
translation.  Shift operators generalize the lag: delta_minus(h, t)
moves t back by "h units" in whatever sense the scale supports, e.g.
division on a geometric grid.  A delay function must also preserve the
local structure of the scale: scattered points map to scattered points.
That can fail, and the validator is built to catch it.
"""

import math

from tsdecay import (
    DenseInterval,
    TimeScale,
    builtin_shift,
    delay_apply,
    make_delay_spec,
    validate_shift_axioms,
)
from tsdecay.shifts import validate_delay_function

# Three built-in families on their natural scales.
Z = TimeScale.integers()
G = TimeScale.q_grid(2.0, nmin=-2)
S = TimeScale.sqrt_naturals()

tr = builtin_shift("translation", Z, t0=0.0)
sc = builtin_shift("scaling", G, t0=1.0)
sq = builtin_shift("sqrt", S, t0=0.0)

print("one step of each family:")
print(f"  translation on Z:    delta_minus(2, 7)  = {tr.minus(2.0, 7.0)}")
print(f"  scaling on 2^Z:      delta_minus(2, 8)  = {sc.minus(2.0, 8.0)}")
print(f"  sqrt on sqrt(N):     delta_minus(1, 3)  = {sq.minus(1.0, 3.0)}  (sqrt(9-1))")

# Randomized axiom validation: monotonicity, identity at t0, inversion,
# commutation of the two directions, plus consequence laws.
for name, shift in [("translation", tr), ("scaling", sc), ("sqrt", sq)]:
    rep = validate_shift_axioms(shift, samples=300, seed=7)
    print(f"{name}: {'PASS' if rep.passed else rep.summary()}")

# A delay specification packages a shift with ordered lags; index 0 is
# the trivial lag (no delay).
spec = make_delay_spec(sc, (1.0, 2.0, 4.0))
print(f"\ndelays on the doubling grid, t=16: ", end="")
print([delay_apply(spec, i, 16.0) for i in range(spec.r + 1)])
print(f"history window starts at {spec.window_start()}")

# The classic failure: a scale that is dense below 0 and dense again
# from 1 on.  Translating by the gap maps the right-dense point 1 onto
# the right-scattered point 0, so no translation delay function exists.
gap = TimeScale([DenseInterval(-50.0, 0.0), DenseInterval(1.0, math.inf)])
bad = make_delay_spec(builtin_shift("translation", gap, t0=1.0), (2.0,))
rep = validate_delay_function(bad)
print(f"\ngap scale: {'PASS' if rep.passed else 'FAIL'}")
print(f"  witness: {rep.result('structure-preservation').witness}")
