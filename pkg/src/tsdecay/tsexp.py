"""The generalized exponential e_p(t,s) on a time scale, and its algebra.

e_p(t,s) solves y^Delta = p(t) y with y(s) = 1.  Concretely it is the product
of (1 + mu(r) p(r)) over the right-scattered points r of [s,t), interleaved
with ordinary exponentials over the dense parts.  Everything here is computed
in log space: the Cauchy integral of the cylinder transform

    zeta_mu(p) = log(1 + mu p) / mu   (mu > 0),      p   (mu = 0),

summed over scattered points and integrated over dense pieces.  Log space
keeps products over thousands of scattered points from under/overflowing and
makes fractional powers e_p^alpha trivial.

Only real-valued, positively regressive evaluations are supported: a factor
1 + mu p = 0 raises NotRegressive, a negative factor raises NegativeOneplus
(the complex logarithm is deliberately out of scope).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import NegativeOneplus, NotRegressive, PreconditionViolated
from .timescale import GridPolicy, TimeScale, _simpson_refined, delta_integral

Coefficient = Callable[[float], float] | float

REG_ATOL = 1e-14


def as_fn(p: Coefficient) -> Callable[[float], float]:
    """Coerce a constant into a coefficient function."""
    if callable(p):
        return p
    v = float(p)
    return lambda _t: v


def _checked_log1p(m: float, v: float, at: float) -> float:
    om = 1.0 + m * v
    if abs(om) <= REG_ATOL:
        raise NotRegressive(f"1 + mu*p = {om:.3e} at t = {at}")
    if om < 0.0:
        raise NegativeOneplus(f"1 + mu*p = {om:.6g} < 0 at t = {at}")
    return math.log(om)


def log_exp_ts(
    ts: TimeScale,
    p: Coefficient,
    t: float,
    s: float,
    policy: GridPolicy | None = None,
) -> float:
    """log e_p(t,s): the delta integral of the cylinder transform of p.

    Swapping t and s negates the value (reciprocal identity).
    """
    pf = as_fn(p)
    if t == s:
        return 0.0
    if t < s:
        return -log_exp_ts(ts, p, s, t, policy)
    pol = policy or ts.policy
    total = 0.0
    for piece in ts.decompose(s, t):
        if piece[0] == "scattered":
            _, pt, m = piece
            total += _checked_log1p(m, pf(pt), pt)
        else:
            _, a, b = piece
            total += _simpson_refined(pf, a, b, pol.step_for(b - a))
    return total


def exp_ts(
    ts: TimeScale,
    p: Coefficient,
    t: float,
    s: float,
    policy: GridPolicy | None = None,
) -> float:
    return math.exp(log_exp_ts(ts, p, t, s, policy))


def exp_pow(
    ts: TimeScale,
    p: Coefficient,
    t: float,
    s: float,
    alpha: float,
    policy: GridPolicy | None = None,
) -> float:
    """Fractional power e_p^alpha(t,s), valid because positivity is enforced."""
    return math.exp(alpha * log_exp_ts(ts, p, t, s, policy))


def ominus(p: Coefficient, ts: TimeScale, t: float) -> float:
    """The regressive-group inverse (ominus p)(t) = -p(t)/(1 + mu(t) p(t))."""
    v = as_fn(p)(t)
    m = ts.mu(t)
    om = 1.0 + m * v
    if abs(om) <= REG_ATOL:
        raise NotRegressive(f"1 + mu*p = {om:.3e} at t = {t}")
    return -v / om


def is_regressive(
    ts: TimeScale, p: Coefficient, s: float, t: float, positively: bool = False
) -> bool:
    """Check 1 + mu*p != 0 (or > 0) at every right-scattered point of [s, t]."""
    pf = as_fn(p)
    lo, hi = min(s, t), max(s, t)
    for piece in ts.decompose(lo, hi):
        if piece[0] != "scattered":
            continue
        _, pt, m = piece
        om = 1.0 + m * pf(pt)
        if abs(om) <= REG_ATOL or (positively and om <= 0.0):
            return False
    # mu(hi) looks past the window but regressivity there matters for sigma-shifts
    try:
        m = ts.mu(hi)
    except Exception:
        return True
    if m > 0:
        om = 1.0 + m * pf(hi)
        if abs(om) <= REG_ATOL or (positively and om <= 0.0):
            return False
    return True


# ---------------------------------------------------------------------------
# identity and bound reports


@dataclass
class CheckLine:
    name: str
    args: tuple
    residual: float
    ok: bool


@dataclass
class IdentityReport:
    rel_tol: float
    checks: list[CheckLine] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def worst(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def add(self, name: str, args: tuple, residual: float):
        self.checks.append(CheckLine(name, args, residual, residual <= self.rel_tol))

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        lines = [f"{verdict}: {len(self.checks)} checks, worst residual {self.worst():.3e}"]
        for c in self.checks:
            if not c.ok:
                lines.append(f"  FAIL {c.name} at {c.args}: residual {c.residual:.3e}")
        return "\n".join(lines)


def check_exp_identities(
    ts: TimeScale,
    p: Coefficient,
    triples: Iterable[tuple[float, float, float]],
    rel_tol: float = 1e-9,
) -> IdentityReport:
    """Verify the algebra of e_p on sampled triples (t, s, r), each t>=s>=r.

    Checked per triple: the semigroup law e_p(t,s)e_p(s,r)=e_p(t,r), the
    reciprocal law e_p(t,s)e_p(s,t)=1, and at right-scattered t the shift
    e_p(sigma(t),s) = (1+mu(t)p(t)) e_p(t,s).
    """
    pf = as_fn(p)
    rep = IdentityReport(rel_tol=rel_tol)
    for tri in triples:
        r, s, t = sorted(ts.snap(x) for x in tri)
        lts = log_exp_ts(ts, pf, t, s)
        lsr = log_exp_ts(ts, pf, s, r)
        ltr = log_exp_ts(ts, pf, t, r)
        scale = max(abs(ltr), 1.0)
        rep.add("semigroup", (t, s, r), abs((lts + lsr) - ltr) / scale)
        lst = log_exp_ts(ts, pf, s, t)
        rep.add("reciprocal", (t, s), abs(lts + lst) / max(abs(lts), 1.0))
        m = ts.mu(t)
        if m > 0:
            left = log_exp_ts(ts, pf, ts.sigma(t), s)
            right = _checked_log1p(m, pf(t), t) + lts
            rep.add("sigma-shift", (t, s), abs(left - right) / max(abs(right), 1.0))
    return rep


@dataclass
class BoundsReport:
    integral: float
    e_neg: float
    e_pos: float
    margins: dict[str, float]
    tol: float = 1e-12

    @property
    def passed(self) -> bool:
        return all(m >= -self.tol * max(1.0, abs(self.integral)) for m in self.margins.values())

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        worst = min(self.margins.values())
        return f"{verdict}: integral={self.integral:.6g}, worst margin {worst:.3e}"


def exp_bounds_check(
    ts: TimeScale,
    phi: Coefficient,
    s: float,
    t: float,
    policy: GridPolicy | None = None,
) -> BoundsReport:
    """Sandwich bounds for the exponential of a nonnegative coefficient.

    With I = integral of phi over [s,t]:
        1 - I <= e_{-phi}(t,s) <= exp(-I)        (requires -phi in R+)
        1 + I <= e_{phi}(t,s)  <= exp(I)
    Margins are reported as (upper - lower) for each of the four inequalities.
    """
    pf = as_fn(phi)
    if t < s:
        raise PreconditionViolated("bounds are stated for t >= s")
    neg = lambda u: -pf(u)
    if not is_regressive(ts, neg, s, t, positively=True):
        raise PreconditionViolated("-phi is not positively regressive on the window")
    integral = delta_integral(ts, pf, s, t, policy)
    if integral < -1e-12 * max(1.0, abs(integral)):
        raise PreconditionViolated("phi must be nonnegative on the window")
    e_neg = exp_ts(ts, neg, t, s, policy)
    e_pos = exp_ts(ts, pf, t, s, policy)
    margins = {
        "neg_lower": e_neg - (1.0 - integral),
        "neg_upper": math.exp(-integral) - e_neg,
        "pos_lower": e_pos - (1.0 + integral),
        "pos_upper": math.exp(integral) - e_pos,
    }
    return BoundsReport(integral=integral, e_neg=e_neg, e_pos=e_pos, margins=margins)
