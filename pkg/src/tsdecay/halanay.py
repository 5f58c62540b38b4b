"""Characteristic polynomials for delayed dynamic inequalities and their
largest negative roots.

Plugging the exponential ansatz K*e_k(t, t0) into a delayed inequality

    x^Delta(t) <= -p(t) x(t) + (delayed terms)

produces, for each fixed t, a scalar function P(t, k) whose largest root in

    S(t) = { k < 0 : 1 + mu_tilde(t) k > 0 }

is the certified decay rate at time t.  mu_tilde is the running sup of the
graininess over the delay-extended window [delta_minus(h_r, t0), t]; its
reciprocal bounds how negative a usable rate can be on a coarse grid.

Three right-hand-side families are supported:

    sum_power: sum_i q_i(t) x^ell(delta_minus(h_i, t))            (ell in (0,1])
    sup/max:   q(t) * sup of x^ell over [delta_minus(h_r, t), t]
    product:   prod_i beta_i(t) x^alpha_i(delta_minus(h_i, t)),  sum alpha_i = 1

P(t, 0) = p - (coefficient mass) > 0 and P tends below -q_r near the left end
of S(t) under the admissibility conditions, so a sign change exists; the root
finder scans a geometric ladder from 0 toward the left endpoint, takes the
first + -> - crossing, and polishes it with Brent's method.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from scipy.optimize import brentq

from .errors import (
    ConfigError,
    NoSignChange,
    NotBracketed,
    OutOfDomain,
    OutsideS,
    PreconditionViolated,
)
from .shifts import DelaySpec, delay_apply
from .timescale import TimeScale, mu_tilde
from .tsexp import Coefficient, as_fn, log_exp_ts

SUM_POWER = "sum_power"
SUP = "sup"
PRODUCT = "product"
MAX = "max"
FORMS = (SUM_POWER, SUP, PRODUCT, MAX)

DENSE_FLOOR = -1e6


@dataclass(eq=False)
class HalanayProblem:
    """A delayed decay inequality prepared for root analysis.

    q holds one coefficient per delay (index 0 pairs with the trivial delay
    h0 = t0) for the sum_power form, the beta_i for the product form, and a
    single entry for sup/max.  Kconst is the free constant of the ansatz;
    it only matters when ell < 1.  Treat instances as immutable.
    """

    spec: DelaySpec
    form: str
    p: Coefficient
    q: tuple
    ell: float = 1.0
    alpha: tuple[float, ...] = ()
    Kconst: float = 2.0
    _mu_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown form {self.form!r}")
        self.q = tuple(self.q)
        r = self.spec.r
        if self.form in (SUM_POWER, PRODUCT):
            if len(self.q) != r + 1:
                raise ValueError(
                    f"need one coefficient per delay (r+1 = {r + 1}), got {len(self.q)}"
                )
        else:
            if len(self.q) != 1:
                raise ValueError("sup/max forms take a single coefficient")
        if self.form == PRODUCT:
            self.alpha = tuple(float(a) for a in self.alpha)
            if len(self.alpha) != r + 1:
                raise ValueError("need one exponent alpha_i per delay")
            if any(a <= 0 for a in self.alpha):
                raise ValueError("exponents alpha_i must be positive")
            if abs(sum(self.alpha) - 1.0) > 1e-12:
                raise ValueError("exponents alpha_i must sum to 1")
        else:
            if not 0.0 < self.ell <= 1.0:
                raise ValueError("ell must lie in (0, 1]")
        if not self.Kconst > 1.0:
            raise ValueError("the ansatz constant must exceed 1")

    @property
    def ts(self) -> TimeScale:
        return self.spec.ts

    @property
    def t0(self) -> float:
        return self.spec.t0

    def window_origin(self) -> float:
        """delta_minus(h_r, t0): left end of every graininess window."""
        return self.spec.window_start()

    def mu_tilde_at(self, t: float) -> float:
        t = self.ts.snap(t)
        hit = self._mu_cache.get(t)
        if hit is None:
            hit = mu_tilde(self.ts, t, self.window_origin())
            self._mu_cache[t] = hit
        return hit


def s_window(problem: HalanayProblem, t: float, floor: float = DENSE_FLOOR) -> tuple[float, float]:
    """The admissible rate interval S(t) = (-1/mu_tilde(t), 0).

    A window with no scattered points has mu_tilde = 0 and S(t) = (-inf, 0);
    the unbounded end is represented by the configurable finite floor.
    """
    mt = problem.mu_tilde_at(t)
    return (-1.0 / mt if mt > 0 else floor, 0.0)


def char_poly(problem: HalanayProblem, t: float, k: float) -> float:
    """Evaluate the characteristic function P(t, k), k in S(t) union {0}."""
    ts = problem.ts
    t = ts.snap(t)
    mt = problem.mu_tilde_at(t)
    if 1.0 + mt * k <= 0.0:
        raise OutsideS(f"k={k} is outside S(t)=(-1/{mt}, 0) at t={t}")
    spec = problem.spec
    t0 = problem.t0
    pv = as_fn(problem.p)(t)
    if problem.form == SUM_POWER:
        d_r = delay_apply(spec, spec.r, t)
        log_main = log_exp_ts(ts, k, t, d_r)
        if problem.ell != 1.0:
            log_main += (1.0 - problem.ell) * log_exp_ts(ts, k, d_r, t0)
        acc = 0.0
        for i, qi in enumerate(problem.q):
            qv = as_fn(qi)(t)
            if qv == 0.0:
                continue
            d_i = delay_apply(spec, i, t)
            acc += qv * math.exp(problem.ell * log_exp_ts(ts, k, d_i, d_r))
        scale = problem.Kconst ** (problem.ell - 1.0)
        return (k + pv) * math.exp(log_main) - scale * acc
    if problem.form in (SUP, MAX):
        # e_k is decreasing in its first argument for k < 0, so the sup of
        # e_k^ell(s, t0) over s in [delta_minus(tau, t), t] sits at the left
        # endpoint
        d_r = delay_apply(spec, spec.r, t)
        qv = as_fn(problem.q[0])(t)
        main = (k + pv) * math.exp(log_exp_ts(ts, k, t, t0))
        return main - problem.Kconst**problem.ell * qv * math.exp(
            problem.ell * log_exp_ts(ts, k, d_r, t0)
        )
    # product form
    log_prod = 0.0
    coeff = 1.0
    for i, (bi, ai) in enumerate(zip(problem.q, problem.alpha)):
        d_i = delay_apply(spec, i, t)
        coeff *= as_fn(bi)(t)
        log_prod += ai * log_exp_ts(ts, k, d_i, t0)
    main = (k + pv) * math.exp(log_exp_ts(ts, k, t, t0))
    return main - coeff * math.exp(log_prod)


def sup_endpoint_crosscheck(
    problem: HalanayProblem, t: float, k: float, n: int = 32
) -> float:
    """Max deviation between the endpoint evaluation used by char_poly for
    sup-type forms and a brute grid sup.  Debug aid; near zero when the
    endpoint shortcut is valid."""
    if problem.form not in (SUP, MAX):
        return 0.0
    ts = problem.ts
    spec = problem.spec
    d_r = delay_apply(spec, spec.r, t)
    t0 = problem.t0
    best = -math.inf
    for j in range(n + 1):
        s = d_r + (t - d_r) * j / n
        pt = ts.prev_point_at_or_before(s)
        if pt is None or pt < d_r:
            continue
        best = max(best, problem.ell * log_exp_ts(ts, k, pt, t0))
    endpoint = problem.ell * log_exp_ts(ts, k, d_r, t0)
    return abs(best - endpoint)


def largest_root(
    problem: HalanayProblem, t: float, tol: float = 1e-10
) -> tuple[float, float]:
    """The largest k in S(t) with P(t, k) = 0, plus the achieved |P| residual.

    Scans a 64-point geometric ladder from -tol*|lower| toward the lower end
    of S(t); the first + -> - sign change brackets the largest root (P(t,0)>0),
    which Brent's method then polishes.  A dense window (mu_tilde = 0) starts
    with floor -1e3 and deepens once by x1e3 if no crossing is found.
    """
    mt = problem.mu_tilde_at(t)
    if mt > 0:
        return _root_scan(problem, t, -1.0 / mt, tol, hard_wall=True)
    try:
        return _root_scan(problem, t, -1e3, tol, hard_wall=False)
    except NoSignChange:
        return _root_scan(problem, t, -1e6, tol, hard_wall=False)


def _root_scan(
    problem: HalanayProblem,
    t: float,
    lower: float,
    tol: float,
    hard_wall: bool,
) -> tuple[float, float]:
    width = abs(lower)
    eps = tol * width
    # stay strictly inside S(t) when the wall is a genuine singularity
    deepest = lower + eps if hard_wall else lower
    f = lambda k: char_poly(problem, t, k)
    k_prev = 0.0
    v_prev = f(0.0)
    if v_prev <= 0.0:
        raise PreconditionViolated(
            f"P(t,0) = {v_prev:.6g} <= 0 at t={t}: coefficient mass reaches p"
        )
    n = 64
    ratio = (abs(deepest) / eps) ** (1.0 / (n - 1))
    smallest_seen = v_prev
    for j in range(n):
        k = -eps * ratio**j
        if k <= deepest:
            k = deepest
        v = f(k)
        smallest_seen = min(smallest_seen, v)
        if v == 0.0:
            return k, 0.0
        if v < 0.0:
            root = brentq(f, k, k_prev, xtol=1e-300, rtol=8.9e-16, maxiter=256)
            return root, abs(f(root))
        k_prev, v_prev = k, v
        if k == deepest:
            break
    if smallest_seen < tol:
        raise NotBracketed(
            f"P(t, .) approaches zero ({smallest_seen:.3g}) without crossing at t={t}"
        )
    raise NoSignChange(
        f"no sign change of P({t}, .) on ({deepest:.6g}, 0); smallest value {smallest_seen:.6g}"
    )


def verify_largest(problem: HalanayProblem, t: float, root: float, n: int = 128) -> bool:
    """Sign-scan (root, 0): the 'largest root' claim holds iff P stays positive."""
    for j in range(1, n + 1):
        k = root * (1.0 - j / (n + 1))
        if char_poly(problem, t, k) <= 0.0:
            return False
    return True


@dataclass
class RootField:
    """Pointwise largest roots over a time grid.

    lam holds NaN where root finding failed (error message in errors);
    jump_flags marks adjacent grid times whose roots differ by more than
    jump_rel relative, a sanity signal because rates are interpolated
    left-piecewise-constantly between grid times.
    """

    grid: tuple[float, ...]
    lam: tuple[float, ...]
    residual: tuple[float, ...]
    s_lower: tuple[float, ...]
    tol: float
    errors: tuple[str | None, ...]
    jump_flags: tuple[bool, ...]

    @property
    def partial(self) -> bool:
        return any(e is not None for e in self.errors)

    def value_at(self, t: float) -> float:
        """Left-piecewise-constant lookup; times before the grid use the
        first value (the construction extends to the delayed window)."""
        if not self.grid:
            raise OutOfDomain("empty root field")
        idx = max(0, bisect.bisect_right(self.grid, t) - 1)
        v = self.lam[idx]
        if math.isnan(v):
            raise OutOfDomain(f"root field has no value at grid time {self.grid[idx]}")
        return v


def root_field(
    problem: HalanayProblem,
    t_grid: Sequence[float],
    tol: float = 1e-10,
    jump_rel: float = 0.5,
) -> RootField:
    ts = problem.ts
    grid = tuple(ts.snap(t) for t in t_grid)
    lam: list[float] = []
    res: list[float] = []
    slo: list[float] = []
    errs: list[str | None] = []
    for t in grid:
        slo.append(s_window(problem, t)[0])
        try:
            root, residual = largest_root(problem, t, tol)
            lam.append(root)
            res.append(residual)
            errs.append(None)
        except (NoSignChange, NotBracketed, PreconditionViolated, OutsideS, OutOfDomain) as exc:
            lam.append(math.nan)
            res.append(math.nan)
            errs.append(f"{type(exc).__name__}: {exc}")
    flags = [False] * len(grid)
    for i in range(1, len(grid)):
        a, b = lam[i - 1], lam[i]
        if not (math.isnan(a) or math.isnan(b)):
            flags[i] = abs(b - a) > jump_rel * max(1.0, abs(a))
    return RootField(grid, tuple(lam), tuple(res), tuple(slo), tol, tuple(errs), tuple(flags))


def default_root_grid(problem: HalanayProblem, t_end: float, cap: int = 512) -> list[float]:
    """Grid for root_field: every scattered point of [t0, t_end] plus samples
    of dense stretches, thinned to at most cap points (endpoints kept)."""
    ts = problem.ts
    t0 = problem.t0
    t_end = ts.snap(t_end)
    pts: list[float] = [t0]
    for piece in ts.decompose(t0, t_end):
        if piece[0] == "scattered":
            pts.append(piece[1])
        else:
            _, a, b = piece
            n = min(33, max(2, int(math.ceil((b - a) / max(ts.policy.step_for(b - a), 1e-9)))))
            pts.extend(a + (b - a) * j / n for j in range(n + 1))
    pts.append(t_end)
    uniq = sorted(set(ts.snap(x) for x in pts if t0 <= x <= t_end))
    if len(uniq) > cap:
        stride = (len(uniq) - 1) / (cap - 1)
        uniq = [uniq[round(i * stride)] for i in range(cap)]
    return uniq


def problem_from_json(doc: dict, spec: DelaySpec, ptr: str = "/problem") -> HalanayProblem:
    """Build a problem from a JSON document with already-resolved coefficients
    (numbers or callables; the CLI layer turns const:/table: strings into
    these before calling)."""
    if not isinstance(doc, dict):
        raise ConfigError(ptr, "problem must be an object")
    form = doc.get("form", SUM_POWER)
    if form not in FORMS:
        raise ConfigError(f"{ptr}/form", f"expected one of {FORMS}, got {form!r}")
    if "p" not in doc:
        raise ConfigError(f"{ptr}/p", "missing decay coefficient")
    p = doc["p"]
    if not (callable(p) or isinstance(p, (int, float))):
        raise ConfigError(f"{ptr}/p", "coefficient must be a number or callable")
    q_raw = doc.get("q", [])
    if not isinstance(q_raw, (list, tuple)):
        raise ConfigError(f"{ptr}/q", "q must be an array")
    for i, qv in enumerate(q_raw):
        if not (callable(qv) or isinstance(qv, (int, float))):
            raise ConfigError(f"{ptr}/q/{i}", "coefficient must be a number or callable")
    q = list(q_raw)
    if form == SUM_POWER and len(q) == spec.r:
        q.insert(0, 0.0)  # trivial-delay slot omitted: no instantaneous term
    ell = doc.get("ell", 1.0)
    if not isinstance(ell, (int, float)):
        raise ConfigError(f"{ptr}/ell", "ell must be a number")
    alpha = doc.get("alpha", ())
    if alpha and not isinstance(alpha, (list, tuple)):
        raise ConfigError(f"{ptr}/alpha", "alpha must be an array")
    K = doc.get("K", 2.0)
    if not isinstance(K, (int, float)):
        raise ConfigError(f"{ptr}/K", "K must be a number")
    try:
        return HalanayProblem(
            spec, form, p, tuple(q), float(ell), tuple(alpha), float(K)
        )
    except ValueError as exc:
        raise ConfigError(ptr, str(exc)) from exc
