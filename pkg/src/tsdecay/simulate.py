"""Marching solver for delay dynamic equations on hybrid time scales.

The state advances over the decomposition of [t0, t_end): right-scattered
points take one exact step

    x(sigma(t)) = x(t) + mu(t) * f(t, x, delayed values)

(the defining quotient of the Delta-derivative, so no discretization error),
and dense stretches are integrated with classical RK4.  Delayed arguments are
resolved against the trajectory computed so far (method of steps); inside a
dense cell they are reconstructed with a cubic Hermite patch built from the
stored node derivatives, which keeps the interpolation error at the same
O(step^4) order as the integrator.  The public value_at accessor favors the
simpler piecewise-linear reading of dense cells; the high-order patch is an
internal detail of the solver loop.

Arithmetic is IEEE double with overflow trapped nowhere: a blowing-up
trajectory runs to the horizon carrying inf/nan, and the certification layer
treats non-finite samples as bound violations rather than crashes.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    HistoryGap,
    NegativeBaseFractionalPower,
    NegativeOneplus,
    OutOfDomain,
    TsError,
)
from .halanay import MAX, PRODUCT, SUM_POWER, SUP, HalanayProblem, RootField
from .shifts import delay_apply
from .timescale import TimeScale
from .tsexp import as_fn

MAX_NODES = 2_000_000

History = Callable[[float], float]


def constant_history(c: float) -> History:
    c = float(c)
    return lambda t: c


def table_history(times: Sequence[float], values: Sequence[float]) -> History:
    """Piecewise-linear history from samples; queries outside the sampled
    range are gaps, not extrapolations."""
    ta = np.asarray(times, dtype=float)
    va = np.asarray(values, dtype=float)
    if ta.ndim != 1 or ta.shape != va.shape or len(ta) < 2:
        raise ValueError("need matching 1-d time and value arrays, two points or more")
    if not np.all(np.diff(ta) > 0):
        raise ValueError("history times must increase strictly")

    def h(t: float) -> float:
        if t < ta[0] - 1e-12 or t > ta[-1] + 1e-12:
            raise HistoryGap(f"history covers [{ta[0]}, {ta[-1]}], asked at {t}")
        return float(np.interp(t, ta, va))

    return h


def as_history(h) -> History:
    if isinstance(h, (int, float)):
        return constant_history(h)
    if callable(h):
        return h
    if isinstance(h, tuple) and len(h) == 2:
        return table_history(*h)
    raise TypeError("history must be a constant, a callable, or a (times, values) pair")


def _hist_eval(hist: History, t: float) -> float:
    try:
        v = float(hist(t))
    except TsError:
        raise
    except Exception as exc:
        raise HistoryGap(f"history function failed at t={t}: {exc}") from exc
    if not math.isfinite(v):
        raise HistoryGap(f"history function returned {v} at t={t}")
    return v


def _pow_frac(base: float, expo: float) -> float:
    """base**expo through IEEE semantics: overflow becomes inf, nan rides
    along, and a genuinely negative base with a fractional exponent is a
    modelling error worth stopping for."""
    if expo == 1.0:
        return base
    if base < 0.0:
        raise NegativeBaseFractionalPower(
            f"cannot raise negative value {base} to power {expo}"
        )
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.float64(base) ** np.float64(expo))


@dataclass
class Trajectory:
    """Computed samples of one run.

    times/values/derivs/scattered are aligned arrays; derivs holds the
    Delta-derivative at each node (the exact quotient at scattered nodes).
    interp names the public reading between dense nodes.
    """

    ts: TimeScale
    t0: float
    times: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    scattered: np.ndarray
    history: History
    interp: str = "linear-dense"

    def __len__(self) -> int:
        return len(self.times)

    def kind_labels(self) -> list[str]:
        return ["scattered" if s else "dense" for s in self.scattered]

    def _node_match(self, t: float) -> int | None:
        idx = bisect_right(self.times, t)
        tol = 1e-9 * max(1.0, abs(t))
        if idx < len(self.times) and abs(self.times[idx] - t) <= tol:
            return idx
        if idx > 0 and abs(self.times[idx - 1] - t) <= tol:
            return idx - 1
        return None

    def _eval(self, t: float, hermite: bool) -> float:
        if t < self.t0 - 1e-9 * max(1.0, abs(self.t0)):
            return _hist_eval(self.history, t)
        k = self._node_match(t)
        if k is not None:
            return float(self.values[k])
        idx = bisect_right(self.times, t) - 1
        if idx < 0:
            return _hist_eval(self.history, t)
        if idx >= len(self.times) - 1:
            raise OutOfDomain(
                f"t={t} is beyond the computed horizon {self.times[-1]}"
            )
        if self.scattered[idx]:
            # between a scattered node and its successor the state holds
            return float(self.values[idx])
        a, b = self.times[idx], self.times[idx + 1]
        xa, xb = self.values[idx], self.values[idx + 1]
        w = (t - a) / (b - a)
        if not hermite:
            return float(xa + w * (xb - xa))
        h = b - a
        da, db = self.derivs[idx], self.derivs[idx + 1]
        h00 = (1 + 2 * w) * (1 - w) ** 2
        h10 = w * (1 - w) ** 2
        h01 = w * w * (3 - 2 * w)
        h11 = w * w * (w - 1)
        return float(h00 * xa + h10 * h * da + h01 * xb + h11 * h * db)

    def value_at(self, t: float) -> float:
        return self._eval(t, hermite=False)

    def final_value(self) -> float:
        return float(self.values[-1])


class _Builder:
    """Growable trajectory used while the march is still in progress."""

    def __init__(self, ts: TimeScale, t0: float, hist: History):
        self.ts = ts
        self.t0 = t0
        self.hist = hist
        self.times: list[float] = []
        self.values: list[float] = []
        self.derivs: list[float] = []
        self.scattered: list[bool] = []

    def push(self, t: float, x: float):
        self.times.append(t)
        self.values.append(x)
        if len(self.times) > MAX_NODES:
            raise RuntimeError(
                f"node budget {MAX_NODES} exceeded; enlarge the dense step"
            )

    def mark(self, deriv: float, is_scattered: bool):
        self.derivs.append(deriv)
        self.scattered.append(is_scattered)

    def eval(self, t: float) -> float:
        if t < self.t0 - 1e-9 * max(1.0, abs(self.t0)):
            return _hist_eval(self.hist, t)
        idx = bisect_right(self.times, t)
        tol = 1e-9 * max(1.0, abs(t))
        if idx < len(self.times) and abs(self.times[idx] - t) <= tol:
            return self.values[idx]
        if idx > 0 and abs(self.times[idx - 1] - t) <= tol:
            return self.values[idx - 1]
        i = idx - 1
        if i < 0:
            return _hist_eval(self.hist, t)
        if i >= len(self.derivs):
            raise OutOfDomain(
                f"delayed argument {t} is ahead of the computed trajectory"
            )
        if self.scattered[i]:
            return self.values[i]
        if i + 1 >= len(self.times) or i + 1 >= len(self.derivs):
            raise OutOfDomain(
                f"delayed argument {t} falls inside the step being computed"
            )
        a, b = self.times[i], self.times[i + 1]
        xa, xb = self.values[i], self.values[i + 1]
        h = b - a
        w = (t - a) / h
        da, db = self.derivs[i], self.derivs[i + 1]
        h00 = (1 + 2 * w) * (1 - w) ** 2
        h10 = w * (1 - w) ** 2
        h01 = w * w * (3 - 2 * w)
        h11 = w * w * (w - 1)
        return h00 * xa + h10 * h * da + h01 * xb + h11 * h * db

    def freeze(self, history: History, final_deriv: float, final_scattered: bool) -> Trajectory:
        self.derivs.append(final_deriv)
        self.scattered.append(final_scattered)
        return Trajectory(
            self.ts,
            self.t0,
            np.asarray(self.times),
            np.asarray(self.values),
            np.asarray(self.derivs),
            np.asarray(self.scattered, dtype=bool),
            history,
        )


def _window_max_pow(
    builder: _Builder, lo: float, hi: float, stage_t: float, stage_x: float, expo: float
) -> float:
    """max of x^expo over [lo, hi]: stored nodes in range, interpolated
    endpoints, the in-flight stage value, and a fixed sampling of any history
    overlap (a continuum sup can only be approximated there)."""
    cands: list[float] = []
    t0 = builder.t0
    if lo < t0:
        n = 16
        top = min(hi, t0)
        for j in range(n + 1):
            cands.append(_hist_eval(builder.hist, lo + (top - lo) * j / n))
    lo_eff = max(lo, t0)
    if hi >= lo_eff:
        cands.append(builder.eval(lo_eff))
        i0 = bisect_right(builder.times, lo_eff)
        i1 = bisect_right(builder.times, min(hi, builder.times[-1]))
        cands.extend(builder.values[i0:i1])
        if hi <= builder.times[-1]:
            cands.append(builder.eval(hi))
    if lo <= stage_t <= hi:
        cands.append(stage_x)
    return max(_pow_frac(c, expo) for c in cands)


def _form_rhs(problem: HalanayProblem, builder: _Builder):
    """Right-hand side of the equality version of the problem's inequality."""
    spec = problem.spec
    p = as_fn(problem.p)
    form = problem.form
    ell = problem.ell
    if form == SUM_POWER:
        qs = [as_fn(qi) for qi in problem.q]

        def f(t: float, x: float) -> float:
            acc = -p(t) * x
            for i, qf in enumerate(qs):
                qv = qf(t)
                if qv == 0.0:
                    continue
                base = x if i == 0 else builder.eval(delay_apply(spec, i, t))
                acc += qv * _pow_frac(base, ell)
            return acc

        return f
    if form in (SUP, MAX):
        qf = as_fn(problem.q[0])

        def f(t: float, x: float) -> float:
            d_r = delay_apply(spec, spec.r, t)
            return -p(t) * x + qf(t) * _window_max_pow(builder, d_r, t, t, x, ell)

        return f
    # product form
    betas = [as_fn(b) for b in problem.q]

    def f(t: float, x: float) -> float:
        prod = 1.0
        for i, (bf, ai) in enumerate(zip(betas, problem.alpha)):
            base = x if i == 0 else builder.eval(delay_apply(spec, i, t))
            prod *= bf(t) * _pow_frac(base, ai)
        return -p(t) * x + prod

    return f


def _custom_rhs(problem: HalanayProblem, builder: _Builder, user):
    spec = problem.spec

    def f(t: float, x: float) -> float:
        delayed = tuple(
            builder.eval(delay_apply(spec, i, t)) for i in range(1, spec.r + 1)
        )
        return user(t, x, delayed)

    return f


def _min_delay_offset(problem: HalanayProblem, a: float, b: float) -> float:
    """Smallest gap t - delta_minus(h_i, t) over the cell endpoints; the dense
    step must stay below it so stage lookups never outrun the march."""
    spec = problem.spec
    off = math.inf
    for i in range(1, spec.r + 1):
        for t in (a, b):
            try:
                off = min(off, t - delay_apply(spec, i, t))
            except OutOfDomain:
                continue
    return off


def simulate(
    problem: HalanayProblem,
    history,
    t_end: float,
    rhs: Callable[[float, float, tuple], float] | None = None,
    dense_step: float | None = None,
) -> Trajectory:
    """March the delay equation attached to problem from t0 to t_end.

    rhs, when given, replaces the built-in form with a custom
    f(t, x, delayed_values) whose delayed tuple follows the problem's delay
    list (entries i = 1..r).  The trajectory records every node the solver
    touched: each scattered point of the scale plus the RK4 nodes used on
    dense stretches.
    """
    ts = problem.ts
    t0 = problem.t0
    t_end = ts.snap(t_end)
    if not t_end > t0:
        raise ValueError(f"horizon t_end={t_end} must exceed t0={t0}")
    hist = as_history(history)
    # the delay window must be covered before stepping starts
    _hist_eval(hist, problem.spec.window_start())
    x0 = _hist_eval(hist, t0)

    builder = _Builder(ts, t0, hist)
    f = _custom_rhs(problem, builder, rhs) if rhs is not None else _form_rhs(problem, builder)

    builder.push(t0, x0)
    x = x0
    for piece in ts.decompose(t0, t_end):
        if piece[0] == "scattered":
            _, pt, mu = piece
            d = f(pt, x)
            builder.mark(d, True)
            x = x + mu * d
            builder.push(pt + mu, x)
            continue
        _, a, b = piece
        span = b - a
        h_target = dense_step if dense_step is not None else ts.policy.step_for(span)
        cap = _min_delay_offset(problem, a, b)
        # stage lookups reach at most offset behind the stage time; keeping
        # two steps of clearance means they only ever read finished cells
        h_eff = min(h_target, 0.45 * cap) if math.isfinite(cap) else h_target
        n = max(1, math.ceil(span / h_eff))
        h = span / n
        for j in range(n):
            tj = a + span * j / n
            tj1 = a + span * (j + 1) / n
            k1 = f(tj, x)
            builder.mark(k1, False)
            k2 = f(tj + h / 2, x + h / 2 * k1)
            k3 = f(tj + h / 2, x + h / 2 * k2)
            k4 = f(tj1, x + h * k3)
            x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            builder.push(tj1, x)
    final_deriv = f(t_end, x)
    return builder.freeze(hist, final_deriv, bool(ts.is_right_scattered(t_end)))


def exponential_envelope(traj: Trajectory, field: RootField, K0: float) -> np.ndarray:
    """K0 * e_lambda(t, t0) along the trajectory nodes, with the rate read
    left-piecewise-constantly from the root field.

    The generalized exponential accumulates log(1 + mu*lambda) across each
    scattered node and lambda*dt across dense cells, so the envelope is exact
    wherever the rate is constant between trajectory nodes.
    """
    out = np.empty(len(traj.times))
    log_b = math.log(K0)
    out[0] = K0
    for i in range(1, len(traj.times)):
        a = float(traj.times[i - 1])
        b = float(traj.times[i])
        lam = field.value_at(a)
        if traj.scattered[i - 1]:
            g = 1.0 + (b - a) * lam
            if g <= 0.0:
                raise NegativeOneplus(
                    f"rate {lam} is not viable across the jump at t={a} (mu={b - a})"
                )
            log_b += math.log(g)
        else:
            log_b += lam * (b - a)
        out[i] = math.exp(log_b)
    return out
