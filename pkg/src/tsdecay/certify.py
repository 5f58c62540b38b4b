"""Decay certificates: does |x(t)| <= K0 * e_lambda(t, t0) hold along a run?

The pipeline has four stages.

1. audit_conditions checks the structural hypotheses of the decay estimate on
   a time grid: positive coefficients, a positive margin at rate zero, and
   the graininess condition 1 - mu_tilde(t) p(t) >= 0 (strict > 0 when a
   custom right-hand side is being dominated, where the estimate needs the
   shifted rate p/(1 - mu p) to exist).
2. root_field computes the pointwise certified rate lambda(t).
3. simulate produces the trajectory; choose_K0 picks the envelope constant
   1.01 * max(1, sup |phi|) over the delay window.
4. verify_bound compares |x| with the envelope node by node.  A margin below
   -tol is a violation outright; on dense nodes a sub-tolerance dip that
   persists for three consecutive nodes also counts, because integration
   roundoff is not systematic.  Non-finite samples always violate.

An audit failure yields the verdict "hypothesis-failed": the inequality was
never claimed for such data, so neither "certified" nor "violated" would be
honest.  The margins are still reported when they are computable.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    FieldGap,
    NegativeOneplus,
    NonpositiveTail,
    OutOfDomain,
    TsError,
    WindowMismatch,
)
from .halanay import (
    PRODUCT,
    SUM_POWER,
    HalanayProblem,
    RootField,
    char_poly,
    default_root_grid,
    root_field,
)
from .shifts import delay_apply
from .simulate import Trajectory, as_history, exponential_envelope, simulate, _hist_eval
from .tsexp import as_fn

CERTIFIED = "certified"
VIOLATED = "violated"
HYPOTHESIS_FAILED = "hypothesis-failed"

BOUND_TOL = 1e-9


@dataclass
class AuditLine:
    name: str
    ok: bool
    value: float | None = None
    detail: str = ""

    def render(self) -> str:
        state = "PASS" if self.ok else "FAIL"
        tail = f" ({self.value:.6g})" if self.value is not None else ""
        return f"  {state} {self.name}: {self.detail}{tail}"


@dataclass
class AuditReport:
    lines: list[AuditLine] = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(line.ok for line in self.lines)

    def line(self, name: str) -> AuditLine:
        for ln in self.lines:
            if ln.name == name:
                return ln
        raise KeyError(name)

    def summary(self) -> str:
        head = "audit PASS" if self.passed else "audit FAIL"
        return "\n".join([head] + [ln.render() for ln in self.lines])


def audit_conditions(
    problem: HalanayProblem,
    t_grid: Sequence[float],
    strict_graininess: bool = False,
    rhs: Callable | None = None,
    traj: Trajectory | None = None,
) -> AuditReport:
    """Check the decay hypotheses pointwise on t_grid.

    With a custom rhs and its trajectory, an extra line spot-checks the
    domination |f + p x| <= sum q_i |x(delta_minus(h_i, t))|^ell at the
    computed nodes.
    """
    rep = AuditReport()
    pf = as_fn(problem.p)
    qfs = [as_fn(qi) for qi in problem.q]

    bad_coeff = None
    for t in t_grid:
        pv = pf(t)
        if not pv > 0.0:
            bad_coeff = f"p({t}) = {pv:.6g} is not positive"
            break
        qvs = [qf(t) for qf in qfs]
        if problem.form in (SUM_POWER,):
            if any(v < 0.0 for v in qvs):
                bad_coeff = f"negative feedback coefficient at t={t}"
                break
            if not qvs[-1] > 0.0:
                bad_coeff = f"last feedback coefficient vanishes at t={t}"
                break
        else:
            if any(not v > 0.0 for v in qvs):
                bad_coeff = f"feedback coefficient not positive at t={t}"
                break
    rep.lines.append(
        AuditLine(
            "coefficient-positivity",
            bad_coeff is None,
            None,
            bad_coeff or "p > 0 and feedback coefficients admissible on the grid",
        )
    )

    worst_margin = math.inf
    worst_margin_t = None
    for t in t_grid:
        m = char_poly(problem, t, 0.0)
        if m < worst_margin:
            worst_margin, worst_margin_t = m, t
    ok = bool(t_grid) and worst_margin > 0.0
    rep.lines.append(
        AuditLine(
            "zero-rate-margin",
            ok,
            None if worst_margin is math.inf else worst_margin,
            f"min over grid of P(t, 0), attained at t={worst_margin_t}",
        )
    )

    worst_grain = math.inf
    worst_grain_t = None
    for t in t_grid:
        g = 1.0 - problem.mu_tilde_at(t) * pf(t)
        if g < worst_grain:
            worst_grain, worst_grain_t = g, t
    if strict_graininess:
        ok = bool(t_grid) and worst_grain > 0.0
        need = "1 - mu_tilde*p > 0 (strict)"
    else:
        ok = bool(t_grid) and worst_grain >= 0.0
        need = "1 - mu_tilde*p >= 0"
    rep.lines.append(
        AuditLine(
            "graininess-vs-decay",
            ok,
            None if worst_grain is math.inf else worst_grain,
            f"{need}, minimum at t={worst_grain_t}",
        )
    )

    if rhs is not None and traj is not None:
        worst = -math.inf
        worst_t = None
        spec = problem.spec
        stride = max(1, len(traj.times) // 200)
        for i in range(0, len(traj.times), stride):
            t = float(traj.times[i])
            x = float(traj.values[i])
            if not math.isfinite(x):
                continue
            delayed = []
            usable = True
            for j in range(1, spec.r + 1):
                try:
                    d = traj._eval(delay_apply(spec, j, t), hermite=False)
                except (OutOfDomain, TsError):
                    usable = False
                    break
                delayed.append(d)
            if not usable:
                continue
            bound = qfs[0](t) * abs(x) ** problem.ell + sum(
                qfs[j](t) * abs(delayed[j - 1]) ** problem.ell
                for j in range(1, spec.r + 1)
            )
            f_val = rhs(t, x, tuple(delayed))
            excess = abs(f_val + pf(t) * x) - bound
            if excess > worst:
                worst, worst_t = excess, t
        tol = 1e-7
        rep.lines.append(
            AuditLine(
                "domination",
                worst <= tol,
                None if worst == -math.inf else worst,
                f"max of |f + p x| - sum q_i |x_i|^ell over nodes, at t={worst_t}",
            )
        )
    return rep


def choose_K0(problem: HalanayProblem, history, pad: float = 1.01) -> float:
    """1.01 * max(1, sup |phi|) over the delay window [delta_minus(h_r,t0), t0]."""
    hist = as_history(history)
    ts = problem.ts
    t0 = problem.t0
    w0 = problem.spec.window_start()
    sup = abs(_hist_eval(hist, t0))
    if w0 < t0:
        for piece in ts.decompose(w0, t0):
            if piece[0] == "scattered":
                sup = max(sup, abs(_hist_eval(hist, piece[1])))
            else:
                _, a, b = piece
                for j in range(33):
                    sup = max(sup, abs(_hist_eval(hist, a + (b - a) * j / 32)))
    return pad * max(1.0, sup)


@dataclass
class BoundReport:
    verdict: str
    t_violation: float | None
    min_margin: float
    margins: np.ndarray
    envelope: np.ndarray
    K0: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.verdict == CERTIFIED


def verify_bound(
    traj: Trajectory, field: RootField, K0: float, tol_abs: float = BOUND_TOL
) -> BoundReport:
    """Compare |x| against K0 * e_lambda(t, t0) at every trajectory node."""
    if not field.grid:
        raise FieldGap("empty root field")
    t0 = float(traj.times[0])
    if field.grid[0] > t0 + 1e-9 * max(1.0, abs(t0)):
        raise WindowMismatch(
            f"root field starts at {field.grid[0]}, after the run start {t0}"
        )
    try:
        env = exponential_envelope(traj, field, K0)
    except OutOfDomain as exc:
        raise FieldGap(str(exc)) from exc
    absx = np.abs(traj.values)
    margins = np.where(np.isfinite(absx), env - absx, -math.inf)
    verdict = CERTIFIED
    t_viol = None
    run = 0
    for i, m in enumerate(margins):
        if m < -tol_abs:
            verdict = VIOLATED
            t_viol = float(traj.times[i])
            break
        if m < 0.0 and not traj.scattered[i]:
            run += 1
            if run >= 3:
                # three dense nodes in a row below the envelope is a trend,
                # not integrator noise
                verdict = VIOLATED
                t_viol = float(traj.times[i - 2])
                break
        else:
            run = 0
    return BoundReport(
        verdict, t_viol, float(margins.min()), margins, env, K0, tol_abs
    )


def decay_rate(traj: Trajectory, window_fraction: float = 0.5) -> float:
    """Least-squares slope of log |x| over the trailing part of the run."""
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError("window_fraction must lie in (0, 1]")
    n = len(traj.times)
    k = max(3, int(math.ceil(n * window_fraction)))
    t_tail = np.asarray(traj.times[-k:], dtype=float)
    v_tail = np.abs(np.asarray(traj.values[-k:], dtype=float))
    mask = np.isfinite(v_tail) & (v_tail > 0.0)
    if mask.sum() < 3:
        raise NonpositiveTail(
            "trailing window has fewer than 3 positive finite samples"
        )
    slope = np.polyfit(t_tail[mask], np.log(v_tail[mask]), 1)[0]
    return float(slope)


@dataclass
class Certificate:
    verdict: str
    K0: float | None
    t_violation: float | None
    min_margin: float | None
    decay_estimate: float | None
    audit: AuditReport
    field: RootField | None
    trajectory: Trajectory | None
    envelope: np.ndarray | None
    margins: np.ndarray | None
    digest: str

    @property
    def passed(self) -> bool:
        return self.verdict == CERTIFIED

    def rate_range(self) -> tuple[float, float] | None:
        if self.field is None:
            return None
        finite = [v for v in self.field.lam if not math.isnan(v)]
        if not finite:
            return None
        return (min(finite), max(finite))

    def summary(self) -> str:
        out = [f"verdict: {self.verdict}"]
        if self.K0 is not None:
            out.append(f"K0: {self.K0:.6g}")
        rr = self.rate_range()
        if rr is not None:
            out.append(f"rate range: [{rr[0]:.6g}, {rr[1]:.6g}]")
        if self.min_margin is not None:
            out.append(f"min margin: {self.min_margin:.6g}")
        if self.t_violation is not None:
            out.append(f"first violation at t = {self.t_violation:.6g}")
        if self.decay_estimate is not None:
            out.append(f"observed decay rate: {self.decay_estimate:.6g}")
        out.append(f"digest: {self.digest}")
        out.append(self.audit.summary())
        return "\n".join(out)


def _coeff_tag(c) -> str:
    if isinstance(c, (int, float)):
        return f"{float(c):.17g}"
    return getattr(c, "__name__", "callable")


def problem_digest(problem: HalanayProblem, t_end: float, K0: float) -> str:
    parts = [
        problem.form,
        f"{problem.ell:.17g}",
        f"{problem.Kconst:.17g}",
        f"{problem.t0:.17g}",
        ",".join(f"{h:.17g}" for h in problem.spec.delays),
        ",".join(f"{a:.17g}" for a in problem.alpha),
        _coeff_tag(problem.p),
        ",".join(_coeff_tag(q) for q in problem.q),
        problem.ts.label or "scale",
        f"{t_end:.17g}",
        f"{K0:.17g}",
    ]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:12]


def certify(
    problem: HalanayProblem,
    history,
    t_end: float,
    rhs: Callable | None = None,
    dense_step: float | None = None,
    tol_abs: float = BOUND_TOL,
    K0: float | None = None,
    root_grid: Sequence[float] | None = None,
    strict_graininess: bool | None = None,
) -> Certificate:
    """Run the full pipeline and produce a Certificate.

    strict_graininess defaults to True exactly when a custom rhs is being
    dominated (the nonlinear estimate needs 1 - mu_tilde*p > 0 strictly).
    """
    strict = (rhs is not None) if strict_graininess is None else strict_graininess
    grid = list(root_grid) if root_grid is not None else default_root_grid(problem, t_end)
    traj = simulate(problem, history, t_end, rhs=rhs, dense_step=dense_step)
    audit = audit_conditions(problem, grid, strict, rhs=rhs, traj=traj)
    fld = root_field(problem, grid)
    if fld.partial:
        first_err = next(e for e in fld.errors if e is not None)
        audit.lines.append(
            AuditLine("root-construction", False, None, first_err)
        )
    K0v = K0 if K0 is not None else choose_K0(problem, history)
    digest = problem_digest(problem, t_end, K0v)

    try:
        dec = decay_rate(traj)
    except NonpositiveTail:
        dec = None

    margins = None
    envelope = None
    min_margin = None
    t_viol = None
    if not fld.partial:
        try:
            report = verify_bound(traj, fld, K0v, tol_abs)
            margins = report.margins
            envelope = report.envelope
            min_margin = report.min_margin
            t_viol = report.t_violation
            bound_verdict = report.verdict
        except (NegativeOneplus, FieldGap, WindowMismatch) as exc:
            audit.lines.append(AuditLine("envelope", False, None, str(exc)))
            bound_verdict = None
    else:
        bound_verdict = None

    if not audit.passed:
        verdict = HYPOTHESIS_FAILED
    else:
        verdict = bound_verdict if bound_verdict is not None else HYPOTHESIS_FAILED
    return Certificate(
        verdict,
        K0v,
        t_viol,
        min_margin,
        dec,
        audit,
        fld,
        traj,
        envelope,
        margins,
        digest,
    )


VERDICT_CODES = {CERTIFIED: 0, VIOLATED: 1, HYPOTHESIS_FAILED: 2}


@dataclass
class SweepResult:
    p_values: tuple[float, ...]
    q_values: tuple[float, ...]
    codes: np.ndarray  # shape (len(p), len(q)); 0/1/2 per VERDICT_CODES, 3 = error
    min_margins: np.ndarray
    messages: dict

    def cells(self):
        for i, pv in enumerate(self.p_values):
            for j, qv in enumerate(self.q_values):
                yield i, j, pv, qv, int(self.codes[i, j]), float(self.min_margins[i, j])


def sweep_grid(
    factory: Callable[[float, float], HalanayProblem],
    history,
    t_end: float,
    p_values: Sequence[float],
    q_values: Sequence[float],
    **certify_kwargs,
) -> SweepResult:
    """Certify every (p, q) cell, row-major, in the given order."""
    p_values = tuple(float(v) for v in p_values)
    q_values = tuple(float(v) for v in q_values)
    codes = np.full((len(p_values), len(q_values)), 3, dtype=int)
    margins = np.full((len(p_values), len(q_values)), math.nan)
    messages: dict = {}
    for i, pv in enumerate(p_values):
        for j, qv in enumerate(q_values):
            try:
                cert = certify(factory(pv, qv), history, t_end, **certify_kwargs)
                codes[i, j] = VERDICT_CODES[cert.verdict]
                if cert.min_margin is not None:
                    margins[i, j] = cert.min_margin
            except (TsError, ValueError, RuntimeError) as exc:
                codes[i, j] = 3
                messages[(i, j)] = f"{type(exc).__name__}: {exc}"
    return SweepResult(p_values, q_values, codes, margins, messages)
