"""Shift operators and the delay functions they generate.

A shift system on a scale consists of a pair of maps delta_plus(s, t) /
delta_minus(s, t) ("move t right/left by shift size s") together with an
initial point t0, subject to the axioms P.1-P.5: strict monotonicity in t,
monotone dependence on the shift size, identity at t0, mutual inversion, and
commutation.  Fixing the shift size at h > t0 turns delta_minus(h, .) into a
delay function t -> delta_minus(h, t), the time-scale replacement for t - h.

Built-in families:

    translation:  t -+ (s - t0)                  (arithmetic-like scales)
    scaling:      t * t0 / s  and  t * s / t0    (geometric scales, t0 > 0)
    sqrt:         sqrt(t^2 -+ s^2 +- t0^2)       (square-root grids)

Domains are handled by evaluate-and-check-membership: a shift evaluation
whose result is not a scale point raises OutOfDomain.  The axioms quantify
over continua, so the validators here check them on seeded random samples
and return reports instead of raising.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import ConfigError, IncompatibleFamily, OutOfDomain
from .timescale import (
    ArithmeticGrid,
    DenseInterval,
    GeometricGrid,
    SqrtGrid,
    TimeScale,
)

TRANSLATION = "translation"
SCALING = "scaling"
SQRT = "sqrt"
CUSTOM = "custom"
FAMILIES = (TRANSLATION, SCALING, SQRT, CUSTOM)

REL_TOL = 1e-10


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class ShiftSystem:
    ts: TimeScale
    t0: float
    delta_minus: Callable[[float, float], float]
    delta_plus: Callable[[float, float], float]
    family: str
    star_ok: Callable[[float], bool]

    def _eval(self, raw: Callable[[float, float], float], s: float, t: float) -> float:
        if s < self.t0 - 1e-12 * max(1.0, abs(self.t0)):
            raise OutOfDomain(f"shift size {s} below the initial point {self.t0}")
        if not self.ts.contains(s):
            raise OutOfDomain(f"shift size {s} is not a scale point")
        if not (self.ts.contains(t) and self.star_ok(t)):
            raise OutOfDomain(f"{t} is outside the shift domain")
        v = raw(self.ts.snap(s), self.ts.snap(t))
        if not math.isfinite(v) or not (self.ts.contains(v) and self.star_ok(v)):
            raise OutOfDomain(f"shift of {t} by {s} left the scale (got {v})")
        return self.ts.snap(v)

    def minus(self, s: float, t: float) -> float:
        return self._eval(self.delta_minus, s, t)

    def plus(self, s: float, t: float) -> float:
        return self._eval(self.delta_plus, s, t)


def builtin_shift(
    family: str, ts: TimeScale, t0: float | None = None
) -> ShiftSystem:
    """Construct one of the built-in shift families on a compatible scale.

    Compatibility is structural: translation needs an additively generated
    scale (no geometric/sqrt segments), scaling a multiplicatively generated
    or dense-positive one, sqrt a quadratic grid.  A scale the family formula
    cannot map into itself raises IncompatibleFamily; finer defects (a delay
    landing off-scale) surface later as OutOfDomain or validator failures.
    """
    fam = family.strip().lower()
    kinds = {type(seg) for seg in ts.segments}
    if fam == TRANSLATION:
        if kinds & {GeometricGrid, SqrtGrid}:
            raise IncompatibleFamily("translation does not close geometric/sqrt grids")
        t0 = 0.0 if t0 is None else float(t0)
        dm = lambda s, t: t - (s - t0)
        dp = lambda s, t: t + (s - t0)
        star = ts.in_star
    elif fam == SCALING:
        if kinds - {GeometricGrid, DenseInterval}:
            raise IncompatibleFamily("scaling closes only geometric grids and dense scales")
        t0 = 1.0 if t0 is None else float(t0)
        if not t0 > 0:
            raise IncompatibleFamily("scaling needs a positive initial point")
        dm = lambda s, t: t * t0 / s if t >= 0 else s * t / t0
        dp = lambda s, t: t * s / t0 if t >= 0 else t * t0 / s
        star = lambda t: ts.in_star(t) and t != 0.0
    elif fam == SQRT:
        if kinds - {SqrtGrid, DenseInterval}:
            raise IncompatibleFamily("sqrt shifts close only sqrt grids and dense scales")
        if any(isinstance(s, DenseInterval) and s.lo < 0 for s in ts.segments):
            raise IncompatibleFamily("sqrt shifts need a nonnegative scale")
        t0 = 0.0 if t0 is None else float(t0)
        if t0 < 0:
            raise IncompatibleFamily("sqrt shifts need t0 >= 0")

        def dm(s, t, _t0=t0):
            r = t * t - s * s + _t0 * _t0
            return math.sqrt(r) if r >= 0 else math.nan

        def dp(s, t, _t0=t0):
            r = t * t + s * s - _t0 * _t0
            return math.sqrt(r) if r >= 0 else math.nan

        star = ts.in_star
    else:
        raise IncompatibleFamily(
            f"unknown family {family!r}; custom systems go through custom_shift"
        )
    if not ts.contains(t0):
        raise IncompatibleFamily(f"initial point {t0} is not a point of the scale")
    return ShiftSystem(ts, ts.snap(t0), dm, dp, fam, star)


def custom_shift(
    ts: TimeScale,
    t0: float,
    delta_minus: Callable[[float, float], float],
    delta_plus: Callable[[float, float], float],
    star_ok: Callable[[float], bool] | None = None,
) -> ShiftSystem:
    """Wrap user-supplied shift maps.  Both directions are required; no
    numeric inversion is attempted."""
    if not ts.contains(t0):
        raise OutOfDomain(f"initial point {t0} is not a point of the scale")
    return ShiftSystem(
        ts, ts.snap(t0), delta_minus, delta_plus, CUSTOM, star_ok or ts.in_star
    )


# ---------------------------------------------------------------------------
# delay specifications


@dataclass(frozen=True)
class DelaySpec:
    """An increasing list of delay sizes h0 = t0 < h1 < ... < hr.

    h0 is the trivial delay (delta_minus(t0, t) = t); the real delays start
    at index 1.
    """

    shift: ShiftSystem
    delays: tuple[float, ...]

    @property
    def ts(self) -> TimeScale:
        return self.shift.ts

    @property
    def t0(self) -> float:
        return self.shift.t0

    @property
    def r(self) -> int:
        return len(self.delays) - 1

    @property
    def h_r(self) -> float:
        return self.delays[-1]

    def window_start(self, t: float | None = None) -> float:
        """delta_minus(h_r, t): left end of the delayed window (default t=t0)."""
        at = self.t0 if t is None else t
        if self.r == 0:
            return self.ts.snap(at)
        return self.shift.minus(self.h_r, at)


def make_delay_spec(shift: ShiftSystem, delays: Sequence[float]) -> DelaySpec:
    ts = shift.ts
    hs = [ts.snap(h) for h in delays]
    t0 = shift.t0
    if not hs or abs(hs[0] - t0) > 1e-12 * max(1.0, abs(t0)):
        hs.insert(0, t0)
    else:
        hs[0] = t0
    for a, b in zip(hs, hs[1:]):
        if not a < b:
            raise OutOfDomain(f"delays must be strictly increasing, got {a} then {b}")
    # Probe the window starts; families whose backward shift is partial near
    # t0 (sqrt grids) still construct, and totality is the validator's job.
    for h in hs[1:]:
        try:
            shift.minus(h, t0)
        except OutOfDomain:
            pass
    return DelaySpec(shift, tuple(hs))


def delay_apply(spec: DelaySpec, i: int, t: float) -> float:
    """delta_minus(h_i, t) for t in [t0, inf); index 0 is the identity."""
    if not 0 <= i <= spec.r:
        raise OutOfDomain(f"delay index {i} out of range 0..{spec.r}")
    ts = spec.ts
    if not ts.contains(t) or t < spec.t0 - 1e-12 * max(1.0, abs(spec.t0)):
        raise OutOfDomain(f"{t} is not in the domain [t0, inf) of the delay")
    if i == 0:
        return ts.snap(t)
    return spec.shift.minus(spec.delays[i], t)


# ---------------------------------------------------------------------------
# validation reports


@dataclass
class CheckResult:
    name: str
    checked: int = 0
    failures: int = 0
    witness: str | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def fail(self, witness: str):
        self.failures += 1
        if self.witness is None:
            self.witness = witness


@dataclass
class ValidationReport:
    title: str
    seed: int
    samples: int
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def result(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def summary(self) -> str:
        head = "PASS" if self.passed else "FAIL"
        lines = [f"{head} {self.title} (samples={self.samples}, seed={self.seed})"]
        for r in self.results:
            mark = "pass" if r.passed else "FAIL"
            line = f"  {r.name}: {mark} ({r.checked} checked"
            if r.failures:
                line += f", {r.failures} failures; witness: {r.witness}"
            line += ")"
            lines.append(line)
        return "\n".join(lines)


def _sample_pools(shift: ShiftSystem, rng, window, samples):
    ts, t0 = shift.ts, shift.t0
    if window is not None:
        lo, hi = window
    else:
        hi = t0 + 64.0
        lo = t0 / 64.0 if shift.family == SCALING else max(ts.min_point, t0 - 64.0)
    n = max(32, min(samples, 256))
    sizes = [p for p in ts.sample_points(rng, t0, hi, n) if p >= t0]
    stars = [p for p in ts.sample_points(rng, lo, hi, n) if shift.star_ok(p)]
    if shift.family == SCALING and ts.segments[0].dense and ts.min_point < 0:
        # exercise the negative branch of the piecewise scaling maps
        stars += [p for p in ts.sample_points(rng, -hi, -1e-3, n // 2) if shift.star_ok(p)]
    if not sizes or not stars:
        raise OutOfDomain("sampling produced no admissible shift arguments")
    return sizes, stars


def validate_shift_axioms(
    shift: ShiftSystem,
    samples: int = 1000,
    seed: int = 42,
    window: tuple[float, float] | None = None,
) -> ValidationReport:
    """Randomized check of the shift axioms P.1-P.5 and their consequences.

    Consequences checked alongside the axioms (names in the report):
    identity-at-self (i), identity-size (ii), inversion (iii), reflection (iv),
    commutativity (v), range-plus (vi), range-minus (vii), derivative-positive
    (viii), composition (ix), separation (x).  Inadmissible draws (OutOfDomain)
    are skipped, mirroring the implicitly defined shift domains.
    """
    rng = random.Random(seed)
    rep = ValidationReport("shift axioms", seed, samples)
    names = [
        "P.1 monotone-in-t",
        "P.2 monotone-in-size",
        "P.3 identity-at-t0",
        "P.4 round-trip",
        "P.5 commutation",
        "(i) identity-at-self",
        "(ii) identity-size",
        "(iii) inversion",
        "(iv) reflection",
        "(v) commutativity",
        "(vi) range-plus",
        "(vii) range-minus",
        "(viii) derivative-positive",
        "(ix) composition",
        "(x) separation",
    ]
    res = {n: CheckResult(n) for n in names}
    rep.results = [res[n] for n in names]
    sizes, stars = _sample_pools(shift, rng, window, samples)
    ts, t0 = shift.ts, shift.t0

    def attempt(name, fn):
        try:
            fn(res[name])
        except OutOfDomain:
            pass

    for _ in range(samples):
        s = rng.choice(sizes)
        u_size = rng.choice(sizes)
        t = rng.choice(stars)
        v = rng.choice(stars)

        def p1(r):
            a, b = (t, v) if t < v else (v, t)
            if not a < b:
                return
            dm1, dm2 = shift.minus(s, a), shift.minus(s, b)
            dp1, dp2 = shift.plus(s, a), shift.plus(s, b)
            r.checked += 1
            if not (dm1 < dm2 and dp1 < dp2):
                r.fail(f"s={s}, t={a}<{b} but images not ordered")

        def p2(r):
            a, b = (s, u_size) if s < u_size else (u_size, s)
            if not a < b:
                return
            m1, m2 = shift.minus(a, t), shift.minus(b, t)
            q1, q2 = shift.plus(a, t), shift.plus(b, t)
            r.checked += 1
            if not (m1 > m2 and q1 < q2):
                r.fail(f"sizes {a}<{b} at t={t}: minus {m1},{m2} plus {q1},{q2}")

        def p3(r):
            r.checked += 1
            a = shift.plus(s, t0)
            b = shift.plus(t0, t)
            if _rel(a, s) > REL_TOL or _rel(b, t) > REL_TOL:
                r.fail(f"plus({s},t0)={a} (want {s}); plus(t0,{t})={b}")

        def p4(r):
            r.checked += 1
            back = shift.minus(s, shift.plus(s, t))
            forth = shift.plus(s, shift.minus(s, t))
            if _rel(back, t) > REL_TOL or _rel(forth, t) > REL_TOL:
                r.fail(f"s={s}, t={t}: round trips {back}, {forth}")

        def p5(r):
            r.checked += 1
            a = shift.minus(u_size, shift.plus(s, t))
            b = shift.plus(s, shift.minus(u_size, t))
            if _rel(a, b) > REL_TOL:
                r.fail(f"s={s}, u={u_size}, t={t}: {a} vs {b}")

        def li(r):
            r.checked += 1
            a = shift.minus(s, s)
            if _rel(a, t0) > REL_TOL:
                r.fail(f"minus({s},{s})={a}, want t0={t0}")

        def lii(r):
            r.checked += 1
            a = shift.minus(t0, t)
            if _rel(a, t) > REL_TOL:
                r.fail(f"minus(t0,{t})={a}")

        def liii(r):
            u2 = shift.plus(s, t)
            r.checked += 1
            back = shift.minus(s, u2)
            if _rel(back, t) > REL_TOL:
                r.fail(f"plus({s},{t})={u2} but minus({s},{u2})={back}")

        def liv(r):
            if t < t0:
                return
            a = shift.plus(t, shift.minus(s, t0))
            b = shift.minus(s, t)
            r.checked += 1
            if _rel(a, b) > REL_TOL:
                r.fail(f"s={s}, t={t}: {a} vs {b}")

        def lv(r):
            if t < t0 or u_size < t0:
                return
            a = shift.plus(u_size, t)
            b = shift.plus(t, u_size)
            r.checked += 1
            if _rel(a, b) > REL_TOL:
                r.fail(f"plus({u_size},{t})={a} vs plus({t},{u_size})={b}")

        def lvi(r):
            if t < t0:
                return
            a = shift.plus(s, t)
            r.checked += 1
            if a < t0 - 1e-9:
                r.fail(f"plus({s},{t})={a} < t0")

        def lvii(r):
            if t < s:
                return
            a = shift.minus(s, t)
            r.checked += 1
            if a < t0 - 1e-9:
                r.fail(f"minus({s},{t})={a} < t0")

        def lviii(r):
            m = ts.mu(t)
            if m > 0:
                q = (shift.plus(s, ts.sigma(t)) - shift.plus(s, t)) / m
            else:
                e = 1e-6 * max(1.0, abs(t))
                if not ts.contains(t + e):
                    return
                q = (shift.plus(s, t + e) - shift.plus(s, t)) / e
            r.checked += 1
            if not q > 0:
                r.fail(f"forward difference of plus({s},.) at {t} is {q}")

        def lix(r):
            if t < t0:
                return
            uu, ss, vv = sorted((s, u_size, t))
            a = shift.plus(shift.minus(uu, ss), shift.minus(ss, vv))
            b = shift.minus(uu, vv)
            r.checked += 1
            if _rel(a, b) > REL_TOL:
                r.fail(f"u={uu},s={ss},v={vv}: {a} vs {b}")

        def lx(r):
            d = shift.minus(s, t) if t >= t0 else None
            if d is None:
                return
            if _rel(d, t0) <= 1e-12:
                r.checked += 1
                if _rel(s, t) > 1e-9:
                    r.fail(f"minus({s},{t})=t0 but s != t")

        attempt("P.1 monotone-in-t", p1)
        attempt("P.2 monotone-in-size", p2)
        attempt("P.3 identity-at-t0", p3)
        attempt("P.4 round-trip", p4)
        attempt("P.5 commutation", p5)
        attempt("(i) identity-at-self", li)
        attempt("(ii) identity-size", lii)
        attempt("(iii) inversion", liii)
        attempt("(iv) reflection", liv)
        attempt("(v) commutativity", lv)
        attempt("(vi) range-plus", lvi)
        attempt("(vii) range-minus", lvii)
        attempt("(viii) derivative-positive", lviii)
        attempt("(ix) composition", lix)
        attempt("(x) separation", lx)
        # exact separation draw: s == t
        try:
            d = shift.minus(s, s)
            res["(x) separation"].checked += 1
            if _rel(d, t0) > REL_TOL:
                res["(x) separation"].fail(f"minus({s},{s})={d} != t0")
        except OutOfDomain:
            pass
    return rep


def validate_delay_function(
    spec: DelaySpec,
    window: tuple[float, float] | None = None,
    samples: int = 200,
    seed: int = 42,
) -> ValidationReport:
    """Check that each delay size generates a genuine delay function on window.

    Checks per delay h: onto-ness of delta_minus(h, .) via the inverse round
    trip delta_plus(h, delta_minus(h, t)) = t; preservation of point structure
    (right-scattered maps to right-scattered, right-dense to right-dense);
    commutation with the forward jump at scattered points; strict
    monotonicity; and domain totality on the sampled window.
    """
    shift = spec.shift
    ts, t0 = spec.ts, spec.t0
    rng = random.Random(seed)
    if window is None:
        window = (t0, t0 + 50.0)
    lo, hi = window
    if lo < t0:
        raise OutOfDomain("validation window must sit inside [t0, inf)")
    rep = ValidationReport("delay function", seed, samples)
    names = [
        "domain",
        "onto-roundtrip",
        "structure-preservation",
        "sigma-commutation",
        "monotonicity",
    ]
    res = {n: CheckResult(n) for n in names}
    rep.results = [res[n] for n in names]

    pts = {ts.snap(lo) if ts.contains(lo) else t0, t0}
    p = ts.prev_point_at_or_before(hi)
    if p is not None and p >= lo:
        pts.add(p)
    for piece in ts.decompose(ts.next_point_at_or_after(lo), ts.prev_point_at_or_before(hi)):
        if piece[0] == "scattered" and len(pts) < 400:
            pts.add(piece[1])
    pts.update(ts.sample_points(rng, lo, hi, samples))
    ordered = sorted(x for x in pts if lo - 1e-12 <= x <= hi + 1e-12 and x >= t0)

    def rscat(x: float) -> bool:
        return ts.mu(x) > 1e-12 * max(1.0, abs(x))

    for i in range(1, spec.r + 1):
        h = spec.delays[i]
        images: list[tuple[float, float]] = []
        for t in ordered:
            res["domain"].checked += 1
            try:
                d = shift.minus(h, t)
            except OutOfDomain as exc:
                res["domain"].fail(f"h={h}, t={t}: {exc}")
                continue
            images.append((t, d))
            res["onto-roundtrip"].checked += 1
            try:
                back = shift.plus(h, d)
                if _rel(back, t) > REL_TOL:
                    res["onto-roundtrip"].fail(f"h={h}: plus(h, minus(h,{t}))={back}")
            except OutOfDomain as exc:
                res["onto-roundtrip"].fail(f"h={h}, t={t}: inverse failed ({exc})")
            res["structure-preservation"].checked += 1
            ts_scat, im_scat = rscat(t), rscat(d)
            if ts_scat != im_scat:
                kind_t = "right-scattered" if ts_scat else "right-dense"
                kind_d = "right-scattered" if im_scat else "right-dense"
                res["structure-preservation"].fail(
                    f"h={h}: {kind_t} t={t} maps to {kind_d} {d}"
                )
            if ts_scat:
                res["sigma-commutation"].checked += 1
                try:
                    a = shift.minus(h, ts.sigma(t))
                    b = ts.sigma(d)
                    if _rel(a, b) > REL_TOL:
                        res["sigma-commutation"].fail(
                            f"h={h}, t={t}: minus(h,sigma(t))={a} vs sigma(minus(h,t))={b}"
                        )
                except OutOfDomain as exc:
                    res["sigma-commutation"].fail(f"h={h}, t={t}: {exc}")
        for (t1, d1), (t2, d2) in zip(images, images[1:]):
            res["monotonicity"].checked += 1
            if not (t1 < t2 and d1 < d2):
                res["monotonicity"].fail(f"h={h}: t {t1}->{t2} but image {d1}->{d2}")
    return rep


# ---------------------------------------------------------------------------
# JSON ingest


def shift_from_json(doc: dict, ts: TimeScale, ptr: str = "/shift") -> ShiftSystem:
    if not isinstance(doc, dict):
        raise ConfigError(ptr, "shift must be an object")
    family = doc.get("family")
    if family not in ("translation", "scaling", "sqrt"):
        if family == "custom":
            raise ConfigError(
                f"{ptr}/family", "custom shifts must be constructed in code"
            )
        raise ConfigError(
            f"{ptr}/family", f"expected translation|scaling|sqrt, got {family!r}"
        )
    t0 = doc.get("t0")
    if t0 is not None and not isinstance(t0, (int, float)):
        raise ConfigError(f"{ptr}/t0", "t0 must be a number")
    try:
        return builtin_shift(family, ts, None if t0 is None else float(t0))
    except IncompatibleFamily as exc:
        raise ConfigError(f"{ptr}/family", str(exc)) from exc


def delays_from_json(doc: dict, ts: TimeScale, ptr: str = "") -> DelaySpec:
    shift = shift_from_json(doc.get("shift", {}), ts, f"{ptr}/shift")
    raw = doc.get("delays", [])
    if not isinstance(raw, list):
        raise ConfigError(f"{ptr}/delays", "delays must be an array")
    hs = []
    for i, h in enumerate(raw):
        if isinstance(h, bool) or not isinstance(h, (int, float)):
            raise ConfigError(f"{ptr}/delays/{i}", "delay must be a number")
        if not ts.contains(float(h)):
            raise ConfigError(f"{ptr}/delays/{i}", f"delay {h} is not a scale point")
        hs.append(float(h))
    try:
        return make_delay_spec(shift, hs)
    except OutOfDomain as exc:
        raise ConfigError(f"{ptr}/delays", str(exc)) from exc
