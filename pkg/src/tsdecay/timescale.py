"""Closed subsets of the reals and the hybrid calculus on them.

A time scale is an arbitrary nonempty closed subset of R.  We represent one as
an ordered list of disjoint segments, each either a closed interval (dense) or
a generated family of isolated points (arithmetic / geometric / sqrt grids, or
an explicit finite list).  The forward jump sigma, backward jump rho,
graininess mu, the delta derivative and the delta (Cauchy) integral are all
derived from the segment structure:

    sigma(t) = inf {s in T : s > t}        (inf of empty set := sup T)
    mu(t)    = sigma(t) - t
    int_s^t f(r) dr  =  sum of mu(r) f(r) over right-scattered r in [s, t)
                       + ordinary integrals over the dense parts.

Membership tests snap to generated points within a relative tolerance
(GridPolicy.membership_rtol) so that values produced by shift arithmetic
(t/s, sqrt(t^2 - s^2), ...) land back on the grid they came from.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import (
    AccumulationPoint,
    ConfigError,
    EmptyWindow,
    NotDifferentiablePoint,
    NotInTimeScale,
    QuadratureFailure,
)

INF = math.inf

# Relative tolerance used by quadrature on dense segments.
QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class GridPolicy:
    """Numeric policy knobs shared by the point-walking operations.

    dense_step is the discretization step used when a dense segment has to be
    sampled (simulation, iterate_points).  None means: pick span/256, capped
    into [1e-9, 0.25].  membership_rtol controls snapping of floats onto
    generated grid points.
    """

    dense_step: float | None = None
    membership_rtol: float = 1e-12

    def __post_init__(self):
        if self.dense_step is not None and not self.dense_step > 0:
            raise ValueError("dense_step must be positive")
        if not self.membership_rtol > 0:
            raise ValueError("membership_rtol must be positive")

    def step_for(self, span: float) -> float:
        if self.dense_step is not None:
            return self.dense_step
        if not math.isfinite(span):
            return 0.25
        return min(max(span / 256.0, 1e-9), 0.25)


DEFAULT_POLICY = GridPolicy()


def _tol(x: float, rtol: float) -> float:
    return rtol * max(1.0, abs(x))


# ---------------------------------------------------------------------------
# segments


@dataclass(frozen=True)
class DenseInterval:
    """Closed interval [a, b]; a may be -inf and b may be +inf."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("dense interval needs a < b")

    @property
    def lo(self) -> float:
        return self.a

    @property
    def hi(self) -> float:
        return self.b

    @property
    def dense(self) -> bool:
        return True

    def contains(self, x: float, rtol: float) -> bool:
        t = _tol(x, rtol)
        return self.a - t <= x <= self.b + t

    def snap(self, x: float, rtol: float) -> float:
        # clamp values that passed the tolerant containment test into [a, b]
        return min(max(x, self.a), self.b)


class _GridSegment:
    """Shared behaviour for the generated isolated-point families."""

    dense = False

    # subclasses provide: _index_of(x, rtol) -> int | None, point(i) -> float,
    # _imin, _imax (None = unbounded above)

    def contains(self, x: float, rtol: float) -> bool:
        return self._index_of(x, rtol) is not None

    def snap(self, x: float, rtol: float) -> float:
        i = self._index_of(x, rtol)
        if i is None:
            raise NotInTimeScale(f"{x!r} not on grid {self!r}")
        return self.point(i)

    def next_point(self, x: float, rtol: float) -> float | None:
        """Smallest grid point strictly greater than x, None if the segment ends."""
        i = self._index_of(x, rtol)
        if i is not None:
            j = i + 1
        else:
            j = self._first_index_above(x)
        if j is None:
            return None
        if self._imax is not None and j > self._imax:
            return None
        if j < self._imin:
            j = self._imin
        return self.point(j)

    def prev_point(self, x: float, rtol: float) -> float | None:
        i = self._index_of(x, rtol)
        if i is not None:
            j = i - 1
        else:
            j = self._last_index_below(x)
        if j is None or j < self._imin:
            return None
        if self._imax is not None and j > self._imax:
            j = self._imax
        return self.point(j)

    def indices_in(self, lo: float, hi: float, rtol: float) -> range:
        """Index range of grid points p with lo <= p <= hi."""
        i = self._index_of(lo, rtol)
        if i is None:
            i = self._first_index_above(lo)
            if i is None:
                return range(0)
        i = max(i, self._imin)
        j = self._index_of(hi, rtol)
        if j is None:
            j = self._last_index_below(hi)
            if j is None:
                return range(0)
        if self._imax is not None:
            j = min(j, self._imax)
        if j < i:
            return range(0)
        return range(i, j + 1)


@dataclass(frozen=True)
class ArithmeticGrid(_GridSegment):
    """Points start + k*step for k = 0 .. count-1 (count None = unbounded)."""

    start: float
    step: float
    count: int | None = None

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.count is not None and self.count < 1:
            raise ValueError("count must be >= 1")

    @property
    def _imin(self) -> int:
        return 0

    @property
    def _imax(self) -> int | None:
        return None if self.count is None else self.count - 1

    def point(self, i: int) -> float:
        return self.start + i * self.step

    def _index_of(self, x: float, rtol: float) -> int | None:
        k = round((x - self.start) / self.step)
        if k < 0 or (self.count is not None and k >= self.count):
            return None
        if abs(self.point(k) - x) <= _tol(x, rtol):
            return int(k)
        return None

    def _first_index_above(self, x: float) -> int:
        return max(0, math.floor((x - self.start) / self.step) + 1)

    def _last_index_below(self, x: float) -> int | None:
        k = math.ceil((x - self.start) / self.step) - 1
        return None if k < 0 else k

    @property
    def lo(self) -> float:
        return self.start

    @property
    def hi(self) -> float:
        return INF if self.count is None else self.point(self.count - 1)


@dataclass(frozen=True)
class GeometricGrid(_GridSegment):
    """Points q**n for n in [nmin, nmax].

    nmin None means unbounded below: the points accumulate at 0 and the
    accumulation point itself is a member (the set must be closed), but sigma
    and mu are undefined there.  nmax None means unbounded above.
    """

    q: float
    nmin: int | None = None
    nmax: int | None = None

    def __post_init__(self):
        if not self.q > 1:
            raise ValueError("geometric base q must exceed 1")
        if self.nmin is not None and self.nmax is not None and self.nmin > self.nmax:
            raise ValueError("nmin > nmax")

    @property
    def _imin(self) -> int:
        return -(10**9) if self.nmin is None else self.nmin

    @property
    def _imax(self) -> int | None:
        return self.nmax

    def point(self, i: int) -> float:
        return self.q**i

    def _index_of(self, x: float, rtol: float) -> int | None:
        if x <= 0:
            return None
        n = round(math.log(x) / math.log(self.q))
        if self.nmin is not None and n < self.nmin:
            return None
        if self.nmax is not None and n > self.nmax:
            return None
        if abs(self.point(n) - x) <= _tol(x, rtol):
            return int(n)
        return None

    def _first_index_above(self, x: float) -> int | None:
        if x <= 0:
            return self._imin
        return math.floor(math.log(x) / math.log(self.q)) + 1

    def _last_index_below(self, x: float) -> int | None:
        if x <= 0:
            return None
        return math.ceil(math.log(x) / math.log(self.q)) - 1

    def contains(self, x: float, rtol: float) -> bool:
        if self.nmin is None and x == 0.0:
            return True  # accumulation point belongs to the closed set
        return super().contains(x, rtol)

    @property
    def lo(self) -> float:
        return 0.0 if self.nmin is None else self.point(self.nmin)

    @property
    def hi(self) -> float:
        return INF if self.nmax is None else self.point(self.nmax)


@dataclass(frozen=True)
class SqrtGrid(_GridSegment):
    """Points sqrt(n) for integer n in [nmin, nmax] (the scale N^{1/2})."""

    nmin: int = 0
    nmax: int | None = None

    def __post_init__(self):
        if self.nmin < 0:
            raise ValueError("nmin must be >= 0")
        if self.nmax is not None and self.nmax < self.nmin:
            raise ValueError("nmax < nmin")

    @property
    def _imin(self) -> int:
        return self.nmin

    @property
    def _imax(self) -> int | None:
        return self.nmax

    def point(self, i: int) -> float:
        return math.sqrt(i)

    def _index_of(self, x: float, rtol: float) -> int | None:
        if x < 0:
            return None
        n = round(x * x)
        if n < self.nmin or (self.nmax is not None and n > self.nmax):
            return None
        if abs(self.point(n) - x) <= _tol(x, rtol):
            return int(n)
        return None

    def _first_index_above(self, x: float) -> int:
        if x < 0:
            return self.nmin
        return math.floor(x * x) + 1

    def _last_index_below(self, x: float) -> int | None:
        if x <= 0:
            return None
        n = math.ceil(x * x) - 1
        return None if n < 0 else n

    @property
    def lo(self) -> float:
        return math.sqrt(self.nmin)

    @property
    def hi(self) -> float:
        return INF if self.nmax is None else math.sqrt(self.nmax)


@dataclass(frozen=True)
class ExplicitPoints(_GridSegment):
    """A finite, strictly increasing tuple of isolated points."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("need at least one point")
        for a, b in zip(self.values, self.values[1:]):
            if not a < b:
                raise ValueError("points must be strictly increasing")

    @property
    def _imin(self) -> int:
        return 0

    @property
    def _imax(self) -> int:
        return len(self.values) - 1

    def point(self, i: int) -> float:
        return self.values[i]

    def _index_of(self, x: float, rtol: float) -> int | None:
        j = bisect_right(self.values, x)
        for i in (j - 1, j):
            if 0 <= i < len(self.values) and abs(self.values[i] - x) <= _tol(x, rtol):
                return i
        return None

    def _first_index_above(self, x: float) -> int:
        return bisect_right(self.values, x)

    def _last_index_below(self, x: float) -> int | None:
        j = bisect_right(self.values, x)
        while j > 0 and self.values[j - 1] >= x:
            j -= 1
        return None if j == 0 else j - 1

    @property
    def lo(self) -> float:
        return self.values[0]

    @property
    def hi(self) -> float:
        return self.values[-1]


Segment = DenseInterval | ArithmeticGrid | GeometricGrid | SqrtGrid | ExplicitPoints


# ---------------------------------------------------------------------------
# the time scale itself


class TimeScale:
    """An ordered union of disjoint segments, treated as immutable.

    t_star_lower marks the lower extent of the working domain T* used by the
    shift machinery (exclusive bound; -inf means all of T).  E.g. for
    q^Z u {0} the accumulation point 0 is a member of T but not of T*.
    """

    def __init__(
        self,
        segments: Sequence[Segment],
        label: str = "",
        policy: GridPolicy = DEFAULT_POLICY,
        t_star_lower: float = -INF,
    ):
        if not segments:
            raise ValueError("need at least one segment")
        segs = list(segments)
        for s, n in zip(segs, segs[1:]):
            if not s.hi < n.lo:
                raise ValueError(
                    f"segments must be strictly increasing and disjoint: {s} then {n}"
                )
        self.segments: tuple[Segment, ...] = tuple(segs)
        self.label = label
        self.policy = policy
        self.t_star_lower = t_star_lower

    # -- constructors -------------------------------------------------------

    @staticmethod
    def integers(start: int = -1000, label: str = "Z") -> "TimeScale":
        return TimeScale([ArithmeticGrid(float(start), 1.0, None)], label=label)

    @staticmethod
    def h_grid(h: float, start: float = 0.0, label: str = "") -> "TimeScale":
        return TimeScale([ArithmeticGrid(start, h, None)], label=label or f"{h}Z")

    @staticmethod
    def reals(a: float = -INF, label: str = "R") -> "TimeScale":
        return TimeScale([DenseInterval(a, INF)], label=label)

    @staticmethod
    def q_grid(
        q: float, nmin: int | None = None, nmax: int | None = None, label: str = ""
    ) -> "TimeScale":
        ts = TimeScale([GeometricGrid(q, nmin, nmax)], label=label or f"q^Z(q={q})")
        if nmin is None:
            return TimeScale(ts.segments, label=ts.label, t_star_lower=0.0)
        return ts

    @staticmethod
    def sqrt_naturals(nmin: int = 0, nmax: int | None = None) -> "TimeScale":
        return TimeScale([SqrtGrid(nmin, nmax)], label="sqrt(N)")

    # -- basic queries -------------------------------------------------------

    @property
    def rtol(self) -> float:
        return self.policy.membership_rtol

    @property
    def min_point(self) -> float:
        return self.segments[0].lo

    @property
    def unbounded_above(self) -> bool:
        return self.segments[-1].hi == INF

    @property
    def max_point(self) -> float | None:
        return None if self.unbounded_above else self.segments[-1].hi

    def _locate(self, t: float) -> int:
        for i, seg in enumerate(self.segments):
            if seg.contains(t, self.rtol):
                return i
        raise NotInTimeScale(f"{t!r} is not a point of time scale {self.label or self.segments!r}")

    def contains(self, t: float) -> bool:
        try:
            self._locate(t)
            return True
        except NotInTimeScale:
            return False

    def snap(self, t: float) -> float:
        """Return the canonical float for the scale point nearest-equal to t."""
        return self.segments[self._locate(t)].snap(t, self.rtol)

    def in_star(self, t: float) -> bool:
        return self.contains(t) and t > self.t_star_lower

    # -- jump operators ------------------------------------------------------

    def sigma(self, t: float) -> float:
        i = self._locate(t)
        seg = self.segments[i]
        if seg.dense:
            b = seg.hi
            if b == INF or t < b - _tol(b, self.rtol):
                return seg.snap(t, self.rtol)
            nxt = b
        else:
            if isinstance(seg, GeometricGrid) and seg.nmin is None and t == 0.0:
                raise AccumulationPoint("sigma undefined at the accumulation point 0")
            p = seg.next_point(t, self.rtol)
            if p is not None:
                return p
            nxt = seg.hi
        # segment exhausted at nxt: jump to the next segment, or Hilger's
        # convention sigma(max T) = max T
        if i + 1 < len(self.segments):
            nseg = self.segments[i + 1]
            return nseg.lo if nseg.dense else nseg.point(nseg._imin)
        return nxt

    def rho(self, t: float) -> float:
        i = self._locate(t)
        seg = self.segments[i]
        if seg.dense:
            a = seg.lo
            if a == -INF or t > a + _tol(a, self.rtol):
                return seg.snap(t, self.rtol)
        else:
            if isinstance(seg, GeometricGrid) and seg.nmin is None:
                if t == 0.0:
                    return 0.0  # 0 is the minimum of the set
                return seg.prev_point(t, self.rtol)  # always exists (n-1)
            p = seg.prev_point(t, self.rtol)
            if p is not None:
                return p
        if i > 0:
            pseg = self.segments[i - 1]
            return pseg.hi if pseg.dense else pseg.point(pseg._imax)
        return self.min_point  # rho(min T) = min T

    def mu(self, t: float) -> float:
        return self.sigma(t) - self.snap(t)

    def is_right_scattered(self, t: float) -> bool:
        return self.mu(t) > _tol(t, self.rtol)

    # -- point walking -------------------------------------------------------

    def next_point_at_or_after(self, x: float) -> float | None:
        """Smallest scale point >= x, None if the scale ends below x."""
        best = None
        for seg in self.segments:
            if seg.hi < x - _tol(x, self.rtol):
                continue
            if seg.dense:
                cand = max(seg.lo, x)
                if cand <= seg.hi:
                    best = cand if best is None else min(best, cand)
            else:
                if seg.contains(x, self.rtol):
                    cand = seg.snap(x, self.rtol)
                else:
                    cand = seg.next_point(x, self.rtol)
                if cand is not None:
                    best = cand if best is None else min(best, cand)
            if best is not None:
                return best  # segments are ordered; first hit is smallest
        return best

    def prev_point_at_or_before(self, x: float) -> float | None:
        best = None
        for seg in reversed(self.segments):
            if seg.lo > x + _tol(x, self.rtol):
                continue
            if seg.dense:
                cand = min(seg.hi, x)
                if cand >= seg.lo:
                    best = cand
            else:
                if seg.contains(x, self.rtol):
                    best = seg.snap(x, self.rtol)
                else:
                    best = seg.prev_point(x, self.rtol)
            if best is not None:
                return best
        return best

    def _segment_last_point(self, seg: Segment) -> float | None:
        if seg.hi == INF:
            return None
        return seg.hi if seg.dense else seg.point(seg._imax)

    def _gap_after(self, i: int) -> float | None:
        """Graininess at the last point of segment i (gap to the next segment)."""
        last = self._segment_last_point(self.segments[i])
        if last is None:
            return None
        if i + 1 < len(self.segments):
            nseg = self.segments[i + 1]
            nxt = nseg.lo if nseg.dense else nseg.point(nseg._imin)
            return nxt - last
        return 0.0  # maximum of the scale: sigma(t) = t

    def decompose(self, lo: float, hi: float) -> list[tuple]:
        """Split [lo, hi) of the scale into ('dense', a, b) and ('scattered', p, mu) pieces.

        Pieces come back ordered.  Scattered entries carry the true graininess,
        including the jump across a segment boundary.  Both lo and hi must be
        scale points with lo <= hi.
        """
        lo = self.snap(lo)
        hi = self.snap(hi)
        if hi < lo:
            raise EmptyWindow(f"window [{lo}, {hi}) is empty")
        out: list[tuple] = []
        if hi == lo:
            return out
        rtol = self.rtol
        for i, seg in enumerate(self.segments):
            if seg.hi < lo - _tol(lo, rtol) or seg.lo > hi:
                continue
            if seg.dense:
                a = max(seg.lo, lo)
                b = min(seg.hi, hi)
                if b > a:
                    out.append(("dense", a, min(b, seg.hi)))
                last = seg.hi
                if last != INF and lo <= last < hi - _tol(hi, rtol):
                    gap = self._gap_after(i)
                    if gap and gap > 0:
                        out.append(("scattered", last, gap))
            else:
                last_pt = self._segment_last_point(seg)
                for j in seg.indices_in(lo, hi, rtol):
                    p = seg.point(j)
                    if p >= hi - _tol(hi, rtol):
                        continue
                    if last_pt is not None and p == last_pt:
                        gap = self._gap_after(i)
                        if gap and gap > 0:
                            out.append(("scattered", p, gap))
                    else:
                        out.append(("scattered", p, seg.point(j + 1) - p))
        return out

    def sample_points(self, rng, lo: float, hi: float, n: int) -> list[float]:
        """n points of the scale drawn roughly uniformly from [lo, hi]."""
        pts = []
        for _ in range(n):
            u = lo + (hi - lo) * rng.random()
            p = self.next_point_at_or_after(u)
            if p is None or p > hi:
                p = self.prev_point_at_or_before(u)
            if p is not None and lo <= p <= hi:
                pts.append(p)
        return pts

    def __repr__(self):
        name = self.label or "TimeScale"
        return f"<{name}: {len(self.segments)} segment(s)>"


# ---------------------------------------------------------------------------
# module-level operations (the public calculus surface)


def sigma(ts: TimeScale, t: float) -> float:
    return ts.sigma(t)


def rho(ts: TimeScale, t: float) -> float:
    return ts.rho(t)


def mu(ts: TimeScale, t: float) -> float:
    return ts.mu(t)


def mu_tilde(ts: TimeScale, t: float, window_start: float) -> float:
    """Supremum of the graininess over the closed window [window_start, t].

    The window endpoint t itself counts: mu(t) looks forward to sigma(t) even
    when sigma(t) lies beyond the window.
    """
    lo = ts.snap(window_start)
    hi = ts.snap(t)
    if hi < lo:
        raise EmptyWindow(f"window [{window_start}, {t}] is empty")
    best = 0.0
    for p, m in _graininess_events(ts, lo, hi):
        if m > best:
            best = m
    return best


def _graininess_events(ts: TimeScale, lo: float, hi: float):
    """Yield (point, mu) for every right-scattered point in the closed [lo, hi]."""
    rtol = ts.rtol
    for i, seg in enumerate(ts.segments):
        if seg.hi < lo - _tol(lo, rtol) or seg.lo > hi + _tol(hi, rtol):
            continue
        if seg.dense:
            last = seg.hi
            if last != INF and lo - _tol(last, rtol) <= last <= hi + _tol(hi, rtol):
                gap = ts._gap_after(i)
                if gap and gap > 0:
                    yield last, gap
        else:
            last_pt = ts._segment_last_point(seg)
            idx = seg.indices_in(lo, hi, rtol)
            for j in idx:
                p = seg.point(j)
                if last_pt is not None and p == last_pt:
                    gap = ts._gap_after(i)
                    if gap and gap > 0:
                        yield p, gap
                else:
                    yield p, seg.point(j + 1) - p


def delta_integral(
    ts: TimeScale,
    f: Callable[[float], float],
    s: float,
    t: float,
    policy: GridPolicy | None = None,
) -> float:
    """Cauchy delta integral of f from s to t (both must be scale points).

    Orientation follows the usual convention: swapping the limits flips the
    sign.  Dense parts are integrated by composite Simpson with Richardson
    refinement to relative tolerance 1e-10.
    """
    pol = policy or ts.policy
    if t == s:
        return 0.0
    if t < s:
        return -delta_integral(ts, f, t, s, policy)
    total = 0.0
    for piece in ts.decompose(s, t):
        if piece[0] == "scattered":
            _, p, m = piece
            total += m * f(p)
        else:
            _, a, b = piece
            total += _simpson_refined(f, a, b, pol.step_for(b - a))
    return total


def _simpson_refined(f, a: float, b: float, seed_step: float) -> float:
    """Composite Simpson, panel count doubled until the Richardson error estimate
    drops below QUAD_RTOL (relative)."""
    span = b - a
    n = max(2, int(math.ceil(span / seed_step)))
    if n % 2:
        n += 1
    n = min(n, 4096)
    xs = [a + span * i / n for i in range(n + 1)]
    ys = [f(x) for x in xs]

    def simpson(ys_, h_):
        acc = ys_[0] + ys_[-1]
        acc += 4.0 * sum(ys_[1:-1:2])
        acc += 2.0 * sum(ys_[2:-2:2])
        return acc * h_ / 3.0

    prev = simpson(ys, span / n)
    for _ in range(16):
        # double the panel count, reusing the old evaluations
        n2 = 2 * n
        xs2 = [a + span * i / n2 for i in range(n2 + 1)]
        ys2 = [0.0] * (n2 + 1)
        ys2[0::2] = ys
        ys2[1::2] = [f(x) for x in xs2[1::2]]
        cur = simpson(ys2, span / n2)
        err = abs(cur - prev) / 15.0
        best = cur + (cur - prev) / 15.0
        if err <= QUAD_RTOL * max(abs(best), 1e-30):
            return best
        n, ys, prev = n2, ys2, cur
        if n >= 1 << 21:
            break
    raise QuadratureFailure(f"Simpson refinement stalled on [{a}, {b}]")


def delta_derivative(
    ts: TimeScale,
    f: Callable[[float], float],
    t: float,
    policy: GridPolicy | None = None,
) -> float:
    """Delta derivative of f at t.

    Right-scattered points get the exact difference quotient
    (f(sigma(t)) - f(t)) / mu(t); right-dense points a second-order finite
    difference restricted to the surrounding dense interval.
    """
    pol = policy or ts.policy
    t = ts.snap(t)
    m = ts.mu(t)
    if m > _tol(t, ts.rtol):
        return (f(ts.sigma(t)) - f(t)) / m
    # right-dense: t sits inside (or at the left end of) a dense interval
    seg = ts.segments[ts._locate(t)]
    if not seg.dense:
        # right-dense but isolated from the right is impossible; being here
        # means t is the maximum of the scale
        raise NotDifferentiablePoint(f"delta derivative undefined at the maximum {t}")
    room_r = seg.hi - t
    room_l = t - seg.lo
    if room_r <= 0:
        raise NotDifferentiablePoint(f"no dense room to the right of {t}")
    e = pol.dense_step if pol.dense_step is not None else 1e-5
    e = min(e, room_r / 2 if room_r < INF else e)
    e = max(e, 1e-9 * max(1.0, abs(t)))
    if room_l >= e:
        return (f(t + e) - f(t - e)) / (2 * e)
    # one-sided, second order
    return (-3.0 * f(t) + 4.0 * f(t + e) - f(t + 2 * e)) / (2 * e)


def iterate_points(
    ts: TimeScale,
    s: float,
    t: float,
    policy: GridPolicy | None = None,
) -> list[tuple[float, str]]:
    """Ordered walk of the closed window [s, t].

    Returns (point, kind) pairs; kind is 'scattered' for right-scattered
    points and 'dense-sample' for sampled points of dense parts.  First entry
    is s, last is t, strictly increasing in between.
    """
    pol = policy or ts.policy
    s = ts.snap(s)
    t = ts.snap(t)
    if t < s:
        raise EmptyWindow(f"window [{s}, {t}] is empty")
    out: list[tuple[float, str]] = []

    def push(p: float, kind: str):
        if out and p <= out[-1][0]:
            # a right-scattered endpoint may arrive after being sampled as a
            # dense point; the scattered label wins
            if kind == "scattered" and p == out[-1][0]:
                out[-1] = (p, kind)
            return
        out.append((p, kind))

    if t == s:
        kind = "scattered" if ts.is_right_scattered(s) else "dense-sample"
        return [(s, kind)]

    for piece in ts.decompose(s, t):
        if piece[0] == "scattered":
            _, p, _m = piece
            push(p, "scattered")
        else:
            _, a, b = piece
            span = b - a
            step = pol.step_for(span)
            n = max(1, round(span / step))
            for i in range(n + 1):
                push(a + span * i / n, "dense-sample")
    # decompose covers [s, t); close the window
    kind_t = "scattered" if ts.is_right_scattered(t) else "dense-sample"
    push(t, kind_t)
    # the final point may have been pushed as a dense sample already; fix kind
    if out and out[-1][0] == t and out[-1][1] != kind_t:
        out[-1] = (t, kind_t)
    return out


# ---------------------------------------------------------------------------
# JSON ingest


def _want(doc: dict, key: str, ptr: str):
    if key not in doc:
        raise ConfigError(f"{ptr}/{key}", "missing required field")
    return doc[key]


def _num(v, ptr: str, allow_inf: str | None = None) -> float:
    if isinstance(v, str):
        if allow_inf and v in (allow_inf, allow_inf.lstrip("+")):
            return INF if not allow_inf.startswith("-") else -INF
        raise ConfigError(ptr, f"expected a number, got {v!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(ptr, f"expected a number, got {type(v).__name__}")
    return float(v)


def segment_from_json(doc: dict, ptr: str) -> Segment:
    if not isinstance(doc, dict):
        raise ConfigError(ptr, "segment must be an object")
    kind = _want(doc, "kind", ptr)
    try:
        if kind == "dense":
            a = doc.get("a", "-inf")
            a = -INF if a == "-inf" else _num(a, f"{ptr}/a")
            b = doc.get("b", "inf")
            b = INF if b == "inf" else _num(b, f"{ptr}/b")
            return DenseInterval(a, b)
        if kind == "arith":
            start = _num(_want(doc, "start", ptr), f"{ptr}/start")
            step = _num(_want(doc, "step", ptr), f"{ptr}/step")
            count = doc.get("count", "inf")
            count = None if count == "inf" else int(_num(count, f"{ptr}/count"))
            return ArithmeticGrid(start, step, count)
        if kind == "geom":
            q = _num(_want(doc, "q", ptr), f"{ptr}/q")
            nmin = doc.get("nmin", "-inf")
            nmin = None if nmin == "-inf" else int(_num(nmin, f"{ptr}/nmin"))
            nmax = doc.get("nmax", "inf")
            nmax = None if nmax == "inf" else int(_num(nmax, f"{ptr}/nmax"))
            return GeometricGrid(q, nmin, nmax)
        if kind == "sqrtN":
            nmin = int(_num(doc.get("nmin", 0), f"{ptr}/nmin"))
            nmax = doc.get("nmax", "inf")
            nmax = None if nmax == "inf" else int(_num(nmax, f"{ptr}/nmax"))
            return SqrtGrid(nmin, nmax)
        if kind == "points":
            vals = _want(doc, "values", ptr)
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"{ptr}/values", "expected a nonempty array")
            return ExplicitPoints(
                tuple(_num(v, f"{ptr}/values/{i}") for i, v in enumerate(vals))
            )
    except ValueError as exc:
        raise ConfigError(ptr, str(exc)) from exc
    raise ConfigError(f"{ptr}/kind", f"unknown segment kind {kind!r}")


def timescale_from_json(doc: dict, ptr: str = "") -> TimeScale:
    if not isinstance(doc, dict):
        raise ConfigError(ptr or "/", "scale document must be an object")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ConfigError(f"{ptr}/label", "label must be a string")
    segs_doc = _want(doc, "segments", ptr)
    if not isinstance(segs_doc, list) or not segs_doc:
        raise ConfigError(f"{ptr}/segments", "expected a nonempty array")
    segs = [
        segment_from_json(seg, f"{ptr}/segments/{i}") for i, seg in enumerate(segs_doc)
    ]
    try:
        return TimeScale(segs, label=label)
    except ValueError as exc:
        raise ConfigError(f"{ptr}/segments", str(exc)) from exc


def timescale_from_file(path: str) -> TimeScale:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("/", f"invalid JSON in {path}: {exc}") from exc
    return timescale_from_json(doc)
