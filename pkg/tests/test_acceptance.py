"""End-to-end acceptance checks.

Each test prints one `ACCEPTANCE n: PASS|FAIL - detail` line; run
`pytest tests/test_acceptance.py -v -rA` to see all of them.  Numeric
tolerances and runtime budgets are stated inline next to each assertion.
"""

import json
import math
import random
import time

import numpy as np
import pytest

from tsdecay.certify import certify, choose_K0, verify_bound
from tsdecay.cli import main
from tsdecay.halanay import HalanayProblem, default_root_grid, largest_root, root_field
from tsdecay.shifts import (
    builtin_shift,
    make_delay_spec,
    validate_delay_function,
    validate_shift_axioms,
)
from tsdecay.simulate import simulate
from tsdecay.timescale import ArithmeticGrid, DenseInterval, TimeScale
from tsdecay.tsexp import check_exp_identities, exp_bounds_check


def report(num: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")


def integer_system():
    Z = TimeScale.integers()
    spec = make_delay_spec(builtin_shift("translation", Z, t0=0.0), (0.0, 1.0))
    return HalanayProblem(spec, "sum_power", 0.5, (0.2, 0.1))


def reals_system():
    R = TimeScale.reals()
    spec = make_delay_spec(builtin_shift("translation", R, t0=0.0), (0.0, 1.0))
    return HalanayProblem(spec, "sum_power", 2.0, (0.0, 1.0))


def doubling_system():
    G = TimeScale.q_grid(2.0, nmin=-1)
    spec = make_delay_spec(builtin_shift("scaling", G, t0=1.0), (1.0, 2.0))
    return HalanayProblem(spec, "sum_power", 0.6, (0.0, 0.3))


def test_criterion_1_integer_root():
    start = time.perf_counter()
    lam, res = largest_root(integer_system(), 3.0)
    elapsed = time.perf_counter() - start
    oracle = (-1.3 + math.sqrt(1.3**2 - 4 * 0.2)) / 2  # k^2 + 1.3k + 0.2 = 0
    ok = abs(lam - oracle) < 1e-8 and elapsed < 1.0
    report(1, ok, f"lambda={lam:.12g} vs quadratic oracle {oracle:.12g}, {elapsed:.2f}s")
    assert abs(lam - oracle) < 1e-8
    assert elapsed < 1.0


def test_criterion_2_continuous_root():
    start = time.perf_counter()
    lam, res = largest_root(reals_system(), 5.0)
    lo, hi = -1.0, -1e-12  # bisection oracle for k + 2 - exp(-k) = 0
    f = lambda k: k + 2.0 - math.exp(-k)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    oracle = 0.5 * (lo + hi)
    elapsed = time.perf_counter() - start
    ok = abs(lam - oracle) < 1e-6 and elapsed < 1.0
    report(2, ok, f"lambda={lam:.10g} vs bisection oracle {oracle:.10g}, {elapsed:.2f}s")
    assert abs(lam - oracle) < 1e-6
    assert elapsed < 1.0


def test_criterion_3_doubling_grid_roots():
    start = time.perf_counter()
    prob = doubling_system()
    lam2, _ = largest_root(prob, 2.0)
    oracle = (-1.6 + math.sqrt(1.6**2 - 4 * 0.3)) / 2  # (k+0.6)(1+k) = 0.3
    worst = 0.0
    for j in range(1, 11):
        _, res = largest_root(prob, float(2**j))
        worst = max(worst, res)
    elapsed = time.perf_counter() - start
    ok = abs(lam2 - oracle) < 1e-8 and worst < 1e-10 and elapsed < 5.0
    report(
        3,
        ok,
        f"lambda(2)={lam2:.12g} vs {oracle:.12g}, worst residual {worst:.2e}, {elapsed:.2f}s",
    )
    assert abs(lam2 - oracle) < 1e-8
    assert worst < 1e-10
    assert elapsed < 5.0


def test_criterion_4_bound_end_to_end():
    start = time.perf_counter()
    runs = [
        ("Z", integer_system(), 200.0, None),
        ("R", reals_system(), 50.0, 1e-3),
        ("2^N", doubling_system(), float(2**200), None),
    ]
    outcomes = []
    min_margins = []
    for label, prob, horizon, step in runs:
        cert = certify(prob, 1.0, horizon, dense_step=step)
        outcomes.append((label, cert.verdict))
        min_margins.append(cert.min_margin if cert.min_margin is not None else -math.inf)
    elapsed = time.perf_counter() - start
    ok = all(v == "certified" for _, v in outcomes) and all(
        m >= -1e-9 for m in min_margins
    ) and elapsed < 10.0
    detail = ", ".join(f"{l}={v}" for l, v in outcomes) + f", {elapsed:.1f}s"
    report(4, ok, detail)
    assert elapsed < 10.0
    for (label, verdict), margin in zip(outcomes, min_margins):
        assert verdict == "certified", f"{label}: {verdict}"
        assert margin >= -1e-9, f"{label}: min margin {margin}"


def _soundness_draws():
    rng = np.random.default_rng(42)
    mixed = TimeScale([DenseInterval(0.0, 1.0), ArithmeticGrid(1.5, 0.5, None)])
    draws = []
    for _ in range(5):
        p = 0.1 + 0.8 * rng.random()
        q = p * (0.1 + 0.7 * rng.random())
        draws.append(("Z", TimeScale.integers(), "translation", 0.0, (0.0, 1.0), p, q, 30.0))
        p = 0.1 + 1.6 * rng.random()
        q = p * (0.1 + 0.7 * rng.random())
        draws.append(("hZ", TimeScale.h_grid(0.5, start=-50.0), "translation", 0.0, (0.0, 1.0), p, q, 20.0))
        c = 0.3 + 0.65 * rng.random()
        f = 0.1 + 0.7 * rng.random()
        draws.append(("2^N", TimeScale.q_grid(2.0, nmin=-1), "scaling", 1.0, (1.0, 2.0), c, f, float(2**20)))
        p = 0.1 + 2.4 * rng.random()
        q = p * (0.1 + 0.7 * rng.random())
        draws.append(("R", TimeScale.reals(), "translation", 0.0, (0.0, 1.0), p, q, 12.0))
        p = 0.1 + 1.6 * rng.random()
        q = p * (0.1 + 0.7 * rng.random())
        draws.append(("mix", mixed, "translation", 2.0, (2.0, 3.0), p, q, 25.0))
    return draws


def test_criterion_5_randomized_soundness():
    start = time.perf_counter()
    verdicts = {}
    for label, ts, family, t0, delays, p, q, horizon in _soundness_draws():
        spec = make_delay_spec(builtin_shift(family, ts, t0=t0), delays)
        if label == "2^N":
            # constants are inadmissible on the doubling grid (graininess
            # grows without bound), so admissible draws scale like 1/t
            pf = lambda t, _c=p: _c / t
            qf = lambda t, _c=p, _f=q: _f * _c / t
            prob = HalanayProblem(spec, "sum_power", pf, (0.0, qf))
        else:
            prob = HalanayProblem(spec, "sum_power", p, (0.0, q))
        cert = certify(prob, 1.0, horizon)
        verdicts.setdefault(label, []).append(cert.verdict)
    elapsed = time.perf_counter() - start
    counts = {l: f"{sum(v == 'certified' for v in vs)}/{len(vs)}" for l, vs in verdicts.items()}
    all_ok = all(v == "certified" for vs in verdicts.values() for v in vs)
    ok = all_ok and elapsed < 60.0
    report(5, ok, f"certified per scale {counts}, {elapsed:.1f}s")
    assert elapsed < 60.0
    for label, vs in verdicts.items():
        assert all(v == "certified" for v in vs), f"{label}: {vs}"


def test_criterion_6_exponential_identities():
    rng = random.Random(42)
    mixed = TimeScale([DenseInterval(0.0, 1.0), ArithmeticGrid(1.5, 0.5, None)])
    configs = [
        (TimeScale.integers(), 0.0, 40.0, (-0.85, 1.5), 0.9),
        (TimeScale.h_grid(0.5, start=0.0), 0.0, 30.0, (-1.5, 1.5), 1.7),
        # windows reach t=64 where mu=64, so negative rates and bound
        # coefficients must stay inside 1/64
        (TimeScale.q_grid(2.0, nmin=-3), 0.125, 64.0, (-0.014, 1.0), 0.014),
        (TimeScale.reals(), 0.0, 10.0, (-1.5, 1.5), 1.0),
        (mixed, 0.0, 20.0, (-1.5, 1.5), 1.7),
    ]
    cases = failures = 0
    worst = 0.0
    bounds_fail = 0
    for ts, lo, hi, (pa, pb), phi_cap in configs:
        for _ in range(100):
            p = rng.uniform(pa, pb)
            tri = ts.sample_points(rng, lo, hi, 3)
            while len(tri) < 3:
                tri = tri + tri
            rep = check_exp_identities(ts, p, [tuple(tri[:3])], rel_tol=1e-9)
            cases += 1
            worst = max(worst, rep.worst())
            if not rep.passed:
                failures += 1
            phi = rng.uniform(0.0, phi_cap)
            s, t = min(tri), max(tri)
            brep = exp_bounds_check(ts, phi, s, t)
            if not brep.passed:
                bounds_fail += 1
    ok = cases == 500 and failures == 0 and bounds_fail == 0
    report(6, ok, f"{cases} cases, {failures} identity failures, {bounds_fail} bounds failures, worst rel err {worst:.2e}")
    assert cases == 500
    assert failures == 0
    assert bounds_fail == 0


def test_criterion_7_shift_axioms():
    built = [
        ("translation", TimeScale.integers(), 0.0),
        ("scaling", TimeScale.q_grid(2.0, nmin=-3), 1.0),
        ("sqrt", TimeScale.sqrt_naturals(), 0.0),
    ]
    passed = []
    for family, ts, t0 in built:
        rep = validate_shift_axioms(builtin_shift(family, ts, t0=t0), samples=1000, seed=42)
        passed.append(rep.passed)
    gap = TimeScale([DenseInterval(-50.0, 0.0), DenseInterval(1.0, math.inf)])
    spec = make_delay_spec(builtin_shift("translation", gap, t0=1.0), (2.0,))
    drep = validate_delay_function(spec)
    sp = drep.result("structure-preservation")
    counterexample = (not drep.passed) and sp.failures > 0 and "right-scattered 0" in sp.witness
    ok = all(passed) and counterexample
    report(
        7,
        ok,
        f"built-ins pass: {passed}, gap-scale witness: {sp.witness!r}",
    )
    assert all(passed)
    assert counterexample


def test_criterion_8_comparison_principle():
    rng = random.Random(42)
    eps = 1e-3
    Z = TimeScale.integers()
    shift = builtin_shift("translation", Z, t0=0.0)
    violations = 0
    for _ in range(100):
        r = rng.choice([1, 2])
        lags = sorted(rng.sample([1, 2, 3], r))
        spec = make_delay_spec(shift, tuple([0.0] + [float(l) for l in lags]))
        p = rng.uniform(0.05, 0.95)
        total = p * rng.uniform(0.1, 0.9)
        weights = [rng.random() for _ in range(r)]
        qs = tuple(total * w / sum(weights) for w in weights)
        prob = HalanayProblem(spec, "sum_power", p, (0.0,) + qs)
        upper = simulate(prob, 1.0, 100.0)

        def sub_rhs(t, x, delayed, _p=p, _qs=qs):
            return -_p * x + sum(qj * dj for qj, dj in zip(_qs, delayed)) - eps

        lower = simulate(prob, 1.0 - eps, 100.0, rhs=sub_rhs)
        violations += int(np.sum(lower.values >= upper.values))
    ok = violations == 0
    report(8, ok, f"100 instances, horizon 100, margin {eps}: {violations} ordering violations")
    assert violations == 0


def test_criterion_9_nonlinear_certificate():
    prob = integer_system()

    def F(t, x, delayed):
        return -0.5 * x + 0.2 * x / (1 + x * x) + 0.1 * math.tanh(delayed[0])

    cert = certify(prob, 1.0, 200.0, rhs=F)
    dom = cert.audit.line("domination")
    ok = cert.verdict == "certified" and dom.ok
    report(9, ok, f"verdict={cert.verdict}, domination check ok={dom.ok}, min margin {cert.min_margin:.3g}")
    assert dom.ok
    assert cert.verdict == "certified"


def test_criterion_10_sweep_consistency(tmp_path):
    doc = {
        "scale": {"segments": [{"kind": "arith", "start": -100, "step": 1, "count": "inf"}]},
        "shift": {"family": "translation", "t0": 0},
        "delays": [0, 1],
        "problem": {"form": "sum_power", "q": [0.0, 0.1]},
        "history": "const:1.0",
        "tend": 25,
        "p": {"start": 0.3, "stop": 0.9, "step": 0.05},
        "q": {"start": 0.05, "stop": 0.85, "step": 0.05},
    }
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps(doc))
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"region_{tag}.csv"
        rc = main(["sweep", "--grid", str(grid), "--out", str(out), "--seed", "42"])
        assert rc == 0
        outs.append(out.read_bytes())
    rows = [
        line.split(",")
        for line in outs[0].decode().splitlines()
        if line and not line.startswith("#") and not line.startswith("p,")
    ]
    certified = [(float(r[0]), float(r[1])) for r in rows if r[2] == "0"]
    consistent = all(p - q > 0 and 1 - p >= 0 for p, q in certified)
    identical = outs[0] == outs[1]
    ok = consistent and identical and len(rows) == 13 * 17 and certified
    report(
        10,
        ok,
        f"{len(rows)} cells, {len(certified)} certified, region consistent={consistent}, reruns byte-identical={identical}",
    )
    assert len(rows) == 13 * 17
    assert certified, "no certified cells at all"
    assert consistent
    assert identical
