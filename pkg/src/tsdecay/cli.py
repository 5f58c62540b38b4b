"""Command line front end, installed as `ts`.

Subcommands bind the library layers together:

  exp             generalized exponential value plus its sandwich bounds
  root            characteristic roots of a delay problem along a grid
  sim             method-of-steps simulation of a delay dynamic equation
  certify         simulate, audit the hypotheses, and check the decay envelope
  sweep           verdict codes over a (p, q) parameter rectangle
  validate-shift  randomized axiom checks for a shift/delay configuration

Exit status is 0 on success (including verdict "certified"), 2 when a check
comes back negative (verdict "violated" or "hypothesis-failed", a failed
validation report, a failed bounds report, a partial root field), and 1 on
configuration or runtime errors.

Every output file starts with one `#` comment line carrying the tool version,
the seed, and a digest of the resolved configuration; all numbers are printed
with 17 significant digits so reruns of the same configuration are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .certify import BOUND_TOL, certify, sweep_grid
from .errors import ConfigError, PreconditionViolated, TsError
from .halanay import HalanayProblem, problem_from_json, root_field
from .shifts import delays_from_json, shift_from_json, validate_delay_function, validate_shift_axioms
from .simulate import constant_history, simulate, table_history
from .timescale import TimeScale, timescale_from_file, timescale_from_json
from .tsexp import exp_bounds_check, exp_ts

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2

_SVG_COLORS = {0: "#2a9d4e", 1: "#d43d51", 2: "#e9a23b", 3: "#8a8a8a"}
_SVG_NAMES = {0: "certified", 1: "violated", 2: "hypothesis-failed", 3: "error"}


def _fmt(x) -> str:
    if x is None:
        return ""
    return "%.17g" % float(x)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError("/", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("/", f"invalid JSON in {path}: {exc}") from exc


def _digest(cmd: str, parts: list, files: list) -> str:
    h = hashlib.sha256()
    h.update(cmd.encode())
    for part in parts:
        h.update(b"|")
        h.update(str(part).encode())
    for path in files:
        if not path:
            continue
        h.update(b"|file:")
        try:
            with open(path, "rb") as fh:
                h.update(fh.read())
        except OSError:
            h.update(path.encode())
    return h.hexdigest()[:12]


def _read_pairs(path: str, ptr: str) -> tuple[list, list]:
    """Two-column numeric CSV; `#` lines and one non-numeric header row are skipped."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(ptr, f"cannot read {path}: {exc}") from exc
    pairs = []
    with fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                pairs.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if pairs:
                    raise ConfigError(ptr, f"bad row {row!r} in {path}")
                continue
    if not pairs:
        raise ConfigError(ptr, f"no numeric rows in {path}")
    pairs.sort()
    return [a for a, _ in pairs], [b for _, b in pairs]


def _resolve_path(ref: str, base_dir: str) -> str:
    return ref if os.path.isabs(ref) else os.path.join(base_dir, ref)


def _resolve_coefficient(value, base_dir: str, ptr: str):
    """const:VALUE, table:FILE, or a plain number, into a float or callable."""
    if isinstance(value, bool):
        raise ConfigError(ptr, "coefficient must be a number or const:/table: string")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        if value.startswith("const:"):
            try:
                return float(value[6:])
            except ValueError:
                raise ConfigError(ptr, f"bad constant in {value!r}")
        if value.startswith("table:"):
            path = _resolve_path(value[6:], base_dir)
            times, vals = _read_pairs(path, ptr)

            def coeff(t, _t=times, _v=vals):
                if t < _t[0] - 1e-9 or t > _t[-1] + 1e-9:
                    raise PreconditionViolated(
                        f"coefficient table covers [{_t[0]}, {_t[-1]}], asked at {t}"
                    )
                return float(np.interp(t, _t, _v))

            coeff.__name__ = "table:" + os.path.basename(path)
            return coeff
        try:
            return float(value)
        except ValueError:
            raise ConfigError(ptr, f"expected const:VALUE or table:FILE, got {value!r}")
    raise ConfigError(ptr, "coefficient must be a number or const:/table: string")


def _coefficient_files(value, base_dir: str) -> list:
    if isinstance(value, str) and value.startswith("table:"):
        return [_resolve_path(value[6:], base_dir)]
    if isinstance(value, str) and value.startswith("csv:"):
        return [_resolve_path(value[4:], base_dir)]
    return []


def _resolve_history(value, base_dir: str, ptr: str = "/history"):
    if isinstance(value, bool):
        raise ConfigError(ptr, "history must be a number or const:/csv: string")
    if isinstance(value, (int, float)):
        return constant_history(float(value))
    if isinstance(value, str):
        if value.startswith("const:"):
            try:
                return constant_history(float(value[6:]))
            except ValueError:
                raise ConfigError(ptr, f"bad constant in {value!r}")
        if value.startswith("csv:"):
            times, vals = _read_pairs(_resolve_path(value[4:], base_dir), ptr)
            return table_history(times, vals)
        try:
            return constant_history(float(value))
        except ValueError:
            raise ConfigError(ptr, f"expected const:VALUE or csv:FILE, got {value!r}")
    raise ConfigError(ptr, "history must be a number or const:/csv: string")


def _load_problem(args) -> tuple[TimeScale, HalanayProblem, dict, str]:
    """Scale comes from --scale when given, else from the problem document."""
    doc = _load_json(args.problem)
    base_dir = os.path.dirname(os.path.abspath(args.problem))
    if getattr(args, "scale", None):
        ts = timescale_from_file(args.scale)
    elif "scale" in doc:
        ts = timescale_from_json(doc["scale"], "/scale")
    else:
        raise ConfigError("/scale", "no scale: pass --scale or embed a scale document")
    spec = delays_from_json(doc, ts)
    pd = doc.get("problem")
    if not isinstance(pd, dict):
        raise ConfigError("/problem", "problem must be an object")
    pd = dict(pd)
    if "p" in pd:
        pd["p"] = _resolve_coefficient(pd["p"], base_dir, "/problem/p")
    if isinstance(pd.get("q"), list):
        pd["q"] = [
            _resolve_coefficient(v, base_dir, f"/problem/q/{i}")
            for i, v in enumerate(pd["q"])
        ]
    return ts, problem_from_json(pd, spec), doc, base_dir


def _out_stream(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit(path, seed: int, digest: str, header: str, rows) -> None:
    fh, owned = _out_stream(path)
    try:
        fh.write(f"# tsdecay {__version__} seed={seed} config={digest}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    finally:
        if owned:
            fh.close()


def _cmd_exp(args) -> int:
    ts = timescale_from_file(args.scale)
    pc = _resolve_coefficient(args.p, os.getcwd(), "/p")
    digest = _digest(
        "exp",
        [args.p, args.t_from, args.t_to, args.seed],
        [args.scale] + _coefficient_files(args.p, os.getcwd()),
    )
    value = exp_ts(ts, pc, args.t_to, args.t_from)
    bounds = "n/a"
    margins = {}
    integral = None
    try:
        rep = exp_bounds_check(ts, pc, args.t_from, args.t_to)
        bounds = "pass" if rep.passed else "fail"
        margins = rep.margins
        integral = rep.integral
    except (PreconditionViolated, TsError):
        pass
    row = [
        _fmt(args.t_from),
        _fmt(args.t_to),
        _fmt(value),
        _fmt(integral),
        _fmt(margins.get("neg_lower")),
        _fmt(margins.get("neg_upper")),
        _fmt(margins.get("pos_lower")),
        _fmt(margins.get("pos_upper")),
        bounds,
    ]
    _emit(
        args.out,
        args.seed,
        digest,
        "s,t,e_p,integral,m_neg_lower,m_neg_upper,m_pos_lower,m_pos_upper,bounds",
        [row],
    )
    return EXIT_CHECK_FAILED if bounds == "fail" else EXIT_OK


def _cmd_root(args) -> int:
    try:
        grid = [float(x) for x in args.grid.split(",") if x.strip()]
    except ValueError:
        raise ConfigError("/grid", f"grid must be comma-separated numbers, got {args.grid!r}")
    if not grid:
        raise ConfigError("/grid", "empty grid")
    _, prob, _, _ = _load_problem(args)
    digest = _digest("root", [args.grid, args.tol, args.seed], [args.problem, args.scale])
    field = root_field(prob, grid, tol=args.tol)
    rows = [
        [_fmt(t), _fmt(lam), _fmt(res), _fmt(lo)]
        for t, lam, res, lo in zip(field.grid, field.lam, field.residual, field.s_lower)
    ]
    _emit(args.out, args.seed, digest, "t,lambda,residual,s_lower", rows)
    for t, err in zip(field.grid, field.errors):
        if err:
            print(f"warning: t={_fmt(t)}: {err}", file=sys.stderr)
    return EXIT_CHECK_FAILED if field.partial else EXIT_OK


def _cmd_sim(args) -> int:
    ts, prob, _, _ = _load_problem(args)
    hist = _resolve_history(args.history, os.getcwd())
    digest = _digest(
        "sim",
        [args.history, args.tend, args.step, args.seed],
        [args.problem, args.scale] + _coefficient_files(args.history, os.getcwd()),
    )
    traj = simulate(prob, hist, args.tend, dense_step=args.step)
    labels = traj.kind_labels()
    rows = [
        [_fmt(t), _fmt(x), _fmt(ts.mu(t)), labels[i]]
        for i, (t, x) in enumerate(zip(traj.times, traj.values))
    ]
    _emit(args.out, args.seed, digest, "t,x,mu,kind", rows)
    return EXIT_OK


def _cmd_certify(args) -> int:
    _, prob, _, _ = _load_problem(args)
    hist = _resolve_history(args.history, os.getcwd())
    digest = _digest(
        "certify",
        [args.history, args.tend, args.step, args.tol, args.K0, args.strict_graininess, args.seed],
        [args.problem, args.scale] + _coefficient_files(args.history, os.getcwd()),
    )
    cert = certify(
        prob,
        hist,
        args.tend,
        dense_step=args.step,
        tol_abs=args.tol,
        K0=args.K0,
        strict_graininess=True if args.strict_graininess else None,
    )
    jf = lambda v: None if v is None else float(v)
    block = {
        "version": __version__,
        "seed": args.seed,
        "config": digest,
        "verdict": cert.verdict,
        "horizon": args.tend,
        "K0": jf(cert.K0),
        "t_violation": jf(cert.t_violation),
        "min_margin": jf(cert.min_margin),
        "decay_estimate": jf(cert.decay_estimate),
        "problem_digest": cert.digest,
        "audit": [
            {"name": ln.name, "ok": bool(ln.ok), "value": jf(ln.value), "detail": ln.detail}
            for ln in cert.audit.lines
        ],
    }
    print(json.dumps(block, indent=2, sort_keys=True))
    traj = cert.trajectory
    n = len(traj.times)
    env = cert.envelope if cert.envelope is not None else np.full(n, np.nan)
    marg = cert.margins if cert.margins is not None else np.full(n, np.nan)
    rows = [
        [_fmt(traj.times[i]), _fmt(traj.values[i]), _fmt(env[i]), _fmt(marg[i])]
        for i in range(n)
    ]
    _emit(args.out, args.seed, digest, "t,x,bound,margin", rows)
    return EXIT_OK if cert.verdict == "certified" else EXIT_CHECK_FAILED


def _axis_values(doc, ptr: str) -> list:
    if not isinstance(doc, dict):
        raise ConfigError(ptr, "axis must be an object")
    if "values" in doc:
        vals = doc["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"{ptr}/values", "expected a nonempty array")
        return [float(v) for v in vals]
    try:
        start, stop, step = float(doc["start"]), float(doc["stop"]), float(doc["step"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(ptr, "axis needs values or start/stop/step")
    if step <= 0 or stop < start:
        raise ConfigError(ptr, "axis needs step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    return [start + i * step for i in range(count)]


def _sweep_svg(res, p_values, q_values, digest: str, seed: int) -> str:
    cell, pad_l, pad_b, pad_t = 22, 58, 44, 16
    w = pad_l + cell * len(q_values) + 12
    h = pad_t + cell * len(p_values) + pad_b
    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">\n')
    out.write(f"<!-- tsdecay {__version__} seed={seed} config={digest} -->\n")
    out.write(f'<rect width="{w}" height="{h}" fill="#ffffff"/>\n')
    for i in range(len(p_values)):
        for j in range(len(q_values)):
            x = pad_l + j * cell
            y = pad_t + i * cell
            color = _SVG_COLORS[int(res.codes[i, j])]
            out.write(
                f'<rect x="{x}" y="{y}" width="{cell - 1}" height="{cell - 1}" fill="{color}"/>\n'
            )
    for i, pv in enumerate(p_values):
        y = pad_t + i * cell + cell // 2 + 4
        out.write(f'<text x="{pad_l - 6}" y="{y}" font-size="10" text-anchor="end">{pv:.3g}</text>\n')
    for j, qv in enumerate(q_values):
        x = pad_l + j * cell + cell // 2
        y = pad_t + cell * len(p_values) + 12
        out.write(f'<text x="{x}" y="{y}" font-size="10" text-anchor="middle">{qv:.3g}</text>\n')
    y = pad_t + cell * len(p_values) + 30
    x = pad_l
    for code in (0, 1, 2, 3):
        out.write(f'<rect x="{x}" y="{y - 9}" width="10" height="10" fill="{_SVG_COLORS[code]}"/>\n')
        out.write(f'<text x="{x + 14}" y="{y}" font-size="10">{_SVG_NAMES[code]}</text>\n')
        x += 14 + 8 * len(_SVG_NAMES[code]) + 14
    out.write("</svg>\n")
    return out.getvalue()


def _cmd_sweep(args) -> int:
    doc = _load_json(args.grid)
    base_dir = os.path.dirname(os.path.abspath(args.grid))
    if "scale" not in doc:
        raise ConfigError("/scale", "sweep document needs a scale")
    ts = timescale_from_json(doc["scale"], "/scale")
    spec = delays_from_json(doc, ts)
    base_pd = doc.get("problem")
    if not isinstance(base_pd, dict):
        raise ConfigError("/problem", "problem must be an object")
    if "tend" not in doc:
        raise ConfigError("/tend", "sweep document needs a horizon")
    tend = float(doc["tend"])
    hist = _resolve_history(doc.get("history", 1.0), base_dir)
    p_values = _axis_values(doc.get("p"), "/p")
    q_values = _axis_values(doc.get("q"), "/q")
    solver = doc.get("solver", {})
    if not isinstance(solver, dict):
        raise ConfigError("/solver", "solver must be an object")

    def factory(pv, qv):
        pd = dict(base_pd)
        pd["p"] = pv
        qs = list(pd.get("q", []))
        if qs:
            qs = [
                _resolve_coefficient(v, base_dir, f"/problem/q/{i}")
                for i, v in enumerate(qs)
            ]
            qs[-1] = qv
        else:
            qs = [qv]
        pd["q"] = qs
        return problem_from_json(pd, spec)

    digest = _digest("sweep", [args.seed], [args.grid])
    res = sweep_grid(
        factory,
        hist,
        tend,
        p_values,
        q_values,
        dense_step=solver.get("dense_step"),
        tol_abs=solver.get("tol", BOUND_TOL),
    )
    rows = [
        [_fmt(pv), _fmt(qv), str(code), _fmt(margin)]
        for _, _, pv, qv, code, margin in res.cells()
    ]
    _emit(args.out, args.seed, digest, "p,q,code,min_margin", rows)
    for (i, j), msg in sorted(res.messages.items()):
        print(f"warning: cell p={_fmt(p_values[i])} q={_fmt(q_values[j])}: {msg}", file=sys.stderr)
    if args.svg:
        with open(args.svg, "w", newline="") as fh:
            fh.write(_sweep_svg(res, p_values, q_values, digest, args.seed))
    return EXIT_OK


def _cmd_validate_shift(args) -> int:
    ts = timescale_from_file(args.scale)
    doc = _load_json(args.shift)
    shift = shift_from_json(doc.get("shift", {}), ts)
    window = None
    if args.window:
        try:
            a, b = (float(x) for x in args.window.split(","))
            window = (a, b)
        except ValueError:
            raise ConfigError("/window", f"window must be two numbers, got {args.window!r}")
    digest = _digest("validate-shift", [args.samples, args.seed, args.window], [args.scale, args.shift])
    print(f"# tsdecay {__version__} seed={args.seed} config={digest}")
    rep = validate_shift_axioms(shift, samples=args.samples, seed=args.seed, window=window)
    print(rep.summary())
    ok = rep.passed
    if doc.get("delays"):
        spec = delays_from_json(doc, ts)
        drep = validate_delay_function(spec, window=window, samples=args.samples, seed=args.seed)
        print(drep.summary())
        ok = ok and drep.passed
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ts", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"tsdecay {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=42, help="echoed in output headers")
        p.add_argument("--out", default="-", help="output CSV path (default stdout)")

    p = sub.add_parser("exp", help="generalized exponential with sandwich bounds")
    p.add_argument("--scale", required=True)
    p.add_argument("--p", required=True, help="const:VALUE or table:FILE")
    p.add_argument("--from", dest="t_from", type=float, required=True)
    p.add_argument("--to", dest="t_to", type=float, required=True)
    common(p)
    p.set_defaults(func=_cmd_exp)

    p = sub.add_parser("root", help="characteristic roots along a grid")
    p.add_argument("--problem", required=True)
    p.add_argument("--scale", help="scale JSON (else embedded in the problem doc)")
    p.add_argument("--grid", required=True, help="comma-separated times")
    p.add_argument("--tol", type=float, default=1e-10)
    common(p)
    p.set_defaults(func=_cmd_root)

    p = sub.add_parser("sim", help="simulate a delay dynamic equation")
    p.add_argument("--problem", required=True)
    p.add_argument("--scale", help="scale JSON (else embedded in the problem doc)")
    p.add_argument("--history", required=True, help="const:VALUE or csv:FILE")
    p.add_argument("--tend", type=float, required=True)
    p.add_argument("--step", type=float, help="dense step override")
    common(p)
    p.set_defaults(func=_cmd_sim)

    p = sub.add_parser("certify", help="decay certificate for a delay problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--scale", help="scale JSON (else embedded in the problem doc)")
    p.add_argument("--history", required=True, help="const:VALUE or csv:FILE")
    p.add_argument("--tend", type=float, required=True)
    p.add_argument("--step", type=float, help="dense step override")
    p.add_argument("--tol", type=float, default=BOUND_TOL, help="margin tolerance")
    p.add_argument("--K0", type=float, help="override the automatic envelope constant")
    p.add_argument("--strict-graininess", action="store_true")
    common(p)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("sweep", help="verdict grid over (p, q)")
    p.add_argument("--grid", required=True, help="sweep JSON document")
    p.add_argument("--svg", help="also write a heatmap SVG")
    common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("validate-shift", help="axiom checks for a shift configuration")
    p.add_argument("--scale", required=True)
    p.add_argument("--shift", required=True, help="JSON with shift family and delays")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--window", help="a,b sampling window")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=_cmd_validate_shift)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except TsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
