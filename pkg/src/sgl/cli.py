"""``sgl`` command line.

Every subcommand reads a graph file or generator spec (JSON, see
:mod:`sgl.io`) and writes JSON or CSV to ``--out`` or stdout.

Exit codes: 0 success (an Inconclusive verdict is a success), 2 input error,
3 computation error.  Computation errors print the module's message as is.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

import numpy as np

from . import criticality as crit
from .errors import SGLError
from .graph import vertex_label
from .heat import heat_gs_limit, heat_kernel, long_time_rate, series_csv
from .io import (
    InputError,
    dumps,
    family_from_spec,
    load_spec,
    parse_anchor,
    parse_weight,
    report_document,
)
from .solver import assemble
from .spectral import HarnackInstance, harnack_constant, lambda0_series

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(f"{self.prog}: {message}")


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def parse_rule(text: str | None) -> crit.DecisionRule:
    """``key=value,...`` overrides of :class:`DecisionRule` fields."""
    rule = crit.DecisionRule()
    if not text:
        return rule
    names = {f.name for f in dataclasses.fields(rule)}
    changes = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in names:
            raise InputError(f"bad rule item {item!r}; fields are {sorted(names)}")
        try:
            changes[key] = float(val)
        except ValueError:
            raise InputError(f"bad value in rule item {item!r}") from None
    return dataclasses.replace(rule, **changes)


def _series_rows(series):
    return list(zip(series.levels, [float(v) for v in series.values]))


def _series_doc(series):
    return {"name": series.name, "levels": list(series.levels), "values": [float(v) for v in series.values], "monotone": series.is_monotone()}


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, vertices become labels."""
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else vertex_label(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


# ---------------------------------------------------------------------------
# subcommands; each returns (text, format)


def _family(args):
    spec = load_spec(args.spec)
    return family_from_spec(spec, anchor=parse_anchor(args.anchor))


def _emit_series(args, kind, header, series, extra=None):
    if args.format == "csv":
        return series_csv(header, _series_rows(series))
    doc = {"series": _series_doc(series), **(extra or {})}
    return dumps(report_document(kind, _clean(doc)))


def cmd_classify(args):
    fam = _family(args)
    report = crit.classify(fam, fam.anchor, args.levels, rule=parse_rule(args.rule))
    return dumps(report_document("classify", _clean(report.to_dict())))


def cmd_green(args):
    fam = _family(args)
    y = fam.anchor if args.y is None else parse_anchor(args.y)
    s = crit.green_series(fam, fam.anchor, y, args.levels)
    return _emit_series(args, "green", ["level", "value"], s)


def cmd_capacity(args):
    fam = _family(args)
    s = crit.capacity_series(fam, fam.anchor, args.levels)
    return _emit_series(args, "capacity", ["level", "value"], s)


def cmd_groundstate(args):
    fam = _family(args)
    report = crit.classify(fam, fam.anchor, args.levels, rule=parse_rule(args.rule))
    gs = crit.ground_state(fam, fam.anchor, args.levels, window_radius=args.window, report=report)
    rows = [(vertex_label(v), float(gs.psi(v))) for v in gs.window]
    if args.format == "csv":
        return series_csv(["vertex", "value"], rows)
    doc = {
        "verdict": report.verdict,
        "label": gs.label,
        "max_change": gs.max_change,
        "window": {k: v for k, v in rows},
        "caveat": report.caveat,
    }
    return dumps(report_document("groundstate", _clean(doc)))


def cmd_lambda0(args):
    fam = _family(args)
    m = parse_weight(args.weight, fam.model) if args.weight else None
    s = lambda0_series(fam, m=m, N=args.levels)
    return _emit_series(args, "lambda0", ["level", "value"], s, {"extrapolant": s.meta.get("extrapolant"), "note": s.meta.get("note")})


def cmd_hardy(args):
    fam = _family(args)
    if not args.weight:
        raise InputError("hardy needs --weight")
    w = parse_weight(args.weight, fam.model)
    s = crit.weight_nonneg_series(fam, w, args.levels)
    return _emit_series(args, "hardy", ["level", "gen_lambda_min"], s, {"first_violation": s.meta.get("first_violation")})


def cmd_heat(args):
    fam = _family(args)
    system = assemble(fam, args.levels)
    x = fam.anchor
    y = x if args.y is None else parse_anchor(args.y)
    times = _float_list(args.times)
    if not times or any(t < 0 for t in times):
        raise InputError("--times must be nonnegative")
    rows = [(t, heat_kernel(system, t, x, y)) for t in times]
    if args.format == "csv":
        return series_csv(["t", "p_t"], rows)
    doc = {"t": [r[0] for r in rows], "p_t": [r[1] for r in rows]}
    positive = [t for t in times if t > 0]
    if len(positive) >= 2:
        rate = long_time_rate(system, x, y, sorted(set(positive)))
        doc["rate"] = {k: getattr(rate, k) for k in ("estimate", "raw_rate", "lambda0", "gap", "bound", "slope_bound")}
        lim = heat_gs_limit(system, x, y)
        doc["ground_state_limit"] = dataclasses.asdict(lim)
    return dumps(report_document("heat", _clean(doc)))


def cmd_harnack(args):
    fam = _family(args)
    if args.W:
        W = [parse_anchor(t) for t in args.W.split(";")]
    else:
        W = sorted(fam.vertex_set(args.radius), key=fam.region(args.radius).index.get)
    inst = HarnackInstance(fam.model, W, parse_weight(args.f, fam.model) if ":" in args.f else float(args.f))
    C = harnack_constant(inst, cap=args.cap)
    doc = {"W": [vertex_label(v) for v in inst.W], "C": C, "cap": args.cap}
    return dumps(report_document("harnack", _clean(doc)))


def _sample(fam, args):
    pool = sorted(fam.vertex_set(args.sample_radius), key=fam.region(args.sample_radius).index.get)
    rng = np.random.default_rng(args.seed)
    k = min(args.sample, len(pool))
    picks = sorted(rng.choice(len(pool), size=k, replace=False).tolist())
    return [pool[i] for i in picks]


def cmd_report(args):
    fam = _family(args)
    x, N = fam.anchor, args.levels
    rule = parse_rule(args.rule)
    sections, failures = {}, {}

    def run(name, fn):
        try:
            sections[name] = _clean(fn())
        except SGLError as exc:
            failures[name] = f"{type(exc).__name__}: {exc}"

    state = {}

    def classification():
        state["report"] = crit.classify(fam, x, N, rule=rule)
        return state["report"].to_dict()

    run("classification", classification)
    report = state.get("report")
    run("capacity", lambda: _series_doc(report.series(f"cap_n({x})")) if report else _series_doc(crit.capacity_series(fam, x, N)))
    lam_N = N if args.full else min(N, args.lambda_levels)
    run("lambda0", lambda: (lambda s: {**_series_doc(s), "extrapolant": s.meta["extrapolant"], "note": s.meta["note"]})(lambda0_series(fam, N=lam_N)))

    verdict = report.verdict if report else None
    if verdict == crit.CRITICAL:

        def gs():
            g = crit.ground_state(fam, x, N, window_radius=args.window, report=report)
            state["psi"] = g.psi
            return {"label": g.label, "max_change": g.max_change, "window": {vertex_label(v): float(g.psi(v)) for v in g.window}}

        run("ground_state", gs)
    elif verdict == crit.SUBCRITICAL:

        def mg():
            r = crit.minimal_green(fam, x, N, report=report, tol=args.tol)
            window = sorted(fam.vertex_set(min(args.window, N)), key=fam.region(N).index.get)
            return {"residual": r.residual, "checked": r.checked, "window": {vertex_label(v): float(r.green(v)) for v in window}}

        run("minimal_green", mg)
    else:
        failures["ground_state"] = f"skipped: verdict is {verdict}"

    def probe():
        pN = N if args.full else min(N, args.probe_levels)
        return crit.uniform_subcriticality_probe(fam, _sample(fam, args), pN).to_dict()

    run("uniform_probe", probe)

    if args.weight:
        w = parse_weight(args.weight, fam.model)
        if "psi" in state:
            psi = state["psi"]
            # ψ_N is trustworthy on the inner half of K_N
            run("weight_criticality", lambda: {**crit.weight_criticality(fam, w, psi, max(N // 2, 1), rule=rule).to_dict(), "psi_level": N})
        else:
            failures["weight_criticality"] = "skipped: needs a Critical verdict and a ground state"

    if not sections:
        raise _AllFailed("; ".join(f"{k}: {v}" for k, v in failures.items()))
    doc = {"spec": args.spec, "anchor": vertex_label(x), "levels": N, "sections": sections, "failures": failures}
    return dumps(report_document("report", doc))


class _AllFailed(SGLError):
    pass


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sgl", description="Criticality and spectral diagnostics for Schrödinger operators on graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help, fmt="json", levels=50):
        s = sub.add_parser(name, help=help)
        s.add_argument("spec", help="graph file or generator spec (JSON)")
        s.add_argument("--levels", type=int, default=levels, help="largest exhaustion level N")
        s.add_argument("--anchor", help="anchor vertex label, e.g. 0 or 1,0,0 or [1,0,0]")
        s.add_argument("--tol", type=float, default=1e-8, help="residual tolerance")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--out", help="output path (default stdout)")
        s.add_argument("--format", choices=("json", "csv"), default=fmt)
        s.add_argument("--rule", help="decision rule overrides, key=value,...")
        s.add_argument("--weight", help="weight kind:param (const, geometric, hardy, inv1p2, indicator)")
        s.set_defaults(func=func)
        return s

    add("classify", cmd_classify, "Critical / Subcritical / Inconclusive verdict")
    s = add("green", cmd_green, "G_n(x, y) series (CSV: level,value)", fmt="csv")
    s.add_argument("--y", help="second vertex (default: the anchor)")
    add("capacity", cmd_capacity, "cap_n(x) series (CSV: level,value)", fmt="csv")
    s = add("groundstate", cmd_groundstate, "normalized Green column / ground state on a window")
    s.add_argument("--window", type=int, default=10)
    add("lambda0", cmd_lambda0, "bottom of the spectrum per level (CSV: level,value); --weight sets the measure", fmt="csv")
    s = add("heat", cmd_heat, "heat kernel on K_N (CSV: t,p_t)", fmt="csv", levels=10)
    s.add_argument("--y", help="second vertex (default: the anchor)")
    s.add_argument("--times", default="0,0.5,1,2,5,10,20,50", help="comma-separated times")
    s = add("harnack", cmd_harnack, "path-product Harnack constant", levels=1)
    s.add_argument("--W", help="vertex labels separated by ';' (default: K_radius)")
    s.add_argument("--radius", type=int, default=1)
    s.add_argument("--f", default="0", help="comparison function: a number or a weight kind:param")
    s.add_argument("--cap", type=int, default=16)
    add("hardy", cmd_hardy, "generalized lambda_min for h - w (CSV: level,gen_lambda_min)", fmt="csv", levels=100)
    s = add("report", cmd_report, "consolidated JSON report")
    s.add_argument("--full", action="store_true", help="run the spectral and probe sections at full depth")
    s.add_argument("--window", type=int, default=10)
    s.add_argument("--sample", type=int, default=20, help="probe sample size")
    s.add_argument("--sample-radius", type=int, default=3)
    s.add_argument("--probe-levels", type=int, default=8)
    s.add_argument("--lambda-levels", type=int, default=20)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.levels < 1:
            raise InputError("--levels must be >= 1")
        text = args.func(args)
    except InputError as exc:
        print(f"sgl: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SGLError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_COMPUTE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
