"""Command-line driver.

Exit codes: 0 success, 2 usage or configuration error, 3 computation error.
Every command first prints its resolved configuration as a ``#`` comment.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

from . import chain as chain_mod
from .chain import ChainParams, build_homogeneous, format_matrix, is_lazy, is_reversible
from .conductance import (
    CONNECTED_LIMIT,
    EXHAUSTIVE_LIMIT,
    conductance_arc_upper,
    conductance_connected,
    conductance_exact,
    format_cut,
)
from .errors import (
    ConfigError,
    CycleMixError,
    DegenerateModelError,
    InfeasibleParamsError,
    InvalidParameterError,
)
from .lab import (
    SweepConfig,
    fit_exponent,
    format_summary_csv,
    read_records,
    run_sweep,
    summarize,
    write_plot_data,
    write_records,
)
from .mixing import DEFAULT_EPSILON, DEFAULT_MAX_STEPS, format_summary, mixing_time, write_profile
from .topology import degree_cap, format_graph, generate, max_long_range_degree, read_graph

WORKERS_ENV = "CYCLEMIX_WORKERS"
EXIT_USAGE = 2
EXIT_RUNTIME = 3

# keys accepted in a sweep config file, with their parsers
_SWEEP_KEYS = {
    "model": str,
    "alpha": float,
    "sizes": lambda s: [int(x) for x in s.replace(";", ",").split(",") if x.strip()],
    "trials": int,
    "q_c": float,
    "q_l": float,
    "r": lambda s: [float(x) for x in s.replace(";", ",").split(",") if x.strip()],
    "d": float,
    "epsilon": float,
    "seed": int,
    "trim": float,
    "workers": int,
    "out": str,
    "max_steps": int,
    "mixing": lambda s: s.strip().lower() not in ("0", "false", "no", "off"),
}
_SWEEP_DEFAULTS = {
    "trials": 20,
    "q_c": 0.2,
    "q_l": 0.1,
    "r": [0.0, 0.15],
    "epsilon": DEFAULT_EPSILON,
    "trim": 0.05,
    "max_steps": DEFAULT_MAX_STEPS,
    "mixing": True,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _echo(stream, /, **items):
    stream.write("# " + " ".join(f"{k}={v}" for k, v in items.items()) + "\n")


def _add_chain_flags(p):
    p.add_argument("graph", help="graph file written by 'generate'")
    p.add_argument("--q-c", type=float, default=0.2, help="cycle probability base (default 0.2)")
    p.add_argument("--q-l", type=float, default=0.1, help="long-range budget (default 0.1)")
    p.add_argument("--r", type=float, default=0.0, help="clockwise drift (default 0)")
    p.add_argument("--d", type=float, default=None,
                   help="long-range divisor (default: degree cap of the graph's alpha, else 1)")


def _load_chain(args, out):
    g = read_graph(args.graph)
    d = args.d
    if d is None:
        d = float(degree_cap(g.alpha)) if g.alpha is not None else 1.0
    params = ChainParams(args.q_c, args.q_l, args.r, d)
    _echo(out, graph=args.graph, n=g.n, model=g.model_tag, q_c=params.q_c, q_l=params.q_l,
          r=params.r, d=params.d)
    return g, params, build_homogeneous(g, params)


def cmd_generate(args, out):
    g = generate(args.model, args.n, args.alpha, args.seed)
    _echo(out, model=g.model_tag, n=g.n, alpha=repr(g.alpha), seed=g.seed,
          out=args.out or "-")
    text = format_graph(g)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    stats = f"edges={g.num_edges} max_degree={max_long_range_degree(g)}\n"
    (out if args.out else sys.stderr).write(stats)
    return 0


def cmd_chain(args, out):
    g, params, P = _load_chain(args, out)
    _echo(out, feasible=True, lazy=is_lazy(P), reversible=is_reversible(P))
    text = format_matrix(P)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return 0


def _conductance(P, g, method):
    if method == "auto":
        method = "exact" if P.n <= EXHAUSTIVE_LIMIT else "connected" if P.n <= CONNECTED_LIMIT else "arc"
    if method == "exact":
        return conductance_exact(P)
    if method == "connected":
        return conductance_connected(P)
    return conductance_arc_upper(P, g)


def _report_conductance(P, g, method, out):
    est = _conductance(P, g, method)
    out.write("kind,phi,flow,denom,set\n")
    out.write(f"{est.kind},{format_cut(est.witness)}\n")


def _report_mixing(P, args, out):
    out.write("variant,t_mix,epsilon,worst_start\n")
    res = mixing_time(P, args.epsilon, args.max_steps)
    out.write(f"chain,{format_summary(res)}\n")
    profiles = {res.worst_start: res.profile}
    if not is_reversible(P):
        rev = mixing_time(chain_mod.reversibilize(P), args.epsilon, args.max_steps)
        out.write(f"reversibilized,{format_summary(rev)}\n")
    if args.profile:
        write_profile(args.profile, profiles)


def cmd_conductance(args, out):
    g, _, P = _load_chain(args, out)
    _report_conductance(P, g, args.method, out)
    return 0


def cmd_mixing(args, out):
    _, _, P = _load_chain(args, out)
    _echo(out, epsilon=repr(args.epsilon), max_steps=args.max_steps)
    _report_mixing(P, args, out)
    return 0


def cmd_analyze(args, out):
    g, _, P = _load_chain(args, out)
    _echo(out, which=args.which, epsilon=repr(args.epsilon), method=args.method)
    if args.which in ("conductance", "both"):
        _report_conductance(P, g, args.method, out)
    if args.which in ("mixing", "both"):
        _report_mixing(P, args, out)
    return 0


def read_config(path) -> dict:
    """Flat ``key=value`` file; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    conf = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _SWEEP_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            conf[key] = _SWEEP_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return conf


def _resolve_sweep(args) -> dict:
    conf = dict(_SWEEP_DEFAULTS)
    conf["workers"] = int(os.environ.get(WORKERS_ENV, "1"))
    if args.config:
        conf.update(read_config(args.config))
    for key in _SWEEP_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            conf[key] = val
    missing = [k for k in ("model", "alpha", "sizes", "seed", "out") if k not in conf]
    if missing:
        raise ConfigError(f"missing sweep settings: {', '.join(missing)} (--seed is mandatory)")
    return conf


def cmd_sweep(args, out):
    conf = _resolve_sweep(args)
    d = conf.get("d") or float(degree_cap(conf["alpha"]))
    params = ChainParams(conf["q_c"], conf["q_l"], 0.0, d)
    config = SweepConfig(conf["model"], conf["alpha"], conf["sizes"], conf["trials"], params,
                         conf["r"], conf["epsilon"], conf["seed"], conf["trim"],
                         compute_mixing=conf["mixing"], max_steps=conf["max_steps"])
    _echo(out, **{"config": config.describe().replace(" ", ",")}, workers=conf["workers"],
          out=conf["out"])
    outdir = Path(conf["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    records = run_sweep(config, workers=conf["workers"])
    write_records(outdir / "records.csv", records, config, timings=args.timings)
    summary = summarize(records, config.trim_fraction)
    (outdir / "summary.csv").write_text(format_summary_csv(summary))
    write_plot_data(outdir, summary)
    skipped = sum(rec.phi_kind == "skipped" or (config.compute_mixing and rec.t_mix is None)
                  for rec in records)
    out.write(f"records={len(records)} skipped={skipped}\n")
    for r, fit in summary.exponents.items():
        if fit is not None:
            out.write(f"slope r={r!r}: {fit[0]:.4f}\n")
    return 0


def cmd_fit(args, out):
    _echo(out, records=args.records, trim=repr(args.trim), column=args.column)
    records = read_records(args.records)
    summary = summarize(records, args.trim)
    out.write("r,slope,intercept,rms\n")
    for r in sorted({row.r for row in summary.rows}):
        rows = [row for row in summary.rows if row.r == r]
        if args.column == "t_mix":
            pts = [(row.n, row.t_mix_median) for row in rows if not math.isnan(row.t_mix_median)]
        else:
            pts = [(row.n, row.phi_median) for row in rows if not math.isnan(row.phi_median)]
        slope, icpt, rms = fit_exponent(pts)
        out.write(f"{r!r},{slope!r},{icpt!r},{rms!r}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cyclemix", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="draw a random graph (M1, M2 or M3)")
    p.add_argument("--model", required=True, type=str.upper, choices=["M1", "M2", "M3"])
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("chain", help="build and dump the homogeneous transition matrix")
    _add_chain_flags(p)
    p.add_argument("--out", help="matrix dump path (default: stdout)")
    p.set_defaults(func=cmd_chain)

    for name, func, helptext in (
        ("conductance", cmd_conductance, "conductance with its minimizing cut"),
        ("mixing", cmd_mixing, "exact total-variation mixing time"),
        ("analyze", cmd_analyze, "conductance and/or mixing report"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_chain_flags(p)
        p.add_argument("--method", default="auto", choices=["auto", "exact", "connected", "arc"],
                       help="conductance route (default: by size)")
        p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
        p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
        p.add_argument("--profile", help="write the worst-start distance profile (CSV, .gz ok)")
        if name == "analyze":
            p.add_argument("--which", default="both", choices=["conductance", "mixing", "both"])
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="seeded scaling sweep; writes records, summary, plot data")
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--model", type=str.upper, choices=["M1", "M2", "M3"])
    p.add_argument("--alpha", type=float)
    p.add_argument("--sizes", type=_SWEEP_KEYS["sizes"], help="comma-separated node counts")
    p.add_argument("--trials", type=int, help="trials per size (default 20)")
    p.add_argument("--q-c", dest="q_c", type=float, help="default 0.2")
    p.add_argument("--q-l", dest="q_l", type=float, help="default 0.1")
    p.add_argument("--r", type=_SWEEP_KEYS["r"], help="comma-separated drifts (default 0,0.15)")
    p.add_argument("--d", type=float, help="long-range divisor (default: degree cap)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed", type=int, help="base seed (mandatory, here or in the config)")
    p.add_argument("--trim", type=float, help="per-tail trim fraction (default 0.05)")
    p.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--no-mixing", dest="mixing", action="store_const", const=False,
                   help="conductance only")
    p.add_argument("--out", help="output directory")
    p.add_argument("--timings", action="store_true", help="fill wall_time_ms (breaks byte-reproducibility)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="log-log slopes of trimmed medians from a records CSV")
    p.add_argument("records")
    p.add_argument("--trim", type=float, default=0.05)
    p.add_argument("--column", default="t_mix", choices=["t_mix", "phi"])
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except (InvalidParameterError, InfeasibleParamsError, ConfigError, DegenerateModelError,
            OSError, ValueError) as exc:
        print(f"cyclemix: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CycleMixError as exc:
        print(f"cyclemix: computation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
