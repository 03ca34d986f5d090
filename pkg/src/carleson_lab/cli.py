"""Command-line front end: ``carleson-lab <subcommand> [flags]``.

Exit status is 0 on success, 2 on validation or usage errors and 1 on
numeric failures.  Every run prints its fully resolved configuration as a
single ``config: {...}`` JSON line before any result.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from .core_math import DomainError, NumericError, ParamSet, SignMode

SUBCOMMANDS = ("expsum", "multiplier", "carleson", "ergodic", "ttstar", "sweep", "report")

_PARAM_FLAGS = (("c", "c"), ("eps", "eps"), ("nu", "nu"), ("delta1", "delta1"), ("delta2", "delta2"),
                ("nuprime", "nuPrime"))


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _common(suppress: bool) -> argparse.ArgumentParser:
    # flags shared by every subcommand; accepted before or after it
    d = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    g = p.add_argument_group("parameters and run control")
    for flag, name in _PARAM_FLAGS:
        g.add_argument(f"--{flag}", dest=name, type=float, default=d, metavar="X",
                       help=f"parameter {name} (default {getattr(ParamSet(), name):g})")
    g.add_argument("--jmin", type=int, default=d, help="first scale index of the sweep window")
    g.add_argument("--jmax", type=int, default=d, help="last scale index of the sweep window")
    g.add_argument("--grid", type=int, default=d, metavar="SIZE",
                   help="grid points per axis and scale (even, default 64)")
    g.add_argument("--seed", type=int, default=d, help="64-bit seed for all randomness (default 0)")
    g.add_argument("--threads", type=int, default=d, help="worker processes across scales (1 = serial)")
    g.add_argument("--out", default=d, metavar="PATH", help="output file (or directory for csv)")
    g.add_argument("--format", choices=("csv", "json", "svg"), default=d, help="output format")
    g.add_argument("--config", default=d, metavar="PATH", help="JSON config; flags override it")
    g.add_argument("--wall-time", dest="wall_time", action="store_true", default=d,
                   help="record wall-clock seconds in the report (breaks byte identity)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="carleson-lab", parents=[_common(False)],
                     description="Numerical laboratory for c-modulated Carleson operators.")
    sub = parser.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    common = _common(True)

    s = sub.add_parser("expsum", parents=[common], help="exponential sum S_N and its envelope")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--xi1", type=float, required=True)
    s.add_argument("--xi2", type=float, required=True)
    s.add_argument("--M", type=int, default=None, help="also print the envelope bound with this M")

    s = sub.add_parser("multiplier", parents=[common], help="m_j, H_j, E_j or d/dlambda m_j at one point")
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--xi", type=float, required=True)
    s.add_argument("--lam", type=float, required=True)
    s.add_argument("--mode", type=int, choices=(0, 1), default=0)
    s.add_argument("--kind", choices=("m", "H", "E", "dlambda", "box"), default="m")

    s = sub.add_parser("carleson", parents=[common], help="truncated maximal operator on a signal")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--impulse", action="store_true", help="use the unit impulse at 0")
    src.add_argument("--input", metavar="CSV", help="signal CSV with columns x,re,im")
    s.add_argument("--support", type=int, default=None, help="truncation radius of the impulse response (default 2^20)")
    s.add_argument("--mode", type=int, choices=(0, 1), default=0)
    s.add_argument("--lambda-points", dest="lambda_points", type=int, default=None)

    s = sub.add_parser("ergodic", parents=[common], help="ergodic average along (n, floor(n^c))")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--impulse", action="store_true")
    src.add_argument("--input", metavar="CSV", help="2-d signal CSV with columns x1,x2,re,im")
    s.add_argument("--t", type=int, default=None, help="single average length")
    s.add_argument("--maximal", action="store_true", help="maximal average over t = 1, 2, 4, ..., 2^K")
    s.add_argument("--K", type=int, default=4)

    s = sub.add_parser("ttstar", parents=[common], help="discrete TT* kernel at one pair")
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--tau", choices=("+", "-"), default="-")
    s.add_argument("--generator", choices=("constant", "uniform", "resonant"), default="constant")
    s.add_argument("--x", type=int, default=None)
    s.add_argument("--y", type=int, default=None)

    s = sub.add_parser("sweep", parents=[common], help="run estimate sweeps and write a report")
    s.add_argument("--name", default="all", help="sweep name or 'all': minor-box, error-term, kt-difference, "
                                                 "ttstar, ttstar-continuous")

    s = sub.add_parser("report", parents=[common], help="re-render an existing JSON report")
    s.add_argument("--input", required=True, metavar="JSON")
    return parser


def _resolve(args):
    from .harness import DEFAULT_WINDOWS, ExperimentConfig, GridSpec

    base = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
    params = dict(base.get("params", {}))
    for _, name in _PARAM_FLAGS:
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    base["params"] = ParamSet.from_dict(params).to_dict()
    if getattr(args, "seed", None) is not None:
        base["seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        base["threads"] = args.threads
    if getattr(args, "grid", None) is not None:
        base["grid"] = GridSpec.from_size(args.grid).to_dict()
    if getattr(args, "wall_time", None):
        base["record_wall_time"] = True
    name = getattr(args, "name", None)
    if getattr(args, "jmin", None) is not None or getattr(args, "jmax", None) is not None:
        windows = dict(base.get("windows", {}))
        targets = [name] if name not in (None, "all") else list(DEFAULT_WINDOWS)
        for t in targets:
            if t not in DEFAULT_WINDOWS:
                continue
            lo, hi, step = (list(windows.get(t, DEFAULT_WINDOWS[t])) + [1])[:3]
            lo = args.jmin if args.jmin is not None else lo
            hi = args.jmax if args.jmax is not None else hi
            windows[t] = [lo, hi, step]
        base["windows"] = windows
    out = {}
    if getattr(args, "out", None):
        out["path"] = args.out
    if getattr(args, "format", None):
        out["format"] = args.format
    if out:
        base["outputs"] = out
    return ExperimentConfig.from_dict(base)


def _echo(config):
    print("config: " + json.dumps(config.to_dict(), sort_keys=True), flush=True)


def _complex(z):
    return f"{z.real:.17g} {z.imag:+.17g}i"


def _cmd_expsum(args, config):
    from .expsum import bound_full, exp_sum

    c = config.params.c
    s = exp_sum(args.N, args.xi1, args.xi2, c)
    print(f"S_N = {_complex(s)}  |S_N| = {abs(s):.17g}")
    if args.M is not None:
        b = bound_full(args.N, args.M, args.xi1, args.xi2, c)
        print(f"envelope = {float(b):.17g}")


def _cmd_multiplier(args, config):
    from .multiplier import E_j, H_j, MajorBox, dlambda_m_j, m_j

    c, mode = config.params.c, SignMode(args.mode)
    if args.kind == "box":
        print(bool(MajorBox(args.j, config.params).contains(args.xi, args.lam)))
        return
    fn = {"m": m_j, "H": H_j, "E": E_j, "dlambda": dlambda_m_j}[args.kind]
    v = fn(args.j, args.xi, args.lam, mode, c)
    print(f"{args.kind} = {_complex(v)}  |value| = {abs(v):.17g}")


def _cmd_carleson(args, config):
    from .operators import LambdaGrid, Signal, carleson_maximal, impulse_norm, lp_norm

    c = config.params.c
    if args.impulse:
        n_max = args.support if args.support is not None else 2 ** 20
        info = impulse_norm(n_max)
        # the tail beyond the truncation is added back in closed form
        print(f"l2 norm = {info['completed']:.10f}")
        print(f"truncated norm = {info['truncated']:.10f}  tail squared = {info['tail_squared']:.3e}  "
              f"closed form = {info['closed_form']:.10f}")
        return
    with open(args.input, encoding="utf-8") as fh:
        f = Signal.from_csv(fh.read())
    grid = LambdaGrid.uniform(args.lambda_points, c=c) if args.lambda_points else None
    res = carleson_maximal(f, SignMode(args.mode), c, grid)
    ratio = lp_norm(res.values) / max(lp_norm(f), 1e-300)
    print(f"l2 norm = {lp_norm(res.values):.17g}  ratio = {ratio:.17g}  lambda points = {len(res.grid)}")
    _write_signal(res.values, config)


def _write_signal(sig, config):
    path = config.outputs.get("path")
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(sig.to_csv())


def _cmd_ergodic(args, config):
    from .operators import Signal, dyadic_scales, ergodic_average, lp_norm, maximal_average

    c = config.params.c
    if args.impulse:
        f = Signal.impulse(2)
    else:
        with open(args.input, encoding="utf-8") as fh:
            f = Signal.from_csv(fh.read())
    if args.maximal:
        out = maximal_average(f, dyadic_scales(args.K), c)
    else:
        if args.t is None:
            raise DomainError("ergodic needs --t or --maximal")
        out = ergodic_average(f, args.t, c)
    print(f"l2 norm = {lp_norm(out):.17g}  support = {out.support}")
    _write_signal(out, config)


def _cmd_ttstar(args, config):
    import numpy as np

    from .harness import _SWEEP_IDS
    from .ttstar import discrete_choice, r_range, ttstar_kernel_discrete

    p = config.params
    if args.r not in r_range(args.j, p):
        raise DomainError(f"r={args.r} outside the admissible range {r_range(args.j, p)} for j={args.j}")
    rng = np.random.default_rng([config.seed, _SWEEP_IDS["ttstar"], args.j])
    ch = discrete_choice(args.generator, args.j, args.r, args.tau, p.c, rng)
    lo, _ = ch.window
    x = lo if args.x is None else args.x
    y = x if args.y is None else args.y
    k = ttstar_kernel_discrete(x, y, args.j, args.r, args.tau, ch, p.c)
    print(f"K = {_complex(k)}  |K| = {abs(k):.17g}")


def _write_outputs(results, config, fmt):
    from .harness import dumps_report, emit_report, render_svg, report_dict, summary_csv

    path = config.outputs.get("path")
    report = report_dict(results, config)
    if fmt == "json":
        if path:
            emit_report(results, config, json_path=path)
        else:
            sys.stdout.write(dumps_report(report))
    elif fmt == "csv":
        if path:
            emit_report(results, config, csv_dir=path, summary_path=f"{path.rstrip('/')}/summary.csv")
        else:
            sys.stdout.write(summary_csv(report))
    else:
        if path:
            emit_report(results, config, svg_path=path)
        else:
            sys.stdout.write(render_svg(report))
    return report


def _cmd_sweep(args, config):
    from .harness import SWEEPS, run_sweeps

    names = SWEEPS if args.name == "all" else (args.name,)
    for n in names:
        if n not in SWEEPS:
            raise DomainError(f"unknown sweep {n!r}; choose from {', '.join(SWEEPS)}")
    t0 = time.perf_counter()
    results = run_sweeps(config, names)
    report = _write_outputs(results, config, config.outputs.get("format", "json"))
    for s in report["sweeps"]:
        fit = s["fit"] or {}
        print(f"{s['name']}: slope={fit.get('slope', float('nan')):.4f} r2={fit.get('r2', float('nan')):.4f} "
              f"pass={s['pass']}", file=sys.stderr)
    print(f"elapsed {time.perf_counter() - t0:.1f} s", file=sys.stderr)


def _cmd_report(args, config):
    from .harness import render_svg, summary_csv

    with open(args.input, encoding="utf-8") as fh:
        report = json.load(fh)
    fmt = config.outputs.get("format", "svg")
    text = render_svg(report) if fmt == "svg" else summary_csv(report) if fmt == "csv" else \
        json.dumps(report, sort_keys=True, indent=2) + "\n"
    path = config.outputs.get("path")
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_COMMANDS = {"expsum": _cmd_expsum, "multiplier": _cmd_multiplier, "carleson": _cmd_carleson,
             "ergodic": _cmd_ergodic, "ttstar": _cmd_ttstar, "sweep": _cmd_sweep, "report": _cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _resolve(args)
        if args.command is None:
            raise _UsageError("carleson-lab: error: a subcommand is required: " + ", ".join(SUBCOMMANDS))
        _echo(config)
        _COMMANDS[args.command](args, config)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
