"""Command-line entry point: ``cobra-lab {simulate,exact,bounds,experiment}``.

Options may also come from a JSON config file (``--config``); flags given
on the command line override it. Exit status is 0 on success, 1 on a
runtime failure and 2 on a usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import biased, walt
from .errors import CobraLabError, ConfigError, InvalidParams
from .experiments import CAMPAIGNS, run_experiment
from .graphs import parse_graph_spec
from .harness import ProcessSpec, Quantity, run_trials
from .oracle import exact_cobra_cover, exact_cobra_hitting, exact_hitting
from .results import ResultRow, degree_column, write_csv
from .seeding import default_seed

BOUNDS = ("azar", "inverse", "regular", "path-sum", "epoch", "activation")

# every key a config file may set, with its parser
CONFIG_KEYS = {
    "command": str, "graph": str, "process": str, "quantity": str, "trials": int, "seed": int,
    "cap": int, "out": str, "workers": int, "which": str, "set": str, "eps": float, "n": int,
    "delta": int, "phi": float, "d": int, "deg": int, "u": int, "v": int, "name": str,
    "sides": str, "ns": str, "max_n": int, "corpus": str, "samples": int, "steps": int,
}


class UsageError(Exception):
    pass


def _int_list(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(x) for x in text)
    try:
        return tuple(int(x) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"expected a comma-separated integer list, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cobra-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file of option values")
        sp.add_argument("--out", help="CSV output path (default: stdout)")
        sp.add_argument("--seed", type=int, help="master seed (default: $COBRA_LAB_SEED or 0)")

    s = sub.add_parser("simulate", help="Monte Carlo estimate of a cover or hitting time")
    common(s)
    s.add_argument("--graph")
    s.add_argument("--process")
    s.add_argument("--quantity")
    s.add_argument("--trials", type=int)
    s.add_argument("--cap", type=int)
    s.add_argument("--workers", type=int)

    e = sub.add_parser("exact", help="exact value from the small-instance oracles")
    common(e)
    e.add_argument("--graph")
    e.add_argument("--process")
    e.add_argument("--quantity")

    b = sub.add_parser("bounds", help="closed-form bound calculators")
    common(b)
    b.add_argument("--which", choices=BOUNDS)
    b.add_argument("--graph")
    b.add_argument("--set", help="comma-separated target set")
    b.add_argument("--eps", type=float)
    b.add_argument("--n", type=int)
    b.add_argument("--delta", type=int)
    b.add_argument("--phi", type=float)
    b.add_argument("--d", type=int)
    b.add_argument("--deg", type=int)
    b.add_argument("--u", type=int)
    b.add_argument("--v", type=int)

    x = sub.add_parser("experiment", help="named campaign: " + ", ".join(sorted(CAMPAIGNS)))
    common(x)
    x.add_argument("name", nargs="?")
    x.add_argument("--sides")
    x.add_argument("--ns")
    x.add_argument("--trials", type=int)
    x.add_argument("--max-n", dest="max_n", type=int)
    x.add_argument("--corpus")
    x.add_argument("--samples", type=int)
    x.add_argument("--steps", type=int)
    x.add_argument("--graph")
    x.add_argument("--workers", type=int)
    return p


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    out = {}
    for key, val in data.items():
        try:
            out[key] = val if key in ("sides", "ns") and isinstance(val, list) else CONFIG_KEYS[key](val)
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: bad value for {key!r}") from None
    return out


def merge_options(args: argparse.Namespace) -> dict:
    opts = load_config(args.config) if args.config else {}
    if opts.get("command", args.command) != args.command:
        raise ConfigError(f"config file is for {opts['command']!r}, not {args.command!r}")
    for key, val in vars(args).items():
        if key not in ("config", "command") and val is not None:
            opts[key] = val
    opts.setdefault("seed", default_seed(0))
    return opts


def _need(opts: dict, *keys: str) -> None:
    missing = [k for k in keys if opts.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def cmd_simulate(opts: dict) -> list[ResultRow]:
    _need(opts, "graph", "process", "quantity", "trials")
    g = parse_graph_spec(opts["graph"])
    proc = ProcessSpec.parse(opts["process"])
    qty = Quantity.parse(opts["quantity"])
    stats = run_trials(g, proc, qty, opts["trials"], opts["seed"], opts.get("cap"),
                       opts.get("workers") or 1)
    return [ResultRow.from_stats("simulate", g, stats, k=proc.k, seed=opts["seed"],
                                 quantity=str(qty), extra={"process": str(proc), "cap": stats.cap})]


def cmd_exact(opts: dict) -> list[ResultRow]:
    _need(opts, "graph", "process", "quantity")
    g = parse_graph_spec(opts["graph"])
    proc = ProcessSpec.parse(opts["process"])
    qty = Quantity.parse(opts["quantity"])
    qty.validate(g)
    if proc.kind in ("cobra", "srw"):
        if qty.kind == "hit":
            value = exact_cobra_hitting(g, qty.start, qty.target, proc.k)
        else:
            value = exact_cobra_cover(g, qty.start, proc.k)
    elif proc.kind in ("metropolis", "inverse-degree") and qty.kind == "hit":
        chain = (biased.build_metropolis_controller(g, [qty.target]) if proc.kind == "metropolis"
                 else biased.inverse_degree_chain(g, qty.target))
        value = float(exact_hitting(chain.chain(), [qty.target])[qty.start])
    else:
        raise ConfigError(f"no exact oracle for {proc} with {qty}")
    return [ResultRow.exact("exact", g, value, k=proc.k, quantity=str(qty),
                            extra={"process": str(proc)})]


def cmd_bounds(opts: dict) -> list[ResultRow]:
    _need(opts, "which")
    which = opts["which"]
    if which not in BOUNDS:
        raise ConfigError(f"--which must be one of {BOUNDS}")
    if which == "epoch":
        _need(opts, "phi", "d", "n")
        s = walt.epoch_length(opts["phi"], opts["d"], opts["n"])
        return [ResultRow("bounds:epoch", "", opts["n"], opts["d"], bound_value=float(s),
                          extra={"phi": opts["phi"], "anchor": "conductance-epoch-length"})]
    if which == "regular":
        _need(opts, "n", "delta")
        rep = biased.regular_bound(opts["n"], opts["delta"])
        return [ResultRow("bounds:regular", "", opts["n"], opts["delta"], bound_value=rep.value,
                          extra={**rep.extra, "anchor": "regular-hitting-envelope"})]
    if which == "activation":
        _need(opts, "deg")
        pstar, floor = biased.activation_probability(opts["deg"])
        return [ResultRow("bounds:activation", "", None, opts["deg"], bound_value=pstar,
                          extra={"floor": floor, "anchor": "two-draw-activation"})]
    _need(opts, "graph")
    g = parse_graph_spec(opts["graph"])
    d = degree_column(g)
    if which == "azar":
        _need(opts, "set", "eps")
        S = _int_list(opts["set"])
        rep = biased.azar_bound(g, S, opts["eps"])
        return [ResultRow("bounds:azar", g.name, g.n, d, bound_value=rep.value,
                          extra={"set": S, "eps": opts["eps"], "anchor": "biased-stationary-mass"})]
    if which == "inverse":
        _need(opts, "v")
        rep = biased.inverse_bound(g, opts["v"])
        return [ResultRow("bounds:inverse", g.name, g.n, d, bound_value=rep.value,
                          extra={"v": opts["v"], "relaxed": rep.extra["relaxed"],
                                 "anchor": "inverse-degree-return-time"})]
    _need(opts, "u", "v")
    rep = biased.path_sum_bound(g, opts["u"], opts["v"])
    return [ResultRow("bounds:path-sum", g.name, g.n, d, bound_value=rep.value,
                      extra={"u": opts["u"], "v": opts["v"], "expanded": rep.extra["expanded"],
                             "anchor": "shortest-path-hitting-sum"})]


# flag name -> campaign keyword
_EXPERIMENT_KEYS = {"sides": "sides", "ns": "ns", "trials": "trials", "seed": "seed",
                    "max_n": "max_n", "corpus": "corpus_name", "samples": "samples",
                    "steps": "steps", "graph": "graph", "workers": "workers"}


def cmd_experiment(opts: dict) -> list[ResultRow]:
    _need(opts, "name")
    kw = {}
    for flag, key in _EXPERIMENT_KEYS.items():
        if opts.get(flag) is None:
            continue
        val = opts[flag]
        kw[key] = _int_list(val) if flag in ("sides", "ns") else val
    return run_experiment(opts["name"], **kw)


COMMANDS = {"simulate": cmd_simulate, "exact": cmd_exact, "bounds": cmd_bounds,
            "experiment": cmd_experiment}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = merge_options(args)
        rows = COMMANDS[args.command](opts)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cobra-lab: error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, InvalidParams) as exc:
        print(f"cobra-lab: error: {exc}", file=sys.stderr)
        return 2
    except (CobraLabError, OSError) as exc:
        print(f"cobra-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    out = opts.get("out")
    try:
        if out:
            with open(out, "w", newline="") as fh:
                write_csv(rows, fh)
        else:
            write_csv(rows, sys.stdout)
    except OSError as exc:
        print(f"cobra-lab: cannot write {out}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
