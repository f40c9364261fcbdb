"""Command line entry point: ``parex <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config, parse_pair, parse_params
from .experiments import (
    CHARACTERIZATION_KINDS, KIND_ALIASES, TRANSFER_MODES, CharacterizationScenario, TransferScenario,
    characterization_experiment, make_symbol, transfer_experiment,
)
from .contour import ContourConfig, contour_commutator
from .geometry import ParabolicRectangle, admissible_half_widths
from .harness import (
    CONSTANT_KINDS, OPERATOR_KINDS, close_arrays, coverage_table, environment, functions_for, run_bench,
    run_verify, weights_for,
)
from .lattice import to_csv
from .operators import (
    Direction, commutator_bracket, fractional_integral, fractional_maximal, integral_commutator,
    integral_operator, maximal_commutator, maximal_operator, positive_commutator, restricted_maximal,
)
from .report import Report, emit_report
from .weights import INF, a1_constant, ainfty_profile, aq_constant, one_weight_constant, two_weight_constant

SUBCOMMANDS = ("constants", "operators", "verify", "extrapolate", "characterize", "bench")


def run_constants(cfg, kinds=CONSTANT_KINDS) -> Report:
    spec, lag = cfg.grid, cfg.gamma
    rep = Report("constants", environment=environment(cfg))
    weights = weights_for(cfg, spec)
    for wname, w in weights:
        unit = bool(np.all(w.values == 1.0))
        for d in (Direction.FORWARD, Direction.BACKWARD):
            rows = []
            for pair in cfg.pairs:
                if "one_weight" in kinds:
                    rows.append(("one_weight", str(pair), one_weight_constant(w, pair, lag, d), True))
                if "two_weight" in kinds:
                    for vname, v in weights:
                        rows.append((f"two_weight[v={vname}]", str(pair), two_weight_constant(w, v, pair, lag, d),
                                     bool(np.all(v.values == 1.0))))
                if "aq" in kinds and 1 < pair.q < INF:
                    rows.append(("aq", f"q={pair.q:g}", aq_constant(w, pair.q, lag, d), True))
            if "a1" in kinds:
                maximal, rect = a1_constant(w, lag, d)
                rows += [("a1_maximal", "", maximal, True), ("a1_rectangle", "", rect, True)]
            if "ainfty" in kinds:
                rows += [("ainfty", f"q={q:g}", value, True) for q, value in ainfty_profile(w, lag, [2, 4, 8, 16], d)]
            # with unit weights every constant is 1 bit for bit
            for kind, pair, value, other_unit in rows:
                rep.table.append({"weight": wname, "direction": d.value, "kind": kind, "pair": pair, "value": value})
                name = f"{kind}[{wname},{pair},{d.value}]"
                if unit and other_unit:
                    rep.check_close(name, value, 1.0, 0.0)
                else:
                    rep.record(name, value)
    return rep


def _operator_output(name, f, b, cfg, engine, opts):
    lag, alpha = cfg.gamma, cfg.alpha
    d = Direction.parse(opts.get("direction", "+"))
    k = int(opts.get("k", 1))
    ia = alpha if alpha > 0 else 0.5
    if name == "maximal":
        return fractional_maximal(f, lag, alpha, d, engine)
    if name == "restricted":
        spec = f.spec
        m = int(opts.get("m", max(admissible_half_widths(spec, lag))))
        center = opts.get("center", [e // 2 for e in spec.shape])
        return restricted_maximal(f, lag, d, ParabolicRectangle(center, m, spec.p), engine)
    if name == "integral":
        return fractional_integral(f, lag, ia, d, bool(opts.get("truncated", False)))
    if name == "maximal_commutator":
        return maximal_commutator(f, b, lag, alpha, k, d, engine)
    if name == "integral_commutator":
        return integral_commutator(f, b, lag, ia, k, d, bool(opts.get("truncated", False)))
    if name == "bracket":
        return commutator_bracket(integral_operator(lag, ia, d), b, f, k, opts.get("method", "kernel"))
    if name == "positive_commutator":
        return positive_commutator(maximal_operator(lag, alpha, d, engine), b, f)
    if name == "contour":
        return contour_commutator(integral_operator(lag, ia, d), b, f, ContourConfig.for_order(k))
    raise ValueError(f"unknown operator {name!r}; expected one of {OPERATOR_KINDS}")


def run_operators(cfg, name: str, out_dir: Path, engine: str) -> Report:
    opts = dict(cfg.operator)
    spec = cfg.grid
    rep = Report(f"operators:{name}", environment=environment(cfg) | {"operator": name})
    b = make_symbol(cfg.symbol[0], spec, **cfg.symbol[1])
    engines = ("fast", "naive") if engine == "both" else (engine,)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, f in enumerate(functions_for(cfg, spec)):
        t0 = time.perf_counter()
        outs = {e: _operator_output(name, f, b, cfg, e, opts) for e in engines}
        rep.timings[f"function_{i}"] = time.perf_counter() - t0
        first = outs[engines[0]]
        path = out_dir / f"{name}_{i}.csv"
        path.write_text(to_csv(first))
        rep.check_true(f"finite_output[{i}]", bool(np.all(np.isfinite(first.values))), inputs=str(path))
        rep.record(f"valid_cells[{i}]", int(first.mask.sum()))
        if len(outs) == 2:
            close_arrays(rep, f"engines_agree[{i}]", outs["fast"].values, outs["naive"].values, 1e-12)
    return rep


def _transfer_scenario(cfg, mode: str) -> TransferScenario:
    t = dict(cfg.transfer)
    t.update(t.get(mode, {}))
    weights = tuple(
        (str(w.get("name", f"w{i}")), w["kind"], parse_params(w.get("params", {}), f"transfer.weights[{i}]"))
        for i, w in enumerate(t.get("weights", [{"name": "unit", "kind": "constant"}]))
    )
    source = parse_pair(t.get("source", ["2", "2"]), "transfer.source")
    targets = tuple(parse_pair(x, f"transfer.targets[{i}]") for i, x in enumerate(t.get("targets", [])))
    return TransferScenario(
        name="extrapolate", n=cfg.grid.n, p=cfg.grid.p, boundary=t.get("boundary", "clipped"),
        sizes=tuple(t.get("sizes", (16, 32))), gamma=str(cfg.gamma), operator=t.get("operator", "maximal"),
        source=(source.r, source.q), targets=tuple((x.r, x.q) for x in targets) or ((source.r, source.q),),
        weights=weights, budget=cfg.probe_budget, seed=cfg.seed, direction=t.get("direction", "+"),
    )


def _characterization_scenario(cfg) -> CharacterizationScenario:
    c = cfg.characterize
    sc = CharacterizationScenario(name="characterize", n=cfg.grid.n, p=cfg.grid.p,
                                  boundary=c.get("boundary", "clipped"), sizes=tuple(c.get("sizes", (16, 32))),
                                  gamma=str(cfg.gamma), budget=cfg.probe_budget, seed=cfg.seed)
    if "lambdas" in c:
        sc = replace(sc, lambdas=tuple(float(x) for x in c["lambdas"]))
    if "pair" in c:
        pr = parse_pair(c["pair"], "characterize.pair")
        sc = replace(sc, pair=(pr.r, pr.q))
    for key in ("beta", "alpha"):
        if key in c:
            sc = replace(sc, **{key: parse_params({key: c[key]}, "characterize")[key]})
    if "k" in c:
        sc = replace(sc, k=int(c["k"]))
    if "symbol" in c:
        sym = c["symbol"]
        sc = replace(sc, symbol=(sym["kind"], parse_params(sym.get("params", {}), "characterize.symbol")))
    return sc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario JSON (default: the bundled 16x16 config)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--engine", choices=("fast", "naive", "both"), help="maximal engine")
    common.add_argument("--threads", type=int, default=1, help="worker threads for verify groups")
    common.add_argument("--format", choices=("csv", "json", "both"), default="both", dest="fmt")

    parser = argparse.ArgumentParser(prog="parex", description="Parabolic operators with time lag on grids.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("constants", parents=[common], help="weight constants and profiles")
    p.add_argument("kinds", nargs="*", help=f"constant kinds among {', '.join(CONSTANT_KINDS)} (default all)")
    p = sub.add_parser("operators", parents=[common], help="evaluate an operator to grid dumps")
    p.add_argument("name", nargs="?", choices=OPERATOR_KINDS, help="operator (default from config)")
    p = sub.add_parser("verify", parents=[common], help="full invariant suite")
    p.add_argument("groups", nargs="*", help="restrict to these groups")
    p.add_argument("--coverage", action="store_true", help="print the coverage table and exit")
    p = sub.add_parser("extrapolate", parents=[common], help="transfer experiments")
    p.add_argument("mode", nargs="?", choices=TRANSFER_MODES, help="mode (default from config)")
    p = sub.add_parser("characterize", parents=[common], help="commutator characterization bands")
    p.add_argument("kind", nargs="?", choices=tuple(KIND_ALIASES) + tuple(CHARACTERIZATION_KINDS),
                   help="kind (default from config)")
    sub.add_parser("bench", parents=[common], help="fast vs naive engine timing")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"parex: invalid config: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.engine:
        cfg.engine = args.engine
    out = args.out or Path(cfg.out_dir)
    engine = cfg.engine

    t0 = time.perf_counter()
    try:
        if args.command == "constants":
            unknown = [k for k in args.kinds if k not in CONSTANT_KINDS]
            if unknown:
                raise ValueError(f"unknown constant kind(s) {unknown}; expected some of {CONSTANT_KINDS}")
            rep = run_constants(cfg, tuple(args.kinds) or CONSTANT_KINDS)
        elif args.command == "operators":
            rep = run_operators(cfg, args.name or cfg.operator.get("name", "maximal"), out, engine)
        elif args.command == "verify":
            if args.coverage:
                print(coverage_table(), end="")
                return 0
            rep = run_verify(cfg, args.groups or None, max(1, args.threads))
        elif args.command == "extrapolate":
            mode = args.mode or cfg.transfer.get("mode", "strong")
            rep = transfer_experiment(mode, _transfer_scenario(cfg, mode))
        elif args.command == "characterize":
            kind = args.kind or cfg.characterize.get("kind", "thm_1_7")
            rep = characterization_experiment(kind, _characterization_scenario(cfg))
        else:
            rep = run_bench(cfg, engine if args.engine else "both")
    except ConfigError as exc:
        print(f"parex: invalid config: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"parex: {exc}", file=sys.stderr)
        return 2
    rep.timings["wall"] = time.perf_counter() - t0
    try:
        written = emit_report(rep, out, args.fmt, stem=rep.scenario.replace(":", "_"))
    except OSError as exc:
        print(f"parex: {exc}", file=sys.stderr)
        return 2
    print(f"{args.command}: {len(rep.asserted)} checks, {len(rep.failures)} failed -> {written[0].parent}")
    for r in rep.failures:
        print(f"  FAIL {r.scenario}/{r.check}: lhs={r.value_lhs!r} rhs={r.value_rhs!r} tol={r.tolerance!r}")
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
