"""JSON scenario configuration.

Dyadic quantities (time lag, orders, exponents) may be written as decimal or
fraction strings such as ``"1/2"`` or ``"0.25"`` so they are read exactly.
Every validation error names the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .geometry import TimeLag
from .lattice import GridSpec
from .weights import INF, WEIGHT_KINDS, ExponentPair, parse_exponent


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    grid: GridSpec
    gamma: TimeLag
    alpha: float
    pairs: list[ExponentPair]
    weights: list[tuple[str, str, dict]]
    symbol: tuple[str, dict]
    functions: list[tuple[str, dict]]
    seed: int
    engine: str = "fast"
    probe_budget: int = 48
    iteration_K: list[int] = field(default_factory=lambda: [0, 2, 6])
    contour: dict = field(default_factory=dict)
    operator: dict = field(default_factory=dict)
    transfer: dict = field(default_factory=dict)
    characterize: dict = field(default_factory=dict)
    bench: dict = field(default_factory=dict)
    out_dir: str = "parex-out"
    raw: dict = field(default_factory=dict)


def _number(value, where: str) -> float:
    try:
        if isinstance(value, str):
            return float(Fraction(value.strip()))
        if isinstance(value, bool):
            raise TypeError
        return float(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"{where}: expected a number or fraction string, got {value!r}") from None


def _exponent(value, where: str) -> float:
    try:
        return parse_exponent(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"{where}: expected an exponent, got {value!r}") from None


def parse_pair(value, where: str) -> ExponentPair:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{where}: expected [r, q]")
    try:
        return ExponentPair(_exponent(value[0], where + "[0]"), _exponent(value[1], where + "[1]"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _check_gaps(targets, source: ExponentPair, where: str) -> None:
    for i, t in enumerate(targets):
        pair = parse_pair(t, f"{where}[{i}]")
        if not pair.same_gap(source):
            raise ConfigError(f"{where}[{i}]: 1/r - 1/q = {pair.gap:g} differs from the source gap {source.gap:g}")


def parse_params(params: dict, where: str) -> dict:
    """Recipe parameters: fraction strings become floats, everything else passes through."""
    if not isinstance(params, dict):
        raise ConfigError(f"{where}: expected an object")
    out = {}
    for key, value in params.items():
        if isinstance(value, str) and key not in ("kind",):
            try:
                value = float(Fraction(value))
            except ValueError:
                pass
        out[key] = value
    return out


def _int(value, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}: must be at least {minimum}, got {value}")
    return value


def parse_config(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    grid = data.get("grid")
    if not isinstance(grid, dict):
        raise ConfigError("grid: missing or not an object")
    try:
        spec = GridSpec(
            _int(grid.get("n", 1), "grid.n"),
            _int(grid.get("p", 2), "grid.p"),
            _int(grid.get("extent_space"), "grid.extent_space", 1),
            _int(grid.get("extent_time", grid.get("extent_space")), "grid.extent_time", 1),
            grid.get("boundary", "periodic"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None
    try:
        gamma = TimeLag(Fraction(str(data.get("gamma", "1/2"))))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"gamma: {exc}") from None
    alpha = _number(data.get("alpha", "1/4"), "alpha")
    if not 0 <= alpha < 1:
        raise ConfigError(f"alpha: must lie in [0, 1), got {alpha}")
    pairs = [parse_pair(p, f"pairs[{i}]") for i, p in enumerate(data.get("pairs", [["2", "2"]]))]

    weights = []
    for i, w in enumerate(data.get("weights", [{"name": "unit", "kind": "constant"}])):
        where = f"weights[{i}]"
        if not isinstance(w, dict) or "kind" not in w:
            raise ConfigError(f"{where}: expected an object with a kind")
        if w["kind"] not in WEIGHT_KINDS:
            raise ConfigError(f"{where}.kind: unknown weight kind {w['kind']!r}")
        weights.append((str(w.get("name", f"w{i}")), w["kind"], parse_params(w.get("params", {}), where + ".params")))

    sym = data.get("symbol", {"kind": "smooth", "params": {"seed": 1}})
    if not isinstance(sym, dict) or "kind" not in sym:
        raise ConfigError("symbol: expected an object with a kind")
    symbol = (sym["kind"], parse_params(sym.get("params", {}), "symbol.params"))
    functions = []
    for i, fdef in enumerate(data.get("functions", [{"kind": "noise", "params": {"seed": 1}}])):
        if not isinstance(fdef, dict) or "kind" not in fdef:
            raise ConfigError(f"functions[{i}]: expected an object with a kind")
        functions.append((fdef["kind"], parse_params(fdef.get("params", {}), f"functions[{i}].params")))

    if "seed" not in data:
        raise ConfigError("seed: a seed is required for the randomized probe families")
    seed = _int(data["seed"], "seed", 0)
    engine = data.get("engine", "fast")
    if engine not in ("fast", "naive", "both"):
        raise ConfigError(f"engine: expected fast, naive or both, got {engine!r}")
    budget = _int(data.get("probe_budget", 48), "probe_budget", 1)
    K = [_int(k, f"iteration.K[{i}]", 0) for i, k in enumerate(data.get("iteration", {}).get("K", [0, 2, 6]))]

    contour = dict(data.get("contour", {}))
    if "radius" in contour and contour["radius"] is not None:
        contour["radius"] = _number(contour["radius"], "contour.radius")

    transfer = dict(data.get("transfer", {}))
    if transfer:
        src = parse_pair(transfer.get("source", ["2", "2"]), "transfer.source")
        _check_gaps(transfer.get("targets", []), src, "transfer.targets")
        # extrapolation at infinity starts from (r0, inf) and has its own targets
        at_inf = transfer.get("at_infinity", {})
        _check_gaps(at_inf.get("targets", []), ExponentPair(src.r, INF), "transfer.at_infinity.targets")

    return ScenarioConfig(
        grid=spec, gamma=gamma, alpha=alpha, pairs=pairs, weights=weights, symbol=symbol,
        functions=functions, seed=seed, engine=engine, probe_budget=budget, iteration_K=K,
        contour=contour, operator=dict(data.get("operator", {})), transfer=transfer,
        characterize=dict(data.get("characterize", {})), bench=dict(data.get("bench", {})),
        out_dir=str(data.get("outputs", {}).get("dir", "parex-out")), raw=data,
    )


def load_config(path: str | Path | None = None) -> ScenarioConfig:
    """Read and validate a config file; ``None`` loads the bundled default."""
    if path is None:
        text = resources.files("parex").joinpath("data/default.json").read_text()
        where = "default.json"
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from None
        where = str(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(data)
