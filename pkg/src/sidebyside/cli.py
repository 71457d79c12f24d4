"""Command-line entry point: ``sbs <command> --config run.json --out DIR``.

Config schema (JSON)::

    {
      "v": 1.0,
      "Q":  {"family": "power", "k": 1, "c": 1},
      "N1": {"family": "lognormal", "sigma": 0.3},
      "N2": {"family": "lognormal", "sigma": 0.3},
      "mode": "standard",                       # or "counterexample"
      "solver": {"tol": 1e-9, "max_iter": 10000},
      "start": 0.0,                             # b2[0] for solve / iterate
      "starts": [0.0, 0.5, 1.0],                # probe
      "simulation": {"n": 1000000, "seed": 0, "shards": 1, "bids": [b1, b2]},
      "br_curve": {"bidder": 1, "points": 50},
      "resolution": 1e-4                        # counterexample scan spacing
    }

Only ``v``, ``Q``, ``N1`` and ``N2`` are required (and none of them for the
``counterexample`` command).  Distribution families: ``power`` (k, c),
``exponential`` (rate), ``lognormal`` (sigma), ``capped_linear``.

Outputs written to ``--out``:

=============== =======================================================
solve           equilibrium.json
iterate         trace.csv (``k,b1,b2``)
probe           probe.json
extremal        extremal.json
counterexample  counterexample.json, br_curve.csv (``b_opp,br``)
validate        simstats.json
br-curve        br_curve.csv (``b_opp,br``)
=============== =======================================================

A one-line JSON summary goes to stdout.  Failures exit with status 1 and a
JSON object ``{"error": ..., "message": ..., "key": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import counterexample as cx
from .best_response import best_response
from .distributions import from_dict
from .dynamics import DEFAULT_MAX_ITER, DEFAULT_TOL, equilibrium, extremal_equilibria, iterate, uniqueness_probe
from .errors import ConfigError, SideBySideError
from .montecarlo import simulate_auctions
from .payoff import MODES, STANDARD, MarketConfig

logger = logging.getLogger("sidebyside")

COMMANDS = ("solve", "iterate", "probe", "extremal", "counterexample", "validate", "br-curve")

_TOP_KEYS = {"v", "Q", "N1", "N2", "mode", "solver", "start", "starts", "simulation", "br_curve", "resolution"}


@dataclass
class RunConfig:
    market: Optional[MarketConfig]
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    start: float = 0.0
    starts: Optional[list[float]] = None
    n: int = 1_000_000
    seed: int = 0
    shards: int = 1
    bids: Optional[list[float]] = None
    br_bidder: int = 1
    br_points: int = 50
    resolution: float = cx.DEFAULT_RESOLUTION
    v: float = 1.0
    mode: str = STANDARD

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.market is not None:
            out.update(self.market.to_dict())
        else:
            out.update({"v": self.v, "mode": self.mode})
        out["solver"] = {"tol": self.tol, "max_iter": self.max_iter}
        out["start"] = self.start
        if self.starts is not None:
            out["starts"] = list(self.starts)
        sim: dict[str, Any] = {"n": self.n, "seed": self.seed, "shards": self.shards}
        if self.bids is not None:
            sim["bids"] = list(self.bids)
        out["simulation"] = sim
        out["br_curve"] = {"bidder": self.br_bidder, "points": self.br_points}
        out["resolution"] = self.resolution
        return out


def _number(obj: dict, key: str, default=None, *, integer: bool = False, positive: bool = False):
    if key not in obj:
        if default is None:
            raise ConfigError(key, "missing required key")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(key, "must be a number")
    if integer and not float(val).is_integer():
        raise ConfigError(key, "must be an integer")
    if not math.isfinite(val) or (positive and val <= 0):
        raise ConfigError(key, "must be finite" + (" and positive" if positive else ""))
    return int(val) if integer else float(val)


def _section(obj: dict, key: str) -> dict:
    val = obj.get(key, {})
    if not isinstance(val, dict):
        raise ConfigError(key, "must be an object")
    return val


def _dist(obj: dict, key: str):
    if key not in obj:
        raise ConfigError(key, "missing required key")
    try:
        return from_dict(obj[key])
    except ConfigError as exc:
        raise ConfigError(f"{key}.{exc.key}", str(exc).split(": ", 1)[-1]) from exc


def parse_config(text: str, *, require_market: bool = True) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Standard-mode assumption checks run while building the market, so a
    violation surfaces here under its own error name.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("<document>", "top level must be an object")
    unknown = sorted(set(raw) - _TOP_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")

    mode = raw.get("mode", STANDARD)
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {list(MODES)}")

    market = None
    v = _number(raw, "v", 1.0 if not require_market else None, positive=True)
    if require_market or any(k in raw for k in ("Q", "N1", "N2")):
        Q, N1, N2 = _dist(raw, "Q"), _dist(raw, "N1"), _dist(raw, "N2")
        market = MarketConfig(v, Q, N1, N2, mode=mode)

    solver = _section(raw, "solver")
    sim = _section(raw, "simulation")
    curve = _section(raw, "br_curve")
    cfg = RunConfig(
        market=market,
        tol=_number(solver, "tol", DEFAULT_TOL, positive=True),
        max_iter=_number(solver, "max_iter", DEFAULT_MAX_ITER, integer=True, positive=True),
        start=_number(raw, "start", 0.0),
        n=_number(sim, "n", 1_000_000, integer=True, positive=True),
        seed=_number(sim, "seed", 0, integer=True),
        shards=_number(sim, "shards", 1, integer=True, positive=True),
        br_bidder=_number(curve, "bidder", 1, integer=True, positive=True),
        br_points=_number(curve, "points", 50, integer=True, positive=True),
        resolution=_number(raw, "resolution", cx.DEFAULT_RESOLUTION, positive=True),
        v=v,
        mode=mode,
    )
    if "starts" in raw:
        cfg.starts = _float_list(raw["starts"], "starts")
    if "bids" in sim:
        cfg.bids = _float_list(sim["bids"], "simulation.bids")
        if len(cfg.bids) != 2:
            raise ConfigError("simulation.bids", "must hold exactly two bids")
    if cfg.br_bidder not in (1, 2):
        raise ConfigError("br_curve.bidder", "must be 1 or 2")
    return cfg


def _float_list(val, key: str) -> list[float]:
    if not isinstance(val, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in val
    ):
        raise ConfigError(key, "must be a list of numbers")
    return [float(x) for x in val]


def _clean(obj):
    """Replace non-finite floats by ``None`` so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])


def dispatch(command: str, cfg: RunConfig, out_dir: Path) -> dict:
    """Run one command, write its files into ``out_dir``, return a summary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    market = cfg.market
    if command != "counterexample" and market is None:
        raise ConfigError("Q", "command needs a market (v, Q, N1, N2)")

    if command == "solve":
        report = equilibrium(market, cfg.start, cfg.tol, cfg.max_iter)
        body = report.to_dict()
        _write_json(out_dir / "equilibrium.json", body)
        return {"command": command, "file": "equilibrium.json", **body}

    if command == "iterate":
        trace = iterate(market, cfg.start, cfg.tol, cfg.max_iter)
        (out_dir / "trace.csv").write_text(trace.to_csv(), encoding="utf-8")
        return {
            "command": command,
            "file": "trace.csv",
            "iterations": trace.iterations,
            "direction": trace.direction,
            "stop_reason": trace.stop_reason,
        }

    if command == "probe":
        starts = cfg.starts if cfg.starts is not None else [market.v * j / 4 for j in range(5)]
        report = uniqueness_probe(market, starts, cfg.tol, cfg.max_iter)
        body = report.to_dict()
        _write_json(out_dir / "probe.json", body)
        return {"command": command, "file": "probe.json", "max_spread": body["max_spread"], "pass": body["pass"]}

    if command == "extremal":
        body = extremal_equilibria(market, cfg.tol, cfg.max_iter).to_dict()
        _write_json(out_dir / "extremal.json", body)
        return {"command": command, "file": "extremal.json", **body}

    if command == "counterexample":
        v = market.v if market is not None else cfg.v
        interval = cx.equilibrium_interval(v, cfg.resolution)
        body = {"v": v, "interval": interval.to_dict()}
        _write_json(out_dir / "counterexample.json", body)
        _write_csv(out_dir / "br_curve.csv", ["b_opp", "br"], cx.br_curve(v))
        return {"command": command, "files": ["counterexample.json", "br_curve.csv"], **body}

    if command == "validate":
        if cfg.bids is not None:
            b1, b2 = cfg.bids
        else:
            report = equilibrium(market, cfg.start, cfg.tol, cfg.max_iter)
            b1, b2 = report.b1_star, report.b2_star
        stats = simulate_auctions(market, b1, b2, cfg.n, cfg.seed, cfg.shards)
        body = stats.to_dict()
        _write_json(out_dir / "simstats.json", body)
        return {"command": command, "file": "simstats.json", **body}

    if command == "br-curve":
        grid = market.v * np.arange(1, cfg.br_points + 1) / cfg.br_points
        rows = [(float(b), best_response(market, cfg.br_bidder, float(b)).bid) for b in grid]
        _write_csv(out_dir / "br_curve.csv", ["b_opp", "br"], rows)
        return {"command": command, "file": "br_curve.csv", "points": len(rows)}

    raise ConfigError("command", f"unknown command {command!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbs", description="Side-by-side first-price bidding equilibria.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="JSON run configuration")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    parser.add_argument("--seed", type=int, help="override simulation.seed")
    parser.add_argument("--n", type=int, help="override simulation.n")
    parser.add_argument("--shards", type=int, help="override simulation.shards")
    parser.add_argument("--start", type=float, help="override start (b2 at step 0)")
    parser.add_argument("--starts", type=str, help="comma-separated starts for probe, e.g. 0,0.5,1")
    return parser


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> None:
    if args.seed is not None:
        cfg.seed = args.seed
    if args.n is not None:
        cfg.n = args.n
    if args.shards is not None:
        cfg.shards = args.shards
    if args.start is not None:
        cfg.start = args.start
    if args.starts is not None:
        try:
            cfg.starts = [float(x) for x in args.starts.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError("--starts", "must be comma-separated numbers") from exc


def main(argv: Optional[list[str]] = None) -> int:
    level = os.environ.get("SBS_LOG", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.command != "counterexample":
                raise ConfigError("--config", "required for this command")
            cfg = RunConfig(market=None)
        else:
            text = args.config.read_text(encoding="utf-8")
            cfg = parse_config(text, require_market=args.command != "counterexample")
        _apply_overrides(cfg, args)
        summary = dispatch(args.command, cfg, args.out)
    except SideBySideError as exc:
        err = {"error": exc.code, "message": str(exc)}
        if isinstance(exc, ConfigError):
            err["key"] = exc.key
        print(json.dumps(err), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    print(json.dumps(_clean(summary), sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
