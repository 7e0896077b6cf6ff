"""Command-line front end.

Subcommands: ``scan``, ``threshold``, ``monogamy``, ``counterexample``,
``bellmax``. Every command writes a table (CSV with header, or JSON array of
objects) to ``--out`` or stdout. Exit codes: 0 success, 2 invalid
configuration, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bell import SeesawOptions, classify_violation, mk_cap, mk_maximize, monogamy_pair
from .linalg import NumericalError
from .protocol import Scenario, counterexample_scan, find_threshold, security_bell_table
from .states import parse_state_spec, random_density_matrix, random_pure_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    state: str | None = None
    N: int = 2
    h: int = 1
    phi_range: tuple[float, float, int] = (0.0, math.pi / 2, 9)
    alphas: tuple[float, ...] = (0.955,)
    restarts: int = 50
    seed: int = 0
    tol: float = 1e-6
    max_iters: int = 500
    trials: int = 1000
    out: str | None = None
    format: str = "csv"

    def validate(self) -> None:
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        lo, hi, steps = self.phi_range
        if steps < 1:
            raise ConfigError("--steps must be at least 1")
        if lo > hi:
            raise ConfigError("phi range is empty")
        if not self.alphas:
            raise ConfigError("alpha range is empty")
        if self.restarts < 1 or self.trials < 1 or self.max_iters < 1:
            raise ConfigError("restarts, trials and max-iters must be positive")
        if not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if self.command in ("scan", "threshold"):
            if not 2 <= self.N <= 6:
                raise ConfigError(f"--n must be in [2, 6], got {self.N}")
            if not 1 <= self.h <= self.N - 1:
                raise ConfigError(f"--h must be in [1, N-1], got {self.h}")

    @property
    def seesaw(self) -> SeesawOptions:
        return SeesawOptions(restarts=self.restarts, max_iters=self.max_iters, seed=self.seed)

    def phi_grid(self) -> list[float]:
        lo, hi, steps = self.phi_range
        if steps == 1:
            return [lo]
        return [float(x) for x in np.linspace(lo, hi, steps)]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(rows: Sequence[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: _jsonable(v) for k, v in r.items()} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for r in rows:
            w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def emit(rows: Sequence[dict], cfg: RunConfig) -> None:
    text = render(rows, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_scan(cfg: RunConfig) -> list[dict]:
    try:
        scenario = Scenario.from_counts(cfg.N, cfg.h)
        scenario.honest(cfg.N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    lo, hi, _ = cfg.phi_range
    if lo < 0 or hi > math.pi / 2 + 1e-12:
        raise ConfigError("phi range must lie inside [0, pi/2]")
    table = security_bell_table(cfg.N, scenario, cfg.phi_grid(), cfg.seesaw)
    return [r.row() for r in table]


def cmd_threshold(cfg: RunConfig) -> list[dict]:
    try:
        scenario = Scenario.from_counts(cfg.N, cfg.h)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    phi = find_threshold(cfg.N, scenario, cfg.tol)
    return [{"N": cfg.N, "h": cfg.h, "scenario": scenario.kind, "phi_star": phi}]


def cmd_monogamy(cfg: RunConfig) -> list[dict]:
    """Random three-qubit states, alternately pure and mixed; reports the largest S_AB + S_AC."""
    best = (-1.0, 0.0, 0.0)
    for t in range(cfg.trials):
        rng = np.random.default_rng([cfg.seed, t])
        rho = random_pure_state(3, rng) if t % 2 == 0 else random_density_matrix(3, rng)
        s_ab, s_ac = monogamy_pair(rho)
        if s_ab + s_ac > best[0]:
            best = (s_ab + s_ac, s_ab, s_ac)
    return [
        {
            "trials": cfg.trials,
            "seed": cfg.seed,
            "max_sum": best[0],
            "S_AB": best[1],
            "S_AC": best[2],
            "within_bound": best[0] <= 4 + 1e-9,
        }
    ]


def cmd_counterexample(cfg: RunConfig) -> list[dict]:
    return [r.row() for r in counterexample_scan(cfg.alphas, cfg.seesaw)]


def cmd_bellmax(cfg: RunConfig) -> list[dict]:
    if not cfg.state:
        raise ConfigError("bellmax needs --state")
    try:
        state = parse_state_spec(cfg.state)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    if not 2 <= state.num_qubits <= 6:
        raise ConfigError("bellmax supports 2 to 6 qubits")
    res = mk_maximize(state, cfg.seesaw)
    M = state.num_qubits
    cls = classify_violation(res.value, M)
    return [
        {
            "state": cfg.state,
            "M": M,
            "S": res.value,
            "quantum_max": mk_cap(M),
            "genuine_bound": cls.genuine_bound,
            "classification": cls.classification,
            "converged": res.converged,
            "sweeps": res.iterations,
        }
    ]


COMMANDS = {
    "scan": cmd_scan,
    "threshold": cmd_threshold,
    "monogamy": cmd_monogamy,
    "counterexample": cmd_counterexample,
    "bellmax": cmd_bellmax,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--restarts", type=int, default=50)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-6, help="threshold bisection tolerance")
    common.add_argument("--max-iters", type=int, default=500, help="see-saw sweeps per restart")

    parser = _Parser(prog="qssbell", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("scan", parents=[common], help="informations and MK values along phi")
    p.add_argument("--n", type=int, default=2, help="number of partners N")
    p.add_argument("--h", type=int, default=None, help="honest partners (default N-1)")
    p.add_argument("--phi-min", type=float, default=0.0)
    p.add_argument("--phi-max", type=float, default=math.pi / 2)
    p.add_argument("--steps", type=int, default=9)

    p = sub.add_parser("threshold", parents=[common], help="attack strength where I_a = I_u")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--h", type=int, default=None)

    p = sub.add_parser("monogamy", parents=[common], help="random-state check of S_AB + S_AC <= 4")
    p.add_argument("--trials", type=int, default=1000)

    p = sub.add_parser("counterexample", parents=[common], help="MK values of the four-qubit counterexample")
    p.add_argument("--alpha", type=float, action="append", help="repeatable; default 0.955")
    p.add_argument("--alpha-min", type=float)
    p.add_argument("--alpha-max", type=float)
    p.add_argument("--steps", type=int, default=11)

    p = sub.add_parser("bellmax", parents=[common], help="maximal MK value of a state")
    p.add_argument("--state", required=True, help="epr | ghz:M | attack:N=..,h=..,phi=.. | counterexample:alpha=.. | file:PATH")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        command=ns.command,
        restarts=ns.restarts,
        seed=ns.seed,
        tol=ns.tol,
        max_iters=ns.max_iters,
        out=ns.out,
        format=ns.format,
    )
    if ns.command in ("scan", "threshold"):
        cfg.N = ns.n
        cfg.h = ns.n - 1 if ns.h is None else ns.h
    if ns.command == "scan":
        cfg.phi_range = (ns.phi_min, ns.phi_max, ns.steps)
    if ns.command == "monogamy":
        cfg.trials = ns.trials
    if ns.command == "counterexample":
        alphas = list(ns.alpha or [])
        if ns.alpha_min is not None or ns.alpha_max is not None:
            if ns.alpha_min is None or ns.alpha_max is None:
                raise ConfigError("--alpha-min and --alpha-max go together")
            if ns.steps < 1 or ns.alpha_min > ns.alpha_max:
                raise ConfigError("alpha range is empty")
            grid = [ns.alpha_min] if ns.steps == 1 else np.linspace(ns.alpha_min, ns.alpha_max, ns.steps)
            alphas.extend(float(a) for a in grid)
        cfg.alphas = tuple(alphas) if alphas else (0.955,)
    if ns.command == "bellmax":
        cfg.state = ns.state
    cfg.validate()
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        rows = COMMANDS[cfg.command](cfg)
        emit(rows, cfg)
    except ValueError as exc:
        # ConfigError and every input-validation error of the library
        print(f"qssbell: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"qssbell: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
