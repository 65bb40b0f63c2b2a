"""Command-line harness.

Exit codes: 0 success, 2 invalid configuration, 3 a checked claim failed.
Tables go to ``--output`` (or stdout); the one-line summary goes to stdout
when a file is written and to stderr otherwise, so piped CSV stays clean.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .adversary import AdversaryParams, check_structure, run_construction
from .algorithms import FLEET, make_algorithm
from .cohort import run_cohort_construction
from .errors import (BadInitialization, BudgetExceeded, ConfigError, DomainError,
                     InfeasibleDecision, NonInvertible, StructureViolation, UnknownEdge)
from .frecursion import FParams, NEGATIVE_THRESHOLD, f_sequence, find_negative_n, grids_csv
from .frontier import build_frontier, compute_gamma_star, gamma_objective, verify_fact_tz
from .oracle import OfflineGraph, max_matching, minimax_value
from .verify import CLAIMS, DEFAULT_CLAIMS, EXPLICIT_LIMIT, SuiteConfig, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_CLAIM = 0, 2, 3


@dataclass
class RunConfig:
    command: str
    eps: float | None = None
    gamma: float | None = None
    grid_step: float = 1e-3
    n: int | None = None
    n_max: int = 40
    N: int | None = None
    algorithm: str = "tz"
    output: str | None = None
    format: str = "csv"

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> RunConfig:
        fields = cls.__dataclass_fields__
        cfg = cls(**{k: v for k, v in vars(ns).items() if k in fields and v is not None})
        if cfg.n is not None and cfg.n < 1:
            raise ConfigError("--n must be >= 1")
        if cfg.n_max < 1:
            raise ConfigError("--n-max must be >= 1")
        return cfg

    def fparams(self, eps: float, gamma: float) -> FParams:
        return FParams(self.eps if self.eps is not None else eps,
                       self.gamma if self.gamma is not None else gamma, self.grid_step)


def _fmt(v) -> str:
    return f"{v:.12g}" if isinstance(v, float) else str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([_fmt(v) for v in row] for row in rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


class _Out:
    def __init__(self, path: str | None):
        self.path = path

    def data(self, text: str):
        if self.path:
            Path(self.path).write_text(text)
        else:
            sys.stdout.write(text)

    def summary(self, line: str):
        print(line, file=sys.stdout if self.path else sys.stderr)


def cmd_gamma_star(ns, cfg: RunConfig) -> int:
    out = _Out(cfg.output)
    k, g = compute_gamma_star(ns.tol)
    if cfg.format == "json":
        out.data(_json({"k_star": k, "gamma_star": g, "tol": ns.tol}))
    else:
        out.data(_csv(["k_star", "gamma_star"], [(k, g)]))
    if ns.curve or ns.figure:
        ks = np.linspace(1.0, 4.0, 601)
        vals = np.array([gamma_objective(float(v)) for v in ks])
        if ns.curve:
            Path(ns.curve).write_text(_csv(["k", "gamma"], zip(ks.tolist(), vals.tolist())))
        if ns.figure:
            from .plotting import objective_figure
            objective_figure(ks, vals, k, g, ns.figure)
    out.summary(f"k*={k:.6f} gamma*={g:.6f}")
    return EXIT_OK


def cmd_f_table(ns, cfg: RunConfig) -> int:
    fp = cfg.fparams(0.5, 0.6)
    n = cfg.n or 2
    grids = f_sequence(fp, n)
    out = _Out(cfg.output)
    if cfg.format == "json":
        out.data(_json({"eps": fp.eps, "gamma": fp.gamma, "grid_step": fp.grid_step,
                        "x": fp.x.tolist(),
                        "F": {str(g.n): g.values.tolist() for g in grids}}))
    else:
        out.data(grids_csv(grids))
    if ns.figure:
        from .plotting import f_grids_figure
        f_grids_figure(grids, ns.figure)
    f0 = float(grids[-1].values[0])
    flag = " NEGATIVE" if f0 < NEGATIVE_THRESHOLD else ""
    out.summary(f"F_{n}(0)={f0:.12g}{flag}")
    return EXIT_OK


def cmd_find_n(ns, cfg: RunConfig) -> int:
    gamma = cfg.gamma
    if gamma is None:
        gamma = compute_gamma_star(1e-6)[1] + 0.05
    fp = FParams(cfg.eps if cfg.eps is not None else 0.1, gamma, cfg.grid_step)
    found = find_negative_n(fp, cfg.n_max)
    out = _Out(cfg.output)
    row = {"eps": fp.eps, "gamma": fp.gamma, "grid_step": fp.grid_step, "n_max": cfg.n_max,
           "found": found is not None, "n": found[0] if found else None,
           "F_n0": found[1] if found else None}
    if cfg.format == "json":
        out.data(_json(row))
    else:
        out.data(_csv(list(row), [["" if v is None else v for v in row.values()]]))
    out.summary(f"n={found[0]} F_n(0)={found[1]:.12g}" if found
                else f"F_n(0) >= 0 for all n <= {cfg.n_max}")
    return EXIT_OK


def cmd_duel(ns, cfg: RunConfig) -> int:
    fp = cfg.fparams(0.5, 0.6)
    n = cfg.n or 2
    N = cfg.N if cfg.N is not None else fp.inv_eps ** n
    params = AdversaryParams(n, N, ns.x0, fp)
    alg = make_algorithm(cfg.algorithm, init=ns.init)
    engine = ns.engine
    if engine == "auto":
        engine = "explicit" if N <= EXPLICIT_LIMIT else "cohort"
    out = _Out(cfg.output)
    if engine == "explicit":
        tr, state = run_construction(params, alg, serialize=ns.serialize)
        check_structure(tr, state)
        matching = max_matching(OfflineGraph.from_run(tr, state))
        if matching != tr.opt_size:
            raise StructureViolation("perfect-matching",
                                     f"offline matching {matching} != {tr.opt_size}")
        result, payload = tr, tr.to_dict()
        levels = [state.x[v] for v in range(len(state))]
        counts = [1] * len(levels)
    else:
        if ns.serialize:
            raise ConfigError("--serialize needs the explicit engine")
        result = run_cohort_construction(params, alg)
        payload = result.to_dict()
        levels, counts = [], []
    if cfg.format == "json":
        out.data(_json(payload))
    else:
        cols = ["partition", "steps_remaining", "size_a", "size_b", "x_before", "x_after", "a",
                "branch", "a_snapped", "expr_aggressive", "expr_conservative", "new_partition"]
        out.data(_csv(cols, ([("" if v is None else v) for v in
                              (getattr(s, c) for c in cols)] for s in result.steps)))
    if ns.figure and levels:
        from .plotting import levels_figure
        levels_figure(levels, counts, ns.figure, f"{cfg.algorithm}, n={n}, N={N}")
    out.summary(f"algorithm={cfg.algorithm} engine={engine} ALG={result.alg_total:.12g} "
                f"OPT={result.opt_size} ratio={result.ratio:.12g} v_alg={result.v_alg:.12g} "
                f"bound={result.bound:.12g}")
    return EXIT_OK


def _split(value: str | None) -> list[str] | None:
    return None if value is None else [v.strip() for v in value.split(",") if v.strip()]


def cmd_verify(ns, cfg: RunConfig) -> int:
    claims = _split(ns.claims)
    if claims is None:
        claims = list(DEFAULT_CLAIMS)
    elif claims == ["all"]:
        claims = list(CLAIMS)
    suite = SuiteConfig(grid_step=cfg.grid_step)
    if cfg.eps is not None:
        suite.eps_values = (cfg.eps,)
    if cfg.gamma is not None:
        suite.gamma_values = (cfg.gamma,)
    if cfg.n is not None:
        suite.n_claims = suite.n_duel = cfg.n
    if ns.algorithm is not None:
        suite.fleet = tuple(_split(ns.algorithm))
    for v in suite.eps_values:
        for g in suite.gamma_values:
            FParams(v, g, cfg.grid_step)
    try:
        results = run_suite(claims, suite)
    except (InfeasibleDecision, UnknownEdge, StructureViolation) as exc:
        print(f"claim failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CLAIM
    out = _Out(cfg.output)
    if cfg.format == "json":
        out.data(_json({"claims": [r.to_dict() for r in results],
                        "passed": all(r.passed for r in results)}))
    else:
        out.data(_csv(["claim", "passed", "measured", "threshold", "detail"],
                      [(r.name, r.passed, r.measured, r.threshold, r.detail) for r in results]))
    for r in results:
        out.summary(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_CLAIM


def cmd_crosscheck(ns, cfg: RunConfig) -> int:
    fp = cfg.fparams(0.5, 0.6)
    n = cfg.n or 2
    step = ns.action_step if ns.action_step is not None else fp.grid_step
    game = minimax_value(fp.eps, fp.gamma, n, step)
    grid = float(f_sequence(fp, n)[-1].values[0])
    diff = game - grid
    matched = n <= 2 and abs(step - fp.grid_step) <= 1e-15
    # beyond n = 2 the game is exact off-grid while the table interpolates
    tol = ns.tol if ns.tol is not None else (1e-12 if matched else 2 * fp.grid_step)
    ok = abs(diff) <= tol if matched else diff <= tol
    out = _Out(cfg.output)
    row = {"eps": fp.eps, "gamma": fp.gamma, "n": n, "action_step": step,
           "minimax": game, "grid_F_n0": grid, "difference": diff, "passed": ok}
    if cfg.format == "json":
        out.data(_json(row))
    else:
        out.data(_csv(list(row), [list(row.values())]))
    out.summary(f"minimax={game:.12g} F_{n}(0)={grid:.12g} diff={diff:.3g} "
                f"{'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CLAIM


def cmd_frontier_export(ns, cfg: RunConfig) -> int:
    k_star, g_star = compute_gamma_star(1e-6)
    gamma = cfg.gamma if cfg.gamma is not None else g_star
    k = ns.k if ns.k is not None else k_star
    step = ns.grid_step if ns.grid_step is not None else 1e-4
    f = build_frontier(gamma, k, step)
    rep = verify_fact_tz(f)
    out = _Out(cfg.output)
    h_csv, x_csv = f.tables_csv()
    if cfg.format == "json":
        c = f.constants
        out.data(_json({"constants": {"gamma": c.gamma, "k": c.k, "r1": c.r1, "r2": c.r2,
                                      "alpha1": c.alpha1, "alpha2": c.alpha2, "c": c.c},
                        "y": f.y.tolist(), "H": f.H.tolist(), "x": f.x.tolist(),
                        "G": f.G.tolist(), "g": f.g.tolist(), "a": f.a.tolist(),
                        "fact": rep._asdict()}))
    else:
        out.data(x_csv)
    if ns.h_output:
        Path(ns.h_output).write_text(h_csv)
    if ns.figure:
        from .plotting import frontier_figure
        frontier_figure(f, ns.figure)
    out.summary(f"gamma={gamma:.12g} k={k:.12g} certified={rep.certified_gamma:.12g} "
                f"violation1={rep.max_violation_1:.3g} violation2={rep.max_violation_2:.3g}")
    return EXIT_OK


COMMANDS = {
    "gamma-star": cmd_gamma_star,
    "f-table": cmd_f_table,
    "find-n": cmd_find_n,
    "duel": cmd_duel,
    "verify": cmd_verify,
    "crosscheck": cmd_crosscheck,
    "frontier-export": cmd_frontier_export,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", type=float, help="1/eps must be an integer")
    common.add_argument("--gamma", type=float)
    common.add_argument("--grid-step", type=float, help="x and a grid spacing (default 1e-3)")
    common.add_argument("--n", type=int, help="recursion depth / construction steps")
    common.add_argument("--n-max", type=int)
    common.add_argument("--N", type=int, help="initial vertices (default (1/eps)^n)")
    common.add_argument("--output", help="write the table here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--figure", help="also render a figure (.png, .svg or .pdf)")
    common.add_argument("--seed", type=int, help="accepted for compatibility; runs are deterministic")

    p = argparse.ArgumentParser(prog="matchbound", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gamma-star", parents=[common], help="optimal ratio and its k")
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--curve", help="CSV of the objective over k in [1, 4]")

    sub.add_parser("f-table", parents=[common], help="tabulate F_1 .. F_n")

    sub.add_parser("find-n", parents=[common], help="first n with F_n(0) < 0")

    s = sub.add_parser("duel", parents=[common], help="run the construction against an algorithm")
    s.add_argument("--algorithm", default="tz", help=f"one of {', '.join(FLEET)} (or fixed:c, evensplit:a)")
    s.add_argument("--x0", type=float, default=0.0, help="initial average portion")
    s.add_argument("--init", choices=("uniform", "skew"), default="uniform")
    s.add_argument("--serialize", action="store_true", help="present batches one vertex at a time")
    s.add_argument("--engine", choices=("auto", "explicit", "cohort"), default="auto")

    s = sub.add_parser("verify", parents=[common], help="run the claim suite")
    s.add_argument("--claims", help=f"comma list from {', '.join(CLAIMS)}, or 'all'")
    s.add_argument("--algorithm", help="comma list restricting the duel fleet")

    s = sub.add_parser("crosscheck", parents=[common], help="minimax game against the grid F_n(0)")
    s.add_argument("--action-step", type=float)
    s.add_argument("--tol", type=float)

    s = sub.add_parser("frontier-export", parents=[common], help="H, G, g, a tables")
    s.add_argument("--k", type=float, help="stretch parameter (default k*)")
    s.add_argument("--h-output", help="CSV path for the (y, H) table")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_namespace(ns)
        return COMMANDS[ns.command](ns, cfg)
    except (ConfigError, DomainError, BadInitialization, BudgetExceeded, NonInvertible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleDecision, UnknownEdge, StructureViolation) as exc:
        print(f"claim failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CLAIM


if __name__ == "__main__":
    sys.exit(main())
