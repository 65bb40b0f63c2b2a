"""Numerical claim suite shared by the ``verify`` subcommand and the tests.

Each claim yields a :class:`ClaimResult` with the measured quantity, the
threshold it is compared against and a pass flag.  Duels fan out over a
thread pool whose width is capped by ``MATCHBOUND_THREADS``; results are
always reported in a fixed order.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .adversary import AdversaryParams, check_structure, run_construction
from .algorithms import FLEET, make_algorithm
from .cohort import run_cohort_construction
from .errors import ConfigError, MatchboundError
from .frecursion import FParams, certify_claims, f_grid, f_sequence, find_negative_n
from .frontier import (FrontierConstants, build_frontier, compute_gamma_star, h_closed_form,
                       h_fixed_point, verify_fact_tz)
from .oracle import OfflineGraph, f2_exact, max_matching, minimax_value
from .toy import sweep

CLAIMS = ("gamma-star", "frontier", "h-identity", "f-values", "monotone", "concave",
          "lipschitz", "bound", "structure", "tz-ratio", "toy", "minimax", "impossibility")
# the impossibility run takes tens of seconds; ask for it explicitly
DEFAULT_CLAIMS = CLAIMS[:-1]
EXPLICIT_LIMIT = 200_000


def thread_count() -> int:
    raw = os.environ.get("MATCHBOUND_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"MATCHBOUND_THREADS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError("MATCHBOUND_THREADS must be >= 1")
    return value


def parallel_map(fn, items) -> list:
    items = list(items)
    workers = min(thread_count(), max(len(items), 1))
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class ClaimResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"{tag} {self.name}: measured={self.measured:.12g} "
                f"threshold={self.threshold:.12g} {self.detail}").rstrip()

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "measured": self.measured,
                "threshold": self.threshold, "detail": self.detail}


@dataclass
class SuiteConfig:
    eps_values: tuple[float, ...] = (0.5, 0.25)
    gamma_values: tuple[float, ...] = (0.55, 0.6, 0.9)
    n_claims: int = 5
    n_duel: int = 3
    x0_values: tuple[float, ...] = (0.0, 0.5)
    init: str = "skew"
    fleet: tuple[str, ...] = FLEET
    grid_step: float = 1e-3
    impossibility_eps: float = 0.1
    impossibility_gamma: float = 0.6
    impossibility_n_max: int = 40


@dataclass
class DuelOutcome:
    eps: float
    gamma: float
    n: int
    x0: float
    algorithm: str
    N: int
    v_alg: float
    bound: float
    alg_total: float
    opt_size: int
    ratio: float
    structure_error: str = ""
    matching: int = -1
    vertices: int = 0
    pairs: int = 0

    @property
    def slack(self) -> float:
        """(v_alg - F_n(x0) N) / N."""
        return (self.v_alg - self.bound) / self.N


def duel(fp: FParams, n: int, x0: float, name: str, init: str = "skew") -> DuelOutcome:
    params = AdversaryParams.minimal(n, fp, x0)
    tr, state = run_construction(params, make_algorithm(name, init=init))
    out = DuelOutcome(fp.eps, fp.gamma, n, x0, name, params.N, tr.v_alg, tr.bound,
                      tr.alg_total, tr.opt_size, tr.ratio, vertices=len(state),
                      pairs=len(tr.deactivations))
    try:
        check_structure(tr, state)
    except MatchboundError as exc:
        out.structure_error = str(exc)
    out.matching = max_matching(OfflineGraph.from_run(tr, state))
    return out


def duel_grid(cfg: SuiteConfig) -> list[DuelOutcome]:
    jobs = [(FParams(e, g, cfg.grid_step), n, x0, name)
            for e, g, n, x0, name in itertools.product(
                cfg.eps_values, cfg.gamma_values, range(1, cfg.n_duel + 1),
                cfg.x0_values, cfg.fleet)]
    return parallel_map(lambda job: duel(*job, init=cfg.init), jobs)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    return wrapper


@_timed
def claim_gamma_star(cfg: SuiteConfig) -> ClaimResult:
    k, g = compute_gamma_star(1e-6)
    return ClaimResult("gamma-star", math.floor(g * 1000) == 526, g, 0.526,
                       f"k*={k:.9f}")


@_timed
def claim_frontier(cfg: SuiteConfig) -> ClaimResult:
    k, g = compute_gamma_star(1e-6)
    rep = verify_fact_tz(build_frontier(g, k, 1e-4))
    over = verify_fact_tz(build_frontier(g + 0.01, k, 1e-4))
    ok = rep.certified_gamma >= g - 1e-3 and over.max_violation_2 > 0
    return ClaimResult("frontier", ok, rep.certified_gamma, g - 1e-3,
                       f"violation2(gamma*+0.01)={over.max_violation_2:.6g}")


@_timed
def claim_h_identity(cfg: SuiteConfig) -> ClaimResult:
    k, g = compute_gamma_star(1e-6)
    const = FrontierConstants.from_gamma_k(g, k)
    y = np.linspace(0.0, g, 10_000)
    H = h_closed_form(y, const)
    Hr = h_closed_form(g - y, const)
    resid = float(np.max(np.abs((H - y) * (Hr - (g - y)) - const.quadratic(y))))
    moved = float(np.max(np.abs(h_fixed_point(H, g, 1) - H)))
    ok = resid <= 1e-10 and moved <= 1e-5
    return ClaimResult("h-identity", ok, resid, 1e-10, f"fixed-point move={moved:.3g} (<=1e-5)")


@_timed
def claim_f_values(cfg: SuiteConfig) -> ClaimResult:
    h = 1e-3
    cases = [(0.6, 0.0), (0.6, 0.5), (0.9, 0.0)]
    errs = [abs(f_grid(FParams(0.5, g, h), 2).at(x) - float(f2_exact(0.5, g, x)))
            for g, x in cases]
    return ClaimResult("f-values", max(errs) <= 2 * h, max(errs), 2 * h,
                       "F_2 at (0.6,0) (0.6,0.5) (0.9,0)")


def _claim_reports(cfg: SuiteConfig):
    combos = list(itertools.product(cfg.eps_values, cfg.gamma_values))
    return parallel_map(
        lambda eg: certify_claims(f_sequence(FParams(eg[0], eg[1], cfg.grid_step), cfg.n_claims)),
        combos)


def _claim_from_reports(name: str, reports) -> ClaimResult:
    worst = max(getattr(r, name.replace("-", "_")) for r in reports)
    tol = reports[0].tolerance
    return ClaimResult(name, worst <= tol, worst, tol, f"{len(reports)} parameter pairs")


@_timed
def claim_bound(duels: list[DuelOutcome], cfg: SuiteConfig) -> ClaimResult:
    worst = max(d.slack for d in duels)
    tol = 2 * cfg.grid_step
    return ClaimResult("bound", worst <= tol, worst, tol,
                       f"max (v_alg - F_n(x0)N)/N over {len(duels)} runs")


@_timed
def claim_structure(duels: list[DuelOutcome], cfg: SuiteConfig) -> ClaimResult:
    bad = [d for d in duels if d.structure_error or d.matching * 2 != d.vertices
           or d.pairs != d.matching]
    detail = f"{len(duels)} runs" if not bad else f"first failure: {bad[0]}"
    return ClaimResult("structure", not bad, len(bad), 0, detail)


@_timed
def claim_tz_ratio(duels: list[DuelOutcome], cfg: SuiteConfig) -> ClaimResult:
    _, g = compute_gamma_star(1e-6)
    tz = [d for d in duels if d.algorithm == "tz"]
    worst = min(d.ratio - (g - 5 * d.eps) for d in tz)
    low = min(d.ratio for d in tz)
    return ClaimResult("tz-ratio", worst >= 0, worst, 0.0,
                       f"min ratio {low:.6g} against gamma* - 5 eps, {len(tz)} runs")


@_timed
def claim_toy(cfg: SuiteConfig) -> ClaimResult:
    s = sweep(1e-3)
    ok = (abs(s.best_z - 2 / 3) <= 1e-3 and s.crossing_ratio == Fraction(2, 3)
          and s.crossing_z == s.crossing_ratio)
    return ClaimResult("toy", ok, float(s.crossing_ratio), 2 / 3,
                       f"grid best z={s.best_z:.3f} ratio={s.best_ratio:.6g}; "
                       f"crossing z={s.crossing_z}")


@_timed
def claim_minimax(cfg: SuiteConfig) -> ClaimResult:
    h = cfg.grid_step
    errs = [abs(minimax_value(0.5, g, 2, h) - float(f_grid(FParams(0.5, g, h), 2).values[0]))
            for g in (0.6, 0.9)]
    return ClaimResult("minimax", max(errs) <= 1e-12, max(errs), 1e-12, "n=2, eps=1/2")


def impossibility_runs(cfg: SuiteConfig):
    fp = FParams(cfg.impossibility_eps, cfg.impossibility_gamma, cfg.grid_step)
    found = find_negative_n(fp, cfg.impossibility_n_max)
    if found is None:
        return None, []
    n, _ = found
    params = AdversaryParams.minimal(n, fp, 0.0)

    def run(name):
        alg = make_algorithm(name)
        if params.N <= EXPLICIT_LIMIT:
            tr, _ = run_construction(params, alg)
            return name, tr.alg_total, tr.opt_size
        res = run_cohort_construction(params, alg)
        return name, res.alg_total, res.opt_size

    return found, parallel_map(run, cfg.fleet)


@_timed
def claim_impossibility(cfg: SuiteConfig) -> ClaimResult:
    found, runs = impossibility_runs(cfg)
    g = cfg.impossibility_gamma
    if found is None:
        return ClaimResult("impossibility", False, math.nan, 0.0,
                           f"F_n(0) stays >= 0 up to n={cfg.impossibility_n_max}")
    worst = max(alg / opt for _, alg, opt in runs)
    ok = all(alg < g * opt for _, alg, opt in runs)
    return ClaimResult("impossibility", ok, worst, g,
                       f"n={found[0]} F_n(0)={found[1]:.6g}; max ALG/OPT over fleet")


def run_suite(claims=DEFAULT_CLAIMS, cfg: SuiteConfig | None = None) -> list[ClaimResult]:
    cfg = cfg or SuiteConfig()
    unknown = set(claims) - set(CLAIMS)
    if unknown:
        raise ConfigError(f"unknown claims: {sorted(unknown)}")
    wanted = [c for c in CLAIMS if c in claims]
    out: list[ClaimResult] = []
    reports = duels = None
    for name in wanted:
        if name in ("monotone", "concave", "lipschitz"):
            t0 = time.perf_counter()
            reports = reports or _claim_reports(cfg)
            res = _claim_from_reports(name, reports)
            res.seconds = time.perf_counter() - t0
        elif name in ("bound", "structure", "tz-ratio"):
            duels = duels or duel_grid(cfg)
            res = {"bound": claim_bound, "structure": claim_structure,
                   "tz-ratio": claim_tz_ratio}[name](duels, cfg)
        else:
            res = {"gamma-star": claim_gamma_star, "frontier": claim_frontier,
                   "h-identity": claim_h_identity, "f-values": claim_f_values,
                   "toy": claim_toy, "minimax": claim_minimax,
                   "impossibility": claim_impossibility}[name](cfg)
        out.append(res)
    return out


__all__ = ["CLAIMS", "DEFAULT_CLAIMS", "ClaimResult", "SuiteConfig", "DuelOutcome", "duel",
           "duel_grid", "run_suite", "thread_count", "parallel_map", "impossibility_runs"]
