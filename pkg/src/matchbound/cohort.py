"""Block engine: the same construction with partitions stored as level classes.

Vertices of a partition that share a matched level are kept as one class
``(level, count)``, so instances with ``N = (1/eps)^n`` in the trillions stay
cheap.  Algorithms take part through ``pour_block(levels, counts, n_new)``,
which answers a whole block of identical arrivals at once.

For the constant-threshold and even-split algorithms this engine reproduces
the vertex-level run exactly; for a non-constant threshold the arriving block
is advanced in runs (see :meth:`WaterFilling.pour_block`).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .adversary import BLACK, WHITE, AdversaryParams, StepRecord, snap_down
from .errors import InfeasibleDecision, StructureViolation
from .frecursion import FGrid, branch_expressions, f_grid, f_sequence
from .model import TOL


@dataclass
class Block:
    levels: np.ndarray
    counts: np.ndarray
    color: int
    steps_remaining: int
    pid: int = -1

    def __post_init__(self):
        self.levels, self.counts = merge_classes(self.levels, self.counts)

    @property
    def size(self) -> int:
        return int(self.counts.sum())

    @property
    def mass(self) -> float:
        return math.fsum(self.counts.astype(float) * self.levels)

    @property
    def average(self) -> float:
        return self.mass / self.size


def merge_classes(levels, counts):
    levels = np.asarray(levels, dtype=float)
    counts = np.asarray(counts, dtype=np.int64)
    keep = counts > 0
    levels, counts = levels[keep], counts[keep]
    uniq, inverse = np.unique(levels, return_inverse=True)
    merged = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(merged, inverse, counts)
    return uniq, merged


def take_lowest(levels, counts, k: int):
    """Split a sorted profile into its ``k`` least matched vertices and the rest."""
    cum = np.cumsum(counts)
    i = int(np.searchsorted(cum, k, side="left"))
    low_c = counts[:i + 1].copy()
    low_c[-1] -= int(cum[i] - k)
    high_c = counts[i:].copy()
    high_c[0] = int(cum[i] - k)
    return (levels[:i + 1], low_c), (levels[i:], high_c)


def initial_classes(N: int, x0: float, mode: str = "uniform"):
    if mode == "uniform" or x0 in (0.0, 1.0):
        return np.array([x0]), np.array([N], dtype=np.int64)
    if mode == "skew":
        full = min(N, math.floor(x0 * N + 1e-12))
        rest = x0 * N - full
        return (np.array([1.0, rest, 0.0]),
                np.array([full, 1 if full < N else 0, max(N - full - 1, 0)], dtype=np.int64))
    raise ValueError(f"unknown init mode {mode!r}")


@dataclass
class CohortResult:
    params: AdversaryParams
    algorithm: str
    steps: list[StepRecord] = field(default_factory=list)
    retired_pairs: list[tuple[int, int, int]] = field(default_factory=list)
    created: int = 0
    retired: int = 0
    retired_mass: float = 0.0
    v_alg: float = 0.0
    v_alg_lazy: float = 0.0
    alg_total: float = 0.0
    opt_size: int = 0
    bound: float = 0.0
    max_level: float = 0.0
    max_classes: int = 0

    @property
    def ratio(self) -> float:
        return self.alg_total / self.opt_size if self.opt_size else 1.0

    @property
    def branch_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for s in self.steps:
            out[s.branch] = out.get(s.branch, 0) + 1
        return out

    def to_dict(self) -> dict:
        p = self.params
        return {
            "params": {"n": p.n, "N": p.N, "eps": p.eps, "gamma": p.gamma,
                       "x0": p.x0, "grid_step": p.fparams.grid_step},
            "algorithm": self.algorithm,
            "engine": "cohort",
            "branches": [asdict(s) for s in self.steps],
            "deactivations": [list(t) for t in self.retired_pairs],
            "v_alg": self.v_alg,
            "alg_total": self.alg_total,
            "opt_size": self.opt_size,
            "ratio": self.ratio,
            "bound": self.bound,
        }


def _pour(block: Block, alg, n_new: int):
    new_levels, b_levels, b_counts = alg.pour_block(block.levels, block.counts, n_new)
    new_levels = np.asarray(new_levels, dtype=float)
    if int(np.sum(b_counts)) != n_new:
        raise InfeasibleDecision("block response does not cover every arriving vertex")
    if np.any(new_levels > 1 + TOL) or np.any(np.asarray(b_levels) > 1 + TOL):
        raise InfeasibleDecision("block response overfills a vertex")
    if np.any(new_levels < block.levels - TOL):
        raise InfeasibleDecision("block response lowers a matched portion")
    gained = math.fsum(block.counts.astype(float) * (new_levels - block.levels))
    given = math.fsum(np.asarray(b_counts, float) * np.asarray(b_levels, float))
    # levels carry one ulp each, so the mass error grows with the class counts
    slack = 1e-9 * max(1.0, given) + 8 * np.finfo(float).eps * (block.size + n_new)
    if abs(gained - given) > slack:
        raise InfeasibleDecision(f"block response breaks conservation ({gained} vs {given})")
    return new_levels, np.asarray(b_levels, float), np.asarray(b_counts, np.int64), given


def run_cohort_construction(params: AdversaryParams, alg, grids: list[FGrid] | None = None,
                            init: str | None = None) -> CohortResult:
    """Block-level counterpart of :func:`matchbound.adversary.run_construction`."""
    fp = params.fparams
    gamma = fp.gamma
    grids = grids or f_sequence(fp, max(params.n - 1, 1))
    res = CohortResult(params, getattr(alg, "name", type(alg).__name__))
    mode = init or getattr(alg, "init", "uniform")
    lv, ct = initial_classes(params.N, params.x0, mode)
    active = [Block(lv, ct, WHITE, params.n, 0)]
    res.created = params.N
    next_pid = 1
    retired_mass = []
    lazy = []
    inv = fp.inv_eps

    def retire(blocks, pid_a, pid_b):
        count = sum(b.size for b in blocks) // 2
        mass = math.fsum(b.mass for b in blocks)
        res.retired += 2 * count
        retired_mass.append(mass)
        lazy.append(0.5 * (mass - gamma * 2 * count))
        res.retired_pairs.append((pid_a, pid_b, count))

    for k in range(params.n, 0, -1):
        nxt = []
        for blk in active:
            if blk.size % inv ** k:
                raise StructureViolation("divisibility", f"block of {blk.size} with {k} steps")
            n_new = blk.size if k == 1 else blk.size // inv
            x_before = blk.average
            new_levels, b_lv, b_ct, given = _pour(blk, alg, n_new)
            res.created += n_new
            a_blk = Block(new_levels, blk.counts, blk.color, k - 1, blk.pid)
            b_blk = Block(b_lv, b_ct, 1 - blk.color, k - 1)
            a = given / n_new
            rec = StepRecord(blk.pid, k, blk.size, n_new, x_before, a_blk.average, a, "base")
            res.max_classes = max(res.max_classes, len(a_blk.levels), len(b_blk.levels))
            res.max_level = max(res.max_level, float(a_blk.levels[-1]), float(b_blk.levels[-1]))
            if k == 1:
                retire([a_blk, b_blk], blk.pid, -1)
                res.steps.append(rec)
                continue
            rec.a_snapped = snap_down(a, fp.grid_step)
            agg, con = branch_expressions(grids[k - 2], x_before, rec.a_snapped, fp.eps, gamma)
            rec.expr_aggressive, rec.expr_conservative = float(agg), float(con)
            if agg <= con:
                rec.branch = "aggressive"
                b_blk.pid = next_pid
                rec.new_partition = next_pid
                next_pid += 1
                nxt += [a_blk, b_blk]
            else:
                rec.branch = "conservative"
                (lo_lv, lo_ct), (hi_lv, hi_ct) = take_lowest(a_blk.levels, a_blk.counts, n_new)
                c_blk = Block(lo_lv, lo_ct, blk.color, 0)
                retire([c_blk, b_blk], blk.pid, -1)
                nxt.append(Block(hi_lv, hi_ct, blk.color, k - 1, blk.pid))
            res.steps.append(rec)
        active = nxt

    if res.retired != res.created:
        raise StructureViolation("perfect-matching",
                                 f"{res.created - res.retired} vertices never retired")
    res.retired_mass = math.fsum(retired_mass)
    res.alg_total = 0.5 * res.retired_mass
    res.v_alg = 0.5 * (res.retired_mass - gamma * res.retired)
    res.v_alg_lazy = math.fsum(lazy)
    res.opt_size = res.retired // 2
    res.bound = f_grid(fp, params.n).at(params.x0) * params.N
    return res


__all__ = ["Block", "CohortResult", "run_cohort_construction", "initial_classes",
           "take_lowest", "merge_classes", "BLACK"]
