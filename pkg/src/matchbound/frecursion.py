"""Adversary value functions F_n tabulated on a uniform grid of [0, 1].

    F_1(x)     = 1 - x/2 - gamma
    F_{n+1}(x) = max_{0<=a<=1, x+eps*a<=1} min(e_agg, e_con)
    e_agg      = F_n(x + eps*a) + eps*F_n(a)
    e_con      = (1-eps)*F_n(x + eps*a) + eps*(((1+eps)*a + x)/2 - gamma)

The action grid equals the x grid; ``F_n(x + eps*a)`` is linearly interpolated.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DomainError

NEGATIVE_THRESHOLD = -1e-9
_ROW_BLOCK = 256


class Branch(IntEnum):
    NONE = -1
    CONSERVATIVE = 0
    AGGRESSIVE = 1


def _reciprocal_int(value: float, what: str) -> int:
    m = round(1.0 / value)
    if value <= 0 or m < 1 or abs(m * value - 1.0) > 1e-9:
        raise ConfigError(f"1/{what} must be a positive integer, got {what}={value}")
    return m


@dataclass(frozen=True)
class FParams:
    eps: float
    gamma: float
    grid_step: float = 1e-3

    def __post_init__(self):
        inv_eps = _reciprocal_int(self.eps, "eps")
        m = _reciprocal_int(self.grid_step, "grid_step")
        if m % inv_eps:
            raise ConfigError("eps must be a multiple of grid_step")
        if not 0 < self.gamma < 1:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")

    @property
    def inv_eps(self) -> int:
        return round(1.0 / self.eps)

    @property
    def eps_fraction(self) -> Fraction:
        return Fraction(1, self.inv_eps)

    @property
    def intervals(self) -> int:
        return round(1.0 / self.grid_step)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.intervals + 1)


@dataclass(frozen=True)
class FGrid:
    params: FParams
    n: int
    values: np.ndarray
    argmax_a: np.ndarray
    branch: np.ndarray

    def __call__(self, x):
        return np.interp(x, self.params.x, self.values)

    def at(self, x: float) -> float:
        return float(np.interp(x, self.params.x, self.values))


def f1(x, gamma: float):
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > 1):
        raise DomainError("x must lie in [0, 1]")
    out = 1.0 - xa / 2.0 - gamma
    return out if out.ndim else float(out)


def first_grid(params: FParams) -> FGrid:
    x = params.x
    return FGrid(params, 1, f1(x, params.gamma), np.full_like(x, np.nan),
                 np.full(x.shape, int(Branch.NONE)))


def branch_expressions(prev, x, a, eps: float, gamma: float):
    """(aggressive, conservative) continuation values for level ``x`` and action ``a``."""
    fxa = prev(np.asarray(x) + eps * np.asarray(a))
    agg = fxa + eps * prev(a)
    con = (1 - eps) * fxa + eps * (((1 + eps) * np.asarray(a) + x) / 2 - gamma)
    return agg, con


def f_next(prev: FGrid) -> FGrid:
    p = prev.params
    eps, gamma = p.eps, p.gamma
    x = p.x
    F = prev.values
    values = np.empty_like(x)
    arg = np.empty_like(x)
    branch = np.empty(x.shape, dtype=int)
    A = x[None, :]
    for lo in range(0, len(x), _ROW_BLOCK):
        X = x[lo:lo + _ROW_BLOCK, None]
        t = X + eps * A
        feasible = t <= 1.0 + 1e-12
        fxa = np.interp(np.minimum(t, 1.0), x, F)
        agg = fxa + eps * F[None, :]
        con = (1 - eps) * fxa + eps * (((1 + eps) * A + X) / 2 - gamma)
        val = np.where(feasible, np.minimum(agg, con), -np.inf)
        j = np.argmax(val, axis=1)  # first index: smallest maximizing a
        rows = np.arange(len(j))
        values[lo:lo + len(j)] = val[rows, j]
        arg[lo:lo + len(j)] = x[j]
        # ties go to the aggressive branch
        branch[lo:lo + len(j)] = np.where(agg[rows, j] <= con[rows, j],
                                          int(Branch.AGGRESSIVE), int(Branch.CONSERVATIVE))
    return FGrid(p, prev.n + 1, values, arg, branch)


@lru_cache(maxsize=64)
def _sequence(params: FParams, n: int) -> tuple[FGrid, ...]:
    if n == 1:
        return (first_grid(params),)
    head = _sequence(params, n - 1)
    return head + (f_next(head[-1]),)


def f_sequence(params: FParams, n: int) -> list[FGrid]:
    """Grids for F_1 ... F_n (memoized per params)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return list(_sequence(params, n))


def f_grid(params: FParams, n: int) -> FGrid:
    return _sequence(params, n)[-1]


def find_negative_n(params: FParams, n_max: int) -> tuple[int, float] | None:
    """Smallest n <= n_max with F_n(0) below -1e-9, or None."""
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    grid = first_grid(params)
    while True:
        if grid.values[0] < NEGATIVE_THRESHOLD:
            return grid.n, float(grid.values[0])
        if grid.n >= n_max:
            return None
        grid = f_next(grid)


def refinement_estimate(params: FParams, n: int) -> tuple[float, float]:
    """F_n(0) at grid_step and at grid_step/2, to gauge the discretization gap."""
    fine = FParams(params.eps, params.gamma, params.grid_step / 2)
    return float(f_grid(params, n).values[0]), float(f_grid(fine, n).values[0])


@dataclass
class ClaimReport:
    monotone: float
    concave: float
    lipschitz: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return max(self.monotone, self.concave, self.lipschitz) <= self.tolerance

    def as_dict(self) -> dict:
        return {"monotone": self.monotone, "concave": self.concave,
                "lipschitz": self.lipschitz, "tolerance": self.tolerance,
                "passed": self.passed}


def certify_claims(grids) -> ClaimReport:
    """Worst violations of decrease in n, concavity and 1/2-Lipschitzness."""
    grids = list(grids)
    if not grids:
        raise DomainError("no grids to certify")
    params = grids[0].params
    for prev, nxt in zip(grids, grids[1:]):
        if nxt.params != params or nxt.n != prev.n + 1:
            raise DomainError("grids must share params and have consecutive n")
    h = params.grid_step
    mono = max((float(np.max(b.values - a.values)) for a, b in zip(grids, grids[1:])),
               default=0.0)
    conc = max(float(np.max(np.diff(g.values, 2))) for g in grids)
    lip = max(float(np.max(np.abs(np.diff(g.values)))) - h / 2 for g in grids)
    return ClaimReport(max(mono, 0.0), max(conc, 0.0), max(lip, 0.0), 2 * h)


def grids_csv(grids) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "x", "F", "argmax_a", "branch"])
    for g in grids:
        for xi, fi, ai, bi in zip(g.params.x, g.values, g.argmax_a, g.branch):
            w.writerow([g.n, f"{xi:.12g}", f"{fi:.12g}",
                        "" if np.isnan(ai) else f"{ai:.12g}",
                        "" if bi < 0 else Branch(bi).name.lower()])
    return buf.getvalue()
