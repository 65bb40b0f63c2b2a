"""Online fractional matching algorithms: threshold water-filling and baselines.

Every algorithm answers per-vertex arrival events (:meth:`on_arrival`) and,
for the block engine in :mod:`matchbound.cohort`, whole blocks of identical
vertices arriving against a profile of neighbor levels (:meth:`pour_block`).
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import BadInitialization, DomainError
from .frontier import FrontierFunctions, optimal_frontier
from .model import AlgorithmDecision, ArrivalEvent, MatchState

BISECT_TOL = 1e-12
DEFAULT_CHUNKS = 256


class ThresholdFunction:
    """Non-increasing stopping level a: [0, 1] -> [0, 1], linear between grid nodes."""

    def __init__(self, table, constant: float | None = None):
        table = np.asarray(table, dtype=float)
        if table.ndim != 1 or len(table) < 2:
            raise DomainError("threshold table needs at least two nodes")
        if np.any(table < -1e-12) or np.any(table > 1 + 1e-12):
            raise DomainError("threshold values must lie in [0, 1]")
        if np.any(np.diff(table) > 1e-9):
            raise DomainError("threshold table must be non-increasing")
        self.table = np.clip(table, 0.0, 1.0)
        self.grid = np.linspace(0.0, 1.0, len(table))
        self.constant = constant

    @classmethod
    def const(cls, c: float) -> ThresholdFunction:
        if not 0 <= c <= 1:
            raise DomainError(f"constant threshold must lie in [0, 1], got {c}")
        return cls([c, c], constant=float(c))

    @classmethod
    def from_frontier(cls, f: FrontierFunctions) -> ThresholdFunction:
        """Smallest non-increasing majorant of the frontier's ``a`` table.

        The raw table sits at gamma below ``c = H(0)`` and jumps to 1 at ``c``;
        the majorant is 1 there, which keeps both sufficiency inequalities.
        """
        return cls(np.maximum.accumulate(np.asarray(f.a)[::-1])[::-1])

    def __call__(self, level):
        if self.constant is not None:
            return np.full_like(np.asarray(level, dtype=float), self.constant) \
                if np.ndim(level) else self.constant
        return np.interp(level, self.grid, self.table)


class Reservoir:
    """Water level reached after pouring a given mass into a multiset of levels."""

    def __init__(self, levels, counts=None):
        levels = np.asarray(levels, dtype=float)
        counts = np.ones_like(levels) if counts is None else np.asarray(counts, dtype=float)
        order = np.argsort(levels, kind="stable")
        lv, ct = levels[order], counts[order]
        # merge equal levels
        uniq, start = np.unique(lv, return_index=True)
        w = np.add.reduceat(ct, start) if len(lv) else ct
        self.levels = np.minimum(uniq, 1.0)
        self.cum = np.cumsum(w)
        nxt = np.append(self.levels[1:], 1.0)
        self.marks = np.concatenate([[0.0], np.cumsum(self.cum * (nxt - self.levels))])
        self.capacity = float(self.marks[-1])

    @property
    def floor(self) -> float:
        return float(self.levels[0]) if len(self.levels) else 1.0

    def level(self, mass):
        """Minimum level after ``mass`` has been water-filled in (capped at 1)."""
        m = np.asarray(mass, dtype=float)
        i = np.clip(np.searchsorted(self.marks, m, side="right") - 1, 0, len(self.levels) - 1)
        out = np.minimum(self.levels[i] + (m - self.marks[i]) / self.cum[i], 1.0)
        return out if out.ndim else float(out)


def _pour(u_level: float, res: Reservoir, stop: ThresholdFunction,
          spread: float = 1.0, room: float | None = None) -> float:
    """Mass one vertex pours before ``x_u >= a(min level)`` or the neighbors fill.

    ``spread`` scales the mass seen by the reservoir, so a run of identical
    vertices can be advanced together (``spread = (s + 1) / 2``).
    """
    if not len(res.levels) or res.floor >= 1.0:
        return 0.0
    room = res.capacity if room is None else room
    t_max = min(1.0 - u_level, room / spread)
    if t_max <= 0:
        return 0.0
    if stop.constant is not None:
        return min(max(stop.constant - u_level, 0.0), t_max)

    def phi(t):
        return u_level + t - stop(res.level(spread * t))

    if phi(0.0) >= 0:
        return 0.0
    if phi(t_max) <= 0:
        return t_max
    lo, hi = 0.0, t_max
    while hi - lo > BISECT_TOL:
        mid = (lo + hi) / 2
        if phi(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo


def water_fill(u_level: float, neighbors: Sequence[float], stop: ThresholdFunction) -> list[float]:
    """Per-neighbor increments when a vertex at ``u_level`` pours into ``neighbors``.

    Mass always goes to the least matched neighbors, split equally among ties.
    """
    if not len(neighbors):
        return []
    res = Reservoir(neighbors)
    t = _pour(u_level, res, stop)
    if t <= 0:
        return [0.0] * len(neighbors)
    top = res.level(t)
    return [max(top - lv, 0.0) for lv in neighbors]


def initial_portions(N: int, x: float, mode: str = "uniform") -> list[float]:
    if not 0 <= x <= 1:
        raise BadInitialization(f"initial average {x} outside [0, 1]")
    if mode == "uniform":
        return [float(x)] * N
    if mode == "skew":
        # as many saturated vertices as possible, one partial, the rest empty
        mass = x * N
        full = min(N, int(math.floor(mass + 1e-12)))
        out = [1.0] * full + [0.0] * (N - full)
        if full < N:
            out[full] = mass - full
        return out
    raise DomainError(f"unknown init mode {mode!r}")


class _Base:
    name = "base"

    def __init__(self, init: str = "uniform"):
        self.init = init

    def on_init(self, N: int, x: float) -> list[float]:
        return initial_portions(N, x, self.init)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class WaterFilling(_Base):
    """Match each arriving vertex to its least matched neighbors until
    ``x_u = a(min neighbor level)`` or the neighbors are full.

    Vertices of a simultaneous batch are processed in ascending id order.
    """

    def __init__(self, stop: ThresholdFunction, name: str, init: str = "uniform",
                 chunks: int = DEFAULT_CHUNKS):
        super().__init__(init)
        self.stop = stop
        self.name = name
        self.chunks = chunks

    def on_arrival(self, event: ArrivalEvent, state: MatchState) -> AlgorithmDecision:
        levels: dict[int, float] = {}
        out: dict[tuple[int, int], float] = {}
        for u, nbrs in sorted(event.batch):
            if not nbrs:
                continue
            cur = [levels.get(v, state.x[v]) for v in nbrs]
            inc = water_fill(levels.get(u, state.x[u]), cur, self.stop)
            for v, lv, d in zip(nbrs, cur, inc):
                if d > 0:
                    out[(u, v)] = d
                    levels[v] = lv + d
            levels[u] = levels.get(u, state.x[u]) + sum(inc)
        return AlgorithmDecision(out)

    def pour_block(self, levels: np.ndarray, counts: np.ndarray, n_new: int):
        """Respond to ``n_new`` identical vertices adjacent to a level profile.

        Returns ``(new_levels, b_levels, b_counts)``.  Constant thresholds are
        exact.  Otherwise the new vertices are advanced in at most
        ``self.chunks`` runs; a run of ``s`` vertices shares one amount ``x``
        solving ``x = a(level(M0 + (s+1)/2 * x))``, which for ``s = 1`` is the
        exact sequential rule.
        """
        res = Reservoir(levels, counts)
        cap = res.capacity
        b_levels: list[float] = []
        b_counts: list[int] = []
        c = self.stop.constant
        if c is not None:
            if c <= 0 or cap <= 0:
                return np.asarray(levels, float).copy(), np.zeros(1), np.array([n_new])
            if n_new * c <= cap:
                full, rest = n_new, 0.0
            else:
                full = int(math.floor(cap / c))
                rest = cap - full * c
            poured = full * c + rest
            b_levels += [c, rest, 0.0]
            b_counts += [full, 1 if full < n_new else 0, max(n_new - full - 1, 0)]
        else:
            k = min(n_new, self.chunks)
            sizes = [n_new // k + (1 if i < n_new % k else 0) for i in range(k)]
            poured = 0.0
            for s in sizes:
                room = cap - poured
                if room <= 0:
                    b_levels.append(0.0)
                    b_counts.append(s)
                    continue
                x = _pour(0.0, _Shifted(res, poured), self.stop, spread=(s + 1) / 2, room=room)
                if s * x <= room:
                    poured += s * x
                    b_levels.append(x)
                    b_counts.append(s)
                    continue
                full = int(math.floor(room / x))
                b_levels += [x, room - full * x, 0.0]
                b_counts += [full, 1, s - full - 1]
                poured = cap
        top = res.level(poured)
        new_levels = np.maximum(np.asarray(levels, dtype=float), top)
        keep = np.asarray(b_counts) > 0
        return new_levels, np.asarray(b_levels, float)[keep], np.asarray(b_counts, np.int64)[keep]


class _Shifted:
    """View of a reservoir that already holds ``offset`` extra mass."""

    def __init__(self, res: Reservoir, offset: float):
        self.res = res
        self.offset = offset
        self.levels = res.levels
        self.capacity = res.capacity - offset

    @property
    def floor(self) -> float:
        return self.res.level(self.offset)

    def level(self, mass):
        return self.res.level(self.offset + np.asarray(mass))


class EvenSplit(_Base):
    """Each arriving vertex spreads ``level`` mass evenly over its edges.

    An old vertex ``v`` hit by ``d`` vertices of the batch takes at most
    ``(1 - x_v) / d`` per edge, so the batch can never overfill it.
    """

    def __init__(self, level: float, init: str = "uniform"):
        super().__init__(init)
        if not 0 <= level <= 1:
            raise DomainError(f"even-split level must lie in [0, 1], got {level}")
        self.level = level
        self.name = f"evensplit:{level:g}"

    def on_arrival(self, event: ArrivalEvent, state: MatchState) -> AlgorithmDecision:
        hits: dict[int, int] = {}
        for _, nbrs in event.batch:
            for v in nbrs:
                hits[v] = hits.get(v, 0) + 1
        out = {}
        for u, nbrs in event.batch:
            if not nbrs:
                continue
            share = self.level / len(nbrs)
            for v in nbrs:
                w = min(share, max(1.0 - state.x[v], 0.0) / hits[v])
                if w > 0:
                    out[(u, v)] = w
        return AlgorithmDecision(out)

    def pour_block(self, levels: np.ndarray, counts: np.ndarray, n_new: int):
        levels = np.asarray(levels, dtype=float)
        counts = np.asarray(counts)
        size = float(counts.sum())
        per_edge = np.minimum(self.level / size, np.maximum(1.0 - levels, 0.0) / n_new)
        b_level = float(np.dot(counts.astype(float), per_edge))
        return levels + n_new * per_edge, np.array([b_level]), np.array([n_new], np.int64)


def greedy(init: str = "uniform") -> WaterFilling:
    return WaterFilling(ThresholdFunction.const(1.0), "greedy", init)


def fixed_level(c: float, init: str = "uniform") -> WaterFilling:
    return WaterFilling(ThresholdFunction.const(c), f"fixed:{c:g}", init)


def tz_algorithm(frontier: FrontierFunctions, init: str = "uniform",
                 chunks: int = DEFAULT_CHUNKS) -> WaterFilling:
    return WaterFilling(ThresholdFunction.from_frontier(frontier), "tz", init, chunks)


def baseline(kind: str, param: float | None = None, init: str = "uniform"):
    kind = kind.lower()
    if kind == "greedy":
        return greedy(init)
    if kind in ("fixed", "fixedlevel"):
        return fixed_level(float(param), init)
    if kind == "evensplit":
        return EvenSplit(float(param), init)
    raise DomainError(f"unknown baseline {kind!r}")


FLEET = ("tz", "greedy", "fixed:0", "fixed:0.3", "fixed:0.7",
         "evensplit:0.2", "evensplit:0.5", "evensplit:1.0")


@lru_cache(maxsize=4)
def _default_frontier(grid_step: float = 1e-4) -> FrontierFunctions:
    return optimal_frontier(grid_step)


def make_algorithm(name: str, frontier: FrontierFunctions | None = None,
                   init: str = "uniform", chunks: int = DEFAULT_CHUNKS):
    """Build an algorithm from its registry name: tz, greedy, fixed:<c>, evensplit:<a>."""
    kind, _, arg = name.partition(":")
    if kind == "tz" and not arg:
        return tz_algorithm(frontier or _default_frontier(), init, chunks)
    if kind == "greedy" and not arg:
        return greedy(init)
    if kind in ("fixed", "evensplit") and arg:
        try:
            value = float(arg)
        except ValueError:
            raise DomainError(f"bad parameter in algorithm name {name!r}") from None
        return baseline(kind, value, init)
    raise DomainError(f"unknown algorithm {name!r}")
