"""Independent ground truth: offline maximum matching and an exhaustive minimax game."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded, DomainError, NotBipartite

_INF = float("inf")


@dataclass(frozen=True)
class OfflineGraph:
    n_vertices: int
    colors: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.colors) != self.n_vertices:
            raise DomainError("one color per vertex is required")
        for u, v in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise DomainError(f"edge ({u}, {v}) out of range")

    @classmethod
    def from_run(cls, transcript, state) -> OfflineGraph:
        n = len(state)
        return cls(n, tuple(transcript.colors[v] for v in range(n)), tuple(sorted(state.edges)))

    def check_bipartite(self) -> None:
        for u, v in self.edges:
            if self.colors[u] == self.colors[v]:
                raise NotBipartite(f"edge ({u}, {v}) joins two vertices of color {self.colors[u]}")


def max_matching(g: OfflineGraph) -> int:
    """Maximum matching size (Hopcroft-Karp)."""
    g.check_bipartite()
    left = [v for v in range(g.n_vertices) if g.colors[v] == 0]
    adj: dict[int, list[int]] = {u: [] for u in left}
    for u, v in g.edges:
        if g.colors[u] == 0:
            adj[u].append(v)
        else:
            adj[v].append(u)
    match_l: dict[int, int | None] = {u: None for u in left}
    match_r: dict[int, int] = {}
    dist: dict[int, float] = {}

    def bfs() -> bool:
        q = deque()
        for u in left:
            if match_l[u] is None:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = _INF
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r.get(v)
                if w is None:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(root: int) -> bool:
        # iterative augmenting search along the BFS layers
        stack = [(root, iter(adj[root]))]
        path = []
        while stack:
            u, it = stack[-1]
            advanced = False
            for v in it:
                w = match_r.get(v)
                if w is None:
                    path.append((u, v))
                    for pu, pv in path:
                        match_l[pu] = pv
                        match_r[pv] = pu
                    return True
                if dist[w] == dist[u] + 1:
                    path.append((u, v))
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[u] = _INF
                stack.pop()
                if path:
                    path.pop()
        return False

    size = 0
    while bfs():
        for u in left:
            if match_l[u] is None and dfs(u):
                size += 1
    return size


def minimax_value(eps: float, gamma: float, n: int, action_step: float,
                  node_cap: int = 2_000_000) -> float:
    """Value per initial vertex of the averaged game started from level 0.

    The algorithm picks ``a`` on the action grid (with ``x + eps*a <= 1``); the
    adversary answers with whichever continuation is smaller,

        aggressive:    V(k-1, x + eps*a) + eps*V(k-1, a)
        conservative:  (1-eps)*V(k-1, x + eps*a) + eps*(((1+eps)*a + x)/2 - gamma)

    and with one step left the value is ``1 - x/2 - gamma``.  Every node is
    solved by exhaustive enumeration; nodes are memoized on ``(k, x)``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    m = round(1.0 / action_step)
    if m < 1 or abs(m * action_step - 1.0) > 1e-9:
        raise DomainError(f"action_step {action_step} must divide 1")
    actions = np.linspace(0.0, 1.0, m + 1)
    memo: dict[tuple[int, float], float] = {}
    visited = 0

    def base(x):
        return 1.0 - np.asarray(x) / 2.0 - gamma

    def value(k: int, x: float) -> float:
        nonlocal visited
        if k == 1:
            return float(base(x))
        key = (k, round(x, 12))
        if key in memo:
            return memo[key]
        visited += 1
        if visited > node_cap:
            raise BudgetExceeded(f"more than {node_cap} game nodes")
        a = actions[x + eps * actions <= 1.0 + 1e-12]
        t = np.minimum(x + eps * a, 1.0)
        if k == 2:
            cont, own = base(t), base(a)
        else:
            cont = np.array([value(k - 1, ti) for ti in t])
            own = np.array([value(k - 1, ai) for ai in a])
        agg = cont + eps * own
        con = (1 - eps) * cont + eps * (((1 + eps) * a + x) / 2 - gamma)
        best = float(np.max(np.minimum(agg, con)))
        memo[key] = best
        return best

    return value(n, 0.0)


def f2_exact(eps, gamma, x) -> Fraction:
    """F_2(x) in exact rational arithmetic.

    With one step left the value is affine, so both continuations are affine
    in ``a`` and the inner max-min sits at an endpoint or at their crossing.
    """
    eps, gamma, x = (Fraction(v).limit_denominator(10**9) for v in (eps, gamma, x))
    if not 0 <= x <= 1:
        raise DomainError("x must lie in [0, 1]")

    def f1(t):
        return 1 - t / 2 - gamma

    def agg(a):
        return f1(x + eps * a) + eps * f1(a)

    def con(a):
        return (1 - eps) * f1(x + eps * a) + eps * (((1 + eps) * a + x) / 2 - gamma)

    top = min(Fraction(1), (1 - x) / eps)
    candidates = [Fraction(0), top]
    d = (agg(top) - agg(Fraction(0))) - (con(top) - con(Fraction(0)))
    if d != 0:
        a = (con(Fraction(0)) - agg(Fraction(0))) * top / d
        if 0 <= a <= top:
            candidates.append(a)
    return max(min(agg(a), con(a)) for a in candidates)
