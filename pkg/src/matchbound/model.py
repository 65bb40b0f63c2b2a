"""Evolving graph, fractional matching state and the online-algorithm contract.

A :class:`MatchState` is an immutable snapshot: every update returns a new
state, so the snapshot handed to an algorithm can never be mutated under it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Protocol, Sequence

from .errors import EmptySet, InfeasibleDecision, UnknownEdge

TOL = 1e-9

VertexId = int
Edge = tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class MatchState:
    """Matched portion per vertex plus the load carried by every revealed edge."""

    __slots__ = ("_x", "_load", "_adj")

    def __init__(self, x=None, edge_load=None, adjacency=None):
        self._x: dict[int, float] = dict(x or {})
        self._load: dict[Edge, float] = dict(edge_load or {})
        self._adj: dict[int, tuple[int, ...]] = dict(adjacency or {})
        for v in self._x:
            self._adj.setdefault(v, ())

    @property
    def x(self) -> Mapping[int, float]:
        return MappingProxyType(self._x)

    @property
    def edge_load(self) -> Mapping[Edge, float]:
        return MappingProxyType(self._load)

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(self._load)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def __len__(self) -> int:
        return len(self._x)

    def __contains__(self, v: int) -> bool:
        return v in self._x

    def next_id(self) -> int:
        return len(self._x)

    def with_portions(self, portions: Mapping[int, float]) -> MatchState:
        """Add isolated vertices carrying pre-assigned matched portions."""
        x = dict(self._x)
        adj = dict(self._adj)
        for v, p in portions.items():
            if v in x:
                raise ValueError(f"vertex {v} already exists")
            x[v] = float(p)
            adj[v] = ()
        return MatchState(x, self._load, adj)

    def with_arrivals(self, event: ArrivalEvent) -> MatchState:
        """Insert the vertices and (zero-load) edges revealed by ``event``."""
        event.validate(self)
        x = dict(self._x)
        load = dict(self._load)
        adj = dict(self._adj)
        for v, nbrs in event.batch:
            x[v] = 0.0
            adj[v] = tuple(nbrs)
            for u in nbrs:
                adj[u] = adj[u] + (v,)
                load[edge_key(u, v)] = 0.0
        return MatchState(x, load, adj)


@dataclass(frozen=True)
class ArrivalEvent:
    """One or more vertices arriving together with their edges to earlier vertices."""

    batch: tuple[tuple[int, tuple[int, ...]], ...]
    simultaneous: bool = True

    @classmethod
    def block(cls, new_ids: Iterable[int], neighbors: Iterable[int]) -> ArrivalEvent:
        """All of ``new_ids`` arrive, each adjacent to every vertex in ``neighbors``."""
        nbrs = tuple(neighbors)
        return cls(tuple((v, nbrs) for v in new_ids))

    @property
    def new_ids(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.batch)

    def revealed(self) -> set[Edge]:
        return {(v, u) for v, nbrs in self.batch for u in nbrs}

    def serialized(self) -> list[ArrivalEvent]:
        return [ArrivalEvent((item,), simultaneous=False) for item in self.batch]

    def validate(self, state: MatchState) -> None:
        ids = self.new_ids
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate vertex in batch")
        batch = set(ids)
        for v, nbrs in self.batch:
            if v in state:
                raise ValueError(f"vertex {v} already arrived")
            for u in nbrs:
                if u in batch:
                    raise ValueError(f"edge ({u}, {v}) inside a simultaneous batch")
                if u not in state:
                    raise ValueError(f"neighbor {u} of {v} has not arrived")

    def to_json(self) -> list:
        return [[v, list(nbrs)] for v, nbrs in self.batch]


@dataclass
class AlgorithmDecision:
    """Nonnegative load added to edges ``(new vertex, old vertex)``."""

    increments: dict[tuple[int, int], float] = field(default_factory=dict)

    def total(self) -> float:
        return sum(self.increments.values())

    def to_json(self) -> list:
        return [[u, v, w] for (u, v), w in sorted(self.increments.items()) if w != 0.0]


class OnlineAlgorithm(Protocol):
    name: str

    def on_init(self, N: int, x: float) -> Sequence[float]:
        ...

    def on_arrival(self, event: ArrivalEvent, state: MatchState) -> AlgorithmDecision:
        ...


def apply_decision(state: MatchState, event: ArrivalEvent,
                   decision: AlgorithmDecision) -> MatchState:
    """Return the state after adding ``decision``'s loads.

    Raises UnknownEdge for load on an edge not revealed by ``event`` and
    InfeasibleDecision when a portion would exceed 1 (beyond ``TOL``).
    """
    revealed = event.revealed()
    x = dict(state._x)
    load = dict(state._load)
    for (u, v), inc in decision.increments.items():
        if (u, v) not in revealed:
            raise UnknownEdge(f"edge ({u}, {v}) was not revealed by this event")
        if inc < 0:
            raise InfeasibleDecision(f"negative increment {inc} on ({u}, {v})")
        if inc == 0:
            continue
        key = edge_key(u, v)
        load[key] += inc
        x[u] += inc
        x[v] += inc
    for v in {w for e in decision.increments for w in e}:
        if x[v] > 1.0 + TOL:
            raise InfeasibleDecision(f"vertex {v} would reach {x[v]:.12g} > 1")
    return MatchState(x, load, state._adj)


def average_portion(state: MatchState, S: Iterable[int]) -> float:
    members = list(S)
    if not members:
        raise EmptySet("average over an empty vertex set")
    return sum(state.x[v] for v in members) / len(members)


def conservation_residual(state: MatchState, initial: float = 0.0) -> float:
    """|sum_v x_v - 2 * sum_e load_e - initial|, where ``initial`` is mass assigned without edges."""
    return abs(sum(state.x.values()) - 2.0 * sum(state.edge_load.values()) - initial)
