"""Adversarial instance generator played against an online algorithm, vertex by vertex.

Active vertices are kept in partitions of mutually non-adjacent vertices
sharing one neighbor set.  With ``k > 1`` steps left, a partition ``A`` is met
by ``eps*|A|`` new vertices ``B`` adjacent to all of ``A``.  If the algorithm
matched ``a*|B|`` on those edges, the adversary compares (with ``F_{k-1}``)

    aggressive:    F(x + eps*a) + eps*F(a)
    conservative:  (1-eps)*F(x + eps*a) + eps*(((1+eps)*a + x)/2 - gamma)

and on the aggressive branch (first <= second) keeps ``A`` and ``B`` as two
partitions; otherwise it retires ``B`` together with the ``|B|`` least matched
vertices of ``A``.  With one step left every partition gets ``|A|`` new
neighbors and everything is retired in matched pairs.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .errors import BadInitialization, ConfigError, StructureViolation
from .frecursion import FGrid, FParams, branch_expressions, f_grid, f_sequence
from .model import (TOL, AlgorithmDecision, ArrivalEvent, MatchState,
                    apply_decision, average_portion)

WHITE, BLACK = 0, 1


@dataclass(frozen=True)
class AdversaryParams:
    n: int
    N: int
    x0: float
    fparams: FParams

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        unit = self.fparams.inv_eps ** self.n
        if self.N <= 0 or self.N % unit:
            raise ConfigError(f"N={self.N} must be a positive multiple of (1/eps)^n = {unit}")
        if not 0 <= self.x0 <= 1:
            raise ConfigError(f"x0 must lie in [0, 1], got {self.x0}")

    @classmethod
    def minimal(cls, n: int, fparams: FParams, x0: float = 0.0) -> AdversaryParams:
        return cls(n, fparams.inv_eps ** n, x0, fparams)

    @property
    def eps(self) -> float:
        return self.fparams.eps

    @property
    def gamma(self) -> float:
        return self.fparams.gamma


@dataclass
class Partition:
    members: list[int]
    color: int
    steps_remaining: int
    pid: int = -1


@dataclass
class StepRecord:
    partition: int
    steps_remaining: int
    size_a: int
    size_b: int
    x_before: float
    x_after: float
    a: float
    branch: str
    a_snapped: float | None = None
    expr_aggressive: float | None = None
    expr_conservative: float | None = None
    new_partition: int | None = None


@dataclass
class Fragment:
    """Everything one partition step adds to the transcript."""

    events: list[ArrivalEvent]
    decision: AlgorithmDecision
    record: StepRecord
    deactivations: list[tuple[int, int]]
    partitions: list[Partition]
    new_ids: list[int] = field(default_factory=list)
    new_color: int = BLACK


@dataclass
class Transcript:
    params: AdversaryParams
    algorithm: str
    colors: dict[int, int] = field(default_factory=dict)
    initial: list[float] = field(default_factory=list)
    events: list[ArrivalEvent] = field(default_factory=list)
    decisions: list[AlgorithmDecision] = field(default_factory=list)
    steps: list[StepRecord] = field(default_factory=list)
    deactivations: list[tuple[int, int]] = field(default_factory=list)
    v_alg: float = 0.0
    v_alg_lazy: float = 0.0
    alg_total: float = 0.0
    opt_size: int = 0
    bound: float = 0.0

    @property
    def ratio(self) -> float:
        return self.alg_total / self.opt_size if self.opt_size else 1.0

    def to_dict(self) -> dict:
        p = self.params
        return {
            "params": {"n": p.n, "N": p.N, "eps": p.eps, "gamma": p.gamma,
                       "x0": p.x0, "grid_step": p.fparams.grid_step},
            "algorithm": self.algorithm,
            "initial": self.initial,
            "events": [e.to_json() for e in self.events],
            "decisions": [d.to_json() for d in self.decisions],
            "branches": [asdict(s) for s in self.steps],
            "deactivations": [list(pair) for pair in self.deactivations],
            "colors": [self.colors[v] for v in sorted(self.colors)],
            "v_alg": self.v_alg,
            "alg_total": self.alg_total,
            "opt_size": self.opt_size,
            "ratio": self.ratio,
            "bound": self.bound,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=False)


def _check_portions(portions, N: int, x0: float) -> list[float]:
    portions = [float(p) for p in portions]
    if len(portions) != N:
        raise BadInitialization(f"expected {N} portions, got {len(portions)}")
    if any(p < -TOL or p > 1 + TOL for p in portions):
        raise BadInitialization("initial portions must lie in [0, 1]")
    mean = math.fsum(portions) / N
    if abs(mean - x0) > 1e-9:
        raise BadInitialization(f"initial mean {mean:.12g} differs from {x0}")
    return portions


def initialize(params: AdversaryParams, alg, transcript: Transcript | None = None):
    """N isolated vertices in one white partition, portions chosen by the algorithm.

    With ``x0 = 0`` the vertices arrive one at a time with no edges, as in
    the plain online model; otherwise ``alg.on_init`` distributes the mass.
    """
    N = params.N
    state = MatchState()
    if params.x0 == 0:
        for v in range(N):
            event = ArrivalEvent(((v, ()),), simultaneous=False)
            state = state.with_arrivals(event)
            decision = alg.on_arrival(event, state)
            state = apply_decision(state, event, decision)
            if transcript is not None:
                transcript.events.append(event)
                transcript.decisions.append(decision)
    else:
        portions = _check_portions(alg.on_init(N, params.x0), N, params.x0)
        state = state.with_portions(dict(enumerate(portions)))
    if transcript is not None:
        transcript.initial = [state.x[v] for v in range(N)]
        transcript.colors.update({v: WHITE for v in range(N)})
    return state, Partition(list(range(N)), WHITE, params.n, 0)


def _arrive(state: MatchState, partition: Partition, size: int, alg, serialize: bool):
    start = state.next_id()
    new_ids = list(range(start, start + size))
    event = ArrivalEvent.block(new_ids, partition.members)
    events = event.serialized() if serialize else [event]
    merged: dict[tuple[int, int], float] = {}
    for ev in events:
        state = state.with_arrivals(ev)
        decision = alg.on_arrival(ev, state)
        state = apply_decision(state, ev, decision)
        for key, w in decision.increments.items():
            merged[key] = merged.get(key, 0.0) + w
    return state, events, AlgorithmDecision(merged), new_ids


def base_step(state: MatchState, partition: Partition, alg, serialize: bool = False):
    """Last step: |A| new vertices complete to A, then retire A and B pairwise."""
    x_before = average_portion(state, partition.members)
    size = len(partition.members)
    state, events, decision, new_ids = _arrive(state, partition, size, alg, serialize)
    record = StepRecord(partition.pid, 1, size, size, x_before,
                        average_portion(state, partition.members),
                        decision.total() / size, "base")
    pairs = list(zip(partition.members, new_ids))
    return state, Fragment(events, decision, record, pairs, [], new_ids, 1 - partition.color)


def snap_down(a: float, grid_step: float) -> float:
    return math.floor(a / grid_step + 1e-9) * grid_step


def recursive_step(state: MatchState, partition: Partition, alg, f_prev: FGrid,
                   serialize: bool = False):
    """One step with ``k > 1`` steps left; returns the surviving/new partitions."""
    fp = f_prev.params
    k = partition.steps_remaining
    members = partition.members
    size_b = len(members) // fp.inv_eps
    x_before = average_portion(state, members)
    state, events, decision, new_ids = _arrive(state, partition, size_b, alg, serialize)
    a = decision.total() / size_b
    a_snap = snap_down(a, fp.grid_step)
    agg, con = branch_expressions(f_prev, x_before, a_snap, fp.eps, fp.gamma)
    agg, con = float(agg), float(con)
    record = StepRecord(partition.pid, k, len(members), size_b, x_before,
                        average_portion(state, members), a, "",
                        a_snap, agg, con)
    if agg <= con:
        record.branch = "aggressive"
        out = [Partition(list(members), partition.color, k - 1, partition.pid),
               Partition(new_ids, 1 - partition.color, k - 1)]
        pairs = []
    else:
        record.branch = "conservative"
        # least matched first, ties by ascending id
        ranked = sorted(members, key=lambda v: (state.x[v], v))
        retired = ranked[:size_b]
        gone = set(retired)
        out = [Partition([v for v in members if v not in gone], partition.color, k - 1,
                         partition.pid)]
        pairs = list(zip(new_ids, retired))
    return state, Fragment(events, decision, record, pairs, out, new_ids, 1 - partition.color)


def run_construction(params: AdversaryParams, alg, serialize: bool = False,
                     grids: list[FGrid] | None = None):
    """Play the full n-step construction; returns ``(transcript, final_state)``."""
    fp = params.fparams
    grids = grids or f_sequence(fp, max(params.n - 1, 1))
    tr = Transcript(params, getattr(alg, "name", type(alg).__name__))
    state, root = initialize(params, alg, tr)
    active = [root]
    next_pid = 1
    gamma = fp.gamma
    lazy = []

    def absorb(frag: Fragment):
        tr.events.extend(frag.events)
        tr.decisions.append(frag.decision)
        tr.steps.append(frag.record)
        tr.deactivations.extend(frag.deactivations)
        # B takes the color opposite to its partition A
        tr.colors.update({v: frag.new_color for v in frag.new_ids})
        for u, v in frag.deactivations:
            lazy.append(0.5 * (state.x[u] + state.x[v] - 2 * gamma))

    for k in range(params.n, 1, -1):
        nxt = []
        for part in active:
            state, frag = recursive_step(state, part, alg, grids[k - 2], serialize)
            for p in frag.partitions:
                if p.pid < 0:
                    p.pid = next_pid
                    frag.record.new_partition = p.pid
                    next_pid += 1
            absorb(frag)
            nxt.extend(frag.partitions)
        active = nxt
    for part in active:
        state, frag = base_step(state, part, alg, serialize)
        absorb(frag)

    xs = [state.x[v] for v in range(len(state))]
    tr.alg_total = 0.5 * math.fsum(xs)
    tr.v_alg = 0.5 * (math.fsum(xs) - gamma * len(xs))
    tr.v_alg_lazy = math.fsum(lazy)
    tr.opt_size = len(xs) // 2
    tr.bound = f_grid(fp, params.n).at(params.x0) * params.N
    return tr, state


def check_structure(transcript: Transcript, state: MatchState) -> dict[str, bool]:
    """Verify bipartiteness, the perfect matching of retired pairs,
    partition-size divisibility and feasibility; raise on the first failure."""
    colors = transcript.colors
    for u, v in state.edges:
        if colors.get(u) is None or colors.get(v) is None or colors[u] == colors[v]:
            raise StructureViolation("bipartite", f"edge ({u}, {v}) joins equal colors")
    seen: set[int] = set()
    edges = state.edges
    for u, v in transcript.deactivations:
        if u in seen or v in seen:
            raise StructureViolation("perfect-matching", f"vertex in two pairs: ({u}, {v})")
        if (min(u, v), max(u, v)) not in edges:
            raise StructureViolation("perfect-matching", f"pair ({u}, {v}) is not an edge")
        seen.update((u, v))
    if len(seen) != len(state):
        raise StructureViolation("perfect-matching",
                                 f"{len(state) - len(seen)} vertices never retired")
    inv = transcript.params.fparams.inv_eps
    for rec in transcript.steps:
        if rec.size_a % inv ** rec.steps_remaining:
            raise StructureViolation(
                "divisibility",
                f"partition of size {rec.size_a} with {rec.steps_remaining} steps left")
    worst = max(state.x.values())
    if worst > 1 + TOL:
        raise StructureViolation("feasibility", f"max portion {worst:.12g} > 1")
    return {"bipartite": True, "perfect-matching": True, "divisibility": True,
            "feasibility": True}
