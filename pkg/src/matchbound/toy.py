"""Four-vertex toy family: one edge, optionally followed by a pendant on each end.

An algorithm commits ``z`` to the first edge.  If nothing else arrives it
keeps ``z`` against an optimum of 1; if both pendants arrive it can add at
most ``1 - z`` on each, for ``2 - z`` against 2.  The guaranteed ratio is the
smaller of the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algorithms import greedy
from .errors import DomainError
from .model import AlgorithmDecision, ArrivalEvent, MatchState, apply_decision
from .oracle import OfflineGraph, max_matching


class FirstEdge:
    """Puts ``z`` on the very first edge, then behaves greedily."""

    def __init__(self, z: float):
        if not 0 <= z <= 1:
            raise DomainError("z must lie in [0, 1]")
        self.z = z
        self.name = f"first-edge:{z:g}"
        self._rest = greedy()
        self._used = False

    def on_init(self, N, x):
        return self._rest.on_init(N, x)

    def on_arrival(self, event: ArrivalEvent, state: MatchState) -> AlgorithmDecision:
        if not self._used and any(nbrs for _, nbrs in event.batch):
            self._used = True
            u, nbrs = next((u, nb) for u, nb in event.batch if nb)
            return AlgorithmDecision({(u, nbrs[0]): self.z} if self.z > 0 else {})
        return self._rest.on_arrival(event, state)


_EDGE = [(0, ()), (1, (0,))]
_PENDANTS = [(2, (0,)), (3, (1,))]
_COLORS = (0, 1, 1, 0)


def play(alg, with_pendants: bool) -> tuple[float, int]:
    """Run ``alg`` on the short or long toy instance; returns (ALG, OPT)."""
    state = MatchState()
    for u, nbrs in _EDGE + (_PENDANTS if with_pendants else []):
        event = ArrivalEvent(((u, nbrs),), simultaneous=False)
        state = state.with_arrivals(event)
        state = apply_decision(state, event, alg.on_arrival(event, state))
    n = len(state)
    opt = max_matching(OfflineGraph(n, _COLORS[:n], tuple(sorted(state.edges))))
    return 0.5 * sum(state.x.values()), opt


def toy_ratio(z: float) -> tuple[float, float]:
    """(short-instance ratio, long-instance ratio) for first-edge level ``z``."""
    short, opt_s = play(FirstEdge(z), False)
    long_, opt_l = play(FirstEdge(z), True)
    return short / opt_s, long_ / opt_l


@dataclass
class ToySweep:
    z: np.ndarray
    short: np.ndarray
    long: np.ndarray
    best_z: float
    best_ratio: float
    crossing_z: Fraction
    crossing_ratio: Fraction

    @property
    def ratio(self) -> np.ndarray:
        return np.minimum(self.short, self.long)


def _affine_crossing(z0, z1, s0, s1, l0, l1) -> tuple[Fraction, Fraction]:
    # both branch ratios are affine in z, so the secants through two samples are exact
    z0, z1 = Fraction(z0).limit_denominator(10**9), Fraction(z1).limit_denominator(10**9)
    s0, s1, l0, l1 = (Fraction(v).limit_denominator(10**9) for v in (s0, s1, l0, l1))
    ds, dl = (s1 - s0) / (z1 - z0), (l1 - l0) / (z1 - z0)
    z = z0 + (l0 - s0) / (ds - dl)
    return z, s0 + ds * (z - z0)


def sweep(step: float = 1e-3) -> ToySweep:
    """Evaluate every first-edge level on a grid, then locate the exact crossing."""
    m = round(1.0 / step)
    z = np.linspace(0.0, 1.0, m + 1)
    pairs = np.array([toy_ratio(float(zi)) for zi in z])
    short, long_ = pairs[:, 0], pairs[:, 1]
    ratio = np.minimum(short, long_)
    i = int(np.argmax(ratio))
    j = i + 1 if i + 1 <= m and short[i] < long_[i] else i - 1
    lo, hi = sorted((i, j))
    cz, cr = _affine_crossing(z[lo], z[hi], short[lo], short[hi], long_[lo], long_[hi])
    return ToySweep(z, short, long_, float(z[i]), float(ratio[i]), cz, cr)
