"""Optimal competitive ratio, the closed-form potential H and the water-filling frontier.

For a stretch parameter ``k >= 1`` the achievable ratio is

    gamma(k) = 1 / (((k+1)/2)^((k+1)/2k) * ((k-1)/2)^((k-1)/2k) + 1)

and the optimum over ``k`` is about 0.526.  At a pair ``(gamma, k)`` the potential

    H(y) = y + c * ((r1 - y)/r1)^alpha1 * ((y - r2)/(-r2))^alpha2,    0 <= y <= gamma

has inverse ``G``; ``g = G'`` and the stopping threshold
``a(x) = min(1, (gamma - G(x)) / (1 - g(x)))`` drive the water-filling algorithm.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NonInvertible, SingularDenominator

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def gamma_objective(k: float) -> float:
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    hi = ((k + 1) / 2) ** ((k + 1) / (2 * k))
    # 0^0 limit at k = 1
    lo = 1.0 if k == 1 else ((k - 1) / 2) ** ((k - 1) / (2 * k))
    return 1.0 / (hi * lo + 1.0)


def golden_max(f, lo: float, hi: float, tol: float) -> float:
    """Maximizer of a unimodal ``f`` on ``[lo, hi]`` to within ``tol``."""
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    return (lo + hi) / 2


def compute_gamma_star(tol: float = 1e-6) -> tuple[float, float]:
    """Return ``(k_star, gamma_star)`` maximizing :func:`gamma_objective`."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    hi = 4.0
    while gamma_objective(hi) >= gamma_objective(hi / 2):
        hi *= 2
    # a quarter of tol keeps k* strictly inside the tol-neighbourhood test
    k = golden_max(gamma_objective, 1.0, hi, tol / 4)
    return k, gamma_objective(k)


@dataclass(frozen=True)
class FrontierConstants:
    gamma: float
    k: float
    r1: float
    r2: float
    alpha1: float
    alpha2: float
    c: float

    @classmethod
    def from_gamma_k(cls, gamma: float, k: float) -> FrontierConstants:
        if not 0 < gamma < 1:
            raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
        if k < 1:
            raise DomainError(f"k must be >= 1, got {k}")
        return cls(
            gamma=gamma,
            k=k,
            r1=gamma * (1 + k) / 2,
            r2=gamma * (1 - k) / 2,
            alpha1=(k - 1) / (2 * k),
            alpha2=(k + 1) / (2 * k),
            c=(k * k - 1) * gamma * gamma / (4 * (1 - gamma)),
        )

    @property
    def c_from_roots(self) -> float:
        return -self.r1 * self.r2 / (1 - self.gamma)

    def partial_fractions(self, y):
        """alpha1/(y - r1) + alpha2/(y - r2); equals (gamma - y)/(c(1-gamma) + gamma*y - y^2)."""
        y = np.asarray(y, dtype=float)
        return self.alpha1 / (y - self.r1) + self.alpha2 / (y - self.r2)

    def quadratic(self, y):
        y = np.asarray(y, dtype=float)
        return self.c * (1 - self.gamma) + self.gamma * y - y * y


def _check_y(y, gamma):
    y = np.asarray(y, dtype=float)
    if np.any(y < -1e-12) or np.any(y > gamma + 1e-12):
        raise DomainError(f"y must lie in [0, {gamma}]")
    return np.clip(y, 0.0, gamma)


def h_closed_form(y, constants: FrontierConstants):
    """Evaluate H at ``y`` (scalar or array) in ``[0, gamma]``."""
    y = _check_y(y, constants.gamma)
    if constants.k == 1:
        return y + 0.0
    k = constants
    out = y + k.c * ((k.r1 - y) / k.r1) ** k.alpha1 * ((y - k.r2) / -k.r2) ** k.alpha2
    return out if out.ndim else float(out)


def h_derivative(y, constants: FrontierConstants):
    y = _check_y(y, constants.gamma)
    if constants.k == 1:
        return np.ones_like(y)
    return 1.0 + (h_closed_form(y, constants) - y) * constants.partial_fractions(y)


@dataclass(frozen=True)
class FrontierFunctions:
    """Tables of H on ``y`` and of G, g, a on the unit grid ``x``."""

    constants: FrontierConstants
    y: np.ndarray
    H: np.ndarray
    x: np.ndarray
    G: np.ndarray
    g: np.ndarray
    a: np.ndarray
    grid_step: float

    def with_threshold(self, a) -> FrontierFunctions:
        return replace(self, a=np.asarray(a, dtype=float))

    def tables_csv(self) -> tuple[str, str]:
        """CSV text of ``(y, H)`` and ``(x, G, g, a)``, 12 significant digits."""
        h_buf, x_buf = io.StringIO(), io.StringIO()
        w = csv.writer(h_buf, lineterminator="\n")
        w.writerow(["y", "H"])
        w.writerows([f"{yy:.12g}", f"{hh:.12g}"] for yy, hh in zip(self.y, self.H))
        w = csv.writer(x_buf, lineterminator="\n")
        w.writerow(["x", "G", "g", "a"])
        w.writerows([f"{v:.12g}" for v in row]
                    for row in zip(self.x, self.G, self.g, self.a))
        return h_buf.getvalue(), x_buf.getvalue()


def unit_grid(grid_step: float) -> np.ndarray:
    m = round(1.0 / grid_step)
    if m < 1 or abs(m * grid_step - 1.0) > 1e-9:
        raise DomainError(f"grid_step {grid_step} must divide 1")
    return np.linspace(0.0, 1.0, m + 1)


def _invert(constants: FrontierConstants, targets: np.ndarray) -> np.ndarray:
    lo = np.zeros_like(targets)
    hi = np.full_like(targets, constants.gamma)
    for _ in range(64):
        mid = (lo + hi) / 2
        below = h_closed_form(mid, constants) <= targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return (lo + hi) / 2


def build_frontier(gamma: float, k: float, grid_step: float) -> FrontierFunctions:
    """Tabulate H, G, g and the threshold a at ``(gamma, k)``.

    G is pinned to 0 below ``c = H(0)`` and continued with slope 1 above
    ``H(gamma)`` when that is below 1.  ``g`` is the derivative of G at the
    grid nodes, taken through the inverse-function rule ``g = 1 / H'(G)``.
    """
    const = FrontierConstants.from_gamma_k(gamma, k)
    x = unit_grid(grid_step)
    ny = max(2, round(gamma / grid_step))
    y = np.linspace(0.0, gamma, ny + 1)
    H = h_closed_form(y, const)
    if np.any(np.diff(H) <= 0):
        raise NonInvertible(f"H is not strictly increasing at gamma={gamma}, k={k}")

    top = float(H[-1])
    G = np.zeros_like(x)
    g = np.zeros_like(x)
    mid = (x >= const.c) & (x <= top)
    G[mid] = _invert(const, x[mid])
    g[mid] = 1.0 / h_derivative(G[mid], const)
    over = x > top
    G[over] = gamma + (x[over] - top)
    g[over] = 1.0
    g = np.clip(g, 0.0, 1.0)

    num = gamma - G
    den = 1.0 - g
    a = np.empty_like(x)
    flat = den <= 1e-12
    # 0/0 convention where g reaches 1 with G at gamma
    a[flat] = np.where(num[flat] <= 1e-12, 0.0, 1.0)
    a[~flat] = num[~flat] / den[~flat]
    a = np.clip(a, 0.0, 1.0)
    return FrontierFunctions(const, y, H, x, G, g, a, grid_step)


def optimal_frontier(grid_step: float = 1e-4, tol: float = 1e-6) -> FrontierFunctions:
    k, gamma = compute_gamma_star(tol)
    return build_frontier(gamma, k, grid_step)


class FactReport(NamedTuple):
    max_violation_1: float
    max_violation_2: float
    certified_gamma: float


def _integral_to(x: np.ndarray, g: np.ndarray, cum: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Exact integral over [0, t] of the piecewise-linear interpolant of g."""
    h = x[1] - x[0]
    i = np.clip((t / h).astype(int), 0, len(x) - 2)
    s = t - x[i]
    return cum[i] + g[i] * s + (g[i + 1] - g[i]) * s * s / (2 * h)


def verify_fact_tz(f: FrontierFunctions, gamma: float | None = None) -> FactReport:
    """Evaluate both water-filling sufficiency inequalities on every grid node.

    Condition 1: a(1 - g) >= int_0^a g.  Condition 2: a(1 - g) + int_0^x g >= gamma.
    A vertex at level 1 cannot be matched any further, so the threshold term
    is taken as 0 at x = 1 and condition 2 there reads int_0^1 g >= gamma.
    Violations are signed: positive means the inequality fails.
    """
    target = f.constants.gamma if gamma is None else gamma
    x, g = f.x, f.g
    a = np.clip(f.a, 0.0, 1.0).copy()
    a[-1] = 0.0
    h = x[1] - x[0]
    cum = np.concatenate([[0.0], np.cumsum((g[1:] + g[:-1]) * h / 2)])
    gain = a * (1.0 - g)
    v1 = float(np.max(_integral_to(x, g, cum, a) - gain))
    total = gain + cum
    certified = float(np.min(total))
    return FactReport(v1, float(target - certified), certified)


def h_fixed_point(H0, r: float, iterations: int = 1) -> np.ndarray:
    """Iterate ``H <- 1 - int_y^r H(r-z) / (H(r-z) - (r-z)) dz`` on a uniform grid over [0, r].

    ``H0`` holds values at ``linspace(0, r, len(H0))``; composite trapezoid.
    """
    H = np.asarray(H0, dtype=float).copy()
    w = np.linspace(0.0, r, len(H))
    step = w[1] - w[0]
    for _ in range(iterations):
        den = H - w
        if np.any(den <= 1e-12):
            i = int(np.argmax(den <= 1e-12))
            raise SingularDenominator(f"H(w) - w = {den[i]:.3g} at w = {w[i]:.6g}")
        f = H / den
        cum = np.concatenate([[0.0], np.cumsum((f[1:] + f[:-1]) * step / 2)])
        # int_y^r f(r - z) dz = int_0^{r-y} f(w) dw, and r - y_i is node m - i
        H = 1.0 - cum[::-1]
    return H
