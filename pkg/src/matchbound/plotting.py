"""Figures written next to the CSV/JSON reports (headless, byte-stable)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_METADATA = {".png": {"Software": None}, ".svg": {"Date": None, "Creator": None},
             ".pdf": {"CreationDate": None, "Producer": None, "Creator": None}}


def _save(fig, path) -> Path:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in _METADATA:
        plt.close(fig)
        raise ValueError(f"unsupported figure format {suffix!r}; use .png, .svg or .pdf")
    with plt.rc_context({"svg.hashsalt": "matchbound"}):
        fig.savefig(path, metadata=_METADATA[suffix], dpi=100)
    plt.close(fig)
    return path


def objective_figure(k, values, k_star, gamma_star, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(k, values, lw=1.5)
    ax.axvline(k_star, color="grey", ls=":")
    ax.plot([k_star], [gamma_star], "o", color="C3")
    ax.set_xlabel("k")
    ax.set_ylabel("ratio")
    ax.set_title(f"max {gamma_star:.6f} at k = {k_star:.6f}")
    return _save(fig, path)


def f_grids_figure(grids, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for g in grids:
        ax.plot(g.params.x, g.values, lw=1, label=f"n={g.n}")
    ax.axhline(0.0, color="black", lw=0.5)
    p = grids[0].params
    ax.set_xlabel("x")
    ax.set_ylabel("F_n(x)")
    ax.set_title(f"eps={p.eps:g}, gamma={p.gamma:.6g}")
    ax.legend(fontsize=7, ncol=2)
    return _save(fig, path)


def frontier_figure(f, path) -> Path:
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    left.plot(f.y, f.H, lw=1.5)
    left.set_xlabel("y")
    left.set_ylabel("H(y)")
    right.plot(f.x, f.G, label="G")
    right.plot(f.x, f.g, label="g")
    right.plot(f.x, f.a, label="a")
    right.set_xlabel("x")
    right.legend()
    fig.suptitle(f"gamma={f.constants.gamma:.6f}, k={f.constants.k:.6f}")
    return _save(fig, path)


def levels_figure(levels, counts, path, title: str = "") -> Path:
    """Distribution of final matched portions, weighted by multiplicity."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(np.asarray(levels, float), bins=50, range=(0.0, 1.0),
            weights=np.asarray(counts, float))
    ax.set_xlabel("matched portion")
    ax.set_ylabel("vertices")
    ax.set_title(title)
    return _save(fig, path)
