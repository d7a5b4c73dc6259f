"""Figures written next to the CSV tables (non-interactive backend)."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_backbone", "plot_frc", "plot_trajectory"]


def _runs(mask):
    """(start, stop) index pairs of constant runs, overlapping by one point
    so that the plotted line has no holes."""
    mask = np.asarray(mask, dtype=bool)
    if mask.size == 0:
        return []
    cuts = np.flatnonzero(np.diff(mask.astype(int))) + 1
    edges = np.concatenate([[0], cuts, [mask.size]])
    return [(a, min(b + 1, mask.size), bool(mask[a])) for a, b in zip(edges[:-1], edges[1:])]


def _stability_lines(ax, x, y, stable, label=None, color="C0"):
    first = True
    for a, b, s in _runs(stable):
        ax.plot(x[a:b], y[a:b], "-" if s else "--", color=color if s else "C3", lw=1.4,
                label=label if first else None)
        first = False


def plot_backbone(path, branches, linear_frequencies=(), limits=()):
    """Frequency against log10 energy; ``branches`` holds
    ``(label, omega, log10_energy, stable)`` tuples."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for k, (label, om, lam, st) in enumerate(branches):
        _stability_lines(ax, np.asarray(om), np.asarray(lam), st, label=label, color=f"C{k % 3}")
    for wl in linear_frequencies:
        ax.axvline(wl, color="0.6", lw=0.8, ls=":")
    for wc in limits:
        ax.axvline(wc, color="0.3", lw=0.8, ls="-.")
    ax.set_xlabel("frequency")
    ax.set_ylabel("log10 energy")
    ax.grid(alpha=0.3)
    if branches:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)
    return Path(path)


def plot_frc(path, curves, backbone=None):
    """Response amplitude against excitation frequency; dashed where unstable.

    ``curves`` holds ``(label, Omega, amplitude, stable)``; ``backbone`` an
    optional ``(omega, amplitude)`` pair drawn for reference.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for k, (label, Om, amp, st) in enumerate(curves):
        _stability_lines(ax, np.asarray(Om), np.asarray(amp), st, label=label, color=f"C{k % 3}")
    if backbone is not None:
        ax.plot(backbone[0], backbone[1], color="k", lw=0.8, label="backbone")
    ax.set_xlabel("excitation frequency")
    ax.set_ylabel("max |q1|")
    ax.grid(alpha=0.3)
    if curves:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)
    return Path(path)


def plot_trajectory(path, t, q, labels=None):
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    q = np.atleast_2d(np.asarray(q).T).T
    for j in range(q.shape[1]):
        ax.plot(t, q[:, j], lw=1.0, label=labels[j] if labels else f"q{j + 1}")
    ax.set_xlabel("time")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)
    return Path(path)
