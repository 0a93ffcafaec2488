"""Matplotlib renderings of the report tables, saved next to the CSVs."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def plot_minimal_hidden_units(minima: dict, fits: dict, path) -> str:
    """Minimal hidden-unit count vs system size, one series per field ratio.

    ``minima`` maps (N, h_over_J) to the minimal count (None if the grid
    was exhausted); ``fits`` maps h_over_J to a LinearFit drawn as a line.
    """
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    plotted = False
    for ratio in sorted({ratio for _, ratio in minima}):
        pts = sorted(
            (n, val) for (n, r), val in minima.items() if r == ratio and val is not None
        )
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, "o", label=f"h/J = {ratio:g}")
            plotted = True
        fit = fits.get(ratio)
        if fit is not None and pts:
            grid = np.linspace(min(xs), max(xs), 50)
            ax.plot(grid, fit.slope * grid + fit.intercept, "--", color="gray", lw=1)
    ax.set_xlabel("system size N")
    ax.set_ylabel("minimal hidden units")
    ax.grid(alpha=0.3)
    if plotted:
        ax.legend(fontsize=8)
    return _save(fig, path)


def plot_sample_complexity(minima: dict, path) -> str:
    """Mean minimal training-set size vs system size, per field ratio."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    plotted = False
    for ratio in sorted({ratio for _, ratio in minima}):
        pts = sorted(
            (n, val) for (n, r), val in minima.items() if r == ratio and val is not None
        )
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, "s-", label=f"h/J = {ratio:g}")
            plotted = True
    ax.set_xlabel("system size N")
    ax.set_ylabel("minimal training samples M")
    ax.grid(alpha=0.3)
    if plotted:
        ax.legend(fontsize=8)
    return _save(fig, path)


def plot_weight_spectrum(magnitudes: np.ndarray, path) -> str:
    """Sorted weight magnitudes on a log scale (zeros drawn at the floor)."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    mags = np.asarray(magnitudes, dtype=float)
    positive = mags[mags > 0]
    floor = positive.min() / 10 if positive.size else 1e-12
    ax.semilogy(np.arange(1, mags.size + 1), np.maximum(mags, floor), ".-", ms=4)
    ax.set_xlabel("rank")
    ax.set_ylabel("|W|")
    ax.grid(alpha=0.3, which="both")
    return _save(fig, path)


def plot_bias_ratios(alpha: np.ndarray, beta: np.ndarray, path) -> str:
    """Per-unit bias ratios with the -2 identity line for reference."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(np.arange(alpha.size), alpha, "o", label="visible ratios")
    ax.plot(np.arange(beta.size), beta, "s", label="hidden ratios")
    ax.axhline(-2.0, color="k", ls="--", lw=1, label="identity value -2")
    ax.set_xlabel("unit index")
    ax.set_ylabel("weight-sum / bias")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_prune_history(iterations, path) -> str:
    """Surviving weight count and achieved epsilon per prune iteration."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    steps = [it.iteration for it in iterations]
    weights = [it.weights_remaining for it in iterations]
    eps = [it.epsilon for it in iterations]
    passed = [it.passed for it in iterations]
    colors = ["tab:blue" if ok else "tab:red" for ok in passed]
    ax.scatter(steps, weights, c=colors, zorder=3)
    ax.plot(steps, weights, color="tab:blue", alpha=0.5)
    ax.set_xlabel("prune iteration")
    ax.set_ylabel("non-zero weights", color="tab:blue")
    twin = ax.twinx()
    twin.semilogy(steps, eps, "x--", color="tab:orange")
    twin.set_ylabel("epsilon", color="tab:orange")
    ax.grid(alpha=0.3)
    return _save(fig, path)
