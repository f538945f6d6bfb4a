"""Figure rendering for the command-line report paths.

Every figure helper takes the already-computed report object and a target
path, renders with the Agg backend, and returns the path.  Figures
accompany the CSV outputs; they are presentation artifacts, so nothing here
feeds back into any computation.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

GOLDEN = (math.sqrt(5) - 1.0) / 2.0


def _new_fig(width=6.4):
    fig, ax = plt.subplots(figsize=(width, width * GOLDEN))
    return fig, ax


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_coefficients(reports, path, title):
    fig, ax = _new_fig()
    names = [r.name for r in reports]
    values = [r.value for r in reports]
    ax.bar(range(len(names)), values, color="#4878d0")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_ylabel("value")
    ax.set_title(title)
    return _finish(fig, path)


def plot_decay(table, path, title):
    fig, ax = _new_fig()
    n = table.column("n")
    for name, marker in (("beta", "o"), ("phi", "s"), ("psi", "^")):
        vals = table.column(name)
        finite = np.isfinite(vals) & (vals > 0)
        if finite.any():
            ax.semilogy(n[finite], vals[finite], marker + "-", label=name)
    pred = table.column("predicted_beta")
    finite = np.isfinite(pred) & (pred > 0)
    if finite.any():
        ax.semilogy(n[finite], pred[finite], "k--", label="predicted beta")
    ax.set_xlabel("steps n")
    ax.set_ylabel("coefficient")
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _finish(fig, path)


def plot_region_map(rmap, path, title):
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 4.0))
    for ax, mask, sub in zip(axes, (rmap.one_step_zero, rmap.two_step_zero),
                             ("one step", "two steps")):
        ax.imshow(mask.T, origin="lower", extent=(0, 1, 0, 1), cmap="Greys",
                  vmin=0, vmax=1, interpolation="nearest")
        ax.set_title(f"{sub}: zero-density cells")
        ax.set_xlabel("current state")
        ax.set_ylabel("next state")
    fig.suptitle(title)
    return _finish(fig, path)


def plot_chain(sample, path, title):
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.2))
    n_show = min(len(sample.values), 2000)
    axes[0].plot(sample.values[:n_show], lw=0.5)
    axes[0].set_xlabel("step")
    axes[0].set_ylabel("state")
    axes[0].set_title(f"first {n_show} steps")
    axes[1].hist(sample.values, bins=40, density=True, color="#4878d0")
    axes[1].axhline(1.0, color="k", ls="--", lw=0.8)
    axes[1].set_xlabel("state")
    axes[1].set_title("marginal histogram")
    fig.suptitle(title)
    return _finish(fig, path)


def plot_surface_pair(x, y, closed_vals, quad_vals, path, title):
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.4))
    extent = (x.min(), x.max(), y.min(), y.max())
    for ax, vals, sub in zip(axes, (closed_vals, quad_vals, np.abs(closed_vals - quad_vals)),
                             ("closed form", "quadrature", "abs difference")):
        im = ax.imshow(vals.T, origin="lower", extent=extent, aspect="auto",
                       cmap="viridis" if sub != "abs difference" else "magma")
        ax.set_title(sub, fontsize=9)
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.suptitle(title)
    return _finish(fig, path)


def plot_identity_errors(report, path, title):
    fig, ax = _new_fig()
    labels = [f"{r.kind}:{r.coefficient}" for r in report.rows]
    errors = [r.error for r in report.rows]
    ax.bar(range(len(labels)), errors, color="#d65f5f")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("|measured - predicted|")
    if max(errors) > 0:
        ax.set_yscale("log")
    ax.set_title(title)
    return _finish(fig, path)


def plot_validation(model, report, path, n=64):
    """Heatmap of cell increments; negative cells are axiom violations."""
    from .numerics import unit_nodes

    x = unit_nodes(n)
    U, V = np.meshgrid(x, x, indexing="ij")
    C = np.asarray(model.cdf(U, V), dtype=float)
    inc = np.diff(np.diff(C, axis=0), axis=1)
    fig, ax = _new_fig()
    im = ax.imshow(inc.T * n * n, origin="lower", extent=(0, 1, 0, 1), cmap="viridis")
    fig.colorbar(im, ax=ax, label="cell mass x n^2")
    ax.set_title(f"{report.model}: cell increments ({'pass' if report.passed else 'FAIL'})")
    return _finish(fig, path)
