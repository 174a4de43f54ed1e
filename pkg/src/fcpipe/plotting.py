"""Figures written next to the textual reports.

Figures are built on bare ``Figure`` objects with the Agg canvas, so nothing
here touches pyplot's global state and the module is safe in batch jobs.
"""

from __future__ import annotations

import matplotlib as mpl
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
}

# PNG metadata would otherwise embed the matplotlib version string
_PNG_META = {"Software": None}


def _new_figure(width=4.0, height=3.6):
    fig = Figure(figsize=(width, height), dpi=120)
    FigureCanvasAgg(fig)
    return fig, fig.add_subplot(1, 1, 1)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_PNG_META)


@mpl.rc_context(STYLE)
def plot_roc(reports, path, names=None, mark_targets=True):
    """Step ROC curves of one or more reports, with the FPR read-out targets marked."""
    names = list(names) if names is not None else [r.name or f"arm{k + 1}" for k, r in enumerate(reports)]
    fig, ax = _new_figure()
    ax.plot([0, 1], [0, 1], color="0.75", lw=0.8, ls="--", zorder=0)
    for rep, name in zip(reports, names):
        fpr = [p[0] for p in rep.roc]
        tpr = [p[1] for p in rep.roc]
        ax.plot(fpr, tpr, drawstyle="default", lw=1.4,
                label=f"{name} (acc {rep.accuracy:.2f})")
    if mark_targets and reports:
        for f in sorted(reports[0].tpr_at_fpr):
            ax.axvline(f, color="0.85", lw=0.6, zorder=0)
    ax.set_xlim(-0.01, 1.01)
    ax.set_ylim(-0.01, 1.01)
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.set_aspect("equal")
    ax.legend(loc="lower right", frameon=False)
    _save(fig, path)
    return path


@mpl.rc_context(STYLE)
def plot_accuracy(reports, path, names=None):
    names = list(names) if names is not None else [r.name or f"arm{k + 1}" for k, r in enumerate(reports)]
    fig, ax = _new_figure(width=max(3.0, 1.2 * len(reports) + 1.5), height=3.0)
    xs = range(len(reports))
    ax.bar(xs, [r.accuracy for r in reports], yerr=[r.accuracy_dispersion for r in reports],
           color="0.55", capsize=3, width=0.6)
    ax.axhline(0.5, color="0.3", lw=0.8, ls=":")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=15, ha="right")
    ax.set_ylim(0, 1)
    ax.set_ylabel("LOOCV accuracy (± binomial SE)")
    _save(fig, path)
    return path


@mpl.rc_context(STYLE)
def plot_connectivity(cm, path, title=None):
    fig, ax = _new_figure(width=4.2, height=3.6)
    im = ax.imshow(cm.values, vmin=-1, vmax=1, cmap="RdBu_r", interpolation="nearest")
    fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
    if cm.n_regions <= 30:
        ax.set_xticks(range(cm.n_regions))
        ax.set_yticks(range(cm.n_regions))
        ax.set_xticklabels(cm.region_labels, rotation=90, fontsize=6)
        ax.set_yticklabels(cm.region_labels, fontsize=6)
    if title:
        ax.set_title(title)
    _save(fig, path)
    return path
