"""Figure rendering for experiment reports.

Every CLI report path can drop a PNG next to its CSV.  These helpers take
the in-memory result rows rather than the serialized lines, so they stay
decoupled from the wire format.  The Agg backend is forced because the
package runs headless.
"""

from typing import Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import BenchRow, SweepRow, mean_errors

# log-axis stand-in for exact zeros so they stay visible
_FLOOR = 1e-17

_KIND_LABELS = {
    "sparse_gaussian": "sparse Gaussian",
    "dense_gaussian": "dense Gaussian",
    "bernoulli": "Bernoulli",
    "toeplitz": "Toeplitz",
    "partial_basis": "partial basis",
}


def _label(kind: str) -> str:
    return _KIND_LABELS.get(kind, kind)


def save_sweep_figure(rows: Sequence[SweepRow], path: str,
                      title: str = "Recovery error vs received samples",
                      ) -> None:
    """One line per matrix kind: mean relative error over M, log axis."""
    if not rows:
        raise ValueError("no rows to plot")
    means = mean_errors(rows)
    kinds = sorted({kind for kind, _ in means})
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for kind in kinds:
        ms = sorted(m for k, m in means if k == kind)
        errs = [max(means[(kind, m)], _FLOOR) for m in ms]
        ax.semilogy(ms, errs, marker="o", label=_label(kind))
    ax.set_xlabel("received samples M")
    ax.set_ylabel("mean relative error")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_canonical_figure(rows: Sequence[SweepRow], path: str,
                          title: str = "Canonical-sparse signal recovery",
                          ) -> None:
    """Median error bar per kind with the per-seed points overlaid."""
    if not rows:
        raise ValueError("no rows to plot")
    kinds = sorted({r.matrix_kind for r in rows})
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for i, kind in enumerate(kinds):
        errs = np.array([max(r.relative_error, _FLOOR) for r in rows
                         if r.matrix_kind == kind])
        ax.bar(i, float(np.median(errs)), width=0.6, alpha=0.5)
        jitter = np.linspace(-0.15, 0.15, errs.size)
        ax.plot(i + jitter, errs, linestyle="", marker=".", color="k",
                alpha=0.6)
    ax.set_yscale("log")
    ax.set_xticks(range(len(kinds)))
    ax.set_xticklabels([_label(k) for k in kinds])
    ax.set_ylabel("relative error (median bar, per-seed dots)")
    ax.set_title(title)
    ax.grid(True, axis="y", which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bench_figure(rows: Sequence[BenchRow], path: str,
                      title: str = "Construction cost",
                      ) -> None:
    """Two panels over N: median build time and storage footprint."""
    if not rows:
        raise ValueError("no rows to plot")
    kinds = sorted({r.kind for r in rows})
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    for kind in kinds:
        sub = sorted([r for r in rows if r.kind == kind], key=lambda r: r.n)
        ns = [r.n for r in sub]
        axes[0].loglog(ns, [r.duration_ns / 1e6 for r in sub], marker="o",
                       label=_label(kind))
        axes[1].loglog(ns, [r.storage_bytes / 1024.0 for r in sub],
                       marker="o", label=_label(kind))
    axes[0].set_xlabel("N")
    axes[0].set_ylabel("construction time (ms)")
    axes[1].set_xlabel("N")
    axes[1].set_ylabel("storage (KiB)")
    for ax in axes:
        ax.grid(True, which="both", alpha=0.3)
    axes[0].legend()
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_report_figure(
    entries: Sequence[Tuple[str, Optional[float], float, str]],
    path: str,
    title: str = "Empirical value vs bound",
) -> None:
    """Paired bars per entry: (label, empirical, bound, verdict).

    A missing empirical value (inconclusive certificate) renders as the
    verdict text instead of a bar.
    """
    if not entries:
        raise ValueError("no entries to plot")
    width = max(5.0, 0.9 * len(entries) + 2.0)
    fig, ax = plt.subplots(figsize=(width, 4.0))
    for x, (label, empirical, bound, verdict) in enumerate(entries):
        ax.bar(x - 0.18, max(bound, _FLOOR), width=0.34, color="tab:gray",
               alpha=0.7, label="bound" if x == 0 else None)
        if empirical is None:
            ax.annotate(verdict, (x + 0.18, _FLOOR * 10), rotation=90,
                        ha="center", va="bottom", fontsize=8)
        else:
            ax.bar(x + 0.18, max(empirical, _FLOOR), width=0.34,
                   color="tab:blue", label="empirical" if x == 0 else None)
    ax.set_yscale("log")
    ax.set_xticks(range(len(entries)))
    ax.set_xticklabels([e[0] for e in entries], rotation=30, ha="right",
                       fontsize=8)
    ax.set_title(title)
    ax.grid(True, axis="y", which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
