"""Delimited and graphical run summaries for the command line tool.

Figures use the Agg backend and go straight to files, so the tool works
on headless machines. Every renderer takes an explicit output path and
writes exactly one file; the caller decides where figures live relative
to the delimited output they accompany.
"""

from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from outcol.digraph import Digraph  # noqa: E402
from outcol.kpartition import AttemptStat  # noqa: E402

STATS_COLUMNS = ("attempt", "failing_vertices", "worst_deficit")


def write_stats_csv(path: str | Path, stats: Sequence[AttemptStat]) -> None:
    """One row per attempt of a partition run, header included."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STATS_COLUMNS)
        for s in stats:
            writer.writerow([s.attempt, s.failing_vertices, s.worst_deficit])


def render_attempt_trace(
    path: str | Path, stats: Sequence[AttemptStat], threshold: int
) -> None:
    """Per-attempt failure profile of a partition run.

    Bars count vertices still violating the degree demand after each
    attempt; the line tracks the worst per-vertex deficit. A run that
    succeeds on attempt j contributes a zero-height final bar.
    """
    attempts = [s.attempt for s in stats]
    failing = [s.failing_vertices for s in stats]
    deficits = [s.worst_deficit for s in stats]
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.bar(attempts, failing, color="#4878b0", label="failing vertices")
    ax.set_xlabel("attempt")
    ax.set_ylabel("failing vertices")
    ax2 = ax.twinx()
    ax2.plot(attempts, deficits, "o-", color="#c44e52", label="worst deficit")
    ax2.set_ylabel("worst deficit")
    ax.set_title(f"degree demand {threshold}, {len(stats)} attempt(s)")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_adjacency(path: str | Path, d: Digraph, title: str = "") -> None:
    """Adjacency matrix of a digraph as a black-and-white grid."""
    grid = [[1 if d.has_arc(u, v) else 0 for v in range(d.n)] for u in range(d.n)]
    fig, ax = plt.subplots(figsize=(3.6, 3.6))
    ax.matshow(grid, cmap="Greys", vmin=0, vmax=1)
    ax.set_xticks(range(d.n))
    ax.set_yticks(range(d.n))
    if title:
        ax.set_title(title, pad=14)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_scan_profile(
    path: str | Path, digraphs: Iterable[Digraph], title: str = ""
) -> None:
    """Arc-count and minimum-out-degree distributions of a scan result."""
    arcs = []
    mindeg = []
    for d in digraphs:
        arcs.append(d.arc_count())
        mindeg.append(d.min_out_degree())
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.0, 3.0))
    for ax, values, label in ((ax1, arcs, "arcs"), (ax2, mindeg, "min out-degree")):
        if values:
            lo, hi = min(values), max(values)
            ax.hist(values, bins=range(lo, hi + 2), color="#4878b0", rwidth=0.9)
        ax.set_xlabel(label)
        ax.set_ylabel("classes")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_spectrum(
    path: str | Path, q: int, pairs: Sequence[tuple[int, int]]
) -> None:
    """Eigenvalues of A^T A for a Paley tournament, one stem per value."""
    values = [v for v, _ in pairs]
    mults = [m for _, m in pairs]
    fig, ax = plt.subplots(figsize=(5.0, 3.0))
    markerline, stemlines, _ = ax.stem(values, mults)
    plt.setp(markerline, color="#4878b0")
    plt.setp(stemlines, color="#4878b0")
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("multiplicity")
    ax.set_title(f"paley({q})")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
