"""PNG figures for the report-style subcommands.

Rendering uses the Agg backend and strips the PNG software tag, so the
same data always gives the same bytes.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="png", dpi=100, metadata=_META)
    plt.close(fig)


def sweep_figure(report: dict, path) -> None:
    """Two bar charts: least-H outcomes and largest-H sizes."""
    least = report["outcomes"]["least_H"]
    largest = report["outcomes"]["largest_H_size"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.bar(range(len(least)), list(least.values()), color="tab:blue")
    ax1.set_xticks(range(len(least)), list(least), rotation=30, ha="right", fontsize=8)
    ax1.set_ylabel("colorings")
    ax1.set_title("least H found")
    ax2.bar(range(len(largest)), list(largest.values()), color="tab:orange")
    ax2.set_xticks(range(len(largest)), list(largest))
    ax2.set_xlabel("|H|")
    ax2.set_title("largest H")
    knobs = report["knobs"]
    fig.suptitle(f"w={report['window']}, k={report['k']}, {report['mode']}, "
                 f"min_chain={knobs['min_chain']}", fontsize=10)
    _save(fig, path)


def trend_figure(rows: list, bound: int, path) -> None:
    """max_preds against prefix depth, greedy and (where run) exact."""
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ds = [r["depth"] for r in rows]
    ax.plot(ds, [r["greedy"] for r in rows], "o-", label="greedy")
    exact = [(r["depth"], r["exact"]) for r in rows if r.get("exact") is not None]
    if exact:
        ax.plot(*zip(*exact), "s--", label="exact")
    ax.axhline(bound, color="grey", lw=0.8, ls=":", label=f"bound {bound}")
    ax.set_xlabel("prefix depth")
    ax.set_ylabel("max predecessors in S'")
    ax.legend(fontsize=8)
    _save(fig, path)


def end_colors_figure(chain_len: int, positions: list, end_colors: list, path) -> None:
    """Which chain positions survive extraction, and the end color of each."""
    fig, ax = plt.subplots(figsize=(6, 2.8))
    ax.scatter(range(chain_len), [0] * chain_len, s=12, color="lightgrey", label="chain")
    colors = list(end_colors) + [None]
    for pos, c in zip(positions, colors):
        ax.scatter([pos], [c or 0], s=40, color="black" if c is None else f"C{c}")
    ax.set_xlabel("chain position")
    ax.set_ylabel("end color (0 = last)")
    ax.set_yticks(sorted({0, *end_colors}))
    _save(fig, path)
