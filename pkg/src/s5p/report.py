"""Comparison tables and figures rendered to files.

The compare path emits a tab-delimited table plus a JSON copy, and renders
matplotlib figures (replication factor bars, load distributions and
degree-resolved replication curves) next to them.
"""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .metrics import DegreeResolvedRF  # noqa: E402

TABLE_COLUMNS = ("algorithm", "k", "rf", "imbalance", "runtime_ms", "peak_mem_bytes")


def write_table(rows: list, out_dir: str, stem: str = "compare") -> tuple[str, str]:
    """Write rows (dicts) as TSV and JSON; returns both paths."""
    tsv_path = os.path.join(out_dir, f"{stem}.tsv")
    json_path = os.path.join(out_dir, f"{stem}.json")
    with open(tsv_path, "wt", encoding="ascii") as f:
        f.write("\t".join(TABLE_COLUMNS) + "\n")
        for row in rows:
            f.write("\t".join(str(row.get(col)) for col in TABLE_COLUMNS) + "\n")
    with open(json_path, "wt", encoding="ascii") as f:
        json.dump(rows, f, indent=2)
        f.write("\n")
    return tsv_path, json_path


def format_table(rows: list) -> str:
    """Plain-text rendering of the comparison rows."""
    widths = [max(len(str(col)), *(len(str(r.get(col))) for r in rows))
              for col in TABLE_COLUMNS]
    lines = ["  ".join(str(col).ljust(w) for col, w in zip(TABLE_COLUMNS, widths))]
    for row in rows:
        lines.append("  ".join(str(row.get(col)).ljust(w)
                               for col, w in zip(TABLE_COLUMNS, widths)))
    return "\n".join(lines)


def fig_rf_bars(rows: list, path: str) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    labels = [str(r["algorithm"]) for r in rows]
    values = [r["rf"] for r in rows]
    ax.bar(labels, values, color="steelblue")
    ax.set_ylabel("replication factor")
    ax.set_title("Replication factor by algorithm")
    for i, v in enumerate(values):
        ax.text(i, v, f"{v:.3f}", ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fig_loads(loads_by_algo: dict, path: str) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for algo, loads in loads_by_algo.items():
        ax.plot(range(len(loads)), sorted(loads, reverse=True),
                marker="o", markersize=3, label=algo)
    ax.set_xlabel("partition (sorted by load)")
    ax.set_ylabel("edges")
    ax.set_title("Partition loads")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fig_degree_rf(curves: dict, path: str) -> None:
    """Mean replica count per degree, log-log, one curve per algorithm."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for algo, dr in curves.items():
        ax.plot(dr.degrees, dr.g, marker=".", linestyle="none", markersize=4,
                alpha=0.7, label=algo)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("degree")
    ax.set_ylabel("mean replicas")
    ax.set_title("Degree-resolved replication")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_degree_table(dr: DegreeResolvedRF, path: str) -> None:
    with open(path, "wt", encoding="ascii") as f:
        f.write("degree\tfrequency\tmean_replicas\n")
        for d, fq, g in zip(dr.degrees.tolist(), dr.f.tolist(), dr.g.tolist()):
            f.write(f"{int(d)}\t{int(fq)}\t{g:.6f}\n")
