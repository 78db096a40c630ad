"""Figure rendering for the benchmark and report paths.

Figures are written next to the delimited output with the same stem; the
CSV stays the machine-readable record, the PNGs are the human view.
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FAMILY_STYLE = {
    "line": ("tab:blue", "o"),
    "grid2d": ("tab:green", "s"),
    "hypercube": ("tab:red", "^"),
    "complete": ("tab:purple", "d"),
}


def _style(family):
    return FAMILY_STYLE.get(family, ("tab:gray", "x"))


def render_bench_figures(rows: list[dict], stem: Path) -> list[Path]:
    """Depth and width series against node count, one curve per family."""
    stem = Path(stem)
    written = []

    movers = [r for r in rows if r["name"] == "data_mover"]
    if movers:
        fig, ax = plt.subplots(figsize=(6, 4))
        for family in sorted({r["family"] for r in movers}):
            sub = sorted((r for r in movers if r["family"] == family),
                         key=lambda r: r["N"])
            color, marker = _style(family)
            ax.loglog([r["N"] for r in sub], [r["stage_depth"] for r in sub],
                      color=color, marker=marker, label=family)
        ax.set_xlabel("nodes N")
        ax.set_ylabel("data-mover stage depth (layers)")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        out = stem.with_name(stem.name + "_depth.png")
        fig.savefig(out, dpi=130)
        plt.close(fig)
        written.append(out)

    lookups = sorted((r for r in rows if r["name"] == "parallel_lookup"),
                     key=lambda r: r["N"])
    if lookups:
        fig, ax = plt.subplots(figsize=(6, 4))
        ns = [r["N"] for r in lookups]
        ax.loglog(ns, [r["width"] for r in lookups], "o-", color="tab:red",
                  label="measured width")
        d = lookups[0]["d"]
        c = max(r["width"] / (r["N"] * (math.log2(r["N"]) + d)) for r in lookups)
        ax.loglog(ns, [c * n * (math.log2(n) + d) for n in ns], "--",
                  color="gray", label="c N(log N + d)")
        ax.set_xlabel("nodes N")
        ax.set_ylabel("parallel lookup width (bits)")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        out = stem.with_name(stem.name + "_width.png")
        fig.savefig(out, dpi=130)
        plt.close(fig)
        written.append(out)
    return written


def render_overhead_figure(rows: list[dict], path: Path) -> Path:
    """Measured per-timeslice movement cost with the depth floor dashed."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for family in sorted({r["family"] for r in rows}):
        sub = sorted((r for r in rows if r["family"] == family),
                     key=lambda r: r["n"])
        color, marker = _style(family)
        ax.loglog([r["n"] for r in sub], [r["per_slice_stage_depth"] for r in sub],
                  color=color, marker=marker, label=family)
        ax.loglog([r["n"] for r in sub], [max(r["ref_floor"], 1e-2) for r in sub],
                  color=color, linestyle=":", alpha=0.6)
    ax.set_xlabel("nodes N")
    ax.set_ylabel("per-timeslice stage depth")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(title="solid: measured, dotted: floor")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_trials_figure(rows: list[dict], path: Path) -> Path:
    """Per-trial cost scatter plus the overall success frequency."""
    path = Path(path)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5))
    succ = [int(r["success"]) for r in rows]
    ax1.bar(["fail", "ok"], [len(succ) - sum(succ), sum(succ)],
            color=["tab:red", "tab:green"])
    ax1.set_ylabel("trials")
    ax1.set_title(f"success {sum(succ)}/{len(succ)}")
    ax2.scatter(range(len(rows)), [r["stage_depth"] for r in rows], s=8,
                c=["tab:green" if s else "tab:red" for s in succ])
    ax2.set_xlabel("trial")
    ax2.set_ylabel("stage depth used")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
