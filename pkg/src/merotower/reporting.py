"""File emission: canonical JSON, CSV tables, and matplotlib figures.

JSON is written with sorted keys and a fixed indent so a demo rerun with the
same seed produces byte-identical files.  Figures are rendered headless and
saved next to the delimited output.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def canonical_json(payload) -> str:
    return json.dumps(_pyify(payload), indent=2, sort_keys=True) + "\n"


def _pyify(value):
    if isinstance(value, dict):
        return {str(k): _pyify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_pyify(v) for v in value]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def write_json(path: Path, payload) -> None:
    Path(path).write_text(canonical_json(payload), encoding="utf-8")


def write_text(path: Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def write_csv(path: Path, header: list[str], rows: list[tuple], comments: list[str] = ()) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(c) for c in row))
    for comment in comments:
        lines.append(f"# {comment}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def entropy_figure(path: Path, reports: list, title: str) -> None:
    """log2 of the separated-set counts against orbit length, one line per
    radius, with the fitted rates in the legend."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for report in reports:
        for eps in report.epsilons:
            table = report.counts[eps]
            ms = sorted(table)
            ys = [math.log2(table[m]) for m in ms]
            fit = report.slopes[eps]
            label = f"{report.system_name} eps={eps:g}"
            if fit.slope is not None:
                label += f" (rate {fit.slope:.3f})"
            else:
                label += " (saturated)"
            ax.plot(ms, ys, marker="o", label=label)
    ax.set_xlabel("orbit length m")
    ax.set_ylabel("log2 N(m, eps)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def matched_rates_figure(path: Path, fits: list[tuple[object, str]], title: str) -> None:
    """Count curves for several growth-rate fits on one axis system."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for fit, label in fits:
        ms = sorted(fit.counts)
        ys = [math.log2(fit.counts[m]) for m in ms]
        if fit.slope is not None:
            label += f" (rate {fit.slope:.3f})"
        else:
            label += " (saturated)"
        ax.plot(ms, ys, marker="o", label=label)
    ax.set_xlabel("orbit length m")
    ax.set_ylabel("log2 N(m, eps)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def degrees_figure(path: Path, rows: list[tuple[int, int, float]], title: str) -> None:
    """Iterate degrees on a log2 axis plus the successive ratios."""
    ns = [r[0] for r in rows]
    degs = [r[1] for r in rows]
    ratios = [r[2] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.5, 3.8))
    ax1.semilogy(ns, degs, marker="s", base=2)
    ax1.set_xlabel("iterate n")
    ax1.set_ylabel("degree of the n-th iterate")
    ax1.grid(True, alpha=0.3)
    ax2.plot(ns, ratios, marker="o", color="tab:orange")
    ax2.set_xlabel("iterate n")
    ax2.set_ylabel("degree ratio")
    ax2.grid(True, alpha=0.3)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
