"""Corpus reports: a text table, JSON, CSV, and summary figures."""

from __future__ import annotations

import csv
import json
import os
from typing import Sequence

__all__ = ["format_table", "to_json", "write_csv", "render_figures", "CSV_FIELDS"]

CSV_FIELDS = ["rule", "method", "status", "states", "vars", "clauses",
              "eval_vars", "encode_s", "solve_s", "total_s"]


def _row(o) -> dict:
    last = o.final_log
    return {
        "rule": o.rule,
        "method": o.method,
        "status": o.status,
        "states": o.found_states,
        "vars": last.variables if last else None,
        "clauses": last.clauses if last else None,
        "eval_vars": last.eval_vars if last else None,
        "encode_s": round(sum(e.encode_s for e in o.per_n), 3),
        "solve_s": round(sum(e.solve_s for e in o.per_n), 3),
        "total_s": round(o.total_s, 3),
    }


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.2f}"
    if isinstance(v, int):
        return f"{v:,}"
    return str(v)


def format_table(outcomes: Sequence) -> str:
    """One line per (rule, method).  Sizes are those of the last N tried;
    times add up encoding and solving over every N."""
    head = ["Z", "method", "#Q", "#vars", "#clauses", "time(s)", "status"]
    rows = []
    for o in outcomes:
        r = _row(o)
        rows.append([r["rule"], r["method"], _fmt(r["states"]), _fmt(r["vars"]),
                     _fmt(r["clauses"]), _fmt(r["total_s"]), r["status"]])
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(head)]
    align = ["<", "<", ">", ">", ">", ">", "<"]

    def line(cells):
        return "  ".join(f"{c:{a}{w}}" for c, a, w in zip(cells, align, widths)).rstrip()

    out = [line(head), line(["-" * w for w in widths])]
    out += [line(r) for r in rows]
    return "\n".join(out)


def to_json(outcomes: Sequence, indent: int = 2) -> str:
    return json.dumps([o.to_dict() for o in outcomes], indent=indent)


def write_csv(outcomes: Sequence, stream, delimiter: str = ",") -> None:
    w = csv.DictWriter(stream, fieldnames=CSV_FIELDS, delimiter=delimiter, lineterminator="\n")
    w.writeheader()
    for o in outcomes:
        w.writerow({k: ("" if v is None else v) for k, v in _row(o).items()})


def render_figures(outcomes: Sequence, directory: str) -> list:
    """Write ``summary.png`` (size and time per rule and method) and
    ``per_n.png`` (instance growth with N).  Returns the paths written."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    os.makedirs(directory, exist_ok=True)
    paths = []
    rows = [o for o in outcomes if o.per_n]
    rules = list(dict.fromkeys(o.rule for o in rows))
    methods = list(dict.fromkeys(o.method for o in rows))

    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    x = np.arange(len(rules))
    width = 0.8 / max(1, len(methods))
    for k, m in enumerate(methods):
        by_rule = {o.rule: _row(o) for o in rows if o.method == m}
        for ax, key in zip(axes, ("vars", "clauses", "total_s")):
            vals = [by_rule[r][key] if r in by_rule and by_rule[r][key] else np.nan for r in rules]
            ax.bar(x + (k - (len(methods) - 1) / 2) * width, vals, width, label=m)
    for ax, title in zip(axes, ("variables (last N)", "clauses (last N)", "time over all N (s)")):
        ax.set_title(title)
        ax.set_xticks(x)
        ax.set_xticklabels(rules, rotation=45)
        ax.set_yscale("log")
    if methods:
        axes[0].legend()
    fig.tight_layout()
    p = os.path.join(directory, "summary.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(6, 4))
    for o in rows:
        ns = [e.n for e in o.per_n]
        ax.plot(ns, [e.clauses for e in o.per_n], marker="o", label=f"{o.rule} ({o.method})")
    ax.set_xlabel("states N")
    ax.set_ylabel("clauses")
    ax.set_yscale("log")
    if rows:
        ax.legend(fontsize="small")
    fig.tight_layout()
    p = os.path.join(directory, "per_n.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)
    return paths
