"""Write table sweeps and pricing results as CSV, JSON or SVG figures.

Output is deterministic: JSON keys are sorted, and SVG files carry no date
and use a fixed hash salt for element ids.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .engine import XvaBreakdown  # noqa: E402
from .tables import PROFILES, TableResult  # noqa: E402

FORMATS = ("csv", "json", "svg")
TABLE_COLUMNS = (
    "table", "client_bps", "hedge_bps", "profile", "maturity_years", "relative_change_pct",
    "rounded_pct", "published_pct", "deviation_pp", "tolerance_pp", "within_tolerance",
)
PRICE_COLUMNS = ("side", "adjustment", "behavioural", "naive", "relative_change")

TITLES = {
    "mva-ccp": "MVA on CCP side",
    "cva-nojump": "Hedge-side CVA, no contagion",
    "cva-jump20": "Hedge-side CVA, 20% contagion",
}


class EmitError(OSError):
    pass


def _blank(v):
    return "" if v is None else v


def table_rows(result: TableResult) -> list[dict]:
    rows = []
    for c in result.cells:
        rows.append({
            "table": result.table_id,
            "client_bps": c.client_bps,
            "hedge_bps": _blank(c.hedge_bps),
            "profile": c.profile,
            "maturity_years": c.maturity,
            "relative_change_pct": _blank(c.value_pct),
            "rounded_pct": _blank(c.rounded_pct),
            "published_pct": _blank(c.published_pct),
            "deviation_pp": _blank(c.deviation_pp),
            "tolerance_pp": _blank(c.tolerance_pp),
            "within_tolerance": _blank(c.within_tolerance),
        })
    return rows


def price_rows(breakdowns: Mapping[str, XvaBreakdown]) -> list[dict]:
    rows = []
    for side, bd in breakdowns.items():
        for adj, v in bd.values.items():
            rows.append({"side": side, "adjustment": adj, "behavioural": v.behavioural,
                         "naive": v.naive, "relative_change": _blank(v.relative_change)})
    return rows


def to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\r\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def table_json(result: TableResult) -> str:
    doc = {"table": result.table_id, "cells": [c.as_row() for c in result.cells]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def price_json(breakdowns: Mapping[str, XvaBreakdown]) -> str:
    doc = {side: bd.to_dict() for side, bd in breakdowns.items()}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def table_figure(result: TableResult):
    """One panel per profile: relative change against maturity, a line per CDS pair."""
    fig, axes = plt.subplots(1, len(PROFILES), figsize=(12, 3.8), sharey=True)
    for ax, profile in zip(axes, PROFILES):
        series = defaultdict(list)
        for c in result.cells:
            if c.profile == profile and c.value_pct is not None:
                series[(c.client_bps, c.hedge_bps)].append((c.maturity, c.value_pct, c.published_pct))
        for (client, hedge), pts in sorted(series.items(), key=lambda kv: (kv[0][0], kv[0][1] or 0)):
            pts.sort()
            label = f"C {client}" if hedge is None else f"C {client} / H {hedge}"
            line, = ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", lw=1.2,
                            ms=3, label=label)
            published = [(p[0], p[2]) for p in pts if p[2] is not None]
            if published:
                ax.plot([p[0] for p in published], [p[1] for p in published], ls="none", marker="x",
                        ms=5, color=line.get_color())
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.set_title(profile.capitalize(), fontsize=10)
        ax.set_xlabel("maturity (years)")
    axes[0].set_ylabel("relative change (%)")
    handles, labels = axes[0].get_legend_handles_labels()
    if handles:
        fig.legend(handles, labels, loc="center right", fontsize=7, frameon=False)
        fig.subplots_adjust(right=0.84)
    fig.suptitle(f"{TITLES.get(result.table_id, result.table_id)} (x: published)", fontsize=11)
    return fig


def save_figure(fig, path: str | Path) -> Path:
    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": "behavxva"}):
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise EmitError(f"{path}: {e}") from e
        finally:
            plt.close(fig)
    return path


def _write(path: Path, text: str) -> Path:
    try:
        path.write_text(text, newline="")
    except OSError as e:
        raise EmitError(f"{path}: {e}") from e
    return path


def emit(result, fmt: str, path: str | Path) -> Path:
    """Write a TableResult or a ``{side: XvaBreakdown}`` mapping to ``path``."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    if isinstance(result, TableResult):
        if fmt == "csv":
            return _write(path, to_csv(table_rows(result), TABLE_COLUMNS))
        if fmt == "json":
            return _write(path, table_json(result))
        return save_figure(table_figure(result), path)
    if fmt == "csv":
        return _write(path, to_csv(price_rows(result), PRICE_COLUMNS))
    if fmt == "json":
        return _write(path, price_json(result))
    raise ValueError("SVG output is only available for table sweeps")
