"""Text output for metric reports and fixture tables.

Formatting is family-driven: percent and pixel values print with two decimal
places, edit distances with three. Reports hold percent metrics as fractions
and are scaled by 100 here; fixture tables already store percent points and
are printed as-is. Missing cells render as "-". Plain output is deterministic
down to the byte so it can serve as a comparison target.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Sequence

from .fixtures import SPLITS, FixtureTable
from .metrics import MetricReport

OUTPUT_FORMATS = ("plain", "csv", "json")

_DECIMALS = {"percent": 2, "pixels": 2, "edit": 3}


def format_value(value: float | None, family: str) -> str:
    if family not in _DECIMALS:
        raise ValueError(f"unknown family '{family}'")
    if value is None:
        return "-"
    return f"{value:.{_DECIMALS[family]}f}"


def _report_scale(family: str) -> float:
    return 100.0 if family == "percent" else 1.0


def _column_table(header: list[str], rows: list[list[str]]) -> str:
    # First column left-aligned, the rest right-aligned under their headers.
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = []
    for row in [header] + rows:
        first = row[0].ljust(widths[0])
        rest = [cell.rjust(widths[i + 1]) for i, cell in enumerate(row[1:])]
        lines.append("  ".join([first] + rest).rstrip())
    return "\n".join(lines)


def render_fixture(table: FixtureTable, fmt: str = "plain") -> str:
    if fmt not in OUTPUT_FORMATS:
        raise ValueError(f"unknown format '{fmt}'")
    if fmt == "json":
        payload = {
            "name": table.name,
            "family": table.family,
            "metrics": list(table.metrics),
            "rows": list(table.rows),
            "cells": {split: [list(r) for r in table.cells[split]] for split in SPLITS},
        }
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        # Method names contain commas, so quoting (not a custom delimiter) is
        # what keeps the file parseable; pin the line ending for byte identity.
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["split", "method", *table.metrics])
        for split in SPLITS:
            for row, values in zip(table.rows, table.cells[split]):
                writer.writerow([split, row, *(format_value(v, table.family) for v in values)])
        return buf.getvalue()
    blocks = []
    for split in SPLITS:
        header = ["method", *table.metrics]
        rows = [
            [row, *(format_value(v, table.family) for v in values)]
            for row, values in zip(table.rows, table.cells[split])
        ]
        blocks.append(f"{table.name} [{split}]\n" + _column_table(header, rows))
    return "\n\n".join(blocks) + "\n"


def render_report(report: MetricReport, fmt: str = "plain") -> str:
    return render_reports([report], fmt)


def render_reports(reports: Sequence[MetricReport], fmt: str = "plain") -> str:
    if fmt not in OUTPUT_FORMATS:
        raise ValueError(f"unknown format '{fmt}'")
    if fmt == "json":
        payload = {
            "schema": "report/1",
            "reports": [
                {
                    "name": r.name,
                    "family": r.family,
                    "value": r.value,
                    "count": r.count,
                    "breakdown": dict(r.breakdown),
                }
                for r in reports
            ],
        }
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "metric", "value", "count"])
        for r in reports:
            scale = _report_scale(r.family)
            writer.writerow([r.name, "overall", format_value(r.value * scale, r.family), r.count])
            for key, value in r.breakdown.items():
                writer.writerow([r.name, key, format_value(value * scale, r.family), ""])
        return buf.getvalue()
    lines = []
    for r in reports:
        scale = _report_scale(r.family)
        lines.append(f"{r.name}: {format_value(r.value * scale, r.family)} (n={r.count})")
        for key, value in r.breakdown.items():
            lines.append(f"  {key}: {format_value(value * scale, r.family)}")
    return "\n".join(lines) + "\n"
