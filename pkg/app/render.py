"""
Output Rendering

Every CLI verb produces a Table: a JSON document for --format json and
rows under named columns for csv and pretty output. Rendering is pure, so
the same result always gives the same bytes.

Key features:
- JSON with two-space indentation and a trailing newline
- CSV with the header always written, one row per class or report entry
- Pretty tables with aligned columns and shortened witnesses
- Booleans as true/false and nested values as compact JSON in table cells
"""

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List

from app.errors import InputError
from app.reports import Report

FORMATS = ("json", "csv", "pretty")


@dataclass
class Table:
    """
    A rendered-ready result.

    Args:
        document: What --format json prints
        columns (list): Column names for csv and pretty output
        rows (list): One dict per row, keyed by column
    """

    document: Any
    columns: List[str] = field(default_factory=list)
    rows: List[Dict[str, Any]] = field(default_factory=list)


def _cell(value: Any) -> str:
    """
    Format one table cell.

    Args:
        value: Row value

    Returns:
        str: "" for None, true/false for booleans, compact JSON for containers
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, separators=(",", ":"), ensure_ascii=False)
    return str(value)


def _shorten(text: str, max_chars: int = 60) -> str:
    if len(text) <= max_chars:
        return text
    return text[: max_chars - 3] + "..."


def _render_json(table: Table) -> str:
    return json.dumps(table.document, indent=2, ensure_ascii=False) + "\n"


def _render_csv(table: Table) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(row.get(c)) for c in table.columns])
    return out.getvalue()


def _render_pretty(table: Table) -> str:
    """
    Aligned plain-text table, header underlined, long cells shortened.

    Returns:
        str: The table, or "(no rows)" under the header when empty
    """
    cells = [[_shorten(_cell(row.get(c))) for c in table.columns] for row in table.rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(table.columns)]
    lines = [
        "  ".join(c.ljust(w) for c, w in zip(table.columns, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for r in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    if not cells:
        lines.append("(no rows)")
    return "\n".join(lines) + "\n"


def render(table: Table, fmt: str) -> str:
    """
    Render a table in one of FORMATS.

    Raises:
        InputError: On an unknown format
    """
    if fmt == "json":
        return _render_json(table)
    if fmt == "csv":
        return _render_csv(table)
    if fmt == "pretty":
        return _render_pretty(table)
    raise InputError(f"unknown format {fmt!r} (choose from {', '.join(FORMATS)})")


def report_table(report: Report) -> Table:
    """One row per report entry, sorted by id; the document is the report JSON."""
    rows = []
    for s in report.sorted_squares():
        rows.append({
            "id": s.id,
            "pass": s.passed,
            "expected": s.expected,
            "ok": s.ok,
            "witness": s.witness,
        })
    return Table(report.to_dict(), ["id", "pass", "expected", "ok", "witness"], rows)
