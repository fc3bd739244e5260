"""Versioned CSV output.

Files start with ``# key: value`` metadata lines followed by a header
row. Floats are written with ``repr`` so that values survive a round trip
exactly and reruns compare byte for byte.
"""

import csv
import io
import math
from typing import TYPE_CHECKING, Any, Dict, List

from . import register_writer
from .base import ReportWriter

if TYPE_CHECKING:
    from ..models import ResultTable


def format_value(value: Any) -> str:
    """Render one cell."""
    if isinstance(value, bool) or hasattr(value, "dtype") and value.dtype.kind == "b":
        return "true" if value else "false"
    if isinstance(value, float) or hasattr(value, "dtype") and value.dtype.kind == "f":
        number = float(value)
        if math.isnan(number):
            return "nan"
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return repr(number)
    if hasattr(value, "dtype") and value.dtype.kind in "iu":
        return str(int(value))
    return str(value)


@register_writer("csv")
class CsvWriter(ReportWriter):
    """Writes a ResultTable as CSV with a metadata comment block."""

    suffix = ".csv"

    def render(self, table: "ResultTable") -> str:
        buffer = io.StringIO()
        for key, value in table.metadata.items():
            buffer.write(f"# {key}: {format_value(value)}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(v) for v in row])
        return buffer.getvalue()


def read_csv(text: str) -> Dict[str, Any]:
    """Parse a file written by CsvWriter.

    Returns:
        {"metadata": {...}, "columns": [...], "rows": [[str, ...], ...]}
    """
    metadata: Dict[str, str] = {}
    body: List[str] = []
    for line in text.splitlines():
        if line.startswith("# ") and not body:
            key, _, value = line[2:].partition(": ")
            metadata[key] = value
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return {"metadata": metadata, "columns": rows[0] if rows else [], "rows": rows[1:]}
