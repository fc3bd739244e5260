"""JSON output for tables, reports and manifests."""

import json
import math
from pathlib import Path
from typing import TYPE_CHECKING, Any

from . import register_writer
from .base import ReportWriter

if TYPE_CHECKING:
    from ..models import ResultTable


def _plain(value: Any) -> Any:
    if hasattr(value, "tolist"):
        value = value.tolist()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


@register_writer("json")
class JsonWriter(ReportWriter):
    """Writes a ResultTable as ``{"metadata", "columns", "rows"}``.

    Manifests and validation reports go through write_document(). Non-finite
    floats become ``null``.
    """

    suffix = ".json"

    def render(self, table: "ResultTable") -> str:
        return dumps(
            {
                "metadata": table.metadata,
                "columns": table.columns,
                "rows": [list(row) for row in table.rows],
            }
        )

    def write_document(self, name: str, data: Any, output_dir: Path) -> Path:
        """Write a manifest or report dict as ``<output_dir>/<name>.json``.

        Raises:
            ConfigurationError: If the file cannot be written.
        """
        return self._write_file(Path(output_dir) / f"{name}{self.suffix}", dumps(data))


def dumps(data: Any) -> str:
    """Serialize plain or numpy data the way every JSON file here is written."""
    return json.dumps(_plain(data), ensure_ascii=False, indent=2) + "\n"
