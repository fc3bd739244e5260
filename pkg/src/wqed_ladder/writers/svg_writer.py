"""Optional SVG line plots of result tables (requires matplotlib)."""

import io
import logging
from typing import TYPE_CHECKING, Any, Optional, Sequence

from ..exceptions import ConfigurationError
from . import register_writer
from .base import ReportWriter

if TYPE_CHECKING:
    from ..models import ResultTable

logger = logging.getLogger(__name__)


@register_writer("svg")
class SvgWriter(ReportWriter):
    """Plots selected columns of a table against its first column.

    Args:
        y_columns: Columns to draw; every numeric column after the first
            by default.
        title: Optional axes title.
    """

    suffix = ".svg"

    def __init__(
        self,
        y_columns: Optional[Sequence[str]] = None,
        title: Optional[str] = None,
        **kwargs: Any,
    ) -> None:
        super().__init__(y_columns=y_columns, title=title, **kwargs)
        self.y_columns = list(y_columns) if y_columns else None
        self.title = title

    def render(self, table: "ResultTable") -> str:
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError as e:
            raise ConfigurationError(
                "SVG output needs matplotlib; install wqed-ladder[plot]", cause=e
            ) from e

        x_name = table.columns[0]
        y_names = self.y_columns or table.plot_columns or [
            c for c in table.columns[1:] if all(_is_number(v) for v in table.column(c))
        ]
        x = [float(v) for v in table.column(x_name)]

        figure, axes = plt.subplots(figsize=(6.4, 4.0))
        try:
            for name in y_names:
                axes.plot(x, [float(v) for v in table.column(name)], label=name)
            axes.set_xlabel(x_name)
            if self.title:
                axes.set_title(self.title)
            if y_names:
                axes.legend()
            buffer = io.StringIO()
            figure.savefig(buffer, format="svg")
        finally:
            plt.close(figure)
        return buffer.getvalue()


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) or hasattr(
        value, "dtype"
    )
