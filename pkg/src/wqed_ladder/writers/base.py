"""Base class for result writers."""

import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict

from ..exceptions import ConfigurationError

if TYPE_CHECKING:
    from ..models import ResultTable

logger = logging.getLogger(__name__)


class ReportWriter(ABC):
    """Abstract base class for output writers.

    Subclasses set ``suffix`` and implement render(); write() takes care
    of directories, encoding and logging.
    """

    suffix: str = ""

    def __init__(self, **kwargs: Any) -> None:
        self._config = kwargs

    @property
    def config(self) -> Dict[str, Any]:
        return self._config

    @abstractmethod
    def render(self, table: "ResultTable") -> str:
        """Return the file content for ``table``."""

    def path_for(self, table: "ResultTable", output_dir: Path) -> Path:
        return Path(output_dir) / f"{table.name}{self.suffix}"

    def write(self, table: "ResultTable", output_dir: Path) -> Path:
        """Render ``table`` into ``output_dir``.

        Returns:
            Path of the written file.

        Raises:
            ConfigurationError: If the file cannot be written.
        """
        return self._write_file(self.path_for(table, output_dir), self.render(table))

    def _write_file(self, path: Path, content: str) -> Path:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(content, encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"Failed to write {path}", cause=e) from e
        logger.info(f"Wrote {path}")
        return path
