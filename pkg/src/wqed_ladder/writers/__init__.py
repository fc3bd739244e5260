"""Output writers for result tables.

This module provides the writer registry and base class. Writers turn a
ResultTable into a file (CSV, JSON, SVG).

Public API:
    - ReportWriter: Abstract base class for writers
    - register_writer: Decorator to register custom writers
    - get_writer: Factory function to get a writer by name
    - list_writers: List all registered writer names
"""

import logging
from typing import Any, Callable, Dict, List, Type

from ..exceptions import ConfigurationError
from .base import ReportWriter

logger = logging.getLogger(__name__)

# Registry of writer classes
_writer_registry: Dict[str, Type[ReportWriter]] = {}


def register_writer(
    name: str,
) -> Callable[[Type[ReportWriter]], Type[ReportWriter]]:
    """Decorator to register a writer class under ``name``.

    Example:
        @register_writer("parquet")
        class ParquetWriter(ReportWriter):
            suffix = ".parquet"

            def render(self, table):
                ...
    """

    def decorator(cls: Type[ReportWriter]) -> Type[ReportWriter]:
        if name in _writer_registry:
            logger.warning(
                f"Writer '{name}' is already registered. Overwriting with {cls.__name__}"
            )
        _writer_registry[name] = cls
        logger.debug(f"Registered writer: {name} -> {cls.__name__}")
        return cls

    return decorator


def get_writer(name: str, **kwargs: Any) -> ReportWriter:
    """Create a writer instance by name.

    Raises:
        ConfigurationError: If no writer is registered under ``name``.
    """
    if name not in _writer_registry:
        raise ConfigurationError(
            f"Writer '{name}' is not registered. Available writers: {list_writers()}"
        )
    return _writer_registry[name](**kwargs)


def list_writers() -> List[str]:
    return list(_writer_registry.keys())


__all__ = [
    "ReportWriter",
    "register_writer",
    "get_writer",
    "list_writers",
]

# Import writers to trigger registration
from . import csv_writer  # noqa: E402,F401
from . import json_writer  # noqa: E402,F401
from . import svg_writer  # noqa: E402,F401
