"""Profiling of whole simulation runs with pyinstrument.

Used by the ``--profile`` flag of the command line to record where a run
spends its time; the HTML report is written next to the results.
"""

import logging
from pathlib import Path
from types import TracebackType
from typing import Optional, Type

from pyinstrument import Profiler as PyInstrumentProfiler

from .exceptions import ProfilerError

logger = logging.getLogger(__name__)


class RunProfiler:
    """Sampling profiler around one subcommand.

    Example:
        with RunProfiler() as profiler:
            run_ensemble(...)
        profiler.write_html(Path("results/profile.html"))
    """

    def __init__(self, interval: float = 0.001) -> None:
        self._interval = interval
        self._sampler: Optional[PyInstrumentProfiler] = None
        self._duration: Optional[float] = None

    @property
    def is_running(self) -> bool:
        return self._sampler is not None and self._sampler.is_running

    @property
    def duration(self) -> float:
        """Profiled wall-clock time in seconds.

        Raises:
            ProfilerError: Before stop() has been called.
        """
        if self._duration is None:
            raise ProfilerError("Profiler has not been stopped yet")
        return self._duration

    def start(self) -> None:
        """Begin sampling.

        Raises:
            ProfilerError: If this profiler was already started.
        """
        if self._sampler is not None:
            raise ProfilerError("Profiler is already running")
        sampler = PyInstrumentProfiler(interval=self._interval)
        try:
            sampler.start()
        except Exception as e:
            raise ProfilerError(f"Failed to start profiler: {e}", cause=e) from e
        self._sampler = sampler
        logger.debug(f"Profiling with a {self._interval * 1e3:.1f} ms interval")

    def stop(self) -> None:
        """End sampling and record the duration.

        Raises:
            ProfilerError: If the profiler is not running.
        """
        if not self.is_running:
            raise ProfilerError("Profiler is not running")
        assert self._sampler is not None
        try:
            session = self._sampler.stop()
        except Exception as e:
            raise ProfilerError(f"Failed to stop profiler: {e}", cause=e) from e
        self._duration = session.duration if session is not None else 0.0

    def __enter__(self) -> "RunProfiler":
        self.start()
        return self

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc: Optional[BaseException],
        tb: Optional[TracebackType],
    ) -> None:
        if self.is_running:
            self.stop()

    def _render(self, kind: str) -> str:
        if self._sampler is None or self._duration is None:
            raise ProfilerError("Profiler has not completed")
        render = self._sampler.output_html if kind == "html" else self._sampler.output_text
        try:
            return render()
        except Exception as e:
            raise ProfilerError(f"Failed to generate {kind} report: {e}", cause=e) from e

    def get_html_report(self) -> str:
        return self._render("html")

    def get_text_report(self) -> str:
        return self._render("text")

    def write_html(self, path: Path) -> Path:
        """Write the HTML report to ``path``.

        Raises:
            ProfilerError: If the report cannot be produced or written.
        """
        html = self.get_html_report()
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(html, encoding="utf-8")
        except OSError as e:
            raise ProfilerError(f"Failed to write profile to {path}", cause=e) from e
        logger.info(f"Profile written to: {path}")
        return path
