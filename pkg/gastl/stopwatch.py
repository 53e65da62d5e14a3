# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Measure the wall-clock time of experiments and grid cells
"""

from __future__ import annotations

from time import monotonic
from typing import Optional

import loguru


class Stopwatch:
    """
    Monotonic wall-clock timer started on creation
    """

    def __init__(self, log_context: loguru.Logger):
        """
        Set up the new stopwatch and start it
        """

        # Set the logging context
        self.log = log_context.bind(subsystem="utility")

        # Set empty finish time
        self._finish: Optional[float] = None

        # Start the timer
        self._start = monotonic()
        self.log.bind(event="debug").trace("Setting stopwatch start time to {start}", start=self._start)

    def finish(self) -> float:
        """
        Stop the timer and return the elapsed seconds
        """
        # Set the finish time
        self._finish = monotonic()
        self.log.bind(event="debug").trace(
            "Stopwatch finished after {elapsed:.5f} seconds", elapsed=self._finish - self._start
        )

        # Return the elapsed time
        return self.elapsed

    @property
    def elapsed(self) -> float:
        """
        Return the elapsed seconds; a running stopwatch reports the time so far
        """
        end = self._finish if self._finish is not None else monotonic()
        return end - self._start
