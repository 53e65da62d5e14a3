# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Set up logging to STDERR and to the configured log files
"""

from __future__ import annotations

from sys import stderr
from typing import Callable

import loguru

from .settings.logfile import LogFile


# Every record carries these extra fields unless bound otherwise
DEFAULT_EXTRA = {
    "run": "main",
    "subsystem": "utility",
    "event": "debug",
}

# STDERR level per -v count; anything above the last entry logs everything
VERBOSITY_LEVELS = ("ERROR", "WARNING", "SUCCESS", "INFO", "DEBUG")

PLAIN_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {process} | {extra[run]} | "
PLAIN_FORMAT += "{extra[subsystem]}/{extra[event]} | {message}"
PLAIN_FORMAT_DEBUG = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {process} | {extra[run]} | "
PLAIN_FORMAT_DEBUG += "{file.path}:{line} {function}() | {extra[subsystem]}/{extra[event]} | {message}"


class LogManager:
    """
    Own the STDERR sink and any file sinks added from the settings
    """

    def __init__(self, verbosity: int):
        self.level = VERBOSITY_LEVELS[verbosity] if verbosity < len(VERBOSITY_LEVELS) else "TRACE"
        self.format = self.stderr_format(self.level)

        loguru.logger.remove()
        loguru.logger.configure(extra=DEFAULT_EXTRA)
        loguru.logger.add(stderr, format=self.format, level=self.level)

        self.log = loguru.logger.bind(subsystem="logging")
        self.log.bind(event="debug").debug("STDERR logger created at level {level}", level=self.level)

    @staticmethod
    def stderr_format(level: str) -> str:
        """
        Colored STDERR format; source locations are shown at debug and trace level
        """
        location = ""
        if level == "TRACE":
            location = " | <magenta>{file.path}:{line} {function}()</magenta>"
        elif level == "DEBUG":
            location = " | <magenta>{file}:{line} {function}()</magenta>"
        return (
            "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
            f"<light-blue>PID {{process: <8}}</light-blue>{location} | <cyan>{{extra[run]}}</cyan> | "
            "<green>{extra[subsystem]}/{extra[event]}</green> | <level>{message}</level>"
        )

    def setup(self, loggers: list[LogFile]) -> list[int]:
        """
        Add a sink per log file and return the sink ids
        """
        return [self.add_file(config) for config in loggers]

    def add_file(self, config: LogFile) -> int:
        """
        Add one log file sink
        """
        self.log.bind(event="debug").debug("Adding log file {destination}", destination=config.destination)
        self.log.bind(event="datadump").trace("Log file settings:\n{config}", config=config.pretty)

        return loguru.logger.add(
            config.destination,
            format=self.log_format(config),
            serialize=config.structured,
            level=config.level.upper(),
            filter=self.log_filter(config),
            rotation=config.rotation,
            retention=config.retention,
            compression=config.compression,
            enqueue=True,
        )

    @staticmethod
    def log_format(config: LogFile) -> str:
        """
        Format of the message text; structured files wrap it in loguru's JSON document
        """
        if config.formatter:
            return config.formatter
        if config.structured:
            return "{message}"
        return PLAIN_FORMAT_DEBUG if config.level in ("debug", "trace") else PLAIN_FORMAT

    @staticmethod
    def log_filter(config: LogFile) -> Callable[[loguru.Record], bool]:
        """
        Keep records whose event, subsystem and run are allowed by the settings
        """
        events = set(config.events)
        subsystems = set(config.subsystems)
        runs = set(config.runs or ())

        # data dumps are multi-line and do not belong in JSON documents
        if config.structured:
            events.discard("datadump")

        def _filter(record: loguru.Record) -> bool:
            extra = {**DEFAULT_EXTRA, **record["extra"]}
            if runs and extra["run"] not in runs:
                return False
            return extra["event"] in events and extra["subsystem"] in subsystems

        return _filter
