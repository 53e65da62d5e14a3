# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Settings for an additional log file
"""

from __future__ import annotations

from os import W_OK, access
from pathlib import Path
from typing import Literal, Optional, get_args

from pydantic import Field, PositiveInt, field_validator

from ._base import Base


Level = Literal["error", "warning", "info", "success", "debug", "trace"]
Event = Literal["datadump", "debug", "error", "info", "progress"]
Subsystem = Literal[
    "autoencoder",
    "classifier",
    "cli",
    "configuration",
    "dataset",
    "graph",
    "l21solver",
    "lbfgs",
    "logging",
    "pipeline",
    "relevance",
    "transfer",
    "utility",
]

EVENTS: tuple[str, ...] = get_args(Event)
SUBSYSTEMS: tuple[str, ...] = get_args(Subsystem)


class LogFile(Base):
    """
    A log file with its own level, rotation and record filter
    """

    method: Literal["file"] = Field(
        title="Log Method",
        description="Kind of log target; only files are supported",
        default="file",
    )

    destination: Path = Field(
        title="Destination File",
        description="The log file to write to",
        default=Path("/tmp/gastl.log"),
    )

    level: Level = Field(
        title="Log Level",
        description="The minimum level of the records written",
        default="info",
    )

    structured: bool = Field(
        title="Structured Logging",
        description="Write one JSON document per record",
        default=False,
    )

    formatter: Optional[str] = Field(
        title="Custom Format String",
        description="A loguru format string replacing the default plain format",
        default=None,
    )

    events: list[Event] = Field(
        title="Log Events",
        description="Events written to this file",
        default=["error", "info", "progress"],
    )

    subsystems: list[Subsystem] = Field(
        title="Log Subsystems",
        description="Subsystems written to this file",
        default=list(SUBSYSTEMS),
    )

    runs: Optional[list[str]] = Field(
        title="Log Runs",
        description="Only write records of these runs (experiment or grid cell names)",
        default=None,
    )

    rotation: str = Field(
        title="Rotation Size",
        description="Size at which the file is rotated",
        default="10MB",
        pattern=r"(?i)^\d+((k|m|g|t)b|b)?$",
    )

    retention: PositiveInt = Field(
        title="Retention",
        description="Number of rotated files to keep",
        default=5,
    )

    compression: Optional[Literal["gz", "bz2", "xz", "zip"]] = Field(
        title="Compression",
        description="Compression of rotated files; null keeps them uncompressed",
        default="gz",
    )

    @field_validator("destination")
    # pylint: disable=no-self-argument
    def validate_writable(cls, destination: Path) -> Path:
        """
        The file, or the directory it would be created in, must be writable
        """
        if destination.is_dir():
            raise ValueError(f"Log destination '{destination}' is a directory")
        target = destination if destination.exists() else destination.parent
        if not access(target, W_OK):
            raise ValueError(f"Log destination '{destination}' is not writable")
        return destination
