# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Store the configuration document for the GASTL application.
"""

from typing import Optional

from pydantic import Field, FilePath, model_validator

from ._base import Base
from .experiment import ExperimentConfig
from .grid import GridSpec
from .logfile import LogFile


class Settings(Base):
    """
    Define and store the parsed configuration for GASTL
    """

    # File path set to optional as it is defined by the CLI
    file: Optional[FilePath] = Field(
        title="Configuration File",
        description="The path to the configuration file that was loaded",
        default=None,
    )

    experiment: ExperimentConfig = Field(
        title="Experiment",
        description="The experiment to run",
    )

    grid: Optional[GridSpec] = Field(
        title="Grid",
        description="The value lists for grid searches and ablations",
        default=None,
    )

    logging: Optional[list[LogFile]] = Field(
        title="Logging Configuration",
        description="Additional log files to write",
        default=None,
    )

    @model_validator(mode="after")
    def validate_logfiles_unique(self) -> "Settings":
        """
        Two log files cannot share a destination
        """
        paths = [str(config.destination.resolve()) for config in self.logging or []]
        duplicates = sorted({path for path in paths if paths.count(path) > 1})
        if duplicates:
            raise ValueError(f"Duplicate log file destinations: {', '.join(duplicates)}")
        return self
