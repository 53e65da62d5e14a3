# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Load and manage the configuration for GASTL
"""

from __future__ import annotations

from pathlib import Path
from pprint import pformat
from typing import Any, Optional

import loguru
import ujson
from pydantic import ValidationError
from yaml import YAMLError
from yaml import safe_load as yaml_safe_load

from .exceptions.invalidinputerror import InvalidInputError
from .settings.settings import Settings


def _origin_changed(current: dict, override: dict) -> bool:
    """
    True when the override switches a data section to another origin
    """
    return "origin" in override and current.get("origin", override["origin"]) != override["origin"]


def merge_overrides(configuration: dict, overrides: dict) -> dict:
    """
    Return a copy of the configuration with the overrides applied; nested dicts are merged,
    None override values are ignored and a section with a different origin replaces the original
    """
    merged = dict(configuration)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict):
            current = merged.get(key)
            keep = isinstance(current, dict) and not _origin_changed(current, value)
            merged[key] = merge_overrides(current if keep else {}, value)
        else:
            merged[key] = value
    return merged


# pylint: disable=too-few-public-methods
class Configuration:
    """
    GASTL configuration handler
    """

    def __init__(
        self,
        log_context: loguru.Logger,
        file: Optional[Path] = None,
        configuration: Optional[dict] = None,
        overrides: Optional[dict] = None,
    ):
        # Set the logging context
        self.log = log_context.bind(subsystem="configuration")

        # Ensure that either a file or configuration dict is provided
        if file is None and configuration is None:
            self.log.bind(event="error").critical("No configuration file or configuration dict provided")
            raise InvalidInputError("No configuration file or configuration dict provided")

        # Read the configuration file into a dict
        if file is not None:
            configuration = self._load_file(file=file)
        assert configuration is not None

        # Apply command line overrides
        if overrides:
            configuration = merge_overrides(configuration, overrides)
            self.log.bind(event="datadump").trace(
                "Configuration after overrides:\n{configuration}",
                configuration=pformat(configuration, indent=4, width=120),
            )

        # Parse the configuration into a Settings object
        try:
            self.settings = Settings(**configuration, file=file)
        except ValidationError as exc:
            # Invalid configuration
            self.log.bind(event="error").critical("The configuration could not be parsed due to validation errors.")
            for error in exc.errors():
                self.log.bind(event="error").error(
                    "{location}: {error}",
                    location=".".join(str(part) for part in error["loc"]),
                    error=error["msg"],
                )
            self.log.bind(event="datadump").error(
                "Pydantic reported the following errors:\n{errors}",
                errors=pformat(exc.errors()),
            )
            raise

        # Log loaded settings
        self.log.bind(event="info").info("Configuration loaded successfully")
        self.log.bind(event="datadump").trace(
            "Loaded settings from configuration:\n{settings}",
            settings=self.settings.pretty,
        )

    def _load_file(self, file: Path) -> dict[str, Any]:
        """
        Read configuration from the supplied JSON or YAML file into a dict
        """
        # Logging
        self.log.bind(event="info").debug("Loading configuration data from file '{file}'", file=file)

        # Check the file type
        try:
            match file.suffix:
                case file.suffix if file.suffix in (".yaml", ".yml"):
                    configuration = yaml_safe_load(file.read_text(encoding="utf-8"))
                case ".json":
                    configuration = ujson.loads(file.read_text(encoding="utf-8"))
                case _:
                    self.log.bind(event="error").critical(
                        "Configuration file '{file}' must have a '.json' or '.yaml' extension",
                        file=file,
                    )
                    raise InvalidInputError(f"Configuration file '{file}' must have a '.json' or '.yaml' extension")
        except (YAMLError, ValueError) as exc:
            self.log.bind(event="error").critical("Configuration file '{file}' could not be parsed", file=file)
            raise InvalidInputError(f"Configuration file '{file}' could not be parsed: {exc}") from exc

        # An empty document or a bare value is not a configuration
        if not isinstance(configuration, dict):
            raise InvalidInputError(f"Configuration file '{file}' does not contain a mapping")

        # Dump the configuration dict
        self.log.bind(event="datadump").trace(
            "Read {file_type} data:\n{file_content}",
            file_type=file.suffix[1:].upper(),
            file_content=pformat(configuration, indent=4, width=120),
        )

        # Return the configuration dict
        return configuration
