# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Base settings model
"""

from abc import ABC
from pprint import pformat
from typing import Any, TypeVar

from pydantic import ConfigDict, BaseModel


SettingsT = TypeVar("SettingsT", bound="Base")


class Base(ABC, BaseModel):
    """
    Frozen settings model; fields may be set by name or alias
    """

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    @property
    def pretty(self) -> str:
        """
        Return a pretty printed version of the settings
        """
        return pformat(self.model_dump(), indent=4, width=120)

    def updated(self: SettingsT, **changes: Any) -> SettingsT:
        """
        Copy with some fields replaced; unlike model_copy the result is validated again
        """
        return self.model_validate({**self.model_dump(exclude=set(changes)), **changes})
