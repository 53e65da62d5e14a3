# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Store the value lists of a hyperparameter grid search
"""

from typing import Optional

from pydantic import Field, NonNegativeFloat, PositiveFloat, PositiveInt, field_validator

from ._base import Base
from .experiment import SelectionCount
from .transfer import GAMMA_GRID, HIDDEN_SIZE_GRID, LAMBDA_GRID


class GridSpec(Base):
    """
    Value lists for the grid search over (m, lambda, gamma, p)
    """

    hidden_sizes: list[PositiveInt] = Field(
        title="Hidden Sizes",
        description="The hidden layer sizes m to try",
        default=list(HIDDEN_SIZE_GRID),
    )

    lambdas: list[NonNegativeFloat] = Field(
        title="Lambda Values",
        description="The row sparsity balance values to try",
        default=list(LAMBDA_GRID),
    )

    gammas: list[NonNegativeFloat] = Field(
        title="Gamma Values",
        description="The graph balance values to try",
        default=list(GAMMA_GRID),
    )

    ps: Optional[list[SelectionCount]] = Field(
        title="Selection Counts",
        description="The numbers of selected source samples to try; defaults to the standard schedule up to n_src",
        default=None,
    )

    workers: PositiveInt = Field(
        title="Workers",
        description="The number of worker processes running grid cells",
        default=1,
    )

    timeout: Optional[PositiveFloat] = Field(
        title="Cell Timeout",
        description="The maximum number of seconds a grid cell may run; each cell then runs in its own process",
        default=None,
    )

    @field_validator("hidden_sizes", "lambdas", "gammas")
    # pylint: disable=no-self-argument
    def validate_not_empty(cls, values: list) -> list:
        """
        Ensure every value list has at least one entry
        """
        if not values:
            raise ValueError("Grid value lists must not be empty")

        # Return the validated list
        return values

    @field_validator("ps")
    # pylint: disable=no-self-argument
    def validate_ps_not_empty(cls, values: Optional[list]) -> Optional[list]:
        """
        Ensure an explicit selection count list is not empty
        """
        if values is not None and not values:
            raise ValueError("The list of selection counts must not be empty")

        # Return the validated list
        return values
