# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Store options for the limited-memory BFGS minimizer
"""

from pydantic import Field, PositiveInt, NonNegativeFloat, PositiveFloat, model_validator

from ._base import Base


class LbfgsOptions(Base):
    """
    Options controlling an L-BFGS minimization
    """

    max_iterations: PositiveInt = Field(
        title="Maximum Iterations",
        description="The maximum number of outer (accepted step) iterations",
        default=400,
    )

    memory: PositiveInt = Field(
        title="Memory",
        description="The number of curvature pairs kept for the two-loop recursion",
        default=100,
    )

    gradient_tolerance: NonNegativeFloat = Field(
        title="Gradient Tolerance",
        description="Stop once the infinity norm of the gradient is at or below this value",
        default=1e-6,
    )

    relative_value_tolerance: NonNegativeFloat = Field(
        title="Relative Value Tolerance",
        description="Stop once an accepted step changes the value by at most this fraction of max(1, |value|)",
        default=1e-9,
    )

    c1: PositiveFloat = Field(
        title="Sufficient Decrease Constant",
        description="The Armijo constant of the strong Wolfe line search",
        default=1e-4,
        lt=1.0,
    )

    c2: PositiveFloat = Field(
        title="Curvature Constant",
        description="The curvature constant of the strong Wolfe line search",
        default=0.9,
        lt=1.0,
    )

    max_line_search: PositiveInt = Field(
        title="Maximum Line Search Steps",
        description="The maximum number of bracketing or zoom steps before the line search gives up",
        default=50,
    )

    @model_validator(mode="after")
    def validate_wolfe_constants(self) -> "LbfgsOptions":
        """
        Ensure the Wolfe constants satisfy 0 < c1 < c2 < 1
        """
        if self.c1 >= self.c2:
            raise ValueError(f"The line search constants must satisfy c1 < c2; got c1={self.c1}, c2={self.c2}")

        # Return the validated options
        return self
