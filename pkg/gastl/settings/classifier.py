# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Store options for the weighted softmax classifier
"""

from pydantic import Field, NonNegativeFloat

from ._base import Base
from .lbfgs import LbfgsOptions


class ClassifierLbfgsOptions(LbfgsOptions):
    """
    L-BFGS options with tolerances tight enough to pin down the classifier minimizer
    """

    gradient_tolerance: NonNegativeFloat = Field(
        title="Gradient Tolerance",
        description="Stop once the infinity norm of the gradient is at or below this value",
        default=1e-10,
    )

    relative_value_tolerance: NonNegativeFloat = Field(
        title="Relative Value Tolerance",
        description="Stop once an accepted step changes the value by at most this fraction of max(1, |value|)",
        default=1e-14,
    )


class ClassifierOptions(Base):
    """
    Options for training the weighted softmax classifier
    """

    lbfgs: ClassifierLbfgsOptions = Field(
        title="L-BFGS Options",
        description="Options for minimizing the weighted softmax cost",
        default=ClassifierLbfgsOptions(),
    )
