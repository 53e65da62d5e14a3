# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Store hyperparameters for the alternating transfer model fit
"""

from pydantic import (
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
)

from ._base import Base
from .lbfgs import LbfgsOptions


# Default grid ranges for the tunable hyperparameters
HIDDEN_SIZE_GRID = (10, 50, 100, 200)
LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
GAMMA_GRID = (0.0, 1e-4, 1e-3, 1e-2, 1e-1)


class TransferHyperParams(Base):
    """
    Hyperparameters of the joint autoencoder / transformation matrix fit
    """

    hidden_size: PositiveInt = Field(
        title="Hidden Size",
        description="The number of hidden units m of the autoencoder",
        default=10,
    )

    mu: PositiveFloat = Field(
        title="Cross-Domain Balance",
        description="The weight of the cross-domain loss",
        default=1.0,
    )

    lam: NonNegativeFloat = Field(
        title="Row Sparsity Balance",
        description="The weight of the l2,1-norm of the transformation matrix",
        default=1e-2,
        alias="lambda",
    )

    gamma: NonNegativeFloat = Field(
        title="Graph Balance",
        description="The weight of the local structure (graph Laplacian) term",
        default=0.0,
    )

    knn: PositiveInt = Field(
        title="Neighbor Count",
        description="The number of nearest neighbors k used to build the similarity graph",
        default=5,
    )

    epsilon: PositiveFloat = Field(
        title="Reweighting Constant",
        description="The small constant added to row norms when reweighting the l2,1-norm",
        default=1e-8,
    )

    irls_tolerance: PositiveFloat = Field(
        title="Reweighting Tolerance",
        description="The relative change of the sparse regression objective that ends the reweighting loop",
        default=1e-6,
    )

    irls_max_iterations: PositiveInt = Field(
        title="Reweighting Iterations",
        description="The maximum number of reweighting iterations per transformation matrix update",
        default=50,
    )

    max_outer: PositiveInt = Field(
        title="Maximum Alternations",
        description="The maximum number of alternations between the autoencoder and the transformation matrix",
        default=10,
    )

    outer_tolerance: NonNegativeFloat = Field(
        title="Alternation Tolerance",
        description="The relative change of the full objective that ends the alternation",
        default=1e-4,
    )

    lbfgs: LbfgsOptions = Field(
        title="L-BFGS Options",
        description="Options for the autoencoder update",
        default=LbfgsOptions(),
    )

    seed: NonNegativeInt = Field(
        title="Seed",
        description="The seed for the autoencoder initialization",
        default=0,
    )
