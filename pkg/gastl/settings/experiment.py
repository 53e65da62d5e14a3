# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Store the configuration of a single experiment
"""

from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import Field, NonNegativeInt, PositiveFloat

from ._base import Base
from .data import FileData, SyntheticData
from .classifier import ClassifierOptions
from .transfer import TransferHyperParams


# The data origin is discriminated by its "origin" field
DataOrigin = Annotated[Union[FileData, SyntheticData], Field(discriminator="origin")]

# Number of selected source samples; a count, every sample or no transfer at all
SelectionCount = Union[NonNegativeInt, Literal["all", "none"]]


class ExperimentConfig(Base):
    """
    Configuration of one transfer experiment
    """

    data: DataOrigin = Field(
        title="Data",
        description="Where the source and target samples come from",
    )

    transfer: TransferHyperParams = Field(
        title="Transfer Hyperparameters",
        description="Hyperparameters of the source relevance model",
        default=TransferHyperParams(),
    )

    p: SelectionCount = Field(
        title="Selected Source Samples",
        description="The number of most relevant source samples to use; 'all' or 'none' (target only)",
        default="all",
    )

    scheme: Literal["A", "B"] = Field(
        title="Transferability Scheme",
        description="A: transformation matrix entries; B: Gaussian density on hidden representations",
        default="A",
    )

    mode: Literal["soft", "hard"] = Field(
        title="Pseudo-Label Mode",
        description="Soft (normalized transferability) or hard (one-hot argmax) pseudo-labels",
        default="soft",
    )

    sigma2: PositiveFloat = Field(
        title="Gaussian Variance",
        description="The isotropic variance of the scheme B transferability density",
        default=1.0,
    )

    classifier: ClassifierOptions = Field(
        title="Classifier Options",
        description="Options for the weighted softmax classifier",
        default=ClassifierOptions(),
    )

    seed: NonNegativeInt = Field(
        title="Seed",
        description="The base seed of the experiment",
        default=0,
    )

    output: Optional[Path] = Field(
        title="Output",
        description="The path the JSON report is written to",
        default=None,
    )

    @property
    def variant(self) -> str:
        """
        Return the classifier variant name, e.g. SoftA
        """
        return f"{self.mode.capitalize()}{self.scheme}"

