# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Store the data origin of an experiment; CSV files or a synthetic bundle
"""

from typing import Literal, Optional

from pydantic import (
    Field,
    FilePath,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveInt,
    model_validator,
)

from ._base import Base


class FileData(Base):
    """
    Source, target training and target test samples stored as CSV files
    """

    origin: Literal["files"] = Field(
        title="Data Origin",
        description="Load the samples from CSV files",
        default="files",
    )

    source: FilePath = Field(
        title="Source File",
        description="The CSV file of unlabeled source samples (one sample per row)",
    )

    target_train: FilePath = Field(
        title="Target Training File",
        description="The CSV file of labeled target training samples",
    )

    target_test: FilePath = Field(
        title="Target Test File",
        description="The CSV file of labeled target test samples",
    )

    label_column: str = Field(
        title="Label Column",
        description="The header name of the label column in the target files",
        default="y",
    )


class SyntheticData(Base):
    """
    A synthetic clustered bundle with known source sample relevance
    """

    origin: Literal["synthetic"] = Field(
        title="Data Origin",
        description="Generate a synthetic bundle",
        default="synthetic",
    )

    features: PositiveInt = Field(
        title="Features",
        description="The feature dimension d",
        default=10,
    )

    clusters: PositiveInt = Field(
        title="Clusters",
        description="The number of clusters the source samples are drawn from",
        default=3,
    )

    source_per_cluster: PositiveInt = Field(
        title="Source Samples Per Cluster",
        description="The number of source samples drawn from each cluster",
        default=20,
    )

    target_per_class: PositiveInt = Field(
        title="Target Samples Per Class",
        description="The number of labeled target training samples per class",
        default=5,
    )

    test_per_class: Optional[PositiveInt] = Field(
        title="Test Samples Per Class",
        description="The number of target test samples per class; defaults to the training count",
        default=None,
    )

    relevant_clusters: PositiveInt = Field(
        title="Relevant Clusters",
        description="The number of clusters shared with the target task (one target class each)",
        default=2,
    )

    noise: NonNegativeFloat = Field(
        title="Noise",
        description="The standard deviation of the per-feature Gaussian noise around each cluster center",
        default=0.1,
    )

    seed: NonNegativeInt = Field(
        title="Data Seed",
        description="The seed for the synthetic generator",
        default=0,
    )

    @model_validator(mode="after")
    def validate_relevant_clusters(self) -> "SyntheticData":
        """
        Ensure that the relevant clusters are a subset of all clusters
        """
        if self.relevant_clusters > self.clusters:
            raise ValueError(
                f"relevant_clusters ({self.relevant_clusters}) must not exceed clusters ({self.clusters})"
            )

        # Return the validated values
        return self
