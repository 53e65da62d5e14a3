# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Turn a fitted transfer model into source weights, transferability scores, pseudo-labels and
a top-p source selection
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .autoencoder import AutoencoderParams, forward
from .exceptions.dimensionmismatcherror import DimensionMismatchError
from .exceptions.invalidinputerror import InvalidInputError
from .numerics import ArrayModel, Matrix, frozen, row_norms


# Logging context for the module
log = logger.bind(subsystem="relevance")


class RelevanceWeights(ArrayModel):
    """
    Per-source-sample weights in [0, 1], the row norms of A divided by the largest row norm
    """

    values: np.ndarray


class TransferabilityMatrix(ArrayModel):
    """
    Non-negative n_src x n_ctrg transferability scores

    Scheme B also keeps the log scores, which stay finite where the scores underflow.
    """

    values: np.ndarray
    scheme: Literal["A", "B"]
    log_values: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def validate_values(self) -> "TransferabilityMatrix":
        """
        Ensure every score is finite and non-negative
        """
        if self.values.ndim != 2:
            raise ValueError("Transferability scores must form a matrix")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("Transferability scores must be finite and non-negative")
        if self.log_values is not None and self.log_values.shape != self.values.shape:
            raise ValueError("Log transferability scores must match the scores in shape")

        # Return the validated matrix
        return self


class PseudoLabelMatrix(ArrayModel):
    """
    n_src x n_ctrg label rows assigned to the source samples
    """

    values: np.ndarray
    mode: Literal["soft", "hard"]


class WeightSummary(BaseModel):
    """
    Summary statistics of the source weights
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    minimum: float = Field(title="Minimum", description="The smallest weight")
    maximum: float = Field(title="Maximum", description="The largest weight")
    mean: float = Field(title="Mean", description="The mean weight")
    median: float = Field(title="Median", description="The median weight")
    nonzero: int = Field(title="Non-Zero", description="The number of non-zero weights")
    selected_mean: Optional[float] = Field(
        title="Selected Mean",
        description="The mean weight of the selected source samples",
        default=None,
    )


def source_weights(a: Matrix) -> RelevanceWeights:
    """
    Row norms of A normalized by the largest row norm; all zero when A is zero
    """
    norms = row_norms(a)
    largest = norms.max(initial=0.0)
    if largest == 0:
        return RelevanceWeights(values=frozen(np.zeros_like(norms)))
    return RelevanceWeights(values=frozen(norms / largest))


def _check_labels(y_trg: np.ndarray, n_ctrg: int) -> np.ndarray:
    """
    Ensure labels are integers in [0, n_ctrg)
    """
    y_trg = np.asarray(y_trg)
    if y_trg.ndim != 1 or (y_trg.size and (y_trg.min() < 0 or y_trg.max() >= n_ctrg)):
        raise InvalidInputError(f"Target labels must be integers in [0, {n_ctrg})")
    return y_trg.astype(np.int64)


def transferability_scheme_a(a: Matrix, y_trg: np.ndarray, n_ctrg: int) -> TransferabilityMatrix:
    """
    Squared norm of the part of each row of A that maps onto the target samples of each class
    """
    y_trg = _check_labels(y_trg, n_ctrg)
    if a.shape[1] != y_trg.size:
        raise DimensionMismatchError("y_trg", expected=a.shape[1], actual=y_trg.size)
    membership = np.eye(n_ctrg)[y_trg]
    return TransferabilityMatrix(values=frozen(np.square(a) @ membership), scheme="A")


# pylint: disable=too-many-arguments
def transferability_scheme_b(
    params: AutoencoderParams,
    x_src: Matrix,
    x_trg: Matrix,
    y_trg: np.ndarray,
    n_ctrg: int,
    sigma2: float = 1.0,
) -> TransferabilityMatrix:
    """Isotropic Gaussian density of each source hidden representation around each target class mean.

    Tr(i, j) = (2 pi sigma2)^(-m/2) exp(-||Z_src(i) - mean_j||^2 / (2 sigma2)), where mean_j
    is the mean hidden representation of the target training samples of class j.

    Args:
        params (AutoencoderParams): The fitted autoencoder
        x_src (Matrix): The d x n_src source samples
        x_trg (Matrix): The d x n_trg target training samples
        y_trg (np.ndarray): The target training labels
        n_ctrg (int): The number of target classes
        sigma2 (float): The variance of the density

    Returns:
        TransferabilityMatrix: Scores and their logarithms
    """
    if sigma2 <= 0:
        raise InvalidInputError(f"sigma2 must be positive; got {sigma2}")
    y_trg = _check_labels(y_trg, n_ctrg)
    if x_trg.shape[1] != y_trg.size:
        raise DimensionMismatchError("y_trg", expected=x_trg.shape[1], actual=y_trg.size)

    z_src = forward(params, x_src).z
    z_trg = forward(params, x_trg).z

    # Class means of the target hidden representations
    counts = np.bincount(y_trg, minlength=n_ctrg)
    if np.any(counts == 0):
        raise InvalidInputError(f"Target classes without samples: {np.flatnonzero(counts == 0).tolist()}")
    means = np.column_stack([z_trg[:, y_trg == j].mean(axis=1) for j in range(n_ctrg)])

    # Squared distances between every source representation and every class mean
    distances = np.sum(np.square(z_src[:, :, None] - means[:, None, :]), axis=0)
    log_values = -0.5 * params.m * np.log(2.0 * np.pi * sigma2) - distances / (2.0 * sigma2)

    return TransferabilityMatrix(values=frozen(np.exp(log_values)), scheme="B", log_values=frozen(log_values))


def pseudo_labels(tr: TransferabilityMatrix, mode: Literal["soft", "hard"]) -> PseudoLabelMatrix:
    """Assign a label row to every source sample.

    Hard labels are one-hot at the largest score, ties going to the lowest class. Soft labels
    are the row-normalized scores; rows without any score get the uniform distribution.

    Args:
        tr (TransferabilityMatrix): The transferability scores
        mode (Literal["soft", "hard"]): The labeling mode

    Returns:
        PseudoLabelMatrix: The label rows
    """
    n_src, n_ctrg = tr.values.shape

    if mode == "hard":
        scores = tr.log_values if tr.log_values is not None else tr.values
        labels = np.zeros((n_src, n_ctrg))
        labels[np.arange(n_src), np.argmax(scores, axis=1)] = 1.0
        return PseudoLabelMatrix(values=frozen(labels), mode=mode)

    if mode != "soft":
        raise InvalidInputError(f"Unknown pseudo-label mode '{mode}'")

    # Normalize in log space when available
    if tr.log_values is not None:
        shifted = np.exp(tr.log_values - tr.log_values.max(axis=1, keepdims=True))
        return PseudoLabelMatrix(values=frozen(shifted / shifted.sum(axis=1, keepdims=True)), mode=mode)

    sums = tr.values.sum(axis=1, keepdims=True)
    empty = sums[:, 0] == 0
    labels = tr.values / np.where(sums == 0, 1.0, sums)
    labels[empty, :] = 1.0 / n_ctrg
    if np.any(empty):
        log.bind(event="debug").debug(
            "{n} source samples have no transferability; using uniform labels", n=int(empty.sum())
        )
    return PseudoLabelMatrix(values=frozen(labels), mode=mode)


def select_top_p(wt: RelevanceWeights, p: int) -> list[int]:
    """
    Indices of the p largest weights, largest first, ties going to the lower index
    """
    n_src = wt.values.size
    if not 0 <= p <= n_src:
        raise InvalidInputError(f"Cannot select {p} of {n_src} source samples")
    order = np.argsort(-wt.values, kind="stable")
    return [int(index) for index in order[:p]]


def weight_summary(wt: RelevanceWeights, selected: Optional[list[int]] = None) -> WeightSummary:
    """
    Summarize the weights and the weights of the selected samples
    """
    values = wt.values
    if values.size == 0:
        raise InvalidInputError("Cannot summarize an empty weight vector")
    return WeightSummary(
        minimum=float(values.min()),
        maximum=float(values.max()),
        mean=float(values.mean()),
        median=float(np.median(values)),
        nonzero=int(np.count_nonzero(values)),
        selected_mean=float(values[selected].mean()) if selected else None,
    )


def export_csv(
    path: Path,
    wt: RelevanceWeights,
    tr: TransferabilityMatrix,
    labels: PseudoLabelMatrix,
    selected: list[int],
) -> None:
    """
    Write weights, selection flags, transferability scores and pseudo-labels keyed by source index
    """
    n_src, n_ctrg = tr.values.shape
    if wt.values.size != n_src or labels.values.shape != (n_src, n_ctrg):
        raise DimensionMismatchError("relevance export", expected=(n_src, n_ctrg), actual=labels.values.shape)

    chosen = set(selected)
    header = ["index", "weight", "selected"]
    header += [f"tr_{j}" for j in range(n_ctrg)] + [f"label_{j}" for j in range(n_ctrg)]

    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write("# " + ",".join(header) + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        for index in range(n_src):
            writer.writerow(
                [index, format(wt.values[index], ".17g"), int(index in chosen)]
                + [format(value, ".17g") for value in tr.values[index]]
                + [format(value, ".17g") for value in labels.values[index]]
            )

    log.bind(event="debug").debug("Wrote relevance table for {n} source samples to '{path}'", n=n_src, path=path)
