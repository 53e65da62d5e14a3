# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Weighted softmax classifier trained on pseudo-labeled source samples and labeled target samples
"""

from __future__ import annotations

from typing import Optional

import numpy as np
import ujson
from loguru import logger
from pydantic import model_validator
from scipy.special import log_softmax, softmax

from .exceptions.dimensionmismatcherror import DimensionMismatchError
from .exceptions.invalidinputerror import InvalidInputError
from .lbfgs import minimize
from .numerics import ArrayModel, Matrix, frozen
from .settings.classifier import ClassifierLbfgsOptions
from .settings.lbfgs import LbfgsOptions


# Logging context for the module
log = logger.bind(subsystem="classifier")

# Allowed deviation of a label row sum from 1
LABEL_SUM_TOLERANCE = 1e-10


class WeightedTrainingSet(ArrayModel):
    """
    Training samples (d x n), label rows (n x n_ctrg) and sample weights (n)

    The last n_target samples are the labeled target samples and carry weight 1.
    """

    x: np.ndarray
    labels: np.ndarray
    weights: np.ndarray
    n_target: int = 0

    @model_validator(mode="after")
    def validate_training_set(self) -> "WeightedTrainingSet":
        """
        Ensure consistent shapes, weights in [0, 1], unit target weights and normalized label rows
        """
        n = self.x.shape[1]
        if self.labels.ndim != 2 or self.labels.shape[0] != n:
            raise ValueError(f"Expected {n} label rows; got shape {self.labels.shape}")
        if self.weights.shape != (n,):
            raise ValueError(f"Expected {n} weights; got shape {self.weights.shape}")
        if np.any(self.weights < 0) or np.any(self.weights > 1):
            raise ValueError("Sample weights must lie in [0, 1]")
        if not 0 <= self.n_target <= n:
            raise ValueError(f"n_target must lie in [0, {n}]")
        if self.n_target and np.any(self.weights[n - self.n_target :] != 1.0):
            raise ValueError("Target samples must carry weight 1")
        if np.any(self.labels < 0) or np.any(np.abs(self.labels.sum(axis=1) - 1.0) > LABEL_SUM_TOLERANCE):
            raise ValueError("Label rows must be non-negative and sum to 1")

        # Return the validated training set
        return self

    @property
    def n_ctrg(self) -> int:
        """Number of classes"""
        return self.labels.shape[1]


class ClassifierParams(ArrayModel):
    """
    Classifier weights, one column per class (d x n_ctrg)
    """

    theta: np.ndarray

    def to_json(self) -> str:
        """
        Serialize the shape and the flattened (row-major) weights
        """
        return ujson.dumps({"shape": list(self.theta.shape), "theta": self.theta.ravel().tolist()})


# pylint: disable=too-many-arguments
def assemble_training_set(
    x_src: Matrix,
    src_labels: Matrix,
    src_weights: np.ndarray,
    x_trg: Matrix,
    y_trg: np.ndarray,
    n_ctrg: int,
) -> WeightedTrainingSet:
    """
    Stack weighted pseudo-labeled source samples in front of one-hot target samples with weight 1
    """
    if x_src.shape[0] != x_trg.shape[0]:
        raise DimensionMismatchError("x_trg", expected=x_src.shape[0], actual=x_trg.shape[0])
    target_labels = np.eye(n_ctrg)[np.asarray(y_trg, dtype=np.int64)]
    return WeightedTrainingSet(
        x=np.hstack([x_src, x_trg]),
        labels=np.vstack([np.reshape(src_labels, (-1, n_ctrg)), target_labels]),
        weights=np.concatenate([src_weights, np.ones(x_trg.shape[1])]),
        n_target=x_trg.shape[1],
    )


def softmax_cost_grad(theta: Matrix, ts: WeightedTrainingSet) -> tuple[float, Matrix]:
    """Weighted softmax cross entropy and its gradient.

    J = -(1/n) sum_i w_i sum_j L_ij log softmax_j(theta^T x_i), normalized by the total sample
    count n whatever the weights.

    Args:
        theta (Matrix): The d x n_ctrg weights
        ts (WeightedTrainingSet): The training set

    Returns:
        tuple[float, Matrix]: The cost and the d x n_ctrg gradient
    """
    if theta.shape != (ts.x.shape[0], ts.n_ctrg):
        raise DimensionMismatchError("classifier weights", expected=(ts.x.shape[0], ts.n_ctrg), actual=theta.shape)

    n = ts.x.shape[1]
    logits = theta.T @ ts.x
    log_probs = log_softmax(logits, axis=0)

    weighted = ts.weights[:, None] * ts.labels
    cost = -float(np.sum(weighted * log_probs.T)) / n
    residual = ts.weights[:, None] * (ts.labels - np.exp(log_probs).T)
    gradient = -(ts.x @ residual) / n
    return cost, gradient


def train_softmax(
    ts: WeightedTrainingSet,
    opts: LbfgsOptions = ClassifierLbfgsOptions(),
    seed: Optional[int] = None,
) -> ClassifierParams:
    """Minimize the weighted softmax cost with L-BFGS starting from zero weights.

    Samples with weight 0 only scale the cost by a constant, so they are left out of the
    minimization and the result does not depend on them.

    Args:
        ts (WeightedTrainingSet): The training set
        opts (LbfgsOptions): The minimizer options
        seed (Optional[int]): Accepted for symmetry with the other trainers; the zero start is deterministic

    Returns:
        ClassifierParams: The trained weights
    """
    del seed
    active = ts.weights > 0
    if not np.any(active):
        raise InvalidInputError("Cannot train a classifier when every sample weight is zero")

    if not np.all(active):
        ts = WeightedTrainingSet(
            x=ts.x[:, active],
            labels=ts.labels[active],
            weights=ts.weights[active],
            n_target=ts.n_target,
        )

    shape = (ts.x.shape[0], ts.n_ctrg)

    def objective(flat: np.ndarray) -> tuple[float, np.ndarray]:
        """Cost and flat gradient"""
        cost, gradient = softmax_cost_grad(flat.reshape(shape), ts)
        return cost, gradient.ravel()

    result = minimize(objective, np.zeros(shape[0] * shape[1]), opts)

    log.bind(event="debug").debug(
        "Classifier trained on {n} weighted samples: cost {cost:.10g} after {i} iterations ({reason})",
        n=ts.x.shape[1],
        cost=result.value,
        i=result.iterations,
        reason=result.reason.value,
    )

    return ClassifierParams(theta=frozen(result.x.reshape(shape)))


def predict(params: ClassifierParams, x: Matrix) -> tuple[np.ndarray, Matrix]:
    """
    Class probabilities (n x n_ctrg) and labels of the columns of x; ties go to the lowest class
    """
    if x.ndim != 2 or x.shape[0] != params.theta.shape[0]:
        raise DimensionMismatchError("prediction input", expected=(params.theta.shape[0], "n"), actual=x.shape)
    logits = params.theta.T @ x
    probabilities = softmax(logits, axis=0).T
    return np.argmax(logits, axis=0), probabilities
