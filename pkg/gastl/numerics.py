# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Shared matrix kernels: matrix norms, the sigmoid activation and trace utilities
"""

from __future__ import annotations

from pprint import pformat

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import expit

from .exceptions.dimensionmismatcherror import DimensionMismatchError
from .exceptions.invalidinputerror import InvalidInputError


# Dense float64 matrix or vector
Matrix = np.ndarray


class ArrayModel(BaseModel):
    """
    Base model for immutable containers holding numpy arrays
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid", frozen=True)

    @property
    def pretty(self) -> str:
        """
        Return a pretty printed summary of the container; arrays are shown by shape
        """
        summary = {
            name: (f"array{value.shape}" if isinstance(value, np.ndarray) else value)
            for name, value in self.__dict__.items()
        }
        return pformat(summary, indent=4, width=120)


def as_matrix(values, name: str = "matrix") -> Matrix:
    """
    Convert the input into a finite two dimensional float64 array
    """
    matrix = np.asarray(values, dtype=np.float64)
    if matrix.ndim != 2:
        raise DimensionMismatchError(name, expected="2 dimensions", actual=f"{matrix.ndim} dimensions")
    ensure_finite(matrix, name)
    return matrix


def ensure_finite(values: Matrix, name: str) -> None:
    """
    Raise an InvalidInputError if the array has NaN or infinite entries
    """
    if not np.all(np.isfinite(values)):
        raise InvalidInputError(f"{name} has non-finite entries")


def frozen(values: Matrix) -> Matrix:
    """
    Return the array marked read-only
    """
    values.setflags(write=False)
    return values


def lrp_norm(w: Matrix, r: float, p: float) -> float:
    """Compute the l_{r,p} norm of a matrix.

    Rows are reduced with the l_r norm and the row norms with the l_p norm:
    (sum_i (sum_j |w_ij|^r)^(p/r))^(1/p).

    Args:
        w (Matrix): The matrix
        r (float): The exponent applied within rows
        p (float): The exponent applied across rows

    Returns:
        float: The norm value
    """
    if r <= 0 or p <= 0:
        raise InvalidInputError(f"The norm exponents must be positive; got r={r}, p={p}")
    w = np.asarray(w, dtype=np.float64)
    ensure_finite(w, "norm argument")

    # Accumulate in extended precision
    magnitudes = np.abs(w).astype(np.longdouble)
    rows = np.sum(magnitudes**r, axis=-1) ** (p / r)
    return float(np.sum(rows) ** (1.0 / p))


def l21_norm(w: Matrix) -> float:
    """
    Sum of the Euclidean norms of the rows of the matrix
    """
    return lrp_norm(w, 2.0, 1.0)


def row_norms(w: Matrix) -> Matrix:
    """
    Euclidean norm of every row
    """
    return np.linalg.norm(w, axis=1)


def sigmoid(values: Matrix) -> Matrix:
    """
    Elementwise logistic function; stable for large negative inputs
    """
    return expit(np.asarray(values, dtype=np.float64))


def sigmoid_slope(activation: Matrix) -> Matrix:
    """
    Derivative of the sigmoid expressed through its output
    """
    return activation * (1.0 - activation)


def squared_frobenius(values: Matrix) -> float:
    """
    Sum of the squared entries
    """
    return float(np.sum(np.square(values)))


def trace_quadratic(z: Matrix, laplacian: Matrix) -> float:
    """
    Tr(Z L Z^T) without forming the product matrix
    """
    if z.shape[1] != laplacian.shape[0]:
        raise DimensionMismatchError("laplacian", expected=z.shape[1], actual=laplacian.shape[0])
    return float(np.sum((z @ laplacian) * z))
