# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Test the shared matrix kernels
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gastl.exceptions.dimensionmismatcherror import DimensionMismatchError
from gastl.exceptions.invalidinputerror import InvalidInputError
from gastl.numerics import as_matrix, l21_norm, lrp_norm, row_norms, sigmoid, sigmoid_slope, trace_quadratic


# Finite matrices of moderate magnitude
matrices = arrays(
    dtype=np.float64,
    shape=st.tuples(st.integers(1, 6), st.integers(1, 6)),
    elements=st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False),
)


def test_l21_is_sum_of_row_norms(rng: np.random.Generator):
    """
    The l2,1 norm adds up the Euclidean row norms
    """
    w = rng.normal(size=(7, 4))
    assert l21_norm(w) == pytest.approx(float(np.sum(np.linalg.norm(w, axis=1))), rel=1e-12)
    assert lrp_norm(w, 2, 1) == l21_norm(w)
    assert np.allclose(row_norms(w), np.linalg.norm(w, axis=1))


def test_l22_is_frobenius(rng: np.random.Generator):
    """
    The l2,2 norm is the Frobenius norm
    """
    w = rng.normal(size=(5, 3))
    assert lrp_norm(w, 2, 2) == pytest.approx(float(np.linalg.norm(w)), rel=1e-12)


def test_lrp_examples():
    """
    Hand-computed norm values
    """
    w = np.array([[3.0, 4.0], [0.0, 0.0], [1.0, 0.0]])
    assert l21_norm(w) == pytest.approx(6.0)
    assert lrp_norm(w, 1, 1) == pytest.approx(8.0)
    assert l21_norm(np.zeros((3, 2))) == 0.0


@settings(max_examples=50, deadline=None)
@given(w=matrices, scale=st.floats(-100, 100, allow_nan=False))
def test_lrp_homogeneity(w: np.ndarray, scale: float):
    """
    Norms are absolutely homogeneous
    """
    expected = abs(scale) * lrp_norm(w, 2, 1)
    assert lrp_norm(scale * w, 2, 1) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_lrp_rejects_bad_input():
    """
    Non-positive exponents and non-finite entries are rejected
    """
    with pytest.raises(InvalidInputError):
        lrp_norm(np.ones((2, 2)), 0, 1)
    with pytest.raises(InvalidInputError):
        lrp_norm(np.ones((2, 2)), 2, -1)
    with pytest.raises(InvalidInputError):
        lrp_norm(np.array([[1.0, np.nan]]), 2, 1)


def test_as_matrix():
    """
    Inputs must be finite and two dimensional
    """
    assert as_matrix([[1, 2], [3, 4]]).dtype == np.float64
    with pytest.raises(DimensionMismatchError):
        as_matrix([1.0, 2.0])
    with pytest.raises(InvalidInputError):
        as_matrix([[np.inf]])


def test_sigmoid_is_stable():
    """
    The sigmoid saturates without overflow and its slope uses the activation
    """
    values = sigmoid(np.array([-1000.0, 0.0, 1000.0]))
    assert np.all(np.isfinite(values))
    assert values[0] == 0.0
    assert values[1] == 0.5
    assert values[2] == 1.0
    assert sigmoid_slope(np.array([0.5]))[0] == 0.25


def test_trace_quadratic(rng: np.random.Generator):
    """
    Tr(Z L Z^T) without the product matches the explicit trace
    """
    z = rng.normal(size=(3, 6))
    laplacian = rng.normal(size=(6, 6))
    assert trace_quadratic(z, laplacian) == pytest.approx(float(np.trace(z @ laplacian @ z.T)), rel=1e-12)
    with pytest.raises(DimensionMismatchError):
        trace_quadratic(z, np.eye(5))
