# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Iteratively reweighted solver for the row-sparse transformation matrix:
min_A (mu / 2 n_trg) ||X_src A - H||_F^2 + lambda ||A||_{2,1}
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from loguru import logger

from .exceptions.dimensionmismatcherror import DimensionMismatchError
from .exceptions.invalidinputerror import InvalidInputError
from .exceptions.numericalerror import NumericalError
from .numerics import ArrayModel, Matrix, l21_norm, row_norms, squared_frobenius


# Logging context for the module
log = logger.bind(subsystem="l21solver")

# Relative ridge added to the diagonal when the linear system is singular
RIDGE = 1e-10


class ReweightDiagonal(ArrayModel):
    """
    Diagonal reweighting matrix U stored as its n_src diagonal entries
    """

    u: np.ndarray
    epsilon: float


def update_u(a: Matrix, epsilon: float = 1e-8) -> ReweightDiagonal:
    """
    Reweighting entries 1 / (||A_i|| + epsilon) for non-zero rows of A and 0 for zero rows
    """
    if epsilon <= 0:
        raise InvalidInputError(f"The reweighting constant must be positive; got {epsilon}")
    norms = row_norms(a)
    nonzero = norms != 0
    u = np.zeros_like(norms)
    u[nonzero] = 1.0 / (norms[nonzero] + epsilon)
    return ReweightDiagonal(u=u, epsilon=epsilon)


def f2_value(x_src: Matrix, h: Matrix, a: Matrix, mu: float, lam: float) -> float:
    """
    The transformation matrix objective mu C + lambda ||A||_{2,1}
    """
    n_trg = h.shape[1]
    return mu * squared_frobenius(x_src @ a - h) / (2.0 * n_trg) + lam * l21_norm(a)


def _cholesky(system: Matrix) -> tuple[Matrix, bool] | None:
    """
    Cholesky factor of a symmetric system; None when the system is not numerically positive definite
    """
    try:
        factor = scipy.linalg.cho_factor(system, lower=False, check_finite=False)
    except scipy.linalg.LinAlgError:
        return None

    # Reject factorizations that only succeeded through rounding
    pivots = np.square(np.diag(factor[0]))
    if pivots.min() <= system.shape[0] * np.finfo(np.float64).eps * pivots.max():
        return None
    return factor


# pylint: disable=too-many-arguments
def solve_a_given_u(
    x_src: Matrix,
    h: Matrix,
    u: ReweightDiagonal,
    mu: float,
    lam: float,
    n_trg: int,
) -> Matrix:
    """Solve (mu X_src^T X_src + n_trg lambda U) A = mu X_src^T H for A.

    The system is solved by Cholesky factorization. A singular system is retried once
    with a small ridge proportional to its mean diagonal.

    Args:
        x_src (Matrix): The d x n_src source samples
        h (Matrix): The d x n_trg reconstructed target samples
        u (ReweightDiagonal): The reweighting entries
        mu (float): Cross-domain balance
        lam (float): Row sparsity balance
        n_trg (int): The number of target samples

    Returns:
        Matrix: The n_src x n_trg transformation matrix
    """
    if mu <= 0 or lam < 0:
        raise InvalidInputError(f"Expected mu > 0 and lambda >= 0; got mu={mu}, lambda={lam}")
    if h.shape[0] != x_src.shape[0]:
        raise DimensionMismatchError("H", expected=(x_src.shape[0], n_trg), actual=h.shape)
    if u.u.shape != (x_src.shape[1],):
        raise DimensionMismatchError("U", expected=(x_src.shape[1],), actual=u.u.shape)

    n_src = x_src.shape[1]
    system = mu * (x_src.T @ x_src) + n_trg * lam * np.diag(u.u)
    rhs = mu * (x_src.T @ h)

    factor = _cholesky(system)
    if factor is None:
        # Retry once with a ridge scaled to the system
        scale = np.trace(system) / n_src
        ridge = RIDGE * (scale if scale > 0 else 1.0)
        log.bind(event="debug").debug("Singular system; retrying with ridge {ridge:.3e}", ridge=ridge)
        system = system + ridge * np.eye(n_src)
        factor = _cholesky(system)

    if factor is None:
        lu, _ = scipy.linalg.lu_factor(system, check_finite=False)
        pivot = float(np.min(np.abs(np.diag(lu))))
        raise NumericalError(f"Transformation matrix system is singular; smallest pivot {pivot:.3e}", block="A")

    a = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    if not np.all(np.isfinite(a)):
        raise NumericalError("Transformation matrix solve produced non-finite values", block="A")
    return a


# pylint: disable=too-many-arguments
def irls_solve(
    x_src: Matrix,
    h: Matrix,
    mu: float,
    lam: float,
    epsilon: float = 1e-8,
    tol: float = 1e-6,
    max_iter: int = 50,
) -> tuple[Matrix, list[float]]:
    """Minimize the transformation matrix objective by iterative reweighting.

    Starts from the least-squares solution (U = 0) and alternates U and A updates until the
    objective changes by at most tol relative. A reweighting step that would raise the
    objective ends the loop and the best iterate is kept, so the history never increases.

    Args:
        x_src (Matrix): The d x n_src source samples
        h (Matrix): The d x n_trg reconstructed target samples
        mu (float): Cross-domain balance
        lam (float): Row sparsity balance
        epsilon (float): Reweighting constant
        tol (float): Relative convergence tolerance
        max_iter (int): Maximum number of reweighting iterations

    Returns:
        tuple[Matrix, list[float]]: The transformation matrix and the objective history
    """
    if tol <= 0:
        raise InvalidInputError(f"The tolerance must be positive; got {tol}")

    n_src, n_trg = x_src.shape[1], h.shape[1]

    # Least-squares warm start
    a = solve_a_given_u(x_src, h, ReweightDiagonal(u=np.zeros(n_src), epsilon=epsilon), mu, lam, n_trg)
    value = f2_value(x_src, h, a, mu, lam)
    history = [value]

    # Without the sparsity term the warm start is already the minimizer
    if lam == 0:
        return a, history

    for iteration in range(1, max_iter + 1):
        candidate = solve_a_given_u(x_src, h, update_u(a, epsilon), mu, lam, n_trg)
        candidate_value = f2_value(x_src, h, candidate, mu, lam)

        if candidate_value > value:
            log.bind(event="debug").debug(
                "Reweighting step {i} raised the objective by {delta:.3e}; keeping the previous iterate",
                i=iteration,
                delta=candidate_value - value,
            )
            break

        converged = abs(candidate_value - value) <= tol * max(1.0, abs(value))
        a, value = candidate, candidate_value
        history.append(value)

        log.bind(event="progress").trace("Reweighting iteration {i}: objective {value:.10g}", i=iteration, value=value)

        if converged:
            break

    return a, history
