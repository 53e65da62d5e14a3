# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Single hidden layer autoencoder: forward pass, the reconstruction, cross-domain and graph
losses, and the analytic gradient of the autoencoder subproblem.

Flattened parameter order: W1 row-major, W2 row-major, b1, b2.
"""

from __future__ import annotations

import numpy as np
from loguru import logger

from .exceptions.dimensionmismatcherror import DimensionMismatchError
from .exceptions.invalidinputerror import InvalidInputError
from .exceptions.numericalerror import NumericalError
from .numerics import ArrayModel, Matrix, sigmoid, sigmoid_slope, squared_frobenius, trace_quadratic


# Logging context for the module
log = logger.bind(subsystem="autoencoder")


class AutoencoderParams(ArrayModel):
    """
    Autoencoder weights W1 (m x d), W2 (d x m) and biases b1 (m), b2 (d)
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    @property
    def d(self) -> int:
        """Input dimension"""
        return self.w1.shape[1]

    @property
    def m(self) -> int:
        """Hidden size"""
        return self.w1.shape[0]

    @property
    def size(self) -> int:
        """Number of scalar parameters"""
        return 2 * self.d * self.m + self.d + self.m

    def flatten(self) -> np.ndarray:
        """
        Pack the parameters into one vector
        """
        return np.concatenate([self.w1.ravel(), self.w2.ravel(), self.b1, self.b2])

    @classmethod
    def from_flat(cls, theta: np.ndarray, d: int, m: int) -> "AutoencoderParams":
        """
        Unpack a parameter vector produced by flatten()
        """
        theta = np.asarray(theta, dtype=np.float64)
        expected = 2 * d * m + d + m
        if theta.shape != (expected,):
            raise DimensionMismatchError("parameter vector", expected=(expected,), actual=theta.shape)
        dm = d * m
        return cls(
            w1=theta[:dm].reshape(m, d).copy(),
            w2=theta[dm : 2 * dm].reshape(d, m).copy(),
            b1=theta[2 * dm : 2 * dm + m].copy(),
            b2=theta[2 * dm + m :].copy(),
        )


class ForwardCache(ArrayModel):
    """
    Hidden activations Z (m x n) and reconstructions Xhat (d x n)
    """

    z: np.ndarray
    xhat: np.ndarray


def init_params(d: int, m: int, seed: int) -> AutoencoderParams:
    """
    Uniform weights in [-r, r] with r = sqrt(6 / (d + m)); zero biases
    """
    if d < 1 or m < 1:
        raise InvalidInputError(f"Autoencoder dimensions must be positive; got d={d}, m={m}")
    rng = np.random.default_rng(seed)
    bound = np.sqrt(6.0 / (d + m))
    return AutoencoderParams(
        w1=rng.uniform(-bound, bound, size=(m, d)),
        b1=np.zeros(m),
        w2=rng.uniform(-bound, bound, size=(d, m)),
        b2=np.zeros(d),
    )


def forward(params: AutoencoderParams, x: Matrix) -> ForwardCache:
    """
    Hidden activations f(W1 X + b1) and reconstructions g(W2 Z + b2)
    """
    if x.ndim != 2 or x.shape[0] != params.d:
        raise DimensionMismatchError("autoencoder input", expected=(params.d, "n"), actual=x.shape)
    z = sigmoid(params.w1 @ x + params.b1[:, None])
    xhat = sigmoid(params.w2 @ z + params.b2[:, None])
    return ForwardCache(z=z, xhat=xhat)


def recon_loss(params: AutoencoderParams, x: Matrix) -> float:
    """
    Reconstruction loss (1 / 2n) ||X - h(X)||_F^2
    """
    cache = forward(params, x)
    return squared_frobenius(x - cache.xhat) / (2.0 * x.shape[1])


def _check_transform(a: Matrix, x_src: Matrix, x_trg: Matrix) -> None:
    """
    Validate the shape of the transformation matrix against the source and target samples
    """
    if x_src.shape[0] != x_trg.shape[0]:
        raise DimensionMismatchError("x_trg", expected=x_src.shape[0], actual=x_trg.shape[0])
    if a.shape != (x_src.shape[1], x_trg.shape[1]):
        raise DimensionMismatchError("transformation matrix", expected=(x_src.shape[1], x_trg.shape[1]), actual=a.shape)


def cross_loss(params: AutoencoderParams, a: Matrix, x_src: Matrix, x_trg: Matrix) -> float:
    """
    Cross-domain loss (1 / 2 n_trg) ||X_src A - h(X_trg)||_F^2
    """
    _check_transform(a, x_src, x_trg)
    cache = forward(params, x_trg)
    return squared_frobenius(x_src @ a - cache.xhat) / (2.0 * x_trg.shape[1])


def graph_loss(params: AutoencoderParams, x: Matrix, laplacian: Matrix) -> float:
    """
    Local structure loss Tr(Z L Z^T) over the hidden activations
    """
    if laplacian.shape != (x.shape[1], x.shape[1]):
        raise DimensionMismatchError("laplacian", expected=(x.shape[1], x.shape[1]), actual=laplacian.shape)
    return trace_quadratic(forward(params, x).z, laplacian)


class F1Objective:
    """
    Value and gradient of L(theta) + mu C(theta, A) + gamma G(theta) with A fixed

    Instances are callables mapping a flat parameter vector to (value, gradient), as
    expected by the L-BFGS minimizer.
    """

    # pylint: disable=too-many-arguments
    def __init__(
        self,
        a: Matrix,
        x_src: Matrix,
        x_trg: Matrix,
        laplacian: Matrix,
        mu: float,
        gamma: float,
        m: int,
    ):
        """
        Precompute the quantities that do not depend on the autoencoder parameters
        """
        if mu < 0 or gamma < 0:
            raise InvalidInputError(f"mu and gamma must be non-negative; got mu={mu}, gamma={gamma}")
        _check_transform(a, x_src, x_trg)

        self.x = np.hstack([x_src, x_trg])
        if laplacian.shape != (self.x.shape[1], self.x.shape[1]):
            raise DimensionMismatchError(
                "laplacian", expected=(self.x.shape[1], self.x.shape[1]), actual=laplacian.shape
            )

        self.n_src = x_src.shape[1]
        self.n_trg = x_trg.shape[1]
        self.d = x_src.shape[0]
        self.m = m
        self.mu = mu
        self.gamma = gamma
        self.laplacian = laplacian

        # Transformed source samples X_src A, compared against h(X_trg)
        self.mapped = x_src @ a

    def __call__(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        """
        Evaluate the objective and its gradient at a flat parameter vector
        """
        params = AutoencoderParams.from_flat(theta, self.d, self.m)
        value, grads = self.evaluate(params)
        return value, np.concatenate([grads["w1"].ravel(), grads["w2"].ravel(), grads["b1"], grads["b2"]])

    def evaluate(self, params: AutoencoderParams) -> tuple[float, dict[str, np.ndarray]]:
        """
        Evaluate the objective and the gradient blocks w1, w2, b1, b2
        """
        n = self.x.shape[1]
        cache = forward(params, self.x)
        z, xhat = cache.z, cache.xhat

        # Reconstruction term over all samples
        residual = xhat - self.x
        value = squared_frobenius(residual) / (2.0 * n)
        delta3 = residual * sigmoid_slope(xhat) / n
        delta2 = (params.w2.T @ delta3) * sigmoid_slope(z)
        grad_w2 = delta3 @ z.T
        grad_b2 = delta3.sum(axis=1)
        grad_w1 = delta2 @ self.x.T
        grad_b1 = delta2.sum(axis=1)

        # Cross-domain term; the target samples are the trailing columns of the combined matrix
        if self.mu:
            z_trg = z[:, self.n_src :]
            xhat_trg = xhat[:, self.n_src :]
            x_trg = self.x[:, self.n_src :]
            cross = xhat_trg - self.mapped
            value += self.mu * squared_frobenius(cross) / (2.0 * self.n_trg)
            delta3_c = (self.mu / self.n_trg) * cross * sigmoid_slope(xhat_trg)
            delta2_c = (params.w2.T @ delta3_c) * sigmoid_slope(z_trg)
            grad_w2 += delta3_c @ z_trg.T
            grad_b2 += delta3_c.sum(axis=1)
            grad_w1 += delta2_c @ x_trg.T
            grad_b1 += delta2_c.sum(axis=1)

        # Graph term; skipped entirely when switched off so the graph cannot influence the result
        if self.gamma:
            zl = z @ self.laplacian
            value += self.gamma * float(np.sum(zl * z))
            delta_g = 2.0 * self.gamma * zl * sigmoid_slope(z)
            grad_w1 += delta_g @ self.x.T
            grad_b1 += delta_g.sum(axis=1)

        grads = {"w1": grad_w1, "w2": grad_w2, "b1": grad_b1, "b2": grad_b2}

        # Name the first block that went non-finite
        if not np.isfinite(value):
            raise NumericalError("Autoencoder objective is not finite", block="value")
        for name, block in grads.items():
            if not np.all(np.isfinite(block)):
                raise NumericalError("Autoencoder gradient is not finite", block=name)

        return value, grads


# pylint: disable=too-many-arguments
def f1_value_and_gradient(
    params: AutoencoderParams,
    a: Matrix,
    x_src: Matrix,
    x_trg: Matrix,
    laplacian: Matrix,
    mu: float,
    gamma: float,
) -> tuple[float, np.ndarray]:
    """Value and flat gradient of the autoencoder subproblem with A fixed.

    Args:
        params (AutoencoderParams): The autoencoder parameters
        a (Matrix): The n_src x n_trg transformation matrix
        x_src (Matrix): The d x n_src source samples
        x_trg (Matrix): The d x n_trg target training samples
        laplacian (Matrix): The Laplacian over [X_src X_trg]
        mu (float): Cross-domain balance
        gamma (float): Graph balance

    Returns:
        tuple[float, np.ndarray]: The value and the gradient in flatten() order
    """
    objective = F1Objective(a, x_src, x_trg, laplacian, mu, gamma, params.m)
    return objective(params.flatten())
