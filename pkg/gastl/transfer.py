# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Alternating fit of the autoencoder and the row-sparse transformation matrix under the full
source sample selection objective
"""

from __future__ import annotations

from typing import Optional

import numpy as np
import ujson
from loguru import logger

from .autoencoder import AutoencoderParams, F1Objective, cross_loss, forward, graph_loss, init_params, recon_loss
from .dataset import DatasetBundle, ScalingParams
from .exceptions.dimensionmismatcherror import DimensionMismatchError
from .exceptions.invalidinputerror import InvalidInputError
from .exceptions.numericalerror import NumericalError
from .graph import SimilarityGraph, build_knn_graph
from .l21solver import f2_value, irls_solve
from .lbfgs import minimize
from .numerics import ArrayModel, Matrix, frozen, l21_norm
from .settings.transfer import TransferHyperParams


# Logging context for the module
log = logger.bind(subsystem="transfer")


class TransferModel(ArrayModel):
    """
    Fitted autoencoder, transformation matrix, similarity graph and the objective trace
    """

    params: AutoencoderParams
    a: np.ndarray
    graph: Optional[SimilarityGraph] = None
    trace: list[float]
    scaler: Optional[ScalingParams] = None
    hyperparams: TransferHyperParams

    @property
    def row_norms(self) -> np.ndarray:
        """Euclidean norm of every row of the transformation matrix"""
        return np.linalg.norm(self.a, axis=1)

    def to_json(self) -> str:
        """
        Serialize shapes, flattened parameters, hyperparameters, trace and scaler to a JSON document

        The graph is not stored; it is rebuilt from the data when needed.
        """
        document = {
            "shapes": {
                "d": self.params.d,
                "m": self.params.m,
                "n_src": int(self.a.shape[0]),
                "n_trg": int(self.a.shape[1]),
            },
            "theta": self.params.flatten().tolist(),
            "a": self.a.ravel().tolist(),
            "hyperparams": self.hyperparams.model_dump(mode="json", by_alias=True),
            "trace": list(self.trace),
            "scaler": (
                {"minimum": self.scaler.minimum.tolist(), "span": self.scaler.span.tolist()}
                if self.scaler is not None
                else None
            ),
        }
        return ujson.dumps(document, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "TransferModel":
        """
        Rebuild a model from the document written by to_json
        """
        try:
            document = ujson.loads(text)
            shapes = document["shapes"]
            d, m, n_src, n_trg = (int(shapes[key]) for key in ("d", "m", "n_src", "n_trg"))
            params = AutoencoderParams.from_flat(np.asarray(document["theta"], dtype=np.float64), d, m)
            a = np.asarray(document["a"], dtype=np.float64)
            if a.size != n_src * n_trg:
                raise DimensionMismatchError("a", expected=n_src * n_trg, actual=a.size)
            scaler = document.get("scaler")
            return cls(
                params=params,
                a=frozen(a.reshape(n_src, n_trg)),
                trace=[float(value) for value in document["trace"]],
                scaler=(
                    ScalingParams(
                        minimum=frozen(np.asarray(scaler["minimum"], dtype=np.float64)),
                        span=frozen(np.asarray(scaler["span"], dtype=np.float64)),
                    )
                    if scaler is not None
                    else None
                ),
                hyperparams=TransferHyperParams.model_validate(document["hyperparams"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"Invalid transfer model document: {exc}") from exc


# pylint: disable=too-many-arguments
def full_objective(
    params: AutoencoderParams,
    a: Matrix,
    bundle: DatasetBundle,
    graph: Optional[SimilarityGraph],
    mu: float,
    lam: float,
    gamma: float,
) -> float:
    """Evaluate L + mu C + lambda ||A||_{2,1} + gamma G.

    Args:
        params (AutoencoderParams): The autoencoder parameters
        a (Matrix): The transformation matrix
        bundle (DatasetBundle): The (scaled) data
        graph (Optional[SimilarityGraph]): The similarity graph; only needed when gamma > 0
        mu (float): Cross-domain balance
        lam (float): Row sparsity balance
        gamma (float): Graph balance

    Returns:
        float: The objective value
    """
    value = recon_loss(params, bundle.x_combined)
    value += mu * cross_loss(params, a, bundle.x_src, bundle.x_trg)
    value += lam * l21_norm(a)
    if gamma:
        if graph is None:
            raise InvalidInputError("A similarity graph is required when gamma > 0")
        value += gamma * graph_loss(params, bundle.x_combined, graph.laplacian)
    return value


def _a_step(
    params: AutoencoderParams,
    previous: Optional[Matrix],
    bundle: DatasetBundle,
    hp: TransferHyperParams,
) -> Matrix:
    """
    Update the transformation matrix against the current reconstructions of the target samples,
    keeping the previous matrix when the new one does not lower the sparse regression objective
    """
    h = forward(params, bundle.x_trg).xhat
    a, history = irls_solve(
        bundle.x_src,
        h,
        hp.mu,
        hp.lam,
        epsilon=hp.epsilon,
        tol=hp.irls_tolerance,
        max_iter=hp.irls_max_iterations,
    )
    log.bind(event="debug").debug(
        "Transformation matrix update: {n} reweighting iterations, objective {value:.10g}",
        n=len(history) - 1,
        value=history[-1],
    )

    if previous is not None and f2_value(bundle.x_src, h, previous, hp.mu, hp.lam) < history[-1]:
        log.bind(event="debug").debug("Keeping the previous transformation matrix")
        return previous
    return a


def fit(
    bundle: DatasetBundle,
    hp: TransferHyperParams,
    graph: Optional[SimilarityGraph] = None,
    run: Optional[str] = None,
) -> TransferModel:
    """Fit the autoencoder and the transformation matrix by alternating minimization.

    The transformation matrix is updated first, against the reconstructions of the freshly
    initialized autoencoder. Each round then runs an autoencoder update (L-BFGS) followed by
    a transformation matrix update (reweighted least squares). The loop ends when the full
    objective changes by at most the relative tolerance or after max_outer rounds.

    Args:
        bundle (DatasetBundle): The scaled data
        hp (TransferHyperParams): The hyperparameters
        graph (Optional[SimilarityGraph]): A prebuilt graph over [X_src X_trg]; built from the data when omitted
        run (Optional[str]): The run name bound to the log records

    Returns:
        TransferModel: The fitted model with one trace value per update round
    """
    flog = log.bind(run=run) if run else log

    if bundle.n_src < 1 or bundle.n_trg < 1:
        raise InvalidInputError("At least one source and one target training sample are required")

    if graph is None:
        graph = build_knn_graph(bundle.x_combined, hp.knn)
    elif graph.n != bundle.n_src + bundle.n_trg:
        raise DimensionMismatchError("graph", expected=bundle.n_src + bundle.n_trg, actual=graph.n)

    flog.bind(event="info").info(
        "Fitting transfer model: m={m}, mu={mu}, lambda={lam}, gamma={gamma}, n_src={n_src}, n_trg={n_trg}",
        m=hp.hidden_size,
        mu=hp.mu,
        lam=hp.lam,
        gamma=hp.gamma,
        n_src=bundle.n_src,
        n_trg=bundle.n_trg,
    )

    params = init_params(bundle.d, hp.hidden_size, hp.seed)

    # Initial transformation matrix update
    try:
        a = _a_step(params, None, bundle, hp)
    except NumericalError as exc:
        raise exc.at_iteration(0) from exc

    trace = [full_objective(params, a, bundle, graph, hp.mu, hp.lam, hp.gamma)]
    flog.bind(event="progress").info("Outer iteration 0: objective {value:.10g}", value=trace[0])

    for iteration in range(1, hp.max_outer + 1):
        try:
            # Autoencoder update with the transformation matrix fixed
            objective = F1Objective(
                a, bundle.x_src, bundle.x_trg, graph.laplacian, hp.mu, hp.gamma, hp.hidden_size
            )
            result = minimize(objective, params.flatten(), hp.lbfgs)
            params = AutoencoderParams.from_flat(result.x, bundle.d, hp.hidden_size)

            # Transformation matrix update with the autoencoder fixed
            a = _a_step(params, a, bundle, hp)
        except NumericalError as exc:
            raise exc.at_iteration(iteration) from exc

        value = full_objective(params, a, bundle, graph, hp.mu, hp.lam, hp.gamma)
        previous = trace[-1]
        trace.append(value)

        flog.bind(event="progress").info(
            "Outer iteration {i}: objective {value:.10g} (autoencoder update {reason} after {n} iterations)",
            i=iteration,
            value=value,
            reason=result.reason.value,
            n=result.iterations,
        )

        if abs(previous - value) <= hp.outer_tolerance * abs(previous):
            flog.bind(event="debug").debug("Objective converged after {i} outer iterations", i=iteration)
            break

    return TransferModel(
        params=params,
        a=frozen(np.array(a, copy=True)),
        graph=graph,
        trace=trace,
        hyperparams=hp,
    )
