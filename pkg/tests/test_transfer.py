# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Test the alternating fit of the autoencoder and the transformation matrix
"""

import numpy as np
import pytest

from gastl import transfer
from gastl.dataset import DatasetBundle, fit_scaler, make_synthetic_transfer, scale_bundle
from gastl.exceptions.dimensionmismatcherror import DimensionMismatchError
from gastl.exceptions.invalidinputerror import InvalidInputError
from gastl.exceptions.numericalerror import NumericalError
from gastl.graph import build_knn_graph
from gastl.settings.lbfgs import LbfgsOptions
from gastl.settings.transfer import TransferHyperParams
from gastl.transfer import TransferModel, fit, full_objective


def test_objective_never_increases():
    """
    The full objective is non-increasing over ten alternations on a clustered problem
    """
    bundle = make_synthetic_transfer(
        d=10, clusters=3, n_src_per_cluster=20, n_trg_per_class=15, relevant_clusters=2, noise_sd=0.1, seed=5
    )
    scaled, _ = scale_bundle(bundle)
    assert scaled.n_src == 60 and scaled.n_trg == 30

    hp = TransferHyperParams(
        hidden_size=5,
        lam=1e-2,
        gamma=1e-3,
        max_outer=10,
        outer_tolerance=0.0,
        lbfgs=LbfgsOptions(max_iterations=50),
    )
    model = fit(scaled, hp)

    # Ten rounds unless the objective stops changing exactly
    assert len(model.trace) == 11 or model.trace[-1] == model.trace[-2]
    for earlier, later in zip(model.trace, model.trace[1:]):
        assert later <= earlier + 1e-8 * abs(earlier)

    assert model.trace[-1] == pytest.approx(
        full_objective(model.params, model.a, scaled, model.graph, hp.mu, hp.lam, hp.gamma), rel=1e-12
    )


def test_model_shapes(small_bundle: DatasetBundle, fast_transfer: TransferHyperParams):
    """
    The fitted model holds an n_src x n_trg matrix and a graph over all training samples
    """
    model = fit(small_bundle, fast_transfer)

    assert model.a.shape == (12, 6)
    assert model.row_norms.shape == (12,)
    assert model.params.d == 6 and model.params.m == 4
    assert model.graph is not None and model.graph.n == 18
    assert 2 <= len(model.trace) <= 4
    assert all(np.isfinite(model.trace))


def test_fit_is_deterministic(small_bundle: DatasetBundle, fast_transfer: TransferHyperParams):
    """
    The same seed gives the same model; another seed gives another initialization
    """
    first = fit(small_bundle, fast_transfer)
    second = fit(small_bundle, fast_transfer)
    other = fit(small_bundle, fast_transfer.model_copy(update={"seed": 1}))

    assert first.trace == second.trace
    assert np.array_equal(first.a, second.a)
    assert np.array_equal(first.params.w1, second.params.w1)
    assert not np.array_equal(first.params.w1, other.params.w1)


def test_prebuilt_graph(small_bundle: DatasetBundle, fast_transfer: TransferHyperParams):
    """
    A prebuilt graph is used as given; one of the wrong size is rejected
    """
    graph = build_knn_graph(small_bundle.x_combined, fast_transfer.knn)
    model = fit(small_bundle, fast_transfer, graph=graph)
    assert model.graph is graph
    assert model.trace == fit(small_bundle, fast_transfer).trace

    with pytest.raises(DimensionMismatchError):
        fit(small_bundle, fast_transfer, graph=build_knn_graph(small_bundle.x_src, fast_transfer.knn))


def test_graph_is_ignored_without_gamma(small_bundle: DatasetBundle, fast_transfer: TransferHyperParams):
    """
    With gamma = 0 two different graphs give bitwise identical fits
    """
    hp = fast_transfer.updated(gamma=0.0)
    near = build_knn_graph(small_bundle.x_combined, 2)
    far = build_knn_graph(small_bundle.x_combined, 6)
    assert not np.array_equal(near.laplacian, far.laplacian)

    first = fit(small_bundle, hp, graph=near)
    second = fit(small_bundle, hp, graph=far)

    assert first.trace == second.trace
    assert np.array_equal(first.a, second.a)
    assert np.array_equal(first.params.flatten(), second.params.flatten())


def test_huge_lambda_zeroes_every_row(small_bundle: DatasetBundle, fast_transfer: TransferHyperParams):
    """
    An overwhelming sparsity weight drives every row of the transformation matrix to zero
    """
    model = fit(small_bundle, fast_transfer.updated(lam=1e6))

    assert model.row_norms.shape == (12,)
    assert float(np.max(model.row_norms)) <= 1e-6


def test_full_objective_needs_graph(small_bundle: DatasetBundle, fast_transfer: TransferHyperParams):
    """
    The graph term requires a graph; without gamma the graph may be omitted
    """
    model = fit(small_bundle, fast_transfer)

    with pytest.raises(InvalidInputError):
        full_objective(model.params, model.a, small_bundle, None, 1.0, 1e-2, 1e-3)

    with_graph = full_objective(model.params, model.a, small_bundle, model.graph, 1.0, 1e-2, 0.0)
    without_graph = full_objective(model.params, model.a, small_bundle, None, 1.0, 1e-2, 0.0)
    assert with_graph == without_graph


def test_numerical_failure_names_iteration(
    monkeypatch: pytest.MonkeyPatch, small_bundle: DatasetBundle, fast_transfer: TransferHyperParams
):
    """
    A failing transformation matrix update is reported with its outer iteration
    """
    original = transfer.irls_solve
    calls = []

    def failing(*args, **kwargs):
        calls.append(1)
        if len(calls) == 2:
            raise NumericalError("Singular system", block="A")
        return original(*args, **kwargs)

    monkeypatch.setattr(transfer, "irls_solve", failing)
    with pytest.raises(NumericalError) as info:
        fit(small_bundle, fast_transfer)

    assert info.value.iteration == 1
    assert info.value.block == "A"
    assert "outer iteration 1" in str(info.value)


def test_json_round_trip(small_bundle: DatasetBundle, fast_transfer: TransferHyperParams):
    """
    Serialized models read back with the same parameters, matrix, trace and scaler
    """
    model = fit(small_bundle, fast_transfer).model_copy(
        update={"scaler": fit_scaler(small_bundle.x_src, small_bundle.x_trg)}
    )
    loaded = TransferModel.from_json(model.to_json())

    assert np.allclose(loaded.params.flatten(), model.params.flatten(), rtol=1e-15, atol=0.0)
    assert np.allclose(loaded.a, model.a, rtol=1e-15, atol=0.0)
    assert np.allclose(loaded.trace, model.trace, rtol=1e-15, atol=0.0)
    assert loaded.scaler is not None and np.allclose(loaded.scaler.span, model.scaler.span, rtol=1e-15)
    assert loaded.hyperparams == model.hyperparams
    assert loaded.graph is None


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "{}",
        '{"shapes": {"d": 2, "m": 1, "n_src": 2, "n_trg": 2}, "theta": [0.0], "a": [], "trace": []}',
    ],
)
def test_invalid_json(text: str):
    """
    Malformed documents are rejected
    """
    with pytest.raises(InvalidInputError):
        TransferModel.from_json(text)


def test_invalid_bundle_sizes(small_bundle: DatasetBundle, fast_transfer: TransferHyperParams):
    """
    A neighbor count that does not fit the training samples is rejected
    """
    with pytest.raises(InvalidInputError):
        fit(small_bundle, fast_transfer.model_copy(update={"knn": 18}))
