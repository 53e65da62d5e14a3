# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Test single experiments, grid searches and the ablations
"""

import multiprocessing
import time
from pathlib import Path

import numpy as np
import pytest

from gastl import pipeline
from gastl.classifier import assemble_training_set, predict, train_softmax
from gastl.dataset import scale_bundle, synthetic_bundle
from gastl.exceptions.invalidinputerror import InvalidInputError
from gastl.pipeline import (
    compare_schemes,
    default_p_schedule,
    gamma_ablation,
    grid_search,
    resolve_p,
    run_experiment,
    selection_ablation,
    sensitivity,
)
from gastl.settings.data import SyntheticData
from gastl.settings.experiment import ExperimentConfig
from gastl.settings.grid import GridSpec
from gastl.transfer import TransferModel


def without_timing(document: dict) -> dict:
    """
    Drop the wall-clock time and the selection flag from a report document
    """
    return {key: value for key, value in document.items() if key not in ("seconds", "selected_on_test_accuracy")}


def test_default_p_schedule():
    """
    The schedule is clipped to the number of source samples, which is always included
    """
    assert default_p_schedule(5) == [5]
    assert default_p_schedule(35) == [10, 20, 30, 35]
    assert default_p_schedule(100) == list(range(10, 101, 10))
    assert default_p_schedule(2000)[-3:] == [1000, 1500, 2000]
    with pytest.raises(InvalidInputError):
        default_p_schedule(0)


def test_resolve_p():
    """
    'all' is every source sample, 'none' is zero and counts must fit
    """
    assert resolve_p("all", 12) == 12
    assert resolve_p("none", 12) == 0
    assert resolve_p(7, 12) == 7
    with pytest.raises(InvalidInputError):
        resolve_p(13, 12)


def test_experiment_report(fast_experiment: ExperimentConfig):
    """
    A single experiment selects p source samples and reports its accuracy and trace
    """
    report = run_experiment(fast_experiment)

    assert report.variant == "SoftA"
    assert report.p == 6 and report.p_resolved == 6
    assert len(report.selected) == len(set(report.selected)) == 6
    assert report.total == 6 and 0 <= report.correct <= 6
    assert report.accuracy == report.correct / report.total
    assert len(report.per_class_accuracy) == 2
    assert report.weight_summary is not None and report.weight_summary.maximum == 1.0
    assert report.relevant_weight_mean is not None and report.irrelevant_weight_mean is not None
    assert 2 <= len(report.objective_trace) <= 4
    assert not report.target_only_fallback
    assert not report.selected_on_test_accuracy


def test_experiment_is_deterministic(fast_experiment: ExperimentConfig):
    """
    Repeated experiments agree on everything but the wall-clock time
    """
    first = run_experiment(fast_experiment).document(include_seconds=False)
    second = run_experiment(fast_experiment).document(include_seconds=False)
    assert first == second


def test_target_only_baseline(fast_experiment: ExperimentConfig):
    """
    p = 'none' skips the transfer model and matches a classifier trained on the target samples
    """
    cfg = fast_experiment.model_copy(update={"p": "none"})
    report = run_experiment(cfg)

    scaled, _ = scale_bundle(synthetic_bundle(cfg.data))
    ts = assemble_training_set(
        np.zeros((scaled.d, 0)), np.zeros((0, scaled.n_ctrg)), np.zeros(0), scaled.x_trg, scaled.y_trg, scaled.n_ctrg
    )
    predicted, _ = predict(train_softmax(ts, cfg.classifier.lbfgs), scaled.x_test)

    assert report.p_resolved == 0 and report.selected == []
    assert report.objective_trace == [] and report.weight_summary is None
    assert report.accuracy == float(np.mean(predicted == scaled.y_test))


def test_all_source_samples(fast_experiment: ExperimentConfig):
    """
    p = 'all' uses every source sample ordered by weight
    """
    report = run_experiment(fast_experiment.model_copy(update={"p": "all", "scheme": "B", "mode": "hard"}))
    assert report.variant == "HardB"
    assert report.p_resolved == 15
    assert sorted(report.selected) == list(range(15))


def test_experiment_outputs(tmp_path: Path, fast_experiment: ExperimentConfig):
    """
    The fitted model and the relevance table are written when requested
    """
    model_path = tmp_path / "out" / "model.json"
    relevance_path = tmp_path / "relevance.csv"
    report = run_experiment(fast_experiment, model_output=model_path, relevance_output=relevance_path)

    model = TransferModel.from_json(model_path.read_text(encoding="utf-8"))
    assert model.a.shape == (15, 6)
    assert model.scaler is not None
    assert np.allclose(model.trace, report.objective_trace, rtol=1e-15, atol=0.0)

    lines = relevance_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# index,weight,selected,tr_0,tr_1,label_0,label_1"
    assert len(lines) == 16
    assert sum(int(line.split(",")[2]) for line in lines[1:]) == 6


def test_compare_schemes(fast_experiment: ExperimentConfig):
    """
    All four variants are evaluated on one transfer model
    """
    comparison = compare_schemes(fast_experiment)

    assert list(comparison.reports) == ["SoftA", "HardA", "SoftB", "HardB"]
    traces = [report.objective_trace for report in comparison.reports.values()]
    assert all(trace == traces[0] for trace in traces)
    assert comparison.reports["SoftA"].selected == comparison.reports["HardB"].selected
    assert "variant" in comparison.table()

    with pytest.raises(InvalidInputError):
        compare_schemes(fast_experiment.model_copy(update={"p": "none"}))


def test_grid_search(fast_experiment: ExperimentConfig):
    """
    One row per cell in product order, with per-cell seeds and a flagged best report
    """
    grid = GridSpec(hidden_sizes=[3], lambdas=[1e-3, 1e-1], gammas=[0.0, 1e-2], ps=[4, "none"])
    result = grid_search(fast_experiment, grid)

    assert len(result.rows) == 8
    assert [row.index for row in result.rows] == list(range(8))
    assert [row.seed for row in result.rows] == [fast_experiment.seed + index for index in range(8)]
    assert [(row.lam, row.gamma, row.p) for row in result.rows[:4]] == [
        (1e-3, 0.0, 4),
        (1e-3, 0.0, "none"),
        (1e-3, 1e-2, 4),
        (1e-3, 1e-2, "none"),
    ]
    assert all(row.ok for row in result.rows)
    assert any(row.p == "none" and row.p_resolved == 0 for row in result.rows)

    assert result.best is not None and result.best_index is not None
    assert result.best.selected_on_test_accuracy
    best_row = result.rows[result.best_index]
    assert best_row.accuracy == max(row.accuracy for row in result.rows)
    assert all(
        row.sort_key >= best_row.sort_key for row in result.rows if row.accuracy == best_row.accuracy
    )


def test_singleton_grid_matches_experiment(fast_experiment: ExperimentConfig):
    """
    A grid with one cell reproduces the single experiment
    """
    transfer = fast_experiment.transfer
    grid = GridSpec(hidden_sizes=[transfer.hidden_size], lambdas=[transfer.lam], gammas=[transfer.gamma], ps=[6])
    result = grid_search(fast_experiment, grid)

    assert len(result.rows) == 1 and result.best is not None
    expected = run_experiment(fast_experiment).document(include_seconds=False)
    assert without_timing(result.best.document()) == without_timing(expected)


def test_failed_cell_is_recorded(fast_experiment: ExperimentConfig):
    """
    A cell that cannot run is marked failed without stopping the search
    """
    grid = GridSpec(hidden_sizes=[3], lambdas=[1e-2], gammas=[0.0], ps=[100, 4])
    result = grid_search(fast_experiment, grid)

    assert result.rows[0].status.startswith("failed: ")
    assert result.rows[0].accuracy is None and not result.rows[0].ok
    assert result.rows[1].ok
    assert result.best_index == 1

    everything_fails = grid_search(fast_experiment, grid.model_copy(update={"ps": [100]}))
    assert everything_fails.best is None and everything_fails.best_index is None


@pytest.mark.skipif(multiprocessing.get_start_method() != "fork", reason="the patched cell runner must be inherited")
def test_cell_timeout_bounds_runtime(monkeypatch: pytest.MonkeyPatch, fast_experiment: ExperimentConfig):
    """
    A cell that outlives the timeout is terminated and recorded as failed while the other cells finish
    """
    finish = pipeline.run_experiment

    def stalled_experiment(cfg: ExperimentConfig, *args, **kwargs):
        """Sleep far past the timeout for one selection count"""
        if cfg.p == 4:
            time.sleep(60.0)
        return finish(cfg, *args, **kwargs)

    monkeypatch.setattr(pipeline, "run_experiment", stalled_experiment)
    grid = GridSpec(hidden_sizes=[3], lambdas=[1e-2], gammas=[0.0], ps=[4, "none"], workers=2, timeout=10.0)

    started = time.monotonic()
    result = grid_search(fast_experiment, grid)
    elapsed = time.monotonic() - started

    assert elapsed < 40.0
    assert result.rows[0].status == "failed: timed out after 10 seconds"
    assert result.rows[0].seconds == 10.0 and not result.rows[0].ok
    assert result.rows[1].ok
    assert result.best_index == 1


def test_timeout_with_single_worker(fast_experiment: ExperimentConfig):
    """
    Cells run in their own processes under a timeout and give the same rows as in-process runs
    """
    grid = GridSpec(hidden_sizes=[3], lambdas=[1e-2], gammas=[0.0], ps=[4, "none"])
    inline = grid_search(fast_experiment, grid)
    bounded = grid_search(fast_experiment, grid.model_copy(update={"timeout": 300.0}))

    assert [row.status for row in bounded.rows] == ["ok", "ok"]
    assert [row.accuracy for row in bounded.rows] == [row.accuracy for row in inline.rows]
    assert bounded.best_index == inline.best_index


def test_grid_csv(tmp_path: Path, fast_experiment: ExperimentConfig):
    """
    The grid table has a header and one line per cell
    """
    result = grid_search(fast_experiment, GridSpec(hidden_sizes=[3], lambdas=[1e-2], gammas=[0.0], ps=[4, "all"]))
    result.write_csv(tmp_path / "grid.csv")

    lines = (tmp_path / "grid.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "m,lambda,gamma,p,scheme,mode,accuracy,seconds,status"
    assert len(lines) == 3
    assert lines[2].startswith("3,0.01,0.0,all,A,soft,")
    assert lines[2].endswith(",ok")


def test_gamma_ablation(fast_experiment: ExperimentConfig):
    """
    With gamma = 0 as the only value both reports coincide
    """
    ablation = gamma_ablation(fast_experiment, GridSpec(hidden_sizes=[3], lambdas=[1e-2], gammas=[0.0], ps=[4]))

    assert ablation.delta == 0.0
    assert ablation.gamma_best == 0.0
    assert ablation.zero.accuracy == ablation.best.accuracy

    wider = gamma_ablation(fast_experiment, GridSpec(hidden_sizes=[3], lambdas=[1e-2], gammas=[0.0, 1e-2], ps=[4]))
    assert wider.delta >= 0.0
    assert len(wider.grid.rows) == 2

    with pytest.raises(InvalidInputError):
        gamma_ablation(fast_experiment, GridSpec(hidden_sizes=[3], lambdas=[1e-2], gammas=[1e-2], ps=[4]))


def test_selection_ablation(fast_experiment: ExperimentConfig):
    """
    Both baselines are added to the grid and the deltas are measured from the best cell of the grid
    """
    ablation = selection_ablation(fast_experiment, GridSpec(hidden_sizes=[3], lambdas=[1e-2], gammas=[0.0], ps=[4]))
    rows = ablation.grid.rows

    assert [row.p for row in rows] == [4, "none", "all"]
    assert ablation.none.p_resolved == 0
    assert ablation.all.p_resolved == 15
    assert ablation.none.accuracy == rows[1].accuracy and ablation.all.accuracy == rows[2].accuracy
    assert ablation.best.accuracy == max(row.accuracy for row in rows)
    assert ablation.grid.best_index is not None and rows[ablation.grid.best_index].p == ablation.best_p
    assert ablation.delta_vs_all == ablation.best.accuracy - rows[2].accuracy
    assert ablation.delta_vs_none == ablation.best.accuracy - rows[1].accuracy
    assert "target only" in ablation.table()


def test_sensitivity(fast_experiment: ExperimentConfig):
    """
    The hidden size curve and the balance stability summarize the grid of each variant
    """
    grid = GridSpec(hidden_sizes=[2, 3], lambdas=[1e-2, 1e-1], gammas=[0.0, 1e-2], ps=[4, 8])
    study = sensitivity(fast_experiment, grid, variants=[("A", "soft"), ("B", "hard")])

    assert list(study.grids) == ["SoftA", "HardB"]
    assert [(point.variant, point.m) for point in study.hidden_sizes] == [
        ("SoftA", 2),
        ("SoftA", 3),
        ("HardB", 2),
        ("HardB", 3),
    ]
    for point in study.hidden_sizes:
        rows = study.grids[point.variant].rows
        assert len(rows) == 16 and all(row.ok for row in rows)
        assert point.accuracy == max(row.accuracy for row in rows if row.m == point.m)

    for row in study.stability:
        assert row.m == 2 and row.cells == 4
        grid_rows = study.grids[row.variant].rows
        best = [
            max(cell.accuracy for cell in grid_rows if cell.m == 2 and (cell.lam, cell.gamma) == (lam, gamma))
            for lam in grid.lambdas
            for gamma in grid.gammas
        ]
        assert row.mean == pytest.approx(np.mean(best), abs=1e-12)
        assert row.std == pytest.approx(np.std(best), abs=1e-12)
        assert row.ratio == pytest.approx(row.std / row.mean, abs=1e-12)

    # Both variants share the cell seeds and therefore the fitted models
    first, second = study.grids["SoftA"], study.grids["HardB"]
    assert [row.seed for row in first.rows] == [row.seed for row in second.rows]

    text = study.table()
    assert "SoftA" in text and "HardB" in text and "std/mean" in text


def test_sensitivity_invalid(fast_experiment: ExperimentConfig):
    """
    The fixed hidden size must be part of the grid and at least one variant is needed
    """
    grid = GridSpec(hidden_sizes=[3], lambdas=[1e-2], gammas=[0.0], ps=[4])
    with pytest.raises(InvalidInputError):
        sensitivity(fast_experiment, grid, m=5)
    with pytest.raises(InvalidInputError):
        sensitivity(fast_experiment, grid, variants=[])


def test_balance_stability_single_cell(fast_experiment: ExperimentConfig):
    """
    One (lambda, gamma) cell has no spread
    """
    grid = GridSpec(hidden_sizes=[3], lambdas=[1e-2], gammas=[0.0], ps=[4, "none"])
    study = sensitivity(fast_experiment, grid, variants=[("A", "hard")], m=3)

    (row,) = study.stability
    assert row.variant == "HardA" and row.cells == 1
    assert row.std == 0.0
    assert row.mean == max(cell.accuracy for cell in study.grids["HardA"].rows)
    assert row.ratio == (0.0 if row.mean > 0 else None)


def test_relevant_samples_get_larger_weights():
    """
    Across seeds, source samples from the clusters shared with the target task get larger weights and
    a proper selection of source samples is at least as accurate as using all of them
    """
    signal = improvement = 0
    for seed in range(20):
        cfg = ExperimentConfig(
            data=SyntheticData(
                features=8, clusters=3, source_per_cluster=10, target_per_class=5, noise=0.05, seed=seed
            ),
            transfer={"hidden_size": 4, "lambda": 0.05, "max_outer": 3, "lbfgs": {"max_iterations": 50}},
            classifier={"lbfgs": {"max_iterations": 50}},
            seed=seed,
        )
        ablation = selection_ablation(cfg, GridSpec(hidden_sizes=[4], lambdas=[0.05], gammas=[0.0], ps=[10, 20]))
        report = ablation.all

        assert report.relevant_weight_mean is not None and report.irrelevant_weight_mean is not None
        signal += report.relevant_weight_mean > report.irrelevant_weight_mean
        selected = max(row.accuracy for row in ablation.grid.rows if row.p in (10, 20))
        improvement += selected >= ablation.all.accuracy

    assert signal >= 18
    assert improvement >= 14
