# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

End-to-end experiments: fit the transfer model, weight and pseudo-label the source samples,
select the most relevant ones, train the weighted softmax classifier and score it on the
target test samples. Grid searches and ablations are built on top of single experiments.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from multiprocessing import Pipe, Process
from multiprocessing.connection import Connection, wait
from pathlib import Path
from typing import Callable, Literal, Optional, Sequence, Union

import numpy as np
from loguru import logger

from .classifier import assemble_training_set, predict, train_softmax
from .dataset import DatasetBundle, ScalingParams, load_bundle, scale_bundle, synthetic_bundle
from .exceptions.invalidinputerror import InvalidInputError
from .procname import ProcName
from .relevance import (
    export_csv,
    pseudo_labels,
    select_top_p,
    source_weights,
    transferability_scheme_a,
    transferability_scheme_b,
    weight_summary,
)
from .report import (
    BalanceStability,
    ExperimentReport,
    GammaAblation,
    GridResult,
    GridRow,
    HiddenSizePoint,
    SchemeComparison,
    SelectionAblation,
    SensitivityStudy,
)
from .settings.data import FileData, SyntheticData
from .settings.experiment import ExperimentConfig, SelectionCount
from .settings.grid import GridSpec
from .stopwatch import Stopwatch
from .transfer import TransferModel, fit


# Logging context for the module
log = logger.bind(subsystem="pipeline")

# The four classifier variants in reporting order
VARIANTS: tuple[tuple[Literal["A", "B"], Literal["soft", "hard"]], ...] = (
    ("A", "soft"),
    ("A", "hard"),
    ("B", "soft"),
    ("B", "hard"),
)


def default_p_schedule(n_src: int) -> list[int]:
    """
    Selection counts 10, 20, ..., 100, 150, ..., 500, 1000, 1500 and n_src, clipped to n_src
    """
    if n_src < 1:
        raise InvalidInputError(f"The number of source samples must be positive; got {n_src}")
    schedule = list(range(10, 101, 10)) + list(range(150, 501, 50)) + [1000, 1500]
    return sorted({p for p in schedule if p <= n_src} | {n_src})


def resolve_p(p: SelectionCount, n_src: int) -> int:
    """
    Convert a selection count into a number of source samples
    """
    if p == "all":
        return n_src
    if p == "none":
        return 0
    if not 0 <= int(p) <= n_src:
        raise InvalidInputError(f"Cannot select {p} of {n_src} source samples")
    return int(p)


def load_data(data: Union[FileData, SyntheticData]) -> DatasetBundle:
    """
    Load the bundle of a file data origin or generate a synthetic one
    """
    if isinstance(data, FileData):
        return load_bundle(data)
    return synthetic_bundle(data)


def _fit_model(
    cfg: ExperimentConfig,
    scaled: DatasetBundle,
    scaler: ScalingParams,
    run: Optional[str],
) -> TransferModel:
    """
    Fit the transfer model with the autoencoder seeded from the experiment seed
    """
    hp = cfg.transfer.model_copy(update={"seed": cfg.seed})
    return fit(scaled, hp, run=run).model_copy(update={"scaler": scaler})


# pylint: disable=too-many-locals,too-many-arguments
def _evaluate(
    cfg: ExperimentConfig,
    scaled: DatasetBundle,
    model: Optional[TransferModel],
    stopwatch: Stopwatch,
    run: Optional[str],
    relevance: Optional[Path] = None,
) -> ExperimentReport:
    """
    Select, pseudo-label and weight source samples from a fitted model, train the classifier and
    score it; without a model only the target samples are used. The relevance table is written
    to the given path when source samples were pseudo-labeled.
    """
    rlog = log.bind(run=run) if run else log
    p_resolved = 0 if model is None else resolve_p(cfg.p, scaled.n_src)
    n_ctrg = scaled.n_ctrg

    selected: list[int] = []
    summary = None
    relevant_mean = irrelevant_mean = None
    fallback = False
    src_labels = np.zeros((0, n_ctrg))
    src_weights = np.zeros(0)

    if model is not None:
        wt = source_weights(model.a)

        # Ground truth relevance is only known for synthetic bundles
        if scaled.relevant is not None:
            relevant_mean = float(wt.values[scaled.relevant].mean()) if scaled.relevant.any() else None
            irrelevant_mean = float(wt.values[~scaled.relevant].mean()) if (~scaled.relevant).any() else None

        if p_resolved > 0 and not np.any(wt.values > 0):
            rlog.bind(event="info").warning("Every source weight is zero; falling back to the target samples only")
            fallback = True
        else:
            if cfg.scheme == "A":
                tr = transferability_scheme_a(model.a, scaled.y_trg, n_ctrg)
            else:
                tr = transferability_scheme_b(
                    model.params, scaled.x_src, scaled.x_trg, scaled.y_trg, n_ctrg, cfg.sigma2
                )
            labels = pseudo_labels(tr, cfg.mode)
            selected = select_top_p(wt, p_resolved)
            if relevance is not None:
                export_csv(relevance, wt, tr, labels, selected)
            index = np.asarray(selected, dtype=np.int64)
            src_labels = labels.values[index]
            src_weights = wt.values[index]

        summary = weight_summary(wt, selected)

    index = np.asarray(selected, dtype=np.int64)
    training_set = assemble_training_set(
        scaled.x_src[:, index], src_labels, src_weights, scaled.x_trg, scaled.y_trg, n_ctrg
    )
    classifier = train_softmax(training_set, cfg.classifier.lbfgs, seed=cfg.seed)
    predicted, _ = predict(classifier, scaled.x_test)

    # Accuracy over all test samples and per class
    hits = predicted == scaled.y_test
    correct, total = int(hits.sum()), int(hits.size)
    per_class = [
        float(hits[scaled.y_test == j].mean()) if np.any(scaled.y_test == j) else None for j in range(n_ctrg)
    ]
    accuracy = correct / total if total else 0.0

    rlog.bind(event="info").info(
        "{variant} with p={p}: accuracy {accuracy:.4f} ({correct}/{total})",
        variant=cfg.variant,
        p=cfg.p,
        accuracy=accuracy,
        correct=correct,
        total=total,
    )

    return ExperimentReport(
        variant=cfg.variant,
        accuracy=accuracy,
        correct=correct,
        total=total,
        per_class_accuracy=per_class,
        p=cfg.p,
        p_resolved=len(selected),
        selected=selected,
        weight_summary=summary,
        relevant_weight_mean=relevant_mean,
        irrelevant_weight_mean=irrelevant_mean,
        objective_trace=list(model.trace) if model is not None else [],
        target_only_fallback=fallback,
        config=cfg.model_dump(mode="json", by_alias=True),
        seconds=stopwatch.finish(),
    )


# pylint: disable=too-many-arguments
def run_experiment(
    cfg: ExperimentConfig,
    bundle: Optional[DatasetBundle] = None,
    run: Optional[str] = None,
    model_output: Optional[Path] = None,
    relevance_output: Optional[Path] = None,
) -> ExperimentReport:
    """Run one experiment end to end.

    p = "none" skips the transfer model and trains on the target samples only; p = "all"
    uses every source sample.

    Args:
        cfg (ExperimentConfig): The experiment configuration
        bundle (Optional[DatasetBundle]): Unscaled data; loaded from the configuration when omitted
        run (Optional[str]): The run name bound to the log records
        model_output (Optional[Path]): Where to write the fitted transfer model as JSON
        relevance_output (Optional[Path]): Where to write the per-source relevance table as CSV

    Returns:
        ExperimentReport: The report
    """
    stopwatch = Stopwatch(log_context=log)
    if bundle is None:
        bundle = load_data(cfg.data)
    scaled, scaler = scale_bundle(bundle)

    model = None if cfg.p == "none" else _fit_model(cfg, scaled, scaler, run)
    if model is not None and model_output is not None:
        model_output = Path(model_output)
        model_output.parent.mkdir(parents=True, exist_ok=True)
        model_output.write_text(model.to_json() + "\n", encoding="utf-8")
        log.bind(event="info").info("Wrote transfer model to '{path}'", path=model_output)

    return _evaluate(cfg, scaled, model, stopwatch, run, relevance_output)


def compare_schemes(cfg: ExperimentConfig, bundle: Optional[DatasetBundle] = None) -> SchemeComparison:
    """
    Fit the transfer model once and evaluate the SoftA, HardA, SoftB and HardB classifiers on it
    """
    if cfg.p == "none":
        raise InvalidInputError("Comparing transferability schemes needs p other than 'none'")
    if bundle is None:
        bundle = load_data(cfg.data)
    scaled, scaler = scale_bundle(bundle)

    stopwatch = Stopwatch(log_context=log)
    model = _fit_model(cfg, scaled, scaler, "compare")
    fit_seconds = stopwatch.finish()

    reports = {}
    for scheme, mode in VARIANTS:
        variant_cfg = cfg.updated(scheme=scheme, mode=mode)
        report = _evaluate(variant_cfg, scaled, model, Stopwatch(log_context=log), variant_cfg.variant)
        reports[variant_cfg.variant] = report.model_copy(update={"seconds": report.seconds + fit_seconds})
    return SchemeComparison(reports=reports)


# pylint: disable=too-many-arguments
def _cell_config(
    cfg: ExperimentConfig,
    index: int,
    m: int,
    lam: float,
    gamma: float,
    p: SelectionCount,
) -> ExperimentConfig:
    """
    Derive the configuration of one grid cell; every cell gets its own seed
    """
    transfer = cfg.transfer.updated(hidden_size=m, lam=lam, gamma=gamma)
    return cfg.updated(transfer=transfer, p=p, seed=cfg.seed + index)


def _run_cell(
    index: int,
    cfg: ExperimentConfig,
    bundle: DatasetBundle,
    worker: bool = False,
) -> tuple[Optional[ExperimentReport], str, float]:
    """
    Run one grid cell, turning any failure into a status message
    """
    run = f"cell-{index}"
    clog = log.bind(run=run)
    if worker:
        ProcName(role="grid worker", log_context=clog, run=run).update(f"m={cfg.transfer.hidden_size} p={cfg.p}")

    stopwatch = Stopwatch(log_context=clog)
    try:
        report = run_experiment(cfg, bundle, run=run)
    # pylint: disable=broad-except
    except Exception as exc:
        clog.bind(event="error").error("Grid cell {index} failed: {exc}", index=index, exc=exc)
        return None, f"failed: {exc}", stopwatch.finish()
    return report, "ok", report.seconds


def _cell_process(index: int, cfg: ExperimentConfig, bundle: DatasetBundle, sender: Connection) -> None:
    """
    Body of a dedicated cell process: send the outcome back to the parent
    """
    sender.send(_run_cell(index, cfg, bundle, worker=True))
    sender.close()


def _run_cells_with_deadline(
    cells: list[ExperimentConfig],
    bundle: DatasetBundle,
    workers: int,
    timeout: float,
) -> list[tuple[Optional[ExperimentReport], str, float]]:
    """Run each cell in its own process and terminate cells that exceed the timeout.

    At most `workers` cells run at once. A deadline counts from the start of its cell's process.

    Args:
        cells (list[ExperimentConfig]): The cell configurations in grid order
        bundle (DatasetBundle): Unscaled data
        workers (int): The maximum number of concurrent processes
        timeout (float): Seconds allowed per cell

    Returns:
        list[tuple[Optional[ExperimentReport], str, float]]: Report, status and seconds per cell
    """
    outcomes: list[tuple[Optional[ExperimentReport], str, float]] = [(None, "failed: not run", 0.0)] * len(cells)
    pending = list(enumerate(cells))
    running: dict[Connection, tuple[int, Process, float]] = {}

    while pending or running:
        # Fill the free slots
        while pending and len(running) < workers:
            index, cell = pending.pop(0)
            receiver, sender = Pipe(duplex=False)
            process = Process(
                target=_cell_process, args=(index, cell, bundle, sender), daemon=True, name=f"cell-{index}"
            )
            process.start()
            sender.close()
            running[receiver] = (index, process, time.monotonic())
            log.bind(event="debug", run=f"cell-{index}").debug("Started process {pid}", pid=process.pid)

        next_deadline = min(started for _, _, started in running.values()) + timeout
        ready = wait(list(running), timeout=max(0.0, next_deadline - time.monotonic()))
        now = time.monotonic()

        for receiver in list(running):
            index, process, started = running[receiver]
            clog = log.bind(run=f"cell-{index}")
            if receiver in ready:
                try:
                    outcomes[index] = receiver.recv()
                except EOFError:
                    clog.bind(event="error").error("Process of grid cell {index} exited without a result", index=index)
                    process.join()
                    outcomes[index] = (None, f"failed: worker exited with code {process.exitcode}", now - started)
            elif now - started >= timeout:
                clog.bind(event="error").warning(
                    "Grid cell {index} exceeded {timeout:g} seconds and is terminated", index=index, timeout=timeout
                )
                process.terminate()
                outcomes[index] = (None, f"failed: timed out after {timeout:g} seconds", timeout)
            else:
                continue
            process.join()
            receiver.close()
            del running[receiver]

    return outcomes


def _run_grid(
    cfg: ExperimentConfig,
    grid: GridSpec,
    bundle: DatasetBundle,
) -> tuple[list[GridRow], list[Optional[ExperimentReport]]]:
    """
    Run every cell of the grid, in worker processes when requested, and collect rows and reports
    in cell order
    """
    ps = grid.ps if grid.ps is not None else default_p_schedule(bundle.n_src)
    cells = [
        _cell_config(cfg, index, m, lam, gamma, p)
        for index, (m, lam, gamma, p) in enumerate(product(grid.hidden_sizes, grid.lambdas, grid.gammas, ps))
    ]

    log.bind(event="info").info(
        "Running grid search over {n} cells with {workers} workers", n=len(cells), workers=grid.workers
    )

    outcomes: list[tuple[Optional[ExperimentReport], str, float]] = []
    if grid.timeout is not None:
        outcomes = _run_cells_with_deadline(cells, bundle, grid.workers, grid.timeout)
    elif grid.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=grid.workers) as executor:
            futures = [executor.submit(_run_cell, index, cell, bundle, True) for index, cell in enumerate(cells)]
            for index, future in enumerate(futures):
                try:
                    outcomes.append(future.result())
                # pylint: disable=broad-except
                except Exception as exc:
                    log.bind(event="error").error("Grid cell {index} was lost: {exc}", index=index, exc=exc)
                    outcomes.append((None, f"failed: {exc}", 0.0))
    else:
        outcomes = [_run_cell(index, cell, bundle) for index, cell in enumerate(cells)]

    rows = [
        GridRow(
            index=index,
            seed=cell.seed,
            m=cell.transfer.hidden_size,
            lam=cell.transfer.lam,
            gamma=cell.transfer.gamma,
            p=cell.p,
            p_resolved=bundle.n_src if cell.p == "all" else (0 if cell.p == "none" else int(cell.p)),
            scheme=cell.scheme,
            mode=cell.mode,
            accuracy=report.accuracy if report is not None else None,
            seconds=seconds,
            status=status,
        )
        for index, (cell, (report, status, seconds)) in enumerate(zip(cells, outcomes))
    ]
    return rows, [report for report, _, _ in outcomes]


def _pick_best(
    rows: list[GridRow],
    reports: list[Optional[ExperimentReport]],
    keep: Callable[[GridRow], bool] = lambda row: True,
) -> Optional[tuple[GridRow, ExperimentReport]]:
    """
    Highest accuracy among the finished rows accepted by keep; ties go to the smallest
    (m, lambda, gamma, p)
    """
    finished = [row for row in rows if row.ok and keep(row)]
    if not finished:
        return None
    best_row = min(finished, key=lambda row: (-row.accuracy, row.sort_key))
    report = reports[best_row.index]
    assert report is not None
    return best_row, report.model_copy(update={"selected_on_test_accuracy": True})


def grid_search(
    cfg: ExperimentConfig,
    grid: GridSpec,
    bundle: Optional[DatasetBundle] = None,
) -> GridResult:
    """Run every (m, lambda, gamma, p) cell and pick the best by test accuracy.

    Cells are independent; cell i uses seed cfg.seed + i. Ties in accuracy go to the
    smallest (m, lambda, gamma, p) with 'none' counting as 0 and 'all' as n_src. A failed cell
    is recorded in the table and does not stop the search.

    Args:
        cfg (ExperimentConfig): The base configuration
        grid (GridSpec): The value lists and worker count
        bundle (Optional[DatasetBundle]): Unscaled data; loaded from the configuration when omitted

    Returns:
        GridResult: One row per cell and the best report
    """
    if bundle is None:
        bundle = load_data(cfg.data)
    rows, reports = _run_grid(cfg, grid, bundle)

    best = _pick_best(rows, reports)
    if best is None:
        log.bind(event="error").error("Every grid cell failed")
        return GridResult(rows=rows)

    best_row, best_report = best
    log.bind(event="info").info(
        "Best cell {index}: m={m}, lambda={lam}, gamma={gamma}, p={p}, accuracy {accuracy:.4f}",
        index=best_row.index,
        m=best_row.m,
        lam=best_row.lam,
        gamma=best_row.gamma,
        p=best_row.p,
        accuracy=best_row.accuracy,
    )
    return GridResult(rows=rows, best=best_report, best_index=best_row.index)


def gamma_ablation(
    cfg: ExperimentConfig,
    grid: GridSpec,
    bundle: Optional[DatasetBundle] = None,
) -> GammaAblation:
    """
    Compare the best cell without the graph term against the best cell over every gamma
    """
    if 0.0 not in grid.gammas:
        raise InvalidInputError("The gamma list of a graph ablation must include 0")
    if bundle is None:
        bundle = load_data(cfg.data)
    rows, reports = _run_grid(cfg, grid, bundle)

    zero = _pick_best(rows, reports, keep=lambda row: row.gamma == 0)
    best = _pick_best(rows, reports)
    if zero is None or best is None:
        raise InvalidInputError("No grid cell with gamma = 0 finished")

    delta = best[1].accuracy - zero[1].accuracy
    log.bind(event="info").info(
        "Graph ablation: gamma=0 accuracy {zero:.4f}, best gamma={gamma} accuracy {best:.4f}",
        zero=zero[1].accuracy,
        gamma=best[0].gamma,
        best=best[1].accuracy,
    )
    return GammaAblation(
        gamma_best=best[0].gamma,
        zero=zero[1],
        best=best[1],
        delta=delta,
        grid=GridResult(rows=rows, best=best[1], best_index=best[0].index),
    )


def selection_ablation(
    cfg: ExperimentConfig,
    grid: GridSpec,
    bundle: Optional[DatasetBundle] = None,
) -> SelectionAblation:
    """
    Compare no transfer (p = none), no selection (p = all) and the best selection count
    """
    if bundle is None:
        bundle = load_data(cfg.data)

    # Make sure both baselines are part of the grid
    ps: list[SelectionCount] = list(grid.ps) if grid.ps is not None else list(default_p_schedule(bundle.n_src))
    ps += [p for p in ("none", "all") if p not in ps]
    rows, reports = _run_grid(cfg, grid.model_copy(update={"ps": ps}), bundle)

    none = _pick_best(rows, reports, keep=lambda row: row.p == "none")
    every = _pick_best(rows, reports, keep=lambda row: row.p == "all")
    best = _pick_best(rows, reports)
    if none is None or every is None or best is None:
        raise InvalidInputError("The baseline cells of the selection ablation did not finish")

    log.bind(event="info").info(
        "Selection ablation: none {none:.4f}, all {every:.4f}, best p={p} {best:.4f}",
        none=none[1].accuracy,
        every=every[1].accuracy,
        p=best[0].p,
        best=best[1].accuracy,
    )
    return SelectionAblation(
        none=none[1],
        all=every[1],
        best=best[1],
        best_p=best[0].p,
        delta_vs_all=best[1].accuracy - every[1].accuracy,
        delta_vs_none=best[1].accuracy - none[1].accuracy,
        grid=GridResult(rows=rows, best=best[1], best_index=best[0].index),
    )


def _balance_stability(variant: str, rows: list[GridRow], m: int) -> BalanceStability:
    """
    Mean, standard deviation and their ratio of the best accuracy over p of every (lambda, gamma) cell at m
    """
    best: dict[tuple[float, float], float] = {}
    for row in rows:
        if row.ok and row.m == m and row.accuracy is not None:
            key = (row.lam, row.gamma)
            best[key] = max(best.get(key, row.accuracy), row.accuracy)

    if not best:
        return BalanceStability(variant=variant, m=m, cells=0, mean=None, std=None, ratio=None)
    values = np.array(list(best.values()))
    mean, std = float(values.mean()), float(values.std())
    return BalanceStability(
        variant=variant, m=m, cells=len(best), mean=mean, std=std, ratio=std / mean if mean > 0 else None
    )


def sensitivity(
    cfg: ExperimentConfig,
    grid: GridSpec,
    bundle: Optional[DatasetBundle] = None,
    variants: Sequence[tuple[Literal["A", "B"], Literal["soft", "hard"]]] = VARIANTS,
    m: Optional[int] = None,
) -> SensitivityStudy:
    """Study how the accuracy of each variant depends on the hidden size and on the balance values.

    Every variant runs the full grid with the same cell seeds. The hidden size curve holds the best
    accuracy at each m over every other grid value. The balance stability takes, at the fixed hidden
    size m, the best accuracy over p of each (lambda, gamma) cell and reports their mean, standard
    deviation and std / mean.

    Args:
        cfg (ExperimentConfig): The base configuration; its scheme and mode are replaced per variant
        grid (GridSpec): The value lists and worker count
        bundle (Optional[DatasetBundle]): Unscaled data; loaded from the configuration when omitted
        variants (Sequence[tuple[str, str]]): The (scheme, mode) pairs to study
        m (Optional[int]): The hidden size of the balance stability; the smallest grid value when omitted

    Returns:
        SensitivityStudy: The curve, the stability per variant and the underlying grids
    """
    if not variants:
        raise InvalidInputError("A sensitivity study needs at least one variant")
    fixed_m = min(grid.hidden_sizes) if m is None else m
    if fixed_m not in grid.hidden_sizes:
        raise InvalidInputError(f"The hidden size {fixed_m} of the balance stability is not in the grid")
    if bundle is None:
        bundle = load_data(cfg.data)

    curve: list[HiddenSizePoint] = []
    stability: list[BalanceStability] = []
    grids: dict[str, GridResult] = {}
    for scheme, mode in variants:
        variant_cfg = cfg.updated(scheme=scheme, mode=mode)
        variant = variant_cfg.variant
        log.bind(event="info").info("Sensitivity grid for {variant}", variant=variant)
        rows, reports = _run_grid(variant_cfg, grid, bundle)

        best = _pick_best(rows, reports)
        grids[variant] = (
            GridResult(rows=rows, best=best[1], best_index=best[0].index) if best is not None else GridResult(rows=rows)
        )
        for size in grid.hidden_sizes:
            finished = [row.accuracy for row in rows if row.ok and row.m == size and row.accuracy is not None]
            curve.append(HiddenSizePoint(variant=variant, m=size, accuracy=max(finished) if finished else None))
        stability.append(_balance_stability(variant, rows, fixed_m))

    for row in stability:
        log.bind(event="info").info(
            "{variant} at m={m}: mean {mean}, std {std}, ratio {ratio}",
            variant=row.variant,
            m=row.m,
            mean=row.mean,
            std=row.std,
            ratio=row.ratio,
        )
    return SensitivityStudy(hidden_sizes=curve, stability=stability, grids=grids)
