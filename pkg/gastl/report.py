# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Experiment reports, grid tables and ablation results, with their JSON, CSV and text renderings
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Optional, Union

import ujson
from loguru import logger
from pydantic import Field
from tabulate import tabulate

from .relevance import WeightSummary
from .settings._base import Base


# Logging context for the module
log = logger.bind(subsystem="pipeline")

# Column order of the grid table
GRID_COLUMNS = ("m", "lambda", "gamma", "p", "scheme", "mode", "accuracy", "seconds", "status")


class ExperimentReport(Base):
    """
    Outcome of one experiment
    """

    variant: str = Field(title="Variant", description="The classifier variant, e.g. SoftA")
    accuracy: float = Field(title="Accuracy", description="The fraction of correctly classified test samples")
    correct: int = Field(title="Correct", description="The number of correctly classified test samples")
    total: int = Field(title="Total", description="The number of test samples")
    per_class_accuracy: list[Optional[float]] = Field(
        title="Per-Class Accuracy",
        description="The accuracy on the test samples of each class; null for classes without test samples",
    )
    p: Union[int, str] = Field(title="Selection Count", description="The requested number of selected source samples")
    p_resolved: int = Field(title="Resolved Selection Count", description="The number of source samples used")
    selected: list[int] = Field(title="Selected", description="The selected source indices, most relevant first")
    weight_summary: Optional[WeightSummary] = Field(
        title="Weight Summary",
        description="Statistics of the source weights; null when no transfer model was fitted",
        default=None,
    )
    relevant_weight_mean: Optional[float] = Field(
        title="Relevant Weight Mean",
        description="Mean weight of the truly relevant source samples (synthetic data only)",
        default=None,
    )
    irrelevant_weight_mean: Optional[float] = Field(
        title="Irrelevant Weight Mean",
        description="Mean weight of the truly irrelevant source samples (synthetic data only)",
        default=None,
    )
    objective_trace: list[float] = Field(
        title="Objective Trace",
        description="The full objective after the initial and every alternating update",
        default=[],
    )
    target_only_fallback: bool = Field(
        title="Target Only Fallback",
        description="Set when every source weight was zero and the classifier used the target samples only",
        default=False,
    )
    selected_on_test_accuracy: bool = Field(
        title="Selected On Test Accuracy",
        description="Set when the report was chosen by test accuracy and is not a generalization estimate",
        default=False,
    )
    config: dict[str, Any] = Field(title="Configuration", description="The resolved experiment configuration")
    seconds: float = Field(title="Seconds", description="The wall-clock duration of the experiment")

    def document(self, include_seconds: bool = True) -> dict[str, Any]:
        """
        Return the report as a JSON-compatible dict, optionally without the wall-clock time
        """
        return self.model_dump(mode="json", exclude=None if include_seconds else {"seconds"})

    def to_json(self, include_seconds: bool = True) -> str:
        """
        Serialize the report to a JSON document
        """
        return ujson.dumps(self.document(include_seconds=include_seconds), indent=2)


class GridRow(Base):
    """
    One cell of a grid search
    """

    index: int = Field(title="Index", description="The cell index in (m, lambda, gamma, p) product order")
    seed: int = Field(title="Seed", description="The cell seed")
    m: int = Field(title="Hidden Size", description="The hidden layer size")
    lam: float = Field(title="Lambda", description="The row sparsity balance", alias="lambda")
    gamma: float = Field(title="Gamma", description="The graph balance")
    p: Union[int, str] = Field(title="Selection Count", description="The requested selection count")
    p_resolved: int = Field(title="Resolved Selection Count", description="The selection count as a number")
    scheme: str = Field(title="Scheme", description="The transferability scheme")
    mode: str = Field(title="Mode", description="The pseudo-label mode")
    accuracy: Optional[float] = Field(title="Accuracy", description="The test accuracy; null for failed cells")
    seconds: float = Field(title="Seconds", description="The wall-clock duration of the cell")
    status: str = Field(title="Status", description="'ok' or 'failed: <message>'")

    @property
    def ok(self) -> bool:
        """True for cells that finished"""
        return self.status == "ok"

    @property
    def sort_key(self) -> tuple[int, float, float, int]:
        """Tie-break key; smaller wins"""
        return (self.m, self.lam, self.gamma, self.p_resolved)

    def table_values(self) -> list[Any]:
        """
        Return the table values in column order
        """
        return [self.m, self.lam, self.gamma, self.p, self.scheme, self.mode, self.accuracy, self.seconds, self.status]


class GridResult(Base):
    """
    Every cell of a grid search and the best report
    """

    rows: list[GridRow] = Field(title="Rows", description="One row per cell in product order")
    best: Optional[ExperimentReport] = Field(
        title="Best",
        description="The report of the best cell; null when every cell failed",
        default=None,
    )
    best_index: Optional[int] = Field(title="Best Index", description="The index of the best cell", default=None)

    def table(self) -> str:
        """
        Render the grid as a text table
        """
        return tabulate([row.table_values() for row in self.rows], headers=GRID_COLUMNS, floatfmt=".6g")

    def write_csv(self, path: Path) -> None:
        """
        Write the grid table as CSV, one row per cell
        """
        path = Path(path)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(GRID_COLUMNS)
            for row in self.rows:
                writer.writerow(["" if value is None else value for value in row.table_values()])
        log.bind(event="info").info("Wrote grid table with {n} rows to '{path}'", n=len(self.rows), path=path)

    def document(self) -> dict[str, Any]:
        """
        Return the result as a JSON-compatible dict
        """
        return self.model_dump(mode="json", by_alias=True)


class GammaAblation(Base):
    """
    Best report without the graph term against the best report overall
    """

    gamma_zero: float = Field(title="Gamma Zero", description="The graph balance of the baseline", default=0.0)
    gamma_best: float = Field(title="Best Gamma", description="The graph balance of the best report")
    zero: ExperimentReport = Field(title="Without Graph", description="The best report with gamma = 0")
    best: ExperimentReport = Field(title="Best", description="The best report over every gamma")
    delta: float = Field(title="Delta", description="Best accuracy minus the gamma = 0 accuracy")
    grid: GridResult = Field(title="Grid", description="The underlying grid search")

    def table(self) -> str:
        """
        Render the comparison as a text table
        """
        rows = [
            ["gamma = 0", self.gamma_zero, self.zero.accuracy],
            ["best gamma", self.gamma_best, self.best.accuracy],
        ]
        return tabulate(rows, headers=("case", "gamma", "accuracy"), floatfmt=".6g")

    def document(self) -> dict[str, Any]:
        """
        Return the result as a JSON-compatible dict
        """
        return self.model_dump(mode="json", by_alias=True)


class SelectionAblation(Base):
    """
    No transfer, transfer from every source sample and transfer from the best selection
    """

    none: ExperimentReport = Field(title="Target Only", description="The best report without transfer")
    all: ExperimentReport = Field(title="No Selection", description="The best report using every source sample")
    best: ExperimentReport = Field(title="Best Selection", description="The best report over every selection count")
    best_p: Union[int, str] = Field(title="Best Selection Count", description="The selection count of the best report")
    delta_vs_all: float = Field(title="Delta vs All", description="Best accuracy minus the no-selection accuracy")
    delta_vs_none: float = Field(title="Delta vs None", description="Best accuracy minus the target only accuracy")
    grid: GridResult = Field(title="Grid", description="The underlying grid search")

    def table(self) -> str:
        """
        Render the comparison as a text table
        """
        rows = [
            ["target only", "none", self.none.accuracy],
            ["no selection", "all", self.all.accuracy],
            ["best selection", self.best_p, self.best.accuracy],
        ]
        return tabulate(rows, headers=("case", "p", "accuracy"), floatfmt=".6g")

    def document(self) -> dict[str, Any]:
        """
        Return the result as a JSON-compatible dict
        """
        return self.model_dump(mode="json", by_alias=True)


class SchemeComparison(Base):
    """
    The four classifier variants evaluated on one fitted transfer model
    """

    reports: dict[str, ExperimentReport] = Field(title="Reports", description="One report per variant name")

    def table(self) -> str:
        """
        Render the comparison as a text table
        """
        rows = [[name, report.p_resolved, report.accuracy] for name, report in self.reports.items()]
        return tabulate(rows, headers=("variant", "p", "accuracy"), floatfmt=".6g")

    def document(self) -> dict[str, Any]:
        """
        Return the result as a JSON-compatible dict
        """
        return self.model_dump(mode="json", by_alias=True)


class HiddenSizePoint(Base):
    """
    Best accuracy of one variant at one hidden size, over every other grid value
    """

    variant: str = Field(title="Variant", description="The classifier variant, e.g. SoftA")
    m: int = Field(title="Hidden Size", description="The hidden layer size")
    accuracy: Optional[float] = Field(title="Accuracy", description="The best accuracy; null when every cell failed")


class BalanceStability(Base):
    """
    Spread of the accuracy over the (lambda, gamma) cells of one variant at a fixed hidden size

    Each (lambda, gamma) cell contributes its best accuracy over the selection counts.
    """

    variant: str = Field(title="Variant", description="The classifier variant, e.g. SoftA")
    m: int = Field(title="Hidden Size", description="The fixed hidden layer size")
    cells: int = Field(title="Cells", description="The number of (lambda, gamma) cells with a finished run")
    mean: Optional[float] = Field(title="Mean", description="The mean accuracy; null without finished cells")
    std: Optional[float] = Field(title="Standard Deviation", description="The population standard deviation")
    ratio: Optional[float] = Field(title="Ratio", description="std / mean; null when the mean is 0 or undefined")


class SensitivityStudy(Base):
    """
    Sensitivity of the accuracy to the hidden size and to the balance values, per variant
    """

    hidden_sizes: list[HiddenSizePoint] = Field(
        title="Hidden Size Curve", description="Best accuracy per variant and hidden size"
    )
    stability: list[BalanceStability] = Field(
        title="Balance Stability", description="Accuracy spread over lambda and gamma per variant"
    )
    grids: dict[str, GridResult] = Field(title="Grids", description="The underlying grid search per variant")

    def table(self) -> str:
        """
        Render the hidden size curve with one column per variant, then the balance stability
        """
        variants = list(self.grids)
        sizes = sorted({point.m for point in self.hidden_sizes})
        accuracy = {(point.variant, point.m): point.accuracy for point in self.hidden_sizes}
        curve = tabulate(
            [[m] + [accuracy.get((variant, m)) for variant in variants] for m in sizes],
            headers=["m"] + variants,
            floatfmt=".6g",
        )
        stability = tabulate(
            [[row.variant, row.m, row.cells, row.mean, row.std, row.ratio] for row in self.stability],
            headers=("variant", "m", "cells", "mean", "std", "std/mean"),
            floatfmt=".6g",
        )
        return f"{curve}\n\n{stability}"

    def document(self) -> dict[str, Any]:
        """
        Return the result as a JSON-compatible dict
        """
        return self.model_dump(mode="json", by_alias=True)


def write_document(path: Path, document: dict[str, Any]) -> None:
    """
    Write a JSON document, creating the parent directory when needed
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(ujson.dumps(document, indent=2) + "\n", encoding="utf-8")
    log.bind(event="info").info("Wrote report to '{path}'", path=path)
