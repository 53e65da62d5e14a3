# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Load, scale and synthesize source/target datasets.

Samples are stored as columns in memory (d x n matrices) and as rows on disk.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional

import numpy as np
from loguru import logger
from pydantic import model_validator

from .exceptions.dataerror import DataError
from .exceptions.dimensionmismatcherror import DimensionMismatchError
from .exceptions.invalidinputerror import InvalidInputError
from .numerics import ArrayModel, Matrix, frozen
from .settings.data import FileData, SyntheticData


# Logging context for the module
log = logger.bind(subsystem="dataset")


class DatasetBundle(ArrayModel):
    """
    Source samples, labeled target training samples and labeled target test samples
    """

    x_src: Matrix
    x_trg: Matrix
    y_trg: np.ndarray
    x_test: Matrix
    y_test: np.ndarray
    n_ctrg: int

    # Ground truth relevance of every source sample; only known for synthetic bundles
    relevant: Optional[np.ndarray] = None
    source_cluster: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def validate_bundle(self) -> "DatasetBundle":
        """
        Ensure the matrices share the feature dimension and every target class has a training sample
        """
        d = self.x_src.shape[0]
        for name in ("x_trg", "x_test"):
            if getattr(self, name).shape[0] != d:
                raise ValueError(f"{name} has {getattr(self, name).shape[0]} features; the source has {d}")
        if self.y_trg.shape != (self.x_trg.shape[1],):
            raise ValueError(f"y_trg has {self.y_trg.size} labels for {self.x_trg.shape[1]} samples")
        if self.y_test.shape != (self.x_test.shape[1],):
            raise ValueError(f"y_test has {self.y_test.size} labels for {self.x_test.shape[1]} samples")
        if self.n_ctrg < 1:
            raise ValueError("At least one target class is required")

        # Every class must appear in the target training labels
        missing = sorted(set(range(self.n_ctrg)) - set(self.y_trg.tolist()))
        if missing:
            raise ValueError(f"Target classes without training samples: {missing}")
        if np.any(self.y_test < 0) or np.any(self.y_test >= self.n_ctrg):
            raise ValueError(f"Test labels must lie in [0, {self.n_ctrg})")

        # Freeze the arrays so bundles can be shared between trials
        for value in self.__dict__.values():
            if isinstance(value, np.ndarray):
                frozen(value)

        # Return the validated bundle
        return self

    @property
    def d(self) -> int:
        """Feature dimension"""
        return self.x_src.shape[0]

    @property
    def n_src(self) -> int:
        """Number of source samples"""
        return self.x_src.shape[1]

    @property
    def n_trg(self) -> int:
        """Number of labeled target training samples"""
        return self.x_trg.shape[1]

    @property
    def x_combined(self) -> Matrix:
        """
        Source and target training samples side by side, [X_src X_trg]
        """
        return np.hstack([self.x_src, self.x_trg])


class ScalingParams(ArrayModel):
    """
    Per-feature min-max scaling fitted on the source and target training samples
    """

    minimum: np.ndarray
    span: np.ndarray


def load_csv_matrix(path: Path, label_column: Optional[str] = None) -> tuple[Matrix, Optional[np.ndarray]]:
    """Load a numeric CSV file with one sample per row.

    An optional first line starting with '#' holds the column names.

    Args:
        path (Path): The CSV file
        label_column (Optional[str]): The name of the column holding integer labels

    Returns:
        tuple[Matrix, Optional[np.ndarray]]: The d x n sample matrix and the labels (if requested)
    """
    path = Path(path)
    log.bind(event="debug").debug("Loading CSV matrix from '{path}'", path=path)

    header: Optional[list[str]] = None
    rows: list[list[float]] = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        for number, line in enumerate(csv.reader(handle), start=1):
            # Skip blank lines
            if not line or all(not cell.strip() for cell in line):
                continue

            # The header may only be the first line
            if line[0].lstrip().startswith("#"):
                if header is not None or rows:
                    raise DataError("Comment lines are only allowed as the first line", path=path, line=number)
                header = [line[0].lstrip()[1:].strip()] + [cell.strip() for cell in line[1:]]
                continue

            # Ragged rows
            if rows and len(line) != len(rows[0]):
                raise DataError(f"Expected {len(rows[0])} columns, found {len(line)}", path=path, line=number)

            try:
                rows.append([float(cell) for cell in line])
            except ValueError as exc:
                raise DataError(f"Non-numeric value: {exc}", path=path, line=number) from exc

    if not rows:
        raise InvalidInputError(f"'{path}' has no samples")

    table = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(table)):
        raise DataError("The file has non-finite values", path=path)

    # Split off the label column
    labels = None
    if label_column is not None:
        if header is None:
            raise DataError(f"Label column '{label_column}' requested but the file has no header", path=path)
        if label_column not in header:
            raise DataError(f"Label column '{label_column}' not in header {header}", path=path)
        if len(header) != table.shape[1]:
            raise DataError(f"The header has {len(header)} names for {table.shape[1]} columns", path=path)
        index = header.index(label_column)
        raw = table[:, index]
        if np.any(raw != np.round(raw)) or np.any(raw < 0):
            raise DataError(f"Labels in column '{label_column}' must be non-negative integers", path=path)
        labels = raw.astype(np.int64)
        table = np.delete(table, index, axis=1)
        if table.shape[1] == 0:
            raise DataError("The file has no feature columns", path=path)

    log.bind(event="debug").debug(
        "Loaded {n} samples with {d} features from '{path}'", n=table.shape[0], d=table.shape[1], path=path
    )

    # Samples become columns
    return np.ascontiguousarray(table.T), labels


def save_csv_matrix(path: Path, x: Matrix, labels: Optional[np.ndarray] = None, label_column: str = "y") -> None:
    """
    Write a d x n sample matrix as CSV with one sample per row and 17 significant digits
    """
    path = Path(path)
    names = [f"f{index}" for index in range(x.shape[0])]
    if labels is not None:
        if labels.shape != (x.shape[1],):
            raise DimensionMismatchError("labels", expected=(x.shape[1],), actual=labels.shape)
        names.append(label_column)

    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        handle.write("# " + ",".join(names) + "\n")
        for column in range(x.shape[1]):
            row = [format(value, ".17g") for value in x[:, column]]
            if labels is not None:
                row.append(str(int(labels[column])))
            writer.writerow(row)

    log.bind(event="debug").debug("Wrote {n} samples to '{path}'", n=x.shape[1], path=path)


def load_bundle(files: FileData) -> DatasetBundle:
    """
    Load the source, target training and target test files into a bundle
    """
    x_src, _ = load_csv_matrix(files.source)
    x_trg, y_trg = load_csv_matrix(files.target_train, label_column=files.label_column)
    x_test, y_test = load_csv_matrix(files.target_test, label_column=files.label_column)
    assert y_trg is not None and y_test is not None

    try:
        return DatasetBundle(
            x_src=x_src,
            x_trg=x_trg,
            y_trg=y_trg,
            x_test=x_test,
            y_test=y_test,
            n_ctrg=int(y_trg.max()) + 1,
        )
    except ValueError as exc:
        raise DataError(f"Inconsistent dataset: {exc}") from exc


def fit_scaler(x_src: Matrix, x_trg: Matrix) -> ScalingParams:
    """
    Fit per-feature minimum and range over the source and target training samples
    """
    if x_src.shape[0] != x_trg.shape[0]:
        raise DimensionMismatchError("x_trg", expected=x_src.shape[0], actual=x_trg.shape[0])
    combined = np.hstack([x_src, x_trg])
    minimum = combined.min(axis=1)
    span = combined.max(axis=1) - minimum
    return ScalingParams(minimum=frozen(minimum), span=frozen(span))


def apply_scaler(x: Matrix, scaler: ScalingParams) -> Matrix:
    """
    Map every feature to [0, 1]; constant features map to 0.5 and unseen values are clipped
    """
    if x.shape[0] != scaler.minimum.shape[0]:
        raise DimensionMismatchError("scaled matrix", expected=scaler.minimum.shape[0], actual=x.shape[0])

    constant = scaler.span == 0
    span = np.where(constant, 1.0, scaler.span)
    scaled = np.clip((x - scaler.minimum[:, None]) / span[:, None], 0.0, 1.0)
    scaled[constant, :] = 0.5
    return scaled


def scale_bundle(bundle: DatasetBundle) -> tuple[DatasetBundle, ScalingParams]:
    """
    Fit the scaler on a bundle and apply it to all three sample matrices
    """
    scaler = fit_scaler(bundle.x_src, bundle.x_trg)
    scaled = bundle.model_copy(
        update={
            "x_src": frozen(apply_scaler(bundle.x_src, scaler)),
            "x_trg": frozen(apply_scaler(bundle.x_trg, scaler)),
            "x_test": frozen(apply_scaler(bundle.x_test, scaler)),
        }
    )
    log.bind(event="debug").debug(
        "Scaled bundle; {constant} constant features", constant=int(np.sum(scaler.span == 0))
    )
    return scaled, scaler


def _cluster_centers(rng: np.random.Generator, d: int, clusters: int) -> Matrix:
    """
    Draw cluster centers from distinct high/low feature patterns so clusters differ in direction
    """
    min_distance = max(1, d // 4)
    patterns: list[np.ndarray] = []
    for _ in range(clusters):
        # Reject patterns too close to an existing one; give up after a fixed number of attempts
        for _attempt in range(1000):
            pattern = rng.random(d) < 0.5
            if all(np.sum(pattern != other) >= min_distance for other in patterns):
                break
        patterns.append(pattern)

    jitter = rng.uniform(-0.05, 0.05, size=(d, clusters))
    return np.column_stack([np.where(pattern, 0.8, 0.2) for pattern in patterns]) + jitter


def make_synthetic_transfer(  # pylint: disable=too-many-arguments,too-many-locals
    d: int,
    clusters: int,
    n_src_per_cluster: int,
    n_trg_per_class: int,
    relevant_clusters: int,
    noise_sd: float,
    seed: int,
    n_test_per_class: Optional[int] = None,
) -> DatasetBundle:
    """Generate a clustered transfer problem with known source relevance.

    Target class j is drawn from cluster j for j < relevant_clusters. Source samples are drawn
    from every cluster and shuffled; samples of the remaining clusters are irrelevant.

    Args:
        d (int): Feature dimension
        clusters (int): Number of clusters
        n_src_per_cluster (int): Source samples drawn from each cluster
        n_trg_per_class (int): Target training samples per class
        relevant_clusters (int): Number of clusters shared with the target task
        noise_sd (float): Standard deviation of the Gaussian noise around the centers
        seed (int): Generator seed
        n_test_per_class (Optional[int]): Target test samples per class; defaults to n_trg_per_class

    Returns:
        DatasetBundle: The bundle with the relevance mask and source cluster ids recorded
    """
    if min(d, clusters, n_src_per_cluster, n_trg_per_class, relevant_clusters) < 1:
        raise InvalidInputError("Synthetic bundle counts must be positive")
    if relevant_clusters > clusters:
        raise InvalidInputError(f"relevant_clusters ({relevant_clusters}) exceeds clusters ({clusters})")
    if noise_sd < 0:
        raise InvalidInputError(f"noise_sd must be non-negative; got {noise_sd}")
    n_test_per_class = n_trg_per_class if n_test_per_class is None else n_test_per_class

    rng = np.random.default_rng(seed)
    centers = _cluster_centers(rng, d, clusters)

    def draw(cluster_ids: np.ndarray) -> Matrix:
        """Sample around the centers of the given clusters"""
        noise = rng.normal(0.0, 1.0, size=(d, cluster_ids.size)) * noise_sd
        return np.clip(centers[:, cluster_ids] + noise, 0.0, 1.0)

    # Source samples from every cluster, shuffled
    source_cluster = rng.permutation(np.repeat(np.arange(clusters), n_src_per_cluster))
    x_src = draw(source_cluster)

    # Target training and test samples from the relevant clusters only
    y_trg = np.repeat(np.arange(relevant_clusters), n_trg_per_class)
    y_test = np.repeat(np.arange(relevant_clusters), n_test_per_class)
    x_trg = draw(y_trg)
    x_test = draw(y_test)

    log.bind(event="debug").debug(
        "Generated synthetic bundle: d={d}, n_src={n_src}, n_trg={n_trg}, seed={seed}",
        d=d,
        n_src=x_src.shape[1],
        n_trg=x_trg.shape[1],
        seed=seed,
    )

    return DatasetBundle(
        x_src=x_src,
        x_trg=x_trg,
        y_trg=y_trg,
        x_test=x_test,
        y_test=y_test,
        n_ctrg=relevant_clusters,
        relevant=source_cluster < relevant_clusters,
        source_cluster=source_cluster,
    )


def synthetic_bundle(options: SyntheticData) -> DatasetBundle:
    """
    Generate the synthetic bundle described by the settings model
    """
    return make_synthetic_transfer(
        d=options.features,
        clusters=options.clusters,
        n_src_per_cluster=options.source_per_cluster,
        n_trg_per_class=options.target_per_class,
        relevant_clusters=options.relevant_clusters,
        noise_sd=options.noise,
        seed=options.seed,
        n_test_per_class=options.test_per_class,
    )


def export_synthetic(bundle: DatasetBundle, directory: Path, label_column: str = "y") -> dict[str, Path]:
    """
    Write a bundle as source, target training, target test and relevance CSV files
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "source": directory / "source.csv",
        "target_train": directory / "target_train.csv",
        "target_test": directory / "target_test.csv",
    }
    save_csv_matrix(paths["source"], bundle.x_src)
    save_csv_matrix(paths["target_train"], bundle.x_trg, bundle.y_trg, label_column)
    save_csv_matrix(paths["target_test"], bundle.x_test, bundle.y_test, label_column)

    # Ground truth relevance, keyed by source index
    if bundle.relevant is not None and bundle.source_cluster is not None:
        paths["relevance"] = directory / "source_relevance.csv"
        with paths["relevance"].open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            handle.write("# index,cluster,relevant\n")
            for index, (cluster, relevant) in enumerate(zip(bundle.source_cluster, bundle.relevant)):
                writer.writerow([index, int(cluster), int(bool(relevant))])

    log.bind(event="info").info("Exported synthetic bundle to '{directory}'", directory=directory)
    return paths
