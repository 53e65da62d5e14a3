# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Test loading, scaling and synthesizing datasets
"""

from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gastl.dataset import (
    DatasetBundle,
    apply_scaler,
    export_synthetic,
    fit_scaler,
    load_bundle,
    load_csv_matrix,
    make_synthetic_transfer,
    save_csv_matrix,
    scale_bundle,
)
from gastl.exceptions.dataerror import DataError
from gastl.exceptions.invalidinputerror import InvalidInputError
from gastl.settings.data import FileData


def write(path: Path, text: str) -> Path:
    """
    Write a text file and return its path
    """
    path.write_text(text, encoding="utf-8")
    return path


def test_load_with_labels(tmp_path: Path):
    """
    Samples become columns and the label column is split off
    """
    path = write(tmp_path / "target.csv", "# a,b,y\n1,2,0\n3,4,1\n\n5,6,1\n")
    x, y = load_csv_matrix(path, label_column="y")

    assert x.shape == (2, 3)
    assert x[:, 1].tolist() == [3.0, 4.0]
    assert y is not None and y.tolist() == [0, 1, 1]


def test_load_without_header(tmp_path: Path):
    """
    The header is optional when no labels are requested
    """
    x, y = load_csv_matrix(write(tmp_path / "source.csv", "0.5,1.5\n2.5,3.5\n"))
    assert x.tolist() == [[0.5, 2.5], [1.5, 3.5]]
    assert y is None


@pytest.mark.parametrize(
    "text, line",
    [
        ("1,2\n3,x\n", 2),
        ("# a,b\n1,2\n3\n", 3),
        ("1,2\n# a,b\n", 2),
    ],
)
def test_malformed_rows(tmp_path: Path, text: str, line: int):
    """
    Parse failures name the offending line
    """
    path = write(tmp_path / "bad.csv", text)
    with pytest.raises(DataError) as info:
        load_csv_matrix(path)
    assert info.value.line == line
    assert f":{line}:" in str(info.value)


@pytest.mark.parametrize(
    "text, label_column",
    [
        ("1,2\n", "y"),
        ("# a,b\n1,2\n", "y"),
        ("# a,y\n1,0.5\n", "y"),
        ("# a,y\n1,-1\n", "y"),
        ("# y\n1\n", "y"),
        ("1,nan\n", None),
    ],
)
def test_invalid_files(tmp_path: Path, text: str, label_column: str):
    """
    Missing labels, non-integer labels and non-finite values are rejected
    """
    with pytest.raises(DataError):
        load_csv_matrix(write(tmp_path / "bad.csv", text), label_column=label_column)


@pytest.mark.parametrize("text", ["", "\n\n", "# a,y\n", " , \n"])
def test_empty_file(tmp_path: Path, text: str):
    """
    A file without sample rows is invalid input rather than malformed data
    """
    with pytest.raises(InvalidInputError) as info:
        load_csv_matrix(write(tmp_path / "empty.csv", text))
    assert "has no samples" in str(info.value)


def test_save_and_load(tmp_path: Path, rng: np.random.Generator):
    """
    Values written with 17 significant digits read back exactly
    """
    x = rng.normal(size=(3, 5))
    labels = np.array([0, 1, 2, 1, 0])
    save_csv_matrix(tmp_path / "m.csv", x, labels, label_column="label")

    assert (tmp_path / "m.csv").read_text(encoding="utf-8").startswith("# f0,f1,f2,label\n")
    loaded, loaded_labels = load_csv_matrix(tmp_path / "m.csv", label_column="label")
    assert np.array_equal(loaded, x)
    assert loaded_labels is not None and np.array_equal(loaded_labels, labels)


def test_scaler_edges():
    """
    Constant features map to 0.5 and unseen values are clipped
    """
    x_src = np.array([[0.0, 10.0], [3.0, 3.0]])
    x_trg = np.array([[5.0], [3.0]])
    scaler = fit_scaler(x_src, x_trg)

    assert scaler.minimum.tolist() == [0.0, 3.0]
    assert scaler.span.tolist() == [10.0, 0.0]

    scaled = apply_scaler(np.array([[-5.0, 5.0, 20.0], [1.0, 3.0, 7.0]]), scaler)
    assert scaled[0].tolist() == [0.0, 0.5, 1.0]
    assert scaled[1].tolist() == [0.5, 0.5, 0.5]


@settings(max_examples=40, deadline=None)
@given(
    x=arrays(
        dtype=np.float64,
        shape=st.tuples(st.integers(1, 5), st.integers(2, 8)),
        elements=st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
    )
)
def test_scaled_range(x: np.ndarray):
    """
    Scaled features always lie in [0, 1]
    """
    scaler = fit_scaler(x[:, :1], x[:, 1:])
    scaled = apply_scaler(x, scaler)
    assert np.all(scaled >= 0.0) and np.all(scaled <= 1.0)


def test_scale_bundle(small_bundle: DatasetBundle):
    """
    Source and target training samples span [0, 1] after scaling
    """
    scaled, scaler = scale_bundle(small_bundle)
    combined = scaled.x_combined
    varying = scaler.span > 0

    assert np.allclose(combined[varying].min(axis=1), 0.0)
    assert np.allclose(combined[varying].max(axis=1), 1.0)
    assert np.all((scaled.x_test >= 0) & (scaled.x_test <= 1))
    assert np.array_equal(scaled.y_trg, small_bundle.y_trg)


def test_synthetic_bundle(small_bundle: DatasetBundle):
    """
    Shapes, relevance ground truth and target classes of the synthetic generator
    """
    assert small_bundle.d == 6
    assert small_bundle.n_src == 12
    assert small_bundle.n_trg == 6
    assert small_bundle.n_ctrg == 2
    assert small_bundle.relevant is not None and int(small_bundle.relevant.sum()) == 8
    assert small_bundle.source_cluster is not None
    assert np.array_equal(small_bundle.relevant, small_bundle.source_cluster < 2)
    assert small_bundle.y_test.tolist() == [0, 0, 0, 1, 1, 1]


def test_synthetic_determinism():
    """
    The same seed gives the same bundle
    """
    first = make_synthetic_transfer(5, 3, 4, 2, 2, 0.1, seed=11, n_test_per_class=4)
    second = make_synthetic_transfer(5, 3, 4, 2, 2, 0.1, seed=11, n_test_per_class=4)
    third = make_synthetic_transfer(5, 3, 4, 2, 2, 0.1, seed=12, n_test_per_class=4)

    assert np.array_equal(first.x_src, second.x_src)
    assert np.array_equal(first.x_test, second.x_test)
    assert first.x_test.shape == (5, 8)
    assert not np.array_equal(first.x_src, third.x_src)


def test_synthetic_invalid():
    """
    More relevant clusters than clusters is rejected
    """
    with pytest.raises(InvalidInputError):
        make_synthetic_transfer(5, 2, 4, 2, 3, 0.1, seed=0)


def test_bundle_is_read_only(small_bundle: DatasetBundle):
    """
    Bundle arrays cannot be modified in place
    """
    with pytest.raises(ValueError):
        small_bundle.x_src[0, 0] = 1.0


def test_export_and_load(tmp_path: Path, small_bundle: DatasetBundle):
    """
    An exported synthetic bundle loads back as a file bundle
    """
    paths = export_synthetic(small_bundle, tmp_path / "bundle")
    assert sorted(paths) == ["relevance", "source", "target_test", "target_train"]

    loaded = load_bundle(
        FileData(source=paths["source"], target_train=paths["target_train"], target_test=paths["target_test"])
    )
    assert np.array_equal(loaded.x_src, small_bundle.x_src)
    assert np.array_equal(loaded.y_trg, small_bundle.y_trg)
    assert loaded.n_ctrg == small_bundle.n_ctrg
    assert loaded.relevant is None

    relevance = paths["relevance"].read_text(encoding="utf-8").splitlines()
    assert relevance[0] == "# index,cluster,relevant"
    assert len(relevance) == small_bundle.n_src + 1


def test_bundle_missing_class(tmp_path: Path):
    """
    A target class without training samples is a data error
    """
    source = write(tmp_path / "source.csv", "1,2\n3,4\n")
    train = write(tmp_path / "train.csv", "# a,b,y\n1,2,0\n3,4,2\n")
    test = write(tmp_path / "test.csv", "# a,b,y\n1,2,0\n")
    with pytest.raises(DataError):
        load_bundle(FileData(source=source, target_train=train, target_test=test))


def test_bundle_feature_mismatch(tmp_path: Path):
    """
    Files with different feature counts are a data error
    """
    source = write(tmp_path / "source.csv", "1,2,3\n")
    train = write(tmp_path / "train.csv", "# a,b,y\n1,2,0\n")
    test = write(tmp_path / "test.csv", "# a,b,y\n1,2,0\n")
    with pytest.raises(DataError):
        load_bundle(FileData(source=source, target_train=train, target_test=test))
