# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

k-nearest-neighbor cosine similarity graph and its Laplacian
"""

from __future__ import annotations

import numpy as np
from loguru import logger

from .exceptions.invalidinputerror import InvalidInputError
from .numerics import ArrayModel, Matrix, as_matrix, frozen


# Logging context for the module
log = logger.bind(subsystem="graph")


class SimilarityGraph(ArrayModel):
    """
    Symmetric adjacency S, degrees D and Laplacian L = diag(D) - S
    """

    adjacency: np.ndarray
    degrees: np.ndarray
    laplacian: np.ndarray
    k: int

    @property
    def n(self) -> int:
        """Number of nodes"""
        return self.adjacency.shape[0]


def cosine_similarity(x: Matrix, y: Matrix) -> float:
    """
    Cosine of the angle between two vectors; 0 when either vector is zero
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    norms = np.linalg.norm(x) * np.linalg.norm(y)
    if norms == 0:
        return 0.0
    return float(np.dot(x, y) / norms)


def cosine_similarity_matrix(x: Matrix) -> Matrix:
    """
    Pairwise cosine similarities between the columns of x; zero-norm columns are similar to nothing
    """
    norms = np.linalg.norm(x, axis=0)
    safe = np.where(norms == 0, 1.0, norms)
    unit = np.where(norms == 0, 0.0, x / safe)
    similarity = unit.T @ unit

    # Enforce exact symmetry
    return (similarity + similarity.T) / 2.0


def neighbor_mask(similarity: Matrix, k: int) -> Matrix:
    """
    Boolean matrix with entry (i, j) set when j is one of the k most similar points to i

    A point is never its own neighbor; ties go to the lower column index.
    """
    n = similarity.shape[0]
    ranking = np.array(similarity, copy=True)
    np.fill_diagonal(ranking, -np.inf)

    # Stable sort on the negated similarity keeps the lower index first among ties
    order = np.argsort(-ranking, axis=1, kind="stable")[:, :k]
    mask = np.zeros((n, n), dtype=bool)
    mask[np.repeat(np.arange(n), k), order.ravel()] = True
    return mask


def build_knn_graph(x: Matrix, k: int) -> SimilarityGraph:
    """Build the k-nearest-neighbor graph over the columns of x.

    Two points are connected when either is among the k nearest neighbors of the other.
    Edge weights are cosine similarities with negative values clamped to 0.

    Args:
        x (Matrix): The d x n sample matrix
        k (int): The neighbor count, 1 <= k < n

    Returns:
        SimilarityGraph: The graph
    """
    x = as_matrix(x, "graph samples")
    n = x.shape[1]
    if not 1 <= k < n:
        raise InvalidInputError(f"The neighbor count must satisfy 1 <= k < n; got k={k}, n={n}")

    log.bind(event="debug").debug("Building {k}-nearest-neighbor graph over {n} samples", k=k, n=n)

    similarity = np.clip(cosine_similarity_matrix(x), 0.0, 1.0)
    mask = neighbor_mask(similarity, k)
    edges = mask | mask.T

    adjacency = np.where(edges, similarity, 0.0)
    np.fill_diagonal(adjacency, 0.0)
    degrees = adjacency.sum(axis=1)
    laplacian = np.diag(degrees) - adjacency

    log.bind(event="debug").debug(
        "Graph has {edges} edges, mean degree {degree:.4f}",
        edges=int(np.count_nonzero(np.triu(edges, 1))),
        degree=float(degrees.mean()),
    )

    return SimilarityGraph(
        adjacency=frozen(adjacency),
        degrees=frozen(degrees),
        laplacian=frozen(laplacian),
        k=k,
    )
