"""Community estimation: regularized spectral clustering with eigengap model selection."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NumericError
from .graph import Graph

SYMMETRY_TOL = 1e-10
ZERO_ROW_TOL = 1e-12


@dataclass(frozen=True)
class Partition:
    """Community assignment of N nodes into k groups plus block count matrices.

    block_edge_counts[a, b] is the number of observed edges between groups a
    and b (within-group on the diagonal); block_pair_counts[a, b] is the
    number of possible pairs, C(n_a, 2) on the diagonal and n_a * n_b off it.
    """

    assignments: np.ndarray
    k: int
    block_edge_counts: np.ndarray
    block_pair_counts: np.ndarray

    def __post_init__(self):
        assign = np.asarray(self.assignments, dtype=np.int64)
        assign.setflags(write=False)
        object.__setattr__(self, "assignments", assign)
        if self.k < 1:
            raise ValueError("partition needs at least one community")
        if assign.ndim != 1 or len(assign) == 0:
            raise ValueError("assignments must be a non-empty vector")
        if assign.min() < 0 or assign.max() >= self.k:
            raise ValueError("community index out of range")
        sizes = np.bincount(assign, minlength=self.k)
        if np.any(sizes == 0):
            empty = int(np.flatnonzero(sizes == 0)[0])
            raise ValueError(f"community {empty} is empty")
        for name in ("block_edge_counts", "block_pair_counts"):
            mat = np.asarray(getattr(self, name), dtype=np.int64)
            if mat.shape != (self.k, self.k):
                raise ValueError(f"{name} must be {self.k}x{self.k}")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        if np.any(self.block_edge_counts > self.block_pair_counts):
            raise ValueError("block edge count exceeds available pairs")

    @classmethod
    def from_assignments(cls, g: Graph, assignments) -> "Partition":
        """Count block edges and pairs of `assignments` against graph g."""
        assign = np.asarray(assignments, dtype=np.int64)
        if assign.shape != (g.n_nodes,):
            raise ValueError("assignment vector length must equal the node count")
        if g.n_nodes == 0:
            raise ValueError("cannot partition an empty graph")
        k = int(assign.max()) + 1
        sizes = np.bincount(assign, minlength=k)
        edge_counts = np.zeros((k, k), dtype=np.int64)
        if g.n_edges:
            ca = assign[g.edges[:, 0]]
            cb = assign[g.edges[:, 1]]
            np.add.at(edge_counts, (ca, cb), 1)
            edge_counts = edge_counts + edge_counts.T - np.diag(np.diag(edge_counts))
        pair_counts = np.outer(sizes, sizes)
        np.fill_diagonal(pair_counts, sizes * (sizes - 1) // 2)
        return cls(assign, k, edge_counts, pair_counts)

    @cached_property
    def community_sizes(self) -> np.ndarray:
        sizes = np.bincount(self.assignments, minlength=self.k)
        sizes.setflags(write=False)
        return sizes

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.assignments, other.assignments)

    def __hash__(self):
        return hash((self.k, self.assignments.tobytes()))


def write_partition_csv(partition: Partition, labels, stream) -> None:
    """Dump a partition as node_label,community_index rows."""
    stream.write("node_label,community_index\n")
    for lab, c in zip(labels, partition.assignments):
        stream.write(f"{lab},{int(c)}\n")


@dataclass(frozen=True)
class SpectralConfig:
    """Knobs for spectral_cluster. None values fall back to size-dependent defaults.

    regularization defaults to the average degree; k_max defaults to
    min(20, N // 4). eigenvalue_order 'abs' ranks eigenvalues by magnitude,
    'value' by plain descending value.
    """

    regularization: float | None = None
    k_max: int | None = None
    k_fixed: int | None = None
    kmeans_restarts: int = 10
    kmeans_max_iters: int = 100
    seed: int = 0
    eigenvalue_order: str = "abs"

    def __post_init__(self):
        if self.regularization is not None and self.regularization < 0:
            raise ValueError("regularization must be nonnegative")
        if self.k_max is not None and self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.k_fixed is not None and self.k_fixed < 1:
            raise ValueError("k_fixed must be at least 1")
        if self.kmeans_restarts < 1:
            raise ValueError("kmeans_restarts must be at least 1")
        if self.kmeans_max_iters < 1:
            raise ValueError("kmeans_max_iters must be at least 1")
        if self.eigenvalue_order not in ("abs", "value"):
            raise ValueError(f"unknown eigenvalue_order {self.eigenvalue_order!r}")


def regularized_laplacian(g: Graph, regularization: float) -> np.ndarray:
    """D^{-1/2} A D^{-1/2} with D = diag(degree + regularization)."""
    if regularization < 0:
        raise ValueError("regularization must be nonnegative")
    scale = g.degrees.astype(float) + regularization
    if np.any(scale == 0):
        raise NumericError(
            "zero regularization with an isolated node makes the degree scaling singular"
        )
    inv_sqrt = 1.0 / np.sqrt(scale)
    a = g.adjacency_matrix(dense=True)
    return inv_sqrt[:, None] * a * inv_sqrt[None, :]


def symmetric_eigendecomposition(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvector columns of a symmetric matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if m.size and np.max(np.abs(m - m.T)) > SYMMETRY_TOL:
        raise ValueError(f"matrix is not symmetric within {SYMMETRY_TOL}")
    values, vectors = np.linalg.eigh(m)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def select_k_eigengap(eigenvalues, k_max: int) -> int:
    """Community count by the eigengap heuristic.

    eigenvalues are assumed sorted descending by absolute value; returns the
    k in 1..k_max maximizing |lambda_k| - |lambda_{k+1}|, ties toward smaller k.
    """
    vals = np.abs(np.asarray(eigenvalues, dtype=float))
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if k_max >= len(vals):
        raise ValueError("k_max must be smaller than the number of eigenvalues")
    gaps = vals[:k_max] - vals[1:k_max + 1]
    return int(np.argmax(gaps)) + 1


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centroids = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = points[first]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centroids[c] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[c]) ** 2).sum(axis=1))
    return centroids


def _kmeans_once(points: np.ndarray, k: int, max_iters: int, rng: np.random.Generator):
    n = len(points)
    centroids = _kmeans_pp_init(points, k, rng)
    assign = None
    for _ in range(max_iters):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)  # argmin breaks ties toward the lowest centroid index
        counts = np.bincount(new_assign, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            # reseed each empty cluster with the point farthest from its centroid
            own = d2[np.arange(n), new_assign].copy()
            for c in empties:
                far = int(np.argmax(own))
                centroids[c] = points[far]
                new_assign[far] = c
                own[far] = -1.0
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            members = points[assign == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
    diffs = points - centroids[assign]
    wcss = float((diffs * diffs).sum())
    return assign, wcss


def kmeans(points, k: int, restarts: int = 10, max_iters: int = 100, rng=None) -> np.ndarray:
    """Lloyd's k-means with k-means++ seeding; best of `restarts` runs by WCSS.

    Deterministic given the rng seed: restart r draws from a stream derived
    from (seed, r), and ties in WCSS go to the earlier restart.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array")
    if k < 1 or k > len(points):
        raise ValueError("k must be between 1 and the number of points")
    if restarts < 1 or max_iters < 1:
        raise ValueError("restarts and max_iters must be at least 1")
    rng = np.random.default_rng(rng)
    best_assign = None
    best_wcss = np.inf
    for stream in rng.spawn(restarts):
        assign, wcss = _kmeans_once(points, k, max_iters, stream)
        if wcss < best_wcss:
            best_wcss = wcss
            best_assign = assign
    return best_assign


def _canonical_relabel(assign: np.ndarray) -> np.ndarray:
    """Relabel communities by ascending smallest member index, compacting unused labels."""
    mapping: dict[int, int] = {}
    out = np.empty_like(assign)
    for i, c in enumerate(assign):
        c = int(c)
        if c not in mapping:
            mapping[c] = len(mapping)
        out[i] = mapping[c]
    return out


def spectral_cluster(g: Graph, config: SpectralConfig = SpectralConfig()) -> Partition:
    """Full pipeline: regularized Laplacian, eigengap K selection, row-normalized
    eigenvector embedding, k-means. Pure function of (g, config)."""
    n = g.n_nodes
    if n < 2:
        raise ValueError("spectral clustering needs at least 2 nodes")
    regularization = config.regularization
    if regularization is None:
        regularization = 2 * g.n_edges / n  # average degree
    lap = regularized_laplacian(g, regularization)
    values, vectors = symmetric_eigendecomposition(lap)
    if config.eigenvalue_order == "abs":
        order = np.argsort(-np.abs(values), kind="stable")
        values = values[order]
        vectors = vectors[:, order]
    if config.k_fixed is not None:
        if config.k_fixed > n:
            raise ValueError("k_fixed cannot exceed the node count")
        k = config.k_fixed
    else:
        if config.k_max is not None:
            k_max = config.k_max  # out-of-range values error in select_k_eigengap
        else:
            k_max = max(1, min(20, n // 4, n - 1))
        k = select_k_eigengap(values, k_max)
    embedding = vectors[:, :k].copy()
    norms = np.sqrt((embedding ** 2).sum(axis=1))
    keep = norms >= ZERO_ROW_TOL
    embedding[keep] /= norms[keep, None]
    embedding[~keep] = 0.0
    assign = kmeans(
        embedding,
        k,
        restarts=config.kmeans_restarts,
        max_iters=config.kmeans_max_iters,
        rng=np.random.default_rng(config.seed),
    )
    return Partition.from_assignments(g, _canonical_relabel(assign))
