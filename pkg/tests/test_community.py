"""Spectral clustering pipeline and its numerical building blocks."""

import io

import numpy as np
import pytest

from contactnet import (
    Graph,
    NumericError,
    Partition,
    SpectralConfig,
    spectral_cluster,
    write_partition_csv,
)
from contactnet.community import (
    kmeans,
    regularized_laplacian,
    select_k_eigengap,
    symmetric_eigendecomposition,
)


def disjoint_cliques(sizes):
    edges, offset = [], 0
    for size in sizes:
        edges += [(offset + i, offset + j) for i in range(size) for j in range(i + 1, size)]
        offset += size
    return Graph(offset, edges)


def test_partition_counts_worked_example():
    g = Graph(4, [(0, 1), (0, 2), (2, 3)])
    part = Partition.from_assignments(g, np.array([0, 0, 1, 1]))
    assert part.k == 2
    assert part.community_sizes.tolist() == [2, 2]
    # count matrices are stored symmetric
    assert part.block_edge_counts.tolist() == [[1, 1], [1, 1]]
    assert part.block_pair_counts.tolist() == [[1, 4], [4, 1]]


def test_partition_validates_assignments():
    g = Graph(3, [(0, 1)])
    with pytest.raises(ValueError):
        Partition.from_assignments(g, np.array([0, 1]))  # wrong length
    with pytest.raises(ValueError):
        Partition.from_assignments(g, np.array([0, -1, 0]))
    with pytest.raises(ValueError):
        Partition.from_assignments(g, np.array([0, 2, 0]))  # label 1 skipped


def test_partition_csv_layout():
    g = Graph(3, [(0, 1)], labels=("alice", "bob", "carol"))
    part = Partition.from_assignments(g, np.array([0, 0, 1]))
    buf = io.StringIO()
    write_partition_csv(part, g.labels, buf)
    assert buf.getvalue() == "node_label,community_index\nalice,0\nbob,0\ncarol,1\n"


def test_regularized_laplacian_worked_examples():
    edge = Graph(2, [(0, 1)])
    assert np.allclose(regularized_laplacian(edge, 0.0), [[0, 1], [1, 0]])
    assert np.allclose(regularized_laplacian(edge, 1.0), [[0, 0.5], [0.5, 0]])
    lonely = Graph(3, [(0, 1)])
    with pytest.raises(NumericError):
        regularized_laplacian(lonely, 0.0)
    lap = regularized_laplacian(lonely, 1.0)
    assert np.allclose(lap[2], 0.0)
    assert lap[0, 1] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        regularized_laplacian(edge, -0.5)


def test_eigendecomposition_residuals_and_order():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(12, 12))
    m = (m + m.T) / 2
    values, vectors = symmetric_eigendecomposition(m)
    # signed descending order; magnitude ordering is applied downstream
    assert np.all(np.diff(values) <= 1e-12)
    for idx in range(len(values)):
        residual = m @ vectors[:, idx] - values[idx] * vectors[:, idx]
        assert np.linalg.norm(residual) < 1e-8
        assert np.linalg.norm(vectors[:, idx]) == pytest.approx(1.0)


def test_eigengap_worked_examples():
    assert select_k_eigengap([1.0, 0.98, 0.40, 0.35], k_max=3) == 2
    assert select_k_eigengap([1.0, 0.2, 0.1], k_max=2) == 1
    # equal gaps resolve toward the smaller k
    assert select_k_eigengap([1.0, 0.6, 0.2], k_max=2) == 1
    # magnitudes, not signed values
    assert select_k_eigengap([1.0, -0.9, 0.1], k_max=2) == 2
    with pytest.raises(ValueError):
        select_k_eigengap([1.0, 0.5], k_max=2)
    with pytest.raises(ValueError):
        select_k_eigengap([1.0, 0.5], k_max=0)


def test_kmeans_recovers_separated_blobs():
    rng = np.random.default_rng(9)
    blob = lambda center: rng.normal(center, 0.05, size=(20, 2))
    points = np.vstack([blob((0, 0)), blob((4, 4)), blob((8, 0))])
    labels = kmeans(points, 3, rng=np.random.default_rng(1))
    groups = [set(labels[i * 20:(i + 1) * 20]) for i in range(3)]
    assert all(len(g) == 1 for g in groups)
    assert len(set.union(*groups)) == 3


def test_kmeans_degenerate_k():
    points = np.arange(10, dtype=float).reshape(5, 2)
    assert set(kmeans(points, 1)) == {0}
    assert sorted(kmeans(points, 5)) == [0, 1, 2, 3, 4]
    with pytest.raises(ValueError):
        kmeans(points, 6)
    with pytest.raises(ValueError):
        kmeans(points, 0)


def test_kmeans_is_deterministic_per_seed():
    rng = np.random.default_rng(2)
    points = rng.normal(size=(40, 3))
    a = kmeans(points, 4, rng=np.random.default_rng(7))
    b = kmeans(points, 4, rng=np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_spectral_cluster_splits_disjoint_cliques():
    g = disjoint_cliques([10, 10])
    part = spectral_cluster(g)
    assert part.k == 2
    assert part.assignments.tolist() == [0] * 10 + [1] * 10


def test_spectral_cluster_single_clique_is_one_community():
    part = spectral_cluster(disjoint_cliques([12]))
    assert part.k == 1
    assert set(part.assignments) == {0}


def test_spectral_cluster_canonical_labels_by_first_member():
    # communities are numbered by their smallest member index
    g = disjoint_cliques([3, 3, 3])
    part = spectral_cluster(g, SpectralConfig(k_fixed=3))
    assert part.assignments.tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2]


def test_spectral_cluster_k_fixed_overrides_eigengap():
    g = disjoint_cliques([8, 8])
    part = spectral_cluster(g, SpectralConfig(k_fixed=4))
    assert part.k == 4


def test_spectral_cluster_planted_partition_recovery():
    rng = np.random.default_rng(31)
    n, half = 40, 20
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            same = (i < half) == (j < half)
            if rng.random() < (0.6 if same else 0.05):
                edges.append((i, j))
    part = spectral_cluster(Graph(n, edges))
    assert part.k == 2
    assert part.assignments.tolist() == [0] * half + [1] * half


def test_spectral_cluster_config_validation():
    g = disjoint_cliques([4, 4])
    with pytest.raises(ValueError):
        spectral_cluster(g, SpectralConfig(k_max=8))  # k_max must stay below N
    with pytest.raises(ValueError):
        spectral_cluster(Graph(1))
    with pytest.raises(ValueError):
        SpectralConfig(kmeans_restarts=0)
    with pytest.raises(ValueError):
        SpectralConfig(eigenvalue_order="random")


def test_spectral_cluster_is_deterministic():
    rng = np.random.default_rng(17)
    pairs = [(i, j) for i in range(30) for j in range(i + 1, 30)]
    g = Graph(30, [p for p in pairs if rng.random() < 0.2])
    a = spectral_cluster(g)
    b = spectral_cluster(g)
    assert a.k == b.k
    assert np.array_equal(a.assignments, b.assignments)
