"""Graph container, file loaders, and basic network statistics."""

import io
import math

import numpy as np
import pytest

from contactnet import (
    Graph,
    ParseError,
    UndefinedStatisticError,
    attendance_to_graph,
    clustering_coefficient,
    contacts_to_graph,
    degree_stats,
    density,
    load_attendance,
    load_contacts,
    load_edge_list,
    read_graph,
    write_edge_list,
)


def test_edges_are_canonicalized():
    # duplicates collapse, endpoints are sorted, rows are sorted
    g = Graph(4, [(2, 1), (1, 2), (3, 0), (0, 1)])
    assert g.n_nodes == 4
    assert g.n_edges == 3
    assert g.edges.tolist() == [[0, 1], [0, 3], [1, 2]]
    assert g.degrees.tolist() == [2, 2, 1, 1]


def test_graph_rejects_bad_edges_and_labels():
    with pytest.raises(ValueError):
        Graph(3, [(0, 0)])
    with pytest.raises(ValueError):
        Graph(2, [(0, 5)])
    with pytest.raises(ValueError):
        Graph(2, [(0, 1)], labels=("a", "a"))
    with pytest.raises(ValueError):
        Graph(2, labels=("only-one",))


def test_adjacency_and_neighbors():
    g = Graph(4, [(0, 1), (1, 2), (1, 3)])
    dense = g.adjacency_matrix(dense=True)
    assert dense.tolist() == [
        [0, 1, 0, 0],
        [1, 0, 1, 1],
        [0, 1, 0, 0],
        [0, 1, 0, 0],
    ]
    sparse = g.adjacency_matrix()
    assert np.array_equal(sparse.toarray(), dense)
    assert sorted(g.neighbors(1).tolist()) == [0, 2, 3]
    assert g.neighbors(0).tolist() == [1]
    assert g.has_edge(0, 1) and g.has_edge(1, 0)
    assert not g.has_edge(0, 2)


def test_equality_ignores_edge_input_order():
    a = Graph(3, [(0, 1), (1, 2)], labels=("x", "y", "z"))
    b = Graph(3, [(1, 2), (1, 0)], labels=("x", "y", "z"))
    assert a == b
    assert hash(a) == hash(b)
    assert a != Graph(3, [(0, 1)], labels=("x", "y", "z"))


def test_default_labels_are_indices():
    g = Graph(3, [(0, 1)])
    assert g.labels == ("0", "1", "2")
    assert g.label_index["1"] == 1


def test_edge_list_round_trip_is_exact_for_labeled_edges():
    # loader indexes labels by first appearance, matching the writer's order
    g = Graph(3, [(0, 1), (0, 2)], labels=("a", "b", "c"))
    buf = io.StringIO()
    write_edge_list(g, buf)
    assert buf.getvalue().startswith("%N 3\n")
    assert load_edge_list(buf.getvalue().splitlines()) == g


def test_edge_list_round_trip_keeps_isolated_node_counts():
    # isolated labels are not representable in the format; the header keeps
    # the count and the loader invents names for the padding
    g = Graph(4, [(0, 2)], labels=("a", "b", "c", "d"))
    buf = io.StringIO()
    write_edge_list(g, buf)
    again = load_edge_list(buf.getvalue().splitlines())
    assert again.n_nodes == 4
    assert again.n_edges == 1
    assert sorted(again.degrees.tolist()) == sorted(g.degrees.tolist())


def test_edge_list_header_pads_with_synthetic_labels():
    g = load_edge_list("%N 4\nx y\n".splitlines())
    assert g.labels == ("x", "y", "2", "3")
    assert g.n_edges == 1
    # synthetic names dodge collisions with real labels
    g2 = load_edge_list("%N 3\n0 2\n".splitlines())
    assert g2.labels == ("0", "2", "_2")


def test_edge_list_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 1"):
        load_edge_list(["a b c"])
    with pytest.raises(ParseError):
        load_edge_list(["%N notanumber", "a b"])
    with pytest.raises(ParseError):
        load_edge_list(["%N 1", "a b"])  # header smaller than observed nodes


def test_edge_list_ignores_comments_and_blank_lines():
    g = load_edge_list(["# header comment", "", "a b", "  ", "b c"])
    assert g.n_nodes == 3
    assert g.n_edges == 2


def test_contacts_loader_deduplicates_repeat_events():
    rows = "time,node_a,node_b\n1,a,b\n1,b,a\n2,a,c\n"
    events = load_contacts(rows.splitlines())
    assert len(events) == 3
    assert events[0].node_a == "a" and events[0].node_b == "b"
    g = contacts_to_graph(events)
    assert g.labels == ("a", "b", "c")
    assert g.n_edges == 2


def test_attendance_loader_projects_cooccurrence():
    rows = "event_id,person\ne1,a\ne1,b\ne1,c\ne2,b\ne2,d\ne3,z\n"
    g = attendance_to_graph(load_attendance(rows.splitlines()))
    assert g.labels == ("a", "b", "c", "d", "z")
    # e1 yields a triangle, e2 one edge, e3 an isolated attendee
    assert g.edge_set == {(0, 1), (0, 2), (1, 2), (1, 3)}


def test_csv_loaders_reject_missing_columns():
    with pytest.raises(ParseError):
        load_contacts("time,node_a\n1,a\n".splitlines())
    with pytest.raises(ParseError):
        load_attendance("event_id\ne1\n".splitlines())


def test_read_graph_validates_format_before_io(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("%N 2\na b\n")
    assert read_graph(str(path)).n_edges == 1
    with pytest.raises(ValueError):
        read_graph(str(path), fmt="parquet")


def test_density_worked_examples():
    k4 = Graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
    assert density(k4) == 1.0
    p3 = Graph(3, [(0, 1), (1, 2)])
    assert density(p3) == pytest.approx(2 / 3)
    with pytest.raises(UndefinedStatisticError):
        density(Graph(1))


def test_degree_stats_on_a_star():
    g = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    stats = degree_stats(g)
    assert stats.degrees.tolist() == [4, 1, 1, 1, 1]
    assert stats.average == pytest.approx(8 / 5)
    assert stats.maximum == 4
    with pytest.raises(UndefinedStatisticError):
        degree_stats(Graph(0))


def test_clustering_coefficient_worked_example():
    # K4 minus one edge: two triangles sharing the two degree-3 nodes
    g = Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
    local = clustering_coefficient(g, "average_local")
    assert local == pytest.approx((1.0 + 1.0 + 2 / 3 + 2 / 3) / 4)
    assert clustering_coefficient(g, "global_transitivity") == pytest.approx(0.75)


def test_clustering_degenerate_cases():
    triangle = Graph(3, [(0, 1), (1, 2), (0, 2)])
    assert clustering_coefficient(triangle, "average_local") == 1.0
    assert clustering_coefficient(triangle, "global_transitivity") == 1.0
    path = Graph(3, [(0, 1), (1, 2)])
    assert clustering_coefficient(path, "average_local") == 0.0
    assert clustering_coefficient(path, "global_transitivity") == 0.0
    assert clustering_coefficient(Graph(0), "average_local") == 0.0
    assert clustering_coefficient(Graph(2, [(0, 1)]), "global_transitivity") == 0.0
    with pytest.raises(ValueError):
        clustering_coefficient(triangle, "median_local")


def test_statistics_match_combinatorial_definitions():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(2, 40))
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        mask = rng.random(len(pairs)) < 0.2
        g = Graph(n, [p for p, keep in zip(pairs, mask) if keep])
        m = g.n_edges
        assert density(g) == pytest.approx(m / math.comb(n, 2))
        assert degree_stats(g).average == pytest.approx(2 * m / n)
