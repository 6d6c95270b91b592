import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import random_snapshots
from rpmlink.temporal_graph import (EdgeListError, EmptyInput, NotEnoughSnapshots,
                                    TemporalNetwork, build_frames, load_edge_list,
                                    neighbors, snapshot_dynamics, write_edge_list)

from conftest import single_frame


def test_load_small_file(write_edges):
    net = load_edge_list(write_edges("a b 1\nb c 1\na c 2\n"))
    assert net.num_nodes == 3
    assert net.num_snapshots == 2
    assert [len(s) for s in net.snapshots] == [2, 1]
    assert net.labels == ("a", "b", "c")


def test_load_collapses_duplicates_and_skips_comments(write_edges):
    net = load_edge_list(write_edges("# header\n\na b 1\nb a 1\na b 1\n"))
    assert len(net.snapshot(1)) == 1
    directed = load_edge_list(write_edges("a b 1\nb a 1\na b 1\n", "d.txt"), directed=True)
    assert len(directed.snapshot(1)) == 2


def test_empty_file(write_edges):
    with pytest.raises(EmptyInput):
        load_edge_list(write_edges("# only a comment\n"))


def test_malformed_line_reports_line_number(write_edges):
    with pytest.raises(EdgeListError) as err:
        load_edge_list(write_edges("a b x\n"))
    assert err.value.line == 1
    with pytest.raises(EdgeListError) as err:
        load_edge_list(write_edges("a b 1\nc d\n"))
    assert err.value.line == 2


def test_snapshot_index_must_be_positive(write_edges):
    with pytest.raises(EdgeListError, match=">= 1"):
        load_edge_list(write_edges("a b 0\n"))


def test_weights_are_ignored_with_warning(write_edges):
    with pytest.warns(UserWarning, match="ignored"):
        net = load_edge_list(write_edges("a b 1 0.5\n"))
    assert len(net.snapshot(1)) == 1


def test_round_trip(tmp_path, write_edges):
    net = load_edge_list(write_edges("x y 1\ny z 1\nx y 1\nz x 3\n"))
    out = tmp_path / "out.txt"
    write_edge_list(net, out)
    again = load_edge_list(out)
    assert again.num_snapshots == net.num_snapshots
    for s1, s2 in zip(net.snapshots, again.snapshots):
        e1 = {frozenset((net.labels[a], net.labels[b])) for a, b in s1.edges}
        e2 = {frozenset((again.labels[a], again.labels[b])) for a, b in s2.edges}
        assert e1 == e2


def test_frames_span_consecutive_blocks():
    net = TemporalNetwork.from_edges(4, [[(0, 1)]] * 6)
    fs = build_frames(net, 2, 3)
    assert [f.span for f in fs.frames] == [(1, 2), (3, 4), (5, 6)]


def test_identity_framing():
    snaps = random_snapshots(6, 4, 0.4, seed=1)
    net = TemporalNetwork.from_edges(6, snaps)
    fs = build_frames(net, 1, 4)
    for frame, snap in zip(fs.frames, net.snapshots):
        assert frame.edge_set() == snap.edge_set()


def test_frame_union_by_hand():
    a, b, c = 0, 1, 2
    net = TemporalNetwork.from_edges(3, [[(a, b)], [(b, c)]])
    fs = build_frames(net, 2, 1)
    assert fs.frames[0].edge_set() == {(a, b), (b, c)}


def test_too_many_frames():
    net = TemporalNetwork.from_edges(3, [[(0, 1)]] * 5)
    with pytest.raises(ValueError):
        build_frames(net, 2, 3)


def test_trailing_snapshots_warn():
    net = TemporalNetwork.from_edges(3, [[(0, 1)]] * 5)
    with pytest.warns(UserWarning, match="not covered"):
        build_frames(net, 2, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 50), st.integers(1, 10), st.integers(0, 10_000), st.data())
def test_frames_match_brute_force_union(num_nodes, num_snaps, seed, data):
    w = data.draw(st.integers(1, num_snaps))
    n = data.draw(st.integers(1, num_snaps // w))
    snaps = random_snapshots(num_nodes, num_snaps, 0.1, seed)
    net = TemporalNetwork.from_edges(num_nodes, snaps)
    with_warning = n * w < num_snaps
    fs = build_frames(net, w, n, warn=False)
    covered = []
    for frame in fs.frames:
        first, last = frame.span
        covered.extend(range(first, last + 1))
        expected = set()
        for t in range(first, last + 1):
            expected |= {tuple(sorted(e)) for e in snaps[t - 1]}
        assert frame.edge_set() == expected
    assert covered == list(range(1, n * w + 1))
    assert with_warning == (covered[-1] < num_snaps)


@pytest.mark.parametrize("before,after,added,dropped", [
    ([(0, 1)], [(0, 1)], 0, 0),
    ([(0, 1)], [(1, 2)], 1, 1),
    ([(0, 1), (1, 2)], [], 0, 2),
])
def test_snapshot_dynamics_examples(before, after, added, dropped):
    net = TemporalNetwork.from_edges(3, [before, after])
    rows = snapshot_dynamics(net)
    assert rows[0] == {"t": 1, "added": len(before), "dropped": 0}
    assert rows[1] == {"t": 2, "added": added, "dropped": dropped}


def test_snapshot_dynamics_needs_two_snapshots():
    with pytest.raises(NotEnoughSnapshots):
        snapshot_dynamics(TemporalNetwork.from_edges(2, [[(0, 1)]]))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 30), st.integers(2, 8), st.integers(0, 10_000), st.booleans())
def test_snapshot_dynamics_balance(num_nodes, num_snaps, seed, directed):
    net = TemporalNetwork.from_edges(num_nodes, random_snapshots(num_nodes, num_snaps, 0.2, seed, directed),
                                     directed=directed)
    rows = snapshot_dynamics(net)
    for prev, cur, row in zip(net.snapshots, net.snapshots[1:], rows[1:]):
        assert len(cur) == len(prev) + row["added"] - row["dropped"]


def test_neighbors():
    frame = single_frame([(0, 1), (0, 2)], 4)
    assert neighbors(frame, 0) == {1, 2}
    assert neighbors(frame, 3) == set()


def test_directed_neighbors_union_and_out():
    a, b, c = 0, 1, 2
    frame = single_frame([(a, b), (c, a)], 3, directed=True)
    assert neighbors(frame, a) == {b, c}
    assert neighbors(frame.with_mode("out"), a) == {b}


def test_network_rejects_out_of_range_endpoint():
    with pytest.raises(ValueError):
        TemporalNetwork.from_edges(2, [[(0, 5)]])


def test_edges_are_immutable_arrays_of_unique_rows():
    net = TemporalNetwork.from_edges(3, [[(1, 0), (0, 1), (2, 1)]])
    edges = net.snapshot(1).edges
    assert edges.tolist() == [[0, 1], [1, 2]]
    assert edges.dtype == np.int64
    assert not edges.flags.writeable
