"""Timestamped networks, snapshot framing and churn statistics.

Edges are stored as ``(m, 2)`` integer arrays of unique rows. Undirected
edges are canonicalised so that ``src <= dst``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

NEIGHBOR_MODES = ("union", "out")


class EdgeListError(ValueError):
    """Raised for unreadable edge-list input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyInput(EdgeListError):
    pass


class NotEnoughSnapshots(ValueError):
    pass


def _as_edge_array(edges, directed):
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                     dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    arr = arr.reshape(-1, 2)
    if not directed:
        arr = np.sort(arr, axis=1)
    return np.unique(arr, axis=0)


def edge_keys(edges, num_nodes):
    """Encode each edge row as a single int64 ``src * num_nodes + dst``."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return edges[:, 0] * num_nodes + edges[:, 1]


def neighbor_matrix(edges, num_nodes, directed=False, mode="union"):
    """Boolean CSR matrix whose row ``x`` is the indicator of Γ(x).

    For directed graphs ``mode="union"`` merges in- and out-neighbours and
    ``mode="out"`` keeps successors only. Undirected graphs ignore ``mode``.
    """
    if mode not in NEIGHBOR_MODES:
        raise ValueError(f"unknown neighbour mode {mode!r}")
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    src, dst = edges[:, 0], edges[:, 1]
    if not directed or mode == "union":
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
    data = np.ones(len(src), dtype=bool)
    mat = sp.csr_matrix((data, (src, dst)), shape=(num_nodes, num_nodes), dtype=bool)
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return mat


@dataclass(frozen=True, eq=False)
class Snapshot:
    index: int
    edges: np.ndarray

    def __post_init__(self):
        self.edges.setflags(write=False)

    def edge_set(self):
        return {tuple(int(v) for v in e) for e in self.edges}

    def __len__(self):
        return len(self.edges)


@dataclass(frozen=True, eq=False)
class TemporalNetwork:
    num_nodes: int
    snapshots: tuple
    directed: bool = False
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "snapshots", tuple(self.snapshots))
        idx = [s.index for s in self.snapshots]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("snapshot indices must be strictly increasing")
        for s in self.snapshots:
            if len(s.edges) and (s.edges.min() < 0 or s.edges.max() >= self.num_nodes):
                raise ValueError(f"snapshot {s.index} has an endpoint outside the node universe")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.num_nodes)))

    @classmethod
    def from_edges(cls, num_nodes, snapshot_edges, directed=False, labels=()):
        """Build from a sequence of per-snapshot edge iterables, indexed from 1."""
        snaps = [Snapshot(t, _as_edge_array(e, directed))
                 for t, e in enumerate(snapshot_edges, start=1)]
        return cls(num_nodes, snaps, directed, tuple(labels))

    @property
    def num_snapshots(self):
        return len(self.snapshots)

    def snapshot(self, t):
        """Snapshot with time index ``t`` (1-based)."""
        return self.snapshots[t - 1]


@dataclass(frozen=True, eq=False)
class Frame:
    """Union of consecutive snapshots ``span[0]..span[1]`` inclusive."""

    span: tuple
    edges: np.ndarray
    num_nodes: int
    directed: bool = False
    neighbor_mode: str = "union"

    def __post_init__(self):
        self.edges.setflags(write=False)

    @cached_property
    def adjacency(self):
        return neighbor_matrix(self.edges, self.num_nodes, self.directed, self.neighbor_mode)

    @cached_property
    def degrees(self):
        return np.asarray(self.adjacency.sum(axis=1)).ravel().astype(np.int64)

    @cached_property
    def keys(self):
        return np.sort(edge_keys(self.edges, self.num_nodes))

    def edge_set(self):
        return {tuple(int(v) for v in e) for e in self.edges}

    def with_mode(self, neighbor_mode):
        return Frame(self.span, self.edges, self.num_nodes, self.directed, neighbor_mode)


@dataclass(frozen=True, eq=False)
class FramedSeries:
    frames: tuple
    window: int

    @property
    def count(self):
        return len(self.frames)

    @property
    def num_nodes(self):
        return self.frames[0].num_nodes

    @property
    def directed(self):
        return self.frames[0].directed

    @property
    def last(self):
        return self.frames[-1]

    def cumulative(self):
        """A single frame holding the union of every frame in the series."""
        first = self.frames[0]
        edges = np.unique(np.concatenate([f.edges for f in self.frames]), axis=0)
        return Frame((first.span[0], self.frames[-1].span[1]), edges, first.num_nodes,
                     first.directed, first.neighbor_mode)


def make_frame(net, first, last, neighbor_mode="union"):
    """Frame spanning snapshots ``first..last`` (1-based, inclusive)."""
    if first < 1 or last > net.num_snapshots or first > last:
        raise ValueError(f"invalid frame span [{first}, {last}] for {net.num_snapshots} snapshots")
    parts = [net.snapshot(t).edges for t in range(first, last + 1)]
    edges = np.unique(np.concatenate(parts), axis=0) if parts else np.empty((0, 2), np.int64)
    edges = edges.reshape(-1, 2)
    return Frame((first, last), edges, net.num_nodes, net.directed, neighbor_mode)


def frame_at(net, w, index, neighbor_mode="union"):
    """The ``index``-th frame (1-based) of length ``w``."""
    return make_frame(net, (index - 1) * w + 1, index * w, neighbor_mode)


def build_frames(net, w, n, start=1, neighbor_mode="union", warn=True):
    """Group ``n`` consecutive blocks of ``w`` snapshots, beginning at frame ``start``.

    With the default ``start=1`` frame ``i`` spans snapshots ``(i-1)w+1 .. iw``.
    """
    if w < 1 or n < 1:
        raise ValueError("window and frame count must be >= 1")
    needed = (start - 1 + n) * w
    if needed > net.num_snapshots:
        raise ValueError(
            f"{n} frames of width {w} starting at frame {start} need {needed} snapshots, "
            f"network has {net.num_snapshots}")
    if warn and start == 1 and needed < net.num_snapshots:
        warnings.warn(f"snapshots {needed + 1}..{net.num_snapshots} are not covered by framing",
                      stacklevel=2)
    frames = tuple(frame_at(net, w, i, neighbor_mode) for i in range(start, start + n))
    return FramedSeries(frames, w)


def snapshot_dynamics(net):
    """Per-snapshot added/dropped edge counts as a list of dicts with keys t, added, dropped."""
    if net.num_snapshots < 2:
        raise NotEnoughSnapshots("churn statistics need at least two snapshots")
    out = []
    prev = None
    for snap in net.snapshots:
        keys = edge_keys(snap.edges, net.num_nodes)
        if prev is None:
            out.append({"t": snap.index, "added": len(keys), "dropped": 0})
        else:
            added = np.setdiff1d(keys, prev, assume_unique=True).size
            dropped = np.setdiff1d(prev, keys, assume_unique=True).size
            out.append({"t": snap.index, "added": int(added), "dropped": int(dropped)})
        prev = keys
    return out


def neighbors(graph, x):
    """Γ(x) on a frame's union graph as a Python set."""
    adj = graph.adjacency
    return set(adj.indices[adj.indptr[x]:adj.indptr[x + 1]].tolist())


def load_edge_list(path, directed=False):
    """Read ``src dst snapshot`` records, interning labels to dense ids.

    Blank lines and lines starting with ``#`` are skipped. A fourth column is
    treated as an edge weight and ignored.
    """
    records = []
    label_ids = {}
    warned_weights = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 3:
                raise EdgeListError(f"expected 'src dst snapshot', got {line!r}", lineno)
            if len(parts) > 3 and not warned_weights:
                warnings.warn("extra edge-list columns (weights) are ignored", stacklevel=2)
                warned_weights = True
            try:
                t = int(parts[2])
            except ValueError:
                raise EdgeListError(f"snapshot index {parts[2]!r} is not an integer", lineno) from None
            if t < 1:
                raise EdgeListError(f"snapshot index must be >= 1, got {t}", lineno)
            ids = []
            for label in parts[:2]:
                if label not in label_ids:
                    label_ids[label] = len(label_ids)
                ids.append(label_ids[label])
            records.append((ids[0], ids[1], t))
    if not records:
        raise EmptyInput(f"{path}: no edge records")

    arr = np.asarray(records, dtype=np.int64)
    num_snapshots = int(arr[:, 2].max())
    snaps = []
    for t in range(1, num_snapshots + 1):
        snaps.append(Snapshot(t, _as_edge_array(arr[arr[:, 2] == t, :2], directed)))
    labels = tuple(label_ids)
    logger.info("loaded %d records, %d nodes, %d snapshots from %s",
                len(records), len(labels), num_snapshots, path)
    return TemporalNetwork(len(labels), snaps, directed, labels)


def write_edge_list(net, path):
    """Inverse of :func:`load_edge_list` (duplicates are already collapsed)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# src dst snapshot\n")
        for snap in net.snapshots:
            for s, d in snap.edges:
                fh.write(f"{net.labels[s]} {net.labels[d]} {snap.index}\n")
