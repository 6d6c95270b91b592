"""Common neighbours, preferential attachment, Jaccard and Adamic-Adar scores.

Single-pair functions work on neighbour sets and exist mostly as a readable
reference; :func:`score_all_pairs` and :func:`all_pairs_matrix` are the
vectorised drivers used to build datasets.
"""
from __future__ import annotations

import math
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .temporal_graph import neighbors


class MetricKind(str, Enum):
    CN = "cn"
    JC = "jc"
    PA = "pa"
    AA = "aa"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {
            "common_neighbors": cls.CN, "jaccard": cls.JC,
            "preferential_attachment": cls.PA, "adamic_adar": cls.AA,
        }
        key = str(value).lower()
        return aliases.get(key) or cls(key)


METRICS = (MetricKind.CN, MetricKind.JC, MetricKind.PA, MetricKind.AA)


def common_neighbors(g, x, y):
    return len(neighbors(g, x) & neighbors(g, y))


def preferential_attachment(g, x, y):
    return len(neighbors(g, x)) * len(neighbors(g, y))


def jaccard(g, x, y):
    gx, gy = neighbors(g, x), neighbors(g, y)
    union = gx | gy
    if not union:
        return 0.0
    return len(gx & gy) / len(union)


def adamic_adar(g, x, y):
    # common neighbours of degree <= 1 only occur via self-loops or
    # directed asymmetry; they would divide by log(1) = 0
    total = 0.0
    for z in sorted(neighbors(g, x) & neighbors(g, y)):
        dz = len(neighbors(g, z))
        if dz > 1:
            total += 1.0 / math.log(dz)
    return total


_SINGLE = {
    MetricKind.CN: common_neighbors,
    MetricKind.JC: jaccard,
    MetricKind.PA: preferential_attachment,
    MetricKind.AA: adamic_adar,
}


def score_pair(g, kind, x, y):
    return _SINGLE[MetricKind.parse(kind)](g, x, y)


def _aa_weights(degrees):
    w = np.zeros(len(degrees), dtype=np.float64)
    mask = degrees > 1
    w[mask] = 1.0 / np.log(degrees[mask])
    return w


def all_pairs_matrix(g, kind):
    """Dense ``V x V`` matrix of scores for every ordered pair (row = source)."""
    kind = MetricKind.parse(kind)
    adj = g.adjacency.astype(np.float64)
    deg = g.degrees.astype(np.float64)
    if kind is MetricKind.PA:
        return np.outer(deg, deg)
    if kind is MetricKind.AA:
        weighted = adj @ sp.diags(_aa_weights(g.degrees))
        return (weighted @ adj.T).toarray()
    cn = (adj @ adj.T).toarray()
    if kind is MetricKind.CN:
        return cn
    union = deg[:, None] + deg[None, :] - cn
    out = np.zeros_like(cn)
    np.divide(cn, union, out=out, where=union > 0)
    return out


def score_all_pairs(g, kind, pairs=None, chunk_size=1 << 18):
    """Scores for ``pairs`` (an ``(m, 2)`` array or iterable of tuples), in input order.

    ``pairs=None`` means every ordered pair in row-major order, i.e. ``V**2`` scores.
    """
    kind = MetricKind.parse(kind)
    if pairs is None:
        return all_pairs_matrix(g, kind).ravel()
    pairs = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                       dtype=np.int64)
    if pairs.size == 0:
        return np.empty(0, dtype=np.float64)
    pairs = pairs.reshape(-1, 2)
    deg = g.degrees.astype(np.float64)
    src, dst = pairs[:, 0], pairs[:, 1]
    if kind is MetricKind.PA:
        return deg[src] * deg[dst]

    adj = g.adjacency.astype(np.float64).tocsr()
    if kind is MetricKind.AA:
        right = (adj @ sp.diags(_aa_weights(g.degrees))).tocsr()
    else:
        right = adj
    out = np.empty(len(pairs), dtype=np.float64)
    for lo in range(0, len(pairs), chunk_size):
        s, d = src[lo:lo + chunk_size], dst[lo:lo + chunk_size]
        out[lo:lo + chunk_size] = np.asarray(adj[s].multiply(right[d]).sum(axis=1)).ravel()
    if kind is MetricKind.JC:
        union = deg[src] + deg[dst] - out
        res = np.zeros_like(out)
        np.divide(out, union, out=res, where=union > 0)
        return res
    return out
