"""Per-node link-formation rates and labelled pair datasets."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .forecasting import DEFAULT_MODEL, forecast_stack, parse_model
from .temporal_graph import FramedSeries, edge_keys
from .topo_metrics import METRICS, all_pairs_matrix, score_all_pairs


class FeatureSetKind(str, Enum):
    RPM = "rpm"
    SUPERVISED = "supervised"
    SUPERVISED_MA = "supervised_ma"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "_")
        return cls(key)

    @property
    def label(self):
        return {"rpm": "RPM", "supervised": "Supervised", "supervised_ma": "Supervised-MA"}[self.value]


class DatasetError(ValueError):
    pass


def feature_schema(kind):
    kind = FeatureSetKind.parse(kind)
    base = [m.value for m in METRICS]
    if kind is FeatureSetKind.SUPERVISED:
        return base
    if kind is FeatureSetKind.RPM:
        return base + ["rate_src", "rate_dst"]
    return [f"{m}_f" for m in base]


def _incident_counts(edges, num_nodes, directed, incident):
    if len(edges) == 0:
        return np.zeros(num_nodes, dtype=np.int64)
    src, dst = edges[:, 0], edges[:, 1]
    counts = np.bincount(src, minlength=num_nodes)
    if not directed or incident == "union":
        # a self-loop is one incident edge, not two
        counts += np.bincount(dst[src != dst], minlength=num_nodes)
    return counts


def rate_matrix(fs: FramedSeries, count_deletions=False, incident="union"):
    """``(frames, nodes)`` array of new incident links per node per frame.

    Frame 1 counts every incident edge. ``count_deletions`` also adds edges
    that disappeared since the previous frame.
    """
    V = fs.num_nodes
    out = np.zeros((fs.count, V), dtype=np.int64)
    prev_keys, prev_edges = None, None
    for k, frame in enumerate(fs.frames):
        if prev_keys is None:
            new = frame.edges
        else:
            new = frame.edges[~np.isin(edge_keys(frame.edges, V), prev_keys)]
        out[k] = _incident_counts(new, V, frame.directed, incident)
        if count_deletions and prev_keys is not None:
            gone = prev_edges[~np.isin(edge_keys(prev_edges, V), frame.keys)]
            out[k] += _incident_counts(gone, V, frame.directed, incident)
        prev_keys, prev_edges = frame.keys, frame.edges
    return out


def build_rate_series(fs, node, count_deletions=False, incident="union"):
    """Link-formation counts of a single node across the frames of ``fs``."""
    return rate_matrix(fs, count_deletions, incident)[:, node].astype(np.float64)


def target_labels(target, pairs=None):
    """1 where the ordered pair is an edge of ``target`` (either direction if undirected)."""
    V = target.num_nodes
    if pairs is None:
        dense = np.zeros((V, V), dtype=np.int8)
        e = target.edges
        dense[e[:, 0], e[:, 1]] = 1
        if not target.directed:
            dense[e[:, 1], e[:, 0]] = 1
        return dense.ravel()
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if not target.directed:
        pairs = np.sort(pairs, axis=1)
    return np.isin(edge_keys(pairs, V), target.keys).astype(np.int8)


@dataclass(eq=False)
class PairDataset:
    """Ordered node pairs with a feature matrix and binary labels."""

    src: np.ndarray
    dst: np.ndarray
    X: np.ndarray
    y: np.ndarray
    feature_names: list
    kind: FeatureSetKind
    num_nodes: int

    def __len__(self):
        return len(self.y)

    @property
    def positives(self):
        return int(self.y.sum())

    @property
    def negatives(self):
        return len(self) - self.positives

    def schema(self, model=None):
        info = {
            "kind": self.kind.value,
            "columns": ["src", "dst", "label", *self.feature_names],
            "features": list(self.feature_names),
            "num_nodes": self.num_nodes,
            "rows": len(self),
            "positives": self.positives,
            "negatives": self.negatives,
        }
        if model is not None:
            info["forecast_model"] = parse_model(model).spec()
        return info

    def to_csv(self, path, labels=None, model=None):
        """Write ``src,dst,label,f1..fk`` plus a ``<path>.schema.json`` sidecar."""
        names = labels if labels is not None else [str(i) for i in range(self.num_nodes)]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["src", "dst", "label", *self.feature_names])
            for s, d, lab, row in zip(self.src, self.dst, self.y, self.X):
                writer.writerow([names[s], names[d], int(lab), *(repr(float(v)) for v in row)])
        with open(f"{path}.schema.json", "w", encoding="utf-8") as fh:
            json.dump(self.schema(model), fh, indent=2)


def all_ordered_pairs(num_nodes):
    src = np.repeat(np.arange(num_nodes, dtype=np.int64), num_nodes)
    dst = np.tile(np.arange(num_nodes, dtype=np.int64), num_nodes)
    return src, dst


class PairFeaturizer(BaseEstimator, TransformerMixin):
    """Turns a framed history into pair feature vectors.

    ``fit`` takes a :class:`FramedSeries`; ``transform`` takes an ``(m, 2)``
    array of ordered pairs, or ``None`` for all ``V**2`` pairs in row-major
    order.
    """

    def __init__(self, kind="rpm", model="wma:0.2,0.3,0.5", cumulative_graph=False,
                 count_deletions=False, incident="union"):
        self.kind = kind
        self.model = model
        self.cumulative_graph = cumulative_graph
        self.count_deletions = count_deletions
        self.incident = incident

    def fit(self, X, y=None):
        fs = X
        if not isinstance(fs, FramedSeries) or fs.count < 1:
            raise DatasetError("PairFeaturizer.fit expects a non-empty FramedSeries")
        kind = FeatureSetKind.parse(self.kind)
        if kind is not FeatureSetKind.SUPERVISED and fs.count < 2:
            raise DatasetError(f"{kind.label} features need at least 2 history frames, got {fs.count}")
        self.kind_ = kind
        self.model_ = parse_model(self.model if self.model is not None else DEFAULT_MODEL)
        self.history_ = fs
        self.graph_ = fs.cumulative() if self.cumulative_graph else fs.last
        self.num_nodes_ = fs.num_nodes
        self.feature_names_ = feature_schema(kind)
        if kind is FeatureSetKind.RPM:
            rates = rate_matrix(fs, self.count_deletions, self.incident)
            self.rate_forecast_ = forecast_stack(self.model_, rates)
        return self

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_")
        return np.asarray(self.feature_names_, dtype=object)

    def transform(self, X=None):
        check_is_fitted(self, "kind_")
        V = self.num_nodes_
        if X is None:
            src, dst = all_ordered_pairs(V)
            pairs = None
            m = V * V
        else:
            pairs = np.asarray(X, dtype=np.int64).reshape(-1, 2)
            if len(pairs) and (pairs.min() < 0 or pairs.max() >= V):
                raise DatasetError("pair endpoint outside the node universe")
            src, dst = pairs[:, 0], pairs[:, 1]
            m = len(pairs)
        out = np.empty((m, len(self.feature_names_)), dtype=np.float64)
        if self.kind_ is FeatureSetKind.SUPERVISED_MA:
            for j, metric in enumerate(METRICS):
                out[:, j] = self._forecast_metric(metric, pairs)
            return out
        for j, metric in enumerate(METRICS):
            out[:, j] = score_all_pairs(self.graph_, metric, pairs)
        if self.kind_ is FeatureSetKind.RPM:
            out[:, 4] = self.rate_forecast_[src]
            out[:, 5] = self.rate_forecast_[dst]
        return out

    def _forecast_metric(self, metric, pairs):
        # forecasts are linear in the observations, so accumulate frame by
        # frame instead of stacking a (frames, pairs) array
        frames = self.history_.frames
        weights = self.model_.weights(len(frames))
        acc = None
        for w, frame in zip(weights, frames):
            if w == 0.0:
                continue
            if pairs is None:
                scores = all_pairs_matrix(frame, metric).ravel()
            else:
                scores = score_all_pairs(frame, metric, pairs)
            acc = w * scores if acc is None else acc + w * scores
        return acc


def build_dataset(fs, target, kind="rpm", model="wma:0.2,0.3,0.5", pairs=None,
                  cumulative_graph=False, count_deletions=False, incident="union"):
    """Labelled dataset over every ordered pair (``V**2`` rows) unless ``pairs`` is given."""
    if target.num_nodes != fs.num_nodes:
        raise DatasetError(
            f"node universe mismatch: history has {fs.num_nodes}, target has {target.num_nodes}")
    if fs.last.span[1] >= target.span[0]:
        raise DatasetError(
            f"history ends at snapshot {fs.last.span[1]} but target starts at {target.span[0]}")
    feat = PairFeaturizer(kind, model, cumulative_graph, count_deletions, incident).fit(fs)
    X = feat.transform(pairs)
    if pairs is None:
        src, dst = all_ordered_pairs(fs.num_nodes)
    else:
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        src, dst = arr[:, 0], arr[:, 1]
    y = target_labels(target, pairs)
    if not np.all(np.isfinite(X)):
        bad = int(np.argwhere(~np.isfinite(X))[0, 0])
        raise DatasetError(f"non-finite feature in row {bad}")
    return PairDataset(src, dst, X, y, feat.feature_names_, feat.kind_, fs.num_nodes)
