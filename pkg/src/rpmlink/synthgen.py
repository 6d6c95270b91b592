"""Synthetic temporal networks with a minority of fast-linking ("hot") nodes."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .temporal_graph import Snapshot, TemporalNetwork


@dataclass
class SynthConfig:
    num_nodes: int = 500
    num_snapshots: int = 20
    base_rate: float = 0.2
    hot_fraction: float = 0.1
    hot_multiplier: float = 5.0
    churn: float = 0.3
    directed: bool = False
    burn_in: int = 5
    seed: int = 0

    def validate(self):
        if self.num_nodes < 1:
            raise ValueError("num_nodes must be >= 1")
        if self.num_snapshots < 1:
            raise ValueError("num_snapshots must be >= 1")
        if self.base_rate < 0:
            raise ValueError("base_rate must be >= 0")
        if not 0.0 <= self.hot_fraction <= 1.0:
            raise ValueError("hot_fraction must lie in [0, 1]")
        if self.hot_multiplier < 1.0:
            raise ValueError("hot_multiplier must be >= 1")
        if not 0.0 <= self.churn <= 1.0:
            raise ValueError("churn must lie in [0, 1]")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        return self

    def to_dict(self):
        return asdict(self)


def node_rates(cfg, rng):
    """Per-node expected new links per snapshot, and the boolean hot mask."""
    n_hot = int(round(cfg.hot_fraction * cfg.num_nodes))
    hot = np.zeros(cfg.num_nodes, dtype=bool)
    hot[rng.permutation(cfg.num_nodes)[:n_hot]] = True
    rates = np.where(hot, cfg.base_rate * cfg.hot_multiplier, cfg.base_rate)
    return rates, hot


def _degrees(edges, num_nodes):
    if len(edges) == 0:
        return np.zeros(num_nodes, dtype=np.int64)
    return np.bincount(edges.ravel(), minlength=num_nodes)


def _step(edges, rates, cfg, rng):
    V = cfg.num_nodes
    if len(edges):
        edges = edges[rng.random(len(edges)) >= cfg.churn]
    counts = rng.poisson(rates)
    src = np.repeat(np.arange(V, dtype=np.int64), counts)
    if len(src) == 0 or V < 2:
        return edges
    # preferential attachment on current degree, +1 so isolated nodes stay reachable
    weight = _degrees(edges, V).astype(np.float64) + 1.0
    dst = rng.choice(V, size=len(src), p=weight / weight.sum())
    for _ in range(10):
        self_pairs = dst == src
        if not self_pairs.any():
            break
        dst[self_pairs] = rng.choice(V, size=int(self_pairs.sum()), p=weight / weight.sum())
    keep = dst != src
    new = np.column_stack([src[keep], dst[keep]])
    if not cfg.directed:
        new = np.sort(new, axis=1)
    merged = np.concatenate([edges, new]) if len(edges) else new
    return np.unique(merged, axis=0)


def generate(cfg: SynthConfig, return_hot=False):
    """Simulate ``cfg.num_snapshots`` snapshots after ``cfg.burn_in`` discarded steps."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    rates, hot = node_rates(cfg, rng)
    edges = np.empty((0, 2), dtype=np.int64)
    for _ in range(cfg.burn_in):
        edges = _step(edges, rates, cfg, rng)
    snaps = []
    for t in range(1, cfg.num_snapshots + 1):
        edges = _step(edges, rates, cfg, rng)
        snaps.append(Snapshot(t, edges.reshape(-1, 2)))
    net = TemporalNetwork(cfg.num_nodes, snaps, cfg.directed)
    if return_hot:
        return net, hot
    return net
