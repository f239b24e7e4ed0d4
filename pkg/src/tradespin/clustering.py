"""Directed-modularity Louvain clustering of the money matrix.

Modularity of a partition of a weighted digraph with adjacency ``A``
(``A[i, j]`` = flow from i to j) and total weight ``W``::

    Q = 1/W * sum_ij (A[i, j] - out[i] * in[j] / W) * [comm_i == comm_j]
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import MoneyMatrix, TradeNetwork

# moves must beat staying put by this much (in units of total weight)
GAIN_TOL = 1e-12


@dataclass(eq=False)
class ClusterPartition:
    community: np.ndarray
    modularity: float
    leaders: dict = field(default_factory=dict)
    history: list = field(default_factory=list)

    @property
    def n_communities(self) -> int:
        return int(self.community.max()) + 1

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.community == k)


def _adjacency(m) -> np.ndarray:
    if isinstance(m, MoneyMatrix):
        # values[importer, exporter] -> A[exporter, importer]
        return np.asarray(m.values, dtype=float).T
    return np.asarray(m, dtype=float)


def _canonical(labels) -> np.ndarray:
    """Relabel to 0..K-1 in order of first appearance."""
    labels = np.asarray(labels)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first))
    return rank[inv]


def directed_modularity(m, partition) -> float:
    A = _adjacency(m)
    W = A.sum()
    if W <= 0:
        raise ValueError("modularity undefined for a graph with zero total weight")
    comm = _canonical(partition)
    if comm.shape != (A.shape[0],):
        raise ValueError("partition length does not match the graph")
    k = comm.max() + 1
    onehot = np.zeros((A.shape[0], k))
    onehot[np.arange(A.shape[0]), comm] = 1.0
    inner = np.einsum("ik,ij,jk->k", onehot, A, onehot)
    out_c = onehot.T @ A.sum(axis=1)
    in_c = onehot.T @ A.sum(axis=0)
    return float(inner.sum() / W - (out_c * in_c).sum() / W**2)


def _local_moves(A, rng):
    """One Louvain phase on a normalized adjacency (total weight 1)."""
    n = A.shape[0]
    out = A.sum(axis=1)
    inn = A.sum(axis=0)
    comm = np.arange(n)
    tot_out = out.copy()
    tot_in = inn.copy()
    sym = A + A.T
    any_move = False
    moved = True
    while moved:
        moved = False
        for i in rng.permutation(n):
            ci = comm[i]
            tot_out[ci] -= out[i]
            tot_in[ci] -= inn[i]
            link = np.bincount(comm, weights=sym[i], minlength=n)
            link[ci] -= 2 * A[i, i]
            gain = link - (out[i] * tot_in + inn[i] * tot_out)
            cand = np.flatnonzero(link > 0)
            best = ci
            if cand.size:
                j = cand[np.argmax(gain[cand])]
                if gain[j] > gain[ci] + GAIN_TOL:
                    best = j
            comm[i] = best
            tot_out[best] += out[i]
            tot_in[best] += inn[i]
            if best != ci:
                moved = any_move = True
    return _canonical(comm), any_move


def _aggregate(A, comm):
    k = comm.max() + 1
    onehot = np.zeros((A.shape[0], k))
    onehot[np.arange(A.shape[0]), comm] = 1.0
    return onehot.T @ A @ onehot


def louvain(m, seed=0) -> ClusterPartition:
    """Two-phase Louvain maximizing directed modularity (resolution 1).

    Node visiting order in each local-move sweep is shuffled with ``seed``.
    ``history`` records the modularity of the original graph after each pass.
    """
    A0 = _adjacency(m)
    W = A0.sum()
    if W <= 0:
        raise ValueError("cannot cluster a graph with zero total weight")
    rng = np.random.default_rng(seed)
    A = A0 / W
    node_comm = np.arange(A.shape[0])
    history = [directed_modularity(A0, node_comm)]
    while True:
        comm, moved = _local_moves(A, rng)
        if not moved:
            break
        node_comm = comm[node_comm]
        history.append(directed_modularity(A0, node_comm))
        A = _aggregate(A, comm)
        if A.shape[0] == 1:
            break
    node_comm = _canonical(node_comm)
    return ClusterPartition(node_comm, history[-1], {}, history)


def label_leaders(partition: ClusterPartition, net: TradeNetwork) -> dict:
    """Leader of each community: largest ``max(P, P_star)``, then ``P_star``, then iso code."""
    leaders = {}
    for k in range(partition.n_communities):
        idx = partition.members(k)
        best = min(idx, key=lambda i: (-max(net.P[i], net.P_star[i]), -net.P_star[i], net.table.codes[i]))
        leaders[k] = net.table.codes[best]
    partition.leaders = leaders
    return leaders


def summarize(partition: ClusterPartition, net: TradeNetwork, min_size: int = 4) -> list[tuple[str, list[str]]]:
    """``(label, members)`` per community, largest first; communities smaller
    than ``min_size`` are pooled under ``"Others"``."""
    if not partition.leaders:
        label_leaders(partition, net)
    groups, others = [], []
    for k in range(partition.n_communities):
        codes = [net.table.codes[i] for i in partition.members(k)]
        if len(codes) >= min_size:
            groups.append((partition.leaders[k], codes))
        else:
            others.extend(codes)
    groups.sort(key=lambda g: (-len(g[1]), g[0]))
    if others:
        groups.append(("Others", sorted(others)))
    return groups
