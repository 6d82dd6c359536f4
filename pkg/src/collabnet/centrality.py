"""Betweenness, eigenvector, and degree centrality plus centralization.

Betweenness counts, for every unordered node pair, the fraction of
shortest paths running through a third node. The topological variant uses
hop counts; the weighted variant uses inverse-weight distances, counting
all minimum-distance paths with a relative tie tolerance so float noise
cannot split genuinely co-minimal routes.

The topological kernel is a level-synchronous Brandes sweep over all
sources at once, expressed as sparse-matrix products so large synthetic
graphs stay fast; the weighted kernel is a per-source Dijkstra with
pair-dependency accumulation.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DataError
from .graph import CollabNetwork

TIE_TOLERANCE = 1e-12  # relative, on accumulated path distances


@dataclass
class CentralityVector:
    """Per-node scores for one centrality metric."""

    metric: str
    scores: dict[str, float]
    meta: dict = field(default_factory=dict)

    def __getitem__(self, node: str) -> float:
        return self.scores[node]

    def items(self):
        return self.scores.items()

    def values(self) -> np.ndarray:
        return np.array(list(self.scores.values()))

    def mean(self) -> float:
        return float(self.values().mean()) if self.scores else 0.0


def _betweenness_topological(network: CollabNetwork) -> np.ndarray:
    """All-sources Brandes via frontier expansion; sigma[s, v] counts paths."""
    n = network.n
    A = network.csr(weighted=False)
    sigma = np.eye(n)
    unvisited = ~np.eye(n, dtype=bool)
    frontier = np.eye(n, dtype=bool)
    frontiers = [frontier]
    while True:
        contrib = (A @ (sigma * frontier).T).T  # == (sigma*frontier) @ A, A symmetric
        new_frontier = (contrib > 0.0) & unvisited
        if not new_frontier.any():
            break
        sigma = np.where(new_frontier, contrib, sigma)
        unvisited &= ~new_frontier
        frontier = new_frontier
        frontiers.append(new_frontier)

    delta = np.zeros((n, n))
    safe_sigma = np.where(sigma == 0.0, 1.0, sigma)
    for level in range(len(frontiers) - 1, 0, -1):
        coeff = np.where(frontiers[level], (1.0 + delta) / safe_sigma, 0.0)
        spread = (A @ coeff.T).T
        delta += np.where(frontiers[level - 1], spread * sigma, 0.0)
    # delta[s, s] is never credited to the source itself
    totals = delta.sum(axis=0) - np.diag(delta)
    return totals / 2.0


def _weighted_adjacency_lists(network: CollabNetwork) -> list[list[tuple[int, float]]]:
    idx = network.index
    nbrs: list[list[tuple[int, float]]] = [[] for _ in range(network.n)]
    for (a, b), w in network.edges.items():
        if w <= 0:
            raise DataError(f"non-positive weight {w} on ({a}, {b})")
        d = 1.0 / w
        i, j = idx[a], idx[b]
        nbrs[i].append((j, d))
        nbrs[j].append((i, d))
    for lst in nbrs:
        lst.sort()
    return nbrs


def _betweenness_weighted(network: CollabNetwork, rel_tol: float = TIE_TOLERANCE) -> np.ndarray:
    n = network.n
    nbrs = _weighted_adjacency_lists(network)
    bc = np.zeros(n)
    inf = math.inf
    for s in range(n):
        finalized: list[int] = []
        done = [False] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0.0] * n
        sigma[s] = 1.0
        dist = [inf] * n
        dist[s] = 0.0
        heap = [(0.0, s)]
        while heap:
            d_u, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            finalized.append(u)
            for v, d_uv in nbrs[u]:
                if done[v]:
                    continue
                nd = d_u + d_uv
                cur = dist[v]
                tol = rel_tol * max(nd, cur if cur < inf else nd)
                if nd < cur - tol:
                    dist[v] = nd
                    sigma[v] = sigma[u]
                    preds[v] = [u]
                    heapq.heappush(heap, (nd, v))
                elif abs(nd - cur) <= tol:
                    sigma[v] += sigma[u]
                    preds[v].append(u)
        delta = [0.0] * n
        for w_node in reversed(finalized):
            coeff = (1.0 + delta[w_node]) / sigma[w_node]
            for v in preds[w_node]:
                delta[v] += sigma[v] * coeff
            if w_node != s:
                bc[w_node] += delta[w_node]
    return bc / 2.0


def betweenness(network: CollabNetwork, weighted: bool = False) -> CentralityVector:
    """Raw betweenness over unordered pairs; disconnected pairs contribute 0."""
    if network.n < 2:
        raise DataError(f"betweenness needs at least 2 nodes, got {network.n}")
    raw = _betweenness_weighted(network) if weighted else _betweenness_topological(network)
    scores = {node: float(raw[i]) for i, node in enumerate(network.nodes)}
    meta = {"weighted": weighted}
    if weighted:
        meta["tie_tolerance"] = TIE_TOLERANCE
    return CentralityVector("bcw" if weighted else "bc", scores, meta)


def normalize_bc(vector: CentralityVector, n: int) -> CentralityVector:
    """Divide raw betweenness by its maximum (n-1)(n-2)/2 in an n-node network."""
    if n < 3:
        raise DataError(f"normalized betweenness undefined for n={n}")
    divisor = (n - 1) * (n - 2) / 2.0
    scores = {node: v / divisor for node, v in vector.scores.items()}
    return CentralityVector(vector.metric + "_norm", scores, dict(vector.meta, divisor=divisor))


def degree_centrality(network: CollabNetwork) -> CentralityVector:
    """Share of possible partners actually connected, ignoring weights."""
    if network.n < 2:
        raise DataError(f"degree centrality needs at least 2 nodes, got {network.n}")
    denom = network.n - 1
    scores = {node: network.degree(node) / denom for node in network.nodes}
    return CentralityVector("deg_norm", scores)


def eigenvector_centrality(
    network: CollabNetwork,
    tolerance: float = 1e-10,
    max_iterations: int = 10_000,
) -> CentralityVector:
    """Principal eigenvector of the weighted adjacency, L2-normalized.

    Disconnected networks are scored on the largest component (ties broken
    by smallest member label) with the remaining nodes at 0 and a warning.
    Iteration runs on A + I so bipartite components cannot oscillate.
    """
    if network.n < 1:
        raise DataError("eigenvector centrality needs at least 1 node")
    comps = network.connected_components()
    if len(comps) > 1:
        comps.sort(key=lambda c: (-len(c), min(c)))
        warnings.warn(
            f"network has {len(comps)} components; eigenvector centrality computed "
            f"on the largest ({len(comps[0])} nodes), others scored 0",
            stacklevel=2,
        )
        sub = network.subgraph(comps[0])
        inner = eigenvector_centrality(sub, tolerance, max_iterations)
        scores = {node: inner.scores.get(node, 0.0) for node in network.nodes}
        return CentralityVector("ev", scores, inner.meta)

    n = network.n
    A = network.csr(weighted=True)
    x = np.full(n, 1.0 / math.sqrt(n))
    lam = 0.0
    residual = math.inf
    for _ in range(max_iterations):
        nxt = A @ x + x  # shift by identity: same eigenvectors, spectrum moved off +/- pairs
        x = nxt / np.linalg.norm(nxt)
        ax = A @ x
        lam = float(x @ ax)
        residual = float(np.max(np.abs(ax - lam * x)))
        if residual <= tolerance:
            break
    else:
        raise ConvergenceError(
            f"eigenvector centrality did not converge in {max_iterations} iterations "
            f"(residual {residual:.3e})",
            residual=residual,
        )
    scores = {node: float(x[i]) for i, node in enumerate(network.nodes)}
    return CentralityVector("ev", scores, {"eigenvalue": lam, "tolerance": tolerance})


def betweenness_centralization(network: CollabNetwork) -> float:
    """Freeman-style inequality of normalized betweenness: 1 on a star, 0 when uniform."""
    if network.n < 3:
        raise DataError(f"centralization needs at least 3 nodes, got {network.n}")
    bc_norm = normalize_bc(betweenness(network, weighted=False), network.n)
    vals = bc_norm.values()
    return float((vals.max() - vals).sum() / (network.n - 1))
