"""Cohesion and community structure: k-cores, clustering, efficiency, modularity.

Topology-only metrics (k-core, clustering, global efficiency) ignore edge
weights; community detection is greedy modularity maximization in the
Clauset-Newman-Moore style, merging whichever pair of communities raises Q
most and stopping when no merge helps. Merge ties within 1e-12 of the best
gain are broken by the lexicographically smallest combined member labels,
which pins the partition across runs and platforms.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .graph import CollabNetwork
from .paths import shortest_path_info

DQ_TIE_TOLERANCE = 1e-12


@dataclass
class CorePartition:
    """Core numbers plus the size and share of the maximum k-core."""

    core_number: dict[str, int]
    max_k: int
    kcore_nodes: int
    kcore_ratio: float


def k_core(network: CollabNetwork) -> CorePartition:
    """Iterative peeling; weights are ignored."""
    if network.n < 1:
        raise DataError("k-core needs at least 1 node")
    degrees = {v: network.degree(v) for v in network.nodes}
    heap: list[tuple[int, str]] = [(d, v) for v, d in degrees.items()]
    heapq.heapify(heap)
    core: dict[str, int] = {}
    k = 0
    while heap:
        d, v = heapq.heappop(heap)
        if v in core or d != degrees[v]:
            continue  # stale entry
        k = max(k, d)
        core[v] = k
        for u in network.adjacency[v]:
            if u not in core:
                degrees[u] -= 1
                heapq.heappush(heap, (degrees[u], u))
    max_k = max(core.values())
    members = sum(1 for v in core.values() if v == max_k)
    return CorePartition(core, max_k, members, members / network.n)


def max_core_subgraph(network: CollabNetwork) -> CollabNetwork:
    """Induced subgraph on the maximum k-core (used for within-core betweenness)."""
    part = k_core(network)
    keep = {v for v, c in part.core_number.items() if c == part.max_k}
    return network.subgraph(keep)


@dataclass
class ClusteringResult:
    per_node: dict[str, float]
    average: float


def clustering(network: CollabNetwork) -> ClusteringResult:
    """Local clustering coefficients; nodes of degree < 2 score 0."""
    if network.n < 1:
        raise DataError("clustering needs at least 1 node")
    adj_sets = {v: set(network.adjacency[v]) for v in network.nodes}
    per_node = {}
    for v in network.nodes:
        nbrs = adj_sets[v]
        d = len(nbrs)
        if d < 2:
            per_node[v] = 0.0
            continue
        closed = sum(len(nbrs & adj_sets[u]) for u in nbrs)  # counts each triangle twice
        per_node[v] = closed / (d * (d - 1))
    return ClusteringResult(per_node, sum(per_node.values()) / network.n)


def hop_distances(network: CollabNetwork) -> np.ndarray:
    """All-pairs hop counts by simultaneous frontier expansion (inf if unreachable)."""
    n = network.n
    A = network.csr(weighted=False)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    frontier = np.eye(n, dtype=bool)
    level = 0
    while frontier.any():
        level += 1
        reached = (A @ frontier.T.astype(np.float64)).T > 0.0
        frontier = reached & np.isinf(dist)
        dist[frontier] = level
    return dist


def global_efficiency(network: CollabNetwork, weighted: bool = False) -> float:
    """Mean inverse shortest-path distance over unordered pairs, 0 when disconnected.

    The default is hop-based; the weighted flag switches to inverse-weight
    distances for sensitivity analysis.
    """
    n = network.n
    if n < 2:
        raise DataError(f"global efficiency needs at least 2 nodes, got {n}")
    if weighted:
        total = 0.0
        for i, source in enumerate(network.nodes):
            dist, _ = shortest_path_info(network, source)
            for target in network.nodes[i + 1 :]:
                d = dist[target]
                if math.isfinite(d) and d > 0:
                    total += 1.0 / d
    else:
        dist = hop_distances(network)
        iu = np.triu_indices(n, k=1)
        vals = dist[iu]
        finite = np.isfinite(vals) & (vals > 0)
        total = float((1.0 / vals[finite]).sum())
    return total / (n * (n - 1) / 2.0)


@dataclass
class CommunityPartition:
    """Disjoint blocks covering the node set, with their modularity score."""

    blocks: list[tuple[str, ...]]
    q: float

    def __post_init__(self):
        self.blocks = sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0])

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self, node: str) -> int:
        for i, b in enumerate(self.blocks):
            if node in b:
                return i
        raise DataError(f"node {node} not covered by partition")


def modularity_score(network: CollabNetwork, partition, weighted: bool = True) -> float:
    """Q = sum over blocks of intra-weight/m - (block degree / 2m)^2."""
    blocks = [tuple(b) for b in partition]
    covered: set[str] = set()
    for b in blocks:
        overlap = covered & set(b)
        if overlap:
            raise DataError(f"partition blocks overlap on {sorted(overlap)}")
        covered |= set(b)
    missing = set(network.nodes) - covered
    if missing:
        raise DataError(f"partition misses nodes {sorted(missing)}")
    extra = covered - set(network.nodes)
    if extra:
        raise DataError(f"partition covers unknown nodes {sorted(extra)}")

    def w_of(w: float) -> float:
        return w if weighted else 1.0

    m = sum(w_of(w) for w in network.edges.values())
    if m == 0:
        return 0.0
    block_of = {node: i for i, b in enumerate(blocks) for node in b}
    intra = [0.0] * len(blocks)
    degree = [0.0] * len(blocks)
    for (a, b), w in network.edges.items():
        wv = w_of(w)
        degree[block_of[a]] += wv
        degree[block_of[b]] += wv
        if block_of[a] == block_of[b]:
            intra[block_of[a]] += wv
    return sum(e / m - (d / (2.0 * m)) ** 2 for e, d in zip(intra, degree))


def communities(network: CollabNetwork, weighted: bool = True) -> CommunityPartition:
    """Greedy modularity merging with the deterministic tie rule.

    Starts from singletons, repeatedly merges the community pair with the
    largest positive modularity gain, and returns the resulting partition
    with its Q. Gains within DQ_TIE_TOLERANCE of the best are tied and the
    smallest combined label wins.
    """
    if network.n < 1:
        raise DataError("community detection needs at least 1 node")

    def w_of(w: float) -> float:
        return w if weighted else 1.0

    m = sum(w_of(w) for w in network.edges.values())
    members: dict[int, tuple[str, ...]] = {i: (node,) for i, node in enumerate(network.nodes)}
    if m == 0:
        return CommunityPartition(list(members.values()), 0.0)

    comm_of = {node: i for i, node in enumerate(network.nodes)}
    degree: dict[int, float] = {i: 0.0 for i in members}
    between: dict[int, dict[int, float]] = {i: {} for i in members}
    for (a, b), w in network.edges.items():
        ca, cb = comm_of[a], comm_of[b]
        wv = w_of(w)
        degree[ca] += wv
        degree[cb] += wv
        between[ca][cb] = between[ca].get(cb, 0.0) + wv
        between[cb][ca] = between[cb].get(ca, 0.0) + wv

    stamp: dict[int, int] = {i: 0 for i in members}

    def gain(a: int, b: int) -> float:
        return between[a][b] / m - degree[a] * degree[b] / (2.0 * m * m)

    heap: list[tuple[float, tuple[str, ...], int, int, int, int]] = []

    def push(a: int, b: int) -> None:
        key = tuple(sorted(members[a] + members[b]))
        heapq.heappush(heap, (-gain(a, b), key, a, b, stamp[a], stamp[b]))

    for a in between:
        for b in between[a]:
            if a < b:
                push(a, b)

    def pop_valid():
        while heap:
            neg_dq, key, a, b, sa, sb = heapq.heappop(heap)
            if a in members and b in members and stamp[a] == sa and stamp[b] == sb:
                return -neg_dq, key, a, b
        return None

    while True:
        top = pop_valid()
        if top is None or top[0] <= 0.0:
            break
        # gather every valid candidate inside the tie window below the best gain
        best_dq = top[0]
        candidates = [top]
        while heap and -heap[0][0] >= best_dq - DQ_TIE_TOLERANCE:
            cand = pop_valid()
            if cand is None:
                break
            candidates.append(cand)
            if cand[0] < best_dq - DQ_TIE_TOLERANCE:
                break
        in_window = [c for c in candidates if c[0] >= best_dq - DQ_TIE_TOLERANCE]
        winner = min(in_window, key=lambda c: c[1])
        for cand in candidates:
            if cand is not winner:
                heapq.heappush(heap, (-cand[0], cand[1], cand[2], cand[3], stamp[cand[2]], stamp[cand[3]]))
        _, _, a, b = winner

        # merge b into a
        members[a] = tuple(sorted(members[a] + members[b]))
        degree[a] += degree[b]
        nbrs_b = between.pop(b)
        del members[b]
        del degree[b]
        stamp[a] += 1
        between[a].pop(b, None)
        for x, w in nbrs_b.items():
            if x == a:
                continue
            between[x].pop(b, None)
            between[a][x] = between[a].get(x, 0.0) + w
            between[x][a] = between[a][x]
        for x in between[a]:
            push(min(a, x), max(a, x))

    # re-evaluate Q from the formula so the score matches modularity_score exactly
    blocks = list(members.values())
    return CommunityPartition(blocks, modularity_score(network, blocks, weighted=weighted))


def ego_modularity(network: CollabNetwork, country: str, include_ego: bool = True, weighted: bool = True) -> float:
    """Q of the CNM partition of the country's ego network."""
    if not network.has_node(country):
        raise DataError(f"unknown country {country}")
    nodes = set(network.adjacency[country])
    if include_ego:
        nodes.add(country)
    if not nodes:
        return 0.0
    return communities(network.subgraph(nodes), weighted=weighted).q
