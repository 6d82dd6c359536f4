"""Shortest-path bridging: how often an intermediary sits inside a source's routes.

A target counts as bridged when the intermediary is an interior vertex of
at least one minimum-distance path from the source, detected through the
additivity test dist(s, via) + dist(via, t) == dist(s, t) under the shared
relative tie tolerance. A sigma-weighted variant apportions each target by
the share of co-minimal paths through the intermediary.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .centrality import TIE_TOLERANCE
from .errors import DataError
from .graph import CollabNetwork
from .timeseries import MetricSeries


@dataclass
class BridgingReport:
    source: str
    intermediary: str
    year: int | None
    fraction: float
    target_count: int
    mode: str = "any"


def shortest_path_info(network: CollabNetwork, source: str, rel_tol: float = TIE_TOLERANCE):
    """Single-source inverse-weight distances and co-minimal path counts."""
    if not network.has_node(source):
        raise DataError(f"unknown country {source}")
    idx = network.index
    n = network.n
    nbrs: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (a, b), w in network.edges.items():
        d = 1.0 / w
        i, j = idx[a], idx[b]
        nbrs[i].append((j, d))
        nbrs[j].append((i, d))
    s = idx[source]
    dist = [math.inf] * n
    sigma = [0.0] * n
    done = [False] * n
    dist[s] = 0.0
    sigma[s] = 1.0
    heap = [(0.0, s)]
    while heap:
        d_u, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, d_uv in nbrs[u]:
            if done[v]:
                continue
            nd = d_u + d_uv
            cur = dist[v]
            tol = rel_tol * max(nd, cur if cur < math.inf else nd)
            if nd < cur - tol:
                dist[v] = nd
                sigma[v] = sigma[u]
                heapq.heappush(heap, (nd, v))
            elif abs(nd - cur) <= tol:
                sigma[v] += sigma[u]
    names = network.nodes
    return (
        {names[i]: dist[i] for i in range(n)},
        {names[i]: sigma[i] for i in range(n)},
    )


def bridging_fraction(
    network: CollabNetwork,
    source: str,
    intermediary: str,
    mode: str = "any",
    rel_tol: float = TIE_TOLERANCE,
) -> BridgingReport:
    """Fraction of targets whose shortest paths from source pass through the intermediary.

    Unreachable targets count as not bridged. mode="sigma" replaces the 0/1
    interior test with the share of co-minimal paths through the intermediary.
    """
    if source == intermediary:
        raise DataError("source and intermediary must differ")
    if mode not in ("any", "sigma"):
        raise DataError(f"unknown bridging mode {mode!r}")
    for node in (source, intermediary):
        if not network.has_node(node):
            raise DataError(f"unknown country {node}")
    targets = [t for t in network.nodes if t not in (source, intermediary)]
    if not targets:
        raise DataError("network has no targets besides source and intermediary")

    dist_s, sigma_s = shortest_path_info(network, source, rel_tol)
    dist_v, sigma_v = shortest_path_info(network, intermediary, rel_tol)
    d_sv = dist_s[intermediary]

    total = 0.0
    for t in targets:
        d_st = dist_s[t]
        if not (math.isfinite(d_st) and math.isfinite(d_sv) and math.isfinite(dist_v[t])):
            continue
        through = d_sv + dist_v[t]
        if through <= d_st + rel_tol * max(through, d_st):
            if mode == "any":
                total += 1.0
            else:
                total += (sigma_s[intermediary] * sigma_v[t]) / sigma_s[t]
    return BridgingReport(source, intermediary, network.slice.year, total / len(targets), len(targets), mode)


def bridging_series(
    networks_by_year: dict[int, CollabNetwork],
    source: str,
    intermediary: str,
    mode: str = "any",
) -> MetricSeries:
    """One bridging fraction per year; absent countries produce missing markers."""
    if not networks_by_year:
        raise DataError("no networks supplied")
    pairs: list[tuple[int, float | None]] = []
    for year in sorted(networks_by_year):
        net = networks_by_year[year]
        if not (net.has_node(source) and net.has_node(intermediary)) or net.n < 3:
            pairs.append((year, None))
            continue
        pairs.append((year, bridging_fraction(net, source, intermediary, mode).fraction))
    return MetricSeries.from_pairs(f"bridge:{source}->{intermediary}", pairs, unit="share")
