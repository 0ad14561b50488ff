"""Vehicle-cluster infrastructure graphs.

A cluster is a directed graph of vehicle nodes, each with CPU/memory/sensing
capacities and a radio bandwidth budget; a designated Control Node (CN) acts
as the sink of every placed service. Link bandwidth is the minimum of the two
endpoints' radio budgets, in Kb/s.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


class TooSmall(ValueError):
    pass


UNREACHABLE = -1

RESOURCE_KEYS = ("cpu", "memory", "sensing")

# Node size classes: (cpu units, memory Mb, radio budget Kb/s). The published
# figures give the radio budget as "MB/s"; we normalize rates to Mb/s
# throughout, so 6 MB/s maps to 6000 Kb/s.
LARGE = (5.0, 500.0, 6000.0)
MEDIUM = (3.0, 250.0, 4000.0)
SMALL = (2.0, 100.0, 2000.0)

PROFILE_MIX = {
    "rich": (0.50, 0.25, 0.25),  # fractions of large / medium / small
    "poor": (0.25, 0.50, 0.25),
}

CN_ONE_HOP_FRACTION = 0.70  # CN must reach at least this share of nodes in one hop


@dataclass(frozen=True)
class NodeResources:
    cpu: float
    memory: float
    sensing: float

    def __post_init__(self):
        if self.cpu < 0 or self.memory < 0 or self.sensing < 0:
            raise ValueError("node resources must be non-negative")

    def get(self, key: str) -> float:
        return getattr(self, key)


@dataclass(frozen=True)
class ClusterNode:
    node_id: str
    resources: NodeResources
    radio_kbps: float


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    detail: str = ""
    used: float | None = None
    limit: float | None = None

    def __str__(self):
        s = f"{self.kind}@{self.where}"
        if self.detail:
            s += f": {self.detail}"
        if self.used is not None:
            s += f" (used {self.used:g}, limit {self.limit:g})"
        return s


@dataclass(frozen=True)
class ClusterGraph:
    nodes: tuple[ClusterNode, ...]
    links: tuple[tuple[str, str, float], ...]  # (src, dst, bandwidth Kb/s)
    cn_id: str

    def node_ids(self) -> list[str]:
        return [n.node_id for n in self.nodes]

    def node(self, node_id: str) -> ClusterNode:
        return self._by_id()[node_id]

    def _by_id(self) -> dict[str, ClusterNode]:
        d = getattr(self, "_cache_by_id", None)
        if d is None:
            d = {n.node_id: n for n in self.nodes}
            object.__setattr__(self, "_cache_by_id", d)
        return d

    def bandwidth(self) -> dict[tuple[str, str], float]:
        d = getattr(self, "_cache_bw", None)
        if d is None:
            d = {(a, b): bw for a, b, bw in self.links}
            object.__setattr__(self, "_cache_bw", d)
        return d

    def adjacency(self) -> dict[str, list[str]]:
        d = getattr(self, "_cache_adj", None)
        if d is None:
            d = {n.node_id: [] for n in self.nodes}
            for a, b, _ in self.links:
                d[a].append(b)
            for lst in d.values():
                lst.sort()
            object.__setattr__(self, "_cache_adj", d)
        return d


@dataclass(frozen=True)
class HopMatrix:
    node_ids: tuple[str, ...]
    dist: tuple[tuple[int, ...], ...]  # UNREACHABLE where no directed path

    def hops(self, src: str, dst: str) -> int:
        i = self.node_ids.index(src)
        j = self.node_ids.index(dst)
        return self.dist[i][j]


def _class_counts(n: int, mix: Sequence[float]) -> list[int]:
    # largest-remainder apportionment, ties resolved in class order
    quotas = [n * f for f in mix]
    counts = [int(q) for q in quotas]
    remainders = sorted(
        range(len(mix)), key=lambda i: (-(quotas[i] - counts[i]), i)
    )
    for i in remainders[: n - sum(counts)]:
        counts[i] += 1
    return counts


def generate_cluster(
    profile: str,
    n: int,
    link_density: float = 0.5,
    seed: int = 0,
    camera_fraction: float = 0.8,
) -> ClusterGraph:
    """Seeded random cluster with the given resource profile.

    Node sizes follow the profile mix with largest-remainder rounding; links
    are sampled as symmetric directed pairs at the requested density and then
    minimally augmented so every node can reach the CN. The CN is the first
    node (lowest id) reaching at least 70% of the others in one hop, falling
    back to the highest out-degree node.
    """
    if n < 3:
        raise TooSmall("cluster needs at least 3 nodes")
    if not 0.0 < link_density <= 1.0:
        raise ValueError("link_density must lie in (0, 1]")
    if profile not in PROFILE_MIX:
        raise ValueError(f"unknown profile {profile!r}")
    rng = random.Random(seed)
    counts = _class_counts(n, PROFILE_MIX[profile])
    specs = [LARGE] * counts[0] + [MEDIUM] * counts[1] + [SMALL] * counts[2]
    rng.shuffle(specs)
    n_cameras = max(1, round(camera_fraction * n))
    camera_nodes = set(rng.sample(range(n), n_cameras))
    width = len(str(n - 1))
    nodes = []
    for i, (cpu, mem, radio) in enumerate(specs):
        sensing = 1.0 if i in camera_nodes else 0.0
        nodes.append(ClusterNode(f"n{i:0{width}d}", NodeResources(cpu, mem, sensing), radio))

    by_id = {nd.node_id: nd for nd in nodes}
    ids = [nd.node_id for nd in nodes]
    pairs = [(a, b) for i, a in enumerate(ids) for b in ids[i + 1 :]]
    k = max(1, round(link_density * len(pairs)))
    chosen = set(rng.sample(pairs, min(k, len(pairs))))

    def link(a: str, b: str) -> tuple[str, str, float]:
        return (a, b, min(by_id[a].radio_kbps, by_id[b].radio_kbps))

    links: dict[tuple[str, str], tuple[str, str, float]] = {}
    for a, b in chosen:
        links[(a, b)] = link(a, b)
        links[(b, a)] = link(b, a)

    adj = {i: set() for i in ids}
    out_deg = {i: 0 for i in ids}
    for a, b in links:
        adj[a].add(b)
        out_deg[a] += 1
    cn_id = None
    need = CN_ONE_HOP_FRACTION * (n - 1)
    for i in ids:
        if len(adj[i]) >= need:
            cn_id = i
            break
    if cn_id is None:
        cn_id = max(ids, key=lambda i: (out_deg[i], ids.index(i) * -1))
        cn_id = min((i for i in ids if out_deg[i] == out_deg[cn_id]))

    # augment: connect any node that cannot reach the CN directly to it
    while True:
        reach = _reaches(ids, links, cn_id)
        stranded = [i for i in ids if i not in reach]
        if not stranded:
            break
        u = stranded[0]
        links[(u, cn_id)] = link(u, cn_id)
        links[(cn_id, u)] = link(cn_id, u)

    ordered = tuple(links[key] for key in sorted(links))
    return ClusterGraph(tuple(nodes), ordered, cn_id)


def _reaches(ids: Iterable[str], links: Mapping[tuple[str, str], object], target: str) -> set[str]:
    # nodes with a directed path to target: BFS on reversed edges
    rev: dict[str, list[str]] = {i: [] for i in ids}
    for a, b in links:
        rev[b].append(a)
    seen = {target}
    queue = deque([target])
    while queue:
        v = queue.popleft()
        for u in rev[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def hop_counts(g: ClusterGraph) -> HopMatrix:
    """All-pairs shortest hop distances over directed links (BFS per source)."""
    ids = tuple(g.node_ids())
    index = {i: k for k, i in enumerate(ids)}
    adj = g.adjacency()
    rows = []
    for src in ids:
        dist = [UNREACHABLE] * len(ids)
        dist[index[src]] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[index[v]] == UNREACHABLE:
                    dist[index[v]] = dist[index[u]] + 1
                    queue.append(v)
        rows.append(tuple(dist))
    return HopMatrix(ids, tuple(rows))


def validate(g: ClusterGraph) -> list[Violation]:
    """All invariant violations: self-links, bad bandwidth, CN reachability."""
    violations = []
    ids = set(g.node_ids())
    if g.cn_id not in ids:
        violations.append(Violation("UnknownCn", g.cn_id))
        return violations
    for a, b, bw in g.links:
        if a == b:
            violations.append(Violation("SelfLink", a))
        if bw <= 0:
            violations.append(Violation("NonPositiveBandwidth", f"{a}->{b}", used=bw, limit=0.0))
        if a not in ids or b not in ids:
            violations.append(Violation("UnknownEndpoint", f"{a}->{b}"))
    links = {(a, b): bw for a, b, bw in g.links}
    reach = _reaches(g.node_ids(), links, g.cn_id)
    for i in sorted(ids - reach):
        violations.append(Violation("CnUnreachable", i))
    return violations


def cluster_to_csv(g: ClusterGraph, ccp: Mapping[str, float] | None = None) -> tuple[list[str], list[str]]:
    """(nodes rows, links rows); node rows carry the CCP column for fixtures."""
    nodes = ["id,cpu,memory_mb,sensing,bandwidth_kbps,ccp"]
    for nd in g.nodes:
        c = ccp.get(nd.node_id, 1.0) if ccp else 1.0
        r = nd.resources
        nodes.append(
            f"{nd.node_id},{r.cpu:g},{r.memory:g},{r.sensing:g},{nd.radio_kbps:g},{c:.10g}"
        )
    links = ["src,dst,bandwidth_kbps"]
    for a, b, bw in g.links:
        links.append(f"{a},{b},{bw:g}")
    return nodes, links


def cluster_from_csv(
    node_rows: Iterable[str], link_rows: Iterable[str], cn_id: str
) -> tuple[ClusterGraph, dict[str, float]]:
    nodes, ccp = [], {}
    for i, line in enumerate(node_rows):
        line = line.strip()
        if not line or (i == 0 and line.startswith("id,")):
            continue
        nid, cpu, mem, sensing, radio, c = line.split(",")
        nodes.append(
            ClusterNode(nid, NodeResources(float(cpu), float(mem), float(sensing)), float(radio))
        )
        ccp[nid] = float(c)
    links = []
    for i, line in enumerate(link_rows):
        line = line.strip()
        if not line or (i == 0 and line.startswith("src,")):
            continue
        a, b, bw = line.split(",")
        links.append((a, b, float(bw)))
    return ClusterGraph(tuple(nodes), tuple(links), cn_id), ccp
