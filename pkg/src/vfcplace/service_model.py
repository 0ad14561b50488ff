"""Service chains: type graphs, scaled instance graphs and app templates.

A service is a linear chain of task types; Type 1 is the camera/source stage
and the chain sinks at the cluster's Control Node. Scaling replicates each
type into task instances (TIs) wired as an in-tree: every TI forwards its
whole output to exactly one downstream TI, and each processing TI reduces its
aggregate inflow by the type's data reduction factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .cluster import NodeResources

SINK_ID = "CN"

PROCESSING_HEADROOM = 2.0  # a TI can absorb this many nominal single-source inflows


class UnknownTemplate(ValueError):
    pass


class OrphanTI(ValueError):
    pass


class BoundsViolation(ValueError):
    pass


class NotATree(ValueError):
    pass


@dataclass(frozen=True)
class TaskType:
    p: int                       # 1-based position in the chain
    demand: NodeResources
    alpha: float                 # data reduction factor, outflow = alpha * inflow
    processing_rate: float       # Kb/s of inflow one TI can process (sources: inf)
    instance_bounds: tuple[int, int]

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.p > 1 and self.processing_rate <= 0:
            raise ValueError("processing types need a positive processing_rate")
        lo, hi = self.instance_bounds
        if lo < 1 or hi < lo:
            raise ValueError("bad instance bounds")


@dataclass(frozen=True)
class TypeGraph:
    name: str
    chain: tuple[TaskType, ...]
    source_rate: float  # Kb/s emitted by each Type-1 TI

    def __post_init__(self):
        if len(self.chain) < 2:
            raise ValueError("chain needs at least two types")
        for i, t in enumerate(self.chain):
            if t.p != i + 1:
                raise ValueError("chain type indices must be consecutive from 1")
        if self.source_rate <= 0:
            raise ValueError("source_rate must be > 0")

    @property
    def type1_count(self) -> int:
        return self.chain[0].instance_bounds[0]


@dataclass(frozen=True)
class TI:
    ti_id: str
    type_index: int
    replica: int
    demand: NodeResources
    alpha: float
    processing_rate: float

    @property
    def is_source(self) -> bool:
        return self.type_index == 1


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str  # TI id or SINK_ID
    flow: float = 0.0


@dataclass(frozen=True)
class InstanceGraph:
    name: str
    tis: tuple[TI, ...]
    edges: tuple[Edge, ...]
    source_rate: float

    def ti(self, ti_id: str) -> TI:
        for t in self.tis:
            if t.ti_id == ti_id:
                return t
        raise KeyError(ti_id)

    def out_edge(self, ti_id: str) -> Edge:
        for e in self.edges:
            if e.src == ti_id:
                return e
        raise KeyError(ti_id)

    def inflows(self) -> dict[str, list[float]]:
        """Per-TI list of incoming edge flows (sinks excluded)."""
        incoming: dict[str, list[float]] = {t.ti_id: [] for t in self.tis}
        for e in self.edges:
            if e.dst != SINK_ID:
                incoming[e.dst].append(e.flow)
        return incoming

    def sink_inflow(self) -> float:
        return sum(e.flow for e in self.edges if e.dst == SINK_ID)


@dataclass(frozen=True)
class AppTemplate:
    name: str
    alphas: tuple[float, ...]            # per processing stage
    demands: tuple[tuple[float, float, float], ...]  # per stage incl. Type 1
    cumulative_reduction: float


# Application I: compute-intensive video analytics; data shrinks to 45% after
# the aggregation stage and to 20% of the original by the end of the chain.
# Application II: passive collection; only light pre-processing, 80% retained.
APP_TEMPLATES: dict[str, AppTemplate] = {
    "AppI": AppTemplate(
        "AppI",
        alphas=(0.45, 0.20 / 0.45),
        demands=((1.0, 50.0, 1.0), (1.5, 100.0, 0.0), (1.5, 100.0, 0.0)),
        cumulative_reduction=0.20,
    ),
    "AppII": AppTemplate(
        "AppII",
        alphas=(0.90, 0.80 / 0.90),
        demands=((1.0, 50.0, 1.0), (1.0, 50.0, 0.0), (1.0, 50.0, 0.0)),
        cumulative_reduction=0.80,
    ),
}


def build_template(
    name: str,
    type1_count: int,
    source_rate: float,
    nominal_rate: float | None = None,
    extra_stages: int = 0,
) -> TypeGraph:
    """Instantiate an application template as a TypeGraph.

    Processing capacity per TI is anchored to `nominal_rate` (defaults to the
    actual source rate): each TI absorbs PROCESSING_HEADROOM nominal
    single-source inflows before the flow-rate constraint forces scale-out.
    `extra_stages` appends pass-through stages (alpha=1) to lengthen the chain.
    """
    if name not in APP_TEMPLATES:
        raise UnknownTemplate(name)
    if not 1 <= type1_count <= 6:
        raise ValueError("type1_count must lie in [1, 6]")
    tmpl = APP_TEMPLATES[name]
    nominal = nominal_rate if nominal_rate is not None else source_rate
    chain = [
        TaskType(1, NodeResources(*tmpl.demands[0]), 1.0, math.inf, (type1_count, type1_count))
    ]
    cumulative = 1.0
    for i, alpha in enumerate(tmpl.alphas):
        rate = PROCESSING_HEADROOM * cumulative * nominal
        chain.append(
            TaskType(i + 2, NodeResources(*tmpl.demands[i + 1]), alpha, rate, (1, 6))
        )
        cumulative *= alpha
    for j in range(extra_stages):
        rate = PROCESSING_HEADROOM * cumulative * nominal
        chain.append(
            TaskType(len(chain) + 1, NodeResources(*tmpl.demands[-1]), 1.0, rate, (1, 6))
        )
    return TypeGraph(name, tuple(chain), source_rate)


def balanced_wiring(counts: Sequence[int]) -> dict[tuple[int, int], int]:
    """Contiguous round-robin wiring: upstream replicas split evenly downstream."""
    wiring = {}
    for stage, n_up in enumerate(counts[:-1]):
        n_down = counts[stage + 1]
        for j in range(n_up):
            wiring[(stage + 1, j)] = j * n_down // n_up
    return wiring


def scale_instances(
    tg: TypeGraph,
    counts: Sequence[int],
    wiring: Mapping[tuple[int, int], int],
) -> InstanceGraph:
    """Replicate the chain into an in-tree of TIs per the wiring.

    wiring maps (type index p, replica j) to the downstream replica index of
    type p+1; the last type always feeds the sink. Every downstream TI must
    receive at least one inflow.
    """
    if len(counts) != len(tg.chain):
        raise BoundsViolation(f"need {len(tg.chain)} counts, got {len(counts)}")
    for t, n in zip(tg.chain, counts):
        lo, hi = t.instance_bounds
        if not lo <= n <= hi:
            raise BoundsViolation(f"type {t.p} count {n} outside [{lo}, {hi}]")
    tis, edges = [], []
    for t, n in zip(tg.chain, counts):
        for j in range(n):
            tis.append(
                TI(f"{tg.name}.s{t.p}.{j}", t.p, j, t.demand, t.alpha, t.processing_rate)
            )
    last = len(tg.chain)
    fed: dict[tuple[int, int], int] = {}
    for t, n in zip(tg.chain, counts):
        for j in range(n):
            if t.p == last:
                dst = SINK_ID
            else:
                try:
                    target = wiring[(t.p, j)]
                except KeyError:
                    raise NotATree(f"no wiring for TI (type {t.p}, replica {j})") from None
                if not 0 <= target < counts[t.p]:
                    raise NotATree(f"wiring target {target} invalid for type {t.p + 1}")
                fed[(t.p + 1, target)] = fed.get((t.p + 1, target), 0) + 1
                dst = f"{tg.name}.s{t.p + 1}.{target}"
            edges.append(Edge(f"{tg.name}.s{t.p}.{j}", dst))
    for t, n in zip(tg.chain[1:], counts[1:]):
        for j in range(n):
            if fed.get((t.p, j), 0) == 0:
                raise OrphanTI(f"TI (type {t.p}, replica {j}) receives no inflow")
    return InstanceGraph(tg.name, tuple(tis), tuple(edges), tg.source_rate)


def flow_demands(ig: InstanceGraph, source_rate: float | None = None) -> InstanceGraph:
    """Propagate flows down the tree: sources emit the source rate and each
    processing TI emits alpha times the sum of its inflows."""
    rate = source_rate if source_rate is not None else ig.source_rate
    inflow: dict[str, float] = {t.ti_id: 0.0 for t in ig.tis}
    out: dict[str, float] = {}
    for t in sorted(ig.tis, key=lambda t: (t.type_index, t.replica)):
        total_in = inflow[t.ti_id]
        out[t.ti_id] = rate if t.is_source else t.alpha * total_in
        dst = ig.out_edge(t.ti_id).dst
        if dst != SINK_ID:
            inflow[dst] += out[t.ti_id]
    edges = tuple(replace(e, flow=out[e.src]) for e in ig.edges)
    return InstanceGraph(ig.name, ig.tis, edges, rate)


def min_feasible_counts(tg: TypeGraph) -> list[int]:
    """Smallest per-type replica counts satisfying the flow-rate constraint."""
    k = tg.type1_count
    counts = [k]
    total = k * tg.source_rate
    for t in tg.chain[1:]:
        lo, hi = t.instance_bounds
        n = max(lo, math.ceil(total / t.processing_rate - 1e-9))
        if n > hi:
            raise BoundsViolation(
                f"type {t.p} needs {n} instances, bounds allow at most {hi}"
            )
        counts.append(n)
        total *= t.alpha
    return counts


@dataclass(frozen=True)
class Unit:
    """One placement unit: a TI, or several merged TIs sharing demand."""

    unit_id: str
    ti_ids: tuple[str, ...]
    demand: NodeResources


@dataclass(frozen=True)
class Workload:
    """One or more instance graphs placed together on a cluster."""

    graphs: tuple[InstanceGraph, ...]
    units: tuple[Unit, ...]
    shared: bool = False

    def tis(self) -> dict[str, TI]:
        d = getattr(self, "_cache_tis", None)
        if d is None:
            d = {t.ti_id: t for g in self.graphs for t in g.tis}
            object.__setattr__(self, "_cache_tis", d)
        return d

    def edges(self) -> tuple[Edge, ...]:
        return tuple(e for g in self.graphs for e in g.edges)

    def unit_of(self, ti_id: str) -> Unit:
        d = getattr(self, "_cache_unit_of", None)
        if d is None:
            d = {tid: u for u in self.units for tid in u.ti_ids}
            object.__setattr__(self, "_cache_unit_of", d)
        return d[ti_id]


def single_workload(ig: InstanceGraph) -> Workload:
    units = tuple(Unit(t.ti_id, (t.ti_id,), t.demand) for t in ig.tis)
    return Workload((ig,), units)


def compose_multitenant(a: InstanceGraph, b: InstanceGraph, share: bool) -> Workload:
    """Place two application instance graphs on one cluster.

    With share=False the graphs are a disjoint union. With share=True, TIs of
    the same type whose demand vectors are identical are merged pairwise by
    replica index: the merged unit occupies one node and its demand is counted
    once, while each application keeps its own flow edges.
    """
    return compose([a, b], share)


def compose(graphs: Sequence[InstanceGraph], share: bool = False) -> Workload:
    if len({g.name for g in graphs}) != len(graphs):
        raise ValueError("instance graphs must have distinct names")
    merged: dict[str, list[TI]] = {}
    units: list[Unit] = []
    taken: set[str] = set()
    if share and len(graphs) > 1:
        base = graphs[0]
        for t in sorted(base.tis, key=lambda t: (t.type_index, t.replica)):
            group = [t]
            for other in graphs[1:]:
                match = next(
                    (
                        o
                        for o in other.tis
                        if o.type_index == t.type_index
                        and o.replica == t.replica
                        and o.demand == t.demand
                        and o.ti_id not in taken
                    ),
                    None,
                )
                if match is not None:
                    group.append(match)
            if len(group) > 1:
                ids = tuple(m.ti_id for m in group)
                taken.update(ids)
                units.append(Unit("+".join(ids), ids, t.demand))
    for g in graphs:
        for t in g.tis:
            if t.ti_id not in taken:
                units.append(Unit(t.ti_id, (t.ti_id,), t.demand))
    return Workload(tuple(graphs), tuple(units), share and len(graphs) > 1)


def canonical_signature(ig: InstanceGraph):
    """Isomorphism-invariant shape of an instance graph (types, demands,
    flows, and the unordered upstream structure of every TI)."""
    upstream: dict[str, list[str]] = {t.ti_id: [] for t in ig.tis}
    sink_feeders = []
    for e in ig.edges:
        if e.dst == SINK_ID:
            sink_feeders.append(e.src)
        else:
            upstream[e.dst].append(e.src)

    def sig(ti_id: str):
        t = ig.ti(ti_id)
        children = tuple(sorted(sig(u) for u in upstream[ti_id]))
        return (t.type_index, t.demand.cpu, t.demand.memory, t.demand.sensing,
                round(t.alpha, 12), round(ig.out_edge(ti_id).flow, 9), children)

    return tuple(sorted(sig(s) for s in sink_feeders))
