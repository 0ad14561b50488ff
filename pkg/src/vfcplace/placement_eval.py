"""Constraint checks and the bi-objective cost model for candidate placements.

A placement assigns every task instance to a cluster node and routes every
instance-graph edge along a directed node path. Feasibility covers node
resources, per-link bandwidth (host-adjacent and forwarded hops alike), TI
processing rates, flow conservation through the reduction factors, and chain
order. Costs weight resource ratios by how likely the involved nodes are to
leave the cluster: node cost sums (1-P(i)) * demand/capacity over placed TIs,
link cost sums (1-P_joint) * flow/bandwidth over every routed hop, and an
optional penalty charges routed hops whose joint cohesion falls below a
threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from .cluster import RESOURCE_KEYS, ClusterGraph, Violation
from .mobility import joint_ccp
from .service_model import SINK_ID, Workload

FLOW_TOLERANCE = 1e-9

JointFn = Callable[[float, float], float]


@dataclass(frozen=True)
class PlacementPlan:
    """TI -> node assignment plus one routed node path per instance edge.

    The sink pseudo-TI maps to the cluster's CN. A route starts at the
    upstream TI's host and ends at the downstream TI's host; collocated
    endpoints yield a single-node route that touches no link.
    """

    assignment: Mapping[str, str]
    routes: Mapping[tuple[str, str], tuple[str, ...]]

    def host(self, ti_id: str) -> str:
        return self.assignment[ti_id]


@dataclass(frozen=True)
class CostReport:
    node_cost: float
    link_cost: float
    penalty: float
    hop_objective: int
    total_cost: float
    violations: tuple[Violation, ...]
    per_node: dict[str, float] = field(default_factory=dict)
    per_link: dict[tuple[str, str], float] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return not self.violations


def validate_plan(plan: PlacementPlan, cluster: ClusterGraph, workload: Workload) -> list[Violation]:
    """Structural invariants: total assignment, CN mapping, merged units on a
    single node, and routes that follow existing directed links."""
    violations: list[Violation] = []
    nodes = set(cluster.node_ids())
    tis = workload.tis()
    for tid in tis:
        host = plan.assignment.get(tid)
        if host is None:
            violations.append(Violation("Unassigned", tid))
        elif host not in nodes:
            violations.append(Violation("UnknownNode", tid, detail=host))
    if plan.assignment.get(SINK_ID) != cluster.cn_id:
        violations.append(Violation("SinkNotOnCn", SINK_ID))
    for unit in workload.units:
        hosts = {plan.assignment.get(t) for t in unit.ti_ids}
        if len(hosts) > 1:
            violations.append(Violation("MergedUnitSplit", unit.unit_id))
    bw = cluster.bandwidth()
    for e in workload.edges():
        key = (e.src, e.dst)
        route = plan.routes.get(key)
        if route is None:
            violations.append(Violation("MissingRoute", f"{e.src}->{e.dst}"))
            continue
        src_host = plan.assignment.get(e.src)
        dst_host = plan.assignment.get(e.dst)
        if route[0] != src_host or route[-1] != dst_host:
            violations.append(Violation("RouteEndpointMismatch", f"{e.src}->{e.dst}"))
        for a, b in zip(route, route[1:]):
            if (a, b) not in bw:
                violations.append(
                    Violation("RouteUsesMissingLink", f"{e.src}->{e.dst}", detail=f"{a}->{b}")
                )
    return violations


def check_node_resources(
    plan: PlacementPlan, cluster: ClusterGraph, workload: Workload
) -> list[Violation]:
    """Per node and resource kind, placed demand must not exceed capacity.
    Merged units count their demand once."""
    used: dict[str, dict[str, float]] = {}
    for unit in workload.units:
        host = plan.assignment[unit.ti_ids[0]]
        acc = used.setdefault(host, {k: 0.0 for k in RESOURCE_KEYS})
        for k in RESOURCE_KEYS:
            acc[k] += unit.demand.get(k)
    violations = []
    for host in sorted(used):
        cap = cluster.node(host).resources
        for k in RESOURCE_KEYS:
            if used[host][k] > cap.get(k) + 1e-12:
                violations.append(
                    Violation("ResourceExceeded", host, detail=k, used=used[host][k], limit=cap.get(k))
                )
    return violations


def link_loads(plan: PlacementPlan, workload: Workload) -> dict[tuple[str, str], float]:
    loads: dict[tuple[str, str], float] = {}
    for e in workload.edges():
        route = plan.routes[(e.src, e.dst)]
        for a, b in zip(route, route[1:]):
            loads[(a, b)] = loads.get((a, b), 0.0) + e.flow
    return loads


def check_bandwidth(
    plan: PlacementPlan, cluster: ClusterGraph, workload: Workload
) -> list[Violation]:
    """Traffic routed over each directed link must fit its bandwidth; a
    single-hop route is the host-adjacent case, longer routes cover
    forwarding nodes."""
    bw = cluster.bandwidth()
    violations = []
    for (a, b), load in sorted(link_loads(plan, workload).items()):
        limit = bw.get((a, b), 0.0)
        if load > limit + 1e-9:
            violations.append(Violation("BandwidthExceeded", f"{a}->{b}", used=load, limit=limit))
    return violations


def check_flow_rate(plan: PlacementPlan, workload: Workload) -> list[Violation]:
    """Aggregate inflow of every processing TI must not exceed its rate."""
    violations = []
    for g in workload.graphs:
        inflows = g.inflows()
        for t in g.tis:
            if t.is_source:
                continue
            total = sum(inflows[t.ti_id])
            if total > t.processing_rate + 1e-9:
                violations.append(
                    Violation("FlowRateExceeded", t.ti_id, used=total, limit=t.processing_rate)
                )
    return violations


def check_flow_conservation(workload: Workload) -> list[Violation]:
    """Each TI's outflow must equal alpha times its aggregate inflow (sources
    emit the graph's source rate)."""
    violations = []
    for g in workload.graphs:
        inflows = g.inflows()
        for t in g.tis:
            expected = g.source_rate if t.is_source else t.alpha * sum(inflows[t.ti_id])
            actual = g.out_edge(t.ti_id).flow
            if abs(actual - expected) > FLOW_TOLERANCE:
                violations.append(
                    Violation("FlowConservation", t.ti_id, used=actual, limit=expected)
                )
    return violations


def check_task_order(plan: PlacementPlan, workload: Workload) -> list[Violation]:
    """Every edge must step one position down the chain, ending at the sink."""
    violations = []
    tis = workload.tis()
    for g in workload.graphs:
        last = max(t.type_index for t in g.tis)
        for e in g.edges:
            src = tis[e.src]
            if e.dst == SINK_ID:
                if src.type_index != last:
                    violations.append(
                        Violation("TaskOrder", f"{e.src}->{e.dst}", detail="non-final TI feeds sink")
                    )
            elif tis[e.dst].type_index != src.type_index + 1:
                violations.append(
                    Violation(
                        "TaskOrder",
                        f"{e.src}->{e.dst}",
                        detail=f"type {src.type_index} feeds type {tis[e.dst].type_index}",
                    )
                )
    return violations


def node_cost(
    plan: PlacementPlan,
    cluster: ClusterGraph,
    ccp: Mapping[str, float],
    workload: Workload,
) -> float:
    return _node_cost_detail(plan, cluster, ccp, workload)[0]


def _node_cost_detail(plan, cluster, ccp, workload):
    total = 0.0
    per_node: dict[str, float] = {}
    for unit in workload.units:
        host = plan.assignment[unit.ti_ids[0]]
        cap = cluster.node(host).resources
        ratio = 0.0
        for k in RESOURCE_KEYS:
            c = cap.get(k)
            if c > 0:
                ratio += unit.demand.get(k) / c
        contribution = (1.0 - ccp[host]) * ratio
        total += contribution
        per_node[host] = per_node.get(host, 0.0) + contribution
    return total, per_node


def link_cost(
    plan: PlacementPlan,
    cluster: ClusterGraph,
    ccp: Mapping[str, float],
    workload: Workload,
    joint: JointFn = joint_ccp,
) -> float:
    return _link_cost_detail(plan, cluster, ccp, workload, joint)[0]


def _link_cost_detail(plan, cluster, ccp, workload, joint):
    bw = cluster.bandwidth()
    total = 0.0
    per_link: dict[tuple[str, str], float] = {}
    for e in workload.edges():
        route = plan.routes[(e.src, e.dst)]
        for a, b in zip(route, route[1:]):
            term = (1.0 - joint(ccp[a], ccp[b])) * (e.flow / bw[(a, b)])
            total += term
            per_link[(a, b)] = per_link.get((a, b), 0.0) + term
    return total, per_link


def hop_objective(plan: PlacementPlan) -> int:
    """Total route length in hops across all instance edges."""
    return sum(len(route) - 1 for route in plan.routes.values())


def penalty(
    plan: PlacementPlan,
    ccp: Mapping[str, float],
    penalty_lambda: float,
    p_threshold: float,
    joint: JointFn = joint_ccp,
) -> float:
    """Charge every routed hop whose joint cohesion falls below the threshold.
    Pairs at or above the threshold contribute nothing."""
    if penalty_lambda == 0.0:
        return 0.0
    total = 0.0
    for route in plan.routes.values():
        for a, b in zip(route, route[1:]):
            j = joint(ccp[a], ccp[b])
            if j < p_threshold:
                total += penalty_lambda * (p_threshold - j)
    return total


def evaluate(
    plan: PlacementPlan,
    cluster: ClusterGraph,
    ccp: Mapping[str, float],
    workload: Workload,
    lambda1: float = 0.5,
    lambda2: float = 0.5,
    penalty_lambda: float = 0.0,
    p_threshold: float = 0.6,
    joint: JointFn = joint_ccp,
) -> CostReport:
    """Run every check and aggregate the weighted total cost.

    total = lambda1 * link_cost + lambda2 * node_cost, plus the penalty when
    enabled; the penalty is also reported on its own.
    """
    violations = list(validate_plan(plan, cluster, workload))
    structural_ok = not violations
    violations += check_node_resources(plan, cluster, workload)
    if structural_ok:
        violations += check_bandwidth(plan, cluster, workload)
    violations += check_flow_rate(plan, workload)
    violations += check_flow_conservation(workload)
    violations += check_task_order(plan, workload)
    nc, per_node = _node_cost_detail(plan, cluster, ccp, workload)
    if structural_ok:
        lc, per_link = _link_cost_detail(plan, cluster, ccp, workload, joint)
        pen = penalty(plan, ccp, penalty_lambda, p_threshold, joint)
        hops = hop_objective(plan)
    else:
        lc, per_link, pen, hops = 0.0, {}, 0.0, 0
    total = lambda1 * lc + lambda2 * nc + pen
    return CostReport(nc, lc, pen, hops, total, tuple(violations), per_node, per_link)
