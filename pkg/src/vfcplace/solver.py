"""Placement solvers: exact hierarchical search, brute-force oracle, naive greedy.

The hierarchical solver jointly searches instance counts, wirings, TI
assignments and routes with a branch-and-bound that orders candidates
lexicographically by (total hop count, weighted total cost): the hop count is
minimized first, then cost among hop-optimal plans. The brute-force solver
enumerates the same space exhaustively through the public evaluator and acts
as a test oracle. The naive baseline greedily packs TIs onto the nodes with
the most remaining capacity, ignoring mobility entirely.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .cluster import RESOURCE_KEYS, ClusterGraph, hop_counts
from .mobility import joint_ccp
from .placement_eval import CostReport, PlacementPlan, check_flow_rate, evaluate
from .service_model import (
    SINK_ID,
    BoundsViolation,
    InstanceGraph,
    OrphanTI,
    TypeGraph,
    Workload,
    balanced_wiring,
    canonical_signature,
    compose,
    flow_demands,
    min_feasible_counts,
    scale_instances,
    single_workload,
)


class SpaceTooLarge(ValueError):
    pass


OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
TIMED_OUT = "timed_out"

_COST_EPS = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    lambda1: float = 0.5
    lambda2: float = 0.5
    penalty_lambda: float = 0.0
    p_threshold: float = 0.6
    time_limit_s: float | None = None
    max_nodes: int | None = None          # deterministic search budget
    max_instances: int = 6                # per-type replica cap
    count_slack: int = 0                  # extra replicas beyond the flow minimum
    share: bool = True                    # merge identical TIs across applications
    mode: str = "hierarchical"            # or "weighted_sum"
    hop_weight: float = 1.0               # only used by weighted_sum
    max_candidates: int = 10_000_000      # brute-force guard

    def __post_init__(self):
        if abs(self.lambda1 + self.lambda2 - 1.0) > 1e-12:
            raise ValueError("lambda1 + lambda2 must equal 1")
        if not 0.0 <= self.p_threshold <= 1.0:
            raise ValueError("p_threshold must lie in [0, 1]")
        if self.mode not in ("hierarchical", "weighted_sum"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class SolveResult:
    status: str
    plan: PlacementPlan | None
    report: CostReport | None
    instance_counts: tuple[tuple[int, ...], ...]
    elapsed_ms: float
    nodes_explored: int

    @property
    def feasible(self) -> bool:
        return self.status in (OPTIMAL, FEASIBLE)


class Router:
    """Minimum-hop routes; among equal-hop paths the one maximizing the
    minimum joint CCP along it, then the lexicographically smallest."""

    def __init__(self, cluster: ClusterGraph, ccp: Mapping[str, float], joint=joint_ccp):
        self.cluster = cluster
        self.ccp = ccp
        self.joint = joint
        self.hopm = hop_counts(cluster)
        self.adj = cluster.adjacency()
        self._cache: dict[tuple[str, str], tuple[str, ...] | None] = {}

    def route(self, a: str, b: str) -> tuple[str, ...] | None:
        if a == b:
            return (a,)
        key = (a, b)
        if key not in self._cache:
            self._cache[key] = self._compute(a, b)
        return self._cache[key]

    def _compute(self, a, b):
        total = self.hopm.hops(a, b)
        if total < 0:
            return None
        to_b = {u: self.hopm.hops(u, b) for u in self.cluster.node_ids()}
        from_a = {u: self.hopm.hops(a, u) for u in self.cluster.node_ids()}
        on_dag = [
            u
            for u in self.cluster.node_ids()
            if from_a[u] >= 0 and to_b[u] >= 0 and from_a[u] + to_b[u] == total
        ]
        # best (bottleneck, path) from u to b over the shortest-path DAG
        value: dict[str, tuple[float, tuple[str, ...]]] = {b: (math.inf, (b,))}
        for u in sorted(on_dag, key=lambda u: to_b[u]):
            if u == b:
                continue
            best = None
            for v in self.adj[u]:
                if v in value and to_b[v] == to_b[u] - 1:
                    bottleneck, path = value[v]
                    cand = (min(self.joint(self.ccp[u], self.ccp[v]), bottleneck), (u,) + path)
                    if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
                        best = cand
            if best is not None:
                value[u] = best
        return value[a][1]


@lru_cache(maxsize=512)
def _instance_graphs(tg: TypeGraph, max_instances: int, count_slack: int, dedupe: bool):
    """All flow-feasible scaled instance graphs of a template, smallest counts
    first. With dedupe, isomorphic wirings collapse to one representative."""
    try:
        mins = min_feasible_counts(tg)
    except BoundsViolation:
        return ()
    ranges = [[mins[0]]]
    for t, mn in zip(tg.chain[1:], mins[1:]):
        hi = max(mn, min(t.instance_bounds[1], max_instances, mn + count_slack))
        ranges.append(list(range(mn, hi + 1)))
    graphs, seen = [], set()
    for counts in itertools.product(*ranges):
        if any(counts[i + 1] > counts[i] for i in range(len(counts) - 1)):
            continue  # a downstream TI could never receive an inflow
        for wiring in _stage_wirings(counts):
            try:
                ig = flow_demands(scale_instances(tg, counts, wiring))
            except OrphanTI:
                continue
            if check_flow_rate(None, single_workload(ig)):
                continue
            if dedupe:
                sig = canonical_signature(ig)
                if sig in seen:
                    continue
                seen.add(sig)
            graphs.append(ig)
    return tuple(graphs)


def _stage_wirings(counts: Sequence[int]):
    per_stage = []
    for stage, n_up in enumerate(counts[:-1]):
        n_down = counts[stage + 1]
        maps = [
            m
            for m in itertools.product(range(n_down), repeat=n_up)
            if len(set(m)) == n_down
        ]
        per_stage.append((stage + 1, maps))
    for combo in itertools.product(*[maps for _, maps in per_stage]):
        wiring = {}
        for (p, _maps), m in zip(per_stage, combo):
            for j, target in enumerate(m):
                wiring[(p, j)] = target
        yield wiring


def _composites(templates: Sequence[TypeGraph], config: SolverConfig, dedupe: bool):
    lists = [
        _instance_graphs(tg, config.max_instances, config.count_slack, dedupe)
        for tg in templates
    ]
    if any(not lst for lst in lists):
        return []
    return [compose(list(gs), config.share) for gs in itertools.product(*lists)]


def _counts_of(workload: Workload) -> tuple[tuple[int, ...], ...]:
    out = []
    for g in workload.graphs:
        per_type: dict[int, int] = {}
        for t in g.tis:
            per_type[t.type_index] = per_type.get(t.type_index, 0) + 1
        out.append(tuple(per_type[p] for p in sorted(per_type)))
    return tuple(out)


def _build_plan(workload: Workload, hosts: Mapping[str, str], cn_id: str, router: Router):
    """Assignment plus routed edges; None when some edge has no path."""
    assignment = dict(hosts)
    assignment[SINK_ID] = cn_id
    routes = {}
    for e in workload.edges():
        route = router.route(assignment[e.src], assignment[e.dst])
        if route is None:
            return None
        routes[(e.src, e.dst)] = route
    return PlacementPlan(assignment, routes)


def _evaluate(plan, cluster, ccp, workload, config, joint):
    return evaluate(
        plan,
        cluster,
        ccp,
        workload,
        lambda1=config.lambda1,
        lambda2=config.lambda2,
        penalty_lambda=config.penalty_lambda,
        p_threshold=config.p_threshold,
        joint=joint,
    )


def _objective(report: CostReport, config: SolverConfig) -> tuple:
    if config.mode == "weighted_sum":
        return (config.hop_weight * report.hop_objective + report.total_cost,)
    return (report.hop_objective, report.total_cost)


def _lex_better(a: tuple, b: tuple) -> bool:
    if len(a) == 1:
        return a[0] < b[0] - _COST_EPS
    if a[0] != b[0]:
        return a[0] < b[0]
    return a[1] < b[1] - _COST_EPS


class _Budget:
    def __init__(self, config: SolverConfig):
        self.deadline = (
            time.monotonic() + config.time_limit_s if config.time_limit_s else None
        )
        self.max_nodes = config.max_nodes
        self.nodes = 0
        self.exhausted = False

    def tick(self) -> bool:
        self.nodes += 1
        if self.max_nodes is not None and self.nodes >= self.max_nodes:
            self.exhausted = True
        elif self.deadline is not None and self.nodes % 1024 == 0:
            if time.monotonic() > self.deadline:
                self.exhausted = True
        return self.exhausted


def solve_hierarchical(
    cluster: ClusterGraph,
    ccp: Mapping[str, float],
    templates: Sequence[TypeGraph],
    config: SolverConfig = SolverConfig(),
    joint=joint_ccp,
) -> SolveResult:
    """Exact lexicographic (hops, cost) optimum by branch-and-bound.

    Units are placed sink-first (last chain stage down to the sources), so
    every placement immediately routes the unit's outgoing edges and accrues
    their hops and cost; partial objectives are monotone, which makes the
    already-accrued value an admissible pruning bound. A per-unit minimum
    node-cost suffix tightens the cost bound. Ties on the objective keep the
    first solution in search order (nodes tried in id order).
    """
    start = time.monotonic()
    router = Router(cluster, ccp, joint)
    budget = _Budget(config)
    node_ids = sorted(cluster.node_ids())
    caps = {n: cluster.node(n).resources for n in node_ids}
    bw = cluster.bandwidth()

    incumbent_plan = None
    incumbent_workload = None
    incumbent_obj = None

    naive = solve_naive(cluster, ccp, templates, config, joint)
    if naive.feasible:
        incumbent_plan, incumbent_workload = naive.plan, naive._workload
        incumbent_obj = _objective(naive.report, config)

    weighted = config.mode == "weighted_sum"
    composites = _composites(templates, config, dedupe=True)
    for workload in composites:
        result = _search_workload(
            workload, cluster, ccp, router, config, joint, budget,
            node_ids, caps, bw, incumbent_obj, weighted,
        )
        if result is not None:
            obj, hosts = result
            plan = _build_plan(workload, hosts, cluster.cn_id, router)
            incumbent_plan, incumbent_workload, incumbent_obj = plan, workload, obj
        if budget.exhausted:
            break

    elapsed = (time.monotonic() - start) * 1000.0
    if incumbent_plan is None:
        status = TIMED_OUT if budget.exhausted else INFEASIBLE
        return SolveResult(status, None, None, (), elapsed, budget.nodes)
    report = _evaluate(incumbent_plan, cluster, ccp, incumbent_workload, config, joint)
    status = FEASIBLE if budget.exhausted else OPTIMAL
    result = SolveResult(
        status, incumbent_plan, report, _counts_of(incumbent_workload), elapsed, budget.nodes
    )
    object.__setattr__(result, "_workload", incumbent_workload)
    return result


def _order_units(workload: Workload):
    """Component-sequential placement order plus symmetry-breaking precedences.

    The composite (ignoring the sink) splits into weakly-connected chain
    components. Units are placed component by component, sources first: the
    sensing-constrained camera units commit early and every downstream
    placement sees its feeders' hosts. Each edge is routed once both of its
    endpoints are placed. Isomorphic components are interchangeable, so their
    leader hosts are forced into non-decreasing node order; the same applies
    to sibling units inside a component that share demand, stage and targets.
    """
    tis = workload.tis()
    edge_of = {e.src: e for e in workload.edges()}
    unit_by_ti = {t: u for u in workload.units for t in u.ti_ids}

    parent = {u.unit_id: u.unit_id for u in workload.units}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for e in workload.edges():
        if e.dst != SINK_ID:
            union(unit_by_ti[e.src].unit_id, unit_by_ti[e.dst].unit_id)

    comp_units: dict[str, list] = {}
    for u in workload.units:
        comp_units.setdefault(find(u.unit_id), []).append(u)

    def unit_sig(u):
        d = u.demand
        stage = max(tis[t].type_index for t in u.ti_ids)
        return (stage, d.cpu, d.memory, d.sensing,
                tuple(sorted(round(edge_of[t].flow, 9) for t in u.ti_ids)))

    def comp_sig(members):
        return tuple(sorted(unit_sig(u) for u in members))

    components = []
    for root in sorted(comp_units):
        members = sorted(
            comp_units[root],
            key=lambda u: (min(tis[t].type_index for t in u.ti_ids), u.unit_id),
        )
        components.append((comp_sig(members), members))

    ordered: list = []
    sym_pred: list[int | None] = []
    prev_leader_by_sig: dict = {}
    for sig, members in components:
        leader_pos = len(ordered)
        # sibling groups inside the component: same stage/demand/target set
        group_last: dict = {}
        for u in members:
            pos = len(ordered)
            targets = tuple(sorted(edge_of[t].dst for t in u.ti_ids))
            gkey = (unit_sig(u), targets)
            if pos == leader_pos:
                pred = prev_leader_by_sig.get(sig)
            else:
                pred = group_last.get(gkey)
            sym_pred.append(pred)
            group_last[gkey] = pos
            ordered.append(u)
        prev_leader_by_sig[sig] = leader_pos

    # each edge routes once both endpoints are placed: attach it to the later one
    position = {u.unit_id: i for i, u in enumerate(ordered)}
    route_at: list[list[tuple]] = [[] for _ in ordered]
    for e in workload.edges():
        src_pos = position[unit_by_ti[e.src].unit_id]
        if e.dst == SINK_ID:
            route_at[src_pos].append((e, True))
        else:
            dst_pos = position[unit_by_ti[e.dst].unit_id]
            if src_pos >= dst_pos:
                route_at[src_pos].append((e, True))
            else:
                route_at[dst_pos].append((e, False))
    return ordered, sym_pred, route_at


def _search_workload(
    workload, cluster, ccp, router, config, joint, budget,
    node_ids, caps, bw, incumbent_obj, weighted,
):
    """Branch-and-bound over unit assignments for one composite.

    Children are tried best-first on the incremental (hops, cost). Each
    unplaced unit carries an admissible lower bound on its eventual (hops,
    cost) contribution: at least its cheapest node-cost placement, tightened
    dynamically with the routed cost of edges whose other endpoint is already
    placed (capacity and load are relaxed, so the bound stays valid). The
    sums of these bounds prune both the hop plateau and the cost tail.
    Returns the best strictly improving (objective, hosts) or None.
    """
    units, sym_pred, route_at = _order_units(workload)
    lam1, lam2 = config.lambda1, config.lambda2
    pen_lam, thr = config.penalty_lambda, config.p_threshold
    n_units = len(units)

    fits = []  # nodes able to host each unit in isolation
    for u in units:
        ok = [
            n
            for n in node_ids
            if all(u.demand.get(k) <= caps[n].get(k) for k in RESOURCE_KEYS)
        ]
        if not ok:
            return None
        fits.append(ok)

    node_only_cost = []
    for u, ok in zip(units, fits):
        per_node = {}
        for n in ok:
            cap = caps[n]
            ratio = sum(
                u.demand.get(k) / cap.get(k) for k in RESOURCE_KEYS if cap.get(k) > 0
            )
            per_node[n] = lam2 * (1.0 - ccp[n]) * ratio
        node_only_cost.append(per_node)

    hosts: dict[str, str] = {SINK_ID: cluster.cn_id}
    host_at: list[str | None] = [None] * n_units
    used = {n: {k: 0.0 for k in RESOURCE_KEYS} for n in node_ids}
    load: dict[tuple[str, str], float] = {}

    def edge_route_cost(route, flow):
        h = len(route) - 1
        c = 0.0
        for a, b in zip(route, route[1:]):
            j = joint(ccp[a], ccp[b])
            c += lam1 * (1.0 - j) * (flow / bw[(a, b)])
            if pen_lam > 0.0 and j < thr:
                c += pen_lam * (thr - j)
        return h, c

    def unit_bound(i):
        """(min hops, min cost) for unit i over all nodes, counting only edges
        whose other endpoint is placed; ignores capacity usage (admissible)."""
        best_h, best_c = math.inf, math.inf
        for n in fits[i]:
            h = 0
            c = node_only_cost[i][n]
            dead = False
            for e, unit_is_src in route_at[i]:
                other = hosts.get(e.dst if unit_is_src else e.src)
                if other is None:
                    continue
                route = router.route(n, other) if unit_is_src else router.route(other, n)
                if route is None:
                    dead = True
                    break
                dh, dc = edge_route_cost(route, e.flow)
                h += dh
                c += dc
            if dead:
                continue
            if h < best_h:
                best_h = h
            if c < best_c:
                best_c = c
        if best_h is math.inf:
            return None
        return best_h, best_c

    lb_h = [0] * n_units
    lb_c = [0.0] * n_units
    for i in range(n_units):
        b = unit_bound(i)
        if b is None:
            return None
        lb_h[i], lb_c[i] = b
    total_h = sum(lb_h)
    total_c = sum(lb_c)

    # positions whose bound tightens when position d is placed: the consumers
    # of d's outgoing edges (they route those edges on their own placement)
    ti_pos = {t: i for i, u in enumerate(units) for t in u.ti_ids}
    consumers: list[list[int]] = [[] for _ in range(n_units)]
    for j in range(n_units):
        for e, unit_is_src in route_at[j]:
            if not unit_is_src:
                consumers[ti_pos[e.src]].append(j)
    for lst in consumers:
        lst.sort()

    best_obj = incumbent_obj
    best_hosts = None

    def bounded(hops_lb, cost_lb):
        if best_obj is None:
            return False
        if weighted:
            return config.hop_weight * hops_lb + cost_lb >= best_obj[0] - _COST_EPS
        if hops_lb > best_obj[0]:
            return True
        if hops_lb == best_obj[0] and cost_lb >= best_obj[1] - _COST_EPS:
            return True
        return False

    def try_node(unit, n, floor, depth):
        """Delta (hops, cost, touched loads) for placing unit on n, or None."""
        if floor is not None and n < floor:
            return None
        cap = caps[n]
        u = used[n]
        demand = unit.demand
        for k in RESOURCE_KEYS:
            if u[k] + demand.get(k) > cap.get(k) + 1e-12:
                return None
        d_cost = node_only_cost[depth][n]
        d_hops = 0
        touched: list[tuple[tuple[str, str], float]] = []
        for e, unit_is_src in route_at[depth]:
            a0 = n if unit_is_src else hosts[e.src]
            b0 = hosts[e.dst] if unit_is_src else n
            route = router.route(a0, b0)
            if route is None:
                for key, f in touched:
                    load[key] -= f
                return None
            d_hops += len(route) - 1
            for a, b in zip(route, route[1:]):
                key = (a, b)
                new_load = load.get(key, 0.0) + e.flow
                if new_load > bw[key] + 1e-9:
                    for k2, f2 in touched:
                        load[k2] -= f2
                    return None
                touched.append((key, e.flow))
                load[key] = new_load
                j = joint(ccp[a], ccp[b])
                d_cost += lam1 * (1.0 - j) * (e.flow / bw[key])
                if pen_lam > 0.0 and j < thr:
                    d_cost += pen_lam * (thr - j)
        for key, f in touched:
            load[key] -= f
        return d_hops, d_cost, touched

    def dfs(depth, hops, cost):
        nonlocal best_obj, best_hosts, total_h, total_c
        if budget.exhausted:
            return
        if depth == n_units:
            obj = (config.hop_weight * hops + cost,) if weighted else (hops, cost)
            if best_obj is None or _lex_better(obj, best_obj):
                best_obj = obj
                best_hosts = {t: n for t, n in hosts.items() if t != SINK_ID}
            return
        unit = units[depth]
        pred = sym_pred[depth]
        floor = host_at[pred] if pred is not None else None
        rest_h = total_h - lb_h[depth]
        rest_c = total_c - lb_c[depth]
        candidates = []
        for n in node_ids:
            if budget.tick():
                return
            step = try_node(unit, n, floor, depth)
            if step is None:
                continue
            d_hops, d_cost, touched = step
            if bounded(hops + d_hops + rest_h, cost + d_cost + rest_c):
                continue
            candidates.append((d_hops, d_cost, n, touched))
        candidates.sort(key=lambda c: (c[0], c[1], c[2]))
        demand = unit.demand
        for d_hops, d_cost, n, touched in candidates:
            if bounded(hops + d_hops + rest_h, cost + d_cost + rest_c):
                continue
            u = used[n]
            for k in RESOURCE_KEYS:
                u[k] += demand.get(k)
            for key, f in touched:
                load[key] = load.get(key, 0.0) + f
            for t in unit.ti_ids:
                hosts[t] = n
            host_at[depth] = n
            # retire this unit's bound and tighten its consumers'
            trail = [(depth, lb_h[depth], lb_c[depth])]
            total_h -= lb_h[depth]
            total_c -= lb_c[depth]
            lb_h[depth] = 0
            lb_c[depth] = 0.0
            dead = False
            for j in consumers[depth]:
                b = unit_bound(j)
                if b is None:
                    dead = True
                    break
                trail.append((j, lb_h[j], lb_c[j]))
                total_h += b[0] - lb_h[j]
                total_c += b[1] - lb_c[j]
                lb_h[j], lb_c[j] = b
            if not dead and not bounded(hops + d_hops + total_h, cost + d_cost + total_c):
                dfs(depth + 1, hops + d_hops, cost + d_cost)
            for j, h_old, c_old in reversed(trail):
                total_h += h_old - lb_h[j]
                total_c += c_old - lb_c[j]
                lb_h[j], lb_c[j] = h_old, c_old
            host_at[depth] = None
            for t in unit.ti_ids:
                del hosts[t]
            for key, f in touched:
                load[key] -= f
            for k in RESOURCE_KEYS:
                u[k] -= demand.get(k)
            if budget.exhausted:
                return

    dfs(0, 0, 0.0)
    if best_hosts is not None and (incumbent_obj is None or _lex_better(best_obj, incumbent_obj)):
        return best_obj, best_hosts
    return None


def solve_bruteforce(
    cluster: ClusterGraph,
    ccp: Mapping[str, float],
    templates: Sequence[TypeGraph],
    config: SolverConfig = SolverConfig(),
    joint=joint_ccp,
) -> SolveResult:
    """Exhaustive enumeration oracle: every instance graph, wiring and
    assignment, evaluated through the public evaluator, no pruning."""
    start = time.monotonic()
    composites = _composites(templates, config, dedupe=False)
    n = len(cluster.node_ids())
    candidates = sum(n ** len(w.units) for w in composites)
    if candidates > config.max_candidates:
        raise SpaceTooLarge(f"{candidates} candidates exceed cap {config.max_candidates}")
    router = Router(cluster, ccp, joint)
    node_ids = sorted(cluster.node_ids())
    best = None  # (objective, plan, report, workload)
    explored = 0
    for workload in composites:
        unit_ids = [u.unit_id for u in workload.units]
        ti_groups = [u.ti_ids for u in workload.units]
        for combo in itertools.product(node_ids, repeat=len(unit_ids)):
            explored += 1
            hosts = {}
            for ti_ids, node in zip(ti_groups, combo):
                for t in ti_ids:
                    hosts[t] = node
            plan = _build_plan(workload, hosts, cluster.cn_id, router)
            if plan is None:
                continue
            report = _evaluate(plan, cluster, ccp, workload, config, joint)
            if report.violations:
                continue
            obj = _objective(report, config)
            if best is None or _lex_better(obj, best[0]):
                best = (obj, plan, report, workload)
    elapsed = (time.monotonic() - start) * 1000.0
    if best is None:
        return SolveResult(INFEASIBLE, None, None, (), elapsed, explored)
    result = SolveResult(
        OPTIMAL, best[1], best[2], _counts_of(best[3]), elapsed, explored
    )
    object.__setattr__(result, "_workload", best[3])
    return result


def bruteforce_hop_range(
    cluster: ClusterGraph,
    ccp: Mapping[str, float],
    templates: Sequence[TypeGraph],
    config: SolverConfig = SolverConfig(),
    joint=joint_ccp,
) -> tuple[int, int] | None:
    """(best, worst) hop objective over every feasible candidate, or None."""
    composites = _composites(templates, config, dedupe=False)
    n = len(cluster.node_ids())
    candidates = sum(n ** len(w.units) for w in composites)
    if candidates > config.max_candidates:
        raise SpaceTooLarge(f"{candidates} candidates exceed cap {config.max_candidates}")
    router = Router(cluster, ccp, joint)
    node_ids = sorted(cluster.node_ids())
    best = worst = None
    for workload in composites:
        for combo in itertools.product(node_ids, repeat=len(workload.units)):
            hosts = {}
            for unit, node in zip(workload.units, combo):
                for t in unit.ti_ids:
                    hosts[t] = node
            plan = _build_plan(workload, hosts, cluster.cn_id, router)
            if plan is None:
                continue
            report = _evaluate(plan, cluster, ccp, workload, config, joint)
            if report.violations:
                continue
            h = report.hop_objective
            best = h if best is None else min(best, h)
            worst = h if worst is None else max(worst, h)
    return None if best is None else (best, worst)


def solve_naive(
    cluster: ClusterGraph,
    ccp: Mapping[str, float],
    templates: Sequence[TypeGraph],
    config: SolverConfig = SolverConfig(),
    joint=joint_ccp,
) -> SolveResult:
    """Greedy baseline: chain order, always the feasible node with the most
    remaining capacity (then most incident remaining bandwidth), mobility
    ignored; minimum instance counts with balanced wiring; no backtracking."""
    start = time.monotonic()
    graphs = []
    for tg in templates:
        try:
            counts = min_feasible_counts(tg)
        except BoundsViolation:
            return SolveResult(INFEASIBLE, None, None, (), 0.0, 0)
        graphs.append(flow_demands(scale_instances(tg, counts, balanced_wiring(counts))))
    workload = compose(graphs, config.share)
    tis = workload.tis()
    units = sorted(
        workload.units,
        key=lambda u: (min(tis[t].type_index for t in u.ti_ids), u.unit_id),
    )
    node_ids = sorted(cluster.node_ids())
    caps = {n: cluster.node(n).resources for n in node_ids}
    used = {n: {k: 0.0 for k in RESOURCE_KEYS} for n in node_ids}
    incident: dict[str, float] = {n: 0.0 for n in node_ids}
    for a, b, bw_ in cluster.links:
        incident[a] += bw_
        incident[b] += bw_
    hosts: dict[str, str] = {}
    explored = 0
    for unit in units:
        best_node, best_score = None, None
        for n in node_ids:
            explored += 1
            cap, u = caps[n], used[n]
            if any(u[k] + unit.demand.get(k) > cap.get(k) + 1e-12 for k in RESOURCE_KEYS):
                continue
            remaining = sum(
                (cap.get(k) - u[k] - unit.demand.get(k)) / cap.get(k)
                for k in RESOURCE_KEYS
                if cap.get(k) > 0
            )
            score = (remaining, incident[n])
            if best_score is None or score > best_score:
                best_node, best_score = n, score
        if best_node is None:
            return SolveResult(
                INFEASIBLE, None, None, (), (time.monotonic() - start) * 1000.0, explored
            )
        for k in RESOURCE_KEYS:
            used[best_node][k] += unit.demand.get(k)
        for t in unit.ti_ids:
            hosts[t] = best_node
    router = Router(cluster, ccp, joint)
    plan = _build_plan(workload, hosts, cluster.cn_id, router)
    if plan is None:
        return SolveResult(
            INFEASIBLE, None, None, (), (time.monotonic() - start) * 1000.0, explored
        )
    report = _evaluate(plan, cluster, ccp, workload, config, joint)
    elapsed = (time.monotonic() - start) * 1000.0
    if report.violations:  # greedy dead-end, e.g. a saturated link
        return SolveResult(INFEASIBLE, None, None, (), elapsed, explored)
    result = SolveResult(
        FEASIBLE, plan, report, _counts_of(workload), elapsed, explored
    )
    object.__setattr__(result, "_workload", workload)
    return result


SOLVERS: dict[str, Callable] = {
    "hierarchical": solve_hierarchical,
    "bruteforce": solve_bruteforce,
    "naive": solve_naive,
}


def compare(
    cluster: ClusterGraph,
    ccp: Mapping[str, float],
    templates: Sequence[TypeGraph],
    config: SolverConfig = SolverConfig(),
    solvers: Sequence[str] = ("hierarchical", "naive"),
    joint=joint_ccp,
) -> list[dict]:
    """Run the named solvers on identical inputs; one row per solver."""
    rows = []
    for name in solvers:
        res = SOLVERS[name](cluster, ccp, templates, config, joint)
        row = {
            "solver": name,
            "status": res.status,
            "node_cost": res.report.node_cost if res.report else None,
            "link_cost": res.report.link_cost if res.report else None,
            "penalty": res.report.penalty if res.report else None,
            "hops": res.report.hop_objective if res.report else None,
            "total": res.report.total_cost if res.report else None,
            "elapsed_ms": res.elapsed_ms,
        }
        rows.append(row)
    return rows
