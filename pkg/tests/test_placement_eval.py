import math
import random
from dataclasses import replace

import pytest

from vfcplace.cluster import ClusterGraph, ClusterNode, NodeResources
from vfcplace.placement_eval import (
    CostReport,
    PlacementPlan,
    check_bandwidth,
    check_flow_conservation,
    check_flow_rate,
    check_node_resources,
    check_task_order,
    evaluate,
    hop_objective,
    link_cost,
    node_cost,
    penalty,
    validate_plan,
)
from vfcplace.service_model import (
    Edge,
    InstanceGraph,
    TI,
    Workload,
    balanced_wiring,
    build_template,
    compose_multitenant,
    flow_demands,
    scale_instances,
    single_workload,
)


def make_cluster(caps, links, cn):
    """caps: {node_id: (cpu, mem, sensing, radio)}"""
    nodes = tuple(
        ClusterNode(nid, NodeResources(*c[:3]), c[3]) for nid, c in sorted(caps.items())
    )
    return ClusterGraph(nodes, tuple(links), cn)


def line_cluster(n=3, cpu=10, mem=1000, sensing=1, bw=1000.0):
    caps = {f"n{i}": (cpu, mem, sensing, bw) for i in range(n)}
    links = []
    for i in range(n - 1):
        links.append((f"n{i}", f"n{i+1}", bw))
        links.append((f"n{i+1}", f"n{i}", bw))
    return make_cluster(caps, links, f"n{n-1}")


def chain_workload(name="AppI", k=1, rate=100.0):
    tg = build_template(name, k, rate)
    counts = [k, 1, 1]
    ig = flow_demands(scale_instances(tg, counts, balanced_wiring(counts)))
    return single_workload(ig)


def chain_plan(workload, hosts, cn):
    """Place the linear chain s1.0 -> s2.0 -> s3.0 on the given hosts and
    route every edge along the line cluster."""
    g = workload.graphs[0]
    name = g.name
    assignment = {
        f"{name}.s1.0": hosts[0],
        f"{name}.s2.0": hosts[1],
        f"{name}.s3.0": hosts[2],
        "CN": cn,
    }
    routes = {}
    order = [f"n{i}" for i in range(10)]

    def path(a, b):
        ia, ib = order.index(a), order.index(b)
        step = 1 if ib >= ia else -1
        return tuple(order[i] for i in range(ia, ib + step, step)) if ia != ib else (a,)

    for e in g.edges:
        routes[(e.src, e.dst)] = path(assignment[e.src], assignment.get(e.dst, cn))
    return PlacementPlan(assignment, routes)


# ---------------------------------------------------------------- node resources


def test_node_resources_boundary_ok():
    cluster = make_cluster({"a": (2, 1000, 1, 100), "b": (9, 1000, 0, 100)},
                           [("a", "b", 100.0), ("b", "a", 100.0)], "b")
    w = chain_workload("AppII")  # every TI demands 1 cpu
    plan = PlacementPlan(
        {"AppII.s1.0": "a", "AppII.s2.0": "a", "AppII.s3.0": "b", "CN": "b"},
        {
            ("AppII.s1.0", "AppII.s2.0"): ("a",),
            ("AppII.s2.0", "AppII.s3.0"): ("a", "b"),
            ("AppII.s3.0", "CN"): ("b",),
        },
    )
    assert check_node_resources(plan, cluster, w) == []


def test_node_resources_overflow():
    cluster = make_cluster({"a": (2, 100, 1, 100), "b": (9, 1000, 0, 100)},
                           [("a", "b", 100.0), ("b", "a", 100.0)], "b")
    w = chain_workload("AppI")  # s2/s3 demand 1.5 cpu each -> 4 cpu total on "a"
    plan = PlacementPlan(
        {"AppI.s1.0": "a", "AppI.s2.0": "a", "AppI.s3.0": "a", "CN": "b"},
        {
            ("AppI.s1.0", "AppI.s2.0"): ("a",),
            ("AppI.s2.0", "AppI.s3.0"): ("a",),
            ("AppI.s3.0", "CN"): ("a", "b"),
        },
    )
    violations = check_node_resources(plan, cluster, w)
    assert any(v.kind == "ResourceExceeded" and v.where == "a" for v in violations)


def test_node_resources_matches_brute_accounting():
    rng = random.Random(5)
    tg = build_template("AppI", 3, 100.0)
    wiring = {(1, 0): 0, (1, 1): 0, (1, 2): 1, (2, 0): 0, (2, 1): 0}
    w = single_workload(flow_demands(scale_instances(tg, [3, 2, 1], wiring)))
    cluster = line_cluster(n=6, cpu=8, mem=800, sensing=1, bw=5000)
    hosts = {t: f"n{rng.randrange(6)}" for t in w.tis()}
    plan = PlacementPlan(
        {**hosts, "CN": "n5"},
        {(e.src, e.dst): (hosts[e.src],) if hosts[e.src] == hosts.get(e.dst, "n5")
         else (hosts[e.src], hosts.get(e.dst, "n5"))
         for e in w.edges()},
    )
    got = check_node_resources(plan, cluster, w)
    # oracle: straight per-node sums
    expect = []
    for nid in cluster.node_ids():
        for key, cap in (("cpu", 8), ("memory", 800), ("sensing", 1)):
            used = sum(u.demand.get(key) for u in w.units if hosts[u.ti_ids[0]] == nid)
            if used > cap:
                expect.append((nid, key))
    assert [(v.where, v.detail) for v in got] == expect


# ---------------------------------------------------------------- bandwidth


def test_bandwidth_boundary_ok():
    cluster = line_cluster(bw=100.0)
    w = chain_workload("AppI", rate=100.0)
    plan = chain_plan(w, ["n0", "n1", "n1"], "n2")
    # s1->s2 carries exactly 100 over n0->n1
    assert check_bandwidth(plan, cluster, w) == []


def test_bandwidth_overflow_accumulates():
    cluster = line_cluster(bw=100.0)
    tg = build_template("AppI", 2, 100.0)
    # both sources on n0 feed an aggregator on n1: 200 over a 100-capacity link
    counts = [2, 1, 1]
    w = single_workload(flow_demands(scale_instances(tg, counts, balanced_wiring(counts))))
    plan = PlacementPlan(
        {"AppI.s1.0": "n0", "AppI.s1.1": "n0", "AppI.s2.0": "n1", "AppI.s3.0": "n1", "CN": "n2"},
        {
            ("AppI.s1.0", "AppI.s2.0"): ("n0", "n1"),
            ("AppI.s1.1", "AppI.s2.0"): ("n0", "n1"),
            ("AppI.s2.0", "AppI.s3.0"): ("n1",),
            ("AppI.s3.0", "CN"): ("n1", "n2"),
        },
    )
    violations = check_bandwidth(plan, cluster, w)
    assert len(violations) == 1
    assert violations[0].used == pytest.approx(200.0)


def test_bandwidth_matches_per_link_oracle():
    rng = random.Random(9)
    cluster = line_cluster(n=8, bw=120.0)
    tg = build_template("AppII", 3, 100.0)
    wiring = {(1, 0): 0, (1, 1): 1, (1, 2): 1, (2, 0): 0, (2, 1): 0}
    w = single_workload(flow_demands(scale_instances(tg, [3, 2, 1], wiring)))
    hosts = {t: f"n{rng.randrange(8)}" for t in w.tis()}
    order = [f"n{i}" for i in range(8)]

    def path(a, b):
        ia, ib = order.index(a), order.index(b)
        if ia == ib:
            return (a,)
        step = 1 if ib > ia else -1
        return tuple(order[i] for i in range(ia, ib + step, step))

    plan = PlacementPlan(
        {**hosts, "CN": "n7"},
        {(e.src, e.dst): path(hosts[e.src], hosts.get(e.dst, "n7")) for e in w.edges()},
    )
    got = {(v.where, v.used) for v in check_bandwidth(plan, cluster, w)}
    loads = {}
    for e in w.edges():
        p = plan.routes[(e.src, e.dst)]
        for a, b in zip(p, p[1:]):
            loads[(a, b)] = loads.get((a, b), 0.0) + e.flow
    expect = {(f"{a}->{b}", load) for (a, b), load in loads.items() if load > 120.0}
    assert got == expect


# ---------------------------------------------------------------- flow rate / conservation / order


def test_flow_rate_boundary():
    tg = build_template("AppI", 2, 100.0)  # s2 rate = 200, takes both sources
    counts = [2, 1, 1]
    w = single_workload(flow_demands(scale_instances(tg, counts, balanced_wiring(counts))))
    assert check_flow_rate(None, w) == []


def test_flow_rate_violation():
    tg = build_template("AppI", 3, 100.0)
    wiring = {(1, 0): 0, (1, 1): 0, (1, 2): 0, (2, 0): 0}  # 300 into one s2 rated 200
    w = single_workload(flow_demands(scale_instances(tg, [3, 1, 1], wiring)))
    violations = check_flow_rate(None, w)
    s2 = [v for v in violations if v.where == "AppI.s2.0"]
    assert len(s2) == 1 and s2[0].used == pytest.approx(300.0)


def test_flow_conservation_cascade():
    tg = build_template("AppI", 2, 100.0)
    counts = [2, 1, 1]
    w = single_workload(flow_demands(scale_instances(tg, counts, balanced_wiring(counts))))
    assert check_flow_conservation(w) == []
    # corrupt one edge flow
    g = w.graphs[0]
    bad_edges = tuple(
        replace(e, flow=999.0) if e.src == "AppI.s2.0" else e for e in g.edges
    )
    bad = Workload((InstanceGraph(g.name, g.tis, bad_edges, g.source_rate),), w.units)
    violations = check_flow_conservation(bad)
    assert any(v.where == "AppI.s2.0" for v in violations)


def test_task_order():
    w = chain_workload("AppI")
    plan = chain_plan(w, ["n0", "n1", "n2"], "n2")
    assert check_task_order(plan, w) == []
    # fabricate a type-2 -> type-2 edge
    g = w.graphs[0]
    bad_edges = tuple(
        Edge(e.src, "AppI.s2.0", e.flow) if e.src == "AppI.s2.0" else e for e in g.edges
    )
    bad = Workload((InstanceGraph(g.name, g.tis, bad_edges, g.source_rate),), w.units)
    violations = check_task_order(plan, bad)
    assert any(v.kind == "TaskOrder" for v in violations)


# ---------------------------------------------------------------- costs


def test_node_cost_perfect_cohesion_is_free():
    cluster = line_cluster()
    w = chain_workload("AppII")
    plan = chain_plan(w, ["n0", "n1", "n2"], "n2")
    ccp = {nid: 1.0 for nid in cluster.node_ids()}
    assert node_cost(plan, cluster, ccp, w) == 0.0


def test_node_cost_single_ratio():
    # one TI demanding 2 cpu on a 5-cpu node with no other capacities
    cluster = make_cluster({"a": (5, 0, 0, 100), "b": (5, 0, 0, 100)},
                           [("a", "b", 100.0), ("b", "a", 100.0)], "b")
    ti = TI("X.s1.0", 1, 0, NodeResources(2, 0, 0), 1.0, math.inf)
    g = InstanceGraph("X", (ti,), (Edge("X.s1.0", "CN", 7.0),), 7.0)
    w = single_workload(g)
    plan = PlacementPlan({"X.s1.0": "a", "CN": "b"}, {("X.s1.0", "CN"): ("a", "b")})
    ccp = {"a": 0.5, "b": 0.9}
    assert node_cost(plan, cluster, ccp, w) == pytest.approx(0.5 * 0.4)


def test_node_cost_matches_brute_oracle():
    rng = random.Random(21)
    cluster = line_cluster(n=6, cpu=8, mem=800, sensing=1, bw=5000)
    tg = build_template("AppI", 3, 100.0)
    wiring = {(1, 0): 0, (1, 1): 0, (1, 2): 1, (2, 0): 0, (2, 1): 0}
    w = single_workload(flow_demands(scale_instances(tg, [3, 2, 1], wiring)))
    ccp = {nid: rng.uniform(0.4, 0.8) for nid in cluster.node_ids()}
    hosts = {t: f"n{rng.randrange(6)}" for t in w.tis()}
    plan = PlacementPlan(
        {**hosts, "CN": "n5"},
        {(e.src, e.dst): (hosts[e.src],) if hosts[e.src] == hosts.get(e.dst, "n5")
         else (hosts[e.src], hosts.get(e.dst, "n5")) for e in w.edges()},
    )
    expect = 0.0
    for u in w.units:
        host = hosts[u.ti_ids[0]]
        cap = cluster.node(host).resources
        s = sum(u.demand.get(k) / cap.get(k) for k in ("cpu", "memory", "sensing") if cap.get(k) > 0)
        expect += (1 - ccp[host]) * s
    assert node_cost(plan, cluster, ccp, w) == pytest.approx(expect, abs=1e-9)


def test_link_cost_values():
    cluster = line_cluster(bw=100.0)
    w = chain_workload("AppI", rate=100.0)
    ccp_perfect = {nid: 1.0 for nid in cluster.node_ids()}
    plan = chain_plan(w, ["n0", "n1", "n1"], "n2")
    assert link_cost(plan, cluster, ccp_perfect, w) == 0.0
    # single hop with joint 0.5 carrying half the link: 0.5 * 0.5
    cluster2 = line_cluster(bw=200.0)
    ccp = {"n0": 1.0, "n1": 0.5, "n2": 1.0}
    plan2 = chain_plan(w, ["n0", "n1", "n1"], "n1")
    w_flow = w.graphs[0].out_edge("AppI.s1.0").flow  # 100
    got = link_cost(plan2, cluster2, ccp, w)
    assert got == pytest.approx((1 - 0.5) * (w_flow / 200.0))


def test_link_cost_two_hop_route_sums_both():
    cluster = line_cluster(bw=100.0)
    w = chain_workload("AppI", rate=50.0)
    plan = chain_plan(w, ["n0", "n2", "n2"], "n2")  # s1->s2 routed n0-n1-n2
    ccp = {"n0": 0.9, "n1": 0.6, "n2": 0.8}
    expect = (1 - 0.9 * 0.6) * 50 / 100 + (1 - 0.6 * 0.8) * 50 / 100
    assert link_cost(plan, cluster, ccp, w) == pytest.approx(expect)


def test_hop_objective():
    w = chain_workload("AppI")
    # three edges, each routed over exactly one hop toward the CN
    plan3 = chain_plan(w, ["n0", "n1", "n2"], "n3")
    assert hop_objective(plan3) == 3
    assert hop_objective(chain_plan(w, ["n2", "n2", "n2"], "n2")) == 0
    plan = chain_plan(w, ["n0", "n2", "n2"], "n2")
    assert hop_objective(plan) == 2  # BFS path n0..n2 plus two collocations


def test_penalty_values():
    w = chain_workload("AppI")
    plan = chain_plan(w, ["n0", "n1", "n1"], "n1")  # one routed hop n0->n1
    ccp_boundary = {"n0": 1.0, "n1": 0.6, "n2": 1.0}
    assert penalty(plan, ccp_boundary, 10.0, 0.6) == 0.0
    ccp_low = {"n0": 1.0, "n1": 0.4, "n2": 1.0}
    assert penalty(plan, ccp_low, 10.0, 0.6) == pytest.approx(2.0)
    assert penalty(plan, ccp_low, 0.0, 0.6) == 0.0


# ---------------------------------------------------------------- evaluate


def test_evaluate_aggregates_and_weights():
    cluster = line_cluster(bw=400.0)
    w = chain_workload("AppI", rate=100.0)
    plan = chain_plan(w, ["n0", "n1", "n2"], "n2")
    ccp = {"n0": 0.7, "n1": 0.5, "n2": 0.6}
    rep = evaluate(plan, cluster, ccp, w)
    assert rep.feasible
    nc = node_cost(plan, cluster, ccp, w)
    lc = link_cost(plan, cluster, ccp, w)
    assert rep.total_cost == pytest.approx(0.5 * nc + 0.5 * lc, abs=1e-12)
    only_node = evaluate(plan, cluster, ccp, w, lambda1=0.0, lambda2=1.0)
    assert only_node.total_cost == pytest.approx(nc)


def test_evaluate_lists_violations():
    cluster = make_cluster({"a": (1, 10, 0, 10), "b": (1, 10, 0, 10)},
                           [("a", "b", 10.0), ("b", "a", 10.0)], "b")
    w = chain_workload("AppI", rate=100.0)  # demands exceed everything
    plan = PlacementPlan(
        {"AppI.s1.0": "a", "AppI.s2.0": "a", "AppI.s3.0": "b", "CN": "b"},
        {
            ("AppI.s1.0", "AppI.s2.0"): ("a",),
            ("AppI.s2.0", "AppI.s3.0"): ("a", "b"),
            ("AppI.s3.0", "CN"): ("b",),
        },
    )
    rep = evaluate(plan, cluster, ccp={"a": 0.5, "b": 0.5}, workload=w)
    kinds = {v.kind for v in rep.violations}
    assert "ResourceExceeded" in kinds and "BandwidthExceeded" in kinds
    assert not rep.feasible


def test_evaluate_pure():
    cluster = line_cluster(bw=400.0)
    w = chain_workload("AppI")
    plan = chain_plan(w, ["n0", "n1", "n2"], "n2")
    ccp = {"n0": 0.7, "n1": 0.5, "n2": 0.6}
    a = evaluate(plan, cluster, ccp, w)
    b = evaluate(plan, cluster, ccp, w)
    assert a == b


def test_costs_monotone_in_ccp():
    cluster = line_cluster(bw=400.0)
    w = chain_workload("AppI")
    plan = chain_plan(w, ["n0", "n1", "n2"], "n2")
    base = {"n0": 0.5, "n1": 0.5, "n2": 0.5}
    for nid in base:
        raised = {**base, nid: 0.7}
        assert node_cost(plan, cluster, raised, w) <= node_cost(plan, cluster, base, w)
        assert link_cost(plan, cluster, raised, w) <= link_cost(plan, cluster, base, w)


def test_costs_scale_inverse_with_capacity():
    w = chain_workload("AppI")
    ccp = {"n0": 0.7, "n1": 0.5, "n2": 0.6}
    c = 3.0
    base = line_cluster(cpu=10, mem=1000, sensing=1, bw=400.0)
    plan = chain_plan(w, ["n0", "n1", "n2"], "n2")
    nc1, lc1 = node_cost(plan, base, ccp, w), link_cost(plan, base, ccp, w)
    scaled = line_cluster(cpu=10 * c, mem=1000 * c, sensing=1 * c, bw=400.0 * c)
    nc2, lc2 = node_cost(plan, scaled, ccp, w), link_cost(plan, scaled, ccp, w)
    assert nc2 == pytest.approx(nc1 / c, rel=1e-9)
    assert lc2 == pytest.approx(lc1 / c, rel=1e-9)


def test_merged_unit_demand_counted_once():
    # 4-node fixture: merged camera demand must appear once in the accounting
    a = flow_demands(scale_instances(build_template("AppI", 1, 100.0), [1, 1, 1], balanced_wiring([1, 1, 1])))
    b = flow_demands(scale_instances(build_template("AppII", 1, 100.0), [1, 1, 1], balanced_wiring([1, 1, 1])))
    shared = compose_multitenant(a, b, share=True)
    separate = compose_multitenant(a, b, share=False)
    caps = {f"n{i}": (10, 1000, 1, 1000.0) for i in range(4)}
    links = []
    for i in range(4):
        for j in range(4):
            if i != j:
                links.append((f"n{i}", f"n{j}", 1000.0))
    cluster = make_cluster(caps, links, "n3")
    assignment = {
        "AppI.s1.0": "n0", "AppII.s1.0": "n0",
        "AppI.s2.0": "n1", "AppII.s2.0": "n1",
        "AppI.s3.0": "n2", "AppII.s3.0": "n2",
        "CN": "n3",
    }
    routes = {}
    for wl in (shared, separate):
        for e in wl.edges():
            src, dst = assignment[e.src], assignment.get(e.dst, "n3")
            routes[(e.src, e.dst)] = (src,) if src == dst else (src, dst)
    ccp = {nid: 0.5 for nid in cluster.node_ids()}
    plan = PlacementPlan(assignment, routes)
    nc_shared = node_cost(plan, cluster, ccp, shared)
    nc_separate = node_cost(plan, cluster, ccp, separate)
    cam = a.ti("AppI.s1.0").demand
    cap = cluster.node("n0").resources
    cam_cost = (1 - 0.5) * (cam.cpu / cap.cpu + cam.memory / cap.memory + cam.sensing / cap.sensing)
    assert nc_separate - nc_shared == pytest.approx(cam_cost, abs=1e-9)
    # resource accounting follows the same rule
    used_shared = [v for v in check_node_resources(plan, cluster, shared)]
    assert used_shared == []
