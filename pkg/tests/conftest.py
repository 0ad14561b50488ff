import pytest

from vfcplace.cluster import ClusterGraph, ClusterNode, NodeResources


def make_cluster(caps, links, cn):
    """caps: {node_id: (cpu, mem, sensing, radio_kbps)}; links symmetric pairs
    unless given explicitly as 3-tuples."""
    nodes = tuple(
        ClusterNode(nid, NodeResources(*c[:3]), c[3]) for nid, c in sorted(caps.items())
    )
    expanded = []
    for link in links:
        a, b, bw = link
        expanded.append((a, b, float(bw)))
    return ClusterGraph(nodes, tuple(expanded), cn)


def full_mesh(caps, cn, bw=None):
    ids = sorted(caps)
    links = []
    for a in ids:
        for b in ids:
            if a != b:
                w = bw if bw is not None else min(caps[a][3], caps[b][3])
                links.append((a, b, w))
    return make_cluster(caps, links, cn)


@pytest.fixture
def ample_line_cluster():
    caps = {
        "n0": (10, 1000, 1, 1000.0),
        "n1": (10, 1000, 0, 1000.0),
        "n2": (10, 1000, 0, 1000.0),
    }
    links = [
        ("n0", "n1", 1000.0), ("n1", "n0", 1000.0),
        ("n1", "n2", 1000.0), ("n2", "n1", 1000.0),
    ]
    return make_cluster(caps, links, "n2")
