"""Vehicle mobility: road-segment transition matrices and cluster cohesion.

A transition matrix holds, per vehicle, the empirical probability of exiting
an intersection onto each road segment, with a confidence score that grows
with observed history. The cluster cohesion probability (CCP) of a node is
its probability of staying on the cluster's segment over a service window;
joint CCPs for node pairs are taken as the product of the marginals.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence


class NoObservations(ValueError):
    pass


class UnknownVehicle(KeyError):
    pass


class UnknownSegment(KeyError):
    pass


class OutOfRange(ValueError):
    pass


class ZeroNodes(ValueError):
    pass


CONFIDENCE_SATURATION = 20  # trips after which the confidence score reaches 1.0

# CCP intervals for the two cluster states
STABLE_CCP_RANGE = (0.4, 0.8)
UNSTABLE_CCP_RANGE = (0.2, 0.6)


@dataclass(frozen=True)
class TransitionMatrix:
    vehicle_ids: tuple[str, ...]
    segment_ids: tuple[str, ...]
    probs: tuple[tuple[float, ...], ...]  # row per vehicle, column per segment
    confidence: tuple[float, ...]
    window: tuple[int, int] = (0, 0)
    renormalized: tuple[str, ...] = ()  # vehicles whose supplied rows did not sum to 1

    def __post_init__(self):
        for vid, row in zip(self.vehicle_ids, self.probs):
            s = sum(row)
            if abs(s - 1.0) > 1e-9:
                raise ValueError(f"row for {vid!r} sums to {s}, not 1")
            if any(p < 0 or p > 1 for p in row):
                raise ValueError(f"row for {vid!r} has entries outside [0, 1]")
        if any(c < 0 or c > 1 for c in self.confidence):
            raise ValueError("confidence values must lie in [0, 1]")

    def row(self, vehicle_id: str) -> tuple[float, ...]:
        try:
            return self.probs[self.vehicle_ids.index(vehicle_id)]
        except ValueError:
            raise UnknownVehicle(vehicle_id) from None


@dataclass(frozen=True)
class MobilityProfile:
    """Per-node CCP values for a cluster in a given state over a window."""

    kind: str  # "stable" | "unstable"
    ccp: tuple[float, ...]
    window: tuple[int, int] = (0, 0)

    def __post_init__(self):
        low, high = _ccp_range(self.kind)
        for v in self.ccp:
            if not low <= v <= high:
                raise ValueError(f"{self.kind} CCP {v} outside [{low}, {high}]")


def _ccp_range(kind: str) -> tuple[float, float]:
    if kind == "stable":
        return STABLE_CCP_RANGE
    if kind == "unstable":
        return UNSTABLE_CCP_RANGE
    raise ValueError(f"unknown mobility kind {kind!r}")


def build_transition_matrix(
    observations: Iterable[tuple[str, str, str]],
    window: tuple[int, int] = (0, 0),
) -> TransitionMatrix:
    """Empirical per-vehicle exit frequencies from (vehicle, from, to) records."""
    counts: dict[str, dict[str, int]] = {}
    segments: set[str] = set()
    for vehicle, _from_seg, to_seg in observations:
        counts.setdefault(vehicle, {}).setdefault(to_seg, 0)
        counts[vehicle][to_seg] += 1
        segments.add(to_seg)
    if not counts:
        raise NoObservations("no transition observations supplied")
    vehicle_ids = tuple(sorted(counts))
    segment_ids = tuple(sorted(segments))
    rows, conf = [], []
    for v in vehicle_ids:
        total = sum(counts[v].values())
        rows.append(tuple(counts[v].get(s, 0) / total for s in segment_ids))
        conf.append(min(1.0, total / CONFIDENCE_SATURATION))
    return TransitionMatrix(vehicle_ids, segment_ids, tuple(rows), tuple(conf), window)


def add_unseen_vehicle(matrix: TransitionMatrix, vehicle_id: str) -> TransitionMatrix:
    """Insert a vehicle with the fleet-average exit row and confidence 0."""
    if vehicle_id in matrix.vehicle_ids:
        raise ValueError(f"vehicle {vehicle_id!r} already present")
    n = len(matrix.vehicle_ids)
    avg = tuple(
        sum(row[j] for row in matrix.probs) / n for j in range(len(matrix.segment_ids))
    )
    order = sorted(range(n + 1), key=lambda i: (matrix.vehicle_ids + (vehicle_id,))[i])
    ids = matrix.vehicle_ids + (vehicle_id,)
    probs = matrix.probs + (avg,)
    confs = matrix.confidence + (0.0,)
    return TransitionMatrix(
        tuple(ids[i] for i in order),
        matrix.segment_ids,
        tuple(probs[i] for i in order),
        tuple(confs[i] for i in order),
        matrix.window,
        matrix.renormalized,
    )


def matrix_from_probs(
    vehicle_ids: Sequence[str],
    segment_ids: Sequence[str],
    rows: Sequence[Sequence[float]],
    confidence: Sequence[float] | None = None,
    window: tuple[int, int] = (0, 0),
) -> TransitionMatrix:
    """Build a matrix from raw probability rows, renormalizing and flagging any
    row that does not sum to 1 (probability semantics must hold downstream)."""
    flagged, fixed = [], []
    for vid, row in zip(vehicle_ids, rows):
        s = sum(row)
        if s <= 0:
            raise ValueError(f"row for {vid!r} sums to {s}")
        if abs(s - 1.0) > 1e-9:
            flagged.append(vid)
            row = [p / s for p in row]
        fixed.append(tuple(row))
    conf = tuple(confidence) if confidence is not None else (1.0,) * len(fixed)
    return TransitionMatrix(
        tuple(vehicle_ids), tuple(segment_ids), tuple(fixed), conf, window, tuple(flagged)
    )


def ccp(matrix: TransitionMatrix, vehicle_id: str, target_segment: str) -> float:
    """Probability that a vehicle exits onto the cluster's target segment."""
    row = matrix.row(vehicle_id)
    try:
        j = matrix.segment_ids.index(target_segment)
    except ValueError:
        raise UnknownSegment(target_segment) from None
    return row[j]


def joint_ccp(p1: float, p2: float) -> float:
    """Probability of two nodes staying together: product of the marginals."""
    for p in (p1, p2):
        if not 0.0 <= p <= 1.0:
            raise OutOfRange(f"probability {p} outside [0, 1]")
    return p1 * p2


def src_dest_probability(p_src: float, p_dest: float) -> float:
    """Joint probability of a trip starting at one segment and ending at another."""
    return joint_ccp(p_src, p_dest)


def sample_profile(kind: str, n: int, seed: int, window: tuple[int, int] = (0, 0)) -> MobilityProfile:
    """Draw n node CCPs uniformly from the kind's interval, deterministically.

    Both kinds share a 0.4-wide interval, so matched seeds give stable values
    exactly 0.2 above unstable ones, element by element.
    """
    if n < 1:
        raise ZeroNodes("need at least one node")
    low, high = _ccp_range(kind)
    rng = random.Random(seed)
    values = tuple(low + (high - low) * rng.random() for _ in range(n))
    return MobilityProfile(kind, values, window)


def profile_as_map(profile: MobilityProfile, node_ids: Sequence[str]) -> dict[str, float]:
    """Zip profile values onto node ids (sorted), for the cost model."""
    ids = sorted(node_ids)
    if len(ids) != len(profile.ccp):
        raise ValueError(f"{len(profile.ccp)} CCP values for {len(ids)} nodes")
    return dict(zip(ids, profile.ccp))


def transition_matrix_to_csv(matrix: TransitionMatrix) -> list[str]:
    """Rows `vehicle_id,segment_id,probability,confidence`."""
    out = ["vehicle_id,segment_id,probability,confidence"]
    for vid, row, conf in zip(matrix.vehicle_ids, matrix.probs, matrix.confidence):
        for sid, p in zip(matrix.segment_ids, row):
            out.append(f"{vid},{sid},{p:.10g},{conf:.10g}")
    return out


def transition_matrix_from_csv(rows: Iterable[str]) -> TransitionMatrix:
    entries: dict[str, dict[str, float]] = {}
    confs: dict[str, float] = {}
    for i, line in enumerate(rows):
        line = line.strip()
        if not line or (i == 0 and line.startswith("vehicle_id")):
            continue
        vid, sid, p, conf = line.split(",")
        entries.setdefault(vid, {})[sid] = float(p)
        confs[vid] = float(conf)
    vehicle_ids = tuple(sorted(entries))
    segment_ids = tuple(sorted({s for row in entries.values() for s in row}))
    probs = tuple(
        tuple(entries[v].get(s, 0.0) for s in segment_ids) for v in vehicle_ids
    )
    return TransitionMatrix(
        vehicle_ids, segment_ids, probs, tuple(confs[v] for v in vehicle_ids)
    )
