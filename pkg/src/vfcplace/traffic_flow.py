"""Traffic flow ingestion, regression models, LOS grading and network capacity.

Interval vehicle counts come in as CSV; we fit per-flow linear regressions
(and a multivariate variant over several predictor series), grade traffic
density into the A-F level-of-service scale, and evaluate the closed-form
capacity of a cooperative vehicular network.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import betainc


class EmptyInput(ValueError):
    """The count stream contained no data rows."""


class NonMonotonicTimestamps(ValueError):
    def __init__(self, flow_id: str):
        super().__init__(f"timestamps not strictly increasing for flow {flow_id!r}")
        self.flow_id = flow_id


class IntervalMismatch(ValueError):
    def __init__(self, detail: str):
        super().__init__(f"interval mismatch: {detail}")


class LengthMismatch(ValueError):
    pass


class DegenerateInput(ValueError):
    pass


class RankDeficient(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


class NegativeDensity(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class FlowSeries:
    """Vehicle counts for one flow at one site, sampled on a fixed interval."""

    site_id: str
    flow_id: str
    interval_minutes: int
    samples: tuple[tuple[int, int], ...]  # (epoch seconds, count)

    def __post_init__(self):
        if self.interval_minutes <= 0:
            raise ValueError("interval_minutes must be positive")
        step = self.interval_minutes * 60
        prev = None
        for ts, count in self.samples:
            if count < 0:
                raise ValueError(f"negative count at t={ts}")
            if prev is not None:
                if ts <= prev:
                    raise NonMonotonicTimestamps(self.flow_id)
                if ts - prev != step:
                    raise IntervalMismatch(
                        f"flow {self.flow_id!r}: gap {ts - prev}s, expected {step}s"
                    )
            prev = ts

    def counts(self) -> list[int]:
        return [c for _, c in self.samples]

    def timestamps(self) -> list[int]:
        return [t for t, _ in self.samples]

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class RegressionModel:
    slope: float
    intercept: float
    r_value: float
    p_value: float
    std_err: float


@dataclass(frozen=True)
class MvRegressionModel:
    coefficients: tuple[float, ...]
    intercept: float
    r2: float


@dataclass(frozen=True)
class LosGrade:
    grade: str
    density_low: float
    density_high: float  # math.inf for F
    vc_low: float
    vc_high: float
    description: str


# Density breakpoints (veh/mi/lane) and volume/capacity bands of the A-F scale.
LOS_TABLE: tuple[LosGrade, ...] = (
    LosGrade("A", 0.0, 11.0, 0.0, 0.3, "Virtually free flow; completely unimpeded"),
    LosGrade("B", 11.0, 18.0, 0.3, 0.5, "Stable flow with slight delays; reasonably unimpeded"),
    LosGrade("C", 18.0, 26.0, 0.5, 0.71, "Stable flow with delays; less freedom to maneuver"),
    LosGrade("D", 26.0, 35.0, 0.71, 0.89, "High density, but stable flow"),
    LosGrade("E", 35.0, 45.0, 0.89, 1.0, "Operating conditions at or near capacity; unstable flow"),
    LosGrade("F", 45.0, math.inf, 1.0, math.inf, "Forced flow, breakdown conditions"),
)


@dataclass(frozen=True)
class CapacityParams:
    """Inputs of the closed-form capacity expression. Lengths in meters, rates in Mb/s."""

    L: float        # highway segment length
    d: float        # distance between infrastructure points
    W_I: float      # V2I data rate
    W_V: float      # V2V data rate
    rho: float      # vehicles per meter
    p: float        # fraction of vehicles with download requests
    r_I: float      # infrastructure radio range
    r_o: float      # vehicle radio range
    R_C: float      # carrier-sense range

    def __post_init__(self):
        for name in ("L", "d", "r_I", "r_o", "R_C"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.rho <= 0:
            raise ValueError("rho must be > 0")
        if self.d > self.L:
            raise ValueError("d must not exceed L")


CSV_HEADER = ["site_id", "flow_id", "interval_minutes", "timestamp", "count"]


@dataclass(frozen=True)
class MalformedRow:
    line_number: int
    row: tuple[str, ...]
    reason: str


@dataclass(frozen=True)
class IngestResult:
    series: tuple[FlowSeries, ...]
    malformed: tuple[MalformedRow, ...]


def ingest_counts(stream: Iterable[str]) -> IngestResult:
    """Parse interval count rows into one FlowSeries per (site_id, flow_id).

    Unparseable rows are collected in the result's ``malformed`` report rather
    than dropped; ordering/interval violations inside a flow raise, since the
    series invariants cannot hold.
    """
    reader = csv.reader(stream)
    rows = list(reader)
    if rows and [c.strip() for c in rows[0]] == CSV_HEADER:
        rows = rows[1:]
        offset = 2
    else:
        offset = 1
    groups: dict[tuple[str, str], list[tuple[int, int]]] = {}
    intervals: dict[tuple[str, str], int] = {}
    malformed: list[MalformedRow] = []
    n_data = 0
    for i, row in enumerate(rows):
        if not row or all(not c.strip() for c in row):
            continue
        n_data += 1
        if len(row) != 5:
            malformed.append(MalformedRow(i + offset, tuple(row), "expected 5 columns"))
            continue
        site, flow, interval_s, ts_s, count_s = (c.strip() for c in row)
        try:
            interval, ts, count = int(interval_s), int(ts_s), int(count_s)
        except ValueError:
            malformed.append(MalformedRow(i + offset, tuple(row), "non-integer field"))
            continue
        if interval <= 0 or count < 0:
            malformed.append(MalformedRow(i + offset, tuple(row), "out-of-range value"))
            continue
        key = (site, flow)
        if key in intervals and intervals[key] != interval:
            raise IntervalMismatch(
                f"flow {flow!r} declares interval {interval}, had {intervals[key]}"
            )
        intervals[key] = interval
        groups.setdefault(key, []).append((ts, count))
    if n_data == 0:
        raise EmptyInput("no data rows")
    series = [
        FlowSeries(site, flow, intervals[(site, flow)], tuple(samples))
        for (site, flow), samples in groups.items()
    ]
    return IngestResult(tuple(series), tuple(malformed))


def _aligned_counts(x: FlowSeries, y: FlowSeries) -> tuple[np.ndarray, np.ndarray]:
    if x.timestamps() != y.timestamps():
        raise LengthMismatch("series must share identical timestamps")
    return np.asarray(x.counts(), float), np.asarray(y.counts(), float)


def _slope_p_value(t_stat: float, dof: int) -> float:
    # two-sided t-test via the regularized incomplete beta function
    return float(betainc(dof / 2.0, 0.5, dof / (dof + t_stat * t_stat)))


def fit_linear(x: FlowSeries, y: FlowSeries) -> RegressionModel:
    """Ordinary least squares of y on x with Pearson r, slope p-value and SE."""
    xs, ys = _aligned_counts(x, y)
    n = len(xs)
    if n < 3:
        raise LengthMismatch("need at least 3 aligned samples")
    xm, ym = xs.mean(), ys.mean()
    sxx = float(((xs - xm) ** 2).sum())
    syy = float(((ys - ym) ** 2).sum())
    sxy = float(((xs - xm) * (ys - ym)).sum())
    if sxx == 0.0:
        raise DegenerateInput("x has zero variance")
    slope = sxy / sxx
    intercept = ym - slope * xm
    r = 0.0 if syy == 0.0 else sxy / math.sqrt(sxx * syy)
    sse = max(syy - slope * sxy, 0.0)
    std_err = math.sqrt(sse / (n - 2) / sxx)
    if std_err == 0.0:
        p = 0.0 if slope != 0.0 else 1.0
    else:
        p = _slope_p_value(slope / std_err, n - 2)
    return RegressionModel(slope, intercept, r, p, std_err)


def fit_multivariate(predictors: Sequence[FlowSeries], target: FlowSeries) -> MvRegressionModel:
    """OLS of target on several predictor series; r2 = 1 - SS_res/SS_tot."""
    if not predictors:
        raise LengthMismatch("need at least one predictor")
    cols = []
    for p in predictors:
        px, ty = _aligned_counts(p, target)
        cols.append(px)
    y = np.asarray(target.counts(), float)
    n, k = len(y), len(cols)
    if n <= k + 1:
        raise LengthMismatch("sample count must exceed predictor count + 1")
    design = np.column_stack([np.ones(n)] + cols)
    if np.linalg.matrix_rank(design) < k + 1:
        raise RankDeficient("collinear predictors")
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return MvRegressionModel(tuple(float(b) for b in beta[1:]), float(beta[0]), r2)


def predict(model: RegressionModel | MvRegressionModel, inputs: Sequence[float]) -> float:
    """Affine evaluation of a fitted model. Never clamps; callers decide."""
    if isinstance(model, RegressionModel):
        if len(inputs) != 1:
            raise ArityMismatch(f"expected 1 input, got {len(inputs)}")
        return model.slope * inputs[0] + model.intercept
    if len(inputs) != len(model.coefficients):
        raise ArityMismatch(
            f"expected {len(model.coefficients)} inputs, got {len(inputs)}"
        )
    return model.intercept + sum(c * v for c, v in zip(model.coefficients, inputs))


def classify_los(density: float) -> LosGrade:
    """Grade a density (veh/mi/lane) on the A-F scale, half-open at the lower bound."""
    if density < 0:
        raise NegativeDensity(f"density {density} < 0")
    for grade in LOS_TABLE:
        if grade.density_low <= density < grade.density_high:
            return grade
    return LOS_TABLE[-1]


def theoretical_capacity(params: CapacityParams) -> float:
    """Closed-form achievable capacity of a cooperative vehicular network, in Mb/s.

    (L/d) * min{ W_I(1-e^(-2*rho*r_I)),
                 W_I(1-e^(-p*rho*2*r_I))
                 + W_V*c2*(d-2*r_I) / (c2*R_C + p - p*e^(-2*p*r_o))
                 + e^(-p*rho*2*r_o) }
    with c2 = (1-p)*p*rho*(1-e^(-rho*2*r_o)).

    At p=0 the V2V fraction is 0/0; both numerator and denominator vanish and
    the term is taken as 0. d <= 2*r_I makes the V2V distance factor negative
    and is rejected rather than clamped.
    """
    q = params
    if q.d <= 2 * q.r_I:
        raise DomainError(f"d={q.d} must exceed 2*r_I={2 * q.r_I}")
    branch_i = q.W_I * (1.0 - math.exp(-2.0 * q.rho * q.r_I))
    c2 = (1.0 - q.p) * q.p * q.rho * (1.0 - math.exp(-q.rho * 2.0 * q.r_o))
    numer = q.W_V * c2 * (q.d - 2.0 * q.r_I)
    denom = c2 * q.R_C + q.p - q.p * math.exp(-2.0 * q.p * q.r_o)
    v2v = 0.0 if numer == 0.0 and denom == 0.0 else numer / denom
    branch_coop = (
        q.W_I * (1.0 - math.exp(-q.p * q.rho * 2.0 * q.r_I))
        + v2v
        + math.exp(-q.p * q.rho * 2.0 * q.r_o)
    )
    return (q.L / q.d) * min(branch_i, branch_coop)


def aggregate_capacity(vehicle_count: int, per_vehicle_rate: float = 0.5) -> float:
    """Nominal aggregate capacity: vehicle count times a flat per-vehicle rate (Mb/s)."""
    if vehicle_count < 0:
        raise ValueError("vehicle_count must be >= 0")
    if per_vehicle_rate <= 0:
        raise ValueError("per_vehicle_rate must be > 0")
    return vehicle_count * per_vehicle_rate


def regression_csv_rows(models: dict[str, RegressionModel]) -> list[str]:
    """Rows `flow_id,slope,intercept,r_value,p_value,std_err` (header included)."""
    out = ["flow_id,slope,intercept,r_value,p_value,std_err"]
    for flow_id in sorted(models):
        m = models[flow_id]
        out.append(
            f"{flow_id},{m.slope:.10g},{m.intercept:.10g},{m.r_value:.10g},"
            f"{m.p_value:.10g},{m.std_err:.10g}"
        )
    return out


def los_csv_rows(densities: Iterable[float]) -> list[str]:
    out = ["density,grade"]
    for d in densities:
        out.append(f"{d:.10g},{classify_los(d).grade}")
    return out
