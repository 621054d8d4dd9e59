"""Split one closed measurement tour into k depot-anchored subtours.

The cut rule walks the elapsed-time ledger of the source tour, where
elapsed time at a stop includes travel so far plus every dwell up to and
including that stop, and ends subtour j at the last measurement stop
whose elapsed time stays within j/k of the adjusted horizon.  Each robot
pays at most two extra depot legs over its share of the source tour,
which is exactly what the makespan certificate charges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .routing import TimeModel, Tour, cumulative_times, tour_time

__all__ = [
    "MakespanCertificate",
    "SplitParameters",
    "SubtourSet",
    "farthest_dwell_distance",
    "makespan",
    "makespan_certificate",
    "split_tour",
]


def farthest_dwell_distance(tour: Tour) -> float:
    """Depot distance of the farthest waypoint that takes measurements."""
    reach = 0.0
    for location, dwell in tour.waypoints:
        if dwell > 0:
            reach = max(reach, math.dist(tour.depot, location))
    return reach


@dataclass(frozen=True)
class SplitParameters:
    """Inputs of the cut rule.

    ``depot_reach`` is the depot distance of the farthest measurement
    stop.  It is carried here so certificates are auditable, but the
    splitter recomputes it from the tour and rejects a mismatch rather
    than trusting the stored value.  ``dwell_count`` is the per-site
    measurement count the thresholds budget for (the planner's count at
    shrink factor 2; plans built with another factor substitute their
    actual count).
    """

    robots: int
    depot_reach: float
    dwell_count: int
    measurement_time: float

    def __post_init__(self) -> None:
        if not isinstance(self.robots, int) or self.robots < 1:
            raise ValueError("robots must be an integer >= 1")
        if not (math.isfinite(self.depot_reach) and self.depot_reach >= 0.0):
            raise ValueError("depot_reach must be finite and >= 0")
        if not isinstance(self.dwell_count, int) or self.dwell_count < 1:
            raise ValueError("dwell_count must be an integer >= 1")
        if not (math.isfinite(self.measurement_time) and self.measurement_time >= 0.0):
            raise ValueError("measurement_time must be finite and >= 0")

    @classmethod
    def for_tour(
        cls, tour: Tour, robots: int, dwell_count: int, measurement_time: float
    ) -> "SplitParameters":
        return cls(robots, farthest_dwell_distance(tour), dwell_count, measurement_time)


@dataclass(frozen=True)
class SubtourSet:
    """k depot-anchored subtours partitioning one source tour."""

    subtours: tuple[Tour, ...]
    source: Tour

    def __post_init__(self) -> None:
        if not self.subtours:
            raise ValueError("need at least one subtour")
        merged: list = []
        for sub in self.subtours:
            if sub.depot != self.source.depot:
                raise ValueError("all subtours must share the source depot")
            if not sub.closed:
                raise ValueError("subtours must be closed at the depot")
            merged.extend(sub.waypoints)
        if tuple(merged) != self.source.waypoints:
            raise ValueError("subtours do not partition the source waypoints in order")


def _check_reach(tour: Tour, params: SplitParameters) -> float:
    reach = farthest_dwell_distance(tour)
    if not math.isclose(reach, params.depot_reach, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(
            f"depot_reach {params.depot_reach!r} does not match the tour's "
            f"farthest measurement stop at {reach!r}"
        )
    return reach


def split_tour(tour: Tour, params: SplitParameters) -> SubtourSet:
    """Cut a closed tour into ``params.robots`` depot-anchored subtours.

    Subtour j ends at the last measurement stop whose elapsed time is at
    most (j/k)(T - (2L + eta*n)) + L + eta*n, with T the full tour time,
    L the depot reach and n the budgeted dwell count.  Stops after the
    cut, including measurement-free transit waypoints, ride with the
    next subtour.  Thresholds use unit travel speed.
    """
    if not tour.closed:
        raise ValueError("can only split a tour that returns to its depot")
    reach = _check_reach(tour, params)
    k = params.robots
    if k == 1:
        return SubtourSet((tour,), tour)

    time = TimeModel(params.measurement_time)
    total = tour_time(tour, time)
    elapsed = cumulative_times(tour, time)
    launch = reach + params.measurement_time * params.dwell_count
    slack = total - (launch + reach)

    dwell_idx = [i for i, (_, n) in enumerate(tour.waypoints) if n > 0]
    cuts: list[int] = []
    prev = -1
    for j in range(1, k):
        threshold = (j / k) * slack + launch
        cut = prev
        for i in dwell_idx:
            if elapsed[i] <= threshold:
                # thresholds are non-decreasing whenever the tour covers
                # the farthest round trip; the running max guards
                # degenerate parameter choices
                cut = max(cut, i)
        cuts.append(cut)
        prev = cut

    bounds = [-1] + cuts + [len(tour.waypoints) - 1]
    subtours = []
    for lo, hi in zip(bounds, bounds[1:]):
        tags = None
        if tour.disk_index is not None:
            tags = tour.disk_index[lo + 1 : hi + 1]
        subtours.append(Tour(tour.depot, tour.waypoints[lo + 1 : hi + 1], disk_index=tags))
    return SubtourSet(tuple(subtours), tour)


def makespan(subtour_set: SubtourSet, time: TimeModel) -> float:
    return max((tour_time(sub, time) for sub in subtour_set.subtours), default=0.0)


@dataclass(frozen=True)
class MakespanCertificate:
    bound: float
    makespan: float
    satisfied: bool


def makespan_certificate(
    subtour_set: SubtourSet, params: SplitParameters, time: TimeModel
) -> MakespanCertificate:
    """Check the split against its guarantee.

    The bound charges each robot its 1/k share of the source tour beyond
    the farthest round trip, plus four depot-reach legs and two dwell
    budgets.  Certificates assume the time model the split was computed
    under (unit speed, matching measurement time).
    """
    reach = _check_reach(subtour_set.source, params)
    total = tour_time(subtour_set.source, time)
    dwell_budget = params.measurement_time * params.dwell_count
    bound = (
        (total - (2.0 * reach + dwell_budget)) / params.robots
        + 4.0 * reach
        + 2.0 * dwell_budget
    )
    worst = makespan(subtour_set, time)
    return MakespanCertificate(bound=bound, makespan=worst, satisfied=worst <= bound + 1e-9)
