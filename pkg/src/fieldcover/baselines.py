"""Sensing simulation, greedy baselines, and time-resolved metrics.

Every stochastic routine is a pure function of its seed.  The stream
[seed, 0] belongs to field synthesis; trial t draws its sensor noise
from [seed, 1, t], so individual trials and batched studies see the
same noise no matter which path computes them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import FieldGrid
from .geometry import Environment
from .gp import Hyperparameters, Posterior, kernel_matrix
from .placement import MeasurementPlan, necessary_radius
from .routing import TimeModel, Tour, cumulative_times, tour_time

__all__ = [
    "SensorModel",
    "TrialReport",
    "baseline_candidates",
    "convergence_study",
    "entropy_greedy",
    "lawnmower_plan",
    "mi_greedy",
    "ordered_tour",
    "simulate_trial",
    "single_trial_mse_over_time",
    "survey_rows",
    "variance_over_time",
]


@dataclass(frozen=True)
class SensorModel:
    """Additive Gaussian noise on top of interpolated ground truth."""

    noise_variance: float
    seed: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.noise_variance) and self.noise_variance >= 0.0):
            raise ValueError("noise_variance must be finite and >= 0")
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")


@dataclass(frozen=True)
class TrialReport:
    """Per-grid-point outcome of one simulated survey.

    Aggregates are derived on access so they can never drift from the
    per-point data.
    """

    means: np.ndarray
    variances: np.ndarray
    squared_errors: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.means, dtype=float)
        v = np.asarray(self.variances, dtype=float)
        e = np.asarray(self.squared_errors, dtype=float)
        if not (m.shape == v.shape == e.shape) or m.ndim != 1:
            raise ValueError("per-point arrays must be 1D and congruent")
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "variances", v)
        object.__setattr__(self, "squared_errors", e)

    @property
    def average_variance(self) -> float:
        return float(self.variances.mean())

    @property
    def average_mse(self) -> float:
        return float(self.squared_errors.mean())

    @property
    def mean_percent_difference(self) -> float:
        v = np.maximum(self.variances, 1e-300)
        return float(np.mean(np.abs(self.squared_errors - self.variances) / v))


def _noisy_observations(
    truth: FieldGrid, design: np.ndarray, sensor: SensorModel, trial_index: int
) -> np.ndarray:
    rng = np.random.default_rng([sensor.seed, 1, trial_index])
    clean = truth.value_at(design)
    return clean + math.sqrt(sensor.noise_variance) * rng.standard_normal(design.shape[0])


def simulate_trial(
    truth: FieldGrid,
    plan: MeasurementPlan,
    sensor: SensorModel,
    hyper: Hyperparameters,
    trial_index: int = 0,
) -> TrialReport:
    """Survey the plan against one noisy realization of the sensor.

    The truth is modeled as a zero-mean field; callers holding an offset
    field should center it first.
    """
    design = plan.as_multiset().expand()
    eval_points = truth.points()
    truth_values = truth.values.ravel()
    post = Posterior(design, hyper)
    variances = post.variance(eval_points)
    if design.shape[0]:
        observed = _noisy_observations(truth, design, sensor, trial_index)
        means = post.mean(eval_points, observed)
    else:
        means = np.zeros(eval_points.shape[0])
    return TrialReport(means, variances, (means - truth_values) ** 2)


def convergence_study(
    truth: FieldGrid,
    plan: MeasurementPlan,
    sensor: SensorModel,
    hyper: Hyperparameters,
    trial_counts,
) -> np.ndarray:
    """Mean percent gap between averaged empirical MSE and variance.

    For each count N the squared errors of trials 0..N-1 are averaged
    per grid point and compared to the posterior variance there; the
    result is one mean percent difference per requested count.
    """
    counts = [int(c) for c in trial_counts]
    if not counts or counts[0] < 1 or any(b <= a for a, b in zip(counts, counts[1:])):
        raise ValueError("trial_counts must be strictly increasing positive integers")

    design = plan.as_multiset().expand()
    eval_points = truth.points()
    truth_values = truth.values.ravel()
    post = Posterior(design, hyper)
    variances = post.variance(eval_points)

    total = counts[-1]
    if design.shape[0]:
        observed = np.empty((design.shape[0], total))
        for t in range(total):
            observed[:, t] = _noisy_observations(truth, design, sensor, t)
        predictions = post.mean_many(eval_points, observed)
    else:
        predictions = np.zeros((eval_points.shape[0], total))

    squared = (predictions - truth_values[:, None]) ** 2
    running = np.cumsum(squared, axis=1)
    floor = np.maximum(variances, 1e-300)
    gaps = []
    for n in counts:
        mse = running[:, n - 1] / n
        gaps.append(float(np.mean(np.abs(mse - variances) / floor)))
    return np.asarray(gaps)


def _pick_with_tie_break(candidates: np.ndarray, scores: np.ndarray) -> int:
    best = float(scores.max())
    tol = 1e-12 * max(1.0, abs(best))
    tied = np.flatnonzero(scores >= best - tol)
    order = np.lexsort((candidates[tied, 1], candidates[tied, 0]))
    return int(tied[order[0]])


def _greedy_select(candidates, hyper: Hyperparameters, budget: int, score_fn) -> list:
    cands = np.asarray(candidates, dtype=float).reshape(-1, 2)
    if not isinstance(budget, int) or budget < 0:
        raise ValueError("budget must be a non-negative integer")
    if budget > cands.shape[0]:
        raise ValueError(f"budget {budget} exceeds {cands.shape[0]} candidates")
    picks: list[tuple[float, float]] = []
    mask = np.ones(cands.shape[0], dtype=bool)
    for _ in range(budget):
        idx = np.flatnonzero(mask)
        remaining = cands[idx]
        scores = score_fn(np.asarray(picks, dtype=float).reshape(-1, 2), remaining)
        chosen = idx[_pick_with_tie_break(remaining, scores)]
        picks.append((float(cands[chosen, 0]), float(cands[chosen, 1])))
        mask[chosen] = False
    return picks


def entropy_greedy(candidates, hyper: Hyperparameters, budget: int) -> list:
    """Pick the highest-posterior-variance candidate, one at a time.

    Gaussian entropy is monotone in variance, so the variance argmax is
    the entropy argmax. Ties go to the lexicographically smallest
    location.
    """

    def score(picked: np.ndarray, remaining: np.ndarray) -> np.ndarray:
        return Posterior(picked, hyper).variance(remaining)

    return _greedy_select(candidates, hyper, budget, score)


def mi_greedy(candidates, hyper: Hyperparameters, budget: int) -> list:
    """Greedy mutual-information gain over the candidate grid.

    Scores each unpicked candidate by its posterior variance given the
    picks, divided by its variance given the other unpicked candidates
    (the candidate itself excluded). Both conditionings go through the
    noisy-measurement model; the noise term is subtracted afterwards so
    the ratio compares latent-field uncertainties.
    """
    w2 = hyper.noise_variance

    def score(picked: np.ndarray, remaining: np.ndarray) -> np.ndarray:
        numer = Posterior(picked, hyper).variance(remaining)
        gram = kernel_matrix(remaining, remaining, hyper)
        gram[np.diag_indices_from(gram)] += w2
        inv_diag = np.diag(np.linalg.inv(gram))
        denom = 1.0 / inv_diag - w2
        denom = np.maximum(denom, 1e-18 * hyper.signal_variance)
        return numer / denom

    return _greedy_select(candidates, hyper, budget, score)


def _survey_axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-12))
    return lo + step * np.arange(n + 1)


def survey_rows(env: Environment, resolution: float) -> list:
    """Grid rows inside the environment, bottom row first, west to east.

    Unlike verification grids the survey grid never appends the far
    edge: a resolution wider than the extent leaves one node per axis.
    """
    if not (math.isfinite(resolution) and resolution > 0.0):
        raise ValueError("resolution must be positive and finite")
    x0, y0, x1, y1 = env.bounds
    xs = _survey_axis(x0, x1, resolution)
    rows = []
    for y in _survey_axis(y0, y1, resolution):
        row = [(float(x), float(y)) for x in xs if env.contains_point((x, y))]
        if row:
            rows.append(row)
    return rows


def baseline_candidates(env: Environment, hyper: Hyperparameters, delta: float) -> list:
    """Shared candidate grid for the greedy baselines.

    Half the necessary disk radius, the same grid the lawn-mower
    comparison runs on, so budget comparisons are apples-to-apples.
    """
    spacing = necessary_radius(hyper, delta) / 2.0
    return [p for row in survey_rows(env, spacing) for p in row]


def lawnmower_plan(env: Environment, resolution: float, depot) -> Tour:
    """Boustrophedon visit of a resolution-spaced grid, one dwell each."""
    rows = survey_rows(env, resolution)
    order = []
    for i, row in enumerate(rows):
        order.extend(reversed(row) if i % 2 else row)
    return ordered_tour(order, depot)


def ordered_tour(locations, depot, dwell_count: int = 1) -> Tour:
    """Closed tour visiting the locations in order, measuring at each."""
    waypoints = tuple(((float(x), float(y)), dwell_count) for x, y in locations)
    return Tour((float(depot[0]), float(depot[1])), waypoints)


def _finished_by_checkpoint(tour: Tour, time: TimeModel, eval_points, checkpoints):
    """Validate checkpoint queries and list dwell stops with finish times."""
    pts = np.asarray(eval_points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("need at least one evaluation point")
    horizon = tour_time(tour, time)
    marks = [float(c) for c in checkpoints]
    for c in marks:
        if not math.isfinite(c) or c < -1e-9 or c > horizon + 1e-9:
            raise ValueError(f"checkpoint {c} outside [0, {horizon}]")
    elapsed = cumulative_times(tour, time)
    finished = [
        (e, loc, n) for e, (loc, n) in zip(elapsed, tour.waypoints) if n > 0
    ]
    return pts, marks, finished


def variance_over_time(
    tour: Tour, hyper: Hyperparameters, eval_points, time: TimeModel, checkpoints
) -> np.ndarray:
    """Average posterior variance using measurements finished by each time.

    A waypoint's measurements count once its dwell completes, matching
    the tour's elapsed-time ledger.
    """
    pts, marks, finished = _finished_by_checkpoint(tour, time, eval_points, checkpoints)
    averages = []
    for c in marks:
        design = [(loc, n) for e, loc, n in finished if e <= c]
        locs = (
            np.repeat([loc for loc, _ in design], [n for _, n in design], axis=0)
            if design
            else np.empty((0, 2))
        )
        averages.append(float(Posterior(locs, hyper).variance(pts).mean()))
    return np.asarray(averages)


def single_trial_mse_over_time(
    tour: Tour,
    truth: FieldGrid,
    sensor: SensorModel,
    hyper: Hyperparameters,
    eval_points,
    time: TimeModel,
    checkpoints,
    trial_index: int = 0,
) -> np.ndarray:
    """Mean squared prediction error over one noisy traversal of the tour.

    The noise for the whole tour is drawn up front, so the design at a
    checkpoint is a prefix of the full one; finish times inherit the
    tour's ordering, which keeps those prefixes well defined.
    """
    pts, marks, finished = _finished_by_checkpoint(tour, time, eval_points, checkpoints)
    full = np.repeat(
        [loc for _, loc, _ in finished] or np.empty((0, 2)),
        [n for _, _, n in finished],
        axis=0,
    )
    observed = _noisy_observations(truth, full, sensor, trial_index)
    actual = truth.value_at(pts)
    curve = []
    for c in marks:
        size = sum(n for e, _, n in finished if e <= c)
        post = Posterior(full[:size], hyper)
        predictions = post.mean(pts, observed[:size])
        curve.append(float(np.mean((predictions - actual) ** 2)))
    return np.asarray(curve)
