"""Variance-bounded measurement placement.

Three radius/count formulas govern everything here. No number of
repeated measurements at a single site can pull the posterior variance
at distance beyond ``necessary_radius`` under the target; ``n`` repeats
do suffice out to ``sufficient_radius``; and ``required_measurements``
is the smallest repeat count whose sufficient radius reaches a chosen
fraction of the necessary one. The planner covers the environment with
necessary-radius disks, keeps a greedy maximal independent set, and
lawn-mows a three-radius disk around each kept center so that every
environment point ends up within the sufficient radius of a site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import NumericalError, VerificationError
from .geometry import Disk, Environment, cover_disk_lawnmower, cover_environment, greedy_mis
from .gp import Hyperparameters, MeasurementMultiset, Posterior


@dataclass(frozen=True)
class AccuracySpec:
    """Target posterior variance and the disk shrink factor.

    ``max_variance`` is the ceiling the plan must achieve at every point
    of the environment. ``shrink_factor`` (> 1) sets how much smaller the
    per-site coverage disks are than the necessary radius; larger values
    mean more sites with fewer repeats each.
    """

    max_variance: float
    shrink_factor: float = 2.0

    def __post_init__(self):
        d = float(self.max_variance)
        a = float(self.shrink_factor)
        if not math.isfinite(d) or d <= 0.0:
            raise ValueError(f"max_variance must be finite and > 0, got {d}")
        if not math.isfinite(a) or a <= 1.0:
            raise ValueError(f"shrink_factor must be finite and > 1, got {a}")
        object.__setattr__(self, "max_variance", d)
        object.__setattr__(self, "shrink_factor", a)


def _check_delta(h: Hyperparameters, delta: float) -> float:
    d = float(delta)
    if not (0.0 < d < h.signal_variance):
        raise ValueError(
            f"variance target must lie in (0, signal_variance={h.signal_variance}), got {d}"
        )
    return d


def necessary_radius(h: Hyperparameters, delta: float) -> float:
    """Distance beyond which no amount of single-site measuring reaches the target.

    l * sqrt(-log(1 - delta/s2)). Strictly increasing in delta; finite
    only for 0 < delta < signal variance.
    """
    d = _check_delta(h, delta)
    return h.length_scale * math.sqrt(-math.log1p(-d / h.signal_variance))


def sufficient_radius(h: Hyperparameters, delta: float, n: int) -> float:
    """Radius certified by ``n`` repeated measurements at one site.

    l * sqrt(-log((1 + w2/(n s2)) (1 - delta/s2))). Raises when the log
    argument reaches 1, meaning ``n`` measurements cannot certify any
    positive radius.
    """
    d = _check_delta(h, delta)
    n = int(n)
    if n < 1:
        raise ValueError(f"measurement count must be >= 1, got {n}")
    arg = (1.0 + h.noise_variance / (n * h.signal_variance)) * (1.0 - d / h.signal_variance)
    if arg >= 1.0:
        raise ValueError(
            f"{n} measurements cannot certify any radius at target {d}; "
            f"need n > {h.noise_variance / d:.6g}"
        )
    return h.length_scale * math.sqrt(-math.log(arg))


def required_measurements(h: Hyperparameters, spec: AccuracySpec) -> int:
    """Fewest repeats per site covering a disk of radius r_necessary/shrink_factor.

    Ceiling of (w2/s2) / ((1 - delta/s2)^(1/a^2 - 1) - 1), clamped to at
    least one; zero measurements observe nothing even in the noiseless
    limit. The defining property is re-checked on every call.
    """
    d = _check_delta(h, spec.max_variance)
    a = spec.shrink_factor
    denom = (1.0 - d / h.signal_variance) ** (1.0 / (a * a) - 1.0) - 1.0
    raw = (h.noise_variance / h.signal_variance) / denom
    n = max(1, math.ceil(raw))
    r_needed = necessary_radius(h, d) / a
    if sufficient_radius(h, d, n) < r_needed * (1.0 - 1e-12):
        raise NumericalError(
            f"repeat count {n} fails to certify radius {r_needed}; formula inconsistency"
        )
    return n


@dataclass(frozen=True)
class MeasurementPlan:
    """Measurement sites with repeat counts and their generating disks.

    ``provenance[i]`` is the index into ``sweep_disks`` of the disk whose
    lawn-mower produced ``entries[i]``. ``mis_disks`` are the independent
    necessary-radius disks; ``sweep_disks`` are the same centers at three
    times the radius.
    """

    entries: tuple[tuple[tuple[float, float], int], ...]
    provenance: tuple[int, ...]
    mis_disks: tuple[Disk, ...]
    sweep_disks: tuple[Disk, ...]
    coverage_radius: float
    measurements_per_site: int

    def __post_init__(self):
        if len(self.entries) != len(self.provenance):
            raise ValueError("one provenance index per entry is required")
        for _, count in self.entries:
            if int(count) < 1:
                raise ValueError(f"plan counts must be >= 1, got {count}")
        for idx in self.provenance:
            if not 0 <= int(idx) < len(self.sweep_disks):
                raise ValueError(f"provenance index {idx} out of range")

    @classmethod
    def from_sites(cls, entries) -> "MeasurementPlan":
        """Wrap bare (location, count) pairs for the evaluation pipeline.

        All counts must agree. The synthetic disk pair just spans the
        sites so provenance stays well formed; it is a placeholder, not
        a coverage guarantee.
        """
        norm = tuple(((float(x), float(y)), int(c)) for (x, y), c in entries)
        if not norm:
            raise ValueError("need at least one site")
        counts = {c for _, c in norm}
        if len(counts) != 1:
            raise ValueError("from_sites requires one shared measurement count")
        locs = np.asarray([loc for loc, _ in norm])
        center = (float(locs[:, 0].mean()), float(locs[:, 1].mean()))
        radius = max(float(np.linalg.norm(locs - center, axis=1).max()), 1e-9)
        disk = Disk(center, radius)
        return cls(norm, (0,) * len(norm), (disk,), (disk,), radius, counts.pop())

    @property
    def locations(self) -> np.ndarray:
        if not self.entries:
            return np.empty((0, 2))
        return np.asarray([loc for loc, _ in self.entries], dtype=float)

    @property
    def counts(self) -> np.ndarray:
        return np.asarray([c for _, c in self.entries], dtype=int)

    @property
    def total_measurements(self) -> int:
        return int(self.counts.sum()) if self.entries else 0

    def as_multiset(self) -> MeasurementMultiset:
        return MeasurementMultiset(self.entries)


@dataclass(frozen=True)
class VerificationReport:
    max_variance: float
    argmax: tuple[float, float]
    mean_variance: float
    passed: bool
    grid_spacing: float
    grid_count: int


def default_grid_spacing(env: Environment, h: Hyperparameters, delta: float) -> float:
    """min(necessary radius, environment diameter) / 20.

    The posterior varies on the kernel length scale, which the necessary
    radius never exceeds, so twenty samples per radius cannot straddle a
    variance excursion.
    """
    try:
        r = necessary_radius(h, delta)
    except ValueError:
        return env.diameter / 20.0
    return min(r, env.diameter) / 20.0


def disk_cover_placement(env: Environment, h: Hyperparameters, spec: AccuracySpec) -> MeasurementPlan:
    """Cover the environment with repeat-measurement sites meeting the target.

    Cover the environment with necessary-radius disks, keep a greedy
    maximal independent set, sweep a 3-radius disk around each kept
    center with sites spaced for radius r/shrink_factor, and assign every
    site the required repeat count. Per-disk site counts are bounded by
    ceil(6 a / sqrt(2))^2.
    """
    r_max = necessary_radius(h, spec.max_variance)
    n_site = required_measurements(h, spec)
    mis = tuple(greedy_mis(cover_environment(env, r_max)))
    sweep = tuple(Disk(d.center, 3.0 * r_max) for d in mis)
    per_disk_cap = math.ceil(6.0 * spec.shrink_factor / math.sqrt(2.0)) ** 2
    entries: list[tuple[tuple[float, float], int]] = []
    provenance: list[int] = []
    small = r_max / spec.shrink_factor
    for i, big in enumerate(sweep):
        pts = cover_disk_lawnmower(big, small)
        if len(pts) > per_disk_cap:
            raise NumericalError(
                f"sweep of disk {i} produced {len(pts)} sites, above the cap {per_disk_cap}"
            )
        entries.extend((p, n_site) for p in pts)
        provenance.extend([i] * len(pts))
    return MeasurementPlan(
        entries=tuple(entries),
        provenance=tuple(provenance),
        mis_disks=mis,
        sweep_disks=sweep,
        coverage_radius=r_max,
        measurements_per_site=n_site,
    )


def verify_plan(
    plan: MeasurementPlan,
    env: Environment,
    h: Hyperparameters,
    delta: float,
    grid_spacing: float | None = None,
) -> VerificationReport:
    """Exact posterior-variance sweep of the plan over an environment grid.

    Recomputes everything through the generic dense solve; nothing is
    trusted from the planner. ``passed`` is a strict comparison against
    the target.
    """
    d = float(delta)
    if grid_spacing is None:
        grid_spacing = default_grid_spacing(env, h, d)
    step = float(grid_spacing)
    if not math.isfinite(step) or step <= 0.0:
        raise ValueError(f"grid spacing must be finite and > 0, got {step}")
    grid = env.grid(step)
    post = Posterior(plan.as_multiset().expand(), h)
    var = post.variance(grid)
    top = int(np.argmax(var))
    return VerificationReport(
        max_variance=float(var[top]),
        argmax=(float(grid[top, 0]), float(grid[top, 1])),
        mean_variance=float(var.mean()),
        passed=bool(var[top] <= d),
        grid_spacing=step,
        grid_count=int(grid.shape[0]),
    )


def prune_redundant(
    plan: MeasurementPlan,
    env: Environment,
    h: Hyperparameters,
    spec: AccuracySpec,
    grid_spacing: float | None = None,
) -> MeasurementPlan:
    """Drop sites whose served grid points all have another server.

    Sites are visited in lexicographic location order; a site is removed
    when every environment grid point within the sufficient radius of it
    is within that radius of some other surviving site. The pruned plan
    is re-verified through the dense solve and the routine refuses to
    return a plan that lost the guarantee.
    """
    if not plan.entries:
        return plan
    if grid_spacing is None:
        grid_spacing = default_grid_spacing(env, h, spec.max_variance)
    serve_r = sufficient_radius(h, spec.max_variance, plan.measurements_per_site)
    grid = env.grid(float(grid_spacing))
    locs = plan.locations
    order = sorted(range(len(plan.entries)), key=lambda i: tuple(locs[i]))
    served_by = cKDTree(locs).query_ball_point(grid, serve_r * (1.0 + 1e-12))
    cover_count = np.array([len(s) for s in served_by])
    site_serves: dict[int, list[int]] = {i: [] for i in range(len(plan.entries))}
    for g, sites in enumerate(served_by):
        for s in sites:
            site_serves[s].append(g)
    alive = np.ones(len(plan.entries), dtype=bool)
    for i in order:
        pts = site_serves[i]
        # A site serving no grid point is kept: it still lowers variance
        # near the boundary, and dropping it is not a redundancy removal.
        if pts and bool(np.all(cover_count[pts] >= 2)):
            alive[i] = False
            cover_count[pts] -= 1
    pruned = MeasurementPlan(
        entries=tuple(e for e, a in zip(plan.entries, alive) if a),
        provenance=tuple(p for p, a in zip(plan.provenance, alive) if a),
        mis_disks=plan.mis_disks,
        sweep_disks=plan.sweep_disks,
        coverage_radius=plan.coverage_radius,
        measurements_per_site=plan.measurements_per_site,
    )
    report = verify_plan(pruned, env, h, spec.max_variance, float(grid_spacing))
    if not report.passed:
        raise VerificationError(
            f"pruning broke the guarantee: max variance {report.max_variance} "
            f"above target {spec.max_variance} at {report.argmax}"
        )
    return pruned
