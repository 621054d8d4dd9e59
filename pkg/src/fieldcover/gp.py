"""Gaussian process regression with a squared-exponential kernel.

Measurement noise is i.i.d. Gaussian with variance ``noise_variance``,
which doubles as the regularizer added to the Gram matrix diagonal, so
every solve below goes through a Cholesky factorization of an SPD matrix.
The posterior variance never depends on measured values, only on where
and how often measurements are taken; the planners in this package lean
on that fact throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.spatial.distance import cdist

from .errors import DegenerateDataError, NumericalError

# Column chunk size for batched variance evaluation. Keeps the triangular
# solve workspace around 100 MB even for the largest plans we verify.
_CHUNK = 4096


def _as_point(p) -> tuple[float, float]:
    x, y = p
    x, y = float(x), float(y)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"point coordinates must be finite, got {(x, y)}")
    return (x, y)


@dataclass(frozen=True)
class Hyperparameters:
    """Kernel and noise hyperparameters (l, sigma0^2, omega^2).

    Parameters
    ----------
    length_scale : float
        Correlation length of the squared-exponential kernel, in the same
        units as the workspace coordinates. Strictly positive.
    signal_variance : float
        Prior variance of the field at any single point. Strictly positive.
    noise_variance : float
        Variance of the additive measurement noise. Strictly positive; this
        is also what keeps the regularized Gram matrix well conditioned.
    """

    length_scale: float
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        for name in ("length_scale", "signal_variance", "noise_variance"):
            v = getattr(self, name)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise ValueError(f"{name} must be a number, got {v!r}") from None
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class Observation:
    """A measurement location with an optional measured value."""

    location: tuple[float, float]
    value: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "location", _as_point(self.location))
        if self.value is not None:
            v = float(self.value)
            if not math.isfinite(v):
                raise ValueError(f"observation value must be finite, got {v}")
            object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class MeasurementMultiset:
    """Measurement locations with positive repeat counts.

    ``entries`` is a tuple of ``(location, count)`` pairs. The same
    location may appear in several entries; counts just add up.
    """

    entries: tuple[tuple[tuple[float, float], int], ...]

    def __post_init__(self):
        norm = []
        for loc, count in self.entries:
            count = int(count)
            if count < 1:
                raise ValueError(f"measurement count must be >= 1, got {count}")
            norm.append((_as_point(loc), count))
        object.__setattr__(self, "entries", tuple(norm))

    @classmethod
    def from_points(cls, points, count: int = 1) -> "MeasurementMultiset":
        return cls(tuple((tuple(p), count) for p in points))

    @classmethod
    def single_site(cls, location, count: int) -> "MeasurementMultiset":
        return cls(((tuple(location), count),))

    @property
    def total(self) -> int:
        return sum(c for _, c in self.entries)

    def expand(self) -> np.ndarray:
        """Locations as an (N, 2) array with rows repeated per count."""
        if not self.entries:
            return np.empty((0, 2), dtype=float)
        locs = np.asarray([loc for loc, _ in self.entries], dtype=float)
        counts = np.asarray([c for _, c in self.entries], dtype=int)
        return np.repeat(locs, counts, axis=0)


def kernel(a, b, hyper: Hyperparameters) -> float:
    """Squared-exponential covariance between two points."""
    ax, ay = _as_point(a)
    bx, by = _as_point(b)
    d2 = (ax - bx) ** 2 + (ay - by) ** 2
    return hyper.signal_variance * math.exp(-d2 / (2.0 * hyper.length_scale**2))


def kernel_matrix(a, b, hyper: Hyperparameters) -> np.ndarray:
    """Cross-covariance matrix between two point sets, shape (len(a), len(b))."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    d2 = cdist(a, b, "sqeuclidean")
    return hyper.signal_variance * np.exp(-d2 / (2.0 * hyper.length_scale**2))


class Posterior:
    """GP posterior over a fixed measurement design.

    Factors the regularized Gram matrix once so that variance and mean
    queries at many points reuse the factorization. The design is the
    expanded multiset: one Gram row per individual measurement.
    """

    def __init__(self, design: np.ndarray, hyper: Hyperparameters):
        self.hyper = hyper
        self.design = np.asarray(design, dtype=float).reshape(-1, 2)
        n = self.design.shape[0]
        if n == 0:
            self._factor = None
            return
        gram = kernel_matrix(self.design, self.design, hyper)
        gram[np.diag_indices_from(gram)] += hyper.noise_variance
        try:
            self._factor = cho_factor(gram, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"Gram factorization failed: {exc}") from exc

    @property
    def size(self) -> int:
        return self.design.shape[0]

    def variance(self, points) -> np.ndarray:
        """Posterior variance at each query point. Values play no role."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        s2 = self.hyper.signal_variance
        if self._factor is None:
            return np.full(pts.shape[0], s2)
        out = np.empty(pts.shape[0])
        lower = self._factor[0]
        for start in range(0, pts.shape[0], _CHUNK):
            block = pts[start : start + _CHUNK]
            kxb = kernel_matrix(self.design, block, self.hyper)
            v = solve_triangular(lower, kxb, lower=True, check_finite=False)
            out[start : start + block.shape[0]] = s2 - np.einsum("ij,ij->j", v, v)
        return np.maximum(out, 0.0)

    def mean(self, points, values) -> np.ndarray:
        """Posterior mean at each query point, zero prior mean."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if self._factor is None:
            return np.zeros(pts.shape[0])
        y = np.asarray(values, dtype=float)
        if y.shape[0] != self.size:
            raise ValueError(f"expected {self.size} values, got {y.shape[0]}")
        alpha = cho_solve(self._factor, y, check_finite=False)
        kxb = kernel_matrix(pts, self.design, self.hyper)
        return kxb @ alpha

    def mean_many(self, points, value_columns: np.ndarray) -> np.ndarray:
        """Posterior means for several value vectors at once.

        ``value_columns`` has one column per realization; the result has
        shape (len(points), n_columns).
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        cols = np.asarray(value_columns, dtype=float)
        if self._factor is None:
            return np.zeros((pts.shape[0], cols.shape[1]))
        alphas = cho_solve(self._factor, cols, check_finite=False)
        kxb = kernel_matrix(pts, self.design, self.hyper)
        return kxb @ alphas


def posterior_variance(x, measurements: MeasurementMultiset, hyper: Hyperparameters) -> float:
    """Posterior variance at ``x`` given a measurement multiset.

    Solves the full expanded system; co-located measurements are handled
    through the Gram matrix like any others. Result lies in
    [0, signal_variance].
    """
    post = Posterior(measurements.expand(), hyper)
    return float(post.variance([_as_point(x)])[0])


def posterior_variance_batch(points, measurements: MeasurementMultiset, hyper: Hyperparameters) -> np.ndarray:
    """Posterior variance at many points with one factorization."""
    return Posterior(measurements.expand(), hyper).variance(points)


def posterior_mean(x, observations, hyper: Hyperparameters) -> float:
    """Posterior mean at ``x`` from observations carrying values.

    The prior mean is zero; center data upstream if it is not already.
    """
    obs = list(observations)
    for o in obs:
        if o.value is None:
            raise ValueError("posterior_mean needs a value on every observation")
    if not obs:
        return 0.0
    design = np.asarray([o.location for o in obs], dtype=float)
    values = np.asarray([o.value for o in obs], dtype=float)
    post = Posterior(design, hyper)
    return float(post.mean([_as_point(x)], values)[0])


def repeated_measurement_variance(distance: float, count: int, hyper: Hyperparameters) -> float:
    """Posterior variance at distance r from n noisy measurements of one spot.

    Closed form of the single-site system:

        s2 * (1 - exp(-r^2 / l^2) / (1 + w2 / (n * s2)))

    Monotonically decreasing in n, increasing in r; as n grows it tends to
    s2 * (1 - exp(-r^2 / l^2)), the noiseless-site floor.
    """
    r = float(distance)
    n = int(count)
    if r < 0.0 or not math.isfinite(r):
        raise ValueError(f"distance must be finite and >= 0, got {r}")
    if n < 1:
        raise ValueError(f"count must be >= 1, got {n}")
    s2, w2, l = hyper.signal_variance, hyper.noise_variance, hyper.length_scale
    corr = math.exp(-(r * r) / (l * l))
    return s2 * (1.0 - corr / (1.0 + w2 / (n * s2)))


def nlml(observations, hyper: Hyperparameters) -> float:
    """Negative log marginal likelihood of valued observations.

    0.5 * (y' K^-1 y + log det K + N log 2pi) with K the regularized Gram
    matrix. Raises on missing values or an empty dataset.
    """
    obs = list(observations)
    if not obs:
        raise ValueError("nlml needs at least one observation")
    for o in obs:
        if o.value is None:
            raise ValueError("nlml needs a value on every observation")
    design = np.asarray([o.location for o in obs], dtype=float)
    y = np.asarray([o.value for o in obs], dtype=float)
    gram = kernel_matrix(design, design, hyper)
    gram[np.diag_indices_from(gram)] += hyper.noise_variance
    try:
        factor = cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Gram factorization failed: {exc}") from exc
    alpha = cho_solve(factor, y, check_finite=False)
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    n = y.shape[0]
    return 0.5 * (float(y @ alpha) + logdet + n * math.log(2.0 * math.pi))


@dataclass(frozen=True)
class HyperparameterGrid:
    """Cartesian search grid over (length_scale, signal_variance, noise_variance)."""

    length_scales: tuple[float, ...]
    signal_variances: tuple[float, ...]
    noise_variances: tuple[float, ...]

    def __post_init__(self):
        for name in ("length_scales", "signal_variances", "noise_variances"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must not be empty")
            if any(not math.isfinite(v) or v <= 0 for v in vals):
                raise ValueError(f"{name} must be finite and > 0")
            object.__setattr__(self, name, vals)

    @classmethod
    def log_spaced(cls, length_scale, signal_variance, noise_variance, num: int = 7):
        """Geometric grids between (lo, hi) bounds per parameter."""

        def geo(lo, hi, n):
            return tuple(np.geomspace(lo, hi, n))

        return cls(
            geo(*length_scale, num),
            geo(*signal_variance, num),
            geo(*noise_variance, num),
        )

    def combinations(self):
        return itertools.product(self.length_scales, self.signal_variances, self.noise_variances)


def fit_hyperparameters(observations, search: HyperparameterGrid) -> Hyperparameters:
    """Exhaustive NLML grid search, first minimum wins ties.

    Needs at least two distinct measurement locations; raises
    DegenerateDataError otherwise. Grid points whose factorization fails
    are skipped.
    """
    obs = list(observations)
    distinct = {o.location for o in obs}
    if len(distinct) < 2:
        raise DegenerateDataError(
            f"fitting needs >= 2 distinct locations, got {len(distinct)}"
        )
    best = None
    best_val = math.inf
    for l, s2, w2 in search.combinations():
        h = Hyperparameters(l, s2, w2)
        try:
            val = nlml(obs, h)
        except NumericalError:
            continue
        if math.isfinite(val) and val < best_val:
            best, best_val = h, val
    if best is None:
        raise NumericalError("no grid point produced a finite NLML")
    return best
