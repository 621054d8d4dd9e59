"""Synthetic ground-truth fields on dense rectangular grids.

A field stands in for real point measurements: one exact draw from the
zero-mean process on a node grid covering the environment's bounding
box, with bilinear interpolation between nodes.  Planners never see
these values directly; they only get noisy point samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridTooLargeError
from .geometry import Environment
from .gp import Hyperparameters, kernel_matrix

_MAX_EXACT_POINTS = 10_000


@dataclass(frozen=True)
class FieldGrid:
    """Dense field values on a uniform grid, x index first."""

    origin: tuple[float, float]
    spacing: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if not (math.isfinite(self.spacing) and self.spacing > 0.0):
            raise ValueError("spacing must be positive and finite")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.size == 0:
            raise ValueError("values must be a non-empty 2D array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "values", vals)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def points(self) -> np.ndarray:
        """All grid nodes in x-major order, matching ``values.ravel()``."""
        nx, ny = self.values.shape
        xs = self.origin[0] + self.spacing * np.arange(nx)
        ys = self.origin[1] + self.spacing * np.arange(ny)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def value_at(self, points) -> np.ndarray:
        """Bilinear interpolation at each query point.

        Queries must fall inside the node extent (up to a 1e-9 pad for
        points sitting on the far edge).
        """
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        nx, ny = self.values.shape
        u = (pts[:, 0] - self.origin[0]) / self.spacing
        v = (pts[:, 1] - self.origin[1]) / self.spacing
        pad = 1e-9
        if np.any(u < -pad) or np.any(u > nx - 1 + pad) or np.any(v < -pad) or np.any(v > ny - 1 + pad):
            raise ValueError("query point outside the field extent")
        u = np.clip(u, 0.0, nx - 1.0)
        v = np.clip(v, 0.0, ny - 1.0)
        i0 = np.clip(np.floor(u).astype(int), 0, max(nx - 2, 0))
        j0 = np.clip(np.floor(v).astype(int), 0, max(ny - 2, 0))
        i1 = np.minimum(i0 + 1, nx - 1)
        j1 = np.minimum(j0 + 1, ny - 1)
        fu = np.clip(u - i0, 0.0, 1.0)
        fv = np.clip(v - j0, 0.0, 1.0)
        return (
            self.values[i0, j0] * (1.0 - fu) * (1.0 - fv)
            + self.values[i1, j0] * fu * (1.0 - fv)
            + self.values[i0, j1] * (1.0 - fu) * fv
            + self.values[i1, j1] * fu * fv
        )


def _axis_nodes(lo: float, hi: float, spacing: float) -> np.ndarray:
    # one node past the box edge when spacing does not divide the extent,
    # so every point of the environment stays interpolable
    steps = max(1, math.ceil((hi - lo) / spacing - 1e-12))
    return lo + spacing * np.arange(steps + 1)


def sample_gp_field(
    env: Environment, hyper: Hyperparameters, spacing: float, seed: int
) -> FieldGrid:
    """One exact draw of the zero-mean process on a grid covering ``env``.

    Deterministic per seed; stream [seed, 0] is reserved for field
    synthesis, stream [seed, 1, t] for per-trial sensor noise.
    """
    if not (math.isfinite(spacing) and spacing > 0.0):
        raise ValueError("spacing must be positive and finite")
    x0, y0, x1, y1 = env.bounds
    xs = _axis_nodes(x0, x1, spacing)
    ys = _axis_nodes(y0, y1, spacing)
    count = xs.size * ys.size
    if count > _MAX_EXACT_POINTS:
        raise GridTooLargeError(
            f"{count} grid nodes exceed the {_MAX_EXACT_POINTS}-point cap for "
            f"exact sampling; increase spacing"
        )
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])

    rng = np.random.default_rng([seed, 0])
    z = rng.standard_normal(count)
    cov = kernel_matrix(pts, pts, hyper)
    jitter = 1e-10 * hyper.signal_variance
    cov[np.diag_indices_from(cov)] += jitter
    try:
        draw = np.linalg.cholesky(cov) @ z
    except np.linalg.LinAlgError:
        # dense grids make the covariance numerically rank-deficient
        w, vecs = np.linalg.eigh(cov)
        draw = vecs @ (np.sqrt(np.clip(w, 0.0, None)) * z)
    return FieldGrid((float(x0), float(y0)), float(spacing), draw.reshape(xs.size, ys.size))
