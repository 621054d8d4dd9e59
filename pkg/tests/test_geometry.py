from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import cKDTree

from fieldcover.geometry import (
    Disk,
    Environment,
    cover_disk_lawnmower,
    cover_environment,
    disks_intersect,
    greedy_mis,
    mis_tour_lower_bound,
)


def star_polygon(seed: int, n: int = 8) -> Environment:
    """Random star-shaped polygon around the origin; always simple.

    Jittered even angular spacing keeps every gap under pi, which keeps
    the origin in the kernel and the boundary free of crossings.
    """
    rng = np.random.default_rng(seed)
    angles = 2 * math.pi * (np.arange(n) + rng.uniform(0.15, 0.85, size=n)) / n
    radii = rng.uniform(5.0, 20.0, size=n)
    verts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    return Environment.polygon(verts)


def test_rectangle_validation():
    with pytest.raises(ValueError):
        Environment.rectangle((0, 0), (0, 5))
    with pytest.raises(ValueError):
        Environment.rectangle((0, 0), (5, float("nan")))


def test_rectangle_contains_boundary():
    env = Environment.rectangle((0, 0), (10, 4))
    inside = env.contains([(0, 0), (10, 4), (5, 2), (10, 0)])
    assert inside.all()
    outside = env.contains([(10.001, 2), (-0.001, 2), (5, 4.001)])
    assert not outside.any()


def test_polygon_rejects_bowtie_and_flat():
    with pytest.raises(ValueError):
        Environment.polygon([(0, 0), (2, 2), (2, 0), (0, 2)])
    with pytest.raises(ValueError):
        Environment.polygon([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(ValueError):
        Environment.polygon([(0, 0), (1, 0)])


def test_polygon_orientation_normalized():
    cw = Environment.polygon([(0, 0), (0, 4), (4, 4), (4, 0)])
    assert cw.area == pytest.approx(16.0)
    assert cw.contains_point((2, 2))


def test_polygon_concavity():
    # L shape: the notch quadrant is outside.
    env = Environment.polygon([(0, 0), (4, 0), (4, 2), (2, 2), (2, 4), (0, 4)])
    assert env.contains_point((1, 3))
    assert env.contains_point((3, 1))
    assert not env.contains_point((3, 3))
    assert env.contains_point((2, 2))
    assert env.contains_point((3, 2))


def test_polygon_boundary_counts_inside():
    env = Environment.polygon([(0, 0), (6, 0), (3, 6)])
    assert env.contains_point((3, 0))
    assert env.contains_point((0, 0))
    assert env.contains_point((4.5, 3.0))


def test_environment_diameter():
    env = Environment.rectangle((0, 0), (3, 4))
    assert env.diameter == pytest.approx(5.0)


def test_grid_includes_far_edges():
    env = Environment.rectangle((0, 0), (100, 100))
    pts = env.grid(30.0)
    xs = np.unique(pts[:, 0])
    assert xs[0] == 0.0 and xs[-1] == 100.0
    assert pts.shape == (25, 2)
    exact = env.grid(10.0)
    assert exact.shape == (121, 2)


def test_grid_respects_polygon():
    env = Environment.polygon([(0, 0), (10, 0), (0, 10)])
    pts = env.grid(1.0)
    assert env.contains(pts).all()
    assert not np.any((pts[:, 0] + pts[:, 1]) > 10.0 + 1e-9)


def test_nearest_point_rectangle_clamps():
    env = Environment.rectangle((0, 0), (10, 10))
    assert env.nearest_point((-3, 5)) == (0.0, 5.0)
    assert env.nearest_point((12, 14)) == (10.0, 10.0)
    assert env.nearest_point((4, 4)) == (4.0, 4.0)


def test_nearest_point_polygon():
    env = Environment.polygon([(0, 0), (4, 0), (4, 4), (0, 4)])
    assert env.nearest_point((2, 2)) == (2.0, 2.0)
    nx, ny = env.nearest_point((2, 7))
    assert (nx, ny) == pytest.approx((2.0, 4.0))


def test_disk_validation():
    with pytest.raises(ValueError):
        Disk((0, 0), 0.0)
    with pytest.raises(ValueError):
        Disk((float("inf"), 0), 1.0)


def test_disks_intersect_tangent_counts():
    a = Disk((0, 0), 1.0)
    assert disks_intersect(a, Disk((2.0, 0), 1.0))
    assert disks_intersect(a, Disk((1.5, 0), 1.0))
    assert not disks_intersect(a, Disk((2.1, 0), 1.0))


def test_cover_single_square_env():
    side = 10.0 * math.sqrt(2.0)
    env = Environment.rectangle((0, 0), (side, side))
    disks = cover_environment(env, 10.0)
    assert len(disks) == 1
    assert disks[0].center == pytest.approx((side / 2, side / 2))
    pts = env.grid(0.5)
    assert disks[0].contains(pts).all()


def test_cover_100x100_by_radius_10():
    env = Environment.rectangle((0, 0), (100, 100))
    disks = cover_environment(env, 10.0)
    centers = np.array([d.center for d in disks])
    pts = env.grid(0.5)
    dist, _ = cKDTree(centers).query(pts)
    assert dist.max() <= 10.0 + 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_cover_polygon_property(seed):
    env = star_polygon(seed)
    radius = 4.0
    disks = cover_environment(env, radius)
    centers = np.array([d.center for d in disks])
    pts = env.grid(env.diameter / 60.0)
    dist, _ = cKDTree(centers).query(pts)
    assert dist.max() <= radius + 1e-9


def test_mis_disjoint_input_unchanged():
    disks = [Disk((0, 0), 1.0), Disk((5, 0), 1.0), Disk((0, 5), 1.0)]
    assert set(greedy_mis(disks)) == set(disks)


def test_mis_three_collinear():
    a, b, c = Disk((0, 0), 1.0), Disk((1.5, 0), 1.0), Disk((3.0, 0), 1.0)
    assert greedy_mis([b, c, a]) == [a, c]


def test_mis_clique_collapses():
    disks = [Disk((0.1 * i, 0), 1.0) for i in range(5)]
    assert len(greedy_mis(disks)) == 1


def test_mis_mixed_radii_rejected():
    with pytest.raises(ValueError):
        greedy_mis([Disk((0, 0), 1.0), Disk((5, 0), 2.0)])


def test_mis_on_cover_grid_takes_alternate_rows_and_cols():
    # sqrt(2)-spaced grid: diagonal neighbours are exactly tangent, so a
    # kept disk blocks all eight neighbours.
    s = math.sqrt(2.0)
    disks = [Disk((i * s, j * s), 1.0) for i in range(4) for j in range(4)]
    mis = greedy_mis(disks)
    centers = {d.center for d in mis}
    assert len(mis) == 4
    assert centers == {(i * s, j * s) for i in (0, 2) for j in (0, 2)}


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_mis_properties_random(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 20, size=(rng.integers(1, 30), 2))
    disks = [Disk(tuple(p), 1.5) for p in pts]
    mis = greedy_mis(disks)
    for i, a in enumerate(mis):
        for b in mis[i + 1 :]:
            assert not disks_intersect(a, b)
    for d in disks:
        assert any(disks_intersect(d, m) for m in mis)
    shuffled = list(disks)
    rng.shuffle(shuffled)
    assert greedy_mis(shuffled) == mis


def test_lawnmower_degenerate_single_point():
    assert cover_disk_lawnmower(Disk((3, 4), 2.0), 2.0) == [(3.0, 4.0)]
    assert cover_disk_lawnmower(Disk((3, 4), 2.0), 5.0) == [(3.0, 4.0)]


def test_lawnmower_boustrophedon_order():
    # 2x2 grid, no projection: row 0 left-to-right, row 1 right-to-left.
    pts = cover_disk_lawnmower(Disk((0, 0), 1.0), 0.9)
    h = 0.9 * math.sqrt(2.0) / 2.0
    expected = [(-h, -h), (h, -h), (h, h), (-h, h)]
    assert np.allclose(pts, expected)


def test_lawnmower_alpha2_count_and_coverage():
    big = Disk((0, 0), 3.0)
    small = 0.5
    pts = np.array(cover_disk_lawnmower(big, small))
    assert len(pts) <= math.ceil(2 * 3.0 / (small * math.sqrt(2))) ** 2 == 81
    assert big.contains(pts).all()
    xs = np.arange(-3.0, 3.0 + 0.005, 0.01)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    grid = grid[(grid**2).sum(axis=1) <= 9.0]
    dist, _ = cKDTree(pts).query(grid)
    assert dist.max() <= small * (1.0 + 1e-9)


@settings(max_examples=20, deadline=None)
@given(
    cx=st.floats(min_value=-50, max_value=50, allow_nan=False),
    cy=st.floats(min_value=-50, max_value=50, allow_nan=False),
)
def test_lawnmower_count_translation_invariant(cx, cy):
    base = cover_disk_lawnmower(Disk((0, 0), 3.0), 0.5)
    moved = cover_disk_lawnmower(Disk((cx, cy), 3.0), 0.5)
    assert len(moved) == len(base)


def test_lawnmower_coverage_random_ratios():
    rng = np.random.default_rng(99)
    for _ in range(10):
        big_r = rng.uniform(1.0, 10.0)
        small = big_r * rng.uniform(0.1, 0.95)
        big = Disk(tuple(rng.uniform(-5, 5, 2)), big_r)
        pts = np.array(cover_disk_lawnmower(big, small))
        grid_sp = big_r / 40.0
        xs = np.arange(big.center[0] - big_r, big.center[0] + big_r + grid_sp / 2, grid_sp)
        ys = np.arange(big.center[1] - big_r, big.center[1] + big_r + grid_sp / 2, grid_sp)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        grid = np.column_stack([gx.ravel(), gy.ravel()])
        keep = (grid[:, 0] - big.center[0]) ** 2 + (grid[:, 1] - big.center[1]) ** 2 <= big_r**2
        dist, _ = cKDTree(pts).query(grid[keep])
        assert dist.max() <= small * (1.0 + 1e-9)


def test_mis_tour_lower_bound_values():
    assert mis_tour_lower_bound([Disk((0, 0), 1.0)]) == pytest.approx(0.24)
    tens = [Disk((11.0 * i, 0), 5.0) for i in range(10)]
    assert mis_tour_lower_bound(tens) == pytest.approx(12.0)
    assert mis_tour_lower_bound([]) == 0.0


def test_mis_tour_lower_bound_rejects_bad_sets():
    with pytest.raises(ValueError):
        mis_tour_lower_bound([Disk((0, 0), 1.0), Disk((1, 0), 1.0)])
    with pytest.raises(ValueError):
        mis_tour_lower_bound([Disk((0, 0), 1.0), Disk((9, 0), 2.0)])


def test_cover_then_mis_serves_every_point_within_3r():
    for env in (Environment.rectangle((0, 0), (57, 43)), star_polygon(5)):
        radius = 4.0
        mis = greedy_mis(cover_environment(env, radius))
        centers = np.array([d.center for d in mis])
        pts = env.grid(env.diameter / 80.0)
        dist, _ = cKDTree(centers).query(pts)
        assert dist.max() <= 3.0 * radius + 1e-9
