import math

import numpy as np
import pytest

from hobs.geometry import (Attitude, CameraIntrinsics, Label, column_distances,
                           elevation_at, ground_distance, horizon_field,
                           pixel_side, read_camera_config, write_camera_config)

INTR = CameraIntrinsics(fx=100.0, fy=100.0, cx=120.0, cy=120.0, width=240, height=240)


def solve_horizon_row(intrinsics, attitude, u, lo, hi):
    """Bisect the continuous elevation field for its zero crossing in v."""
    assert elevation_at(intrinsics, attitude, u, lo) > 0
    assert elevation_at(intrinsics, attitude, u, hi) < 0
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if elevation_at(intrinsics, attitude, u, mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def test_horizon_through_principal_point():
    field = horizon_field(INTR, Attitude(0.0, 0.0))
    for u in (0, 77, 239):
        assert pixel_side(field, u, 119) == Label.ABOVE
        assert pixel_side(field, u, 120) == Label.BELOW  # tie at cy goes Below
    assert field.below.sum(axis=0).min() == 120


def test_horizon_row_matches_closed_form():
    att = Attitude(0.0, math.atan(0.5))
    expected = INTR.cy + INTR.fy * math.tan(att.pitch)
    assert expected == pytest.approx(170.0)
    for u in (0.0, 60.0, 120.0, 239.0):
        solved = solve_horizon_row(INTR, att, u, 0.0, 239.0)
        assert solved == pytest.approx(expected, abs=1e-6)
    field = horizon_field(INTR, att)
    assert pixel_side(field, 10, 171) == Label.BELOW
    assert pixel_side(field, 10, 169) == Label.ABOVE


def test_horizon_row_random_pitches():
    rng = np.random.default_rng(42)
    for _ in range(25):
        pitch = float(rng.uniform(-0.6, 0.6))
        expected = INTR.cy + INTR.fy * math.tan(pitch)
        solved = solve_horizon_row(INTR, Attitude(0.0, pitch), 40.0,
                                   expected - 30.0, expected + 30.0)
        assert solved == pytest.approx(expected, abs=1e-6)


def test_upside_down_roll_flips_labels():
    # sin(pi) rounds to ~1.2e-16, so the exact horizon row itself is noisy
    # under roll=pi; every other row must flip cleanly
    normal = horizon_field(INTR, Attitude(0.0, 0.0))
    flipped = horizon_field(INTR, Attitude(math.pi, 0.0))
    rows = [v for v in range(240) if v != 120]
    for v in rows:
        assert np.all(flipped.below[v] != normal.below[v])


def test_roll_negation_mirrors_labels():
    intr = CameraIntrinsics(fx=90.0, fy=80.0, cx=(64 - 1) / 2.0, cy=23.0,
                            width=64, height=48)
    rng = np.random.default_rng(3)
    for _ in range(20):
        roll = float(rng.uniform(-1.5, 1.5))
        pitch = float(rng.uniform(-0.5, 0.5))
        pos = horizon_field(intr, Attitude(roll, pitch))
        neg = horizon_field(intr, Attitude(-roll, pitch))
        assert np.array_equal(neg.below, pos.below[:, ::-1])


def test_elevation_strictly_decreasing_down_columns():
    rng = np.random.default_rng(11)
    for _ in range(10):
        pitch = float(rng.uniform(-0.45, 0.45))
        field = horizon_field(INTR, Attitude(0.0, pitch))
        assert np.all(np.diff(field.elevation, axis=0) < 0)


def test_field_is_pure_function_of_attitude():
    a = horizon_field(INTR, Attitude(0.3, -0.2))
    b = horizon_field(INTR, Attitude(0.3, -0.2))
    assert np.array_equal(a.elevation, b.elevation)


def test_pixel_side_bounds():
    field = horizon_field(INTR, Attitude(0.0, 0.0))
    with pytest.raises(IndexError):
        pixel_side(field, 240, 10)
    with pytest.raises(IndexError):
        pixel_side(field, 0, -1)


def test_ground_distance_closed_forms():
    assert ground_distance(-math.atan(0.5), 1.0) == pytest.approx(2.0, abs=1e-12)
    assert ground_distance(-math.pi / 4, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert ground_distance(0.1, 1.0) == math.inf
    assert ground_distance(0.0, 1.0) == math.inf
    assert ground_distance(-1e-9, 1.0) == math.inf  # inside the horizon epsilon
    assert ground_distance(-0.5, 2.0) == pytest.approx(2.0 / math.tan(0.5))


def test_ground_distance_validation_and_monotonicity():
    with pytest.raises(ValueError):
        ground_distance(-0.5, 0.0)
    elevations = -np.linspace(0.05, 1.4, 40)
    distances = ground_distance(elevations, 1.3)
    assert np.all(np.diff(distances) < 0)  # steeper rays land closer


def test_column_distances_composition():
    field = horizon_field(INTR, Attitude(0.0, 0.0))
    empty = np.zeros((240, 240), dtype=bool)
    assert np.all(np.isinf(column_distances(empty, field, 1.0)))

    single = empty.copy()
    single[200, 5] = True
    dists = column_distances(single, field, 1.0)
    assert dists[5] == ground_distance(field.elevation[200, 5], 1.0)
    assert np.all(np.isinf(np.delete(dists, 5)))

    # bottom-most pixel wins within a column
    stacked = empty.copy()
    stacked[150, 7] = True
    stacked[210, 7] = True
    assert column_distances(stacked, field, 1.0)[7] == \
        ground_distance(field.elevation[210, 7], 1.0)

    above_only = empty.copy()
    above_only[40, :] = True  # above the horizon row
    assert np.all(np.isinf(column_distances(above_only, field, 1.0)))


def test_column_distances_shape_mismatch():
    field = horizon_field(INTR, Attitude(0.0, 0.0))
    with pytest.raises(ValueError):
        column_distances(np.zeros((10, 10), dtype=bool), field, 1.0)


def test_attitude_and_intrinsics_validation():
    with pytest.raises(ValueError):
        Attitude(4.0, 0.0)
    with pytest.raises(ValueError):
        Attitude(0.0, math.pi / 2)
    with pytest.raises(ValueError):
        CameraIntrinsics(fx=-1, fy=1, cx=0, cy=0, width=10, height=10)
    with pytest.raises(ValueError):
        CameraIntrinsics(fx=1, fy=1, cx=20, cy=0, width=10, height=10)


def test_camera_config_roundtrip(tmp_path):
    intr = CameraIntrinsics(fx=240.0, fy=240.0, cx=159.5, cy=119.5,
                            width=320, height=240)
    path = tmp_path / "camera.cfg"
    write_camera_config(intr, path)
    assert read_camera_config(path) == intr


def test_camera_config_errors(tmp_path):
    path = tmp_path / "camera.cfg"
    path.write_text("fx = 100\nfy = 100\ncx = 10\ncy = 10\nwidth = 64\n")
    with pytest.raises(ValueError, match="height"):
        read_camera_config(path)
    path.write_text("fx = banana\n")
    with pytest.raises(ValueError, match="bad number"):
        read_camera_config(path)
    path.write_text("zoom = 2\n")
    with pytest.raises(ValueError, match="unknown key"):
        read_camera_config(path)
