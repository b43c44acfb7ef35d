"""Horizon geometry walkthrough.

Projects the horizon for a few camera attitudes, shows the above/below label
map, and recovers metric ground distances under the flat-ground assumption.
Writes label maps to demos/output/.
"""

import math
import os

import numpy as np

from hobs import (Attitude, default_intrinsics, ground_distance, horizon_field,
                  pixel_side, write_pgm)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

intrinsics = default_intrinsics()
print(f"camera: {intrinsics.width}x{intrinsics.height}, "
      f"fx={intrinsics.fx:.0f}, principal point ({intrinsics.cx}, {intrinsics.cy})")

print("\nThe horizon row moves with pitch (cy + fy*tan(pitch)):")
for pitch_deg in (-15, -5, 0, 5, 15):
    pitch = math.radians(pitch_deg)
    row = intrinsics.cy + intrinsics.fy * math.tan(pitch)
    print(f"  pitch {pitch_deg:+3d} deg -> horizon at row {row:7.1f}")

print("\nLabel maps for three attitudes (white = above the horizon):")
for name, attitude in [("level", Attitude(0.0, 0.0)),
                       ("pitched_up", Attitude(0.0, math.radians(10))),
                       ("rolled", Attitude(math.radians(12), 0.0))]:
    field = horizon_field(intrinsics, attitude)
    path = os.path.join(OUT, f"labels_{name}.pgm")
    write_pgm(path, np.where(field.above, 255, 0).astype(np.uint8))
    above_share = field.above.mean()
    print(f"  {name:10s}: {above_share:5.1%} of pixels above -> {path}")

print("\nPixel labels near the level horizon (row", intrinsics.cy, "):")
field = horizon_field(intrinsics, Attitude(0.0, 0.0))
for v in (118, 119, 120, 121):
    print(f"  row {v}: {pixel_side(field, 160, v).name}")

print("\nFlat-ground distance for a 1 m camera height:")
print("  a ray 10 deg below the horizon ->"
      f" {ground_distance(math.radians(-10), 1.0):6.2f} m")
print("  a ray 45 deg below the horizon ->"
      f" {ground_distance(math.radians(-45), 1.0):6.2f} m")
print("  a ray at the horizon            ->"
      f" {ground_distance(0.0, 1.0)} (no ground intersection)")

print("\nPer-row distances straight ahead (column 160):")
for v in (130, 150, 180, 220):
    d = ground_distance(field.elevation[v, 160], 1.0)
    print(f"  row {v}: {d:6.2f} m")
