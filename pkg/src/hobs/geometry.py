"""Horizon geometry: per-pixel elevation angles, above/below labels, and
flat-ground distance recovery.

Pixel convention: (u, v) with u rightward, v downward, origin at the top-left
corner.  The camera frame is x right, y down, z forward (optical axis).  A
pixel maps to the ray d = ((u - cx)/fx, (v - cy)/fy, 1).

Attitude convention: pitch > 0 tilts the optical axis up, roll rotates about
the optical axis.  Yaw never affects the horizon and is not represented.
"""

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

# Rays closer to horizontal than this are treated as never reaching the
# ground, so single-pixel quantization cannot produce kilometer distances.
HORIZON_EPS_RAD = 1e-6


class Label(IntEnum):
    ABOVE = 0
    BELOW = 1


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


@dataclass(frozen=True)
class Attitude:
    """Camera attitude in radians (roll about the optical axis, pitch up positive)."""

    roll: float
    pitch: float

    def __post_init__(self):
        if not -math.pi <= self.roll <= math.pi:
            raise ValueError(f"roll {self.roll} outside [-pi, pi]")
        if not -math.pi / 2 < self.pitch < math.pi / 2:
            raise ValueError(f"pitch {self.pitch} outside (-pi/2, pi/2)")


def world_up_in_camera(attitude: Attitude) -> np.ndarray:
    """Unit world-up vector expressed in the camera frame.

    Built as R_roll(roll) @ R_pitch(pitch) @ (0, -1, 0), where R_pitch rotates
    about the camera x-axis (signed so that pitching up moves the horizon
    below the principal point) and R_roll about the optical axis.
    """
    p, r = attitude.pitch, attitude.roll
    r_pitch = np.array([
        [1.0, 0.0, 0.0],
        [0.0, math.cos(p), math.sin(p)],
        [0.0, -math.sin(p), math.cos(p)],
    ])
    r_roll = np.array([
        [math.cos(r), -math.sin(r), 0.0],
        [math.sin(r), math.cos(r), 0.0],
        [0.0, 0.0, 1.0],
    ])
    return r_roll @ r_pitch @ np.array([0.0, -1.0, 0.0])


def elevation_at(intrinsics: CameraIntrinsics, attitude: Attitude, u, v):
    """Elevation angle (radians) of the viewing ray through pixel (u, v).

    Positive above the true horizontal plane, negative below.  Accepts scalar
    or array pixel coordinates, which may be fractional.
    """
    up = world_up_in_camera(attitude)
    x = (np.asarray(u, dtype=float) - intrinsics.cx) / intrinsics.fx
    y = (np.asarray(v, dtype=float) - intrinsics.cy) / intrinsics.fy
    dot = x * up[0] + y * up[1] + up[2]
    norm = np.sqrt(x * x + y * y + 1.0)
    return np.arcsin(dot / norm)


@dataclass(frozen=True)
class HorizonField:
    """Per-pixel elevation angles; the label is derived (ties go Below)."""

    elevation: np.ndarray  # (height, width), radians

    @property
    def width(self) -> int:
        return self.elevation.shape[1]

    @property
    def height(self) -> int:
        return self.elevation.shape[0]

    @property
    def below(self) -> np.ndarray:
        """Boolean mask of pixels labeled Below (elevation <= 0)."""
        return self.elevation <= 0.0

    @property
    def above(self) -> np.ndarray:
        return self.elevation > 0.0


def horizon_field(intrinsics: CameraIntrinsics, attitude: Attitude) -> HorizonField:
    """Elevation and above/below label for every pixel of the image."""
    u = np.arange(intrinsics.width, dtype=float)
    v = np.arange(intrinsics.height, dtype=float)
    return HorizonField(elevation_at(intrinsics, attitude, u[None, :], v[:, None]))


def pixel_side(field: HorizonField, u: int, v: int) -> Label:
    """Above/Below label of one pixel; elevation exactly 0 counts as Below."""
    if not (0 <= u < field.width and 0 <= v < field.height):
        raise IndexError(f"pixel ({u}, {v}) outside {field.width}x{field.height} image")
    return Label.BELOW if field.elevation[v, u] <= 0.0 else Label.ABOVE


def ground_distance(elevation, camera_height: float, eps: float = HORIZON_EPS_RAD):
    """Distance along the flat ground to the ray's contact point.

    d = camera_height / tan(-elevation) for rays pointing below the horizon.
    Rays with elevation >= -eps never intersect the ground and report inf.
    Accepts scalar or array elevations.
    """
    if camera_height <= 0:
        raise ValueError("camera_height must be positive")
    if np.ndim(elevation) == 0:
        e = float(elevation)
        if e >= -eps:
            return math.inf
        return camera_height / math.tan(-e)
    elev = np.asarray(elevation, dtype=float)
    out = np.full(elev.shape, np.inf)
    hits = elev < -eps
    out[hits] = camera_height / np.tan(-elev[hits])
    return out


def column_distances(obstacle_map, field: HorizonField, camera_height: float,
                     eps: float = HORIZON_EPS_RAD) -> np.ndarray:
    """Ground distance per image column to the bottommost below-horizon
    obstacle pixel; columns without one report inf (free).

    `obstacle_map` may be a boolean array or any object with an `obstacle`
    attribute holding one.
    """
    mask = np.asarray(getattr(obstacle_map, "obstacle", obstacle_map), dtype=bool)
    if mask.shape != field.elevation.shape:
        raise ValueError(
            f"obstacle map shape {mask.shape} does not match field shape "
            f"{field.elevation.shape}")
    contact = mask & field.below
    distances = np.full(mask.shape[1], np.inf)
    hit_cols = np.nonzero(contact.any(axis=0))[0]
    if hit_cols.size:
        bottom = mask.shape[0] - 1 - np.argmax(contact[::-1, :], axis=0)
        rows = bottom[hit_cols]
        distances[hit_cols] = ground_distance(
            field.elevation[rows, hit_cols], camera_height, eps)
    return distances


_CONFIG_KEYS = ("fx", "fy", "cx", "cy", "width", "height")


def read_camera_config(path) -> CameraIntrinsics:
    """Parse a camera.cfg file of `key = value` lines (fx, fy, cx, cy, width, height)."""
    values = {}
    with open(path, "r", encoding="ascii") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {line_no}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}: line {line_no}: unknown key {key!r}")
            try:
                values[key] = float(raw.strip())
            except ValueError:
                raise ValueError(
                    f"{path}: line {line_no}: bad number {raw.strip()!r}") from None
    missing = [k for k in _CONFIG_KEYS if k not in values]
    if missing:
        raise ValueError(f"{path}: missing keys: {', '.join(missing)}")
    return CameraIntrinsics(
        fx=values["fx"], fy=values["fy"], cx=values["cx"], cy=values["cy"],
        width=int(values["width"]), height=int(values["height"]))


def write_camera_config(intrinsics: CameraIntrinsics, path) -> None:
    lines = [
        f"fx = {intrinsics.fx!r}",
        f"fy = {intrinsics.fy!r}",
        f"cx = {intrinsics.cx!r}",
        f"cy = {intrinsics.cy!r}",
        f"width = {intrinsics.width}",
        f"height = {intrinsics.height}",
    ]
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")
