"""Deterministic synthetic scenes: a flat textured ground plane, a sky
gradient, and upright rectangular obstacles standing on the ground, rendered
by per-pixel ray casting with exact ground-truth masks.

Stands in for real driving / flight / office footage: the detector consumes
color and texture statistics, so no lighting or meshes are needed.
"""

from dataclasses import dataclass, replace

import numpy as np

from .datasetio import Frame, write_dataset
from .evaluation import MaskClass
from .geometry import Attitude, CameraIntrinsics, horizon_field, world_up_in_camera

# sky color blends from the bottom value to the top value over this elevation
_SKY_GRADIENT_SPAN_RAD = 0.6

# per-scene stream tags
_STREAM_GROUND = 0
_STREAM_OBSTACLE = 2
_STREAM_JITTER = 3

# obstacle colors separated from the ground green and the sky blues in hue
# AND in value, so no single color channel ever mixes the classes
OBSTACLE_PALETTE = (
    (0.62, 0.20, 0.16),  # brick
    (0.85, 0.50, 0.15),  # orange
    (0.55, 0.35, 0.72),  # violet
    (0.62, 0.62, 0.65),  # light gray
    (0.80, 0.74, 0.28),  # yellow
    (0.12, 0.12, 0.15),  # charcoal
)


@dataclass(frozen=True)
class ObstacleSpec:
    """An upright rectangle standing on the ground, facing the camera heading."""

    offset: float    # lateral ground position, meters (+ right)
    distance: float  # forward ground position, meters
    width: float
    height: float
    color: tuple
    texture_amp: float = 0.03

    def __post_init__(self):
        if self.height <= 0 or self.width <= 0:
            raise ValueError("obstacle width and height must be positive")
        if self.distance <= 0:
            raise ValueError("obstacle distance must be positive")


@dataclass(frozen=True)
class SceneSpec:
    ground_color: tuple = (0.18, 0.42, 0.15)
    ground_texture_amp: float = 0.04
    sky_top: tuple = (0.30, 0.52, 0.92)
    sky_bottom: tuple = (0.74, 0.84, 0.97)
    obstacles: tuple = ()
    camera_height: float = 1.0
    attitude: Attitude = Attitude(0.0, 0.0)
    seed: int = 0
    attitude_jitter_std: float = 0.0
    shade_ramp: float = 0.0  # optional lateral ground darkening, off by default

    def __post_init__(self):
        if self.camera_height <= 0:
            raise ValueError("camera_height must be positive")
        if not 0.0 <= self.shade_ramp < 1.0:
            raise ValueError("shade_ramp must be in [0, 1)")


def default_intrinsics(width: int = 320, height: int = 240) -> CameraIntrinsics:
    """A centered pinhole camera with a ~67 degree horizontal field of view."""
    return CameraIntrinsics(fx=0.75 * width, fy=0.75 * width,
                            cx=(width - 1) / 2.0, cy=(height - 1) / 2.0,
                            width=width, height=height)


def default_scene_spec() -> SceneSpec:
    return SceneSpec(obstacles=(
        ObstacleSpec(offset=0.0, distance=4.0, width=1.2, height=1.7,
                     color=OBSTACLE_PALETTE[0]),
    ))


def render_scene(spec: SceneSpec, intrinsics: CameraIntrinsics,
                 frame_id: str = "frame"):
    """Ray-cast the scene.  Returns (image, mask, frame).

    The mask marks Floor for visible ground, Obstacle for visible obstacle
    surface, and Ignore for sky.  The frame records the true attitude plus
    optional seeded jitter (an IMU measurement stand-in); image and mask are
    always rendered from the true attitude.
    """
    h, w = intrinsics.height, intrinsics.width
    up = world_up_in_camera(spec.attitude)
    elev = horizon_field(intrinsics, spec.attitude).elevation

    x = (np.arange(w, dtype=float) - intrinsics.cx) / intrinsics.fx
    y = (np.arange(h, dtype=float) - intrinsics.cy) / intrinsics.fy
    dx = np.broadcast_to(x[None, :], (h, w))
    dy = np.broadcast_to(y[:, None], (h, w))

    # horizontal forward / right basis shared by all obstacles
    forward = np.array([0.0, 0.0, 1.0]) - up[2] * up
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, up)

    # sky gradient by elevation angle
    t_sky = np.clip(elev / _SKY_GRADIENT_SPAN_RAD, 0.0, 1.0)[..., None]
    sky_bottom = np.asarray(spec.sky_bottom, dtype=float)
    sky_top = np.asarray(spec.sky_top, dtype=float)
    image = sky_bottom + t_sky * (sky_top - sky_bottom)
    mask = np.full((h, w), MaskClass.IGNORE, dtype=np.uint8)

    # ground plane: rays with negative elevation hit it
    ground = elev < 0.0
    ground_rng = np.random.default_rng([spec.seed, _STREAM_GROUND])
    ground_noise = ground_rng.uniform(-spec.ground_texture_amp,
                                      spec.ground_texture_amp, size=(h, w, 3))
    ground_pix = np.asarray(spec.ground_color, dtype=float) + ground_noise
    if spec.shade_ramp > 0.0:
        ramp = 1.0 - spec.shade_ramp * (np.arange(w) / max(w - 1, 1))
        ground_pix = ground_pix * ramp[None, :, None]
    image[ground] = ground_pix[ground]
    mask[ground] = MaskClass.FLOOR

    # obstacles, far to near so nearer ones overwrite
    d_dot_up = dx * up[0] + dy * up[1] + up[2]
    d_dot_fwd = dx * forward[0] + dy * forward[1] + forward[2]
    d_dot_right = dx * right[0] + dy * right[1] + right[2]
    order = sorted(range(len(spec.obstacles)),
                   key=lambda i: -spec.obstacles[i].distance)
    for i in order:
        obs = spec.obstacles[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = obs.distance / d_dot_fwd
        lateral = t * d_dot_right - obs.offset
        vertical = t * d_dot_up + spec.camera_height
        hit = ((d_dot_fwd > 1e-12) & (t > 0)
               & (np.abs(lateral) <= obs.width / 2.0)
               & (vertical >= 0.0) & (vertical <= obs.height))
        if not hit.any():
            continue
        rng = np.random.default_rng([spec.seed, _STREAM_OBSTACLE, i])
        noise = rng.uniform(-obs.texture_amp, obs.texture_amp, size=(h, w, 3))
        image[hit] = np.asarray(obs.color, dtype=float) + noise[hit]
        mask[hit] = MaskClass.OBSTACLE

    np.clip(image, 0.0, 1.0, out=image)

    recorded = spec.attitude
    if spec.attitude_jitter_std > 0.0:
        jitter_rng = np.random.default_rng([spec.seed, _STREAM_JITTER])
        jitter = jitter_rng.normal(0.0, spec.attitude_jitter_std, size=2)
        recorded = Attitude(
            roll=float(np.clip(spec.attitude.roll + jitter[0], -np.pi, np.pi)),
            pitch=float(np.clip(spec.attitude.pitch + jitter[1],
                                -np.pi / 2 + 1e-9, np.pi / 2 - 1e-9)))
    frame = Frame(image=image, attitude=recorded, frame_id=frame_id,
                  camera_height=spec.camera_height, gt_mask=mask)
    return image, mask, frame


def _vary(base: SceneSpec, rng: np.random.Generator) -> SceneSpec:
    """One randomized variation of the base scene: jittered attitude and
    redrawn obstacle placements, sizes, and palette colors."""
    roll = float(base.attitude.roll + rng.uniform(-0.05, 0.05))
    pitch = float(base.attitude.pitch + rng.uniform(-0.05, 0.05))
    n_obstacles = int(rng.integers(1, 4))
    obstacles = []
    for _ in range(n_obstacles):
        distance = float(rng.uniform(3.5, 9.0))
        offset = float(rng.uniform(-2.2, 2.2))
        width = float(rng.uniform(0.5, 1.3))
        height = float(rng.uniform(1.25, 1.8))
        color = np.asarray(OBSTACLE_PALETTE[int(rng.integers(len(OBSTACLE_PALETTE)))])
        color = np.clip(color + rng.uniform(-0.03, 0.03, size=3), 0.05, 0.95)
        obstacles.append(ObstacleSpec(offset=offset, distance=distance,
                                      width=width, height=height,
                                      color=tuple(color)))
    return replace(base, attitude=Attitude(roll=roll, pitch=pitch),
                   obstacles=tuple(obstacles), seed=int(rng.integers(2 ** 32)))


def generate_dataset(directory, n_frames: int, base_spec: SceneSpec,
                     intrinsics: CameraIntrinsics, variation_seed: int | None = 0):
    """Render n_frames seeded variations of base_spec and write them as a
    dataset directory.  variation_seed=None disables variation, producing
    identical frames.  Returns the rendered frames."""
    if n_frames < 2:
        raise ValueError("a dataset needs at least 2 frames")
    frames = []
    for i in range(n_frames):
        if variation_seed is None:
            spec = base_spec
        else:
            spec = _vary(base_spec, np.random.default_rng([variation_seed, i]))
        _, _, frame = render_scene(spec, intrinsics, frame_id=f"{i:04d}")
        frames.append(frame)
    write_dataset(directory, frames, intrinsics)
    return frames
