"""End-to-end self-supervised pipeline: label pixels by horizon side, train
the forest on pooled per-frame samples, calibrate the entropy threshold, and
turn new images into uncertainty and obstacle maps.

No human labels enter anywhere: the training signal is purely the geometric
above/below-horizon side of each sampled pixel.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .features import extract_features
from .forest import (ForestParams, RandomForestModel, binary_entropy,
                     predict_p_below_batch, train_forest)
from .geometry import CameraIntrinsics, Label, horizon_field

# stream tags under the pipeline's split_seed (the forest uses tag 2)
_STREAM_SPLIT = 0
_STREAM_LABEL = 1


@dataclass(frozen=True)
class PipelineConfig:
    forest: ForestParams = field(default_factory=ForestParams)
    samples_per_frame: int = 1000
    train_fraction: float = 0.9
    threshold_percentile: float = 25.0
    split_seed: int = 0

    def __post_init__(self):
        if self.samples_per_frame < 1:
            raise ValueError("samples_per_frame must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if not 0.0 < self.threshold_percentile <= 100.0:
            raise ValueError("threshold_percentile must be in (0, 100]")
        if self.split_seed < 0:
            raise ValueError("split_seed must be non-negative")


@dataclass(frozen=True)
class UncertaintyMap:
    entropy: np.ndarray  # (height, width) in [0, 1]

    @property
    def width(self) -> int:
        return self.entropy.shape[1]

    @property
    def height(self) -> int:
        return self.entropy.shape[0]


@dataclass(frozen=True)
class ObstacleMap:
    obstacle: np.ndarray  # (height, width) bool

    @property
    def width(self) -> int:
        return self.obstacle.shape[1]

    @property
    def height(self) -> int:
        return self.obstacle.shape[0]


def self_label(frame, intrinsics: CameraIntrinsics, n: int,
               rng: np.random.Generator):
    """Training samples from one frame: features of n pixels drawn uniformly
    without replacement (all pixels when n covers the image), labeled by their
    horizon side.  Returns (X, y)."""
    feats = extract_features(frame.image)
    fld = horizon_field(intrinsics, frame.attitude)
    total = feats.width * feats.height
    if n >= total:
        chosen = np.arange(total)
    else:
        chosen = rng.choice(total, size=n, replace=False)
    X = feats.as_matrix()[chosen]
    y = np.where(fld.below.ravel()[chosen], Label.BELOW, Label.ABOVE).astype(np.uint8)
    return X, y


def split_dataset(frames, train_fraction: float, split_seed: int):
    """Deterministic by-frame shuffle and split; never leaves the test side empty."""
    n = len(frames)
    if n < 2:
        raise ValueError("need at least 2 frames to split")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    rng = np.random.default_rng([split_seed, _STREAM_SPLIT])
    order = rng.permutation(n)
    n_train = min(math.ceil(train_fraction * n), n - 1)
    train = [frames[i] for i in order[:n_train]]
    test = [frames[i] for i in order[n_train:]]
    return train, test


def nearest_rank_percentile(values, q: float) -> float:
    """The q-th percentile as the ceil(q/100 * n)-th smallest value (1-based),
    with no interpolation."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    n = v.size
    if n == 0:
        raise ValueError("percentile of an empty set")
    if not 0.0 < q <= 100.0:
        raise ValueError("percentile must be in (0, 100]")
    if float(q).is_integer():
        rank = -(-int(q) * n // 100)  # exact ceiling for integer percentiles
    else:
        rank = math.ceil(q / 100.0 * n)
    return float(v[min(max(rank, 1), n) - 1])


def train_pipeline(frames, intrinsics: CameraIntrinsics,
                   config: PipelineConfig) -> RandomForestModel:
    """Split, self-label the training frames, train the forest, and calibrate
    the entropy threshold at the configured percentile of the training-sample
    entropies."""
    train_frames, _ = split_dataset(frames, config.train_fraction, config.split_seed)
    xs = []
    ys = []
    for i, frame in enumerate(train_frames):
        rng = np.random.default_rng([config.split_seed, _STREAM_LABEL, i])
        X, y = self_label(frame, intrinsics, config.samples_per_frame, rng)
        xs.append(X)
        ys.append(y)
    X = np.concatenate(xs)
    y = np.concatenate(ys)
    model = train_forest(X, y, config.forest)
    entropies = binary_entropy(predict_p_below_batch(model, X))
    model.entropy_threshold = nearest_rank_percentile(
        entropies, config.threshold_percentile)
    return model


def uncertainty_map(model: RandomForestModel, image) -> UncertaintyMap:
    """Per-pixel binary entropy of the forest's predicted class distribution."""
    feats = extract_features(image)
    p = predict_p_below_batch(model, feats.as_matrix())
    return UncertaintyMap(binary_entropy(p).reshape(feats.height, feats.width))


def classification_map(model: RandomForestModel, image) -> np.ndarray:
    """Boolean per-pixel map of the predicted side (True = Below, p >= 0.5)."""
    feats = extract_features(image)
    p = predict_p_below_batch(model, feats.as_matrix())
    return (p >= 0.5).reshape(feats.height, feats.width)


def threshold_map(umap: UncertaintyMap, threshold: float) -> ObstacleMap:
    """Obstacle when entropy is strictly greater than the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    entropy = np.asarray(getattr(umap, "entropy", umap), dtype=float)
    return ObstacleMap(entropy > threshold)


def spatial_filter(omap: ObstacleMap) -> ObstacleMap:
    """Single pass over the input map: an obstacle pixel survives iff at least
    one of its 8-connected in-bounds neighbors is an obstacle in the input."""
    m = np.asarray(getattr(omap, "obstacle", omap), dtype=bool)
    padded = np.pad(m.astype(np.uint8), 1)
    h, w = m.shape
    neighbor_count = np.zeros((h, w), dtype=np.uint8)
    for dv in (-1, 0, 1):
        for du in (-1, 0, 1):
            if dv == 0 and du == 0:
                continue
            neighbor_count += padded[1 + dv:1 + dv + h, 1 + du:1 + du + w]
    return ObstacleMap(m & (neighbor_count >= 1))
