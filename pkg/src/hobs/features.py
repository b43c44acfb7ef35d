"""Per-pixel appearance features: HSV color, one rotation-invariant uniform
LBP code, and nine Laws texture responses (13 channels total).

All neighborhood operations pad the image by reflection so every pixel gets a
feature vector.
"""

import math
from dataclasses import dataclass

import numpy as np

N_FEATURES = 13

# channel layout of FeatureImage
CH_HUE = 0
CH_SAT = 1
CH_VAL = 2
CH_LBP = 3
CH_LAWS0 = 4

LBP_RADIUS = 3
LBP_POINTS = 24
LBP_NONUNIFORM = 25  # code for patterns with more than 2 transitions

_GRAY_WEIGHTS = (0.299, 0.587, 0.114)

_L3 = np.array([1.0, 2.0, 1.0])
_E3 = np.array([-1.0, 0.0, 1.0])
_S3 = np.array([-1.0, 2.0, -1.0])

# 3x3 kernels as outer products, first factor vertical, second horizontal;
# fixed order L3L3, L3E3, L3S3, E3L3, E3E3, E3S3, S3L3, S3E3, S3S3.
LAWS_NAMES = ("L3L3", "L3E3", "L3S3", "E3L3", "E3E3", "E3S3", "S3L3", "S3E3", "S3S3")
_LAWS_1D = (_L3, _E3, _S3)
LAWS_KERNELS = np.stack([np.outer(a, b) for a in _LAWS_1D for b in _LAWS_1D])


@dataclass(frozen=True)
class FeatureImage:
    """13 per-pixel channels in the layout [H, S, V, LBP/25, Laws 1..9]."""

    channels: np.ndarray  # (height, width, 13)

    @property
    def width(self) -> int:
        return self.channels.shape[1]

    @property
    def height(self) -> int:
        return self.channels.shape[0]

    def as_matrix(self) -> np.ndarray:
        """Feature vectors as an (n_pixels, 13) matrix, row-major pixel order."""
        return self.channels.reshape(-1, N_FEATURES)


def rgb_to_hsv(r, g, b):
    """Hexcone HSV with all components in [0, 1] and hue in [0, 1).

    Achromatic inputs get s = 0 and, by convention, h = 0.  Accepts scalars
    or arrays (broadcast elementwise).
    """
    r = np.asarray(r, dtype=float)
    g = np.asarray(g, dtype=float)
    b = np.asarray(b, dtype=float)
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    spread = maxc - minc
    v = maxc

    s = np.zeros_like(maxc)
    np.divide(spread, maxc, out=s, where=maxc > 0)

    safe = np.where(spread > 0, spread, 1.0)
    h6 = np.where(
        maxc == r, (g - b) / safe,
        np.where(maxc == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0))
    h = np.where(spread > 0, (h6 / 6.0) % 1.0, 0.0)
    # a tiny negative h6 can wrap to exactly 1.0 after the modulo
    h = np.where(h >= 1.0, 0.0, h)
    if h.ndim == 0:
        return float(h), float(s), float(v)
    return h, s, v


def to_gray(image):
    """Rec.601 luma: 0.299 r + 0.587 g + 0.114 b.  Accepts (..., 3) arrays."""
    img = np.asarray(image, dtype=float)
    return (_GRAY_WEIGHTS[0] * img[..., 0]
            + _GRAY_WEIGHTS[1] * img[..., 1]
            + _GRAY_WEIGHTS[2] * img[..., 2])


def _pad_reflect(gray: np.ndarray, margin: int) -> np.ndarray:
    return np.pad(gray, margin, mode="reflect")


def _sample_offsets():
    """The 24 circular sample offsets, snapped to exact integers where the
    angle lands on a pixel center."""
    offsets = []
    for k in range(LBP_POINTS):
        angle = 2.0 * math.pi * k / LBP_POINTS
        du = LBP_RADIUS * math.cos(angle)
        dv = LBP_RADIUS * math.sin(angle)
        if abs(du - round(du)) < 1e-9:
            du = float(round(du))
        if abs(dv - round(dv)) < 1e-9:
            dv = float(round(dv))
        offsets.append((du, dv))
    return tuple(offsets)


_LBP_OFFSETS = _sample_offsets()


def _lerp(a, b, t):
    # exact when a == b, so constant regions interpolate without rounding noise
    return a + t * (b - a)


def _shifted_bilinear(padded, h, w, du, dv):
    """The image sampled at (u + du, v + dv) for all (u, v), from a padded copy."""
    m = LBP_RADIUS
    u0 = math.floor(du)
    v0 = math.floor(dv)
    tu = du - u0
    tv = dv - v0
    tl = padded[m + v0:m + v0 + h, m + u0:m + u0 + w]
    if tu == 0.0 and tv == 0.0:
        return tl
    tr = padded[m + v0:m + v0 + h, m + u0 + 1:m + u0 + 1 + w]
    bl = padded[m + v0 + 1:m + v0 + 1 + h, m + u0:m + u0 + w]
    br = padded[m + v0 + 1:m + v0 + 1 + h, m + u0 + 1:m + u0 + 1 + w]
    top = _lerp(tl, tr, tu)
    bottom = _lerp(bl, br, tu)
    return _lerp(top, bottom, tv)


def _codes_from_bits(bits: np.ndarray) -> np.ndarray:
    """Map circular bit patterns (first axis = the 24 samples) to riu2 codes:
    number of set bits when the pattern has at most 2 transitions, else 25."""
    ones = bits.sum(axis=0, dtype=np.int64)
    transitions = (bits != np.roll(bits, -1, axis=0)).sum(axis=0, dtype=np.int64)
    return np.where(transitions <= 2, ones, LBP_NONUNIFORM)


def lbp_image(gray) -> np.ndarray:
    """Rotation-invariant uniform LBP code (0..25) for every pixel.

    24 samples on a circle of radius 3, bilinear interpolation, bit set when
    sample >= center.
    """
    g = np.asarray(gray, dtype=float)
    h, w = g.shape
    padded = _pad_reflect(g, LBP_RADIUS)
    bits = np.empty((LBP_POINTS, h, w), dtype=bool)
    for k, (du, dv) in enumerate(_LBP_OFFSETS):
        bits[k] = _shifted_bilinear(padded, h, w, du, dv) >= g
    return _codes_from_bits(bits)


def lbp_code(gray, u: int, v: int) -> int:
    """LBP code of a single pixel (same result as lbp_image(gray)[v, u])."""
    g = np.asarray(gray, dtype=float)
    padded = _pad_reflect(g, LBP_RADIUS)
    m = LBP_RADIUS
    center = g[v, u]
    bits = np.empty(LBP_POINTS, dtype=bool)
    for k, (du, dv) in enumerate(_LBP_OFFSETS):
        u0 = math.floor(du)
        v0 = math.floor(dv)
        tu = du - u0
        tv = dv - v0
        if tu == 0.0 and tv == 0.0:
            sample = padded[m + v + v0, m + u + u0]
        else:
            top = _lerp(padded[m + v + v0, m + u + u0],
                        padded[m + v + v0, m + u + u0 + 1], tu)
            bottom = _lerp(padded[m + v + v0 + 1, m + u + u0],
                           padded[m + v + v0 + 1, m + u + u0 + 1], tu)
            sample = _lerp(top, bottom, tv)
        bits[k] = sample >= center
    return int(_codes_from_bits(bits[:, None, None])[0, 0])


def laws_images(gray) -> np.ndarray:
    """All nine Laws responses, shape (h, w, 9), raw cross-correlation."""
    g = np.asarray(gray, dtype=float)
    h, w = g.shape
    padded = _pad_reflect(g, 1)
    out = np.empty((h, w, 9))
    for i, kv in enumerate(_LAWS_1D):
        vert = (kv[0] * padded[0:h, :]
                + kv[1] * padded[1:h + 1, :]
                + kv[2] * padded[2:h + 2, :])
        for j, kh in enumerate(_LAWS_1D):
            out[:, :, 3 * i + j] = (kh[0] * vert[:, 0:w]
                                    + kh[1] * vert[:, 1:w + 1]
                                    + kh[2] * vert[:, 2:w + 2])
    return out


def laws_responses(gray, u: int, v: int) -> np.ndarray:
    """The nine Laws responses at one pixel (matches laws_images(gray)[v, u])."""
    g = np.asarray(gray, dtype=float)
    padded = _pad_reflect(g, 1)
    patch = padded[v:v + 3, u:u + 3]
    return np.array([float(np.sum(k * patch)) for k in LAWS_KERNELS])


def extract_features(image) -> FeatureImage:
    """The full 13-channel feature image for an RGB image with values in [0, 1]."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("expected an RGB image of shape (h, w, 3)")
    if img.shape[0] == 0 or img.shape[1] == 0:
        raise ValueError("image must be non-empty")
    h, w = img.shape[:2]
    hue, sat, val = rgb_to_hsv(img[..., 0], img[..., 1], img[..., 2])
    gray = to_gray(img)
    channels = np.empty((h, w, N_FEATURES))
    channels[..., CH_HUE] = hue
    channels[..., CH_SAT] = sat
    channels[..., CH_VAL] = val
    channels[..., CH_LBP] = lbp_image(gray) / LBP_NONUNIFORM
    channels[..., CH_LAWS0:] = laws_images(gray)
    return FeatureImage(channels)
