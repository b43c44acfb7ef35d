"""On-disk formats: portable pixmap family codecs, the dataset directory
layout (camera.cfg + frames.csv + images/ + masks/), and model persistence.

Dataset layout::

    camera.cfg            key = value lines: fx, fy, cx, cy, width, height
    frames.csv            frame_id,image_path,roll_rad,pitch_rad,height_m,mask_path
    images/<id>.ppm       8-bit binary color pixmap
    masks/<id>.pgm        graymap with 0 = Floor, 255 = Obstacle, 128 = Ignore

Model files are versioned structured text (`HOBS 1` header, params, then each
tree as a preorder record list); thresholds use full round-trip precision so
save/load reproduces bit-identical predictions.
"""

import csv
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .evaluation import MaskClass
from .forest import ForestParams, Internal, Leaf, RandomForestModel
from .geometry import Attitude, read_camera_config, write_camera_config

MODEL_FORMAT_TAG = "HOBS"
MODEL_FORMAT_VERSION = 1


class DataFormatError(Exception):
    """Malformed or inconsistent on-disk data (images, datasets, models)."""


@dataclass
class Frame:
    """One dataset record: an image plus the attitude that was measured for it."""

    image: np.ndarray  # (h, w, 3) float in [0, 1]
    attitude: Attitude
    frame_id: str
    camera_height: float | None = None
    gt_mask: np.ndarray | None = None  # (h, w) MaskClass codes


def _atomic_write_bytes(path, data: bytes) -> None:
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# portable pixmap family (binary P4 / P5 / P6, 8-bit)

def _parse_pnm_tokens(data: bytes, path, n_tokens: int):
    """Header tokens after the magic, skipping whitespace and # comments.
    Returns (tokens, offset of the raster, which starts one byte after the
    final token)."""
    tokens = []
    i = 2  # past the magic
    while len(tokens) < n_tokens:
        if i >= len(data):
            raise DataFormatError(f"{path}: truncated header")
        c = data[i:i + 1]
        if c == b"#":
            j = data.find(b"\n", i)
            if j < 0:
                raise DataFormatError(f"{path}: truncated header")
            i = j + 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace():
                j += 1
            token = data[i:j]
            if not token.isdigit():
                raise DataFormatError(f"{path}: bad header token {token!r}")
            tokens.append(int(token))
            i = j
    return tokens, i + 1  # single whitespace byte separates header and raster


def _check_magic(data: bytes, path, expected: bytes):
    if data[:2] != expected:
        raise DataFormatError(
            f"{path}: not a {expected.decode()} file (magic {data[:2]!r})")


def read_ppm(path) -> np.ndarray:
    """8-bit binary color pixmap -> uint8 array of shape (h, w, 3)."""
    data = Path(path).read_bytes()
    _check_magic(data, path, b"P6")
    (w, h, maxval), start = _parse_pnm_tokens(data, path, 3)
    if maxval != 255:
        raise DataFormatError(f"{path}: unsupported maxval {maxval}")
    raster = data[start:start + 3 * w * h]
    if len(raster) != 3 * w * h:
        raise DataFormatError(f"{path}: truncated pixel data")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()


def write_ppm(path, pixels: np.ndarray) -> None:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w = pixels.shape[:2]
    _atomic_write_bytes(path, b"P6\n%d %d\n255\n" % (w, h) + pixels.tobytes())


def read_pgm(path) -> np.ndarray:
    """8-bit binary graymap -> uint8 array of shape (h, w)."""
    data = Path(path).read_bytes()
    _check_magic(data, path, b"P5")
    (w, h, maxval), start = _parse_pnm_tokens(data, path, 3)
    if maxval != 255:
        raise DataFormatError(f"{path}: unsupported maxval {maxval}")
    raster = data[start:start + w * h]
    if len(raster) != w * h:
        raise DataFormatError(f"{path}: truncated pixel data")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w).copy()


def write_pgm(path, gray: np.ndarray) -> None:
    gray = np.ascontiguousarray(gray, dtype=np.uint8)
    h, w = gray.shape
    _atomic_write_bytes(path, b"P5\n%d %d\n255\n" % (w, h) + gray.tobytes())


def read_pbm(path) -> np.ndarray:
    """Binary bitmap -> bool array of shape (h, w); a set bit means obstacle."""
    data = Path(path).read_bytes()
    _check_magic(data, path, b"P4")
    (w, h), start = _parse_pnm_tokens(data, path, 2)
    row_bytes = (w + 7) // 8
    raster = data[start:start + row_bytes * h]
    if len(raster) != row_bytes * h:
        raise DataFormatError(f"{path}: truncated pixel data")
    rows = np.frombuffer(raster, dtype=np.uint8).reshape(h, row_bytes)
    return np.unpackbits(rows, axis=1)[:, :w].astype(bool)


def write_pbm(path, bits: np.ndarray) -> None:
    bits = np.ascontiguousarray(bits, dtype=bool)
    h, w = bits.shape
    packed = np.packbits(bits, axis=1)
    _atomic_write_bytes(path, b"P4\n%d %d\n" % (w, h) + packed.tobytes())


_MASK_TO_GRAY = np.array([0, 255, 128], dtype=np.uint8)  # Floor, Obstacle, Ignore


def mask_to_gray(mask: np.ndarray) -> np.ndarray:
    return _MASK_TO_GRAY[np.asarray(mask, dtype=np.uint8)]


def gray_to_mask(gray: np.ndarray, path="mask") -> np.ndarray:
    gray = np.asarray(gray)
    mask = np.empty(gray.shape, dtype=np.uint8)
    known = np.zeros(gray.shape, dtype=bool)
    for cls, value in ((MaskClass.FLOOR, 0), (MaskClass.OBSTACLE, 255),
                       (MaskClass.IGNORE, 128)):
        sel = gray == value
        mask[sel] = cls
        known |= sel
    if not known.all():
        bad = int(gray[~known].ravel()[0])
        raise DataFormatError(f"{path}: unexpected mask value {bad} (want 0/128/255)")
    return mask


# ---------------------------------------------------------------------------
# dataset directory

def load_dataset(directory):
    """Read a dataset directory; returns (frames sorted by frame_id, intrinsics)."""
    directory = Path(directory)
    cfg = directory / "camera.cfg"
    if not cfg.exists():
        raise DataFormatError(f"{directory}: missing camera.cfg")
    try:
        intrinsics = read_camera_config(cfg)
    except ValueError as exc:
        raise DataFormatError(str(exc)) from None

    index = directory / "frames.csv"
    if not index.exists():
        raise DataFormatError(f"{directory}: missing frames.csv")
    frames = []
    with open(index, newline="", encoding="ascii") as f:
        reader = csv.DictReader(f)
        for row_no, row in enumerate(reader, start=2):  # row 1 is the header
            frames.append(_load_frame(directory, intrinsics, row, row_no))
    frames.sort(key=lambda frame: frame.frame_id)
    return frames, intrinsics


def _load_frame(directory, intrinsics, row, row_no) -> Frame:
    def require(column):
        value = (row.get(column) or "").strip()
        if not value:
            raise DataFormatError(f"frames.csv row {row_no}: missing {column}")
        return value

    frame_id = require("frame_id")
    image_path = directory / require("image_path")
    try:
        roll = float(require("roll_rad"))
        pitch = float(require("pitch_rad"))
    except ValueError:
        raise DataFormatError(f"frames.csv row {row_no}: bad attitude number") from None
    height_raw = (row.get("height_m") or "").strip()
    camera_height = float(height_raw) if height_raw else None

    if not image_path.exists():
        raise DataFormatError(f"frames.csv row {row_no}: missing image {image_path}")
    image = read_ppm(image_path).astype(float) / 255.0
    if image.shape[0] != intrinsics.height or image.shape[1] != intrinsics.width:
        raise DataFormatError(
            f"frame {frame_id}: image is {image.shape[1]}x{image.shape[0]}, "
            f"camera.cfg says {intrinsics.width}x{intrinsics.height}")

    gt_mask = None
    mask_raw = (row.get("mask_path") or "").strip()
    if mask_raw:
        mask_path = directory / mask_raw
        if not mask_path.exists():
            raise DataFormatError(f"frames.csv row {row_no}: missing mask {mask_path}")
        gt_mask = gray_to_mask(read_pgm(mask_path), path=mask_path)
        if gt_mask.shape != image.shape[:2]:
            raise DataFormatError(
                f"frame {frame_id}: mask is {gt_mask.shape[1]}x{gt_mask.shape[0]}, "
                f"image is {image.shape[1]}x{image.shape[0]}")

    return Frame(image=image, attitude=Attitude(roll=roll, pitch=pitch),
                 frame_id=frame_id, camera_height=camera_height, gt_mask=gt_mask)


def write_dataset(directory, frames, intrinsics) -> None:
    """Write frames (images as ppm, masks as pgm) plus camera.cfg and frames.csv."""
    directory = Path(directory)
    (directory / "images").mkdir(parents=True, exist_ok=True)
    if any(frame.gt_mask is not None for frame in frames):
        (directory / "masks").mkdir(exist_ok=True)
    write_camera_config(intrinsics, directory / "camera.cfg")

    rows = []
    for frame in frames:
        image_rel = f"images/{frame.frame_id}.ppm"
        write_ppm(directory / image_rel,
                  np.rint(np.clip(frame.image, 0.0, 1.0) * 255.0).astype(np.uint8))
        mask_rel = ""
        if frame.gt_mask is not None:
            mask_rel = f"masks/{frame.frame_id}.pgm"
            write_pgm(directory / mask_rel, mask_to_gray(frame.gt_mask))
        height = "" if frame.camera_height is None else repr(float(frame.camera_height))
        rows.append((frame.frame_id, image_rel, repr(float(frame.attitude.roll)),
                     repr(float(frame.attitude.pitch)), height, mask_rel))

    lines = ["frame_id,image_path,roll_rad,pitch_rad,height_m,mask_path"]
    lines += [",".join(row) for row in rows]
    _atomic_write_bytes(directory / "frames.csv",
                        ("\n".join(lines) + "\n").encode("ascii"))


# ---------------------------------------------------------------------------
# model persistence

def save_model(model: RandomForestModel, path) -> None:
    lines = [
        f"{MODEL_FORMAT_TAG} {MODEL_FORMAT_VERSION}",
        f"n_trees {model.params.n_trees}",
        f"min_samples_leaf {model.params.min_samples_leaf}",
        f"features_per_split {model.params.features_per_split}",
        f"seed {model.params.seed}",
        f"entropy_threshold {float(model.entropy_threshold)!r}",
    ]
    for i, root in enumerate(model.trees):
        records = _tree_records(root)
        lines.append(f"tree {i} {len(records)}")
        lines.extend(records)
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def _tree_records(root):
    records = []
    stack = [root]
    while stack:
        node = stack.pop()
        if isinstance(node, Internal):
            records.append(f"I {node.feature_index} {float(node.threshold)!r}")
            stack.append(node.right)
            stack.append(node.left)
        else:
            records.append(f"L {node.count_above} {node.count_below}")
    return records


def load_model(path) -> RandomForestModel:
    try:
        text = Path(path).read_text(encoding="ascii")
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc}") from None
    lines = text.splitlines()

    def take(i, what):
        if i >= len(lines):
            raise DataFormatError(f"{path}: truncated file, expected {what}")
        return lines[i]

    header = take(0, "header").split()
    if len(header) != 2 or header[0] != MODEL_FORMAT_TAG:
        raise DataFormatError(f"{path}: not a {MODEL_FORMAT_TAG} model file")
    if header[1] != str(MODEL_FORMAT_VERSION):
        raise DataFormatError(f"{path}: unsupported format version {header[1]}")

    fields = {}
    for i, key in enumerate(("n_trees", "min_samples_leaf", "features_per_split",
                             "seed", "entropy_threshold"), start=1):
        parts = take(i, key).split()
        if len(parts) != 2 or parts[0] != key:
            raise DataFormatError(f"{path}: line {i + 1}: expected {key}")
        fields[key] = parts[1]
    try:
        params = ForestParams(n_trees=int(fields["n_trees"]),
                              min_samples_leaf=int(fields["min_samples_leaf"]),
                              features_per_split=int(fields["features_per_split"]),
                              seed=int(fields["seed"]))
        entropy_threshold = float(fields["entropy_threshold"])
    except ValueError as exc:
        raise DataFormatError(f"{path}: bad header value: {exc}") from None

    trees = []
    i = 6
    for t in range(params.n_trees):
        parts = take(i, f"tree {t}").split()
        if len(parts) != 3 or parts[0] != "tree" or parts[1] != str(t):
            raise DataFormatError(f"{path}: line {i + 1}: expected 'tree {t} <count>'")
        n_records = int(parts[2])
        records = [take(i + 1 + k, "tree record") for k in range(n_records)]
        trees.append(_parse_tree(records, path, i + 2))
        i += 1 + n_records
    if i != len(lines):
        raise DataFormatError(f"{path}: trailing data after line {i}")
    return RandomForestModel(params=params, trees=trees,
                             entropy_threshold=entropy_threshold)


def _parse_record(record, path, line_no):
    parts = record.split()
    try:
        if parts[0] == "I" and len(parts) == 3:
            return Internal(feature_index=int(parts[1]), threshold=float(parts[2]))
        if parts[0] == "L" and len(parts) == 3:
            return Leaf(count_above=int(parts[1]), count_below=int(parts[2]))
    except ValueError:
        pass
    raise DataFormatError(f"{path}: line {line_no}: malformed record {record!r}")


def _parse_tree(records, path, first_line_no):
    if not records:
        raise DataFormatError(f"{path}: line {first_line_no}: empty tree")
    root = _parse_record(records[0], path, first_line_no)
    # preorder: fill each internal node left side first via an explicit stack
    stack = [(root, "left")] if isinstance(root, Internal) else []
    for k, record in enumerate(records[1:], start=1):
        if not stack:
            raise DataFormatError(
                f"{path}: line {first_line_no + k}: record after complete tree")
        node = _parse_record(record, path, first_line_no + k)
        parent, side = stack.pop()
        if side == "left":
            parent.left = node
            stack.append((parent, "right"))
        else:
            parent.right = node
        if isinstance(node, Internal):
            stack.append((node, "left"))
    if stack:
        raise DataFormatError(f"{path}: tree starting at line {first_line_no} "
                              "is missing records")
    return root
