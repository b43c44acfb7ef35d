"""Per-pixel appearance features on a rendered scene.

Extracts the 13-channel feature image (HSV, LBP code, 9 Laws responses) from
a synthetic view and dumps every channel as a min-max normalized graymap into
demos/output/.
"""

import os

import numpy as np

from hobs import default_intrinsics, default_scene_spec, extract_features, render_scene, write_pgm
from hobs.features import LAWS_NAMES

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

image, mask, frame = render_scene(default_scene_spec(), default_intrinsics())
feats = extract_features(image)
print(f"feature image: {feats.width}x{feats.height} with "
      f"{feats.channels.shape[2]} channels")

names = ["hue", "saturation", "value", "lbp"] + [n.lower() for n in LAWS_NAMES]
for c, name in enumerate(names):
    chan = feats.channels[..., c]
    low, high = chan.min(), chan.max()
    scaled = (chan - low) / (high - low) if high > low else np.zeros_like(chan)
    path = os.path.join(OUT, f"feat_{c:02d}_{name}.pgm")
    write_pgm(path, np.rint(scaled * 255).astype(np.uint8))
    print(f"  channel {c:2d} {name:10s} range [{low:8.3f}, {high:8.3f}] -> {path}")

# the texture channels respond to the noise texture, not to class identity:
# that is exactly why horizon-side learning works on color statistics here
sky = feats.channels[:40]
floor = feats.channels[-40:]
print("\nmean value (V) channel: sky rows "
      f"{sky[..., 2].mean():.3f} vs floor rows {floor[..., 2].mean():.3f}")
print("mean |L3E3| response:  sky rows "
      f"{np.abs(sky[..., 5]).mean():.4f} vs floor rows {np.abs(floor[..., 5]).mean():.4f}")
