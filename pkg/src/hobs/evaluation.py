"""Quantitative evaluation: below-horizon ROC/AUC against ground-truth floor
masks, operating-point lookup, and above/below classification accuracy.
"""

import os
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .features import extract_features
from .forest import predict_p_below_batch
from .geometry import horizon_field


class MaskClass(IntEnum):
    FLOOR = 0
    OBSTACLE = 1
    IGNORE = 2


@dataclass(frozen=True)
class RocCurve:
    """ROC points ordered by decreasing threshold, with +/-inf sentinels, so
    the first point is (0, 0) and the last is (1, 1)."""

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    def points(self):
        return list(zip(self.thresholds.tolist(), self.fpr.tolist(), self.tpr.tolist()))


def roc_from_scores(pos_scores, neg_scores) -> RocCurve:
    """ROC over raw scores: a pixel is predicted positive iff score > threshold.

    Thresholds sweep all distinct scores plus sentinels above the max and
    below the min; AUC is the trapezoidal integral over (fpr, tpr).
    """
    pos = np.asarray(pos_scores, dtype=float).ravel()
    neg = np.asarray(neg_scores, dtype=float).ravel()
    if pos.size == 0 or neg.size == 0:
        raise ValueError("ROC needs at least one positive and one negative score")
    distinct = np.unique(np.concatenate([pos, neg]))[::-1]
    thresholds = np.concatenate([[np.inf], distinct, [-np.inf]])
    pos_sorted = np.sort(pos)
    neg_sorted = np.sort(neg)
    tp = pos.size - np.searchsorted(pos_sorted, thresholds, side="right")
    fp = neg.size - np.searchsorted(neg_sorted, thresholds, side="right")
    tpr = tp / pos.size
    fpr = fp / neg.size
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1])) / 2.0)
    return RocCurve(thresholds=thresholds, fpr=fpr, tpr=tpr, auc=auc)


def roc_below_horizon(uncertainty_maps, masks, fields) -> RocCurve:
    """Below-horizon ROC pooled over frames.

    Only pixels labeled Below by the horizon field and not Ignore in the mask
    contribute; positives are Obstacle pixels, negatives Floor pixels, and
    scores are the raw (pre-filter) entropies.
    """
    pos_parts = []
    neg_parts = []
    for umap, mask, fld in zip(uncertainty_maps, masks, fields):
        entropy = np.asarray(getattr(umap, "entropy", umap), dtype=float)
        mask = np.asarray(mask)
        if entropy.shape != mask.shape or entropy.shape != fld.elevation.shape:
            raise ValueError("uncertainty map, mask and field shapes must match")
        below = fld.below
        pos_parts.append(entropy[below & (mask == MaskClass.OBSTACLE)])
        neg_parts.append(entropy[below & (mask == MaskClass.FLOOR)])
    pos = np.concatenate(pos_parts) if pos_parts else np.empty(0)
    neg = np.concatenate(neg_parts) if neg_parts else np.empty(0)
    if pos.size == 0 or neg.size == 0:
        raise ValueError(
            "need at least one obstacle and one floor pixel below the horizon")
    return roc_from_scores(pos, neg)


def operating_point(curve: RocCurve, threshold: float):
    """(fpr, tpr) achieved by thresholding at the requested value.

    Exact matches return that point; otherwise the point with the largest
    threshold not exceeding the request, which is the obstacle map actually
    produced by `score > threshold`.
    """
    exact = np.nonzero(curve.thresholds == threshold)[0]
    if exact.size:
        i = int(exact[0])
    else:
        at_most = np.nonzero(curve.thresholds <= threshold)[0]
        # thresholds are sorted decreasing and end at -inf, so this is never empty
        i = int(at_most[0])
    return float(curve.fpr[i]), float(curve.tpr[i])


def auc_oracle(pos_scores, neg_scores) -> float:
    """Mann-Whitney statistic by brute force: fraction of (positive, negative)
    pairs ordered correctly, ties counting one half.  Quadratic; used as the
    independent check on the trapezoidal AUC."""
    pos = np.asarray(pos_scores, dtype=float).ravel()
    neg = np.asarray(neg_scores, dtype=float).ravel()
    if pos.size == 0 or neg.size == 0:
        raise ValueError("need at least one positive and one negative score")
    diff = pos[:, None] - neg[None, :]
    wins = np.count_nonzero(diff > 0) + 0.5 * np.count_nonzero(diff == 0)
    return float(wins / (pos.size * neg.size))


def classification_accuracy(model, frames, intrinsics) -> float:
    """Fraction of pixels whose predicted side (p_below >= 0.5) matches the
    geometric horizon-side label, pooled over all pixels of all frames."""
    correct = 0
    total = 0
    for frame in frames:
        feats = extract_features(frame.image)
        p = predict_p_below_batch(model, feats.as_matrix())
        predicted_below = p >= 0.5
        actual_below = horizon_field(intrinsics, frame.attitude).below.ravel()
        correct += int(np.count_nonzero(predicted_below == actual_below))
        total += p.size
    if total == 0:
        raise ValueError("need at least one test frame")
    return correct / total


def write_roc_csv(curve: RocCurve, path) -> None:
    """CSV with header threshold,fpr,tpr and a trailing `# auc=` comment line."""
    lines = ["threshold,fpr,tpr"]
    for t, f, s in zip(curve.thresholds, curve.fpr, curve.tpr):
        lines.append(f"{float(t)!r},{float(f)!r},{float(s)!r}")
    lines.append(f"# auc={float(curve.auc)!r}")
    data = ("\n".join(lines) + "\n").encode("ascii")
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)
