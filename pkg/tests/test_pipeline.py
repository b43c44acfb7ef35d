import numpy as np
import pytest

from hobs.datasetio import Frame
from hobs.forest import ForestParams, Leaf, RandomForestModel
from hobs.geometry import Attitude, Label
from hobs.pipeline import (ObstacleMap, PipelineConfig, UncertaintyMap,
                           nearest_rank_percentile, self_label, spatial_filter,
                           split_dataset, threshold_map, train_pipeline,
                           uncertainty_map)
from hobs.synthgen import default_intrinsics
from oracles import neighbor_filter

INTR = default_intrinsics(width=30, height=40)  # cy = 19.5: clean 20/20 row split


def two_color_frame(frame_id="f0", noise=None):
    """Sky-blue top half, grass-green bottom half: perfectly color-separable."""
    img = np.empty((40, 30, 3))
    img[:20] = (0.3, 0.5, 0.9)
    img[20:] = (0.2, 0.6, 0.2)
    if noise is not None:
        img = np.clip(img + noise, 0, 1)
    return Frame(image=img, attitude=Attitude(0.0, 0.0), frame_id=frame_id)


def two_color_frames(n):
    rng = np.random.default_rng(100)
    return [two_color_frame(f"f{i}", noise=rng.uniform(-0.02, 0.02, (40, 30, 3)))
            for i in range(n)]


def small_config(**overrides):
    defaults = dict(forest=ForestParams(n_trees=5, min_samples_leaf=5, seed=2),
                    samples_per_frame=300, split_seed=2)
    defaults.update(overrides)
    return PipelineConfig(**defaults)


def test_self_label_all_pixels_zero_attitude():
    frame = two_color_frame()
    X, y = self_label(frame, INTR, n=30 * 40, rng=np.random.default_rng(0))
    assert X.shape == (1200, 13)
    assert int(np.count_nonzero(y == Label.ABOVE)) == 20 * 30  # rows above cy


def test_self_label_horizon_above_image():
    frame = Frame(image=two_color_frame().image, attitude=Attitude(0.0, -1.0),
                  frame_id="down")
    _, y = self_label(frame, INTR, n=500, rng=np.random.default_rng(1))
    assert np.all(y == Label.BELOW)


def test_self_label_deterministic_given_stream():
    frame = two_color_frame()
    Xa, ya = self_label(frame, INTR, 100, np.random.default_rng(7))
    Xb, yb = self_label(frame, INTR, 100, np.random.default_rng(7))
    assert np.array_equal(Xa, Xb) and np.array_equal(ya, yb)


def test_split_dataset_ratios():
    frames = list(range(10))
    train, test = split_dataset(frames, 0.9, split_seed=0)
    assert (len(train), len(test)) == (9, 1)
    assert sorted(train + test) == frames

    train, test = split_dataset([1, 2], 0.9, split_seed=0)
    assert (len(train), len(test)) == (1, 1)  # test side never empty

    with pytest.raises(ValueError):
        split_dataset([1], 0.9, 0)


def test_split_dataset_is_seed_stable():
    frames = list(range(17))
    a = split_dataset(frames, 0.8, split_seed=5)
    b = split_dataset(frames, 0.8, split_seed=5)
    assert a == b
    c = split_dataset(frames, 0.8, split_seed=6)
    assert c != a


def test_nearest_rank_percentile():
    values = np.arange(1, 9, dtype=float)  # 1..8
    assert nearest_rank_percentile(values, 25) == 2.0   # ceil(0.25*8) = 2nd
    assert nearest_rank_percentile(values, 50) == 4.0
    assert nearest_rank_percentile(values, 100) == 8.0  # the maximum
    assert nearest_rank_percentile(values, 1) == 1.0
    assert nearest_rank_percentile([3.3], 25) == 3.3
    with pytest.raises(ValueError):
        nearest_rank_percentile(values, 0)
    with pytest.raises(ValueError):
        nearest_rank_percentile([], 25)


def test_train_pipeline_separable_scene_calibrates_low_threshold():
    model = train_pipeline(two_color_frames(6), INTR, small_config())
    assert model.entropy_threshold < 0.1


def test_train_pipeline_deterministic():
    from hobs.forest import predict_p_below_batch
    frames = two_color_frames(5)
    a = train_pipeline(frames, INTR, small_config())
    b = train_pipeline(frames, INTR, small_config())
    assert a.entropy_threshold == b.entropy_threshold
    queries = np.random.default_rng(3).uniform(0, 1, (30, 13))
    assert np.array_equal(predict_p_below_batch(a, queries),
                          predict_p_below_batch(b, queries))


def test_uncertainty_map_trained_scene():
    frames = two_color_frames(6)
    model = train_pipeline(frames, INTR, small_config())
    umap = uncertainty_map(model, frames[0].image)
    assert (umap.height, umap.width) == (40, 30)
    assert np.all((umap.entropy >= 0) & (umap.entropy <= 1))
    # interior pixels of the training colors classify almost surely
    assert umap.entropy[30, 15] < 0.1
    assert umap.entropy[5, 15] < 0.1


def test_uncertainty_map_pure_leaf_model_is_zero():
    model = RandomForestModel(ForestParams(n_trees=1), [Leaf(0, 20)])
    umap = uncertainty_map(model, two_color_frame().image)
    assert np.all(umap.entropy == 0.0)


def test_threshold_map_strictness():
    umap = UncertaintyMap(np.array([[0.2, 0.64, 0.9]]))
    omap = threshold_map(umap, 0.64)
    assert omap.obstacle.tolist() == [[False, False, True]]
    assert not threshold_map(umap, 1.0).obstacle.any()
    some = UncertaintyMap(np.array([[0.0, 1e-9]]))
    assert threshold_map(some, 0.0).obstacle.tolist() == [[False, True]]
    with pytest.raises(ValueError):
        threshold_map(umap, 1.5)


def test_threshold_map_monotone():
    rng = np.random.default_rng(8)
    umap = UncertaintyMap(rng.uniform(0, 1, (12, 9)))
    low = threshold_map(umap, 0.3).obstacle
    high = threshold_map(umap, 0.6).obstacle
    assert np.all(high <= low)


def test_spatial_filter_examples():
    lone = np.zeros((5, 5), dtype=bool)
    lone[2, 2] = True
    assert not spatial_filter(ObstacleMap(lone)).obstacle.any()

    pair = np.zeros((5, 5), dtype=bool)
    pair[2, 2] = pair[2, 3] = True
    assert np.array_equal(spatial_filter(ObstacleMap(pair)).obstacle, pair)

    plus = np.zeros((5, 5), dtype=bool)
    plus[2, 1:4] = True
    plus[1, 2] = plus[3, 2] = True
    assert np.array_equal(spatial_filter(ObstacleMap(plus)).obstacle, plus)


def test_spatial_filter_single_pass_reads_input_only():
    m = np.zeros((3, 7), dtype=bool)
    m[1, 1] = m[1, 2] = True  # surviving pair
    m[1, 5] = True            # isolated pixel two steps away
    out = spatial_filter(ObstacleMap(m)).obstacle
    assert out[1, 1] and out[1, 2] and not out[1, 5]
    assert out.sum() == 2


def test_spatial_filter_matches_brute_force_and_subset():
    rng = np.random.default_rng(9)
    for _ in range(10):
        m = rng.random((9, 13)) < 0.3
        out = spatial_filter(ObstacleMap(m)).obstacle
        assert np.all(out <= m)  # never adds pixels
        assert out.tolist() == neighbor_filter(m.tolist())


def test_pipeline_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(samples_per_frame=0)
    with pytest.raises(ValueError):
        PipelineConfig(train_fraction=1.0)
    with pytest.raises(ValueError):
        PipelineConfig(threshold_percentile=0.0)
    with pytest.raises(ValueError):
        PipelineConfig(threshold_percentile=101.0)
