"""hobs: self-supervised horizon-side learning for monocular obstacle detection.

A robot that knows its attitude can label every pixel as above or below the
horizon for free.  Training a classifier on those labels makes objects that
straddle the horizon inherently hard to classify, so the classifier's entropy
becomes an obstacle signal; thresholding and filtering it yields obstacle
maps, and a flat-ground assumption turns contact pixels into distances.
"""

from .datasetio import (DataFormatError, Frame, load_dataset, load_model,
                        read_pbm, read_pgm, read_ppm, save_model,
                        write_dataset, write_pbm, write_pgm, write_ppm)
from .evaluation import (MaskClass, RocCurve, auc_oracle,
                         classification_accuracy, operating_point,
                         roc_below_horizon, roc_from_scores, write_roc_csv)
from .features import (FeatureImage, extract_features, laws_images,
                       laws_responses, lbp_code, lbp_image, rgb_to_hsv, to_gray)
from .forest import (ForestParams, Internal, Leaf, RandomForestModel,
                     best_split, binary_entropy, gini, predict_p_below,
                     predict_p_below_batch, train_forest, train_tree)
from .geometry import (Attitude, CameraIntrinsics, HorizonField, Label,
                       column_distances, elevation_at, ground_distance,
                       horizon_field, pixel_side, read_camera_config,
                       write_camera_config)
from .pipeline import (ObstacleMap, PipelineConfig, UncertaintyMap,
                       classification_map, nearest_rank_percentile, self_label,
                       spatial_filter, split_dataset, threshold_map,
                       train_pipeline, uncertainty_map)
from .synthgen import (OBSTACLE_PALETTE, ObstacleSpec, SceneSpec,
                       default_intrinsics, default_scene_spec,
                       generate_dataset, render_scene)

__version__ = "0.1.0"
