"""Revocable palmprint templates from fused orientation and point features.

Pipeline: MFRAT orientation codes (12 levels via two-direction fusion) and
SURF/LBP fixed-length ordered point codes are fused into one feature vector,
then hashed by seeded index-of-max Gaussian projections into a cancelable
template.  Matching works both on the plaintext features and, positionally,
on the protected templates; the evaluation harness measures EER before and
after protection plus revocability/unlinkability statistics.
"""

from .config import ConfigError, PipelineConfig, format_config, load_config, \
    parse_config
from .evaluation import (Dataset, EvalReport, Protocol, ScoreSet, accuracy_loss,
                         compute_eer, evaluate, gen_scores, report_csv, report_text,
                         revocability_test, roc_points, scan_dataset, timing_report,
                         unlinkability_test)
from .imaging import (BlockCountError, BlockGrid, PgmError, SynthSpec, box_sum,
                      integral_image, load_pgm, pad_and_block, save_pgm, synth_palm,
                      write_synth_dataset)
from .keypoints import (HessianParams, Keypoint, PointFeature, detect_surf,
                        hessian_det_map, lbp_code, point_feature,
                        representative_point)
from .matching import (MatchConfig, SeedMismatchError, angular_dist,
                       index_collision_rate, post_transform_score,
                       pre_transform_score)
from .orientation import (FusionParams, MfratBank, build_bank, downsample_codes,
                          fuse_directions, orientation_map, responses_at)
from .pipeline import (Features, enroll, extract_features, fuse_features,
                       match_config, template_bank)
from .template import (BadMagicError, BadVersionError, IndexRangeError, IomParams,
                       ProjectionBank, RevocableTemplate, TemplateFormatError,
                       TruncatedTemplateError, deserialize, fuse, fused_dim,
                       gaussian_bank, iom_hash, scale_invariance_check, serialize)

__version__ = "0.1.0"
