"""End-to-end feature extraction, fusion and enrollment."""

from dataclasses import replace

import numpy as np
import pytest

from palmshield.config import PipelineConfig
from palmshield.pipeline import (enroll, extract_features, fuse_features,
                                 match_config, template_bank)
from palmshield.template import fused_dim, serialize


def test_extract_feature_shapes(palm_image):
    feats = extract_features(palm_image)
    assert feats.o.shape == (1296,) and feats.o.dtype == np.uint8
    assert feats.p.shape == (36,) and feats.p.dtype == np.uint8
    assert feats.points.shape == (36, 2)
    assert feats.cell_shape == (36, 36)
    assert feats.o.max() <= 11


def test_extract_is_deterministic(palm_image):
    a = extract_features(palm_image)
    b = extract_features(palm_image)
    assert np.array_equal(a.o, b.o)
    assert np.array_equal(a.p, b.p)
    assert np.array_equal(a.points, b.points)


def test_pair_property_matches_fields(palm_image):
    feats = extract_features(palm_image)
    o, p = feats.pair
    assert o is feats.o and p is feats.p


def test_unexpected_size_warns_but_proceeds():
    img = np.full((48, 48), 150, dtype=np.uint8)
    with pytest.warns(UserWarning):
        feats = extract_features(img, PipelineConfig())
    assert feats.o.shape == (144,)
    assert feats.p.shape == (4,)


def test_fused_feature_dimension(palm_image):
    feats = extract_features(palm_image)
    c = fuse_features(feats)
    assert c.shape == (fused_dim(1296, 36, "raw"),) == (1332,)
    cfg = replace(PipelineConfig(), mode="angular")
    assert fuse_features(feats, cfg).shape == (2 * 1296 + 36,)


def test_enroll_serializes_to_contract_size(palm_image):
    t = enroll(palm_image, seed=0xC0FFEE)
    assert t.seed == 0xC0FFEE
    assert (t.l, t.k, t.d) == (420, 50, 1332)
    assert len(serialize(t)) == 868


def test_enroll_is_a_pure_function_of_image_and_seed(palm_image):
    a = enroll(palm_image, seed=5)
    b = enroll(palm_image, seed=5)
    c = enroll(palm_image, seed=6)
    assert a == b
    assert a != c


def test_enroll_with_prebuilt_bank(palm_image):
    cfg = PipelineConfig()
    bank = template_bank(cfg, seed=5, d=1332)
    assert enroll(palm_image, seed=5, bank=bank) == enroll(palm_image, seed=5)
    with pytest.raises(ValueError):
        enroll(palm_image, seed=6, bank=bank)


def test_template_bank_mode_follows_config():
    cfg = replace(PipelineConfig(), mode="angular", iom_l=4, iom_k=2)
    bank = template_bank(cfg, seed=1, d=8)
    assert bank.mode == "angular"
    assert bank.w.shape == (4, 2, 8)


def test_match_config_carries_grid_shape(palm_image):
    cfg = replace(PipelineConfig(), shift_radius=2, w_o=0.7)
    feats = extract_features(palm_image, cfg)
    mc = match_config(cfg, feats.cell_shape)
    assert mc.w_o == 0.7
    assert mc.shift_radius == 2
    assert mc.grid_shape == (36, 36)
