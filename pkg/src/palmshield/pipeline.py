"""End-to-end wiring: image -> features -> fused vector -> revocable template.

These helpers glue the per-module pieces together under one PipelineConfig.
Everything is a pure function of (image, config, seed); the only cache is the
tiny MFRAT mask bank, which depends solely on the window size.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import PipelineConfig
from .imaging import as_gray, pad_and_block
from .keypoints import HessianParams, point_feature
from .matching import MatchConfig
from .orientation import FusionParams, build_bank, downsample_codes, orientation_map
from .template import (IomParams, ProjectionBank, RevocableTemplate, fuse,
                       gaussian_bank, iom_hash)


@dataclass(frozen=True)
class Features:
    """Plaintext features of one image: orientation codes and point codes."""

    o: np.ndarray           # (n_cells,) uint8, codes 0..11, row-major cells
    p: np.ndarray           # (m,) uint8 LBP codes, block row-major
    points: np.ndarray      # (m, 2) representative points, for diagnostics
    cell_shape: tuple       # (rows, cols) of the orientation cell grid

    @property
    def pair(self):
        """(O, P) tuple as consumed by the pre-transform matcher."""
        return self.o, self.p


@lru_cache(maxsize=8)
def _mfrat(window: int):
    return build_bank(window)


def extract_features(img: np.ndarray, cfg: PipelineConfig = PipelineConfig()) -> Features:
    """Orientation + point features of one image under a config.

    Non-canonical image sizes are accepted: the block count is recomputed
    from the padded size and a warning flags the mismatch against the
    configured block_count.
    """
    img = as_gray(img)
    grid = pad_and_block(img, cfg.block_size)
    if grid.m != cfg.block_count:
        warnings.warn(
            f"{img.shape[1]}x{img.shape[0]} image yields {grid.m} blocks of "
            f"{cfg.block_size}x{cfg.block_size}; configuration expects "
            f"{cfg.block_count}", stacklevel=2)
    omap = orientation_map(grid.image, _mfrat(cfg.mfrat_window),
                           FusionParams(r=cfg.fusion_r, cyclic_wrap=cfg.cyclic_wrap))
    o = downsample_codes(omap, cfg.cell_size)
    pf = point_feature(grid.image, grid, HessianParams(threshold=cfg.hessian_threshold))
    ph, pw = grid.image.shape
    return Features(o=o, p=pf.codes, points=pf.points,
                    cell_shape=(ph // cfg.cell_size, pw // cfg.cell_size))


def fuse_features(feats: Features, cfg: PipelineConfig = PipelineConfig()) -> np.ndarray:
    return fuse(feats.o, feats.p, cfg.mode)


def template_bank(cfg: PipelineConfig, seed: int, d: int) -> ProjectionBank:
    """Projection bank for a config and seed; d is the fused dimension."""
    return gaussian_bank(IomParams(l=cfg.iom_l, k=cfg.iom_k, seed=seed,
                                   mode=cfg.mode), d)


def enroll(img: np.ndarray, seed: int, cfg: PipelineConfig = PipelineConfig(),
           bank: ProjectionBank | None = None) -> RevocableTemplate:
    """Full pipeline: extract, fuse, hash.  Pass a prebuilt bank to amortize
    generation across many enrollments under the same seed."""
    feats = extract_features(img, cfg)
    c = fuse_features(feats, cfg)
    if bank is None:
        bank = template_bank(cfg, seed, len(c))
    elif bank.seed != seed:
        raise ValueError(f"bank seed {bank.seed:#x} does not match requested {seed:#x}")
    return iom_hash(c, bank)


def match_config(cfg: PipelineConfig, cell_shape: tuple | None = None) -> MatchConfig:
    """MatchConfig for this pipeline; cell_shape is needed when shifts are on."""
    return MatchConfig(w_o=cfg.w_o, shift_radius=cfg.shift_radius,
                       grid_shape=cell_shape if cfg.shift_radius > 0 else None)
