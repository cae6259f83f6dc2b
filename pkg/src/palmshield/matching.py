"""Similarity scoring before and after the irreversible transform.

Pre-transform scores compare the plaintext features positionally: circular
angular distance over the orientation codes, Hamming distance over the LBP
codes, blended by an orientation weight.  Post-transform scores compare
revocable templates by index agreement and refuse cross-seed comparisons —
those are meaningless as identity evidence and only show up legitimately in
revocability measurements, which call the unchecked variant explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .template import RevocableTemplate


class SeedMismatchError(ValueError):
    """Comparing templates hashed under different seeds (or parameters)."""


@dataclass(frozen=True)
class MatchConfig:
    """Orientation weight and optional cell-grid shift search radius.

    shift_radius > 0 requires grid_shape = (rows, cols) of the orientation
    cell grid so the flat feature can be shifted spatially.
    """

    w_o: float = 0.5
    shift_radius: int = 0
    grid_shape: tuple | None = None

    def __post_init__(self):
        if not 0.0 <= self.w_o <= 1.0:
            raise ValueError(f"orientation weight must be in [0,1], got {self.w_o}")
        if self.shift_radius < 0:
            raise ValueError(f"shift radius must be >= 0, got {self.shift_radius}")
        if self.shift_radius > 0 and self.grid_shape is None:
            raise ValueError("shift search needs grid_shape=(rows, cols)")


_POPCOUNT = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint8)


def angular_dist(a, b):
    """Circular distance between 12-level codes: min(|a-b|, 12-|a-b|), in [0,6]."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size and (a.min() < 0 or a.max() > 11) or b.size and (b.min() < 0 or b.max() > 11):
        raise ValueError("codes must lie in [0, 11]")
    diff = np.abs(a - b)
    return np.minimum(diff, 12 - diff)


def _orientation_similarity(o1: np.ndarray, o2: np.ndarray, cfg: MatchConfig) -> float:
    if cfg.shift_radius == 0:
        return 1.0 - float(angular_dist(o1, o2).mean()) / 6.0
    rows, cols = cfg.grid_shape
    if rows * cols != len(o1):
        raise ValueError(f"grid {rows}x{cols} does not match feature length {len(o1)}")
    g1 = o1.reshape(rows, cols)
    g2 = o2.reshape(rows, cols)
    best = -1.0
    rad = cfg.shift_radius
    for dy in range(-rad, rad + 1):
        for dx in range(-rad, rad + 1):
            a = g1[max(dy, 0):rows + min(dy, 0), max(dx, 0):cols + min(dx, 0)]
            b = g2[max(-dy, 0):rows + min(-dy, 0), max(-dx, 0):cols + min(-dx, 0)]
            if a.size == 0:
                continue
            best = max(best, 1.0 - float(angular_dist(a, b).mean()) / 6.0)
    return best


def pre_transform_score(f1, f2, cfg: MatchConfig = MatchConfig()) -> float:
    """Blend of positional orientation and point similarities, in [0, 1].

    f1, f2 are (O, P) pairs of equal lengths.  With a shift radius the
    orientation similarity is the best over all cell shifts within the
    radius, positions without overlap excluded from the mean.
    """
    o1, p1 = (np.asarray(v).ravel() for v in f1)
    o2, p2 = (np.asarray(v).ravel() for v in f2)
    if len(o1) != len(o2) or len(p1) != len(p2):
        raise ValueError(f"feature lengths differ: O {len(o1)}/{len(o2)}, "
                         f"P {len(p1)}/{len(p2)}")
    s_o = _orientation_similarity(o1, o2, cfg)
    ham = _POPCOUNT[np.bitwise_xor(p1.astype(np.uint8), p2.astype(np.uint8))]
    s_p = 1.0 - float(ham.mean()) / 8.0
    return cfg.w_o * s_o + (1.0 - cfg.w_o) * s_p


def index_collision_rate(t1: RevocableTemplate, t2: RevocableTemplate) -> float:
    """Fraction of agreeing hash positions with NO seed check.

    Only meaningful inside revocability/unlinkability measurements; use
    post_transform_score for identity decisions.
    """
    if (t1.l, t1.k) != (t2.l, t2.k):
        raise ValueError(f"templates have different shapes: "
                         f"(l,k)=({t1.l},{t1.k}) vs ({t2.l},{t2.k})")
    return float(np.mean(t1.indices == t2.indices))


def post_transform_score(t1: RevocableTemplate, t2: RevocableTemplate) -> float:
    """Fraction of agreeing hash positions between same-seed templates."""
    if t1.seed != t2.seed:
        raise SeedMismatchError(
            f"templates hashed under different seeds ({t1.seed:#x} vs {t2.seed:#x}); "
            "cross-seed scores are not identity evidence")
    if (t1.l, t1.k, t1.d, t1.mode) != (t2.l, t2.k, t2.d, t2.mode):
        raise SeedMismatchError(
            f"template parameters differ: (l,k,d,mode)=({t1.l},{t1.k},{t1.d},{t1.mode}) "
            f"vs ({t2.l},{t2.k},{t2.d},{t2.mode})")
    return index_collision_rate(t1, t2)
