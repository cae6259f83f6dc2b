"""Line-orientation coding with a modified finite Radon transform (MFRAT).

Six discrete line masks at 30-degree steps are slid over the image; palm
lines are dark, so the direction whose mask sum is *smallest* follows the
local line.  When the two smallest responses sit on adjacent directions and
are nearly equal, the true orientation falls between them and the pixel gets
the in-between code, doubling the resolution to twelve levels:

    code 2q       -> direction q alone          (multiples of 30 degrees)
    code 2q + 1   -> fused between q and q+1    (odd multiples of 15 degrees)

Codes live on a circle of period 12 (180 degrees of undirected orientation).
The wrap pair {5, 0} fuses to code 11 only when ``cyclic_wrap`` is enabled;
the default adjacency test is strictly |q_min - q_sec| == 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import as_gray


@dataclass(frozen=True)
class MfratBank:
    """Six centrally-symmetric line masks of p offsets each, one per direction."""

    size: int
    offsets: tuple  # 6 arrays of shape (p, 2), columns (dx, dy)


@dataclass(frozen=True)
class FusionParams:
    """Two-direction fusion controls.

    r is the response-difference threshold in intensity-sum units below which
    adjacent minimum responses are considered equal enough to fuse.
    """

    r: float = 8.0
    cyclic_wrap: bool = False

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"fusion threshold must be >= 0, got {self.r}")


def build_bank(p: int = 13) -> MfratBank:
    """Line masks through the center of a p x p window at angles q*30 degrees.

    Shallow directions (0, 30, 150 degrees) are x-major with dy rounded from
    dx*tan(theta); steep ones are y-major, so every mask has exactly p offsets.
    """
    if p < 5 or p % 2 == 0:
        raise ValueError(f"window size must be odd and >= 5, got {p}")
    half = (p - 1) // 2
    t = np.arange(-half, half + 1, dtype=np.int64)
    masks = []
    for q in range(6):
        theta = np.pi / 6.0 * q
        if q in (0, 1, 5):
            dx, dy = t, np.rint(t * np.tan(theta)).astype(np.int64)
        elif q == 3:
            dx, dy = np.zeros_like(t), t
        else:
            dx, dy = np.rint(t / np.tan(theta)).astype(np.int64), t
        masks.append(np.stack([dx, dy], axis=1))
    return MfratBank(size=p, offsets=tuple(masks))


def responses_at(img: np.ndarray, bank: MfratBank, x: int, y: int) -> np.ndarray:
    """Six int64 mask sums centered on (x, y); off-image reads edge-replicate."""
    img = as_gray(img)
    h, w = img.shape
    out = np.zeros(6, dtype=np.int64)
    for q, mask in enumerate(bank.offsets):
        xs = np.clip(x + mask[:, 0], 0, w - 1)
        ys = np.clip(y + mask[:, 1], 0, h - 1)
        out[q] = img[ys, xs].astype(np.int64).sum()
    return out


def _min_two(f: np.ndarray) -> tuple[int, int]:
    """Indices of the smallest and second-smallest entries, ties to smaller index."""
    q_min = int(np.argmin(f))
    rest = f.astype(np.float64, copy=True)
    rest[q_min] = np.inf
    return q_min, int(np.argmin(rest))


def fuse_directions(responses: np.ndarray, params: FusionParams) -> int:
    """Collapse six responses into one 12-level orientation code.

    Adjacent near-equal minima produce the in-between code q_min + q_sec;
    everything else falls back to 2*q_min.
    """
    f = np.asarray(responses)
    if f.shape != (6,):
        raise ValueError(f"expected 6 responses, got shape {f.shape}")
    q_min, q_sec = _min_two(f)
    wrap_pair = {q_min, q_sec} == {0, 5}
    adjacent = abs(q_min - q_sec) == 1 or (params.cyclic_wrap and wrap_pair)
    if adjacent and float(f[q_sec]) - float(f[q_min]) < params.r:
        return 11 if wrap_pair else q_min + q_sec
    return 2 * q_min


def orientation_map(img: np.ndarray, bank: MfratBank, params: FusionParams) -> np.ndarray:
    """Per-pixel fused orientation codes, vectorized over the whole image.

    Equivalent to fuse_directions(responses_at(...)) at every pixel, including
    the smaller-index tie rules (argmin takes the first occurrence).
    """
    img = as_gray(img)
    h, w = img.shape
    wide = img.astype(np.int64)
    ys = np.arange(h)[:, None]
    xs = np.arange(w)[None, :]
    resp = np.empty((6, h, w), dtype=np.int64)
    for q, mask in enumerate(bank.offsets):
        acc = np.zeros((h, w), dtype=np.int64)
        for dx, dy in mask:
            acc += wide[np.clip(ys + dy, 0, h - 1), np.clip(xs + dx, 0, w - 1)]
        resp[q] = acc

    q_min = resp.argmin(axis=0)
    f_min = resp.min(axis=0)
    np.put_along_axis(resp, q_min[None], np.iinfo(np.int64).max, axis=0)
    q_sec = resp.argmin(axis=0)
    f_sec = resp.min(axis=0)

    wrap_pair = (q_min == 0) & (q_sec == 5) | (q_min == 5) & (q_sec == 0)
    adjacent = np.abs(q_min - q_sec) == 1
    if params.cyclic_wrap:
        adjacent |= wrap_pair
    fused = adjacent & ((f_sec - f_min) < params.r)

    codes = np.where(fused, q_min + q_sec, 2 * q_min)
    codes[fused & wrap_pair] = 11
    return codes.astype(np.uint8)


def downsample_codes(omap: np.ndarray, c: int = 4) -> np.ndarray:
    """One code per c x c cell: the in-cell mode, ties toward the smaller code.

    Returns a flat uint8 vector in row-major cell order; arithmetic averaging
    would be meaningless on the circular code alphabet, so the mode it is.
    """
    omap = np.asarray(omap)
    if omap.ndim != 2:
        raise ValueError(f"expected 2-D code map, got shape {omap.shape}")
    h, w = omap.shape
    if c < 1 or h % c or w % c:
        raise ValueError(f"cell size {c} does not divide {w}x{h}")
    if omap.max() > 11:
        raise ValueError("orientation codes must lie in [0, 11]")
    cells = (omap.reshape(h // c, c, w // c, c)
                 .transpose(0, 2, 1, 3)
                 .reshape(-1, c * c))
    ncells = cells.shape[0]
    # per-cell histogram via one bincount over cell_index*12 + code
    flat = cells.astype(np.int64) + 12 * np.arange(ncells, dtype=np.int64)[:, None]
    hist = np.bincount(flat.ravel(), minlength=12 * ncells).reshape(ncells, 12)
    return hist.argmax(axis=1).astype(np.uint8)
