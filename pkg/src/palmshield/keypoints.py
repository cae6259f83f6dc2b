"""Fixed-length ordered point features: box-filter Hessian keypoints + LBP.

Interest points come from a SURF-style detector: second-derivative box
filters evaluated on an integral image at a few fixed sizes, determinant of
the approximated Hessian, and a strict 3x3x3 non-maximum suppression over
space and adjacent sizes.  Detected points are binned into the block grid;
each block elects one representative point (the point with the smallest sum
of distances to the block's other points), and an 8-neighbor LBP code at
that point becomes the block's entry in the ordered feature vector P.

Every block always emits exactly one code: a block with no detections falls
back to its strongest Hessian pixel, and to the block center when the
determinant map is identically zero there.  |P| therefore depends only on
the image geometry, never on content.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import BlockGrid, as_gray, integral_image


@dataclass(frozen=True)
class HessianParams:
    """Box-filter sizes (odd multiples of 3), detection threshold, Dxy weight."""

    sizes: tuple = (9, 15, 21)
    threshold: float = 1e3
    dxy_weight: float = 0.9

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("need at least one filter size")
        for s in self.sizes:
            if s % 3 != 0 or s % 2 == 0:
                raise ValueError(f"filter sizes must be odd multiples of 3, got {s}")
        if list(self.sizes) != sorted(set(self.sizes)):
            raise ValueError(f"filter sizes must be strictly increasing, got {self.sizes}")


@dataclass(frozen=True)
class Keypoint:
    x: int
    y: int
    scale: int
    response: float


@dataclass(frozen=True)
class PointFeature:
    """Ordered LBP codes, one per block, plus the points they were read at."""

    codes: np.ndarray   # (m,) uint8
    points: np.ndarray  # (m, 2) int64, columns (x, y)

    def __len__(self):
        return len(self.codes)


# 8-neighborhood at unit radius, clockwise from the top-left; bit L = 2**L
_LBP_OFFSETS = ((-1, -1), (0, -1), (1, -1), (1, 0),
                (1, 1), (0, 1), (-1, 1), (-1, 0))


def _grid_box(ii: np.ndarray, xs, ys, x0: int, y0: int, x1: int, y1: int):
    """Box sums [x0,x1) x [y0,y1) relative to every center, clipped at borders."""
    h, w = ii.shape[0] - 1, ii.shape[1] - 1
    xa = np.clip(xs + x0, 0, w)
    xb = np.clip(xs + x1, 0, w)
    ya = np.clip(ys + y0, 0, h)
    yb = np.clip(ys + y1, 0, h)
    return ii[yb, xb] - ii[ya, xb] - ii[yb, xa] + ii[ya, xa]


def hessian_det_map(ii: np.ndarray, size: int, dxy_weight: float = 0.9) -> np.ndarray:
    """Approximated-Hessian determinant at every pixel for one filter size.

    Lobe width is size//3; responses are normalized by the filter area before
    combining, and boxes reaching past the image are clipped (outside = 0).
    """
    lobe = size // 3
    half = (lobe - 1) // 2
    h, w = ii.shape[0] - 1, ii.shape[1] - 1
    ys = np.arange(h)[:, None]
    xs = np.arange(w)[None, :]

    def boxi(cx0, cy0, cx1, cy1):  # inclusive offset bounds
        return _grid_box(ii, xs, ys, cx0, cy0, cx1 + 1, cy1 + 1)

    area = float(size * size)
    dyy = (boxi(-(lobe - 1), -half - lobe, lobe - 1, -half - 1)
           + boxi(-(lobe - 1), half + 1, lobe - 1, half + lobe)
           - 2 * boxi(-(lobe - 1), -half, lobe - 1, half)) / area
    dxx = (boxi(-half - lobe, -(lobe - 1), -half - 1, lobe - 1)
           + boxi(half + 1, -(lobe - 1), half + lobe, lobe - 1)
           - 2 * boxi(-half, -(lobe - 1), half, lobe - 1)) / area
    dxy = (boxi(-lobe, -lobe, -1, -1) + boxi(1, 1, lobe, lobe)
           - boxi(1, -lobe, lobe, -1) - boxi(-lobe, 1, -1, lobe)) / area
    return dxx * dyy - (dxy_weight * dxy) ** 2


def _det_stack(img: np.ndarray, params: HessianParams):
    """Determinant maps for every size that fits inside the image."""
    img = as_gray(img)
    fit = [s for s in params.sizes if s <= min(img.shape)]
    if not fit:
        return [], np.zeros((0,) + img.shape)
    ii = integral_image(img)
    return fit, np.stack([hessian_det_map(ii, s, params.dxy_weight) for s in fit])


def _filter_margin(size: int) -> int:
    """Distance from the border inside which a size-sized filter is truncated."""
    lobe = size // 3
    return lobe + (lobe - 1) // 2


def _mask_truncated(fit: list, stack: np.ndarray, value: float) -> np.ndarray:
    """Copy of the stack with truncated-filter positions overwritten."""
    out = stack.copy()
    for s, size in enumerate(fit):
        m = _filter_margin(size)
        out[s, :m, :] = out[s, -m:, :] = value
        out[s, :, :m] = out[s, :, -m:] = value
    return out


def _nms(fit: list, stack: np.ndarray, params: HessianParams) -> list:
    """Strict local maxima of the determinant stack, sorted by (y, x, scale).

    Positions where a filter hangs past the border are removed up front:
    their clipped responses are artifacts and must neither detect nor
    suppress a true neighbor.
    """
    if not fit:
        return []
    stack = _mask_truncated(fit, stack, -np.inf)
    ns, h, w = stack.shape
    mask = stack >= params.threshold
    mask[:, 0, :] = mask[:, -1, :] = mask[:, :, 0] = mask[:, :, -1] = False
    padded = np.full((ns + 2, h + 2, w + 2), -np.inf)
    padded[1:-1, 1:-1, 1:-1] = stack
    for ds in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if ds == dy == dx == 0:
                    continue
                mask &= stack > padded[1 + ds:1 + ds + ns,
                                       1 + dy:1 + dy + h,
                                       1 + dx:1 + dx + w]
    si, yi, xi = np.nonzero(mask)
    order = np.lexsort((si, xi, yi))
    return [Keypoint(x=int(xi[i]), y=int(yi[i]), scale=fit[si[i]],
                     response=float(stack[si[i], yi[i], xi[i]]))
            for i in order]


def detect_surf(img: np.ndarray, params: HessianParams = HessianParams()) -> list:
    """Keypoints above threshold that are strict 3x3x3 local maxima.

    Neighborhoods span space and adjacent filter sizes (edge sizes compare
    against two planes only); the 1-pixel spatial border is excluded.  The
    result is sorted by (y, x, scale), so it is reproducible by construction.
    """
    fit, stack = _det_stack(img, params)
    return _nms(fit, stack, params)


def representative_point(points) -> tuple[int, int]:
    """The point minimizing the sum of distances to the others.

    Ties go to the earliest point in the given order.  Distance sums are
    accumulated column by column in input order so the result (including
    ties) is reproducible against a scalar reference implementation.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        raise ValueError("representative_point needs at least one point")
    d = np.zeros(n)
    for j in range(n):
        dx = pts[:, 0] - pts[j, 0]
        dy = pts[:, 1] - pts[j, 1]
        d += np.sqrt(dx * dx + dy * dy)
    best = int(np.argmin(d))
    return int(pts[best, 0]), int(pts[best, 1])


def lbp_code(img: np.ndarray, point) -> int:
    """8-bit local binary pattern at unit radius around `point` (x, y).

    Bit L is set when the L-th neighbor (clockwise from top-left) is >= the
    center; equal counts as set, so a constant patch codes to 255.  Neighbors
    beyond the border read the edge-replicated pixel.
    """
    img = as_gray(img)
    h, w = img.shape
    x, y = int(point[0]), int(point[1])
    center = int(img[min(max(y, 0), h - 1), min(max(x, 0), w - 1)])
    code = 0
    for bit, (dx, dy) in enumerate(_LBP_OFFSETS):
        nx = min(max(x + dx, 0), w - 1)
        ny = min(max(y + dy, 0), h - 1)
        if int(img[ny, nx]) >= center:
            code |= 1 << bit
    return code


def point_feature(img: np.ndarray, grid: BlockGrid,
                  params: HessianParams = HessianParams()) -> PointFeature:
    """Ordered point feature P: one LBP code per block, block row-major.

    Detection runs once on the whole padded image; points are then binned
    into blocks by containment.  Blocks without detections use the pixel of
    maximal positive determinant (any fully-fitting size) inside the block,
    or the block center when no positive response exists there.
    """
    img = as_gray(grid.image)
    fit, stack = _det_stack(img, params)
    kps = _nms(fit, stack, params)

    per_block = [[] for _ in range(grid.m)]
    for kp in kps:
        per_block[grid.block_index(kp.x, kp.y)].append((kp.x, kp.y))

    if fit:
        best_det = _mask_truncated(fit, stack, 0.0).max(axis=0)
    else:
        best_det = np.zeros(img.shape)
    n = grid.block_size
    codes = np.empty(grid.m, dtype=np.uint8)
    points = np.empty((grid.m, 2), dtype=np.int64)
    for b in range(grid.m):
        x0, y0, x1, y1 = grid.rect(b)
        if per_block[b]:
            rp = representative_point(per_block[b])
        else:
            window = best_det[y0:y1, x0:x1]
            if window.max(initial=0.0) > 0.0:
                flat = int(np.argmax(window))
                rp = (x0 + flat % n, y0 + flat // n)
            else:
                rp = (x0 + n // 2, y0 + n // 2)
        points[b] = rp
        codes[b] = lbp_code(img, rp)
    return PointFeature(codes=codes, points=points)
