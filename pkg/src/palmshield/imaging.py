"""Grayscale raster plumbing: PGM I/O, integral images, blocking, synthetic palms.

Images are plain 2-D uint8 numpy arrays, row-major with the origin at the
top-left corner.  Everything here is a pure function of its inputs, so all
operations are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import derive_seed

_WHITESPACE = b" \t\n\r\x0b\x0c"

# tags for derive_seed; distinct per randomness consumer
_TAG_IDENTITY = 0x1D
_TAG_SAMPLE = 0x5A


class PgmError(ValueError):
    """Raised for malformed or unsupported PGM data."""


class BlockCountError(ValueError):
    """Raised when an image does not tile into the configured block count."""


def as_gray(img: np.ndarray) -> np.ndarray:
    """Validate and return a 2-D uint8 image."""
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError(f"expected 2-D uint8 image, got shape {img.shape} dtype {img.dtype}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image dimensions must be >= 1")
    return img


# ---------------------------------------------------------------------------
# PGM codec (binary P5, maxval <= 255)
# ---------------------------------------------------------------------------

def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next header token starting at pos, skipping whitespace and # comments.

    Returns (token, position of the byte that terminated the token).
    """
    n = len(data)
    while pos < n:
        b = data[pos:pos + 1]
        if b == b"#":
            while pos < n and data[pos:pos + 1] not in b"\r\n":
                pos += 1
        elif b in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PgmError("malformed header: unexpected end of data")
    return data[start:pos], pos


def load_pgm(data: bytes) -> np.ndarray:
    """Decode binary PGM bytes into a 2-D uint8 image.

    Header comments and arbitrary whitespace are tolerated.  Distinct errors
    for: unsupported magic, malformed header fields, maxval above 255, and a
    truncated pixel payload.
    """
    if len(data) < 2 or data[:2] != b"P5":
        raise PgmError(f"unsupported magic {data[:2]!r}: only binary PGM (P5) is accepted")
    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = _next_token(data, pos)
        if not token.isdigit():
            raise PgmError(f"malformed header: non-numeric {name} field {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise PgmError(f"malformed header: bad dimensions {width}x{height}")
    if maxval < 1 or maxval > 255:
        raise PgmError(f"maxval {maxval} out of range (expected 1..255)")
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise PgmError("malformed header: missing whitespace before pixel payload")
    payload = data[pos + 1:pos + 1 + width * height]
    if len(payload) < width * height:
        raise PgmError(
            f"truncated pixel payload: expected {width * height} bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def save_pgm(img: np.ndarray, comment: str | None = None) -> bytes:
    """Encode a 2-D uint8 image as binary PGM with maxval 255.

    load_pgm(save_pgm(img)) reproduces img bit-exactly.  An optional
    single-line comment is embedded after the magic (load_pgm skips it).
    """
    img = as_gray(img)
    h, w = img.shape
    head = b"P5\n"
    if comment:
        if "\n" in comment:
            raise ValueError("comment must be a single line")
        head += b"# %s\n" % comment.encode("ascii")
    return head + b"%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


# ---------------------------------------------------------------------------
# Integral images and box sums
# ---------------------------------------------------------------------------

def integral_image(img: np.ndarray) -> np.ndarray:
    """(H+1, W+1) int64 prefix-sum table; entry (y, x) sums pixels in [0,y) x [0,x)."""
    img = as_gray(img)
    h, w = img.shape
    ii = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(img, axis=0, dtype=np.int64), axis=1, out=ii[1:, 1:])
    return ii


def box_sum(ii: np.ndarray, x0: int, y0: int, x1: int, y1: int) -> int:
    """Pixel sum over the half-open rectangle [x0,x1) x [y0,y1).

    Rectangles extending past the borders are clipped (pixels outside count
    as zero); an empty rectangle sums to 0.
    """
    h = ii.shape[0] - 1
    w = ii.shape[1] - 1
    x0 = min(max(x0, 0), w)
    x1 = min(max(x1, 0), w)
    y0 = min(max(y0, 0), h)
    y1 = min(max(y1, 0), h)
    if x0 >= x1 or y0 >= y1:
        return 0
    return int(ii[y1, x1] - ii[y0, x1] - ii[y1, x0] + ii[y0, x0])


# ---------------------------------------------------------------------------
# Padding and blocking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockGrid:
    """Edge-padded image tiled into non-overlapping n x n blocks, row-major."""

    image: np.ndarray
    block_size: int
    rows: int
    cols: int

    @property
    def m(self) -> int:
        return self.rows * self.cols

    def rect(self, index: int) -> tuple[int, int, int, int]:
        """Half-open pixel rectangle (x0, y0, x1, y1) of block `index`."""
        if not 0 <= index < self.m:
            raise IndexError(f"block index {index} out of range [0, {self.m})")
        by, bx = divmod(index, self.cols)
        n = self.block_size
        return bx * n, by * n, (bx + 1) * n, (by + 1) * n

    def block_index(self, x: int, y: int) -> int:
        """Row-major index of the block containing pixel (x, y)."""
        n = self.block_size
        return (y // n) * self.cols + (x // n)


def pad_and_block(img: np.ndarray, n: int, target_m: int | None = None) -> BlockGrid:
    """Pad by edge replication to multiples of n and tile into blocks.

    With target_m given, a recomputed block count that differs raises
    BlockCountError (the usual cause is an ROI size that does not match the
    configured grid).  target_m=None accepts any size.
    """
    img = as_gray(img)
    if n < 3:
        raise ValueError(f"block size must be >= 3, got {n}")
    h, w = img.shape
    pad_h = (-h) % n
    pad_w = (-w) % n
    if pad_h or pad_w:
        img = np.pad(img, ((0, pad_h), (0, pad_w)), mode="edge")
    rows = (h + pad_h) // n
    cols = (w + pad_w) // n
    if target_m is not None and rows * cols != target_m:
        raise BlockCountError(
            f"{w}x{h} image tiles into {rows * cols} blocks of {n}x{n}, "
            f"configuration expects {target_m}")
    return BlockGrid(image=img, block_size=n, rows=rows, cols=cols)


# ---------------------------------------------------------------------------
# Synthetic palm generator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the deterministic synthetic palm corpus.

    Intensities and stroke widths are tuning, not contract; they are chosen
    so the dark strokes respond to the line filters roughly like real palm
    lines.  Every image is a pure function of
    (master_seed, identity, sample).
    """

    identities: int = 20
    samples_per_identity: int = 8
    master_seed: int = 0x0BADC0DE
    width: int = 144
    height: int = 144
    line_count: int = 30
    jitter_translate_px: float = 0.5
    jitter_rotate_rad: float = 0.005
    noise_sigma: float = 0.4
    background: int = 200
    stroke_intensity: int = 40
    texture_bumps: int = 24
    texture_amp: float = 24.0
    texture_scale: tuple = (8.0, 28.0)
    dot_count: int = 30

    def __post_init__(self):
        if self.identities < 1:
            raise ValueError("identity count must be >= 1")
        if self.samples_per_identity < 2:
            raise ValueError("samples per identity must be >= 2 for genuine pairs")


def _identity_geometry(spec: SynthSpec, identity: int):
    """Arc control points/widths and shading bumps for one identity.

    The shading field plays the role of skin texture: without it the flat
    background puts the orientation filters into exact-tie territory where
    single-intensity noise flips dominate the codes.
    """
    rng = np.random.default_rng(derive_seed(spec.master_seed, _TAG_IDENTITY, identity))
    w, h = spec.width, spec.height
    lo = 0.06 * min(w, h)
    span = 0.55 * min(w, h)
    arcs = []
    for _ in range(spec.line_count):
        p0 = rng.uniform([lo, lo], [w - lo, h - lo])
        ang = rng.uniform(0.0, np.pi)
        length = rng.uniform(0.6, 1.3) * span
        p2 = p0 + length * np.array([np.cos(ang), np.sin(ang)])
        p2 = np.clip(p2, lo, [w - lo, h - lo])
        mid = 0.5 * (p0 + p2)
        perp = np.array([-(p2 - p0)[1], (p2 - p0)[0]])
        norm = np.hypot(*perp)
        if norm > 1e-9:
            perp /= norm
        bend = rng.uniform(-0.22, 0.22) * length
        p1 = mid + bend * perp
        width = int(rng.integers(2, 5))
        arcs.append((np.stack([p0, p1, p2]), width))
    bumps = None
    if spec.texture_bumps > 0:
        centers = rng.uniform([0.0, 0.0], [w, h], size=(spec.texture_bumps, 2))
        amps = rng.uniform(-spec.texture_amp, spec.texture_amp, size=spec.texture_bumps)
        scales = rng.uniform(*spec.texture_scale, size=spec.texture_bumps)
        bumps = (centers, amps, scales)
    # compact dark dots (pores/line junctions): they anchor the blob detector,
    # which otherwise only sees ridge-like arc responses with unstable maxima
    dots = rng.uniform([lo, lo], [w - lo, h - lo], size=(spec.dot_count, 2))
    dot_widths = rng.integers(4, 6, size=spec.dot_count)
    return arcs, bumps, (dots, dot_widths)


def _shading_field(shape, bumps, rot, center, shift) -> np.ndarray:
    """Sum of Gaussian bumps, rigidly transformed like the arcs."""
    centers, amps, scales = bumps
    moved = (centers - center) @ rot.T + center + shift
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    field = np.zeros(shape, dtype=np.float64)
    for (cx, cy), a, s in zip(moved, amps, scales):
        field += a * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * s * s))
    return field


_STAMPS = {
    wd: np.array([(ox, oy)
                  for oy in range(-2, 3) for ox in range(-2, 3)
                  if ox * ox + oy * oy <= (wd / 2.0) ** 2], dtype=np.int64)
    for wd in (2, 3, 4, 5)
}


def _stamp(canvas: np.ndarray, ipts: np.ndarray, width: int, value: int):
    """Paint a disk brush of the given width at every integer point."""
    stamped = (ipts[:, None, :] + _STAMPS[width][None, :, :]).reshape(-1, 2)
    h, w = canvas.shape
    ok = ((stamped[:, 0] >= 0) & (stamped[:, 0] < w)
          & (stamped[:, 1] >= 0) & (stamped[:, 1] < h))
    stamped = stamped[ok]
    canvas[stamped[:, 1], stamped[:, 0]] = value


def _paint_arc(canvas: np.ndarray, ctrl: np.ndarray, width: int, value: int):
    """Rasterize one quadratic arc onto the canvas with a disk brush."""
    approx_len = np.hypot(*(ctrl[1] - ctrl[0])) + np.hypot(*(ctrl[2] - ctrl[1]))
    steps = max(int(3.0 * approx_len) + 8, 16)
    t = np.linspace(0.0, 1.0, steps)[:, None]
    pts = ((1 - t) ** 2) * ctrl[0] + 2 * t * (1 - t) * ctrl[1] + (t ** 2) * ctrl[2]
    _stamp(canvas, np.rint(pts).astype(np.int64), width, value)


def synth_palm(spec: SynthSpec, identity: int, sample: int) -> np.ndarray:
    """Deterministic synthetic palm image for (identity, sample).

    Arc control points depend on the identity only; the sample index adds a
    small rigid jitter of the geometry plus additive Gaussian pixel noise.
    """
    if not 0 <= identity < spec.identities:
        raise ValueError(f"identity {identity} out of range [0, {spec.identities})")
    if not 0 <= sample < spec.samples_per_identity:
        raise ValueError(f"sample {sample} out of range [0, {spec.samples_per_identity})")
    arcs, bumps, (dots, dot_widths) = _identity_geometry(spec, identity)
    rng = np.random.default_rng(
        derive_seed(spec.master_seed, _TAG_SAMPLE, identity, sample))
    shift = rng.uniform(-spec.jitter_translate_px, spec.jitter_translate_px, size=2)
    angle = rng.uniform(-spec.jitter_rotate_rad, spec.jitter_rotate_rad)
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    center = np.array([spec.width / 2.0, spec.height / 2.0])

    canvas = np.full((spec.height, spec.width), float(spec.background), dtype=np.float64)
    if bumps is not None:
        canvas += _shading_field(canvas.shape, bumps, rot, center, shift)
    for ctrl, width in arcs:
        jittered = (ctrl - center) @ rot.T + center + shift
        _paint_arc(canvas, jittered, width, spec.stroke_intensity)
    moved_dots = np.rint((dots - center) @ rot.T + center + shift).astype(np.int64)
    for pt, width in zip(moved_dots, dot_widths):
        _stamp(canvas, pt[None, :], int(width), spec.stroke_intensity)
    if spec.noise_sigma > 0:
        canvas += rng.normal(0.0, spec.noise_sigma, size=canvas.shape)
    return np.clip(np.rint(canvas), 0, 255).astype(np.uint8)


def write_synth_dataset(root, spec: SynthSpec) -> int:
    """Write the full corpus as `<root>/<iiii>/<ssss>.pgm`; returns file count.

    Identity and sample ids are zero-padded to four digits so lexicographic
    and numeric orders coincide.
    """
    from pathlib import Path

    root = Path(root)
    count = 0
    for identity in range(spec.identities):
        d = root / f"{identity:04d}"
        d.mkdir(parents=True, exist_ok=True)
        for sample in range(spec.samples_per_identity):
            img = synth_palm(spec, identity, sample)
            note = (f"synth seed={spec.master_seed:#x} "
                    f"identity={identity} sample={sample}")
            (d / f"{sample:04d}.pgm").write_bytes(save_pgm(img, comment=note))
            count += 1
    return count
