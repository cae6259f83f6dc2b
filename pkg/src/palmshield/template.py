"""Revocable templates: feature fusion, seeded projection banks, IoM hashing.

The fused feature C ties the orientation vector O and point vector P into one
real vector.  A bank of l seeded Gaussian matrices (k columns of dimension d
each) projects C, and only the *index* of the maximum inner product per
matrix is kept.  The index vector is the template: cancel the seed and the
old template is useless, re-enroll with a new seed and you get a fresh one.

Index-of-max hashing is invariant under positive scaling of C and ties are
broken toward the smallest column, so templates are bit-reproducible across
implementations given the pinned generator in ``rng``.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .rng import gaussians, stream_key

MODES = ("raw", "angular")

# fixed affine code maps: zero mean / unit variance under a uniform alphabet
# (NOT data-dependent statistics; templates must not leak per-image scaling)
_O_MEAN, _O_STD = 5.5, 3.452
_P_MEAN, _P_STD = 127.5, 73.9


class TemplateFormatError(ValueError):
    """Base class for template codec rejections."""


class BadMagicError(TemplateFormatError):
    pass


class BadVersionError(TemplateFormatError):
    pass


class TruncatedTemplateError(TemplateFormatError):
    pass


class IndexRangeError(TemplateFormatError):
    pass


@dataclass(frozen=True)
class IomParams:
    """Hash count l, columns per hash k, template seed, and fusion mode."""

    l: int = 420
    k: int = 50
    seed: int = 0
    mode: str = "raw"

    def __post_init__(self):
        if self.l < 1 or self.l > 0xFFFFFFFF:
            raise ValueError(f"l must be in [1, 2^32), got {self.l}")
        if self.k < 1 or self.k > 0xFFFF:
            raise ValueError(f"k must be in [1, 65535], got {self.k}")
        if self.k == 1:
            warnings.warn("k=1 is degenerate: every hash index is 0", stacklevel=2)
        if not 0 <= self.seed <= 0xFFFFFFFFFFFFFFFF:
            raise ValueError("seed must fit in 64 bits")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class ProjectionBank:
    """Seeded Gaussian projections; w[i, j] is column j of hash i, length d."""

    seed: int
    l: int
    k: int
    d: int
    mode: str
    w: np.ndarray


@dataclass(frozen=True, eq=False)
class RevocableTemplate:
    """Per-hash argmax indices plus the parameters they are only valid under."""

    indices: np.ndarray  # (l,) uint16
    l: int
    k: int
    d: int
    mode: str
    seed: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.uint16)
        object.__setattr__(self, "indices", idx)
        if idx.ndim != 1 or len(idx) != self.l:
            raise TemplateFormatError(f"expected {self.l} indices, got shape {idx.shape}")
        if self.k < 1 or self.d < 1:
            raise TemplateFormatError(f"bad parameters k={self.k} d={self.d}")
        if len(idx) and int(idx.max()) >= self.k:
            raise IndexRangeError(f"index {int(idx.max())} out of range for k={self.k}")
        if self.mode not in MODES:
            raise TemplateFormatError(f"unknown mode {self.mode!r}")

    def __eq__(self, other):
        if not isinstance(other, RevocableTemplate):
            return NotImplemented
        return ((self.l, self.k, self.d, self.mode, self.seed)
                == (other.l, other.k, other.d, other.mode, other.seed)
                and np.array_equal(self.indices, other.indices))


def fuse(o_codes, p_codes, mode: str = "raw", *,
         o_len: int | None = None, m: int | None = None,
         scaled: bool = True) -> np.ndarray:
    """Fused feature C: mapped orientation segment then mapped point segment.

    raw mode maps codes affinely to zero mean / unit variance; angular mode
    embeds each orientation code v on the unit circle at its doubled angle,
    (cos(pi*v/6), sin(pi*v/6)) interleaved, so wrap-adjacent codes 0 and 11
    land close together.  scaled=False skips the affine maps (plain
    concatenation of the raw code values).
    """
    o = np.asarray(o_codes, dtype=np.float64).ravel()
    p = np.asarray(p_codes, dtype=np.float64).ravel()
    if o_len is not None and len(o) != o_len:
        raise ValueError(f"orientation feature length {len(o)} != configured {o_len}")
    if m is not None and len(p) != m:
        raise ValueError(f"point feature length {len(p)} != configured {m}")
    if len(o) == 0 or len(p) == 0:
        raise ValueError("feature segments must be non-empty")
    if o.min() < 0 or o.max() > 11:
        raise ValueError("orientation codes must lie in [0, 11]")
    if p.min() < 0 or p.max() > 255:
        raise ValueError("point codes must lie in [0, 255]")

    if mode == "raw":
        oseg = (o - _O_MEAN) / _O_STD if scaled else o
    elif mode == "angular":
        ang = o * (np.pi / 6.0)
        oseg = np.empty(2 * len(o))
        oseg[0::2] = np.cos(ang)
        oseg[1::2] = np.sin(ang)
    else:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    pseg = (p - _P_MEAN) / _P_STD if scaled else p
    return np.concatenate([oseg, pseg])


def fused_dim(o_len: int, m: int, mode: str) -> int:
    """Dimension d of the fused feature for a given configuration."""
    return (2 * o_len if mode == "angular" else o_len) + m


def gaussian_bank(params: IomParams, d: int) -> ProjectionBank:
    """Generate the full (l, k, d) bank from the pinned per-column streams.

    Column (i, j) — both 1-based in the key mix — draws its d components from
    gaussians(stream_key(seed, i, j)).  Generation is chunked to bound
    temporary memory; the output is identical for any chunking.
    """
    if d < 1:
        raise ValueError(f"feature dimension must be >= 1, got {d}")
    l, k = params.l, params.k
    ii = np.repeat(np.arange(1, l + 1, dtype=np.uint64), k)
    jj = np.tile(np.arange(1, k + 1, dtype=np.uint64), l)
    keys = stream_key(params.seed, ii, jj)
    w = np.empty((l * k, d), dtype=np.float64)
    step = max(1, (1 << 22) // d)
    for lo in range(0, l * k, step):
        w[lo:lo + step] = gaussians(keys[lo:lo + step], d)
    return ProjectionBank(seed=params.seed, l=l, k=k, d=d, mode=params.mode,
                          w=w.reshape(l, k, d))


def iom_hash(c: np.ndarray, bank: ProjectionBank) -> RevocableTemplate:
    """Index-of-max template: argmax_j <w_ij, c> per hash, ties to smaller j."""
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (bank.d,):
        raise ValueError(f"feature shape {c.shape} does not match bank d={bank.d}")
    if not np.all(np.isfinite(c)):
        raise ValueError("fused feature must be finite")
    prods = bank.w.reshape(-1, bank.d) @ c
    idx = prods.reshape(bank.l, bank.k).argmax(axis=1)
    return RevocableTemplate(indices=idx.astype(np.uint16), l=bank.l, k=bank.k,
                             d=bank.d, mode=bank.mode, seed=bank.seed)


def scale_invariance_check(c: np.ndarray, bank: ProjectionBank, lam: float) -> bool:
    """Whether hashing lam*c reproduces the template of c (must hold for lam>0)."""
    if lam <= 0:
        raise ValueError(f"scale must be positive, got {lam}")
    return iom_hash(np.asarray(c, dtype=np.float64) * lam, bank) == iom_hash(c, bank)


# ---------------------------------------------------------------------------
# Serialization: little-endian, fixed 28-byte header + l x u16 indices
# ---------------------------------------------------------------------------

_MAGIC = b"IOMX"
_VERSION = 1
_HEADER = struct.Struct("<4sHBBQIII")  # magic, version, mode, reserved, seed, l, k, d
_MODE_BYTE = {"raw": 0, "angular": 1}
_BYTE_MODE = {v: k for k, v in _MODE_BYTE.items()}


def serialize(t: RevocableTemplate) -> bytes:
    header = _HEADER.pack(_MAGIC, _VERSION, _MODE_BYTE[t.mode], 0,
                          t.seed, t.l, t.k, t.d)
    return header + np.ascontiguousarray(t.indices, dtype="<u2").tobytes()


def deserialize(data: bytes) -> RevocableTemplate:
    """Inverse of serialize; rejects bad magic, version, truncation, indices."""
    if len(data) < 4:
        raise TruncatedTemplateError(f"{len(data)} bytes is too short for the magic")
    if data[:4] != _MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}, expected {_MAGIC!r}")
    if len(data) < _HEADER.size:
        raise TruncatedTemplateError(
            f"header needs {_HEADER.size} bytes, got {len(data)}")
    _, version, mode_b, _, seed, l, k, d = _HEADER.unpack_from(data)
    if version != _VERSION:
        raise BadVersionError(f"unsupported version {version}")
    if mode_b not in _BYTE_MODE:
        raise TemplateFormatError(f"unknown mode byte {mode_b}")
    if l < 1:
        raise TemplateFormatError(f"bad hash count l={l}")
    need = _HEADER.size + 2 * l
    if len(data) < need:
        raise TruncatedTemplateError(f"index payload needs {need} bytes, got {len(data)}")
    if len(data) > need:
        raise TemplateFormatError(f"{len(data) - need} trailing bytes after payload")
    idx = np.frombuffer(data, dtype="<u2", count=l, offset=_HEADER.size).copy()
    return RevocableTemplate(indices=idx, l=l, k=k, d=d,
                             mode=_BYTE_MODE[mode_b], seed=seed)
