"""Pipeline configuration: plain `key=value` lines, strict keys, stable echo.

The text format is deliberately dumb — one assignment per line, `#` comments,
no sections — so configs stay diff-friendly and language-neutral.  Unknown
keys are rejected outright; silently ignoring a typo like `iom_k=500` would
change every template downstream.  Seeds are *not* configuration: they are
secrets/identifiers and travel on the command line.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .template import MODES


class ConfigError(ValueError):
    """Malformed config text or invalid parameter combination."""


@dataclass(frozen=True)
class PipelineConfig:
    mfrat_window: int = 13
    fusion_r: float = 8.0
    block_size: int = 24
    block_count: int = 36
    cell_size: int = 4
    iom_l: int = 420
    iom_k: int = 50
    mode: str = "raw"
    w_o: float = 0.5
    shift_radius: int = 0
    cyclic_wrap: bool = False
    hessian_threshold: float = 1000.0

    def __post_init__(self):
        if self.mfrat_window < 5 or self.mfrat_window % 2 == 0:
            raise ConfigError(f"mfrat_window must be odd and >= 5, got {self.mfrat_window}")
        if self.fusion_r < 0:
            raise ConfigError(f"fusion_r must be >= 0, got {self.fusion_r}")
        if self.block_size < 3:
            raise ConfigError(f"block_size must be >= 3, got {self.block_size}")
        if self.block_count < 1:
            raise ConfigError(f"block_count must be >= 1, got {self.block_count}")
        if self.cell_size < 1 or self.block_size % self.cell_size:
            raise ConfigError(
                f"cell_size {self.cell_size} must divide block_size {self.block_size}")
        if not 1 <= self.iom_l <= 0xFFFFFFFF:
            raise ConfigError(f"iom_l out of range: {self.iom_l}")
        if not 1 <= self.iom_k <= 0xFFFF:
            raise ConfigError(f"iom_k out of range: {self.iom_k}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 <= self.w_o <= 1.0:
            raise ConfigError(f"w_o must be in [0,1], got {self.w_o}")
        if self.shift_radius < 0:
            raise ConfigError(f"shift_radius must be >= 0, got {self.shift_radius}")
        if self.hessian_threshold < 0:
            raise ConfigError(f"hessian_threshold must be >= 0, got {self.hessian_threshold}")


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _parse_value(key: str, text: str):
    kind = _FIELD_TYPES[key]
    if kind == "bool":
        lowered = text.lower()
        if lowered not in ("true", "false"):
            raise ConfigError(f"{key}: expected true/false, got {text!r}")
        return lowered == "true"
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind}") from None
    return text


def parse_config(text: str) -> PipelineConfig:
    """Parse key=value lines into a validated PipelineConfig."""
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in overrides:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        overrides[key] = _parse_value(key, value)
    return replace(PipelineConfig(), **overrides)


def load_config(path) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_items(cfg: PipelineConfig) -> list:
    """(key, canonical text value) pairs in declaration order, for echoing."""
    out = []
    for f in fields(PipelineConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, bool):
            out.append((f.name, "true" if v else "false"))
        else:
            out.append((f.name, str(v)))
    return out


def format_config(cfg: PipelineConfig) -> str:
    return "".join(f"{k}={v}\n" for k, v in config_items(cfg))
