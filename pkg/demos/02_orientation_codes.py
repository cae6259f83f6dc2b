"""
Orientation codes from line filter banks
========================================

Runs the 13x13 directional mask bank over a rendered line and over a
synthetic palm, fusing the two strongest directions into a 12-level code
(steps of 15 degrees).  Writes code maps as PGMs, scaled so the codes are
visible, into runs/02_orientation_codes/.
"""
import math
from pathlib import Path

import numpy as np

from palmshield.imaging import SynthSpec, save_pgm, synth_palm
from palmshield.orientation import (FusionParams, build_bank, downsample_codes,
                                    orientation_map)

out = Path(__file__).resolve().parent.parent / "runs" / "02_orientation_codes"
out.mkdir(parents=True, exist_ok=True)

bank = build_bank(13)

# Render a dark line at 45 degrees on a light background.  Low contrast is
# the interesting regime: the two best directions stay close enough to fuse,
# which is how the in-between (odd) codes arise.
size, theta = 64, math.radians(45.0)
c = (size - 1) / 2.0
ys, xs = np.mgrid[0:size, 0:size]
dist = np.abs(-math.sin(theta) * (xs - c) + math.cos(theta) * (ys - c))
line = np.full((size, size), 200, dtype=np.uint8)
line[dist <= 0.6] = 197

omap = orientation_map(line, bank, FusionParams(cyclic_wrap=True))
on_line = omap[dist <= 0.6]
values, counts = np.unique(on_line, return_counts=True)
print("codes along a 45-degree line (45/15 = code 3):")
for v, n in zip(values, counts):
    print(f"  code {v:2d}: {n:4d} pixels")

(out / "line45_codes.pgm").write_bytes(
    save_pgm((omap * 21).astype(np.uint8), comment="codes scaled by 21"))

# The same map over a synthetic palm, plus the 4x4 majority-vote
# downsampling the pipeline feeds into the fused feature vector.
palm = synth_palm(SynthSpec(master_seed=0xFACE), identity=0, sample=0)
pmap = orientation_map(palm, bank, FusionParams())
cells = pmap.shape[0] // 4
small = downsample_codes(pmap, 4).reshape(cells, cells)
print(f"palm code map {pmap.shape} -> downsampled {small.shape}")
print(f"code histogram: {np.bincount(pmap.ravel(), minlength=12).tolist()}")

(out / "palm_codes.pgm").write_bytes(
    save_pgm((pmap * 21).astype(np.uint8), comment="codes scaled by 21"))
(out / "palm_codes_small.pgm").write_bytes(
    save_pgm((small * 21).astype(np.uint8), comment="4x4 majority vote"))
print(f"wrote 3 code maps to {out}")
