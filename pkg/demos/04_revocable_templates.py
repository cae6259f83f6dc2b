"""
Revocable templates: hash, match, revoke, reissue
=================================================

Enrolls one palm under a secret seed, verifies a genuine probe, then revokes
the seed and reissues.  Core properties on display:

- the template stores argmax indices only, never raw features;
- the same features under a fresh seed collide at chance (1/k);
- matching across different seeds is refused outright.

Artifacts land in runs/04_revocable_templates/.
"""
from pathlib import Path

import numpy as np

from palmshield.config import PipelineConfig
from palmshield.imaging import SynthSpec, synth_palm
from palmshield.matching import SeedMismatchError, post_transform_score
from palmshield.pipeline import enroll, extract_features, fuse_features, template_bank
from palmshield.template import iom_hash, serialize

out = Path(__file__).resolve().parent.parent / "runs" / "04_revocable_templates"
out.mkdir(parents=True, exist_ok=True)

spec = SynthSpec(master_seed=0xFACE)
enroll_img = synth_palm(spec, identity=4, sample=0)
probe_img = synth_palm(spec, identity=4, sample=1)
other_img = synth_palm(spec, identity=5, sample=0)

cfg = PipelineConfig()
OLD_SEED, NEW_SEED = 0x01D5EED, 0x0E175EED

stored = enroll(enroll_img, OLD_SEED, cfg)
(out / "enrolled.tpl").write_bytes(serialize(stored))
print(f"template: l={stored.l} hashes over k={stored.k} projections each, "
      f"{len(serialize(stored))} bytes on disk")

# Genuine and impostor probes under the matching seed.
genuine = post_transform_score(enroll(probe_img, OLD_SEED, cfg), stored)
impostor = post_transform_score(enroll(other_img, OLD_SEED, cfg), stored)
print(f"genuine score  {genuine:.4f}")
print(f"impostor score {impostor:.4f}")

# Revocation: hash the same features under a new seed.  The old and new
# templates agree only at the 1/k chance rate, so a leaked template is dead
# weight once the seed is retired.
c = fuse_features(extract_features(enroll_img, cfg), cfg)
old_t = iom_hash(c, template_bank(cfg, OLD_SEED, len(c)))
new_t = iom_hash(c, template_bank(cfg, NEW_SEED, len(c)))
collisions = float(np.mean(old_t.indices == new_t.indices))
print(f"old/new index agreement {collisions:.4f} (chance = {1 / cfg.iom_k:.4f})")
(out / "reissued.tpl").write_bytes(serialize(new_t))

# Cross-seed comparisons raise instead of returning a junk score.
try:
    post_transform_score(new_t, stored)
except SeedMismatchError as exc:
    print(f"cross-seed match refused: {exc}")

# The reissued template verifies the same hand as before.
renewed = post_transform_score(enroll(probe_img, NEW_SEED, cfg), new_t)
print(f"genuine score under the new seed {renewed:.4f}")
print(f"wrote 2 template files to {out}")
