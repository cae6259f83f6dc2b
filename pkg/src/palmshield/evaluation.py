"""Evaluation harness: protocols, EER, revocability/unlinkability, timing.

The harness never sees raw biometric databases; it consumes any directory in
the `<root>/<identity>/<sample>.pgm` layout (the bundled synthetic generator
produces exactly that).  Scores are generated under a fixed pairing protocol,
EER comes from an exhaustive threshold sweep with linear interpolation at the
crossing, and the protection-scheme statistics (revocability, unlinkability)
are computed from deliberately cross-seed comparisons via the unchecked
collision-rate scorer.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import PipelineConfig, config_items
from .imaging import PgmError, load_pgm
from .matching import index_collision_rate, post_transform_score, pre_transform_score
from .pipeline import (Features, extract_features, fuse_features, match_config,
                       template_bank)
from .rng import derive_seed
from .template import iom_hash

_TAG_SUBSAMPLE = 0x5B


# ---------------------------------------------------------------------------
# Dataset scanning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    """Sorted identities with sorted sample paths, plus skip counters."""

    root: Path
    entries: tuple        # ((name, (path, ...)), ...)
    skipped_files: int
    skipped_identities: int

    @property
    def identities(self) -> int:
        return len(self.entries)

    @property
    def samples(self) -> int:
        return sum(len(paths) for _, paths in self.entries)


def scan_dataset(root) -> Dataset:
    """Enumerate `<root>/<identity>/*.pgm` deterministically.

    Unreadable files are excluded with a warning; identities left with no
    readable sample are skipped.  Non-PGM files are ignored silently.
    """
    root = Path(root)
    if not root.is_dir():
        raise ValueError(f"dataset root {root} is not a directory")
    entries = []
    skipped_files = 0
    skipped_identities = 0
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        paths = []
        for f in sorted(sub.glob("*.pgm")):
            try:
                load_pgm(f.read_bytes())
            except (PgmError, OSError) as exc:
                warnings.warn(f"skipping unreadable {f}: {exc}", stacklevel=2)
                skipped_files += 1
                continue
            paths.append(f)
        if paths:
            entries.append((sub.name, tuple(paths)))
        else:
            warnings.warn(f"identity {sub.name} has no readable images", stacklevel=2)
            skipped_identities += 1
    if not entries:
        raise ValueError(f"dataset root {root} contains no readable identities")
    return Dataset(root=root, entries=tuple(entries),
                   skipped_files=skipped_files, skipped_identities=skipped_identities)


# ---------------------------------------------------------------------------
# Score generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Protocol:
    """Pairing protocol: genuine = all intra-identity pairs; impostor = either
    first-sample-vs-first-sample or capped full cross, deterministically
    subsampled by the protocol seed."""

    impostor: str = "first"
    max_impostor: int = 50000
    subsample_seed: int = 0x5EED

    def __post_init__(self):
        if self.impostor not in ("first", "full"):
            raise ValueError(f"impostor protocol must be 'first' or 'full', "
                             f"got {self.impostor!r}")
        if self.max_impostor < 1:
            raise ValueError("max_impostor must be >= 1")


@dataclass(frozen=True)
class ScoreSet:
    genuine: np.ndarray
    impostor: np.ndarray

    def __post_init__(self):
        for name in ("genuine", "impostor"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).ravel()
            object.__setattr__(self, name, arr)
            if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
                raise ValueError(f"{name} scores must lie in [0, 1]")


def _genuine_pairs(counts):
    return [(i, a, b)
            for i, n in enumerate(counts)
            for a in range(n) for b in range(a + 1, n)]


def _impostor_pairs(counts, protocol: Protocol):
    nids = len(counts)
    if protocol.impostor == "first":
        return [(i, 0, j, 0) for i in range(nids) for j in range(i + 1, nids)]
    pairs = [(i, a, j, b)
             for i in range(nids) for j in range(i + 1, nids)
             for a in range(counts[i]) for b in range(counts[j])]
    if len(pairs) > protocol.max_impostor:
        rng = np.random.default_rng(
            derive_seed(protocol.subsample_seed, _TAG_SUBSAMPLE, len(pairs)))
        keep = np.sort(rng.choice(len(pairs), size=protocol.max_impostor,
                                  replace=False))
        pairs = [pairs[i] for i in keep]
    return pairs


def gen_scores(ds: Dataset, prepare, score, protocol: Protocol = Protocol()) -> ScoreSet:
    """Genuine/impostor similarity scores under the pairing protocol.

    prepare(path) maps a sample to whatever representation score(a, b)
    compares — plaintext features, templates, anything.  Each sample is
    prepared exactly once.
    """
    if ds.identities < 2:
        raise ValueError(f"need >= 2 identities for impostor pairs, got {ds.identities}")
    counts = [len(paths) for _, paths in ds.entries]
    if not any(n >= 2 for n in counts):
        raise ValueError("need an identity with >= 2 samples for genuine pairs")
    items = [[prepare(p) for p in paths] for _, paths in ds.entries]
    genuine = [score(items[i][a], items[i][b]) for i, a, b in _genuine_pairs(counts)]
    impostor = [score(items[i][a], items[j][b])
                for i, a, j, b in _impostor_pairs(counts, protocol)]
    return ScoreSet(genuine=np.array(genuine), impostor=np.array(impostor))


# ---------------------------------------------------------------------------
# EER
# ---------------------------------------------------------------------------

def _sweep(genuine: np.ndarray, impostor: np.ndarray):
    """FAR/FRR at every candidate threshold (sorted unique scores + sentinel).

    FAR(t) = fraction of impostor scores >= t; FRR(t) = fraction of genuine
    scores < t.  FAR is non-increasing and FRR non-decreasing in t.
    """
    gen = np.sort(genuine)
    imp = np.sort(impostor)
    thresholds = np.concatenate([np.unique(np.concatenate([gen, imp])), [np.inf]])
    far = 1.0 - np.searchsorted(imp, thresholds, side="left") / len(imp)
    frr = np.searchsorted(gen, thresholds, side="left") / len(gen)
    return thresholds, far, frr


def compute_eer(scores: ScoreSet) -> float:
    """Equal error rate from an exhaustive threshold sweep.

    The first threshold where FAR <= FRR brackets the crossing; the EER is
    linearly interpolated between that threshold and its predecessor (exact
    when FAR == FRR at a swept point).
    """
    if len(scores.genuine) == 0 or len(scores.impostor) == 0:
        raise ValueError("both score lists must be non-empty")
    _, far, frr = _sweep(scores.genuine, scores.impostor)
    diff = far - frr
    idx = int(np.argmax(diff <= 0.0))  # first crossing; sentinel guarantees one
    if diff[idx] == 0.0:
        return float(far[idx])
    if idx == 0:
        return float((far[0] + frr[0]) / 2.0)
    alpha = diff[idx - 1] / (diff[idx - 1] - diff[idx])
    return float(frr[idx - 1] + alpha * (frr[idx] - frr[idx - 1]))


def accuracy_loss(eer_pre: float, eer_post: float) -> float:
    """Post-transform EER minus pre-transform EER, same units as the inputs."""
    return eer_post - eer_pre


def roc_points(scores: ScoreSet) -> np.ndarray:
    """(threshold, far, frr) rows over the swept thresholds, for plotting."""
    t, far, frr = _sweep(scores.genuine, scores.impostor)
    return np.column_stack([t, far, frr])


# ---------------------------------------------------------------------------
# Protection-scheme statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RevocabilityStats:
    pairs: int
    cross_mean: float
    cross_std: float
    mated_mean: float
    expected: float     # 1/k
    bound: float        # 3-sigma binomial bound on the mean
    passed: bool


def revocability_test(img: np.ndarray, seeds,
                      cfg: PipelineConfig = PipelineConfig()) -> RevocabilityStats:
    """Cross-seed collision statistics for one image.

    Consecutive disjoint seed pairs are hashed from the same fused feature;
    their index-collision rates should average 1/k.  The mated score
    regenerates the first seed's bank from scratch and must be exactly 1.
    """
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ValueError(f"need >= 2 seeds, got {len(seeds)}")
    c = fuse_features(extract_features(img, cfg), cfg)
    d = len(c)
    npairs = len(seeds) // 2
    rates = np.empty(npairs)
    for i in range(npairs):
        ta = iom_hash(c, template_bank(cfg, seeds[2 * i], d))
        tb = iom_hash(c, template_bank(cfg, seeds[2 * i + 1], d))
        rates[i] = index_collision_rate(ta, tb)
    mated = post_transform_score(iom_hash(c, template_bank(cfg, seeds[0], d)),
                                 iom_hash(c, template_bank(cfg, seeds[0], d)))
    p = 1.0 / cfg.iom_k
    bound = 3.0 * float(np.sqrt(p * (1.0 - p) / (npairs * cfg.iom_l)))
    mean = float(rates.mean())
    return RevocabilityStats(pairs=npairs, cross_mean=mean,
                             cross_std=float(rates.std()), mated_mean=float(mated),
                             expected=p, bound=bound,
                             passed=abs(mean - p) <= bound and mated == 1.0)


@dataclass(frozen=True)
class UnlinkabilityStats:
    mated_pairs: int
    nonmated_pairs: int
    mated_mean: float
    nonmated_mean: float
    delta: float
    passed: bool


def unlinkability_test(ds: Dataset, seeds, cfg: PipelineConfig = PipelineConfig(),
                       max_identities: int | None = None) -> UnlinkabilityStats:
    """Mated vs non-mated cross-seed score distributions.

    Under different seeds, templates of the *same* identity should look no
    more alike than templates of different identities — both means near 1/k.
    Passes when the absolute mean difference is at most 0.02.
    """
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ValueError(f"need >= 2 seeds, got {len(seeds)}")
    usable = [(name, paths) for name, paths in ds.entries if len(paths) >= 2]
    if len(usable) < 2:
        raise ValueError("need >= 2 identities with >= 2 samples each")
    if max_identities is not None:
        usable = usable[:max_identities]

    features = [[fuse_features(extract_features(load_pgm(p.read_bytes()), cfg), cfg)
                 for p in paths[:2]] for _, paths in usable]
    d = len(features[0][0])
    banks = {s: template_bank(cfg, s, d) for s in dict.fromkeys(seeds)}
    cache = {}

    def tmpl(ident: int, sample: int, seed: int):
        key = (ident, sample, seed)
        if key not in cache:
            cache[key] = iom_hash(features[ident][sample], banks[seed])
        return cache[key]

    nids = len(usable)
    pairs = [(seeds[2 * i], seeds[2 * i + 1]) for i in range(len(seeds) // 2)]
    mated, nonmated = [], []
    for sa, sb in pairs:
        for i in range(nids):
            mated.append(index_collision_rate(tmpl(i, 0, sa), tmpl(i, 1, sb)))
            j = (i + 1) % nids
            nonmated.append(index_collision_rate(tmpl(i, 0, sa), tmpl(j, 1, sb)))
    mated_mean = float(np.mean(mated))
    nonmated_mean = float(np.mean(nonmated))
    delta = abs(mated_mean - nonmated_mean)
    return UnlinkabilityStats(mated_pairs=len(mated), nonmated_pairs=len(nonmated),
                              mated_mean=mated_mean, nonmated_mean=nonmated_mean,
                              delta=delta, passed=delta <= 0.02)


# ---------------------------------------------------------------------------
# Timing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimingStats:
    n: int
    mean_ms: float
    p95_ms: float
    bank_build_ms: float


def timing_report(ds: Dataset, seed: int, cfg: PipelineConfig = PipelineConfig(),
                  limit: int = 50) -> TimingStats:
    """Wall-clock extract+fuse+hash per image, decode and disk I/O excluded.

    The projection bank is built once up front (its cost is reported
    separately) since enrollment amortizes it across images.
    """
    paths = [p for _, ps in ds.entries for p in ps][:max(limit, 10)]
    if len(paths) < 10:
        raise ValueError(f"need >= 10 samples for a stable mean, got {len(paths)}")
    images = [load_pgm(p.read_bytes()) for p in paths]

    c0 = fuse_features(extract_features(images[0], cfg), cfg)
    t0 = time.perf_counter()
    bank = template_bank(cfg, seed, len(c0))
    bank_ms = (time.perf_counter() - t0) * 1e3

    times = np.empty(len(images))
    for i, img in enumerate(images):
        t0 = time.perf_counter()
        iom_hash(fuse_features(extract_features(img, cfg), cfg), bank)
        times[i] = (time.perf_counter() - t0) * 1e3
    return TimingStats(n=len(images), mean_ms=float(times.mean()),
                       p95_ms=float(np.percentile(times, 95)),
                       bank_build_ms=float(bank_ms))


# ---------------------------------------------------------------------------
# Full evaluation runs and report rendering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalReport:
    config: PipelineConfig
    seed: int
    identities: int
    samples: int
    skipped_files: int
    skipped_identities: int
    genuine_pairs: int
    impostor_pairs: int
    eer_pre_pct: float
    eer_post_pct: float
    accuracy_loss_pct: float
    genuine_mean_pre: float
    impostor_mean_pre: float
    genuine_mean_post: float
    impostor_mean_post: float
    revocability: RevocabilityStats
    unlinkability: UnlinkabilityStats
    timing: TimingStats | None
    notes: tuple


def evaluate(root, seed: int, cfg: PipelineConfig = PipelineConfig(),
             protocol: Protocol = Protocol(), rev_pairs: int = 2,
             with_timing: bool = True):
    """Full run: pre/post protocols, EERs, protection stats, timing.

    Returns (report, pre_scores, post_scores).  Everything except the timing
    numbers is a deterministic function of (dataset bytes, seed, cfg,
    protocol).
    """
    ds = scan_dataset(root)
    notes = []
    if ds.skipped_files:
        notes.append(f"skipped {ds.skipped_files} unreadable files")
    if ds.skipped_identities:
        notes.append(f"skipped {ds.skipped_identities} identities with no readable images")
    notes.append(f"impostor protocol: {protocol.impostor}")

    feats: dict = {}

    def prepare_features(path) -> Features:
        if path not in feats:
            feats[path] = extract_features(load_pgm(path.read_bytes()), cfg)
        return feats[path]

    first = prepare_features(ds.entries[0][1][0])
    mcfg = match_config(cfg, first.cell_shape)
    pre = gen_scores(ds, prepare_features,
                     lambda a, b: pre_transform_score(a.pair, b.pair, mcfg), protocol)

    bank = template_bank(cfg, seed, len(fuse_features(first, cfg)))
    tmpls: dict = {}

    def prepare_template(path):
        if path not in tmpls:
            tmpls[path] = iom_hash(fuse_features(prepare_features(path), cfg), bank)
        return tmpls[path]

    post = gen_scores(ds, prepare_template, post_transform_score, protocol)

    eer_pre = compute_eer(pre) * 100.0
    eer_post = compute_eer(post) * 100.0

    rev_seeds = [derive_seed(seed, 0xE0, i) for i in range(2 * rev_pairs)]
    first_img = load_pgm(ds.entries[0][1][0].read_bytes())
    rev = revocability_test(first_img, rev_seeds, cfg)
    unlink = unlinkability_test(ds, rev_seeds, cfg)
    timing = timing_report(ds, seed, cfg) if with_timing else None

    report = EvalReport(
        config=cfg, seed=seed,
        identities=ds.identities, samples=ds.samples,
        skipped_files=ds.skipped_files, skipped_identities=ds.skipped_identities,
        genuine_pairs=len(pre.genuine), impostor_pairs=len(pre.impostor),
        eer_pre_pct=eer_pre, eer_post_pct=eer_post,
        accuracy_loss_pct=accuracy_loss(eer_pre, eer_post),
        genuine_mean_pre=float(pre.genuine.mean()),
        impostor_mean_pre=float(pre.impostor.mean()),
        genuine_mean_post=float(post.genuine.mean()),
        impostor_mean_post=float(post.impostor.mean()),
        revocability=rev, unlinkability=unlink, timing=timing,
        notes=tuple(notes))
    return report, pre, post


def report_rows(report: EvalReport) -> list:
    """(metric, value) rows; fixed order and formatting, timing rows last."""
    rows = [("seed", f"{report.seed:#x}")]
    rows += [(f"config.{k}", v) for k, v in config_items(report.config)]
    rows += [
        ("identities", str(report.identities)),
        ("samples", str(report.samples)),
        ("skipped_files", str(report.skipped_files)),
        ("skipped_identities", str(report.skipped_identities)),
        ("genuine_pairs", str(report.genuine_pairs)),
        ("impostor_pairs", str(report.impostor_pairs)),
        ("eer_pre_pct", f"{report.eer_pre_pct:.4f}"),
        ("eer_post_pct", f"{report.eer_post_pct:.4f}"),
        ("accuracy_loss_pct", f"{report.accuracy_loss_pct:.4f}"),
        ("genuine_mean_pre", f"{report.genuine_mean_pre:.6f}"),
        ("impostor_mean_pre", f"{report.impostor_mean_pre:.6f}"),
        ("genuine_mean_post", f"{report.genuine_mean_post:.6f}"),
        ("impostor_mean_post", f"{report.impostor_mean_post:.6f}"),
        ("revocability.pairs", str(report.revocability.pairs)),
        ("revocability.cross_mean", f"{report.revocability.cross_mean:.6f}"),
        ("revocability.cross_std", f"{report.revocability.cross_std:.6f}"),
        ("revocability.mated_mean", f"{report.revocability.mated_mean:.6f}"),
        ("revocability.expected", f"{report.revocability.expected:.6f}"),
        ("revocability.bound", f"{report.revocability.bound:.6f}"),
        ("revocability.passed", str(report.revocability.passed).lower()),
        ("unlinkability.mated_mean", f"{report.unlinkability.mated_mean:.6f}"),
        ("unlinkability.nonmated_mean", f"{report.unlinkability.nonmated_mean:.6f}"),
        ("unlinkability.delta", f"{report.unlinkability.delta:.6f}"),
        ("unlinkability.passed", str(report.unlinkability.passed).lower()),
    ]
    for i, note in enumerate(report.notes):
        rows.append((f"note.{i}", note))
    if report.timing is not None:
        rows += [
            ("timing.n", str(report.timing.n)),
            ("timing.mean_ms", f"{report.timing.mean_ms:.2f}"),
            ("timing.p95_ms", f"{report.timing.p95_ms:.2f}"),
            ("timing.bank_build_ms", f"{report.timing.bank_build_ms:.2f}"),
        ]
    return rows


def report_csv(report: EvalReport) -> str:
    return "metric,value\n" + "".join(f"{k},{v}\n" for k, v in report_rows(report))


def roc_csv(scores: ScoreSet, cfg: PipelineConfig | None = None) -> str:
    lines = []
    if cfg is not None:
        lines += [f"# {k}={v}" for k, v in config_items(cfg)]
    lines.append("threshold,far,frr")
    for t, far, frr in roc_points(scores):
        lines.append(f"{'inf' if np.isinf(t) else format(t, '.6f')},{far:.6f},{frr:.6f}")
    return "\n".join(lines) + "\n"


def report_text(report: EvalReport) -> str:
    """Human-readable summary of an evaluation run."""
    r = report
    lines = [
        "evaluation summary",
        "==================",
        f"dataset: {r.identities} identities, {r.samples} samples "
        f"({r.genuine_pairs} genuine / {r.impostor_pairs} impostor pairs)",
        f"EER pre-transform:  {r.eer_pre_pct:.4f}%",
        f"EER post-transform: {r.eer_post_pct:.4f}%",
        f"accuracy loss:      {r.accuracy_loss_pct:.4f} percentage points",
        f"score means post-transform: genuine {r.genuine_mean_post:.4f}, "
        f"impostor {r.impostor_mean_post:.4f}",
        f"revocability: cross-seed mean {r.revocability.cross_mean:.4f} "
        f"(expect {r.revocability.expected:.4f} +/- {r.revocability.bound:.4f}), "
        f"mated {r.revocability.mated_mean:.4f} -> "
        f"{'pass' if r.revocability.passed else 'FAIL'}",
        f"unlinkability: mated {r.unlinkability.mated_mean:.4f} vs non-mated "
        f"{r.unlinkability.nonmated_mean:.4f} (delta {r.unlinkability.delta:.4f}) -> "
        f"{'pass' if r.unlinkability.passed else 'FAIL'}",
    ]
    if r.timing is not None:
        lines.append(f"timing: mean {r.timing.mean_ms:.1f} ms/image, "
                     f"p95 {r.timing.p95_ms:.1f} ms over {r.timing.n} images "
                     f"(bank build {r.timing.bank_build_ms:.1f} ms, amortized)")
    for note in r.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"
