"""Dataset scanning, verification protocols, EER, and protection statistics."""

import warnings
from dataclasses import replace

import numpy as np
import pytest

from palmshield.config import PipelineConfig
from palmshield.evaluation import (Dataset, Protocol, ScoreSet, accuracy_loss,
                                   compute_eer, evaluate, gen_scores,
                                   report_csv, report_text, revocability_test,
                                   roc_csv, roc_points, scan_dataset,
                                   timing_report, unlinkability_test)
from palmshield.imaging import SynthSpec, save_pgm, synth_palm, write_synth_dataset


def eer_oracle(genuine, impostor):
    """Plain-loop transcription of the exhaustive threshold sweep."""
    gen = sorted(genuine)
    imp = sorted(impostor)
    thresholds = sorted(set(gen) | set(imp)) + [float("inf")]
    rows = []
    for t in thresholds:
        far = sum(1 for s in imp if s >= t) / len(imp)
        frr = sum(1 for s in gen if s < t) / len(gen)
        rows.append((far, frr))
    for i, (far, frr) in enumerate(rows):
        if far - frr <= 0.0:
            if far == frr:
                return far
            if i == 0:
                return (far + frr) / 2.0
            pfar, pfrr = rows[i - 1]
            alpha = (pfar - pfrr) / ((pfar - pfrr) - (far - frr))
            return pfrr + alpha * (frr - pfrr)
    raise AssertionError("sentinel threshold must cross")


# ---------------------------------------------------------------------------
# Dataset scanning
# ---------------------------------------------------------------------------

def test_scan_finds_identities_and_samples(small_corpus):
    ds = scan_dataset(small_corpus)
    assert ds.identities == 3
    assert [len(paths) for _, paths in ds.entries] == [2, 2, 2]
    assert [label for label, _ in ds.entries] == ["0000", "0001", "0002"]
    assert ds.skipped_files == 0 and ds.skipped_identities == 0


def test_scan_excludes_unreadable_files(tmp_path, small_spec):
    write_synth_dataset(tmp_path / "d", small_spec)
    bad = tmp_path / "d" / "0001" / "0000.pgm"
    bad.write_bytes(b"P5 not really")
    with pytest.warns(UserWarning):
        ds = scan_dataset(tmp_path / "d")
    assert ds.skipped_files == 1
    assert [len(paths) for _, paths in ds.entries] == [2, 1, 2]


def test_scan_drops_identities_with_no_readable_samples(tmp_path, small_spec):
    write_synth_dataset(tmp_path / "d", small_spec)
    for p in (tmp_path / "d" / "0002").glob("*.pgm"):
        p.write_bytes(b"junk")
    with pytest.warns(UserWarning):
        ds = scan_dataset(tmp_path / "d")
    assert ds.identities == 2
    assert ds.skipped_identities == 1


def test_scan_empty_root_raises(tmp_path):
    with pytest.raises(ValueError):
        scan_dataset(tmp_path)


# ---------------------------------------------------------------------------
# Protocols
# ---------------------------------------------------------------------------

def fake_dataset(ids, samples):
    entries = tuple(
        (f"{i:04d}", tuple(f"{i}/{s}" for s in range(samples)))
        for i in range(ids))
    return Dataset(root=None, entries=entries, skipped_files=0,
                   skipped_identities=0)


def pair_counter():
    def prepare(path):
        return path
    def score(a, b):
        return 0.5
    return prepare, score


def test_three_by_two_pair_counts():
    prepare, score = pair_counter()
    s = gen_scores(fake_dataset(3, 2), prepare, score)
    assert len(s.genuine) == 3
    assert len(s.impostor) == 3


def test_twenty_by_eight_pair_counts():
    prepare, score = pair_counter()
    s = gen_scores(fake_dataset(20, 8), prepare, score)
    assert len(s.genuine) == 20 * 28 == 560
    assert len(s.impostor) == 190


def test_full_impostor_protocol_counts():
    prepare, score = pair_counter()
    s = gen_scores(fake_dataset(4, 3), prepare, score,
                   Protocol(impostor="full"))
    # all cross-identity sample pairs: C(4,2) identity pairs x 3 x 3
    assert len(s.impostor) == 6 * 9


def test_full_impostor_subsample_is_deterministic():
    prepare, score = pair_counter()
    proto = Protocol(impostor="full", max_impostor=10)
    ds = fake_dataset(5, 4)
    seen = []
    def recording_score(a, b):
        seen.append((a, b))
        return 0.5
    gen_scores(ds, prepare, recording_score, proto)
    first = [p for p in seen if p[0].split("/")[0] != p[1].split("/")[0]]
    seen.clear()
    gen_scores(ds, prepare, recording_score, proto)
    second = [p for p in seen if p[0].split("/")[0] != p[1].split("/")[0]]
    assert first == second
    assert len(first) == len(set(first)) and len(first) > 0


def test_gen_scores_needs_two_identities():
    prepare, score = pair_counter()
    with pytest.raises(ValueError):
        gen_scores(fake_dataset(1, 4), prepare, score)


def test_prepare_called_once_per_sample():
    calls = []
    def prepare(path):
        calls.append(path)
        return path
    gen_scores(fake_dataset(3, 2), prepare, lambda a, b: 0.0)
    assert len(calls) == 6
    assert len(set(calls)) == 6


# ---------------------------------------------------------------------------
# EER
# ---------------------------------------------------------------------------

def test_eer_perfect_separation():
    s = ScoreSet(genuine=np.full(5, 0.9), impostor=np.full(5, 0.1))
    assert compute_eer(s) == 0.0


def test_eer_identical_distributions():
    vals = np.array([0.2, 0.5, 0.8])
    assert compute_eer(ScoreSet(genuine=vals, impostor=vals.copy())) == pytest.approx(0.5)


def test_eer_worked_crossing():
    s = ScoreSet(genuine=np.array([0.9, 0.8, 0.4]),
                 impostor=np.array([0.85, 0.3, 0.2]))
    assert compute_eer(s) == pytest.approx(1.0 / 3.0)


def test_eer_matches_brute_force(rng):
    for _ in range(100):
        gen = rng.random(int(rng.integers(1, 12)))
        imp = rng.random(int(rng.integers(1, 12)))
        got = compute_eer(ScoreSet(genuine=gen, impostor=imp))
        assert got == pytest.approx(eer_oracle(gen.tolist(), imp.tolist()), abs=1e-12)


def test_eer_invariant_under_monotone_rescaling(rng):
    gen = rng.random(20)
    imp = rng.random(20) * 0.8
    base = compute_eer(ScoreSet(genuine=gen, impostor=imp))
    squashed = compute_eer(ScoreSet(genuine=gen ** 3, impostor=imp ** 3))
    assert base == pytest.approx(squashed)


def test_eer_rejects_empty_sides():
    with pytest.raises(ValueError):
        compute_eer(ScoreSet(genuine=np.array([]), impostor=np.array([0.5])))


def test_score_set_validates_range():
    with pytest.raises(ValueError):
        ScoreSet(genuine=np.array([1.5]), impostor=np.array([0.5]))


def test_roc_points_monotone(rng):
    s = ScoreSet(genuine=rng.random(30), impostor=rng.random(30))
    pts = roc_points(s)
    assert pts.shape[1] == 3
    assert np.all(np.diff(pts[:, 1]) <= 0)  # FAR falls as threshold rises
    assert np.all(np.diff(pts[:, 2]) >= 0)  # FRR rises
    assert pts[-1, 1] == 0.0 and pts[0, 2] == 0.0


def test_accuracy_loss_examples():
    assert accuracy_loss(0.09, 0.17) == pytest.approx(0.08)
    assert accuracy_loss(0.5, 0.5) == 0.0
    assert accuracy_loss(0.10, 0.19) == pytest.approx(0.09)


# ---------------------------------------------------------------------------
# Protection statistics
# ---------------------------------------------------------------------------

def small_cfg():
    return replace(PipelineConfig(), block_count=1, iom_l=60)


def small_image():
    spec = SynthSpec(width=24, height=24, line_count=6, texture_bumps=6,
                     dot_count=4)
    return synth_palm(spec, 0, 0)


def test_revocability_identical_seeds_scores_one():
    stats = revocability_test(small_image(), [5, 5], small_cfg())
    assert stats.pairs == 1
    assert stats.cross_mean == 1.0
    assert stats.mated_mean == 1.0


def test_revocability_k2_collides_about_half_the_time():
    cfg = replace(small_cfg(), iom_k=2, iom_l=420)
    seeds = list(range(40))
    stats = revocability_test(small_image(), seeds, cfg)
    assert stats.expected == 0.5
    assert abs(stats.cross_mean - 0.5) <= stats.bound
    assert stats.mated_mean == 1.0


def test_revocability_needs_two_seeds():
    with pytest.raises(ValueError):
        revocability_test(small_image(), [1], small_cfg())


def test_unlinkability_identical_identities_have_zero_delta(tmp_path):
    img = small_image()
    for i in range(3):
        d = tmp_path / f"{i:04d}"
        d.mkdir()
        for s in range(2):
            (d / f"{s:04d}.pgm").write_bytes(save_pgm(img))
    ds = scan_dataset(tmp_path)
    stats = unlinkability_test(ds, [11, 22], small_cfg())
    assert stats.mated_pairs == 3 and stats.nonmated_pairs == 3
    assert stats.delta == 0.0
    assert stats.passed


def test_unlinkability_on_distinct_identities(small_corpus):
    ds = scan_dataset(small_corpus)
    stats = unlinkability_test(ds, [11, 22], replace(small_cfg(), block_count=4))
    assert 0.0 <= stats.mated_mean <= 1.0
    assert 0.0 <= stats.nonmated_mean <= 1.0
    assert stats.delta == abs(stats.mated_mean - stats.nonmated_mean)


# ---------------------------------------------------------------------------
# Timing
# ---------------------------------------------------------------------------

def test_timing_reports_mean_and_p95(tmp_path):
    spec = SynthSpec(identities=5, samples_per_identity=2, width=48, height=48,
                     line_count=10, texture_bumps=8, dot_count=8)
    write_synth_dataset(tmp_path / "t", spec)
    ds = scan_dataset(tmp_path / "t")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # block-count note on 48px images
        stats = timing_report(ds, seed=3, cfg=PipelineConfig(), limit=12)
    assert stats.n == 10
    assert stats.mean_ms > 0
    assert stats.p95_ms >= stats.mean_ms * 0.5
    assert stats.bank_build_ms > 0


def test_timing_small_images_are_cheaper(tmp_path):
    big = SynthSpec(identities=5, samples_per_identity=2)
    tiny = SynthSpec(identities=5, samples_per_identity=2, width=24, height=24,
                     line_count=6, texture_bumps=6, dot_count=4)
    write_synth_dataset(tmp_path / "big", big)
    write_synth_dataset(tmp_path / "tiny", tiny)
    cfg_big = PipelineConfig()
    cfg_tiny = replace(PipelineConfig(), block_count=1)
    t_big = timing_report(scan_dataset(tmp_path / "big"), seed=3, cfg=cfg_big)
    t_tiny = timing_report(scan_dataset(tmp_path / "tiny"), seed=3, cfg=cfg_tiny)
    assert t_tiny.mean_ms < t_big.mean_ms


# ---------------------------------------------------------------------------
# Full evaluation
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_eval(tmp_path_factory):
    spec = SynthSpec(identities=3, samples_per_identity=2, width=48, height=48,
                     line_count=10, texture_bumps=8, dot_count=8)
    root = tmp_path_factory.mktemp("eval") / "ds"
    write_synth_dataset(root, spec)
    cfg = replace(PipelineConfig(), block_count=4, iom_l=120)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return evaluate(root, seed=99, cfg=cfg, with_timing=False), cfg, root


def test_evaluate_report_coherence(small_eval):
    (report, pre, post), cfg, _ = small_eval
    assert report.identities == 3 and report.samples == 6
    assert report.genuine_pairs == len(post.genuine) == 3
    assert report.impostor_pairs == len(post.impostor) == 3
    assert report.eer_pre_pct == pytest.approx(compute_eer(pre) * 100.0)
    assert report.eer_post_pct == pytest.approx(compute_eer(post) * 100.0)
    assert report.accuracy_loss_pct == pytest.approx(
        report.eer_post_pct - report.eer_pre_pct)
    assert report.timing is None
    assert any("impostor" in n for n in report.notes)


def test_evaluate_is_deterministic(small_eval):
    (report, _, _), cfg, root = small_eval
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        again, _, _ = evaluate(root, seed=99, cfg=cfg, with_timing=False)
    assert report_csv(report) == report_csv(again)


def test_report_csv_echoes_config(small_eval):
    (report, _, _), cfg, _ = small_eval
    text = report_csv(report)
    assert "config.iom_l,120" in text
    assert "config.block_count,4" in text
    assert text.startswith("metric,value\n")


def test_report_text_mentions_key_metrics(small_eval):
    (report, _, _), _, _ = small_eval
    text = report_text(report)
    for token in ("identities", "EER", "revocability", "unlinkability"):
        assert token in text


def test_roc_csv_shape_and_echo(small_eval):
    (_, pre, _), cfg, _ = small_eval
    text = roc_csv(pre, cfg)
    lines = text.strip().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    assert any("iom_l=120" in ln for ln in comments)
    header_at = len(comments)
    assert lines[header_at] == "threshold,far,frr"
    assert len(lines) > header_at + 1
