"""Command-line front end.

Subcommands: synth, enroll, verify, evaluate, revoke, plus the debug dumps
dump-orientation and dump-keypoints.  Exit codes are a stable scripting
contract: 0 success/accept, 1 reject, 2 any error (usage, decode, protocol).
Seeds are accepted as decimal or 0x-hex and never live in config files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, PipelineConfig, config_items, load_config
from .evaluation import Protocol, evaluate, report_csv, report_text, roc_csv
from .imaging import PgmError, SynthSpec, load_pgm, pad_and_block, save_pgm, \
    write_synth_dataset
from .keypoints import HessianParams, detect_surf, point_feature
from .matching import SeedMismatchError, index_collision_rate, post_transform_score
from .orientation import FusionParams, build_bank, orientation_map
from .pipeline import enroll
from .template import TemplateFormatError, deserialize, serialize


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed {text!r} is not an integer") from None
    if not 0 <= value <= 0xFFFFFFFFFFFFFFFF:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _load_cfg(args) -> PipelineConfig:
    return load_config(args.config) if args.config else PipelineConfig()


def _read_image(path) -> np.ndarray:
    return load_pgm(Path(path).read_bytes())


def _write(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, bytes):
        path.write_bytes(data)
    else:
        path.write_text(data, encoding="utf-8")


def cmd_synth(args) -> int:
    spec = SynthSpec(identities=args.ids, samples_per_identity=args.samples,
                     master_seed=args.seed, width=args.size, height=args.size)
    count = write_synth_dataset(args.out, spec)
    print(f"wrote {count} images ({args.ids} identities x {args.samples} samples) "
          f"to {args.out}")
    return 0


def cmd_enroll(args) -> int:
    cfg = _load_cfg(args)
    t = enroll(_read_image(args.image), args.seed, cfg)
    data = serialize(t)
    _write(args.out, data)
    print(f"enrolled: d={t.d} l={t.l} k={t.k} mode={t.mode} "
          f"({len(data)} bytes) -> {args.out}")
    return 0


def cmd_verify(args) -> int:
    cfg = _load_cfg(args)
    reference = deserialize(Path(args.template).read_bytes())
    probe = enroll(_read_image(args.image), args.seed, cfg)
    score = post_transform_score(probe, reference)
    accept = score >= args.threshold
    print(f"score {score:.4f} threshold {args.threshold:.4f} -> "
          f"{'accept' if accept else 'reject'}")
    return 0 if accept else 1


def cmd_evaluate(args) -> int:
    cfg = _load_cfg(args)
    protocol = Protocol(impostor=args.impostor, max_impostor=args.max_impostor)
    report, pre, post = evaluate(args.dataset, args.seed, cfg, protocol,
                                 rev_pairs=args.rev_pairs)
    out = Path(args.report)
    _write(out, report_csv(report))
    _write(out.with_suffix(".roc_pre.csv"), roc_csv(pre, cfg))
    _write(out.with_suffix(".roc_post.csv"), roc_csv(post, cfg))
    _write(out.with_suffix(".txt"), report_text(report))
    print(report_text(report), end="")
    print(f"report: {out}")
    return 0


def cmd_revoke(args) -> int:
    if args.old_seed == args.new_seed:
        print("error: new seed must differ from the revoked seed", file=sys.stderr)
        return 2
    cfg = _load_cfg(args)
    img = _read_image(args.image)
    old_t = enroll(img, args.old_seed, cfg)
    new_t = enroll(img, args.new_seed, cfg)
    _write(args.out, serialize(new_t))
    rate = index_collision_rate(old_t, new_t)
    print(f"new template -> {args.out}")
    print(f"cross-seed collision rate {rate:.4f} (expected ~{1.0 / cfg.iom_k:.4f} "
          f"for k={cfg.iom_k})")
    return 0


def _config_echo(cfg) -> str:
    return " ".join(f"{k}={v}" for k, v in config_items(cfg))


def cmd_dump_orientation(args) -> int:
    cfg = _load_cfg(args)
    omap = orientation_map(_read_image(args.image), build_bank(cfg.mfrat_window),
                           FusionParams(r=cfg.fusion_r, cyclic_wrap=cfg.cyclic_wrap))
    _write(args.out, save_pgm((omap.astype(np.uint16) * 21).astype(np.uint8),
                              comment=_config_echo(cfg)))
    print(f"orientation map (intensity = code*21) -> {args.out}")
    return 0


def cmd_dump_keypoints(args) -> int:
    cfg = _load_cfg(args)
    img = _read_image(args.image)
    kps = detect_surf(img, HessianParams(threshold=cfg.hessian_threshold))
    lines = [f"# {k}={v}" for k, v in config_items(cfg)]
    lines += ["x,y,scale,response"]
    lines += [f"{kp.x},{kp.y},{kp.scale},{kp.response:.6f}" for kp in kps]
    _write(args.out, "\n".join(lines) + "\n")
    print(f"{len(kps)} keypoints -> {args.out}")
    if args.overlay:
        grid = pad_and_block(img, cfg.block_size)
        pf = point_feature(grid.image, grid,
                           HessianParams(threshold=cfg.hessian_threshold))
        canvas = grid.image.copy()
        h, w = canvas.shape
        for x, y in pf.points:
            for dx, dy in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
                canvas[min(max(y + dy, 0), h - 1), min(max(x + dx, 0), w - 1)] = 255
        _write(args.overlay, save_pgm(canvas, comment=_config_echo(cfg)))
        print(f"representative-point overlay -> {args.overlay}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="palmshield",
        description="Revocable palmprint templates: orientation/point feature "
                    "fusion hashed by index-of-max projections.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="key=value config file (defaults built in)")
        return p

    p = add("synth", cmd_synth, "generate a deterministic synthetic dataset")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--ids", type=int, required=True, help="identity count")
    p.add_argument("--samples", type=int, required=True, help="samples per identity")
    p.add_argument("--seed", type=_seed, required=True, help="master seed (u64 or 0x..)")
    p.add_argument("--size", type=int, default=144, help="image side in pixels")

    p = add("enroll", cmd_enroll, "extract features and write a template file")
    p.add_argument("--image", required=True, help="input PGM")
    p.add_argument("--seed", type=_seed, required=True, help="template seed")
    p.add_argument("--out", required=True, help="template output path")

    p = add("verify", cmd_verify, "match an image against a template")
    p.add_argument("--image", required=True, help="probe PGM")
    p.add_argument("--template", required=True, help="enrolled template file")
    p.add_argument("--seed", type=_seed, required=True, help="template seed")
    p.add_argument("--threshold", type=float, default=0.5, help="accept threshold")

    p = add("evaluate", cmd_evaluate, "run the full evaluation protocol")
    p.add_argument("--dataset", required=True, help="dataset root directory")
    p.add_argument("--seed", type=_seed, required=True, help="template seed")
    p.add_argument("--report", required=True, help="report CSV path")
    p.add_argument("--impostor", choices=("first", "full"), default="first")
    p.add_argument("--max-impostor", type=int, default=50000)
    p.add_argument("--rev-pairs", type=int, default=2,
                   help="seed pairs for the revocability statistic")

    p = add("revoke", cmd_revoke, "reissue a template under a new seed")
    p.add_argument("--image", required=True, help="enrollment PGM")
    p.add_argument("--old-seed", type=_seed, required=True)
    p.add_argument("--new-seed", type=_seed, required=True)
    p.add_argument("--out", required=True, help="new template output path")

    p = add("dump-orientation", cmd_dump_orientation, "debug: orientation map PGM")
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True, help="output PGM path")

    p = add("dump-keypoints", cmd_dump_keypoints, "debug: keypoint CSV (+overlay)")
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--overlay", help="optional representative-point overlay PGM")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PgmError, TemplateFormatError, SeedMismatchError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
