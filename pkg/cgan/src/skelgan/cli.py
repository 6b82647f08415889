"""Command line entry points: train | infer | score."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .data import load_grayscale, to_model_frame
from .train import MODEL_NAME, TrainSpec, load_model, train

SKELETON_SUFFIX = ".skel.png"
SCAN_SUFFIX = ".scan.png"


class CliError(Exception):
    pass


def cmd_train(args) -> int:
    spec = TrainSpec(
        manifest=args.manifest,
        out_dir=args.out,
        epochs=args.epochs,
        tail_epochs=args.tail_epochs,
        lr=args.lr,
        lr_tail=args.lr_tail,
        lam=args.lam,
        dropout=args.dropout,
        ngf=args.ngf,
        ndf=args.ndf,
        seed=args.seed,
        limit=args.limit,
    )
    last = train(spec, resume=args.resume)
    if last:
        print(
            f"epoch {last['epoch']}: d {last['loss_d']:.4f} "
            f"gan {last['loss_g_gan']:.4f} l1 {last['loss_g_l1']:.4f}"
        )
    print(f"model written to {Path(args.out) / MODEL_NAME}")
    return 0


def _scan_files(scans_dir: Path):
    files = sorted(scans_dir.rglob(f"*{SCAN_SUFFIX}"))
    if not files:
        raise CliError(f"no *{SCAN_SUFFIX} files under {scans_dir}")
    return files


def cmd_infer(args) -> int:
    generator, _ = load_model(args.model)
    # dropout stays on and norms use per-image statistics at inference
    generator.train()
    torch.manual_seed(args.seed)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = _scan_files(Path(args.scans))
    written = []
    with torch.no_grad():
        for path in files:
            sample_id = path.name[: -len(SCAN_SUFFIX)]
            frame = to_model_frame(load_grayscale(path))
            batch = torch.from_numpy(frame)[None, None]
            output = generator(batch)[0, 0].numpy()
            pixels = np.rint(np.clip(output, 0.0, 1.0) * 255.0).astype(np.uint8)
            name = sample_id + SKELETON_SUFFIX
            Image.fromarray(pixels, mode="L").save(out_dir / name)
            written.append(name)
    (out_dir / "infer_meta.json").write_text(
        json.dumps(
            {"model": str(args.model), "seed": args.seed, "outputs": len(written)},
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    print(f"wrote {len(written)} skeletons to {out_dir}")
    return 0


def cmd_score(args) -> int:
    _, discriminator = load_model(args.model)
    discriminator.train()
    scan = torch.from_numpy(to_model_frame(load_grayscale(args.scan)))[None, None]
    candidate = torch.from_numpy(to_model_frame(load_grayscale(args.candidate)))[None, None]
    with torch.no_grad():
        grid = torch.sigmoid(discriminator(scan, candidate))[0, 0].numpy()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(out, grid.astype(np.float64), fmt="%.8f", delimiter=",")
    print(f"wrote {grid.shape[0]}x{grid.shape[1]} score grid to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skelgan",
        description="Train and run the scan-to-skeleton translation model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="train on a scan/skeleton corpus")
    tr.add_argument("--manifest", required=True, help="corpus directory or manifest.json")
    tr.add_argument("--out", required=True, help="run directory for checkpoints and logs")
    tr.add_argument("--epochs", type=int, default=200)
    tr.add_argument("--tail-epochs", type=int, default=50,
                    help="final epochs at the reduced rate")
    tr.add_argument("--lr", type=float, default=1e-3)
    tr.add_argument("--lr-tail", type=float, default=1e-4)
    tr.add_argument("--lam", type=float, default=100.0, help="L1 weight")
    tr.add_argument("--dropout", type=float, default=0.5)
    tr.add_argument("--ngf", type=int, default=16, help="generator width")
    tr.add_argument("--ndf", type=int, default=32, help="discriminator width")
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--limit", type=int, help="use only the first N pairs")
    tr.add_argument("--resume", action="store_true",
                    help="continue from the run directory's checkpoint")
    tr.set_defaults(func=cmd_train)

    inf = sub.add_parser("infer", help="write skeletons for a directory of scans")
    inf.add_argument("--model", required=True, help="model.pt from a training run")
    inf.add_argument("--scans", required=True, help="directory searched for *.scan.png")
    inf.add_argument("--out", required=True)
    inf.add_argument("--seed", type=int, default=0, help="dropout noise seed")
    inf.set_defaults(func=cmd_infer)

    sc = sub.add_parser("score", help="discriminator patch grid for one pair")
    sc.add_argument("--model", required=True)
    sc.add_argument("--scan", required=True)
    sc.add_argument("--candidate", required=True, help="skeleton image to score")
    sc.add_argument("--out", required=True, help="CSV path for the 30x30 grid")
    sc.set_defaults(func=cmd_score)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
