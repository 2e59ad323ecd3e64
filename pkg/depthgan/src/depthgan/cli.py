"""Command-line entry points: train on a manifest, predict .hwkd files.

Exit codes: 0 success, 1 I/O or file-format error, 2 configuration
error, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import torch

from .errors import ConfigError, FileFormatError, TrainingError
from .models import (
    Discriminator,
    Generator,
    scaled_discriminator_config,
    scaled_generator_config,
)
from .train import TrainConfig, Trainer, predict_to_hwkd, train


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(64)


def _models(scaled):
    if scaled:
        g = Generator(scaled_generator_config())
        d = Discriminator(scaled_discriminator_config())
    else:
        g, d = Generator(), Discriminator()
    return g, d


def _cmd_train(args):
    cfg = TrainConfig(
        batch_size=args.batch,
        epochs=args.epochs,
        fine_tune_epochs=args.fine_tune_epochs,
        seed=args.seed,
        perceptual=args.perceptual,
    )
    generator, discriminator = _models(args.scaled)
    trainer = Trainer(cfg, generator, discriminator)
    if args.resume:
        trainer.load_state_dict(torch.load(args.resume, weights_only=False))
    train(args.manifest, cfg, args.out, eval_fold=args.fold, trainer=trainer)
    return 0


def _cmd_predict(args):
    generator, _ = _models(args.scaled)
    state = torch.load(args.checkpoint, weights_only=False)
    generator.load_state_dict(state["generator"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for heat_path in args.inputs:
        heat_path = Path(heat_path)
        predict_to_hwkd(generator, heat_path, out / f"{heat_path.stem}.pred.hwkd")
    return 0


def main(argv=None):
    parser = _Parser(prog="depthgan")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a simulator dataset manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fold", type=int, default=None, help="held-out fold")
    p.add_argument("--epochs", type=int, default=170)
    p.add_argument("--fine-tune-epochs", type=int, default=30)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perceptual", default="auto", choices=["auto", "vgg16", "none"])
    p.add_argument("--scaled", action="store_true", help="reduced-width models")
    p.add_argument("--resume", default=None, help="checkpoint to resume from")

    p = sub.add_parser("predict", help="write .hwkd predictions for .hwke files")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scaled", action="store_true")
    p.add_argument("inputs", nargs="+", help=".hwke files")

    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args)
        return _cmd_predict(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileFormatError, TrainingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
