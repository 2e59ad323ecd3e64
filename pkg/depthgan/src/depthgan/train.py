"""Training loop: dataset access, optimization, logging, checkpoints.

Consumes a simulator dataset through its manifest and file formats only.
Depth targets are converted to grid orientation (azimuth, elevation) and
scaled to roughly [0, 1] by a fixed DEPTH_SCALE; predictions are scaled
back and written as .hwkd files so the simulator's metrics tooling can
score them unmodified.

Determinism contract: with a fixed seed and single-threaded data order,
runs are reproducible, and resuming from a checkpoint replays the exact
loss sequence (model, optimizer, and RNG states are all checkpointed).
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from . import formats
from .errors import ConfigError, TrainingError
from .losses import (
    LossWeights,
    PerceptualLoss,
    discriminator_loss,
    generator_adversarial_loss,
    l1_loss,
)
from .models import Discriminator, DiscriminatorConfig, Generator

DEPTH_SCALE = 10.0  # meters mapped to 1.0


@dataclass
class TrainConfig:
    batch_size: int = 4
    epochs: int = 170
    fine_tune_epochs: int = 30
    learning_rate: float = 2e-4
    fine_tune_rate: float = 2e-5
    betas: tuple = (0.5, 0.999)
    k: int = 5
    seed: int = 0
    perceptual: str = "auto"  # auto | vgg16 | none
    weights: LossWeights = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.k < 2:
            raise ConfigError("k must be at least 2")
        if self.weights is None:
            self.weights = LossWeights()


class PairedDataset:
    """Heat-map/depth-map pairs from a simulator manifest."""

    def __init__(self, manifest_path, folds=None):
        samples, config = formats.load_manifest(manifest_path)
        if folds is not None:
            samples = [s for s in samples if s.fold in folds]
        self.samples = samples
        self.config = config

    def __len__(self):
        return len(self.samples)

    def load(self, index):
        rec = self.samples[index]
        heat = formats.load_heat_map(rec.heat_map)
        depth = formats.load_depth_map(rec.depth_map)
        target = formats.depth_file_to_grid(depth.values) / DEPTH_SCALE
        return heat.power, target.astype(np.float32)

    def batch(self, indices):
        heats, targets = zip(*(self.load(i) for i in indices))
        return (
            torch.from_numpy(np.stack(heats)),
            torch.from_numpy(np.stack(targets)),
        )


def train_eval_folds(manifest_path, eval_fold):
    """(train dataset, eval dataset) split by the manifest's assignment."""
    samples, _ = formats.load_manifest(manifest_path)
    all_folds = {s.fold for s in samples}
    if all_folds == {-1}:
        raise ConfigError(f"{manifest_path}: manifest has no fold assignment")
    if eval_fold not in all_folds:
        raise ConfigError(f"fold {eval_fold} not present in manifest")
    train = PairedDataset(manifest_path, folds=all_folds - {eval_fold})
    held = PairedDataset(manifest_path, folds={eval_fold})
    return train, held


class Trainer:
    def __init__(self, cfg: TrainConfig, generator: Generator = None,
                 discriminator: Discriminator = None):
        self.cfg = cfg
        torch.manual_seed(cfg.seed)
        self.generator = generator or Generator()
        self.discriminator = discriminator or Discriminator(
            DiscriminatorConfig(generator=self.generator.cfg)
        )
        self.perceptual = (
            None if cfg.perceptual == "none" else PerceptualLoss(cfg.perceptual)
        )
        self.opt_g = torch.optim.Adam(
            self.generator.parameters(), lr=cfg.learning_rate, betas=cfg.betas
        )
        self.opt_d = torch.optim.Adam(
            self.discriminator.parameters(), lr=cfg.learning_rate, betas=cfg.betas
        )
        self.rng = np.random.default_rng(cfg.seed)
        self.step_count = 0
        self.epoch = 0

    def set_learning_rate(self, lr):
        for opt in (self.opt_g, self.opt_d):
            for group in opt.param_groups:
                group["lr"] = lr

    def step(self, heat, target):
        """One optimization step on a batch; returns the loss record."""
        self.generator.train()
        self.discriminator.train()

        fake = self.generator(heat)

        self.opt_d.zero_grad()
        d_real = self.discriminator(heat, target)
        d_fake = self.discriminator(heat, fake.detach())
        d_loss = discriminator_loss(d_real, d_fake)
        if not torch.isfinite(d_loss):
            raise TrainingError(
                f"non-finite discriminator loss at step {self.step_count}"
            )
        d_loss.backward()
        self.opt_d.step()

        self.opt_g.zero_grad()
        d_fake_g = self.discriminator(heat, fake)
        g_adv = generator_adversarial_loss(d_fake_g)
        l1 = l1_loss(target, fake)
        lp = (
            self.perceptual(target, fake)
            if self.perceptual is not None
            else torch.zeros(())
        )
        w = self.cfg.weights
        g_total = g_adv + w.lambda_l1 * l1 + w.lambda_p * lp
        if not torch.isfinite(g_total):
            raise TrainingError(f"non-finite generator loss at step {self.step_count}")
        g_total.backward()
        self.opt_g.step()

        self.step_count += 1
        return {
            "step": self.step_count,
            "epoch": self.epoch,
            "g_total": g_total.item(),
            "g_adv": g_adv.item(),
            "l1": l1.item(),
            "lp": lp.item(),
            "d_loss": d_loss.item(),
        }

    def epoch_batches(self, n_samples):
        """Shuffled full batches for one epoch, order driven by self.rng."""
        order = self.rng.permutation(n_samples)
        bs = self.cfg.batch_size
        return [order[i:i + bs] for i in range(0, n_samples - bs + 1, bs)]

    def state_dict(self):
        return {
            "generator": self.generator.state_dict(),
            "discriminator": self.discriminator.state_dict(),
            "opt_g": self.opt_g.state_dict(),
            "opt_d": self.opt_d.state_dict(),
            "np_rng": self.rng.bit_generator.state,
            "torch_rng": torch.get_rng_state(),
            "step_count": self.step_count,
            "epoch": self.epoch,
        }

    def load_state_dict(self, state):
        self.generator.load_state_dict(state["generator"])
        self.discriminator.load_state_dict(state["discriminator"])
        self.opt_g.load_state_dict(state["opt_g"])
        self.opt_d.load_state_dict(state["opt_d"])
        self.rng.bit_generator.state = state["np_rng"]
        torch.set_rng_state(state["torch_rng"])
        self.step_count = state["step_count"]
        self.epoch = state["epoch"]


def train(manifest_path, cfg: TrainConfig, out_dir, eval_fold=None,
          trainer: Trainer = None, max_steps=None):
    """Train on a manifest; writes curves.jsonl and per-epoch checkpoints.

    When eval_fold is given, that fold is held out and a held-out L1 is
    logged per epoch. Returns (trainer, step records).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if eval_fold is None:
        data = PairedDataset(manifest_path)
        held = None
    else:
        data, held = train_eval_folds(manifest_path, eval_fold)
    if len(data) < cfg.batch_size:
        raise ConfigError(
            f"{len(data)} training samples cannot fill a batch of {cfg.batch_size}"
        )
    if trainer is None:
        trainer = Trainer(cfg)

    records = []
    total_epochs = cfg.epochs + cfg.fine_tune_epochs
    log_path = out_dir / "curves.jsonl"
    with open(log_path, "a") as log:
        while trainer.epoch < total_epochs:
            fine = trainer.epoch >= cfg.epochs
            trainer.set_learning_rate(cfg.fine_tune_rate if fine else cfg.learning_rate)
            for indices in trainer.epoch_batches(len(data)):
                rec = trainer.step(*data.batch(indices))
                records.append(rec)
                log.write(json.dumps(rec) + "\n")
                if max_steps is not None and trainer.step_count >= max_steps:
                    break
            trainer.epoch += 1
            summary = {
                "epoch": trainer.epoch,
                "steps": trainer.step_count,
                "fine_tune": fine,
            }
            if held is not None and len(held):
                summary["held_out_l1"] = held_out_l1(trainer.generator, held)
            log.write(json.dumps(summary) + "\n")
            log.flush()
            torch.save(
                trainer.state_dict(), out_dir / f"checkpoint_{trainer.epoch:04d}.pt"
            )
            if max_steps is not None and trainer.step_count >= max_steps:
                break
    return trainer, records


def held_out_l1(generator: Generator, data: PairedDataset) -> float:
    """Mean scaled L1 of the generator over a dataset, in eval mode."""
    generator.eval()
    total = 0.0
    with torch.no_grad():
        for i in range(len(data)):
            heat, target = data.batch([i])
            total += float(l1_loss(target, generator(heat)))
    generator.train()
    return total / max(len(data), 1)


def predict_to_hwkd(generator: Generator, heat_path, out_path):
    """Run the generator on one .hwke file and write a .hwkd prediction."""
    heat = formats.load_heat_map(heat_path)
    generator.eval()
    with torch.no_grad():
        grid = generator(torch.from_numpy(heat.power[None]))[0].numpy()
    meters = np.clip(grid, 0.0, None) * DEPTH_SCALE
    formats.save_depth_map(
        formats.DepthMapFile(
            formats.depth_grid_to_file(meters),
            heat.az_min_deg, heat.az_max_deg, heat.el_min_deg, heat.el_max_deg,
        ),
        out_path,
    )


def evaluate_with_cli(candidate_path, annotations_path, truth_path=None):
    """Score a predicted .hwkd via the simulator's metrics command."""
    cmd = ["mmwsim", "metrics", "--candidate", str(candidate_path),
           "--annotations", str(annotations_path)]
    if truth_path is not None:
        cmd += ["--truth", str(truth_path)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise TrainingError(f"metrics command failed: {proc.stderr.strip()}")
    return json.loads(proc.stdout)
