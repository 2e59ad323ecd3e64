"""End-to-end acceptance checks for the GAN component.

Each check prints a [PASS]/[FAIL] line naming the criterion.
"""

import math
import sys
from contextlib import contextmanager

import numpy as np
import pytest
import torch

from depthgan import formats
from depthgan.losses import (
    LossWeights,
    PerceptualLoss,
    compute_loss,
    discriminator_loss,
    generator_adversarial_loss,
    l1_loss,
)
from depthgan.models import (
    Discriminator,
    Generator,
    scaled_discriminator_config,
    scaled_generator_config,
    top_m_projection,
)
from depthgan.train import TrainConfig, Trainer, held_out_l1, train_eval_folds


_CAPTURE = [None]


@pytest.fixture(autouse=True)
def _grab_capture_manager(request):
    _CAPTURE[0] = request.config.pluginmanager.getplugin("capturemanager")
    yield


def _emit(line):
    """Print to the real terminal even under pytest's fd-level capture."""
    capman = _CAPTURE[0]
    if capman is not None:
        with capman.global_and_fixture_disabled():
            print(line, file=sys.stderr)
    else:
        print(line, file=sys.stderr)


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        _emit(f"[FAIL] {name}")
        raise
    _emit(f"[PASS] {name}")


def test_shape_and_gradient_flow(dataset_dir):
    with criterion("GAN shape/flow: output shapes, (0,1) probabilities, "
                   "full gradient flow, skip bit-equality"):
        torch.manual_seed(0)
        g = Generator(scaled_generator_config())
        d = Discriminator(scaled_discriminator_config())
        x = torch.rand(2, 64, 32, 96)
        y = torch.rand(2, 256, 128)

        fake = g(x)
        assert fake.shape == (2, 256, 128)
        assert torch.isfinite(fake).all()
        assert g.latent(x).shape == (2, g.cfg.latent_n, 1, 1, 1)

        p = d(x, y)
        assert p.shape == (2,)
        assert (p > 0).all() and (p < 1).all()

        (generator_adversarial_loss(d(x, fake)) + l1_loss(y, fake)).backward()
        for name, param in g.named_parameters():
            assert param.grad is not None and param.grad.abs().max() > 0, name
        d.zero_grad(set_to_none=True)
        discriminator_loss(d(x, y), d(x, fake.detach())).backward()
        for name, param in d.named_parameters():
            assert param.grad is not None and param.grad.abs().max() > 0, name

        mm_imager = pytest.importorskip("mmwsim.imager")
        samples, _ = formats.load_manifest(dataset_dir / "manifest.json")
        path = samples[0].heat_map
        theirs = mm_imager.project_top_m(mm_imager.load_heat_map(path), m=8)
        ours = top_m_projection(
            torch.from_numpy(formats.load_heat_map(path).power[None]), 8
        )[0].numpy()
        assert np.array_equal(ours[:8], theirs.powers)
        assert np.array_equal(ours[8:].astype(np.int32), theirs.indices)


def test_loss_closed_forms():
    with criterion("GAN losses: identity gives L1 = Lp = 0; "
                   "D = 0.5 gives 2 ln 2 within 1e-6"):
        torch.manual_seed(1)
        y = torch.rand(2, 256, 128)
        perceptual = PerceptualLoss("auto")
        g_total, d_loss = compute_loss(
            torch.full((2,), 0.5), torch.full((2,), 0.5), y, y.clone(),
            LossWeights(100.0, 10.0), perceptual,
        )
        assert l1_loss(y, y.clone()).item() == 0.0
        assert perceptual(y, y.clone()).item() == 0.0
        assert abs(d_loss.item() - 2.0 * math.log(2.0)) < 1e-6
        assert abs(g_total.item() - math.log(2.0)) < 1e-6  # adversarial only


def test_training_smoke(dataset_dir):
    with criterion("GAN training smoke: 300 steps reduce generator loss "
                   "and held-out L1 versus the untrained model"):
        cfg = TrainConfig(batch_size=4, epochs=1, seed=0, perceptual="none")
        trainer = Trainer(
            cfg,
            Generator(scaled_generator_config()),
            Discriminator(scaled_discriminator_config()),
        )
        data, held = train_eval_folds(dataset_dir / "manifest.json", 1)
        untrained_l1 = held_out_l1(trainer.generator, held)

        losses = []
        while len(losses) < 300:
            for indices in trainer.epoch_batches(len(data)):
                losses.append(trainer.step(*data.batch(indices))["g_total"])
                if len(losses) >= 300:
                    break

        first = float(np.mean(losses[:10]))
        last = float(np.mean(losses[-10:]))
        trained_l1 = held_out_l1(trainer.generator, held)
        _emit(f"  g_total first10={first:.3f} last10={last:.3f} "
              f"held-out L1 {untrained_l1:.4f} -> {trained_l1:.4f}")
        assert last < first
        assert trained_l1 < untrained_l1
