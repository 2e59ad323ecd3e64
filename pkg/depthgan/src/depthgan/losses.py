"""Loss terms: adversarial, L1, and perceptual.

The discriminator minimizes -E[log D(x, y)] - E[log(1 - D(x, G(x)))].
The generator minimizes the non-saturating adversarial term
-E[log D(x, G(x))] plus weighted L1 and perceptual distances:

    total = adversarial + lambda_l1 * L1 + lambda_p * perceptual

The perceptual distance compares features from a fixed VGG16 trunk
(through relu3_3). Pretrained weights are used when available locally;
otherwise the same architecture with a fixed-seed random initialization
serves as the frozen feature extractor. Depth grids are replicated to
three channels and normalized with standard image statistics first.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .errors import ConfigError, TrainingError

_EPS = 1e-12


@dataclass
class LossWeights:
    lambda_l1: float = 100.0
    lambda_p: float = 10.0

    def __post_init__(self):
        if self.lambda_l1 < 0 or self.lambda_p < 0:
            raise ConfigError("loss weights must be non-negative")


def discriminator_loss(d_real, d_fake):
    return -(torch.log(d_real + _EPS).mean() + torch.log(1.0 - d_fake + _EPS).mean())


def generator_adversarial_loss(d_fake):
    return -torch.log(d_fake + _EPS).mean()


def l1_loss(y, g_out):
    return (y - g_out).abs().mean()


def _vgg16_trunk():
    """VGG16 convolutional layers through relu3_3 (feature extractor)."""
    from torchvision.models import vgg16

    try:
        from torchvision.models import VGG16_Weights

        model = vgg16(weights=VGG16_Weights.IMAGENET1K_V1)
    except Exception:
        torch.manual_seed(0)
        model = vgg16(weights=None)
    return model.features[:16]


def _fallback_trunk():
    """VGG16-shaped random trunk for environments without torchvision."""
    gen = torch.Generator().manual_seed(0)

    def conv(cin, cout):
        w = nn.Conv2d(cin, cout, 3, padding=1)
        with torch.no_grad():
            w.weight.normal_(0.0, 0.05, generator=gen)
            w.bias.zero_()
        return w

    widths = [(3, 64), (64, 64), (64, 128), (128, 128),
              (128, 256), (256, 256), (256, 256)]
    pools_after = {1, 3}
    blocks = []
    for i, (cin, cout) in enumerate(widths):
        blocks += [conv(cin, cout), nn.ReLU(inplace=True)]
        if i in pools_after:
            blocks.append(nn.MaxPool2d(2))
    return nn.Sequential(*blocks)


class PerceptualLoss(nn.Module):
    """Mean absolute feature distance under a frozen image backbone."""

    _MEAN = (0.485, 0.456, 0.406)
    _STD = (0.229, 0.224, 0.225)

    def __init__(self, backbone: str = "auto"):
        super().__init__()
        if backbone == "none":
            self.trunk = None
        else:
            try:
                self.trunk = _vgg16_trunk()
            except ImportError:
                if backbone == "vgg16":
                    raise
                self.trunk = _fallback_trunk()
            self.trunk.eval()
            for p in self.trunk.parameters():
                p.requires_grad_(False)
        mean = torch.tensor(self._MEAN).view(1, 3, 1, 1)
        std = torch.tensor(self._STD).view(1, 3, 1, 1)
        self.register_buffer("mean", mean)
        self.register_buffer("std", std)

    def _features(self, depth):
        img = depth.unsqueeze(1).expand(-1, 3, -1, -1)
        return self.trunk((img - self.mean) / self.std)

    def forward(self, y, g_out):
        if self.trunk is None:
            return torch.zeros((), device=y.device)
        return (self._features(y) - self._features(g_out)).abs().mean()


def compute_loss(d_real, d_fake, y, g_out, weights: LossWeights,
                 perceptual: PerceptualLoss = None):
    """Full (generator total, discriminator) loss pair.

    d_fake must be the discriminator's output on (x, G(x)) with the
    generator graph attached for the generator side.
    """
    d_loss = discriminator_loss(d_real, d_fake)
    g_adv = generator_adversarial_loss(d_fake)
    l1 = l1_loss(y, g_out)
    lp = perceptual(y, g_out) if perceptual is not None else torch.zeros(())
    g_total = g_adv + weights.lambda_l1 * l1 + weights.lambda_p * lp
    for name, value in (("generator", g_total), ("discriminator", d_loss)):
        if not torch.isfinite(value):
            raise TrainingError(f"non-finite {name} loss: {value.item()!r}")
    return g_total, d_loss
