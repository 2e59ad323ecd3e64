"""Generator and discriminator for heat-map to depth-map translation.

The generator is an encoder-decoder: five 3D convolutions compress the
(az, el, range) heat-map to an n-vector (n x 1 x 1 x 1 before squeeze),
and seven 2D transposed convolutions expand it to a depth image at four
times the angular resolution. A skip connection injects the top-m range
bins per angular pixel (peak powers plus their bin indices, ties broken
toward the smaller bin) at the input of the third-to-last decoder layer,
where the spatial size matches the input angular grid.

The discriminator scores (heat-map, depth-map) pairs: a 3D encoder of the
same shape as the generator's embeds the heat-map to z, a seven-layer 2D
encoder embeds the depth-map to z'', a fully connected layer maps z to z'
of equal width, and two fully connected layers map the concatenation to a
probability in (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .errors import ConfigError


@dataclass
class GeneratorConfig:
    n_az: int = 64
    n_el: int = 32
    n_range: int = 96
    latent_n: int = 2048
    base_channels: int = 32  # 3D encoder widths double from here
    decoder_channels: int = 1024  # 2D decoder widths halve from here
    skip_m: int = 8

    def __post_init__(self):
        if self.latent_n <= 0:
            raise ConfigError("latent_n must be positive")
        if self.skip_m < 1:
            raise ConfigError("skip_m must be at least 1")
        for name in ("n_az", "n_el", "n_range"):
            v = getattr(self, name)
            if v < 16 or v % 16:
                raise ConfigError(f"{name} must be a multiple of 16, got {v}")
        if self.decoder_channels % 16:
            raise ConfigError("decoder_channels must be divisible by 16")

    @property
    def out_az(self):
        return 4 * self.n_az

    @property
    def out_el(self):
        return 4 * self.n_el


@dataclass
class DiscriminatorConfig:
    generator: GeneratorConfig = None
    image_channels: int = 32  # 2D encoder widths double from here
    fusion_hidden: int = 512

    def __post_init__(self):
        if self.generator is None:
            self.generator = GeneratorConfig()
        if self.fusion_hidden < 1:
            raise ConfigError("fusion_hidden must be positive")


def scaled_generator_config() -> GeneratorConfig:
    """Reduced widths for CPU smoke training (< 2e7 parameters total)."""
    return GeneratorConfig(latent_n=256, base_channels=16, decoder_channels=512)


def scaled_discriminator_config() -> DiscriminatorConfig:
    return DiscriminatorConfig(generator=scaled_generator_config(), image_channels=16)


class HeatMapEncoder(nn.Module):
    """Five 3D convolutions: (B, 1, az, el, range) -> (B, n, 1, 1, 1)."""

    def __init__(self, cfg: GeneratorConfig):
        super().__init__()
        c = cfg.base_channels
        tail = (cfg.n_az // 16, cfg.n_el // 16, cfg.n_range // 16)
        # Convolutions feeding a batch-norm use bias=False: the norm's mean
        # subtraction makes such biases inert (their gradient is zero).
        self.layers = nn.Sequential(
            nn.Conv3d(1, c, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv3d(c, 2 * c, 4, stride=2, padding=1, bias=False),
            nn.BatchNorm3d(2 * c),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv3d(2 * c, 4 * c, 4, stride=2, padding=1, bias=False),
            nn.BatchNorm3d(4 * c),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv3d(4 * c, 8 * c, 4, stride=2, padding=1, bias=False),
            nn.BatchNorm3d(8 * c),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv3d(8 * c, cfg.latent_n, tail, stride=1, padding=0),
        )

    def forward(self, x):
        return self.layers(x)


def top_m_projection(power: torch.Tensor, m: int) -> torch.Tensor:
    """Top-m range bins per angular pixel as skip-connection channels.

    power is (B, az, el, range); the result is (B, 2m, az, el) with the m
    strongest powers in channels [0, m) and their range-bin indices (as
    float) in channels [m, 2m). Ties break toward the smaller bin via a
    stable descending sort, matching the simulator's projection exactly.
    """
    n_rng = power.shape[3]
    if not 1 <= m <= n_rng:
        raise ConfigError(f"skip_m must be in [1, {n_rng}]")
    order = torch.argsort(power, dim=3, descending=True, stable=True)[..., :m]
    powers = torch.gather(power, 3, order)
    stacked = torch.cat([powers, order.to(power.dtype)], dim=3)  # (B, az, el, 2m)
    return stacked.permute(0, 3, 1, 2)


class Generator(nn.Module):
    def __init__(self, cfg: GeneratorConfig = None):
        super().__init__()
        self.cfg = cfg or GeneratorConfig()
        cfg = self.cfg
        self.encoder = HeatMapEncoder(cfg)
        d = cfg.decoder_channels
        m2 = 2 * cfg.skip_m

        def up(cin, cout):
            return [
                nn.ConvTranspose2d(cin, cout, 4, stride=2, padding=1, bias=False),
                nn.BatchNorm2d(cout),
                nn.ReLU(inplace=True),
            ]

        # Layers 1-4: (1, 1) -> (az, el); spatial sizes are (width, height)
        # here and the output is transposed to image order at the end.
        self.head = nn.Sequential(
            nn.ConvTranspose2d(
                cfg.latent_n, d, (cfg.n_az // 8, cfg.n_el // 8),
                stride=1, padding=0, bias=False,
            ),
            nn.BatchNorm2d(d),
            nn.ReLU(inplace=True),
            *up(d, d // 2),
            *up(d // 2, d // 4),
            *up(d // 4, d // 8),
        )
        # Layers 5-7 after the skip concat: (az, el) -> (4 az, 4 el).
        self.tail = nn.Sequential(
            *up(d // 8 + m2, d // 16),
            nn.ConvTranspose2d(d // 16, d // 16, 4, stride=2, padding=1, bias=False),
            nn.BatchNorm2d(d // 16),
            nn.ReLU(inplace=True),
            nn.ConvTranspose2d(d // 16, 1, 3, stride=1, padding=1),
        )

    def forward(self, x):
        """(B, az, el, range) heat-maps -> (B, 4 az, 4 el) depth grids."""
        cfg = self.cfg
        if x.shape[1:] != (cfg.n_az, cfg.n_el, cfg.n_range):
            raise ConfigError(
                f"generator expects {(cfg.n_az, cfg.n_el, cfg.n_range)} "
                f"heat-maps, got {tuple(x.shape[1:])}"
            )
        z = self.encoder(x.unsqueeze(1))  # (B, n, 1, 1, 1)
        h = self.head(z.squeeze(-1))  # (B, d/8, az, el)
        skip = top_m_projection(x, cfg.skip_m)
        h = self.tail(torch.cat([h, skip], dim=1))  # (B, 1, 4 az, 4 el)
        return h.squeeze(1)

    def latent(self, x):
        """Encoder output before squeeze: (B, n, 1, 1, 1)."""
        return self.encoder(x.unsqueeze(1))


class DepthImageEncoder(nn.Module):
    """Seven 2D convolutions: (B, 1, 4 az, 4 el) -> (B, n)."""

    def __init__(self, cfg: DiscriminatorConfig):
        super().__init__()
        g = cfg.generator
        c = cfg.image_channels
        blocks = [nn.Conv2d(1, c, 4, stride=2, padding=1), nn.LeakyReLU(0.2, True)]
        for _ in range(5):
            blocks += [
                nn.Conv2d(c, 2 * c, 4, stride=2, padding=1, bias=False),
                nn.BatchNorm2d(2 * c),
                nn.LeakyReLU(0.2, True),
            ]
            c *= 2
        blocks.append(nn.Conv2d(c, g.latent_n, (g.n_az // 16, g.n_el // 16)))
        self.layers = nn.Sequential(*blocks)

    def forward(self, y):
        return self.layers(y).flatten(1)


class Discriminator(nn.Module):
    def __init__(self, cfg: DiscriminatorConfig = None):
        super().__init__()
        self.cfg = cfg or DiscriminatorConfig()
        g = self.cfg.generator
        self.heat_encoder = HeatMapEncoder(g)
        self.depth_encoder = DepthImageEncoder(self.cfg)
        self.z_to_zprime = nn.Sequential(
            nn.Linear(g.latent_n, g.latent_n), nn.LeakyReLU(0.2, True)
        )
        self.fusion = nn.Sequential(
            nn.Linear(2 * g.latent_n, self.cfg.fusion_hidden),
            nn.LeakyReLU(0.2, True),
            nn.Linear(self.cfg.fusion_hidden, 1),
            nn.Sigmoid(),
        )

    def forward(self, x, y):
        """Probability in (0, 1) that depth y is the real pair of heat x."""
        g = self.cfg.generator
        if x.shape[1:] != (g.n_az, g.n_el, g.n_range):
            raise ConfigError(f"bad heat-map shape {tuple(x.shape[1:])}")
        if y.shape[1:] != (g.out_az, g.out_el):
            raise ConfigError(f"bad depth-map shape {tuple(y.shape[1:])}")
        if x.shape[0] != y.shape[0]:
            raise ConfigError("heat/depth batch sizes differ")
        z = self.heat_encoder(x.unsqueeze(1)).flatten(1)
        z_prime = self.z_to_zprime(z)
        z_dprime = self.depth_encoder(y.unsqueeze(1))
        return self.fusion(torch.cat([z_prime, z_dprime], dim=1)).squeeze(1)


def parameter_count(*modules) -> int:
    return sum(p.numel() for m in modules for p in m.parameters())
