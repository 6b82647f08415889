"""Generator and discriminator networks.

The generator is a U-Net: eight stride-2 encoder convolutions down to a 1x1
bottleneck, mirrored by transposed convolutions, with a skip connection
concatenating encoder layer i onto decoder layer n-i. Noise enters only as
dropout on the three innermost decoder blocks, kept active at inference.

The discriminator is a patch classifier over (scan, skeleton) channel pairs.
With 4x4 kernels and strides 2,2,2,1,1 its receptive field is 70x70 and a
256x256 input yields a 30x30 logit grid, one score per patch.

Normalisation is batch norm without running statistics; with batches of one
it computes per-image statistics, which is what the inference path wants.
"""

from __future__ import annotations

import torch
from torch import nn


def _norm(channels: int) -> nn.Module:
    return nn.BatchNorm2d(channels, track_running_stats=False)


def init_weights(module: nn.Module) -> None:
    """Gaussian init, std 0.02; norm scales around 1."""
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d)):
        nn.init.normal_(module.weight, 0.0, 0.02)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
    elif isinstance(module, nn.BatchNorm2d):
        nn.init.normal_(module.weight, 1.0, 0.02)
        nn.init.zeros_(module.bias)


class UNetGenerator(nn.Module):
    def __init__(self, in_channels: int = 1, out_channels: int = 1, ngf: int = 16,
                 dropout: float = 0.5):
        super().__init__()
        widths = [ngf, ngf * 2, ngf * 4, ngf * 8, ngf * 8, ngf * 8, ngf * 8, ngf * 8]

        downs = [nn.Conv2d(in_channels, widths[0], 4, 2, 1)]
        for i in range(1, 8):
            block = [nn.LeakyReLU(0.2), nn.Conv2d(widths[i - 1], widths[i], 4, 2, 1)]
            if i < 7:  # the 1x1 bottleneck carries no norm
                block.append(_norm(widths[i]))
            downs.append(nn.Sequential(*block))
        self.downs = nn.ModuleList(downs)

        # decoder input = previous output concatenated with the mirrored skip
        ups = []
        out_widths = [ngf * 8, ngf * 8, ngf * 8, ngf * 8, ngf * 4, ngf * 2, ngf, out_channels]
        in_widths = [widths[7]] + [out_widths[j] + widths[6 - j] for j in range(7)]
        for j in range(8):
            block = [nn.ReLU(), nn.ConvTranspose2d(in_widths[j], out_widths[j], 4, 2, 1)]
            if j < 7:
                block.append(_norm(out_widths[j]))
            if j < 3:
                block.append(nn.Dropout(dropout))
            ups.append(nn.Sequential(*block))
        self.ups = nn.ModuleList(ups)

        self.apply(init_weights)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        for down in self.downs:
            x = down(x)
            skips.append(x)
        x = skips.pop()
        for j, up in enumerate(self.ups):
            if j > 0:
                x = torch.cat([x, skips.pop()], dim=1)
            x = up(x)
        return torch.sigmoid(x)


class PatchDiscriminator(nn.Module):
    """Scores each 70x70 patch of the second channel given the first."""

    def __init__(self, in_channels: int = 2, ndf: int = 32):
        super().__init__()
        self.layers = nn.Sequential(
            nn.Conv2d(in_channels, ndf, 4, 2, 1),
            nn.LeakyReLU(0.2),
            nn.Conv2d(ndf, ndf * 2, 4, 2, 1),
            _norm(ndf * 2),
            nn.LeakyReLU(0.2),
            nn.Conv2d(ndf * 2, ndf * 4, 4, 2, 1),
            _norm(ndf * 4),
            nn.LeakyReLU(0.2),
            nn.Conv2d(ndf * 4, ndf * 8, 4, 1, 1),
            _norm(ndf * 8),
            nn.LeakyReLU(0.2),
            nn.Conv2d(ndf * 8, 1, 4, 1, 1),
        )
        self.apply(init_weights)

    def forward(self, scan: torch.Tensor, candidate: torch.Tensor) -> torch.Tensor:
        """Logit grid; apply a sigmoid for patch probabilities."""
        return self.layers(torch.cat([scan, candidate], dim=1))
