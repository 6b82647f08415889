"""Adversarial training loop with L1-weighted reconstruction.

The generator minimises BCE against the discriminator's patch grid plus
lam times the L1 distance to the target skeleton; the discriminator takes
alternating updates on real and generated pairs. Optimisation is Adam with
a constant learning rate dropped to a lower value for a tail of final
epochs. Batch size is 1 throughout, which together with statistics-free
batch norm gives per-image normalisation.

Checkpoints carry network, optimiser, and RNG state, so a resumed run
continues the interrupted one exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn

from .data import PairDataset
from .nets import PatchDiscriminator, UNetGenerator

CHECKPOINT_NAME = "checkpoint.pt"
MODEL_NAME = "model.pt"
LOSS_LOG_NAME = "loss_log.csv"


@dataclass(frozen=True)
class TrainSpec:
    manifest: str
    out_dir: str
    epochs: int = 200
    tail_epochs: int = 50  # final epochs run at lr_tail
    lr: float = 1e-3
    lr_tail: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    lam: float = 100.0
    dropout: float = 0.5
    ngf: int = 16
    ndf: int = 32
    seed: int = 0
    limit: int | None = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if not 0 <= self.tail_epochs <= self.epochs:
            raise ValueError("tail_epochs must lie in [0, epochs]")
        for name in ("lr", "lr_tail", "lam"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.ngf < 1 or self.ndf < 1:
            raise ValueError("ngf and ndf must be positive")


def save_model(path, generator, discriminator, spec: TrainSpec, epoch: int) -> None:
    """Weights-only artifact for inference and scoring."""
    torch.save(
        {
            "generator": generator.state_dict(),
            "discriminator": discriminator.state_dict(),
            "ngf": spec.ngf,
            "ndf": spec.ndf,
            "dropout": spec.dropout,
            "epochs_trained": epoch,
        },
        path,
    )


def load_model(path):
    """(generator, discriminator) rebuilt from a saved artifact."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no model at {path}")
    payload = torch.load(path, map_location="cpu", weights_only=True)
    generator = UNetGenerator(ngf=payload["ngf"], dropout=payload["dropout"])
    generator.load_state_dict(payload["generator"])
    discriminator = PatchDiscriminator(ndf=payload["ndf"])
    discriminator.load_state_dict(payload["discriminator"])
    return generator, discriminator


def _epoch_lr(spec: TrainSpec, epoch: int) -> float:
    return spec.lr_tail if epoch >= spec.epochs - spec.tail_epochs else spec.lr


def _set_lr(optimizer, lr: float) -> None:
    for group in optimizer.param_groups:
        group["lr"] = lr


def train(spec: TrainSpec, resume: bool = False) -> dict:
    """Run (or continue) training; returns the last epoch's mean losses."""
    torch.use_deterministic_algorithms(True)
    torch.manual_seed(spec.seed)

    dataset = PairDataset(spec.manifest, limit=spec.limit)
    generator = UNetGenerator(ngf=spec.ngf, dropout=spec.dropout)
    discriminator = PatchDiscriminator(ndf=spec.ndf)
    opt_g = torch.optim.Adam(
        generator.parameters(), lr=spec.lr, betas=(spec.beta1, spec.beta2)
    )
    opt_d = torch.optim.Adam(
        discriminator.parameters(), lr=spec.lr, betas=(spec.beta1, spec.beta2)
    )
    shuffle_rng = torch.Generator().manual_seed(spec.seed)

    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = out_dir / CHECKPOINT_NAME
    start_epoch = 0
    if resume:
        if not checkpoint_path.is_file():
            raise FileNotFoundError(f"no checkpoint to resume at {checkpoint_path}")
        state = torch.load(checkpoint_path, map_location="cpu", weights_only=True)
        for key in ("ngf", "ndf", "dropout"):
            if state["spec"][key] != getattr(spec, key):
                raise ValueError(f"checkpoint {key}={state['spec'][key]} "
                                 f"does not match requested {getattr(spec, key)}")
        generator.load_state_dict(state["generator"])
        discriminator.load_state_dict(state["discriminator"])
        opt_g.load_state_dict(state["opt_g"])
        opt_d.load_state_dict(state["opt_d"])
        torch.set_rng_state(state["torch_rng"])
        shuffle_rng.set_state(state["shuffle_rng"])
        start_epoch = int(state["epoch"])

    bce = nn.BCEWithLogitsLoss()
    l1 = nn.L1Loss()
    generator.train()
    discriminator.train()

    log_path = out_dir / LOSS_LOG_NAME
    if start_epoch == 0 or not log_path.is_file():
        log_path.write_text("epoch,lr,loss_d,loss_g_gan,loss_g_l1\n")

    last = {}
    for epoch in range(start_epoch, spec.epochs):
        lr = _epoch_lr(spec, epoch)
        _set_lr(opt_g, lr)
        _set_lr(opt_d, lr)
        order = torch.randperm(len(dataset), generator=shuffle_rng)
        sums = {"loss_d": 0.0, "loss_g_gan": 0.0, "loss_g_l1": 0.0}
        for index in order.tolist():
            scan, target = dataset.pair(index)
            scan = scan.unsqueeze(0)
            target = target.unsqueeze(0)
            fake = generator(scan)

            opt_d.zero_grad()
            logits_real = discriminator(scan, target)
            logits_fake = discriminator(scan, fake.detach())
            loss_d = 0.5 * (
                bce(logits_real, torch.ones_like(logits_real))
                + bce(logits_fake, torch.zeros_like(logits_fake))
            )
            loss_d.backward()
            opt_d.step()

            opt_g.zero_grad()
            logits_gen = discriminator(scan, fake)
            loss_g_gan = bce(logits_gen, torch.ones_like(logits_gen))
            loss_g_l1 = l1(fake, target)
            (loss_g_gan + spec.lam * loss_g_l1).backward()
            opt_g.step()

            values = (loss_d.item(), loss_g_gan.item(), loss_g_l1.item())
            if not all(math.isfinite(v) for v in values):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch}: "
                    f"d={values[0]} g_gan={values[1]} g_l1={values[2]}"
                )
            sums["loss_d"] += values[0]
            sums["loss_g_gan"] += values[1]
            sums["loss_g_l1"] += values[2]

        last = {key: value / len(dataset) for key, value in sums.items()}
        last["epoch"] = epoch
        last["lr"] = lr
        with log_path.open("a", newline="") as fh:
            csv.writer(fh).writerow(
                [epoch, lr, f"{last['loss_d']:.6f}",
                 f"{last['loss_g_gan']:.6f}", f"{last['loss_g_l1']:.6f}"]
            )
        torch.save(
            {
                "epoch": epoch + 1,
                "generator": generator.state_dict(),
                "discriminator": discriminator.state_dict(),
                "opt_g": opt_g.state_dict(),
                "opt_d": opt_d.state_dict(),
                "torch_rng": torch.get_rng_state(),
                "shuffle_rng": shuffle_rng.get_state(),
                "spec": asdict(spec),
            },
            checkpoint_path,
        )
        save_model(out_dir / MODEL_NAME, generator, discriminator, spec, epoch + 1)

    return last
