"""Pretraining loop: windowed trajectories, random masking, AdamW + one-cycle."""
from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..liesym import AugmentConfig, augment
from ..numkit import AdamW, NonFiniteError, Tensor, no_grad, one_cycle_lr
from ..pdegen.generate import WORKER_ENV_VAR
from ..pdegen.types import FieldSample
from .model import (MaeConfig, decode, encode, init_params, mae_loss,
                    masked_patch_loss)
from .patches import patchify_batch, sample_mask


@dataclass
class Standardizer:
    mean: float
    std: float

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (values - self.mean) / self.std

    def invert(self, values: np.ndarray) -> np.ndarray:
        return values * self.std + self.mean

    @classmethod
    def fit(cls, samples) -> "Standardizer":
        # two-pass global moments; datasets are small enough to stream twice
        total, count = 0.0, 0
        for s in samples:
            total += float(np.sum(s.values))
            count += s.values.size
        mean = total / count
        sq = sum(float(np.sum((s.values - mean) ** 2)) for s in samples)
        std = float(np.sqrt(sq / count))
        return cls(mean, std if std > 0 else 1.0)


@dataclass
class TrainResult:
    params: dict
    best_params: dict
    config: MaeConfig
    standardizer: Standardizer
    train_curve: list
    val_curve: list
    best_epoch: int


def _window_starts(nt: int, window: int, count: int, rng) -> np.ndarray:
    if window > nt:
        raise ValueError(f"window {window} longer than trajectory {nt}")
    return rng.integers(0, nt - window + 1, size=count)


def _assemble(samples, indices, starts, window, std, aug_cfg, seed_seq_base, epoch,
              workers: int) -> np.ndarray:
    # per-(epoch, sample) rng spawn keeps augmentation deterministic no matter
    # how the thread pool interleaves the builds
    def build(j):
        idx = indices[j]
        s = samples[idx]
        values = s.values[starts[j]:starts[j] + window]
        if aug_cfg is not None:
            rng = np.random.default_rng(
                np.random.SeedSequence(seed_seq_base, spawn_key=(epoch, int(idx))))
            g = dataclasses.replace(
                s.grid, nt=window,
                t0=s.grid.t0 + starts[j] * s.grid.dt,
                t1=s.grid.t0 + (starts[j] + window - 1) * s.grid.dt)
            values = augment(FieldSample(values.copy(), g, s.spec), aug_cfg, rng).values
        return std.apply(values)

    js = range(len(indices))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            built = list(pool.map(build, js))
    else:
        built = [build(j) for j in js]
    return np.stack(built)


def batch_loss(params, cfg: MaeConfig, batch: np.ndarray, mask_rng) -> "Tensor":
    """Forward pass over one standardized batch; returns the scalar loss."""
    b = batch.shape[0]
    patches = patchify_batch(batch, cfg.patch)
    n = patches.shape[1]
    vis, msk = zip(*(sample_mask(n, cfg.mask_ratio, mask_rng) for _ in range(b)))
    visible_idx, masked_idx = np.stack(vis), np.stack(msk)
    positions = np.arange(n)
    latent = encode(params, cfg, patches, positions, visible_idx)
    recon = decode(params, cfg, latent, positions, visible_idx, masked_idx,
                   batch.shape[1:])
    if cfg.masked_loss_only and masked_idx.shape[1]:
        return masked_patch_loss(recon, patches, masked_idx, cfg, batch.shape[1:])
    return mae_loss(recon, Tensor(batch))


def evaluate(params, cfg: MaeConfig, samples, std: Standardizer,
             mask_ratio: float | None = None, mask_seed: int = 10_000) -> float:
    """Mean reconstruction MSE over fixed first windows with a fixed mask draw."""
    eval_cfg = cfg if mask_ratio is None else \
        MaeConfig.from_dict({**cfg.to_dict(), "mask_ratio": mask_ratio})
    rng = np.random.default_rng(mask_seed)
    losses = []
    with no_grad():
        for s in samples:
            batch = std.apply(s.values[:cfg.time_window])[None]
            losses.append(batch_loss(params, eval_cfg, batch, rng).item())
    return float(np.mean(losses))


def worker_count(deterministic: bool) -> int:
    if deterministic:
        return 1
    return max(1, int(os.environ.get(WORKER_ENV_VAR, "1")))


def pretrain(cfg: MaeConfig, samples, *, epochs: int = 20, batch_size: int = 16,
             base_lr: float = 1e-3, weight_decay: float = 0.01, seed: int = 0,
             val_fraction: float = 0.1, augment_cfg: AugmentConfig | None = None,
             deterministic: bool = True, log=None) -> TrainResult:
    """Train the autoencoder; retain the best-validation parameter snapshot.

    Raises NonFiniteError with epoch/step context if the loss ever leaves
    the reals - silently continuing from a poisoned state helps nobody.
    """
    if not samples:
        raise ValueError("empty dataset")
    for s in samples:
        if cfg.time_window > s.grid.nt:
            raise ValueError("time window exceeds a trajectory length")
    std = Standardizer.fit(samples)
    order_rng = np.random.default_rng(seed)
    perm = order_rng.permutation(len(samples))
    n_val = max(1, int(round(val_fraction * len(samples)))) if len(samples) > 1 else 0
    val = [samples[i] for i in perm[:n_val]]
    train = [samples[i] for i in perm[n_val:]]

    params = init_params(cfg, np.random.default_rng(seed + 1))
    opt = AdamW(params, lr=base_lr, weight_decay=weight_decay)
    steps_per_epoch = max(1, len(train) // batch_size)
    total_steps = epochs * steps_per_epoch
    workers = worker_count(deterministic)

    train_curve, val_curve = [], []
    best_val, best_epoch, best_params = np.inf, -1, None
    step = 0
    for epoch in range(epochs):
        epoch_rng = np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(epoch,)))
        indices = epoch_rng.permutation(len(train))
        epoch_losses = []
        for bstart in range(0, steps_per_epoch * batch_size, batch_size):
            idx = indices[bstart:bstart + batch_size]
            starts = np.array([
                epoch_rng.integers(0, train[i].grid.nt - cfg.time_window + 1)
                for i in idx])
            batch = _assemble(train, idx, starts, cfg.time_window, std,
                              augment_cfg, seed, epoch, workers)
            opt.lr = one_cycle_lr(step, total_steps, base_lr)
            try:
                loss = batch_loss(params, cfg, batch, epoch_rng)
                opt.zero_grad()
                loss.backward()
                opt.step()
            except NonFiniteError as err:
                raise NonFiniteError(
                    f"non-finite value at epoch {epoch}, step {step}: {err}") from err
            epoch_losses.append(loss.item())
            step += 1
        val_loss = evaluate(params, cfg, val, std) if val else float(np.mean(epoch_losses))
        train_curve.append(float(np.mean(epoch_losses)))
        val_curve.append(val_loss)
        if log is not None:
            log(f"epoch {epoch:3d}  train {train_curve[-1]:.5f}  val {val_loss:.5f}")
        if val_loss < best_val:
            best_val, best_epoch = val_loss, epoch
            best_params = {k: Tensor(v.data.copy(), requires_grad=True)
                           for k, v in params.items()}
    return TrainResult(params, best_params or params, cfg, std,
                       train_curve, val_curve, best_epoch)


# --------------------------------------------------------------------------
# checkpoint container: parameters + optimizer state + config echo + rng state


def save_checkpoint(path, params: dict, cfg: MaeConfig, std: Standardizer,
                    opt: AdamW | None = None, rng_state: dict | None = None,
                    meta: dict | None = None) -> None:
    arrays = {f"param/{k}": v.data for k, v in params.items()}
    if opt is not None:
        state = opt.state_dict()
        arrays.update({f"opt_m/{k}": v for k, v in state["m"].items()})
        arrays.update({f"opt_v/{k}": v for k, v in state["v"].items()})
        arrays["opt_t"] = np.array(state["t"])
    header = {"config": cfg.to_dict(),
              "standardizer": {"mean": std.mean, "std": std.std},
              "rng_state": rng_state, "meta": meta or {}}
    arrays["header_json"] = np.frombuffer(
        json.dumps(header).encode("utf-8"), dtype=np.uint8)
    np.savez(path, **arrays)


def load_checkpoint(path):
    with np.load(path) as blob:
        header = json.loads(bytes(blob["header_json"].tobytes()).decode("utf-8"))
        params = {k[len("param/"):]: Tensor(blob[k].copy(), requires_grad=True)
                  for k in blob.files if k.startswith("param/")}
        opt_state = None
        if "opt_t" in blob.files:
            opt_state = {
                "m": {k[len("opt_m/"):]: blob[k].copy() for k in blob.files
                      if k.startswith("opt_m/")},
                "v": {k[len("opt_v/"):]: blob[k].copy() for k in blob.files
                      if k.startswith("opt_v/")},
                "t": int(blob["opt_t"])}
    cfg = MaeConfig.from_dict(header["config"])
    std = Standardizer(**header["standardizer"])
    return params, cfg, std, opt_state, header
