"""Training drivers for the downstream tasks.

These are deliberately small: split, standardize, batch random windows,
optimize, then score on held-out trajectories (summed normalized L2 for
time-stepping, raw RMSE for super-resolution).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bench.metrics import nrmse
from ..maecore import MaeConfig, Standardizer
from ..numkit import AdamW, Tensor, mse, no_grad, one_cycle_lr
from .cond import (CondSource, init_cond_proj, init_linear_cond,
                   init_random_encoder, coefficient_vector, linear_cond,
                   mae_cond, random_enc_cond)
from .fno import FnoConfig, fno_forward, init_fno
from .sr import SrConfig, init_sr, sr_forward
from .stepper import pushforward_step, rollout
from .unet import UnetConfig, init_unet, unet_forward


class _Conditioner:
    """Bundles parameter ownership with the per-batch conditioning call."""

    def __init__(self, variant: CondSource, rng, specs, mae=None,
                 enc_cfg: MaeConfig | None = None):
        self.variant = variant
        self.trainable: dict = {}
        self.mae = mae
        if variant == CondSource.LINEAR_COEFFS:
            n = coefficient_vector(specs[0]).size
            self.trainable.update(init_linear_cond(rng, n))
        elif variant in (CondSource.FROZEN_MAE, CondSource.FINETUNED_MAE):
            if mae is None:
                raise ValueError("MAE conditioning requires a pretrained checkpoint")
            self.trainable.update(init_cond_proj(rng, mae[1].encoder_dim))
            if variant == CondSource.FINETUNED_MAE:
                self.trainable.update(mae[0])
        elif variant == CondSource.RANDOM_ENC:
            if enc_cfg is None:
                raise ValueError("random-encoder conditioning needs an encoder config")
            self.enc_cfg = enc_cfg
            self.enc_params = init_random_encoder(enc_cfg, rng)
            self.trainable.update(self.enc_params)
            self.trainable.update(init_cond_proj(rng, enc_cfg.encoder_dim))

    def __call__(self, raw_windows: np.ndarray, specs):
        if self.variant == CondSource.NONE:
            return None
        if self.variant == CondSource.LINEAR_COEFFS:
            return linear_cond(self.trainable, specs)
        if self.variant in (CondSource.FROZEN_MAE, CondSource.FINETUNED_MAE):
            params, cfg, std = self.mae
            return mae_cond(params, cfg, self.trainable, std.apply(raw_windows),
                            frozen=self.variant == CondSource.FROZEN_MAE)
        scaled = (raw_windows - raw_windows.mean()) / (raw_windows.std() or 1.0)
        return random_enc_cond(self.enc_params, self.enc_cfg, self.trainable, scaled)


def make_stepper(kind: str, t_in: int, chunk: int, two_d: bool):
    if kind == "fno":
        cfg = FnoConfig(t_in, chunk, modes=12 if two_d else 24,
                        width=48 if two_d else 64, two_d=two_d)
        return cfg, init_fno, fno_forward
    if kind == "unet":
        cfg = UnetConfig(t_in, chunk, two_d=two_d)
        return cfg, init_unet, unet_forward
    raise ValueError(f"unknown stepper kind {kind!r}")


@dataclass
class StepperResult:
    params: dict
    model_cfg: object
    standardizer: Standardizer
    variant: CondSource
    cond_params: dict
    train_curve: list
    val_nrmse: list
    conditioner: object = None

    @property
    def mean_nrmse(self) -> float:
        return float(np.mean(self.val_nrmse))


def train_timestepper(samples, *, kind: str = "fno",
                      variant: CondSource = CondSource.NONE, mae=None,
                      t_in: int = 20, chunk: int | None = None,
                      epochs: int = 10, batch_size: int = 16, lr: float = 8e-4,
                      seed: int = 0, val_fraction: float = 0.2,
                      pushforward: bool = True,
                      rollout_horizon: int | None = None) -> StepperResult:
    chunk = chunk or t_in
    two_d = samples[0].grid.is_2d
    need = (3 if pushforward else 2) * t_in
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(samples))
    n_val = max(1, int(round(val_fraction * len(samples))))
    val = [samples[i] for i in perm[:n_val]]
    train = [samples[i] for i in perm[n_val:]]
    std = Standardizer.fit(train)

    cfg, init_fn, forward = make_stepper(kind, t_in, chunk, two_d)
    params = init_fn(cfg, rng)
    spatial = samples[0].values.shape[1:]
    conditioner = _Conditioner(variant, rng, [s.spec for s in samples], mae=mae,
                               enc_cfg=mae[1] if mae else _small_encoder_cfg(t_in, spatial))

    def model_fn(p, window, cond):
        return forward(p, cfg, window, cond)

    trained = {**params, **conditioner.trainable}
    opt = AdamW(trained, lr=lr, weight_decay=1e-4)
    steps_per_epoch = max(1, len(train) // batch_size)
    total = epochs * steps_per_epoch
    curve, step = [], 0
    for epoch in range(epochs):
        order = rng.permutation(len(train))
        losses = []
        for s in range(steps_per_epoch):
            idx = order[s * batch_size:(s + 1) * batch_size]
            slices, specs = [], []
            for i in idx:
                traj = train[i]
                start = rng.integers(0, traj.grid.nt - need + 1)
                slices.append(traj.values[start:start + need])
                specs.append(traj.spec)
            batch = np.stack(slices)
            cond = conditioner(batch[:, :t_in], specs)
            loss = pushforward_step(model_fn, params, std.apply(batch), t_in,
                                    cond=cond, pushforward=pushforward)
            opt.lr = one_cycle_lr(step, total, lr)
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(loss.item())
            step += 1
        curve.append(float(np.mean(losses)))

    scores = [score_rollout(model_fn, params, conditioner, cfg, std, traj,
                            t_in, chunk, rollout_horizon) for traj in val]
    return StepperResult(params, cfg, std, variant, conditioner.trainable,
                         curve, scores, conditioner=conditioner)


def score_rollout(model_fn, params, conditioner, cfg, std, traj, t_in, chunk,
                  horizon: int | None = None) -> float:
    """Summed normalized L2 of an autoregressive rollout against the truth."""
    avail = ((traj.grid.nt - t_in) // chunk) * chunk
    horizon = min(horizon, avail) if horizon else avail
    horizon = (horizon // chunk) * chunk
    init_raw = traj.values[:t_in]
    cond = conditioner(init_raw[None], [traj.spec])
    pred = rollout(model_fn, params, std.apply(init_raw), horizon, chunk, cond=cond)
    truth = traj.values[t_in:t_in + horizon]
    return nrmse(std.invert(pred), truth)


def predict_rollout(result: StepperResult, kind: str, traj,
                    horizon: int | None = None):
    """Autoregressive prediction for one trajectory, in raw units, paired
    with the matching slice of the truth."""
    cfg = result.model_cfg
    forward = fno_forward if kind == "fno" else unet_forward
    t_in, chunk = cfg.in_channels, cfg.out_channels
    avail = ((traj.grid.nt - t_in) // chunk) * chunk
    horizon = min(horizon, avail) if horizon else avail
    horizon = (horizon // chunk) * chunk
    init = traj.values[:t_in]
    cond = result.conditioner(init[None], [traj.spec])
    pred = rollout(lambda p, w, c: forward(p, cfg, w, c), result.params,
                   result.standardizer.apply(init), horizon, chunk, cond=cond)
    return result.standardizer.invert(pred), traj.values[t_in:t_in + horizon]


def _small_encoder_cfg(t_extent: int, spatial: tuple) -> MaeConfig:
    def patch_dim(extent):
        return next(p for p in (5, 4, 3, 2, 1) if extent % p == 0)

    return MaeConfig(encoder_dim=64, encoder_depth=2, encoder_heads=4,
                     decoder_depth=1, time_window=t_extent,
                     patch=tuple(patch_dim(e) for e in (t_extent, *spatial)))


# --------------------------------------------------------------------------
# super-resolution


def coarsen(values: np.ndarray, factor: int, two_d: bool) -> np.ndarray:
    """Strided subsampling along the spatial axes (the index-floor rule)."""
    out = values[..., ::factor] if not two_d else values[..., ::factor, ::factor]
    return np.ascontiguousarray(out)


@dataclass
class SrResult:
    params: dict
    cfg: SrConfig
    standardizer: Standardizer
    train_curve: list
    val_rmse: float
    baseline_rmse: float


def train_sr(samples, *, factor: int = 2, t_window: int = 20,
             variant: CondSource = CondSource.NONE, mae=None,
             epochs: int = 10, batch_size: int = 16, lr: float = 8e-4,
             seed: int = 0, val_fraction: float = 0.2) -> SrResult:
    two_d = samples[0].grid.is_2d
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(samples))
    n_val = max(1, int(round(val_fraction * len(samples))))
    val = [samples[i] for i in perm[:n_val]]
    train = [samples[i] for i in perm[n_val:]]
    std = Standardizer.fit(train)
    cfg = SrConfig(t_window, two_d=two_d,
                   fno_modes=12 if two_d else 24, fno_width=48 if two_d else 64)
    params = init_sr(cfg, rng)
    low_spatial = coarsen(samples[0].values[:1], factor, two_d).shape[1:]
    conditioner = _Conditioner(variant, rng, [s.spec for s in samples], mae=mae,
                               enc_cfg=mae[1] if mae else _small_encoder_cfg(t_window, low_spatial))
    trained = {**params, **conditioner.trainable}
    opt = AdamW(trained, lr=lr, weight_decay=1e-4)

    shape = samples[0].values.shape[1:]
    target = shape if two_d else shape[0]
    steps_per_epoch = max(1, len(train) // batch_size)
    total = epochs * steps_per_epoch
    curve, step = [], 0
    for epoch in range(epochs):
        order = rng.permutation(len(train))
        losses = []
        for s in range(steps_per_epoch):
            idx = order[s * batch_size:(s + 1) * batch_size]
            highs, lows, specs = [], [], []
            for i in idx:
                traj = train[i]
                start = rng.integers(0, traj.grid.nt - t_window + 1)
                win = traj.values[start:start + t_window]
                highs.append(win)
                lows.append(coarsen(win, factor, two_d))
                specs.append(traj.spec)
            high = np.stack(highs)
            low = np.stack(lows)
            cond = conditioner(low, specs)
            out = sr_forward(params, cfg, std.apply(low), target, cond=cond)
            loss = mse(out, Tensor(std.apply(high)))
            opt.lr = one_cycle_lr(step, total, lr)
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(loss.item())
            step += 1
        curve.append(float(np.mean(losses)))

    def batch_rmse(interp_only):
        errs = []
        with no_grad():
            for traj in val:
                win = traj.values[:t_window]
                low = coarsen(win, factor, two_d)[None]
                cond = None if interp_only else conditioner(low, [traj.spec])
                out = sr_forward(params, cfg, std.apply(low), target,
                                 cond=cond, interp_only=interp_only)
                pred = std.invert(out.data[0])
                errs.append(np.mean((pred - win) ** 2))
        return float(np.sqrt(np.mean(errs)))

    return SrResult(params, cfg, std, curve, batch_rmse(False), batch_rmse(True))
