"""Conditional super-resolution: dense-residual encoder, interpolation lift,
spectral refinement, and a residual path from the interpolated field.

The refinement operator's output projection starts at zero, so an untrained
pipeline coincides with its interpolation baseline and training can only
move away from that anchor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numkit import (Tensor, add, concat, conv1d, conv2d, gelu, interp1d,
                      interp2d, linear, reshape)
from .cond import COND_DIM, CondVector
from .fno import FnoConfig, fno_forward, init_fno


@dataclass
class SrConfig:
    t_window: int
    width: int = 64
    blocks: int = 4
    growth: int = 32
    layers_per_block: int = 3
    fno_modes: int = 24
    fno_width: int = 64
    fno_depth: int = 4
    two_d: bool = False

    @property
    def interp_kind(self) -> str:
        return "cubic" if self.two_d else "linear"

    def fno_config(self) -> FnoConfig:
        return FnoConfig(self.width, self.t_window, modes=self.fno_modes,
                         width=self.fno_width, depth=self.fno_depth,
                         two_d=self.two_d)


def _conv_shape(co, ci, two_d, k=3):
    return (co, ci, k, k) if two_d else (co, ci, k)


def init_sr(cfg: SrConfig, rng: np.random.Generator, cond_scale: float = 0.0) -> dict:
    p: dict[str, Tensor] = {}

    def conv(name, ci, co, k=3):
        fan = ci * (k * k if cfg.two_d else k)
        p[f"sr.{name}.w"] = Tensor(
            rng.normal(0.0, np.sqrt(1.0 / fan), _conv_shape(co, ci, cfg.two_d, k)),
            requires_grad=True)
        p[f"sr.{name}.b"] = Tensor(np.zeros(co), requires_grad=True)

    conv("entry", cfg.t_window, cfg.width)
    for b in range(cfg.blocks):
        ch = cfg.width
        for j in range(cfg.layers_per_block):
            conv(f"rdb{b}.conv{j}", ch, cfg.growth)
            ch += cfg.growth
        conv(f"rdb{b}.fuse", ch, cfg.width, k=1)
        p[f"sr.rdb{b}.cond.w"] = Tensor(
            rng.normal(0.0, cond_scale, (COND_DIM, cfg.width)) if cond_scale
            else np.zeros((COND_DIM, cfg.width)), requires_grad=True)
        p[f"sr.rdb{b}.cond.b"] = Tensor(np.zeros(cfg.width), requires_grad=True)
    p.update(init_fno(cfg.fno_config(), rng, prefix="sr.fno",
                      cond_scale=cond_scale, zero_final=True))
    return p


def _interp(x, target, kind, two_d):
    if two_d:
        return interp2d(x, target, kind=kind)
    return interp1d(x, target, kind=kind)


def sr_forward(params: dict, cfg: SrConfig, low, target_shape,
               cond: CondVector | None = None, interp_only: bool = False) -> Tensor:
    """low (B, T, nx_lo[, ny_lo]) -> (B, T, target shape).

    ``target_shape``: int (1D) or (nx, ny); must not shrink the grid.
    ``interp_only`` bypasses the network entirely - the deterministic
    interpolation baseline.
    """
    x = low if isinstance(low, Tensor) else Tensor(np.asarray(low, dtype=float))
    src = x.shape[2:]
    tgt = (target_shape,) if isinstance(target_shape, int) else tuple(target_shape)
    if any(t < s for t, s in zip(tgt, src)):
        raise ValueError(f"target {tgt} below source resolution {src}")
    target = tgt[0] if not cfg.two_d else tgt
    lifted = _interp(x, target, cfg.interp_kind, cfg.two_d)
    if interp_only:
        return lifted

    conv = conv2d if cfg.two_d else conv1d
    cshape = (-1, cfg.width, 1, 1) if cfg.two_d else (-1, cfg.width, 1)
    h = conv(x, params["sr.entry.w"], params["sr.entry.b"])
    for b in range(cfg.blocks):
        dense = h
        for j in range(cfg.layers_per_block):
            out = gelu(conv(dense, params[f"sr.rdb{b}.conv{j}.w"],
                            params[f"sr.rdb{b}.conv{j}.b"]))
            dense = concat([dense, out], axis=1)
        fused = conv(dense, params[f"sr.rdb{b}.fuse.w"], params[f"sr.rdb{b}.fuse.b"])
        if cond is not None:
            c = linear(cond.values, params[f"sr.rdb{b}.cond.w"],
                       params[f"sr.rdb{b}.cond.b"])
            fused = add(fused, reshape(c, cshape))
        h = add(h, fused)
    feats = _interp(h, target, cfg.interp_kind, cfg.two_d)
    refined = fno_forward(params, cfg.fno_config(), feats, cond, prefix="sr.fno")
    return add(refined, lifted)
