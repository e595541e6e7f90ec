"""Small encoder-decoder convolutional stepper with AdaGN conditioning."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numkit import (Tensor, add, avg_pool1d, avg_pool2d, concat, conv1d,
                      conv2d, gelu, group_norm, linear, mul, reshape,
                      upsample_nearest1d, upsample_nearest2d)
from .cond import COND_DIM, CondVector


@dataclass
class UnetConfig:
    in_channels: int
    out_channels: int
    hidden: int = 16
    mults: tuple = (1, 2, 4)
    groups: int = 4
    two_d: bool = False

    @property
    def widths(self):
        return tuple(self.hidden * m for m in self.mults)


def _conv_shape(co, ci, two_d):
    return (co, ci, 3, 3) if two_d else (co, ci, 3)


def init_unet(cfg: UnetConfig, rng: np.random.Generator, prefix: str = "unet",
              cond_scale: float = 0.0) -> dict:
    p: dict[str, Tensor] = {}
    w0, w1, w2 = cfg.widths

    def block(name, ci, co):
        fan = ci * (9 if cfg.two_d else 3)
        p[f"{prefix}.{name}.conv.w"] = Tensor(
            rng.normal(0.0, np.sqrt(1.0 / fan), _conv_shape(co, ci, cfg.two_d)),
            requires_grad=True)
        p[f"{prefix}.{name}.conv.b"] = Tensor(np.zeros(co), requires_grad=True)
        p[f"{prefix}.{name}.gn.g"] = Tensor(np.ones(co), requires_grad=True)
        p[f"{prefix}.{name}.gn.b"] = Tensor(np.zeros(co), requires_grad=True)
        for nm in ("scale", "shift"):
            p[f"{prefix}.{name}.cond.{nm}.w"] = Tensor(
                rng.normal(0.0, cond_scale, (COND_DIM, co)) if cond_scale else
                np.zeros((COND_DIM, co)), requires_grad=True)
            p[f"{prefix}.{name}.cond.{nm}.b"] = Tensor(np.zeros(co), requires_grad=True)

    block("enc0", cfg.in_channels, w0)
    block("down1", w0, w1)
    block("down2", w1, w2)
    block("up1", w2 + w1, w1)
    block("up2", w1 + w0, w0)
    fan = w0 * (9 if cfg.two_d else 3)
    p[f"{prefix}.out.w"] = Tensor(
        rng.normal(0.0, np.sqrt(1.0 / fan), _conv_shape(cfg.out_channels, w0, cfg.two_d)),
        requires_grad=True)
    p[f"{prefix}.out.b"] = Tensor(np.zeros(cfg.out_channels), requires_grad=True)
    return p


def adagn(params: dict, name: str, h: Tensor, cond: CondVector | None,
          groups: int, two_d: bool) -> Tensor:
    """Group norm whose per-channel affine is steered by the conditioning
    vector: h -> gn(h) * (1 + scale(c)) + shift(c)."""
    g = group_norm(h, params[f"{name}.gn.g"], params[f"{name}.gn.b"], groups)
    if cond is None:
        return g
    cshape = (-1, h.shape[1], 1, 1) if two_d else (-1, h.shape[1], 1)
    scale = linear(cond.values, params[f"{name}.cond.scale.w"],
                   params[f"{name}.cond.scale.b"])
    shift = linear(cond.values, params[f"{name}.cond.shift.w"],
                   params[f"{name}.cond.shift.b"])
    out = mul(g, add(reshape(scale, cshape), 1.0))
    return add(out, reshape(shift, cshape))


def unet_forward(params: dict, cfg: UnetConfig, window,
                 cond: CondVector | None = None, prefix: str = "unet") -> Tensor:
    """window (B, C_in, nx[, ny]) -> (B, C_out, same spatial); extents must be
    divisible by 4 (two pooling stages)."""
    x = window if isinstance(window, Tensor) else Tensor(np.asarray(window, dtype=float))
    spatial = x.shape[2:]
    if any(s % 4 for s in spatial):
        raise ValueError(f"spatial extents {spatial} not divisible by 4")
    conv = conv2d if cfg.two_d else conv1d
    pool = avg_pool2d if cfg.two_d else avg_pool1d
    up = upsample_nearest2d if cfg.two_d else upsample_nearest1d

    def block(name, h):
        h = conv(h, params[f"{prefix}.{name}.conv.w"], params[f"{prefix}.{name}.conv.b"])
        h = adagn(params, f"{prefix}.{name}", h, cond, cfg.groups, cfg.two_d)
        return gelu(h)

    h0 = block("enc0", x)
    h1 = block("down1", pool(h0, 2))
    h2 = block("down2", pool(h1, 2))
    u1 = block("up1", concat([up(h2, 2), h1], axis=1))
    u2 = block("up2", concat([up(u1, 2), h0], axis=1))
    return conv(u2, params[f"{prefix}.out.w"], params[f"{prefix}.out.b"])
