"""Spectral-convolution time-stepper with additive conditioning.

The conditioning projections start at zero, so a conditioned model and its
unconditioned twin produce identical outputs until training moves the
projection weights - "conditioning helps" is then measurable from a
matched start.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..numkit import (Tensor, add, conv1d, conv2d, gelu, linear, reshape,
                      spectral_conv1d, spectral_conv2d)
from .cond import COND_DIM, CondVector

logger = logging.getLogger(__name__)


@dataclass
class FnoConfig:
    in_channels: int
    out_channels: int
    modes: int = 24          # 12 for 2D
    width: int = 64          # 48 for 2D
    depth: int = 4
    two_d: bool = False


def init_fno(cfg: FnoConfig, rng: np.random.Generator, prefix: str = "fno",
             cond_scale: float = 0.0, zero_final: bool = False) -> dict:
    p: dict[str, Tensor] = {}
    w = cfg.width
    spec_scale = 1.0 / (w * w)

    def conv_w(shape, scale):
        return Tensor(rng.normal(0.0, scale, shape), requires_grad=True)

    kshape = (w, cfg.in_channels, 1, 1) if cfg.two_d else (w, cfg.in_channels, 1)
    p[f"{prefix}.lift.w"] = conv_w(kshape, np.sqrt(1.0 / cfg.in_channels))
    p[f"{prefix}.lift.b"] = Tensor(np.zeros(w), requires_grad=True)
    for i in range(cfg.depth):
        if cfg.two_d:
            sshape = (w, w, 2 * cfg.modes, cfg.modes)
        else:
            sshape = (w, w, cfg.modes)
        p[f"{prefix}.layer{i}.spec.wr"] = conv_w(sshape, spec_scale)
        p[f"{prefix}.layer{i}.spec.wi"] = conv_w(sshape, spec_scale)
        lshape = (w, w, 1, 1) if cfg.two_d else (w, w, 1)
        p[f"{prefix}.layer{i}.loc.w"] = conv_w(lshape, np.sqrt(1.0 / w))
        p[f"{prefix}.layer{i}.loc.b"] = Tensor(np.zeros(w), requires_grad=True)
        p[f"{prefix}.layer{i}.cond.w"] = Tensor(
            rng.normal(0.0, cond_scale, (COND_DIM, w)) if cond_scale else
            np.zeros((COND_DIM, w)), requires_grad=True)
        p[f"{prefix}.layer{i}.cond.b"] = Tensor(np.zeros(w), requires_grad=True)
    oshape = (cfg.out_channels, w, 1, 1) if cfg.two_d else (cfg.out_channels, w, 1)
    p[f"{prefix}.proj.w"] = conv_w(oshape, 0.0 if zero_final else np.sqrt(1.0 / w))
    p[f"{prefix}.proj.b"] = Tensor(np.zeros(cfg.out_channels), requires_grad=True)
    return p


def fno_forward(params: dict, cfg: FnoConfig, window, cond: CondVector | None = None,
                prefix: str = "fno") -> Tensor:
    """window (B, C_in, nx[, ny]) -> (B, C_out, nx[, ny]) on a periodic grid."""
    x = window if isinstance(window, Tensor) else Tensor(np.asarray(window, dtype=float))
    conv = conv2d if cfg.two_d else conv1d
    nyquist = min(x.shape[2] // 2, x.shape[3] // 2 + 1) if cfg.two_d \
        else x.shape[2] // 2 + 1
    if nyquist < cfg.modes:
        logger.info("grid supports %d modes < configured %d; truncating",
                    nyquist, cfg.modes)
    x = conv(x, params[f"{prefix}.lift.w"], params[f"{prefix}.lift.b"])
    cshape = (-1, cfg.width, 1, 1) if cfg.two_d else (-1, cfg.width, 1)
    for i in range(cfg.depth):
        if cfg.two_d:
            spec = spectral_conv2d(x, params[f"{prefix}.layer{i}.spec.wr"],
                                   params[f"{prefix}.layer{i}.spec.wi"],
                                   (cfg.modes, cfg.modes))
        else:
            spec = spectral_conv1d(x, params[f"{prefix}.layer{i}.spec.wr"],
                                   params[f"{prefix}.layer{i}.spec.wi"], cfg.modes)
        loc = conv(x, params[f"{prefix}.layer{i}.loc.w"], params[f"{prefix}.layer{i}.loc.b"])
        z = add(spec, loc)
        if cond is not None:
            c = linear(cond.values, params[f"{prefix}.layer{i}.cond.w"],
                       params[f"{prefix}.layer{i}.cond.b"])
            z = add(z, reshape(c, cshape))
        x = gelu(z) if i < cfg.depth - 1 else z
    return conv(x, params[f"{prefix}.proj.w"], params[f"{prefix}.proj.b"])
