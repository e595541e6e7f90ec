"""Masked-autoencoder transformer: visible-token encoder, mask-token decoder.

Everything is built from the differentiable kernels in ``numkit``; model
state is a flat ``dict[str, Tensor]`` so optimizers and checkpoints can
treat parameters uniformly by name.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..numkit import (Tensor, add, attention, concat, gather_rows, gelu,
                      layer_norm, linear, mse, mul, pad, reshape,
                      scatter_rows, square, sub, tmean)
from .embed import grid_token, interp_pos_embed, pos_embed
from .patches import unpatchify


class Strategy(str, Enum):
    NONE = "none"
    PAD = "pad"
    INTERP = "interp"
    TOKEN = "token"


@dataclass
class MaeConfig:
    encoder_dim: int = 256
    encoder_depth: int = 6
    encoder_heads: int = 8
    decoder_dim: int = 32
    decoder_depth: int = 2
    decoder_heads: int = 4
    patch: tuple = (5, 5)
    mask_ratio: float = 0.75
    time_window: int = 20
    strategy: Strategy = Strategy.NONE
    masked_loss_only: bool = False
    max_positions: int = 1024
    mlp_ratio: int = 4

    def __post_init__(self):
        self.patch = tuple(int(p) for p in self.patch)
        self.strategy = Strategy(self.strategy)

    @classmethod
    def default_2d(cls, **overrides) -> "MaeConfig":
        base = dict(patch=(4, 4, 4), mask_ratio=0.90, time_window=16)
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        return {"encoder_dim": self.encoder_dim, "encoder_depth": self.encoder_depth,
                "encoder_heads": self.encoder_heads, "decoder_dim": self.decoder_dim,
                "decoder_depth": self.decoder_depth, "decoder_heads": self.decoder_heads,
                "patch": list(self.patch), "mask_ratio": self.mask_ratio,
                "time_window": self.time_window, "strategy": self.strategy.value,
                "masked_loss_only": self.masked_loss_only,
                "max_positions": self.max_positions, "mlp_ratio": self.mlp_ratio}

    @classmethod
    def from_dict(cls, d: dict) -> "MaeConfig":
        return cls(**d)


@dataclass
class LatentState:
    cls: Tensor                   # (B, D)
    tokens: Tensor                # (B, V, D) encoded visible tokens
    grid_token: Tensor | None = None


def _init_linear(params, rng, name, d_in, d_out, scale=0.02):
    params[f"{name}.w"] = Tensor(rng.normal(0.0, scale, (d_in, d_out)), requires_grad=True)
    params[f"{name}.b"] = Tensor(np.zeros(d_out), requires_grad=True)


def _init_block(params, rng, prefix, dim, mlp_ratio):
    params[f"{prefix}.ln1.g"] = Tensor(np.ones(dim), requires_grad=True)
    params[f"{prefix}.ln1.b"] = Tensor(np.zeros(dim), requires_grad=True)
    for nm in ("q", "k", "v", "o"):
        _init_linear(params, rng, f"{prefix}.attn.{nm}", dim, dim)
    params[f"{prefix}.ln2.g"] = Tensor(np.ones(dim), requires_grad=True)
    params[f"{prefix}.ln2.b"] = Tensor(np.zeros(dim), requires_grad=True)
    _init_linear(params, rng, f"{prefix}.mlp.fc1", dim, mlp_ratio * dim)
    _init_linear(params, rng, f"{prefix}.mlp.fc2", mlp_ratio * dim, dim)


def init_params(cfg: MaeConfig, rng: np.random.Generator) -> dict:
    p: dict[str, Tensor] = {}
    patch_values = int(np.prod(cfg.patch))
    _init_linear(p, rng, "patch_embed", patch_values, cfg.encoder_dim)
    p["cls"] = Tensor(rng.normal(0.0, 0.02, (1, 1, cfg.encoder_dim)), requires_grad=True)
    for i in range(cfg.encoder_depth):
        _init_block(p, rng, f"enc.{i}", cfg.encoder_dim, cfg.mlp_ratio)
    p["enc_norm.g"] = Tensor(np.ones(cfg.encoder_dim), requires_grad=True)
    p["enc_norm.b"] = Tensor(np.zeros(cfg.encoder_dim), requires_grad=True)

    _init_linear(p, rng, "dec_embed", cfg.encoder_dim, cfg.decoder_dim)
    p["mask_token"] = Tensor(rng.normal(0.0, 0.02, (1, 1, cfg.decoder_dim)), requires_grad=True)
    for i in range(cfg.decoder_depth):
        _init_block(p, rng, f"dec.{i}", cfg.decoder_dim, cfg.mlp_ratio)
    p["dec_norm.g"] = Tensor(np.ones(cfg.decoder_dim), requires_grad=True)
    p["dec_norm.b"] = Tensor(np.zeros(cfg.decoder_dim), requires_grad=True)
    _init_linear(p, rng, "head", cfg.decoder_dim, patch_values)

    # coordinate-grid embedder (only used under the Token strategy, but kept
    # in every checkpoint so the parameter set does not depend on it)
    coord_channels = 2 if len(cfg.patch) == 3 else 1
    conv = (cfg.encoder_dim, coord_channels, 3, 3) if coord_channels == 2 \
        else (cfg.encoder_dim, coord_channels, 3)
    p["grid.conv1.w"] = Tensor(rng.normal(0.0, 0.02, conv), requires_grad=True)
    p["grid.conv1.b"] = Tensor(np.zeros(cfg.encoder_dim), requires_grad=True)
    conv2_shape = (cfg.encoder_dim, cfg.encoder_dim) + conv[2:]
    p["grid.conv2.w"] = Tensor(rng.normal(0.0, 0.02, conv2_shape), requires_grad=True)
    p["grid.conv2.b"] = Tensor(np.zeros(cfg.encoder_dim), requires_grad=True)
    return p


def _block(p, prefix, x, heads, key_mask=None):
    h = layer_norm(x, p[f"{prefix}.ln1.g"], p[f"{prefix}.ln1.b"])
    q = linear(h, p[f"{prefix}.attn.q.w"], p[f"{prefix}.attn.q.b"])
    k = linear(h, p[f"{prefix}.attn.k.w"], p[f"{prefix}.attn.k.b"])
    v = linear(h, p[f"{prefix}.attn.v.w"], p[f"{prefix}.attn.v.b"])
    att = attention(q, k, v, heads, key_mask=key_mask)
    x = add(x, linear(att, p[f"{prefix}.attn.o.w"], p[f"{prefix}.attn.o.b"]))
    h = layer_norm(x, p[f"{prefix}.ln2.g"], p[f"{prefix}.ln2.b"])
    h = gelu(linear(h, p[f"{prefix}.mlp.fc1.w"], p[f"{prefix}.mlp.fc1.b"]))
    return add(x, linear(h, p[f"{prefix}.mlp.fc2.w"], p[f"{prefix}.mlp.fc2.b"]))


def _broadcast_token(token: Tensor, batch: int, count: int) -> Tensor:
    # (1, 1, D) parameter -> (B, count, D) with gradient accumulation built in
    return add(token, Tensor(np.zeros((batch, count, token.shape[-1]))))


def _pos_table(cfg: MaeConfig, dim: int, n_positions: int) -> np.ndarray:
    base = pos_embed(cfg.max_positions, dim)
    if cfg.strategy == Strategy.INTERP:
        return interp_pos_embed(base, n_positions)
    if n_positions > cfg.max_positions:
        raise ValueError("token count exceeds the positional table")
    return base[:n_positions]


def encode(params: dict, cfg: MaeConfig, patches, positions: np.ndarray,
           visible_idx: np.ndarray, coords: np.ndarray | None = None,
           pad_to: int | None = None) -> LatentState:
    """Embed visible patches (+CLS, +optional grid token) and run the encoder.

    ``patches``: (B, N, P); ``positions``: flat patch indices (N,);
    ``visible_idx``: (B, V) per-sample visible selections.
    """
    visible_idx = np.asarray(visible_idx, dtype=int)
    if visible_idx.ndim != 2 or visible_idx.shape[1] == 0:
        raise ValueError("encoder needs a nonempty (B, V) visible set")
    patches = patches if isinstance(patches, Tensor) else Tensor(np.asarray(patches, dtype=float))
    b, n, _ = patches.shape

    x = linear(patches, params["patch_embed.w"], params["patch_embed.b"])
    table = _pos_table(cfg, cfg.encoder_dim, n)
    x = add(x, Tensor(table[np.asarray(positions, dtype=int)][None]))
    x = gather_rows(x, visible_idx)

    lead = [_broadcast_token(params["cls"], b, 1)]
    if cfg.strategy == Strategy.TOKEN:
        if coords is None:
            raise ValueError("Token strategy requires grid coordinates")
        gt = grid_token(params, coords)                      # (D,)
        lead.append(add(reshape(gt, (1, 1, cfg.encoder_dim)),
                        Tensor(np.zeros((b, 1, cfg.encoder_dim)))))
    x = concat(lead + [x], axis=1)

    key_mask = None
    if pad_to is not None:
        if pad_to < x.shape[1]:
            raise ValueError("pad_to shorter than the token sequence")
        extra = pad_to - x.shape[1]
        if extra:
            x = pad(x, ((0, 0), (0, extra), (0, 0)))
        key_mask = np.zeros((b, pad_to), dtype=bool)
        key_mask[:, :pad_to - extra] = True
    for i in range(cfg.encoder_depth):
        x = _block(params, f"enc.{i}", x, cfg.encoder_heads, key_mask=key_mask)
    x = layer_norm(x, params["enc_norm.g"], params["enc_norm.b"])

    offset = 2 if cfg.strategy == Strategy.TOKEN else 1
    n_real = offset + visible_idx.shape[1]
    gt_out = x[:, 1] if cfg.strategy == Strategy.TOKEN else None
    return LatentState(cls=x[:, 0], tokens=x[:, offset:n_real], grid_token=gt_out)


def decode(params: dict, cfg: MaeConfig, latent: LatentState,
           positions: np.ndarray, visible_idx: np.ndarray,
           masked_idx: np.ndarray, field_shape: tuple) -> Tensor:
    """Reassemble the full token sequence (mask tokens at masked positions),
    run the decoder, and project back to field values."""
    visible_idx = np.asarray(visible_idx, dtype=int)
    masked_idx = np.asarray(masked_idx, dtype=int)
    b, v, _ = latent.tokens.shape
    n = visible_idx.shape[1] + masked_idx.shape[1]
    if v != visible_idx.shape[1]:
        raise ValueError("latent token count does not match visible_idx")

    tv = linear(latent.tokens, params["dec_embed.w"], params["dec_embed.b"])
    seq = scatter_rows(tv, visible_idx, n)
    if masked_idx.shape[1]:
        mtok = _broadcast_token(params["mask_token"], b, masked_idx.shape[1])
        seq = add(seq, scatter_rows(mtok, masked_idx, n))
    table = _pos_table(cfg, cfg.decoder_dim, n)
    seq = add(seq, Tensor(table[np.asarray(positions, dtype=int)][None]))

    cls_d = linear(reshape(latent.cls, (b, 1, cfg.encoder_dim)),
                   params["dec_embed.w"], params["dec_embed.b"])
    x = concat([cls_d, seq], axis=1)
    for i in range(cfg.decoder_depth):
        x = _block(params, f"dec.{i}", x, cfg.decoder_heads)
    x = layer_norm(x, params["dec_norm.g"], params["dec_norm.b"])
    patch_values = linear(x[:, 1:], params["head.w"], params["head.b"])
    return unpatchify(patch_values, field_shape, cfg.patch)


def mae_loss(reconstruction, target) -> Tensor:
    """Mean squared error over the whole field."""
    return mse(reconstruction, target)


def masked_patch_loss(reconstruction: Tensor, target_patches: np.ndarray,
                      masked_idx: np.ndarray, cfg: MaeConfig,
                      field_shape: tuple) -> Tensor:
    """MSE restricted to masked patches (the optional loss variant).

    ``target_patches`` is the (B, N, P) patchified ground truth.
    """
    b = reconstruction.shape[0]
    masked_idx = np.asarray(masked_idx, dtype=int)
    recon_p = _repatchify(reconstruction, cfg.patch, field_shape)
    sel_r = gather_rows(recon_p, masked_idx)
    sel_t = np.asarray(target_patches)[np.arange(b)[:, None], masked_idx]
    return mse(sel_r, Tensor(sel_t))


def _repatchify(fields: Tensor, patch, field_shape) -> Tensor:
    from ..numkit import transpose as ttranspose
    b = fields.shape[0]
    pgrid = tuple(e // p for e, p in zip(field_shape, patch))
    n = int(np.prod(pgrid))
    if len(patch) == 2:
        (tp, xp), (pt, px) = pgrid, patch
        x = reshape(fields, (b, tp, pt, xp, px))
        x = ttranspose(x, (0, 1, 3, 2, 4))
        return reshape(x, (b, n, pt * px))
    (tp, xp, yp), (pt, px, py) = pgrid, patch
    x = reshape(fields, (b, tp, pt, xp, px, yp, py))
    x = ttranspose(x, (0, 1, 3, 5, 2, 4, 6))
    return reshape(x, (b, n, pt * px * py))
