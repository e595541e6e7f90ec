"""Fixed sinusoidal position tables and the coordinate-grid token embedder."""
from __future__ import annotations

import numpy as np

from ..numkit import Tensor, conv1d, conv2d, gelu, tmean


def pos_embed(length: int, dim: int) -> np.ndarray:
    """Classic sin/cos table, (length, dim).  Column 0 is sin at rate 1."""
    if dim % 2:
        raise ValueError("embedding dim must be even")
    pos = np.arange(length)[:, None]
    rates = np.exp(-np.log(10000.0) * np.arange(dim // 2) / (dim // 2))
    angles = pos * rates[None, :]
    table = np.empty((length, dim))
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles)
    return table


def interp_pos_embed(base: np.ndarray, target_length: int) -> np.ndarray:
    """Linearly resample the base table to ``target_length`` rows."""
    length = base.shape[0]
    if target_length > length:
        raise ValueError(f"target length {target_length} exceeds base {length}")
    if target_length == length:
        return base.copy()
    xs = np.linspace(0.0, length - 1.0, target_length)
    lo = np.floor(xs).astype(int)
    hi = np.minimum(lo + 1, length - 1)
    frac = (xs - lo)[:, None]
    return base[lo] * (1.0 - frac) + base[hi] * frac


def grid_coords(grid) -> np.ndarray:
    """Normalized coordinate array (nx, 1) or (nx, ny, 2) for the token embedder."""
    x = (grid.x_coords - grid.x0) / (grid.x1 - grid.x0)
    if not grid.is_2d:
        return x[:, None]
    y = (grid.y_coords - grid.y0) / (grid.y1 - grid.y0)
    return np.stack(np.meshgrid(x, y, indexing="ij"), axis=-1)


def grid_token(params: dict, coords: np.ndarray) -> Tensor:
    """Two convolutions and a global mean pool squeeze a coordinate grid into
    one encoder-dim vector.  Works for any resolution, so the token can tell
    grids apart under the multi-resolution Token strategy."""
    coords = np.asarray(coords, dtype=float)
    two_d = coords.ndim == 3
    conv = conv2d if two_d else conv1d
    # (1, channels, spatial...) layout expected by the conv kernels
    x = Tensor(np.moveaxis(coords, -1, 0)[None])
    h = gelu(conv(x, params["grid.conv1.w"], params["grid.conv1.b"]))
    h = conv(h, params["grid.conv2.w"], params["grid.conv2.b"])
    h = tmean(h, axis=-1)
    if two_d:
        h = tmean(h, axis=-1)
    return h[0]  # (encoder_dim,)
