"""Field <-> token-sequence plumbing: non-overlapping patches and random masks."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..numkit import Tensor, as_tensor, reshape, transpose
from ..pdegen.types import Grid


def _patch_grid(shape, patch) -> tuple:
    if len(shape) != len(patch):
        raise ValueError(f"field rank {len(shape)} vs patch rank {len(patch)}")
    for ext, p in zip(shape, patch):
        if ext % p:
            raise ValueError(f"extent {ext} not divisible by patch size {p}")
    return tuple(ext // p for ext, p in zip(shape, patch))


@dataclass
class PatchSet:
    """Flattened patches plus the visible/masked partition of their indices."""
    patches: np.ndarray          # (N, prod(patch))
    positions: np.ndarray        # (N, rank) integer patch coordinates
    patch: tuple
    patch_grid: tuple
    visible_idx: np.ndarray
    masked_idx: np.ndarray
    grid_ref: Grid | None = None

    def __post_init__(self):
        n = self.patches.shape[0]
        joint = np.concatenate([self.visible_idx, self.masked_idx])
        if len(np.unique(joint)) != n or joint.size != n:
            raise ValueError("visible/masked indices must partition the patches")

    @property
    def n_patches(self) -> int:
        return self.patches.shape[0]

    @property
    def flat_positions(self) -> np.ndarray:
        return np.ravel_multi_index(self.positions.T, self.patch_grid)

    def with_mask(self, visible_idx, masked_idx) -> "PatchSet":
        return replace(self, visible_idx=np.asarray(visible_idx, dtype=int),
                       masked_idx=np.asarray(masked_idx, dtype=int))


def patchify(values: np.ndarray, patch, grid: Grid | None = None) -> PatchSet:
    """Partition one field (T, X[, Y]) into non-overlapping flattened patches."""
    values = np.asarray(values)
    pgrid = _patch_grid(values.shape, patch)
    n = int(np.prod(pgrid))
    if len(patch) == 2:
        (tp, xp), (pt, px) = pgrid, patch
        blocks = values.reshape(tp, pt, xp, px).transpose(0, 2, 1, 3)
        patches = blocks.reshape(n, pt * px)
    else:
        (tp, xp, yp), (pt, px, py) = pgrid, patch
        blocks = values.reshape(tp, pt, xp, px, yp, py).transpose(0, 2, 4, 1, 3, 5)
        patches = blocks.reshape(n, pt * px * py)
    positions = np.stack(np.unravel_index(np.arange(n), pgrid), axis=1)
    return PatchSet(patches, positions, tuple(patch), pgrid,
                    visible_idx=np.arange(n), masked_idx=np.arange(0), grid_ref=grid)


def patchify_batch(values: np.ndarray, patch) -> np.ndarray:
    """(B, T, X[, Y]) -> (B, N, prod(patch)), same ordering as ``patchify``."""
    values = np.asarray(values)
    b = values.shape[0]
    pgrid = _patch_grid(values.shape[1:], patch)
    n = int(np.prod(pgrid))
    if len(patch) == 2:
        (tp, xp), (pt, px) = pgrid, patch
        blocks = values.reshape(b, tp, pt, xp, px).transpose(0, 1, 3, 2, 4)
        return blocks.reshape(b, n, pt * px)
    (tp, xp, yp), (pt, px, py) = pgrid, patch
    blocks = values.reshape(b, tp, pt, xp, px, yp, py).transpose(0, 1, 3, 5, 2, 4, 6)
    return blocks.reshape(b, n, pt * px * py)


def unpatchify(patches, field_shape, patch) -> Tensor:
    """Inverse of patchify; differentiable, accepts (N, P) or batched (B, N, P)."""
    x = as_tensor(patches)
    pgrid = _patch_grid(tuple(field_shape), patch)
    batched = x.ndim == 3
    lead = x.shape[:1] if batched else ()
    if len(patch) == 2:
        (tp, xp), (pt, px) = pgrid, patch
        x = reshape(x, lead + (tp, xp, pt, px))
        perm = (0, 1, 3, 2, 4) if batched else (0, 2, 1, 3)
        x = transpose(x, perm)
        return reshape(x, lead + (tp * pt, xp * px))
    (tp, xp, yp), (pt, px, py) = pgrid, patch
    x = reshape(x, lead + (tp, xp, yp, pt, px, py))
    perm = (0, 1, 4, 2, 5, 3, 6) if batched else (0, 3, 1, 4, 2, 5)
    x = transpose(x, perm)
    return reshape(x, lead + (tp * pt, xp * px, yp * py))


def sample_mask(n: int, ratio: float, rng: np.random.Generator):
    """Uniform partition into (visible, masked); |masked| = round(ratio * n)."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("mask ratio must lie in [0, 1]")
    n_masked = int(round(ratio * n))
    perm = rng.permutation(n)
    return np.sort(perm[n_masked:]), np.sort(perm[:n_masked])
