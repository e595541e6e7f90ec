from .embed import grid_coords, grid_token, interp_pos_embed, pos_embed
from .model import (LatentState, MaeConfig, Strategy, decode, encode,
                    init_params, mae_loss, masked_patch_loss)
from .patches import (PatchSet, patchify, patchify_batch, sample_mask,
                      unpatchify)
from .train import (Standardizer, TrainResult, batch_loss, evaluate,
                    load_checkpoint, pretrain, save_checkpoint)

__all__ = [
    "LatentState", "MaeConfig", "PatchSet", "Standardizer", "Strategy",
    "TrainResult", "batch_loss", "decode", "encode", "evaluate",
    "grid_coords", "grid_token", "init_params", "interp_pos_embed",
    "load_checkpoint", "mae_loss", "masked_patch_loss", "patchify",
    "patchify_batch", "pos_embed", "pretrain", "sample_mask",
    "save_checkpoint", "unpatchify",
]
