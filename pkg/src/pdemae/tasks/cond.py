"""Conditioning vectors for the downstream models.

Every source produces the same dim-32 embedding so steppers and the SR
pipeline can stay agnostic about where their context comes from: ground
truth coefficients through a linear map, a pretrained autoencoder's CLS
embedding (frozen or finetuned), or a randomly initialized encoder.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..maecore import MaeConfig, encode, init_params, patchify_batch
from ..numkit import Tensor, linear, no_grad
from ..pdegen.types import Family, PdeSpec

COND_DIM = 32

# ground-truth coefficient vectors per family; families absent here expose
# nothing a linear encoder could embed
COEFF_NAMES = {
    Family.KDV_BURGERS: ("alpha", "beta", "gamma"),
    Family.HEAT_1D: ("nu",),
    Family.ADVECTION_1D: ("c",),
    Family.WAVE_1D: ("c",),
    Family.KS_1D: ("nu",),
    Family.HEAT_2D: ("nu",),
    Family.ADVECTION_2D: ("cx", "cy"),
    Family.BURGERS_2D: ("nu", "cx", "cy"),
    Family.NS_2D: ("nu", "amp"),
}


class CondSource(str, Enum):
    NONE = "none"
    FROZEN_MAE = "mae-frozen"
    FINETUNED_MAE = "mae-finetune"
    RANDOM_ENC = "rand-enc"
    LINEAR_COEFFS = "linear"


@dataclass
class CondVector:
    values: Tensor          # (B, COND_DIM)
    source: CondSource

    def __post_init__(self):
        if self.values.shape[-1] != COND_DIM:
            raise ValueError(f"conditioning dim must be {COND_DIM}")


def coefficient_vector(spec: PdeSpec) -> np.ndarray:
    names = COEFF_NAMES.get(spec.family)
    if names is None:
        raise ValueError(f"no ground-truth coefficients for {spec.family.value}")
    return np.array([float(spec.coefficients[n]) for n in names])


def init_linear_cond(rng: np.random.Generator, n_coeffs: int) -> dict:
    return {"lincond.w": Tensor(rng.normal(0.0, 0.02, (n_coeffs, COND_DIM)),
                                requires_grad=True),
            "lincond.b": Tensor(np.zeros(COND_DIM), requires_grad=True)}


def linear_cond(params: dict, specs) -> CondVector:
    coeffs = Tensor(np.stack([coefficient_vector(s) for s in specs]))
    return CondVector(linear(coeffs, params["lincond.w"], params["lincond.b"]),
                      CondSource.LINEAR_COEFFS)


def init_cond_proj(rng: np.random.Generator, encoder_dim: int) -> dict:
    return {"condproj.w": Tensor(rng.normal(0.0, 0.02, (encoder_dim, COND_DIM)),
                                 requires_grad=True),
            "condproj.b": Tensor(np.zeros(COND_DIM), requires_grad=True)}


def _encode_cls(mae_params: dict, mae_cfg: MaeConfig, windows: np.ndarray) -> Tensor:
    patches = patchify_batch(np.asarray(windows), mae_cfg.patch)
    b, n, _ = patches.shape
    visible = np.tile(np.arange(n), (b, 1))
    return encode(mae_params, mae_cfg, patches, np.arange(n), visible).cls


def mae_cond(mae_params: dict, mae_cfg: MaeConfig, proj_params: dict,
             windows: np.ndarray, frozen: bool = True) -> CondVector:
    """CLS embedding of the unmasked window, projected to the conditioning dim.

    Frozen mode runs the encoder outside the autodiff graph, so a training
    step can only ever touch the projection.
    """
    if frozen:
        with no_grad():
            cls = _encode_cls(mae_params, mae_cfg, windows)
        cls = Tensor(cls.data)
    else:
        cls = _encode_cls(mae_params, mae_cfg, windows)
    values = linear(cls, proj_params["condproj.w"], proj_params["condproj.b"])
    return CondVector(values, CondSource.FROZEN_MAE if frozen
                      else CondSource.FINETUNED_MAE)


def init_random_encoder(mae_cfg: MaeConfig, rng: np.random.Generator) -> dict:
    """Same architecture as the pretrained encoder, fresh weights, trainable."""
    return init_params(mae_cfg, rng)


def random_enc_cond(enc_params: dict, mae_cfg: MaeConfig, proj_params: dict,
                    windows: np.ndarray) -> CondVector:
    cls = _encode_cls(enc_params, mae_cfg, windows)
    values = linear(cls, proj_params["condproj.w"], proj_params["condproj.b"])
    return CondVector(values, CondSource.RANDOM_ENC)
