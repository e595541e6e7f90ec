"""Downstream tasks: probing, conditional time-stepping, super-resolution."""

from .cond import (COEFF_NAMES, COND_DIM, CondSource, CondVector,
                   coefficient_vector, init_cond_proj, init_linear_cond,
                   init_random_encoder, linear_cond, mae_cond, random_enc_cond)
from .fno import FnoConfig, fno_forward, init_fno
from .probe import (HEAT_BC_CLASSES, PDE_CLASSES, RES_CLASSES_1D,
                    RES_CLASSES_2D, WAVE_BC_CLASSES, ProbeResult, TaskKind,
                    TaskSpec, encode_cls, encode_cls_each, head_forward,
                    init_head, probe_forward, probe_predict, train_probe)
from .sr import SrConfig, init_sr, sr_forward
from .stepper import pushforward_step, rollout
from .train import (SrResult, StepperResult, coarsen, make_stepper,
                    predict_rollout, score_rollout, train_sr,
                    train_timestepper)
from .unet import UnetConfig, adagn, init_unet, unet_forward

__all__ = [name for name in dir() if not name.startswith("_")]
