"""Pushforward training and chunked autoregressive rollout."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numkit import Tensor, mse, no_grad


def pushforward_step(model_fn, params: dict, batch: np.ndarray,
                     t_in: int, cond=None, pushforward: bool = True) -> Tensor:
    """One training loss over a batch of trajectory slices (B, nt, ...).

    With pushforward on, the model first predicts a window without gradients,
    then trains on its own (detached) prediction against the following
    window - the model's error doubles as input noise.  Off, it is a plain
    one-step supervised loss.
    """
    nt = batch.shape[1]
    need = 3 * t_in if pushforward else 2 * t_in
    if nt < need:
        raise ValueError(f"trajectory of {nt} steps too short; need {need} "
                         f"(input plus {'two targets' if pushforward else 'one target'})")
    first = Tensor(np.asarray(batch[:, :t_in], dtype=float))
    if not pushforward:
        target = np.asarray(batch[:, t_in:2 * t_in], dtype=float)
        return mse(model_fn(params, first, cond), Tensor(target))
    with no_grad():
        middle = model_fn(params, first, cond).data
    target = np.asarray(batch[:, 2 * t_in:3 * t_in], dtype=float)
    return mse(model_fn(params, Tensor(middle), cond), Tensor(target))


def rollout(model_fn, params: dict, init_window: np.ndarray, horizon: int,
            chunk: int, cond=None) -> np.ndarray:
    """Autoregressive prediction of ``horizon`` steps in ``chunk``-sized calls."""
    if horizon % chunk:
        raise ValueError(f"horizon {horizon} not divisible by chunk {chunk}")
    window = np.asarray(init_window, dtype=float)
    t_in = window.shape[0]
    preds = []
    with no_grad():
        for _ in range(horizon // chunk):
            out = model_fn(params, Tensor(window[None]), cond).data[0]
            if out.shape[0] != chunk:
                raise ValueError(f"model emitted {out.shape[0]} steps, expected {chunk}")
            preds.append(out)
            window = np.concatenate([window, out], axis=0)[-t_in:]
    return np.concatenate(preds, axis=0)
