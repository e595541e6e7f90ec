"""AdamW with decoupled weight decay, and a one-cycle learning-rate schedule."""

from __future__ import annotations

import numpy as np

from .tensor import NonFiniteError, Tensor


def adamw_step(param: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray,
               t: int, lr: float, betas: tuple[float, float] = (0.9, 0.999),
               eps: float = 1e-8, weight_decay: float = 0.0) -> None:
    """One in-place AdamW update; ``t`` counts steps from 1.

    Weight decay is decoupled: the parameter first shrinks by ``lr * wd``
    multiplicatively, then receives the Adam update computed from the raw
    gradient.
    """
    if not np.all(np.isfinite(grad)):
        raise NonFiniteError("non-finite gradient passed to adamw_step")
    b1, b2 = betas
    m *= b1
    m += (1.0 - b1) * grad
    v *= b2
    v += (1.0 - b2) * grad * grad
    mhat = m / (1.0 - b1 ** t)
    vhat = v / (1.0 - b2 ** t)
    if weight_decay:
        param *= 1.0 - lr * weight_decay
    param -= lr * mhat / (np.sqrt(vhat) + eps)


class AdamW:
    """Stateful wrapper over :func:`adamw_step` for a named parameter dict."""

    def __init__(self, params: dict[str, Tensor], lr: float = 1e-3,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 weight_decay: float = 0.0):
        self.params = params
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self) -> None:
        self.t += 1
        for name, p in self.params.items():
            if p.grad is None:
                continue
            adamw_step(p.data, p.grad, self.m[name], self.v[name], self.t,
                       self.lr, self.betas, self.eps, self.weight_decay)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def state_dict(self) -> dict:
        return {"t": self.t,
                "m": {k: a.copy() for k, a in self.m.items()},
                "v": {k: a.copy() for k, a in self.v.items()}}

    def load_state_dict(self, state: dict) -> None:
        self.t = int(state["t"])
        for k in self.m:
            self.m[k][...] = state["m"][k]
            self.v[k][...] = state["v"][k]


def one_cycle_lr(step: int, total_steps: int, base_lr: float,
                 warmup_frac: float = 0.3, div_factor: float = 25.0,
                 final_div_factor: float = 1e4) -> float:
    """Cosine warmup to ``base_lr`` then cosine anneal to a small floor.

    The schedule starts at ``base_lr / div_factor``, peaks at the end of the
    warmup fraction, and ends at ``initial / final_div_factor``.
    """
    if total_steps <= 0:
        raise ValueError("total_steps must be positive")
    if not 0 <= step <= total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    initial = base_lr / div_factor
    floor = initial / final_div_factor
    warm = warmup_frac * total_steps
    if step <= warm:
        frac = step / warm if warm > 0 else 1.0
        return initial + (base_lr - initial) * 0.5 * (1.0 - np.cos(np.pi * frac))
    frac = (step - warm) / (total_steps - warm)
    return floor + (base_lr - floor) * 0.5 * (1.0 + np.cos(np.pi * frac))
