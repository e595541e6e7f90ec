"""Finite-difference verification of reverse-mode gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import NonFiniteError, Tensor, no_grad


def grad_check(f: Callable[[Tensor], Tensor], x: np.ndarray, h: float = 1e-5) -> float:
    """Max relative error between tape gradients and central differences.

    ``f`` must map a tensor to a scalar tensor.  Returns
    ``max_i |analytic_i - numeric_i| / (|analytic_i| + 1e-8)``.
    """
    x = np.asarray(x, dtype=np.float64)
    probe = Tensor(x.copy(), requires_grad=True)
    out = f(probe)
    if out.size != 1:
        raise ValueError("grad_check requires a scalar-valued function")
    out.backward()
    analytic = probe.grad
    if analytic is None:
        analytic = np.zeros_like(x)
    if not np.all(np.isfinite(analytic)):
        raise NonFiniteError("non-finite analytic gradient in grad_check")

    numeric = np.zeros_like(x)
    flat = x.reshape(-1)
    num_flat = numeric.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = float(f(Tensor(x)).data)
            flat[i] = orig - h
            down = float(f(Tensor(x)).data)
            flat[i] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise NonFiniteError("non-finite value at finite-difference probe")
            num_flat[i] = (up - down) / (2.0 * h)

    denom = np.abs(analytic) + 1e-8
    return float(np.max(np.abs(analytic - numeric) / denom))
