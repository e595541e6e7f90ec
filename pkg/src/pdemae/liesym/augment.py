"""Symmetry-group data augmentation for periodic PDE trajectories.

Shifts in space are exact to spectral accuracy (phase rotation of the
Fourier modes), shifts in time re-crop the stored trajectory, and the
Galilean boost composes a time-proportional spatial shift with a constant
offset in u.  All three are one-parameter abelian groups, so composing
two applications with parameters a and b must equal a single application
with a+b; tests rely on that.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..pdegen.types import Boundary, FieldSample, Grid, KDV_FAMILY


class Group(str, Enum):
    TIME_SHIFT = "time_shift"
    SPACE_SHIFT_X = "space_shift_x"
    SPACE_SHIFT_Y = "space_shift_y"
    GALILEAN_BOOST = "galilean_boost"


def default_eps_max(grid: Grid) -> dict:
    """Small magnitudes work best: spatial L/8, temporal 10 steps, boost 0.1."""
    eps = {Group.SPACE_SHIFT_X: (grid.x1 - grid.x0) / 8.0,
           Group.TIME_SHIFT: 10.0 * grid.dt,
           Group.GALILEAN_BOOST: 0.1}
    if grid.is_2d:
        eps[Group.SPACE_SHIFT_Y] = (grid.y1 - grid.y0) / 8.0
    return eps


@dataclass
class AugmentConfig:
    probability: float = 0.5
    groups: tuple = (Group.SPACE_SHIFT_X,)
    eps_max: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must lie in [0, 1]")
        self.groups = tuple(Group(g) for g in self.groups)

    @classmethod
    def for_grid(cls, grid: Grid, probability: float = 0.5,
                 groups=None) -> "AugmentConfig":
        if groups is None:
            groups = (Group.SPACE_SHIFT_X, Group.SPACE_SHIFT_Y) if grid.is_2d \
                else (Group.SPACE_SHIFT_X,)
        return cls(probability, tuple(groups), default_eps_max(grid))


def _shift_axis(values: np.ndarray, eps: float, axis: int, length: float) -> np.ndarray:
    n = values.shape[axis]
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)
    phase = np.exp(-1j * k * eps)
    shape = [1] * values.ndim
    shape[axis] = k.size
    spec = np.fft.rfft(values, axis=axis) * phase.reshape(shape)
    return np.fft.irfft(spec, n=n, axis=axis)


def fourier_shift(sample: FieldSample, eps: float, axis: int = 1) -> FieldSample:
    """u'(x) = u(x - eps) along one spatial axis, exact for sub-grid eps."""
    if sample.spec.bc != Boundary.PERIODIC or not sample.grid.periodic:
        raise ValueError("fourier shift needs periodic boundary conditions")
    ax = axis % sample.values.ndim
    if ax == 0:
        raise ValueError("axis 0 is time; use time_shift")
    if ax == 1:
        length = sample.grid.x1 - sample.grid.x0
    elif ax == 2 and sample.grid.is_2d:
        length = sample.grid.y1 - sample.grid.y0
    else:
        raise ValueError(f"no spatial axis {axis} for this sample")
    return FieldSample(_shift_axis(sample.values, eps, ax, length),
                       sample.grid, sample.spec)


def time_shift(sample: FieldSample, window_len: int, eps: float) -> FieldSample:
    """Window of ``window_len`` steps starting at index round(eps / dt)."""
    grid = sample.grid
    start = int(round(eps / grid.dt))
    if start < 0 or start + window_len > grid.nt:
        raise ValueError(
            f"window [{start}, {start + window_len}) outside trajectory of {grid.nt} steps")
    new_grid = dataclasses.replace(
        grid, nt=window_len,
        t0=grid.t0 + start * grid.dt,
        t1=grid.t0 + (start + window_len - 1) * grid.dt)
    return FieldSample(sample.values[start:start + window_len].copy(),
                       new_grid, sample.spec)


def galilean_boost(sample: FieldSample, eps: float) -> FieldSample:
    """Boost u(t, x) -> u(t, x - alpha*eps*t) + eps.

    Only the 1D quadratic-advection family admits this symmetry; alpha is
    the coefficient on u u_x recorded in the sample's spec.
    """
    if sample.spec.family not in KDV_FAMILY:
        raise ValueError("galilean boost applies to the KdV-Burgers family only")
    if sample.spec.bc != Boundary.PERIODIC or not sample.grid.periodic:
        raise ValueError("galilean boost needs periodic boundary conditions")
    grid = sample.grid
    alpha = float(sample.spec.coefficients.get("alpha", 0.0))
    length = grid.x1 - grid.x0
    k = 2.0 * np.pi * np.fft.rfftfreq(grid.nx, d=grid.dx)
    shifts = alpha * eps * grid.t_coords            # one shift per time slice
    phase = np.exp(-1j * np.outer(shifts, k))
    spec = np.fft.rfft(sample.values, axis=1) * phase
    return FieldSample(np.fft.irfft(spec, n=grid.nx, axis=1) + eps,
                       grid, sample.spec)


def augment(sample: FieldSample, cfg: AugmentConfig,
            rng: np.random.Generator, window_len: int | None = None) -> FieldSample:
    """With probability cfg.probability apply every enabled group, each with
    its own eps ~ Uniform(-eps_max, eps_max); otherwise return the sample
    untouched.

    Time shift runs first (it needs the full stored trajectory and a
    ``window_len``; the draw is folded to |eps| since the trajectory only
    extends forward), then the spatial groups on the cropped window.
    """
    if rng.random() >= cfg.probability:
        return sample
    out = sample
    order = [Group.TIME_SHIFT, Group.SPACE_SHIFT_X, Group.SPACE_SHIFT_Y,
             Group.GALILEAN_BOOST]
    for group in order:
        if group not in cfg.groups:
            continue
        eps = rng.uniform(-cfg.eps_max.get(group, 0.0), cfg.eps_max.get(group, 0.0))
        if group == Group.TIME_SHIFT:
            if window_len is None:
                raise ValueError("time shift requires window_len")
            eps = abs(eps)
            max_eps = (out.grid.nt - window_len) * out.grid.dt
            out = time_shift(out, window_len, min(eps, max_eps))
        elif group == Group.SPACE_SHIFT_X:
            out = fourier_shift(out, eps, axis=1)
        elif group == Group.SPACE_SHIFT_Y:
            out = fourier_shift(out, eps, axis=2)
        else:
            out = galilean_boost(out, eps)
    return out
