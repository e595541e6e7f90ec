"""Real FFTs: a plain half-complex carrier for solvers, and differentiable
pair-format transforms for models.

The plain path (``rfft``/``irfft``/``rfft2``/``irfft2``) moves data between
:class:`~pdemae.numkit.tensor.Tensor`/ndarray fields and :class:`Spectrum`
objects holding complex128 values; nothing is recorded on the tape.

The differentiable path represents a half-complex spectrum as a real tensor
with a trailing ``[re, im]`` axis so spectral layers can be composed from
ordinary tensor ops.  The adjoints below follow from writing each transform
as a real-linear map:

* ``rfft``:   dL/dx_j = Re( sum_{k<F} H_k e^{2*pi*i*j*k/n} )
* ``irfft``:  dL/dS_k = (c_k / n) * rfft(g)_k  with c_k = 1 at k in {0, n/2}
              and 2 otherwise; imaginary parts at k in {0, n/2} are fixed zero
* full ``fft``/``ifft`` are unitary up to n, so their adjoints are the
  conjugate-transpose maps n*ifft and fft/n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, as_tensor


@dataclass
class Spectrum:
    """Half-complex spectrum along ``axis`` of a real field of length ``n``."""

    values: np.ndarray  # complex128
    n: int              # real-space length along the transformed axis
    axis: int = -1

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.values.shape[self.axis] != self.n // 2 + 1:
            raise ValueError("half-complex extent does not match signal length")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def interleaved(self) -> np.ndarray:
        """Real view with interleaved real/imaginary pairs (last axis doubled)."""
        return self.values.view(np.float64)

    @classmethod
    def from_interleaved(cls, arr: np.ndarray, n: int, axis: int = -1) -> "Spectrum":
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        if arr.shape[-1] % 2:
            raise ValueError("interleaved representation must have even length")
        return cls(arr.view(np.complex128), n, axis)


def rfft(x, axis: int = -1) -> Spectrum:
    arr = np.asarray(x, dtype=np.float64)
    values = np.fft.rfft(arr, axis=axis)
    if axis not in (-1, arr.ndim - 1):
        # keep the half-complex axis wherever the caller transformed
        return Spectrum(values, arr.shape[axis], axis)
    return Spectrum(values, arr.shape[axis], -1)


def irfft(s: Spectrum, n: int | None = None) -> Tensor:
    n = s.n if n is None else n
    out = np.fft.irfft(s.values, n=n, axis=s.axis)
    return Tensor(out)


def rfft2(x, axes: tuple[int, int] = (-2, -1)) -> Spectrum:
    arr = np.asarray(x, dtype=np.float64)
    values = np.fft.rfft2(arr, axes=axes)
    return Spectrum(values, arr.shape[axes[-1]], axes[-1])


def irfft2(s: Spectrum, axes: tuple[int, int] = (-2, -1), n: int | None = None) -> Tensor:
    n = s.n if n is None else n
    out = np.fft.irfft2(s.values, s=(s.values.shape[axes[0]], n), axes=axes)
    return Tensor(out)


# ---------------------------------------------------------------------------
# grid helpers shared by solvers and augmentation


def wavenumbers(n: int, length: float) -> np.ndarray:
    """Physical wavenumbers 2*pi*m/L for the half-complex bins of rfft."""
    return 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)


def full_wavenumbers(n: int, length: float) -> np.ndarray:
    """Physical wavenumbers for the full-complex bins of fft."""
    return 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)


def shift_phases(n: int, length: float, shift: float) -> np.ndarray:
    """Half-complex phases implementing u(x) -> u(x - shift) on a periodic grid."""
    return np.exp(-1j * wavenumbers(n, length) * shift)


def dealias_mask(n: int) -> np.ndarray:
    """Two-thirds-rule mask over half-complex bins (True = keep)."""
    cutoff = n // 3
    m = np.fft.rfftfreq(n, d=1.0 / n)  # integer mode numbers 0..n//2
    return m <= cutoff


# ---------------------------------------------------------------------------
# differentiable transforms in pair format (..., F, 2)


def _complexify(arr: np.ndarray) -> np.ndarray:
    return arr[..., 0] + 1j * arr[..., 1]


def _pairs(c: np.ndarray) -> np.ndarray:
    return np.stack([c.real, c.imag], axis=-1)


def rfft_pairs(x) -> Tensor:
    """(..., n) real -> (..., n//2+1, 2) pair-format spectrum along the last axis."""
    x = as_tensor(x)
    n = x.data.shape[-1]
    c = np.fft.rfft(x.data, axis=-1)
    out = _pairs(c)

    def backward(g):
        h = _complexify(g)
        full = np.zeros(x.data.shape[:-1] + (n,), dtype=np.complex128)
        full[..., : n // 2 + 1] = h
        return (np.fft.ifft(full, axis=-1).real * n,)

    return Tensor._result(out, (x,), backward, "rfft_pairs")


def irfft_pairs(s, n: int) -> Tensor:
    """(..., n//2+1, 2) pair-format spectrum -> (..., n) real signal."""
    s = as_tensor(s)
    c = _complexify(s.data)
    out = np.fft.irfft(c, n=n, axis=-1)

    def backward(g):
        gh = np.fft.rfft(g, axis=-1)
        scale = np.full(gh.shape[-1], 2.0 / n)
        scale[0] = 1.0 / n
        if n % 2 == 0:
            scale[-1] = 1.0 / n
        gh = gh * scale
        gp = _pairs(gh)
        gp[..., 0, 1] = 0.0
        if n % 2 == 0:
            gp[..., -1, 1] = 0.0
        return (gp,)

    return Tensor._result(out, (s,), backward, "irfft_pairs")


def fft_pairs(s, axis: int) -> Tensor:
    """Full complex FFT of a pair-format tensor along a complex-view axis.

    ``axis`` indexes the complex view (the trailing pair axis removed), so it
    must not refer to the pair axis itself.
    """
    s = as_tensor(s)
    c = _complexify(s.data)
    ax = axis if axis >= 0 else c.ndim + axis
    m = c.shape[ax]
    out = _pairs(np.fft.fft(c, axis=ax))

    def backward(g):
        gc = _complexify(g)
        return (_pairs(np.fft.ifft(gc, axis=ax) * m),)

    return Tensor._result(out, (s,), backward, "fft_pairs")


def ifft_pairs(s, axis: int) -> Tensor:
    s = as_tensor(s)
    c = _complexify(s.data)
    ax = axis if axis >= 0 else c.ndim + axis
    m = c.shape[ax]
    out = _pairs(np.fft.ifft(c, axis=ax))

    def backward(g):
        gc = _complexify(g)
        return (_pairs(np.fft.fft(gc, axis=ax) / m),)

    return Tensor._result(out, (s,), backward, "ifft_pairs")
