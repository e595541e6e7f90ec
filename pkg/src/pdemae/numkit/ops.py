"""Neural-network kernels composed from tape primitives.

Everything here is differentiable end to end; gradients come from the
primitive adjoints in :mod:`pdemae.numkit.tensor` and
:mod:`pdemae.numkit.fft`, so each kernel only has to get its forward
arithmetic right (and prove it under finite-difference checks).
"""

from __future__ import annotations

import numpy as np

from . import fft as _fft
from .tensor import (Tensor, add, as_tensor, concat, div, erf, exp, log,
                     matmul, mul, pad, repeat_axis, reshape, softmax, sqrt,
                     square, sub, swapaxes, tmean, transpose, tsum)


def linear(x, weight, bias=None) -> Tensor:
    """x (..., in) @ weight (in, out) + bias."""
    out = matmul(x, weight)
    if bias is not None:
        out = add(out, bias)
    return out


def gelu(x) -> Tensor:
    x = as_tensor(x)
    return mul(mul(x, 0.5), add(erf(mul(x, 1.0 / np.sqrt(2.0))), 1.0))


def layer_norm(x, gamma, bias, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then apply the elementwise affine map."""
    x = as_tensor(x)
    mu = tmean(x, axis=-1, keepdims=True)
    centered = sub(x, mu)
    var = tmean(square(centered), axis=-1, keepdims=True)
    normed = div(centered, sqrt(add(var, eps)))
    return add(mul(normed, gamma), bias)


def group_norm(x, gamma, bias, groups: int, eps: float = 1e-5) -> Tensor:
    """Normalize (B, C, *spatial) within channel groups; affine is per channel."""
    x = as_tensor(x)
    b, c = x.shape[0], x.shape[1]
    if c % groups:
        raise ValueError("channel count not divisible by group count")
    spatial = x.shape[2:]
    flat = reshape(x, (b, groups, (c // groups) * int(np.prod(spatial, dtype=int) or 1)))
    mu = tmean(flat, axis=-1, keepdims=True)
    centered = sub(flat, mu)
    var = tmean(square(centered), axis=-1, keepdims=True)
    normed = div(centered, sqrt(add(var, eps)))
    normed = reshape(normed, (b, c) + spatial)
    shape = (1, c) + (1,) * len(spatial)
    return add(mul(normed, reshape(gamma, shape)), reshape(bias, shape))


def attention(q, k, v, n_heads: int, key_mask: np.ndarray | None = None) -> Tensor:
    """Multi-head scaled dot-product attention over (..., T, D) tensors.

    ``key_mask`` (optional, boolean (..., T)) marks keys that must receive
    zero attention weight — used to make right-padded sequences inert.
    """
    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    d_model = q.shape[-1]
    if d_model % n_heads:
        raise ValueError("model dimension not divisible by head count")
    d_head = d_model // n_heads

    def split(t):
        t = reshape(t, t.shape[:-1] + (n_heads, d_head))
        return swapaxes(t, -2, -3)  # (..., h, T, d)

    qh, kh, vh = split(q), split(k), split(v)
    scores = mul(matmul(qh, swapaxes(kh, -1, -2)), 1.0 / np.sqrt(d_head))
    if key_mask is not None:
        key_mask = np.asarray(key_mask, dtype=bool)
        bias = np.where(key_mask, 0.0, -1e30)
        bias = np.expand_dims(np.expand_dims(bias, -2), -3)  # (..., 1, 1, T)
        scores = add(scores, Tensor(bias))
    weights = softmax(scores, axis=-1)
    out = matmul(weights, vh)
    out = swapaxes(out, -2, -3)
    return reshape(out, out.shape[:-2] + (d_model,))


# ---------------------------------------------------------------------------
# convolutions ("same" zero padding, odd kernels, stride 1)


def conv1d(x, weight, bias=None) -> Tensor:
    """x (B, Ci, X) * weight (Co, Ci, K) -> (B, Co, X)."""
    x, weight = as_tensor(x), as_tensor(weight)
    co, ci, ksz = weight.shape
    if ksz % 2 == 0:
        raise ValueError("conv1d expects an odd kernel size")
    nx = x.shape[-1]
    p = ksz // 2
    xp = pad(x, ((0, 0), (0, 0), (p, p)))
    taps = []
    for kk in range(ksz):
        sl = xp[:, :, kk:kk + nx]                      # (B, Ci, X)
        wk = weight[:, :, kk]                          # (Co, Ci)
        taps.append(matmul(swapaxes(sl, -1, -2), transpose(wk)))  # (B, X, Co)
    out = taps[0]
    for t in taps[1:]:
        out = add(out, t)
    out = swapaxes(out, -1, -2)
    if bias is not None:
        out = add(out, reshape(bias, (1, co, 1)))
    return out


def conv2d(x, weight, bias=None) -> Tensor:
    """x (B, Ci, H, W) * weight (Co, Ci, K, K) -> (B, Co, H, W)."""
    x, weight = as_tensor(x), as_tensor(weight)
    co, ci, kh, kw = weight.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ValueError("conv2d expects odd kernel sizes")
    b, _, h, w = x.shape
    ph, pw = kh // 2, kw // 2
    xp = pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    out = None
    for i in range(kh):
        for j in range(kw):
            sl = xp[:, :, i:i + h, j:j + w]            # (B, Ci, H, W)
            flat = reshape(sl, (b, ci, h * w))
            wk = weight[:, :, i, j]                    # (Co, Ci)
            term = matmul(swapaxes(flat, -1, -2), transpose(wk))  # (B, HW, Co)
            out = term if out is None else add(out, term)
    out = reshape(swapaxes(out, -1, -2), (b, co, h, w))
    if bias is not None:
        out = add(out, reshape(bias, (1, co, 1, 1)))
    return out


def avg_pool1d(x, factor: int) -> Tensor:
    x = as_tensor(x)
    b, c, nx = x.shape
    if nx % factor:
        raise ValueError("length not divisible by pooling factor")
    return tmean(reshape(x, (b, c, nx // factor, factor)), axis=-1)


def avg_pool2d(x, factor: int) -> Tensor:
    x = as_tensor(x)
    b, c, h, w = x.shape
    if h % factor or w % factor:
        raise ValueError("extent not divisible by pooling factor")
    r = reshape(x, (b, c, h // factor, factor, w // factor, factor))
    return tmean(tmean(r, axis=-1), axis=-2)


def upsample_nearest1d(x, factor: int) -> Tensor:
    return repeat_axis(x, -1, factor)


def upsample_nearest2d(x, factor: int) -> Tensor:
    return repeat_axis(repeat_axis(x, -1, factor), -2, factor)


# ---------------------------------------------------------------------------
# interpolation as constant matrices (periodic sampling grids)


def linear_interp_matrix(n_src: int, n_tgt: int) -> np.ndarray:
    """Row-stochastic matrix resampling a periodic grid by linear interpolation.

    Source samples sit at j/n_src of the period, targets at i/n_tgt; each
    target is a convex combination of its two bracketing sources.
    """
    w = np.zeros((n_tgt, n_src))
    for i in range(n_tgt):
        pos = i * n_src / n_tgt
        j0 = int(np.floor(pos))
        frac = pos - j0
        w[i, j0 % n_src] += 1.0 - frac
        w[i, (j0 + 1) % n_src] += frac
    return w


def _keys_kernel(t: np.ndarray, a: float = -0.5) -> np.ndarray:
    t = np.abs(t)
    out = np.zeros_like(t)
    m1 = t <= 1.0
    out[m1] = (a + 2) * t[m1] ** 3 - (a + 3) * t[m1] ** 2 + 1.0
    m2 = (t > 1.0) & (t < 2.0)
    out[m2] = a * t[m2] ** 3 - 5 * a * t[m2] ** 2 + 8 * a * t[m2] - 4 * a
    return out


def cubic_interp_matrix(n_src: int, n_tgt: int) -> np.ndarray:
    """Keys cubic-convolution resampling matrix (a = -0.5) on a periodic grid."""
    w = np.zeros((n_tgt, n_src))
    for i in range(n_tgt):
        pos = i * n_src / n_tgt
        j0 = int(np.floor(pos))
        for j in range(j0 - 1, j0 + 3):
            w[i, j % n_src] += _keys_kernel(np.asarray(pos - j)).item()
    return w


def _apply_last(x: Tensor, matrix: np.ndarray) -> Tensor:
    # resample the last axis: rows of x hit the transposed matrix
    return matmul(x, Tensor(matrix.T))


def interp1d(x, n_tgt: int, kind: str = "linear") -> Tensor:
    """Differentiable periodic resampling of the last axis to ``n_tgt`` points."""
    x = as_tensor(x)
    n_src = x.shape[-1]
    m = linear_interp_matrix(n_src, n_tgt) if kind == "linear" else cubic_interp_matrix(n_src, n_tgt)
    return _apply_last(x, m)


def interp2d(x, shape_tgt: tuple[int, int], kind: str = "cubic") -> Tensor:
    """Differentiable periodic resampling of the last two axes."""
    x = as_tensor(x)
    h_src, w_src = x.shape[-2], x.shape[-1]
    h_tgt, w_tgt = shape_tgt
    make = cubic_interp_matrix if kind == "cubic" else linear_interp_matrix
    mh = make(h_src, h_tgt)
    mw = make(w_src, w_tgt)
    out = _apply_last(x, mw)                 # resample width
    out = swapaxes(out, -1, -2)
    out = _apply_last(out, mh)               # resample height
    return swapaxes(out, -1, -2)


# ---------------------------------------------------------------------------
# spectral convolutions (Fourier layers)


def _complex_mode_mix(sr, si, wr, wi):
    """(B, Ci, M, .) spectra times (Ci, Co, M, .) weights, contracting Ci.

    All four arguments are tensors of matching trailing mode axes; returns the
    (real, imag) pair of the product summed over input channels.
    """
    def contract(a, w):
        # a (B, Ci, *M) ; w (Ci, Co, *M) -> (B, Co, *M)
        am = transpose(a, (0,) + tuple(range(2, a.ndim)) + (1,))      # (B, *M, Ci)
        am = reshape(am, am.shape[:-1] + (1, am.shape[-1]))           # (B, *M, 1, Ci)
        wm = transpose(w, tuple(range(2, w.ndim)) + (0, 1))           # (*M, Ci, Co)
        prod = matmul(am, wm)                                         # (B, *M, 1, Co)
        prod = reshape(prod, prod.shape[:-2] + (prod.shape[-1],))     # (B, *M, Co)
        return transpose(prod, (0, prod.ndim - 1) + tuple(range(1, prod.ndim - 1)))

    real = sub(contract(sr, wr), contract(si, wi))
    imag = add(contract(sr, wi), contract(si, wr))
    return real, imag


def spectral_conv1d(x, w_real, w_imag, modes: int) -> Tensor:
    """Fourier-space channel mixing over the lowest ``modes`` frequencies.

    x (B, Ci, X); weights (Ci, Co, modes).  Modes above the grid's Nyquist
    are dropped (the caller may log the truncation).
    """
    x = as_tensor(x)
    b, ci, nx = x.shape
    keep = min(modes, nx // 2 + 1)
    spec = _fft.rfft_pairs(x)                        # (B, Ci, F, 2)
    sr = spec[:, :, :keep, 0]
    si = spec[:, :, :keep, 1]
    yr, yi = _complex_mode_mix(sr, si, w_real[:, :, :keep], w_imag[:, :, :keep])
    co = yr.shape[1]
    pairs = concat([reshape(yr, (b, co, keep, 1)), reshape(yi, (b, co, keep, 1))], axis=-1)
    f = nx // 2 + 1
    if keep < f:
        pairs = pad(pairs, ((0, 0), (0, 0), (0, f - keep), (0, 0)))
    return _fft.irfft_pairs(pairs, nx)


def spectral_conv2d(x, w_real, w_imag, modes: tuple[int, int]) -> Tensor:
    """Fourier-space mixing keeping the two low-|k_h| corner blocks.

    x (B, Ci, H, W); weights (Ci, Co, 2*m1, m2) stacking the k_h in
    [0, m1) and [-m1, 0) blocks along the third axis.
    """
    x = as_tensor(x)
    b, ci, h, w = x.shape
    m1, m2 = modes
    m1 = min(m1, h // 2)
    m2 = min(m2, w // 2 + 1)
    spec = _fft.rfft_pairs(x)                        # (B, Ci, H, FW, 2)
    spec = _fft.fft_pairs(spec, axis=-2)             # full transform along H
    lo = spec[:, :, :m1, :m2, :]
    hi = spec[:, :, h - m1:, :m2, :]
    blocks = concat([lo, hi], axis=2)                # (B, Ci, 2*m1, m2, 2)
    sr = blocks[..., 0]
    si = blocks[..., 1]
    yr, yi = _complex_mode_mix(sr, si, w_real[:, :, : 2 * m1, :m2], w_imag[:, :, : 2 * m1, :m2])
    co = yr.shape[1]
    mixed = concat([reshape(yr, (b, co, 2 * m1, m2, 1)),
                    reshape(yi, (b, co, 2 * m1, m2, 1))], axis=-1)
    fw = w // 2 + 1
    lo_rows = mixed[:, :, :m1]
    hi_rows = mixed[:, :, m1:]
    zmid = Tensor(np.zeros((b, co, h - 2 * m1, m2, 2)))
    stacked = concat([lo_rows, zmid, hi_rows], axis=2)          # (B, Co, H, m2, 2)
    if m2 < fw:
        stacked = pad(stacked, ((0, 0), (0, 0), (0, 0), (0, fw - m2), (0, 0)))
    out = _fft.ifft_pairs(stacked, axis=-2)
    return _fft.irfft_pairs(out, w)


def mse(pred, target) -> Tensor:
    pred = as_tensor(pred)
    target = as_tensor(target)
    return tmean(square(sub(pred, target)))


def cross_entropy(logits, labels: np.ndarray) -> Tensor:
    """Mean cross-entropy of (B, C) logits against integer labels."""
    logits = as_tensor(logits)
    b, c = logits.shape
    onehot = np.zeros((b, c))
    onehot[np.arange(b), np.asarray(labels, dtype=int)] = 1.0
    shift = np.max(logits.data, axis=-1, keepdims=True)
    z = sub(logits, Tensor(shift))
    lse = add(log(tsum(exp(z), axis=-1, keepdims=True)), Tensor(shift))
    log_probs = sub(logits, lse)
    picked = tsum(mul(log_probs, Tensor(onehot)), axis=-1)
    return mul(tmean(picked), -1.0)
