"""Dense-tensor autodiff kernels, real FFTs, and optimizer utilities."""

from .fft import (Spectrum, dealias_mask, fft_pairs, full_wavenumbers,
                  ifft_pairs, irfft, irfft2, irfft_pairs, rfft, rfft2,
                  rfft_pairs, shift_phases, wavenumbers)
from .gradcheck import grad_check
from .ops import (attention, avg_pool1d, avg_pool2d, conv1d, conv2d,
                  cross_entropy, cubic_interp_matrix, gelu, group_norm,
                  interp1d, interp2d, layer_norm, linear, linear_interp_matrix,
                  mse, spectral_conv1d, spectral_conv2d, upsample_nearest1d,
                  upsample_nearest2d)
from .optim import AdamW, adamw_step, one_cycle_lr
from .tensor import (NonFiniteError, Tensor, add, as_tensor, concat, div, erf,
                     exp, gather_rows, getitem, log, logsumexp, matmul, mul,
                     neg, no_grad, pad, powc, relu, repeat_axis, reshape,
                     scatter_rows, softmax, sqrt, square, sub, swapaxes, tanh,
                     tmean, transpose, tsum, zero_grads)

__all__ = [name for name in dir() if not name.startswith("_")]
