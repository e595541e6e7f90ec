"""Masked-autoencoder pretraining on generated PDE trajectories.

Subpackages:

* ``numkit``  — float64 tape autodiff, FFTs, optimizer, gradient checking
* ``pdegen``  — PDE families, numerical solvers, dataset generation
* ``liesym``  — Lie point symmetry data augmentation
* ``maecore`` — patching, masking, transformer encoder/decoder, pretraining
* ``tasks``   — probing heads, conditional FNO/U-Net time-stepping, super-resolution
* ``bench``   — dataset container, metrics, latent-space analysis, CLI backends
"""

__version__ = "0.1.0"
