"""Dense materialization of strided valid-mode 2-d convolution stacks.

Layers with convolutional structure are stored and differentiated as plain
dense weight matrices; this module builds that matrix from kernel metadata
and provides the fast direct form so the two can be checked against each
other.  Correlation convention (no kernel flip); output units are ordered
time-major as (t_out, f_out, channel) so a tapped map reshapes cleanly to a
(time, features) sequence.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


def conv_output_shape(input_shape, kernel_shape, stride):
    (h, w), (kh, kw), (sh, sw) = input_shape, kernel_shape, stride
    if kh > h or kw > w:
        raise ConfigError("kernel larger than input map")
    if sh < 1 or sw < 1:
        raise ConfigError("stride must be positive")
    return (h - kh) // sh + 1, (w - kw) // sw + 1


def conv_weight_matrix(kernels, input_shape, stride):
    """Return (W, out_shape) with W of shape (H*W_in, T_out*F_out*n_k).

    W.T @ x.ravel() equals the strided valid correlation of x with every
    kernel, flattened in (t, f, channel) order.
    """
    kernels = np.asarray(kernels, dtype=np.float64)
    if kernels.ndim != 3:
        raise ConfigError("kernels must have shape (n_kernels, kh, kw)")
    nk, kh, kw = kernels.shape
    h, w = input_shape
    t_out, f_out = conv_output_shape(input_shape, (kh, kw), stride)
    sh, sw = stride
    big_w = np.zeros((h * w, t_out * f_out * nk))
    for t in range(t_out):
        for f in range(f_out):
            for k in range(nk):
                col = (t * f_out + f) * nk + k
                rows = ((t * sh + np.arange(kh))[:, None] * w
                        + (f * sw + np.arange(kw))[None, :])
                big_w[rows.ravel(), col] = kernels[k].ravel()
    return big_w, (t_out, f_out, nk)


def conv_forward(kernels, xmap, stride):
    """Direct strided valid correlation; same output ordering as the matrix."""
    kernels = np.asarray(kernels, dtype=np.float64)
    xmap = np.asarray(xmap, dtype=np.float64)
    nk, kh, kw = kernels.shape
    sh, sw = stride
    t_out, f_out = conv_output_shape(xmap.shape, (kh, kw), stride)
    out = np.empty((t_out, f_out, nk))
    for t in range(t_out):
        for f in range(f_out):
            patch = xmap[t * sh:t * sh + kh, f * sw:f * sw + kw]
            out[t, f, :] = np.tensordot(kernels, patch, axes=([1, 2], [0, 1]))
    return out.ravel()
