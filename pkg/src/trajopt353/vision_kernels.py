"""Framework-free reference math for the perception-side building blocks.

Closed-form pieces only — adaptive 1-D-convolution kernel sizing and
channel weighting for efficient channel attention, normalized weighted
feature fusion with SiLU and skip concatenation, and the focal loss with
its gradient. These exist to pin the formulas down with tests, not to
run a network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import DomainError, ShapeMismatch


@dataclass(frozen=True)
class ECAParams:
    """Kernel-size selection constants (defaults as published)."""

    gamma: float = 1.5
    b: float = 1.0

    def __post_init__(self) -> None:
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class FusionInputs:
    """Three feature arrays and their nonnegative fusion weights."""

    w: np.ndarray
    x0: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    epsilon: float = 1e-4

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=float)
        if w.shape != (3,):
            raise ShapeMismatch(f"expected 3 fusion weights, got shape {w.shape}")
        if np.any(w < 0.0):
            raise ValueError(f"fusion weights must be nonnegative, got {w}")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        arrays = []
        for name in ("x0", "x1", "x2"):
            arrays.append(np.asarray(getattr(self, name), dtype=float))
        if not (arrays[0].shape == arrays[1].shape == arrays[2].shape):
            raise ShapeMismatch(
                "feature arrays must share one shape, got "
                f"{[a.shape for a in arrays]}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        for name, arr in zip(("x0", "x1", "x2"), arrays):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class FocalLossParams:
    alpha_t: float = 0.25
    gamma_f: float = 2.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha_t <= 1.0:
            raise ValueError(f"alpha_t must lie in (0, 1], got {self.alpha_t}")
        if self.gamma_f < 0.0:
            raise ValueError(f"gamma_f must be nonnegative, got {self.gamma_f}")


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    positive = x >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-x[positive]))
    expx = np.exp(x[~positive])
    out[~positive] = expx / (1.0 + expx)
    return out if out.ndim else float(out)


def silu(y):
    """SiLU activation, y * sigmoid(y)."""
    y = np.asarray(y, dtype=float)
    out = y * sigmoid(y)
    return out if out.ndim else float(out)


def eca_kernel_size(channels: int, params: ECAParams = ECAParams()) -> int:
    """Adaptive 1-D kernel size: nearest odd to |log2(C)/gamma + b/gamma|.

    Ties go to the larger odd value; the result is clamped to be >= 1.
    """
    if channels < 1:
        raise ValueError(f"channel count must be >= 1, got {channels}")
    value = abs(math.log2(channels) / params.gamma + params.b / params.gamma)
    lower = math.floor(value)
    if lower % 2 == 0:
        lower -= 1
    upper = lower + 2
    kernel = lower if (value - lower) < (upper - value) else upper
    return max(kernel, 1)


def eca_channel_weights(descriptor, kernel) -> np.ndarray:
    """Per-channel attention weights in (0, 1).

    Circular 1-D convolution of the pooled channel descriptor with a shared
    kernel over each channel's k-neighborhood, then elementwise sigmoid.
    """
    descriptor = np.asarray(descriptor, dtype=float)
    kernel = np.asarray(kernel, dtype=float)
    if descriptor.ndim != 1 or kernel.ndim != 1:
        raise ShapeMismatch("descriptor and kernel must be one-dimensional")
    channels = descriptor.shape[0]
    k = kernel.shape[0]
    if k % 2 == 0 or k < 1:
        raise ShapeMismatch(f"kernel size must be odd and positive, got {k}")
    if k > channels:
        raise ShapeMismatch(f"kernel size {k} exceeds channel count {channels}")
    offsets = np.arange(k) - k // 2
    neighborhood = (np.arange(channels)[:, None] + offsets[None, :]) % channels
    return sigmoid(descriptor[neighborhood] @ kernel)


def normalized_fusion_weights(w, epsilon: float = 1e-4) -> np.ndarray:
    """w' = w / (sum(w) + epsilon); each w' in [0, 1), order preserved."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0.0):
        raise ValueError("fusion weights must be nonnegative")
    return w / (np.sum(w) + epsilon)


def bifpn_fuse(inputs: FusionInputs, conv_kernel=None) -> np.ndarray:
    """Normalized weighted fusion with SiLU and a skip concatenation.

    y = sum(w'_i x_i), y' = SiLU(y), z = concat(x0, y') along the leading
    (channel) axis. A caller-supplied 2-D kernel is then convolved over
    each channel ('same' shape); by default the convolution is the
    identity and z is returned as-is.
    """
    w_norm = normalized_fusion_weights(inputs.w, inputs.epsilon)
    y = w_norm[0] * inputs.x0 + w_norm[1] * inputs.x1 + w_norm[2] * inputs.x2
    activated = silu(y)
    z = np.concatenate(
        [np.atleast_1d(inputs.x0), np.atleast_1d(activated)], axis=0
    )
    if conv_kernel is None:
        return z
    conv_kernel = np.asarray(conv_kernel, dtype=float)
    if conv_kernel.ndim != 2:
        raise ShapeMismatch("convolution kernel must be 2-D")
    if z.ndim == 2:
        return convolve2d(z, conv_kernel, mode="same")
    if z.ndim == 3:
        return np.stack([convolve2d(ch, conv_kernel, mode="same") for ch in z])
    raise ShapeMismatch(
        f"convolution needs 2-D or 3-D fused features, got {z.ndim}-D"
    )


def _check_probability(p_t: float) -> float:
    p_t = float(p_t)
    if not 0.0 < p_t <= 1.0:
        raise DomainError(f"p_t must lie in (0, 1], got {p_t}")
    return p_t


def focal_loss(p_t: float, params: FocalLossParams = FocalLossParams()) -> float:
    """FL = -alpha_t * (1 - p_t)^gamma_f * log(p_t)."""
    p_t = _check_probability(p_t)
    return -params.alpha_t * (1.0 - p_t) ** params.gamma_f * math.log(p_t)


def focal_loss_grad(p_t: float, params: FocalLossParams = FocalLossParams()) -> float:
    """Derivative of the focal loss with respect to p_t (always <= 0)."""
    p_t = _check_probability(p_t)
    one_minus = 1.0 - p_t
    if one_minus == 0.0:
        # Limit as p_t -> 1: the log factor kills the first term for any
        # gamma_f > 0; gamma_f = 0 reduces to plain weighted cross-entropy.
        return -params.alpha_t if params.gamma_f == 0.0 else 0.0
    first = (
        params.alpha_t
        * params.gamma_f
        * one_minus ** (params.gamma_f - 1.0)
        * math.log(p_t)
    )
    second = params.alpha_t * one_minus**params.gamma_f / p_t
    return first - second
