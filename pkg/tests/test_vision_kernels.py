import math

import numpy as np
import pytest

from trajopt353.errors import DomainError, ShapeMismatch
from trajopt353.vision_kernels import (
    ECAParams,
    FocalLossParams,
    FusionInputs,
    bifpn_fuse,
    eca_channel_weights,
    eca_kernel_size,
    focal_loss,
    focal_loss_grad,
    normalized_fusion_weights,
    sigmoid,
    silu,
)


# ---------------------------------------------------------------- kernel size


def test_kernel_size_reference_values():
    assert eca_kernel_size(128) == 5  # 16/3 ~ 5.333
    assert eca_kernel_size(512) == 7  # 20/3 ~ 6.667
    assert eca_kernel_size(2) == 1  # 4/3 ~ 1.333, clamp region


def test_kernel_size_tie_rounds_up():
    # C=256: (8+1)/1.5 = 6.0 exactly, equidistant from 5 and 7.
    assert eca_kernel_size(256) == 7


def test_kernel_size_is_odd_and_monotone():
    previous = 0
    for c in range(1, 4097):
        k = eca_kernel_size(c)
        assert k >= 1
        assert k % 2 == 1
        assert k >= previous
        previous = k


def test_kernel_size_rejects_bad_channels():
    with pytest.raises(ValueError):
        eca_kernel_size(0)
    with pytest.raises(ValueError):
        ECAParams(gamma=0.0)


# ------------------------------------------------------------ channel weights


def test_zero_kernel_gives_half_weights():
    w = eca_channel_weights(np.linspace(-3, 3, 10), np.zeros(5))
    assert w == pytest.approx(np.full(10, 0.5), abs=1e-15)


def test_weights_match_hand_sigmoid_case():
    ln3 = math.log(3.0)
    w = eca_channel_weights(np.array([0.0, ln3, -ln3]), np.array([1.0]))
    assert w == pytest.approx([0.5, 0.75, 0.25], abs=1e-12)


def test_constant_descriptor_shift_invariance():
    c, kernel = 0.7, np.array([0.2, -0.1, 0.4])
    w = eca_channel_weights(np.full(8, c), kernel)
    expected = 1.0 / (1.0 + math.exp(-c * kernel.sum()))
    assert w == pytest.approx(np.full(8, expected), abs=1e-12)


def test_weights_are_strictly_inside_unit_interval():
    rng = np.random.default_rng(3)
    for _ in range(20):
        c = int(rng.integers(3, 64))
        k = eca_kernel_size(c)
        if k > c:
            continue
        # Moderate magnitudes: in float64 the sigmoid saturates to exactly
        # 0.0/1.0 beyond |x| ~ 37, which would mask the strictness property.
        w = eca_channel_weights(rng.normal(size=c), rng.normal(size=k))
        assert np.all(w > 0.0)
        assert np.all(w < 1.0)


def test_weights_shape_errors():
    with pytest.raises(ShapeMismatch):
        eca_channel_weights(np.zeros(4), np.zeros(2))  # even kernel
    with pytest.raises(ShapeMismatch):
        eca_channel_weights(np.zeros(3), np.zeros(5))  # kernel wider than C


def test_circular_wraparound_is_used():
    # A peak at channel 0 leaks into the last channel's neighborhood.
    descriptor = np.array([5.0, 0.0, 0.0, 0.0])
    w = eca_channel_weights(descriptor, np.array([1.0, 1.0, 1.0]))
    assert w[3] == w[1]  # both neighborhoods contain the peak once
    assert w[2] == pytest.approx(0.5)


# ------------------------------------------------------------------ fusion


def test_normalized_weights_symmetric_case():
    w = normalized_fusion_weights([1.0, 1.0, 1.0])
    assert w == pytest.approx(np.full(3, 1.0 / 3.0001), rel=1e-12)


def test_normalized_weights_sum_identity():
    rng = np.random.default_rng(17)
    for _ in range(50):
        raw = rng.uniform(0.0, 5.0, 3)
        w = normalized_fusion_weights(raw)
        assert np.all(w >= 0.0)
        assert np.all(w < 1.0)
        assert w.sum() == pytest.approx(raw.sum() / (raw.sum() + 1e-4), abs=1e-12)


def test_normalized_weights_preserve_order():
    w = normalized_fusion_weights([0.1, 2.0, 0.5])
    assert w[1] > w[2] > w[0]


def test_silu_identity_and_zero():
    assert silu(0.0) == 0.0
    ys = np.linspace(-4, 4, 33)
    assert silu(ys) == pytest.approx(ys / (1.0 + np.exp(-ys)), abs=1e-12)


def test_fuse_identical_inputs_scales_by_weight_sum():
    x = np.array([[1.0, -2.0], [0.5, 3.0]])
    inputs = FusionInputs(w=np.array([1.0, 2.0, 3.0]), x0=x, x1=x, x2=x)
    fused = bifpn_fuse(inputs)
    shrink = 6.0 / 6.0001
    assert fused.shape == (4, 2)
    assert fused[:2] == pytest.approx(x)  # skip branch is untouched
    assert fused[2:] == pytest.approx(silu(shrink * x), abs=1e-12)


def test_fuse_scalar_reference_value():
    inputs = FusionInputs(
        w=np.array([2.0, 1.0, 1.0]),
        x0=np.array(4.0),
        x1=np.array(0.0),
        x2=np.array(0.0),
    )
    fused = bifpn_fuse(inputs)
    y = 2.0 / 4.0001 * 4.0
    assert y == pytest.approx(1.9999500012499688, abs=1e-15)
    assert fused == pytest.approx([4.0, y / (1.0 + math.exp(-y))], abs=1e-12)


def test_fuse_with_identity_conv_kernel_matches_default():
    rng = np.random.default_rng(29)
    x0, x1, x2 = (rng.normal(size=(3, 5)) for _ in range(3))
    inputs = FusionInputs(w=np.array([0.5, 1.0, 1.5]), x0=x0, x1=x1, x2=x2)
    plain = bifpn_fuse(inputs)
    with_kernel = bifpn_fuse(inputs, conv_kernel=np.array([[1.0]]))
    assert with_kernel == pytest.approx(plain, abs=1e-12)


def test_fuse_conv_kernel_smooths_channels():
    x = np.ones((4, 4))
    inputs = FusionInputs(w=np.array([1.0, 1.0, 1.0]), x0=x, x1=x, x2=x)
    kernel = np.full((3, 3), 1.0 / 9.0)
    fused = bifpn_fuse(inputs, conv_kernel=kernel)
    # Interior cells of each fused channel average nine identical values.
    assert fused.shape == (8, 4)
    assert fused[1, 1] == pytest.approx(1.0, abs=1e-12)


def test_fusion_validation_errors():
    with pytest.raises(ValueError):
        FusionInputs(
            w=np.array([-0.1, 1.0, 1.0]),
            x0=np.zeros(2),
            x1=np.zeros(2),
            x2=np.zeros(2),
        )
    with pytest.raises(ShapeMismatch):
        FusionInputs(
            w=np.array([1.0, 1.0, 1.0]),
            x0=np.zeros(2),
            x1=np.zeros(3),
            x2=np.zeros(2),
        )
    with pytest.raises(ShapeMismatch):
        FusionInputs(
            w=np.array([1.0, 1.0]),
            x0=np.zeros(2),
            x1=np.zeros(2),
            x2=np.zeros(2),
        )


# ---------------------------------------------------------------- focal loss


def test_focal_loss_reference_values():
    assert focal_loss(1.0) == 0.0
    assert focal_loss(0.5) == pytest.approx(0.0625 * math.log(2.0), abs=1e-9)
    assert focal_loss(0.5) == pytest.approx(0.043321698784996582, abs=1e-15)


def test_focal_loss_gamma_zero_is_weighted_cross_entropy():
    params = FocalLossParams(alpha_t=0.25, gamma_f=0.0)
    for p in (0.1, 0.4, 0.9):
        assert focal_loss(p, params) == pytest.approx(-0.25 * math.log(p), rel=1e-12)


def test_focal_loss_nonnegative_and_decreasing():
    params = FocalLossParams()
    ps = np.linspace(0.01, 1.0, 200)
    values = [focal_loss(float(p), params) for p in ps]
    assert min(values) >= 0.0
    assert all(a > b for a, b in zip(values, values[1:]) if a != b)
    assert np.all(np.diff(values) <= 0.0)


def test_focal_loss_domain_errors():
    with pytest.raises(DomainError):
        focal_loss(0.0)
    with pytest.raises(DomainError):
        focal_loss(-0.2)
    with pytest.raises(DomainError):
        focal_loss(1.2)


def test_focal_grad_matches_finite_differences():
    params = FocalLossParams(alpha_t=0.25, gamma_f=2.0)
    h = 1e-6
    for p in (0.1, 0.5, 0.9):
        numeric = (focal_loss(p + h, params) - focal_loss(p - h, params)) / (2 * h)
        analytic = focal_loss_grad(p, params)
        assert analytic == pytest.approx(numeric, rel=1e-6)
        assert analytic < 0.0


def test_focal_grad_limit_at_one():
    assert focal_loss_grad(1.0, FocalLossParams(alpha_t=0.25, gamma_f=2.0)) == 0.0
    assert focal_loss_grad(1.0, FocalLossParams(alpha_t=0.25, gamma_f=0.0)) == -0.25


def test_focal_params_validation():
    with pytest.raises(ValueError):
        FocalLossParams(alpha_t=0.0)
    with pytest.raises(ValueError):
        FocalLossParams(alpha_t=1.5)
    with pytest.raises(ValueError):
        FocalLossParams(gamma_f=-1.0)


def test_sigmoid_is_stable_at_extremes():
    assert sigmoid(800.0) == pytest.approx(1.0)
    assert sigmoid(-800.0) == pytest.approx(0.0, abs=1e-300)
    assert sigmoid(np.array([-800.0, 0.0, 800.0])) == pytest.approx([0.0, 0.5, 1.0])
