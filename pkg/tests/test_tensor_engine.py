import numpy as np
import pytest

from errors import InvalidConfigValue, NotScalar, ShapeMismatch
from tensor_engine import (
    LSTM,
    BatchNorm3d,
    Conv3d,
    Conv3dParams,
    LstmParams,
    Module,
    Parameter,
    Tensor,
    activation,
    batch_norm,
    conv3d,
    conv3d_transposed,
    crop3d,
    lstm_step,
    pad3d,
)


def naive_conv3d(x, kernel, bias, stride):
    n, _, t, h, w = x.shape
    j_maps, m_maps, kt, kh, kw = kernel.shape
    st, sh, sw = stride
    zt, zh, zw = (t - kt) // st + 1, (h - kh) // sh + 1, (w - kw) // sw + 1
    out = np.zeros((n, j_maps, zt, zh, zw))
    for b in range(n):
        for j in range(j_maps):
            for z in range(zt):
                for y in range(zh):
                    for xx in range(zw):
                        acc = bias[j]
                        for m in range(m_maps):
                            block = x[b, m, z * st:z * st + kt, y * sh:y * sh + kh, xx * sw:xx * sw + kw]
                            acc += np.sum(block * kernel[j, m])
                        out[b, j, z, y, xx] = acc
    return out


def params(kernel, bias, stride=1):
    return Conv3dParams(Tensor(kernel), Tensor(bias), stride)


class TestTensor:
    def test_sum_of_squares_gradient(self):
        x = Tensor(np.array([1.0, -2.0, 3.0]), requires_grad=True)
        (x ** 2).sum().backward()
        np.testing.assert_allclose(x.grad, [2.0, -4.0, 6.0])

    def test_reused_node_accumulates(self):
        x = Tensor(np.array(3.0), requires_grad=True)
        (x + x).backward()
        assert x.grad == pytest.approx(2.0)

    def test_broadcast_gradient_is_summed(self):
        x = Tensor(np.ones((2, 3)), requires_grad=True)
        b = Tensor(np.zeros(3), requires_grad=True)
        (x * 2.0 + b).sum().backward()
        np.testing.assert_allclose(b.grad, [2.0, 2.0, 2.0])
        np.testing.assert_allclose(x.grad, np.full((2, 3), 2.0))

    def test_matmul_gradient(self):
        a = Tensor(np.array([[1.0, 2.0]]), requires_grad=True)
        w = Tensor(np.array([[3.0], [4.0]]), requires_grad=True)
        (a @ w).sum().backward()
        np.testing.assert_allclose(a.grad, [[3.0, 4.0]])
        np.testing.assert_allclose(w.grad, [[1.0], [2.0]])

    def test_fancy_index_scatters_repeats(self):
        x = Tensor(np.arange(4.0), requires_grad=True)
        x[np.array([1, 1, 3])].sum().backward()
        np.testing.assert_allclose(x.grad, [0.0, 2.0, 0.0, 1.0])

    def test_backward_needs_scalar(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with pytest.raises(NotScalar):
            (x * 2.0).backward()
        with pytest.raises(NotScalar):
            x.item()

    def test_no_graph_without_grad(self):
        x = Tensor(np.ones(3))
        y = (x * 2.0).sum()
        assert not y.requires_grad
        y.backward()
        assert x.grad is None

    def test_detach_cuts_the_graph(self):
        x = Tensor(np.array(2.0), requires_grad=True)
        (x.detach() * x).backward()
        assert x.grad == pytest.approx(2.0)

    def test_matmul_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            Tensor(np.ones((2, 3))) @ Tensor(np.ones((2, 3)))

    def test_clip_stops_gradient_outside(self):
        x = Tensor(np.array([-1.0, 0.5, 2.0]), requires_grad=True)
        x.clip(0.0, 1.0).sum().backward()
        np.testing.assert_allclose(x.grad, [0.0, 1.0, 0.0])


class TestConv3d:
    def test_unit_kernel_is_identity(self):
        x = np.random.default_rng(0).normal(size=(1, 1, 3, 4, 5))
        out = conv3d(Tensor(x), params(np.ones((1, 1, 1, 1, 1)), np.zeros(1)))
        np.testing.assert_allclose(out.data, x)

    def test_all_ones_kernel_on_constant(self):
        x = np.full((1, 1, 3, 3, 3), 2.5)
        out = conv3d(Tensor(x), params(np.ones((1, 1, 2, 2, 2)), np.array([0.5])))
        assert out.shape == (1, 1, 2, 2, 2)
        np.testing.assert_allclose(out.data, 8 * 2.5 + 0.5)

    @pytest.mark.parametrize("stride", [(1, 1, 1), (2, 2, 2), (1, 2, 3)])
    def test_matches_nested_loops(self, stride):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(2, 3, 5, 6, 7))
        kernel = rng.normal(size=(4, 3, 2, 3, 2))
        bias = rng.normal(size=4)
        out = conv3d(Tensor(x), params(kernel, bias, stride))
        np.testing.assert_allclose(out.data, naive_conv3d(x, kernel, bias, stride), atol=1e-12)

    def test_single_volume_input(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(2, 4, 4, 4))
        kernel = rng.normal(size=(3, 2, 2, 2, 2))
        out = conv3d(Tensor(x), params(kernel, np.zeros(3)))
        np.testing.assert_allclose(out.data, naive_conv3d(x[None], kernel, np.zeros(3), (1, 1, 1))[0])

    def test_output_size(self):
        x = Tensor(np.zeros((1, 2, 16, 48, 64)))
        out = conv3d(pad3d(x, 1), params(np.zeros((4, 2, 4, 4, 4)), np.zeros(4), 2))
        assert out.shape == (1, 4, 8, 24, 32)

    def test_shape_errors(self):
        with pytest.raises(ShapeMismatch):
            conv3d(Tensor(np.zeros((1, 2, 4, 4, 4))), params(np.zeros((1, 3, 2, 2, 2)), np.zeros(1)))
        with pytest.raises(ShapeMismatch):
            conv3d(Tensor(np.zeros((1, 1, 1, 4, 4))), params(np.zeros((1, 1, 2, 2, 2)), np.zeros(1)))
        with pytest.raises(ShapeMismatch):
            conv3d(Tensor(np.zeros((1, 1, 4, 4, 4))), params(np.zeros((1, 1, 2, 2, 2)), np.zeros(2)))
        with pytest.raises(ShapeMismatch):
            params(np.zeros((1, 1, 2, 2)), np.zeros(1))


class TestConv3dTransposed:
    def test_unit_kernel_is_identity(self):
        x = np.random.default_rng(3).normal(size=(1, 1, 2, 3, 4))
        out = conv3d_transposed(Tensor(x), params(np.ones((1, 1, 1, 1, 1)), np.zeros(1)))
        np.testing.assert_allclose(out.data, x)

    def test_output_size(self):
        x = Tensor(np.zeros((1, 4, 2, 6, 8)))
        out = conv3d_transposed(x, params(np.zeros((4, 2, 4, 4, 4)), np.zeros(2), 2))
        assert out.shape == (1, 2, 6, 14, 18)
        assert crop3d(out, 1).shape == (1, 2, 4, 12, 16)

    def test_stride_equal_to_kernel_tiles_blocks(self):
        x = np.array([1.0, 2.0]).reshape(1, 1, 1, 1, 2)
        out = conv3d_transposed(Tensor(x), params(np.ones((1, 1, 1, 2, 2)), np.zeros(1), (1, 2, 2)))
        np.testing.assert_allclose(out.data[0, 0, 0], [[1, 1, 2, 2], [1, 1, 2, 2]])

    @pytest.mark.parametrize("stride", [(1, 1, 1), (2, 2, 2), (2, 1, 3)])
    def test_is_adjoint_of_conv3d(self, stride):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(2, 3, 6, 7, 8))
        kernel = rng.normal(size=(2, 3, 3, 2, 3))
        forward = conv3d(Tensor(x), params(kernel, np.zeros(2), stride))
        y = rng.normal(size=forward.shape)
        back = conv3d_transposed(Tensor(y), params(kernel, np.zeros(3), stride))
        # samples a stride remainder leaves uncovered take no part in either side
        bt, bh, bw = back.shape[2:]
        covered = x[:, :, :bt, :bh, :bw]
        assert np.sum(forward.data * y) == pytest.approx(np.sum(covered * back.data), rel=1e-8)

    def test_bias_added_once_per_position(self):
        out = conv3d_transposed(Tensor(np.zeros((1, 1, 2, 2, 2))),
                                params(np.ones((1, 2, 2, 2, 2)), np.array([1.0, -1.0])))
        np.testing.assert_allclose(out.data[0, 0], 1.0)
        np.testing.assert_allclose(out.data[0, 1], -1.0)


class TestPadCrop:
    def test_crop_inverts_pad(self):
        x = np.random.default_rng(5).normal(size=(1, 2, 3, 4, 5))
        padded = pad3d(Tensor(x), 2)
        assert padded.shape == (1, 2, 7, 8, 9)
        np.testing.assert_allclose(crop3d(padded, 2).data, x)

    def test_crop_too_large(self):
        with pytest.raises(ShapeMismatch):
            crop3d(Tensor(np.zeros((1, 1, 2, 4, 4))), 1)

    def test_pad_gradient(self):
        x = Tensor(np.ones((1, 1, 2, 2, 2)), requires_grad=True)
        pad3d(x, 1).sum().backward()
        np.testing.assert_allclose(x.grad, np.ones((1, 1, 2, 2, 2)))


class TestBatchNorm:
    def test_training_normalises_each_channel(self):
        rng = np.random.default_rng(6)
        x = rng.normal(loc=[3.0, -1.0], scale=[2.0, 0.5], size=(4, 5, 6, 7, 2))
        x = np.moveaxis(x, -1, 1)
        out = batch_norm(Tensor(x), Tensor(np.ones(2)), Tensor(np.zeros(2)), training=True).data
        axes = (0, 2, 3, 4)
        assert np.abs(out.mean(axis=axes)).max() < 1e-6
        np.testing.assert_allclose(out.var(axis=axes), 1.0, atol=1e-4)

    def test_constant_channel_maps_to_beta(self):
        x = np.full((2, 1, 2, 2, 2), 7.0)
        out = batch_norm(Tensor(x), Tensor(np.array([3.0])), Tensor(np.array([0.25])), training=True)
        np.testing.assert_allclose(out.data, 0.25)

    def test_eval_uses_running_stats(self):
        x = np.random.default_rng(7).normal(size=(2, 2, 2, 2, 2))
        mean, var = np.array([0.5, -0.5]), np.array([4.0, 0.25])
        gamma, beta = np.array([2.0, 1.0]), np.array([0.0, 1.0])
        out = batch_norm(Tensor(x), Tensor(gamma), Tensor(beta), training=False,
                         running_mean=mean, running_var=var, eps=1e-5)
        shape = (1, 2, 1, 1, 1)
        expected = (gamma.reshape(shape) * (x - mean.reshape(shape))
                    / np.sqrt(var.reshape(shape) + 1e-5) + beta.reshape(shape))
        np.testing.assert_allclose(out.data, expected)

    def test_running_stats_update(self):
        x = np.random.default_rng(8).normal(loc=2.0, size=(3, 1, 2, 2, 2))
        mean, var = np.zeros(1), np.ones(1)
        batch_norm(Tensor(x), Tensor(np.ones(1)), Tensor(np.zeros(1)), training=True,
                   running_mean=mean, running_var=var, momentum=0.1)
        assert mean[0] == pytest.approx(0.1 * x.mean())
        assert var[0] == pytest.approx(0.9 + 0.1 * x.var(ddof=1))

    def test_frozen_module_keeps_running_stats(self):
        bn = BatchNorm3d(1)
        x = Tensor(np.random.default_rng(9).normal(loc=5.0, size=(2, 1, 2, 2, 2)))
        with bn.frozen():
            bn(x)
        np.testing.assert_array_equal(bn.buffer("running_mean"), [0.0])
        bn(x)
        assert bn.buffer("running_mean")[0] > 0.0


class TestActivation:
    def test_examples(self):
        x = Tensor(np.array([-1.0, 0.0, 2.0]))
        np.testing.assert_allclose(activation("relu", x).data, [0.0, 0.0, 2.0])
        np.testing.assert_allclose(activation("leaky_relu", x, 0.2).data, [-0.2, 0.0, 2.0])
        assert activation("sigmoid", Tensor(np.array(0.0))).item() == pytest.approx(0.5)
        assert activation("tanh", Tensor(np.array(0.0))).item() == 0.0

    def test_sigmoid_does_not_overflow(self):
        out = activation("sigmoid", Tensor(np.array([-1000.0, 1000.0]))).data
        np.testing.assert_allclose(out, [0.0, 1.0])

    def test_tanh_range(self):
        out = activation("tanh", Tensor(np.linspace(-50, 50, 101))).data
        assert np.all(np.abs(out) <= 1.0)

    def test_unknown_kind(self):
        with pytest.raises(InvalidConfigValue):
            activation("swish", Tensor(np.zeros(1)))


def lstm_params(rng, k, d, scale=1.0):
    return LstmParams(
        pi=Tensor(scale * rng.normal(size=(k, 4 * d))),
        u=Tensor(scale * rng.normal(size=(d, 4 * d))),
        psi=Tensor(scale * rng.normal(size=3 * d)),
        bias=Tensor(scale * rng.normal(size=4 * d)),
    )


def sigmoid(v):
    return 1.0 / (1.0 + np.exp(-v))


class TestLstm:
    def test_zero_weights(self):
        d = 3
        p = LstmParams(Tensor(np.zeros((2, 4 * d))), Tensor(np.zeros((d, 4 * d))),
                       Tensor(np.zeros(3 * d)), Tensor(np.zeros(4 * d)))
        c_prev = np.array([1.0, -2.0, 0.5])
        h, c = lstm_step(Tensor(np.ones(2)), Tensor(np.zeros(d)), Tensor(c_prev), p)
        np.testing.assert_allclose(c.data, 0.5 * c_prev)
        np.testing.assert_allclose(h.data, 0.5 * np.tanh(0.5 * c_prev))

    def test_matches_scalar_formulas(self):
        rng = np.random.default_rng(10)
        k, d = 3, 2
        p = lstm_params(rng, k, d)
        a, h_prev, c_prev = rng.normal(size=k), rng.normal(size=d), rng.normal(size=d)
        h, c = lstm_step(Tensor(a), Tensor(h_prev), Tensor(c_prev), p)

        pi, u, psi, bias = p.pi.data, p.u.data, p.psi.data, p.bias.data
        for q in range(d):
            def gate(g):
                col = g * d + q
                return sum(a[m] * pi[m, col] for m in range(k)) + sum(
                    h_prev[r] * u[r, col] for r in range(d)) + bias[col]
            i = sigmoid(gate(0) + psi[q] * c_prev[q])
            f = sigmoid(gate(1) + psi[d + q] * c_prev[q])
            o = sigmoid(gate(2) + psi[2 * d + q] * c_prev[q])
            c_q = f * c_prev[q] + i * np.tanh(gate(3))
            assert c.data[q] == pytest.approx(c_q, rel=1e-12)
            assert h.data[q] == pytest.approx(o * np.tanh(c_q), rel=1e-12)

    def test_hidden_state_is_bounded(self):
        rng = np.random.default_rng(11)
        p = lstm_params(rng, 4, 5, scale=10.0)
        h, c = Tensor(np.zeros((2, 5))), Tensor(np.zeros((2, 5)))
        for _ in range(20):
            h, c = lstm_step(Tensor(rng.normal(scale=10.0, size=(2, 4))), h, c, p)
            assert np.all(np.abs(h.data) < 1.0)

    def test_inconsistent_shapes(self):
        with pytest.raises(ShapeMismatch):
            LstmParams(Tensor(np.zeros((2, 8))), Tensor(np.zeros((2, 8))),
                       Tensor(np.zeros(5)), Tensor(np.zeros(8)))
        p = lstm_params(np.random.default_rng(0), 2, 2)
        with pytest.raises(ShapeMismatch):
            lstm_step(Tensor(np.zeros(3)), Tensor(np.zeros(2)), Tensor(np.zeros(2)), p)

    def test_layer_unrolls_over_packets(self):
        layer = LSTM(n_inputs=3, hidden=4)
        out = layer(Tensor(np.zeros((2, 5, 3))))
        assert out.shape == (2, 4)
        with pytest.raises(ShapeMismatch):
            layer(Tensor(np.zeros((2, 5, 4))))


class Pair(Module):
    def __init__(self):
        super().__init__()
        self.conv = Conv3d(1, 2, 2)
        self.norm = BatchNorm3d(2)
        self.scale = Parameter(np.ones(1))
        self._shared = Conv3d(1, 1, 1)

    def forward(self, x):
        return self.norm(self.conv(x)) * self.scale


class TestModule:
    def test_parameter_names_skip_private_attributes(self):
        names = [name for name, _ in Pair().named_parameters()]
        assert names == ["scale", "conv.kernel", "conv.bias", "norm.gamma", "norm.beta"]

    def test_state_dict_includes_buffers(self):
        state = Pair().state_dict()
        assert "norm.running_mean" in state and "norm.running_var" in state

    def test_load_state_dict_round_trip(self):
        source, target = Pair(), Pair()
        source.conv.kernel.data = np.random.default_rng(12).normal(size=source.conv.kernel.shape)
        source.norm.buffer("running_var")[...] = 3.0
        target.load_state_dict(source.state_dict())
        np.testing.assert_array_equal(target.conv.kernel.data, source.conv.kernel.data)
        np.testing.assert_array_equal(target.norm.buffer("running_var"), [3.0, 3.0])

    def test_load_state_dict_rejects_bad_state(self):
        model = Pair()
        state = model.state_dict()
        del state["scale"]
        with pytest.raises(ShapeMismatch):
            model.load_state_dict(state)
        state = model.state_dict()
        state["scale"] = np.ones(2)
        with pytest.raises(ShapeMismatch):
            model.load_state_dict(state)

    def test_frozen_blocks_gradients(self):
        model = Pair()
        model.conv.kernel.data = np.random.default_rng(13).normal(size=model.conv.kernel.shape)
        x = Tensor(np.random.default_rng(14).normal(size=(2, 1, 3, 3, 3)), requires_grad=True)
        with model.frozen():
            (model(x) ** 2).sum().backward()
        assert all(p.grad is None for p in model.parameters())
        assert x.grad is not None
        assert all(p.requires_grad for p in model.parameters())

    def test_train_and_eval_propagate(self):
        model = Pair()
        model.eval()
        assert not model.norm.training
        model.train()
        assert model.norm.training

    def test_zero_grad(self):
        model = Pair()
        (model(Tensor(np.ones((2, 1, 2, 2, 2)))) ** 2).sum().backward()
        assert model.scale.grad is not None
        model.zero_grad()
        assert all(p.grad is None for p in model.parameters())
