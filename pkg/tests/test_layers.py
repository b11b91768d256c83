import time

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from xray_pneumonia.errors import CheckpointError, ParameterError, ShapeError
from xray_pneumonia.layers import (
    LAYER_REGISTRY,
    ActivationLayer,
    BatchNormLayer,
    Conv2dLayer,
    DenseLayer,
    DropoutLayer,
    FlattenLayer,
    LayerStack,
    MaxPool2dLayer,
    ResidualBlock,
    SoftmaxLayer,
    activation_apply,
    activation_grad,
    batchnorm_backward,
    batchnorm_forward,
    conv2d_backward,
    conv2d_forward,
    dense_backward,
    dense_forward,
    dropout_backward,
    dropout_forward,
    flatten,
    glorot_uniform,
    maxpool_backward,
    maxpool_forward,
    residual_backward,
    residual_forward,
    sigmoid,
    softmax,
    softmax_backward,
    unflatten
)
from xray_pneumonia.models.enums import LayerMode
from xray_pneumonia.tensor_core import Rng

from tests.oracles import conv_oracle, max_rel_error, maxpool_oracle, numeric_grad

FD_TOL = 1e-6


class TestGlorot:
    def test_within_limit(self, rng):
        w = glorot_uniform(rng, (50, 40), 40, 50)
        limit = np.sqrt(6.0 / 90)
        assert np.all(np.abs(w) <= limit)
        assert w.std() > limit / 3


class TestConv2d:
    @pytest.mark.parametrize("k", [1, 3, 4])
    def test_matches_nested_loops(self, rng, k):
        layer = Conv2dLayer(2, 3, k, rng=rng)
        layer.biases[:] = rng.uniform(3, -1, 1)
        x = rng.uniform((2, 7, 6), -1, 1)
        out = conv2d_forward(layer, x)
        assert out.shape == (3, 8 - k, 7 - k)
        assert_allclose(out, conv_oracle(x, layer.kernels, layer.biases), atol=1e-12)

    def test_random_instances_match_nested_loops(self):
        rng = Rng(2024)
        elapsed = 0.0
        for _ in range(100):
            k = int((1, 3, 4)[int(rng.integers(0, 3))])
            in_ch, out_ch = (int(v) for v in rng.integers(1, 4, 2))
            h, w = (int(v) for v in rng.integers(k, 13, 2))
            layer = Conv2dLayer(in_ch, out_ch, k, rng=rng)
            layer.biases[:] = rng.uniform(out_ch, -1, 1)
            x = rng.uniform((in_ch, h, w), -1, 1)
            start = time.perf_counter()
            out = conv2d_forward(layer, x)
            elapsed += time.perf_counter() - start
            assert_allclose(out, conv_oracle(x, layer.kernels, layer.biases), rtol=0, atol=1e-12)
        assert elapsed < 5.0

    def test_unit_kernel_is_identity(self, rng):
        layer = Conv2dLayer(1, 1, 1)
        layer.kernels[...] = 1.0
        x = rng.uniform((1, 4, 4), 0, 1)
        assert_array_equal(conv2d_forward(layer, x), x)

    def test_direct_sum_kernel(self):
        layer = Conv2dLayer(1, 1, 2)
        layer.kernels[...] = 1.0
        x = np.arange(9, dtype=float).reshape(1, 3, 3)
        assert_array_equal(conv2d_forward(layer, x)[0], [[8, 12], [20, 24]])

    def test_batched_matches_per_sample(self, rng):
        layer = Conv2dLayer(3, 2, 3, rng=rng)
        batch = rng.uniform((4, 3, 6, 6), -1, 1)
        stacked = np.stack([conv2d_forward(layer, sample) for sample in batch])
        assert_allclose(conv2d_forward(layer, batch), stacked, atol=1e-12)

    def test_same_padding_keeps_size(self, rng):
        layer = Conv2dLayer(2, 2, 3, padding=1, rng=rng)
        assert conv2d_forward(layer, rng.uniform((2, 5, 5), -1, 1)).shape == (2, 5, 5)

    def test_input_smaller_than_kernel(self):
        with pytest.raises(ShapeError):
            conv2d_forward(Conv2dLayer(1, 1, 4), np.zeros((1, 3, 3)))

    def test_channel_mismatch(self):
        with pytest.raises(ShapeError):
            conv2d_forward(Conv2dLayer(3, 1, 3), np.zeros((2, 5, 5)))

    @pytest.mark.parametrize("k,padding", [(3, 0), (4, 0), (3, 1)])
    def test_backward_matches_finite_differences(self, rng, k, padding):
        layer = Conv2dLayer(2, 3, k, padding=padding, rng=rng)
        layer.biases[:] = rng.uniform(3, -1, 1)
        x = rng.uniform((2, 2, 6, 6), -1, 1)
        g = rng.uniform(conv2d_forward(layer, x).shape, -1, 1)

        def loss():
            return float((conv2d_forward(layer, x) * g).sum())

        grad_x, grad_k, grad_b = conv2d_backward(layer, x, g)
        assert max_rel_error(grad_x, numeric_grad(loss, x)) < FD_TOL
        assert max_rel_error(grad_k, numeric_grad(loss, layer.params["kernels"])) < FD_TOL
        assert max_rel_error(grad_b, numeric_grad(loss, layer.params["biases"])) < FD_TOL

    def test_backward_rejects_wrong_grad_shape(self, rng):
        layer = Conv2dLayer(1, 1, 3, rng=rng)
        with pytest.raises(ShapeError):
            conv2d_backward(layer, np.zeros((1, 1, 5, 5)), np.zeros((1, 1, 2, 2)))


class TestMaxPool:
    def test_golden(self):
        x = np.array([[[1, 3, 2, 0], [4, 2, 1, 5], [0, 0, 9, 8], [7, 6, 1, 1]]], dtype=float)
        out, _ = maxpool_forward(x)
        assert_array_equal(out[0], [[4, 5], [7, 9]])

    def test_matches_window_scan(self, rng):
        x = rng.uniform((3, 6, 8), -1, 1)
        out, _ = maxpool_forward(x)
        assert_array_equal(out, maxpool_oracle(x))

    def test_constant_input(self):
        out, _ = maxpool_forward(np.full((1, 4, 4), 2.5))
        assert_array_equal(out, np.full((1, 2, 2), 2.5))

    def test_odd_size_rejected(self):
        with pytest.raises(ShapeError):
            maxpool_forward(np.zeros((1, 5, 4)))

    def test_overlapping_rejected(self):
        with pytest.raises(ParameterError):
            maxpool_forward(np.zeros((1, 4, 4)), window=2, stride=1)

    def test_backward_routes_to_winner(self):
        x = np.array([[[1, 3], [4, 2]]], dtype=float)
        _, indices = maxpool_forward(x)
        grad = maxpool_backward(indices, np.array([[[5.0]]]))
        assert_array_equal(grad, [[[0, 0], [5, 0]]])

    def test_tie_goes_to_first_in_row_major_order(self):
        _, indices = maxpool_forward(np.ones((1, 2, 2)))
        grad = maxpool_backward(indices, np.ones((1, 1, 1)))
        assert_array_equal(grad, [[[1, 0], [0, 0]]])

    def test_backward_matches_finite_differences(self, rng):
        x = rng.uniform((2, 2, 4, 6), -1, 1)
        _, indices = maxpool_forward(x)
        g = rng.uniform((2, 2, 2, 3), -1, 1)

        def loss():
            return float((maxpool_forward(x)[0] * g).sum())

        assert max_rel_error(maxpool_backward(indices, g), numeric_grad(loss, x)) < FD_TOL

    def test_layer_pads_odd_sizes(self, rng):
        layer = MaxPool2dLayer()
        x = rng.uniform((2, 1, 5, 5), -1, 1)
        out = layer.forward(x)
        assert out.shape == (2, 1, 3, 3)
        assert out[0, 0, 2, 2] == x[0, 0, 4, 4]
        assert layer.backward(np.ones_like(out)).shape == x.shape

    def test_layer_error_policy(self):
        with pytest.raises(ShapeError):
            MaxPool2dLayer(odd="error").forward(np.zeros((1, 1, 5, 5)))


class TestActivations:
    def test_relu(self):
        assert_array_equal(activation_apply([-1.0, 0.0, 2.0], "relu"), [0, 0, 2])

    def test_relu_subgradient_at_zero(self):
        assert_array_equal(activation_grad(np.array([-1.0, 0.0, 2.0]), "relu", np.ones(3)), [0, 0, 1])

    def test_sigmoid_extremes_stay_finite(self):
        out = sigmoid(np.array([-1000.0, 0.0, 1000.0]))
        assert_allclose(out, [0.0, 0.5, 1.0])

    @pytest.mark.parametrize("kind", ["tanh", "sigmoid", "none"])
    def test_grad_matches_finite_differences(self, rng, kind):
        x = rng.uniform(10, -3, 3)
        g = rng.uniform(10, -1, 1)
        analytic = activation_grad(x, kind, g)
        numeric = numeric_grad(lambda: float((activation_apply(x, kind) * g).sum()), x)
        assert max_rel_error(analytic, numeric) < FD_TOL

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            activation_apply([1.0], "swish")

    def test_softmax_golden(self):
        assert_allclose(softmax(np.array([0.0, np.log(3.0)])), [0.25, 0.75])

    def test_softmax_shift_invariant(self, rng):
        z = rng.uniform((3, 4), -2, 2)
        assert_allclose(softmax(z), softmax(z + 100.0), atol=1e-12)

    def test_softmax_large_logits(self):
        out = softmax(np.array([1000.0, 0.0]))
        assert np.all(np.isfinite(out))
        assert_allclose(out.sum(), 1.0)

    def test_softmax_empty(self):
        with pytest.raises(ShapeError):
            softmax(np.zeros(0))

    def test_softmax_backward_matches_finite_differences(self, rng):
        z = rng.uniform((2, 3), -2, 2)
        g = rng.uniform((2, 3), -1, 1)
        analytic = softmax_backward(softmax(z), g)
        numeric = numeric_grad(lambda: float((softmax(z) * g).sum()), z)
        assert max_rel_error(analytic, numeric) < FD_TOL

    def test_layers_round_trip(self, rng):
        act = ActivationLayer("tanh", name="t")
        x = rng.uniform((2, 3), -1, 1)
        assert_allclose(act.forward(x), np.tanh(x))
        assert_allclose(act.backward(np.ones_like(x)), 1 - np.tanh(x) ** 2)
        sm = SoftmaxLayer()
        assert_allclose(sm.forward(x).sum(axis=1), [1.0, 1.0])


class TestDense:
    def test_direct(self):
        layer = DenseLayer(2, 1)
        layer.weights[...] = [[2.0, -1.0]]
        layer.bias[...] = 0.5
        assert_allclose(dense_forward(layer, np.array([3.0, 4.0])), [2.5])

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            dense_forward(DenseLayer(3, 2), np.zeros(4))

    @pytest.mark.parametrize("activation", ["none", "tanh", "sigmoid"])
    def test_backward_matches_finite_differences(self, rng, activation):
        layer = DenseLayer(5, 3, activation, rng=rng)
        layer.bias[:] = rng.uniform(3, -1, 1)
        x = rng.uniform((4, 5), -1, 1)
        g = rng.uniform((4, 3), -1, 1)

        def loss():
            return float((dense_forward(layer, x) * g).sum())

        grad_x, grad_w, grad_b = dense_backward(layer, x, g)
        assert max_rel_error(grad_x, numeric_grad(loss, x)) < FD_TOL
        assert max_rel_error(grad_w, numeric_grad(loss, layer.params["weights"])) < FD_TOL
        assert max_rel_error(grad_b, numeric_grad(loss, layer.params["bias"])) < FD_TOL

    def test_layer_fills_grads(self, rng):
        layer = DenseLayer(3, 2, rng=rng)
        layer.forward(rng.uniform((2, 3), -1, 1))
        layer.backward(np.ones((2, 2)))
        assert set(layer.grads) == {"weights", "bias"}
        assert_allclose(layer.grads["bias"], [2.0, 2.0])


class TestDropout:
    def test_eval_is_identity(self, rng):
        layer = DropoutLayer(0.4)
        x = rng.uniform(20, -1, 1)
        out, _ = dropout_forward(layer, x, None)
        assert_array_equal(out, x)

    def test_zero_rate_is_identity_in_train(self, rng):
        layer = DropoutLayer(0.0)
        layer.set_mode(LayerMode.TRAIN)
        x = rng.uniform(20, -1, 1)
        assert_array_equal(dropout_forward(layer, x, None)[0], x)

    def test_train_needs_rng(self):
        layer = DropoutLayer(0.5)
        layer.set_mode(LayerMode.TRAIN)
        with pytest.raises(ParameterError):
            dropout_forward(layer, np.ones(3), None)

    @pytest.mark.parametrize("rate", [-0.1, 1.0])
    def test_rate_domain(self, rate):
        with pytest.raises(ParameterError):
            DropoutLayer(rate)

    def test_expectation_preserved(self):
        layer = DropoutLayer(0.4)
        layer.set_mode(LayerMode.TRAIN)
        out, mask = dropout_forward(layer, np.ones(100_000), Rng(21))
        assert abs(out.mean() - 1.0) < 0.02
        assert abs((mask == 0).mean() - 0.4) < 0.01
        assert_allclose(out[out > 0], 1.0 / 0.6)

    def test_backward_uses_same_mask(self):
        layer = DropoutLayer(0.5)
        layer.set_mode(LayerMode.TRAIN)
        _, mask = dropout_forward(layer, np.ones(50), Rng(2))
        assert_array_equal(dropout_backward(mask, np.full(50, 3.0)), 3.0 * mask)


class TestFlatten:
    def test_row_major(self):
        x = np.arange(12, dtype=float).reshape(3, 2, 2)
        assert_array_equal(flatten(x), np.arange(12))

    def test_unflatten_restores(self, rng):
        x = rng.uniform((2, 3, 4), -1, 1)
        assert_array_equal(unflatten(flatten(x), x.shape), x)

    def test_unflatten_size_mismatch(self):
        with pytest.raises(ShapeError):
            unflatten(np.zeros(5), (2, 3))

    def test_layer_keeps_batch_axis(self, rng):
        layer = FlattenLayer()
        x = rng.uniform((2, 3, 2, 2), -1, 1)
        out = layer.forward(x)
        assert out.shape == (2, 12)
        assert_array_equal(layer.backward(out), x)


class TestBatchNorm:
    def test_train_output_is_normalised(self, rng):
        layer = BatchNormLayer(3)
        x = rng.uniform((8, 3, 4, 4), -2, 5)
        out = batchnorm_forward(layer, x, LayerMode.TRAIN)
        assert_allclose(out.mean(axis=(0, 2, 3)), 0.0, atol=1e-12)
        assert_allclose(out.var(axis=(0, 2, 3)), 1.0, atol=1e-4)

    def test_running_statistics_update(self, rng):
        layer = BatchNormLayer(2, momentum=0.1)
        x = rng.uniform((6, 2), 0, 4)
        batchnorm_forward(layer, x, LayerMode.TRAIN)
        assert_allclose(layer.buffers["running_mean"], 0.1 * x.mean(axis=0))
        assert_allclose(layer.buffers["running_var"], 0.9 + 0.1 * x.var(axis=0, ddof=1))

    def test_eval_uses_running_statistics(self, rng):
        layer = BatchNormLayer(2, eps=1e-5)
        x = rng.uniform((3, 2), -1, 1)
        assert_allclose(batchnorm_forward(layer, x), x / np.sqrt(1 + 1e-5))

    def test_eval_does_not_update(self, rng):
        layer = BatchNormLayer(2)
        batchnorm_forward(layer, rng.uniform((4, 2), 0, 1))
        assert_array_equal(layer.buffers["running_mean"], [0.0, 0.0])

    def test_train_needs_two_values_per_feature(self):
        with pytest.raises(ParameterError):
            batchnorm_forward(BatchNormLayer(2), np.zeros((1, 2)), LayerMode.TRAIN)
        with pytest.raises(ParameterError):
            batchnorm_forward(BatchNormLayer(2), np.zeros((1, 2, 1, 1)), LayerMode.TRAIN)

    def test_single_image_batch_uses_spatial_statistics(self, rng):
        layer = BatchNormLayer(3, momentum=0.5)
        x = rng.uniform((1, 3, 4, 4), -2, 5)
        out = batchnorm_forward(layer, x, LayerMode.TRAIN)
        assert_allclose(out.mean(axis=(0, 2, 3)), 0.0, atol=1e-12)
        assert_allclose(layer.buffers["running_var"], 0.5 + 0.5 * x.var(axis=(0, 2, 3), ddof=1))

    def test_feature_mismatch(self):
        with pytest.raises(ShapeError):
            batchnorm_forward(BatchNormLayer(3), np.zeros((4, 2)))

    @pytest.mark.parametrize("mode", [LayerMode.TRAIN, LayerMode.EVAL])
    @pytest.mark.parametrize("shape", [(5, 3), (3, 3, 2, 2)])
    def test_backward_matches_finite_differences(self, rng, mode, shape):
        layer = BatchNormLayer(3)
        layer.params["gamma"][:] = rng.uniform(3, 0.5, 1.5)
        layer.params["beta"][:] = rng.uniform(3, -1, 1)
        layer.buffers["running_mean"][:] = rng.uniform(3, -0.5, 0.5)
        layer.buffers["running_var"][:] = rng.uniform(3, 0.5, 2.0)
        x = rng.uniform(shape, -1, 1)
        g = rng.uniform(shape, -1, 1)

        def loss():
            return float((batchnorm_forward(layer, x, mode, update_stats=False) * g).sum())

        grad_x, grad_gamma, grad_beta = batchnorm_backward(layer, x, g, mode)
        assert max_rel_error(grad_x, numeric_grad(loss, x)) < FD_TOL
        assert max_rel_error(grad_gamma, numeric_grad(loss, layer.params["gamma"])) < FD_TOL
        assert max_rel_error(grad_beta, numeric_grad(loss, layer.params["beta"])) < FD_TOL


class TestResidualBlock:
    def test_zero_inner_weights_reduce_to_tanh(self, rng):
        block = ResidualBlock(2, 2)
        x = rng.uniform((2, 5, 5), -2, 2)
        assert_allclose(residual_forward(block, x), np.tanh(x), atol=1e-12)

    def test_shape_preserved(self, rng):
        block = ResidualBlock(3, 3, rng=rng)
        assert residual_forward(block, rng.uniform((2, 3, 6, 6), -1, 1)).shape == (2, 3, 6, 6)

    def test_projection_when_channels_differ(self, rng):
        block = ResidualBlock(2, 4, rng=rng)
        assert "proj.kernels" in block.params
        assert residual_forward(block, rng.uniform((2, 2, 4, 4), -1, 1)).shape == (2, 4, 4, 4)

    def test_even_kernel_rejected(self):
        with pytest.raises(ParameterError):
            ResidualBlock(2, 2, kernel_size=4)

    def test_params_share_child_arrays(self, rng):
        block = ResidualBlock(2, 2, rng=rng)
        assert block.params["conv1.kernels"] is block.conv1.params["kernels"]
        assert block.buffers["bn2.running_var"] is block.bn2.buffers["running_var"]

    def test_set_mode_reaches_children(self):
        block = ResidualBlock(2, 2)
        block.set_mode(LayerMode.TRAIN)
        assert all(child.mode == LayerMode.TRAIN for child in block.children)

    @pytest.mark.parametrize("channels", [(2, 2), (2, 3)])
    def test_backward_matches_finite_differences(self, rng, channels):
        block = ResidualBlock(*channels, rng=rng)
        x = rng.uniform((3, channels[0], 4, 4), -1, 1)
        g = rng.uniform((3, channels[1], 4, 4), -1, 1)

        def loss():
            return float((residual_forward(block, x, LayerMode.TRAIN) * g).sum())

        grad_x, grads = residual_backward(block, x, g, LayerMode.TRAIN)
        assert set(grads) == set(block.params)
        assert max_rel_error(grad_x, numeric_grad(loss, x)) < FD_TOL
        for name, value in block.params.items():
            assert max_rel_error(grads[name], numeric_grad(loss, value)) < FD_TOL, name


class TestLayerStack:
    def _stack(self, rng):
        return LayerStack([
            Conv2dLayer(1, 2, 3, rng=rng, name="conv"),
            ActivationLayer("tanh", name="act"),
            MaxPool2dLayer(name="pool"),
            FlattenLayer(),
            DenseLayer(8, 1, "sigmoid", rng=rng, name="out")
        ])

    def test_duplicate_names_rejected(self):
        with pytest.raises(ParameterError):
            LayerStack([FlattenLayer(), FlattenLayer()])

    def test_lookup_by_name(self, rng):
        stack = self._stack(rng)
        assert stack["pool"].kind == "maxpool2d"
        with pytest.raises(KeyError):
            stack["missing"]

    def test_starts_in_eval_and_switches(self, rng):
        stack = self._stack(rng)
        assert all(layer.mode == LayerMode.EVAL for layer in stack)
        stack.set_mode(LayerMode.TRAIN)
        assert all(layer.mode == LayerMode.TRAIN for layer in stack)

    def test_parameter_names_and_count(self, rng):
        stack = self._stack(rng)
        names = [name for name, _ in stack.named_parameters()]
        assert names == ["conv.kernels", "conv.biases", "out.weights", "out.bias"]
        assert stack.parameter_count() == 2 * 9 + 2 + 8 + 1

    def test_backward_matches_finite_differences(self, rng):
        stack = self._stack(rng)
        x = rng.uniform((2, 1, 6, 6), -1, 1)

        def loss():
            return float(stack.forward(x).sum())

        stack.forward(x)
        grad_x = stack.backward(np.ones((2, 1)))
        grads = stack.named_grads()
        assert max_rel_error(grad_x, numeric_grad(loss, x)) < FD_TOL
        for name, value in stack.named_parameters():
            assert max_rel_error(grads[name], numeric_grad(loss, value)) < FD_TOL, name


class TestRegistry:
    def test_rebuild_from_descriptor(self, rng):
        layer = ResidualBlock(2, 3, kernel_size=3, rng=rng, name="res")
        rebuilt = LAYER_REGISTRY.build(layer.describe())
        assert isinstance(rebuilt, ResidualBlock)
        assert rebuilt.describe() == layer.describe()

    def test_unknown_type(self):
        with pytest.raises(CheckpointError):
            LAYER_REGISTRY.build({"type": "lstm", "name": "x", "config": {}})

    def test_bad_config(self):
        with pytest.raises(CheckpointError):
            LAYER_REGISTRY.build({"type": "dense", "name": "x", "config": {"width": 3}})
