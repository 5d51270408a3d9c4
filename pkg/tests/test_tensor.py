import numpy as np
import pytest

from common.errors import ArgumentError, DimensionError, NumericalError, ParseError, StateError
from tests import oracles
from topface.tensor import (
    Adam,
    Conv2d,
    Linear,
    Module,
    Parameter,
    Tensor,
    concat,
    conv2d,
    dropout,
    is_grad_enabled,
    leaky_relu,
    linear,
    load_checkpoint,
    masked_l1,
    max_pool2d,
    no_grad,
    relu,
    save_checkpoint,
    save_modules,
    softmax_cross_entropy,
    softplus,
    upsample_nearest2d,
)
from topface.tensor.checkpoint import decode_checkpoint, encode_checkpoint
from topface.tensor.gradcheck import gradient_check


def away_from_zero(rng, shape, low=0.1):
    """Values with |x| >= low so kinks stay out of finite-difference reach."""
    return rng.choice([-1.0, 1.0], size=shape) * rng.uniform(low, 1.0, size=shape)


# =============================================================================
# Forward ops against loop references
# =============================================================================


class TestConv2d:
    def test_matches_reference_on_random_instances(self, rng):
        for _ in range(100):
            c_in, c_out = rng.integers(1, 3, size=2)
            k = int(rng.integers(1, 4))
            stride = int(rng.integers(1, 3))
            padding = int(rng.integers(0, 3))
            h, w = rng.integers(k, 7, size=2)
            x = rng.normal(size=(c_in, h, w))
            kernel = rng.normal(size=(c_out, c_in, k, k))
            bias = rng.normal(size=c_out)
            got = conv2d(Tensor(x), Tensor(kernel), stride, padding, Tensor(bias)).values
            np.testing.assert_allclose(got, oracles.conv2d(x, kernel, stride, padding, bias), atol=1e-12)

    def test_output_size(self):
        out = conv2d(Tensor(np.zeros((1, 9, 7))), Tensor(np.zeros((2, 1, 5, 5))), stride=2, padding=2)
        assert out.shape == (2, 5, 4)

    def test_kernel_larger_than_input(self):
        with pytest.raises(DimensionError):
            conv2d(Tensor(np.zeros((1, 2, 2))), Tensor(np.zeros((1, 1, 3, 3))))

    def test_channel_mismatch(self):
        with pytest.raises(DimensionError):
            conv2d(Tensor(np.zeros((2, 4, 4))), Tensor(np.zeros((1, 3, 3, 3))))


class TestMaxPool:
    def test_matches_reference_including_odd_sizes(self, rng):
        for _ in range(100):
            c = int(rng.integers(1, 3))
            h, w = rng.integers(1, 8, size=2)
            window = int(rng.integers(1, 4))
            x = rng.normal(size=(c, h, w))
            pooled, _ = max_pool2d(Tensor(x), window)
            np.testing.assert_array_equal(pooled.values, oracles.max_pool2d(x, window))

    def test_ties_resolve_to_lowest_index(self):
        _, argmax = max_pool2d(Tensor(np.ones((1, 2, 2))), 2)
        assert argmax.tolist() == [[[0]]]

    def test_argmax_indexes_the_input_plane(self):
        x = np.zeros((1, 4, 4))
        x[0, 3, 2] = 5.0
        _, argmax = max_pool2d(Tensor(x), 2)
        assert argmax[0, 1, 1] == 3 * 4 + 2

    def test_window_must_be_positive(self):
        with pytest.raises(ArgumentError):
            max_pool2d(Tensor(np.zeros((1, 2, 2))), 0)


class TestLinear:
    def test_matches_reference(self, rng):
        for _ in range(100):
            n, f_in, f_out = rng.integers(1, 6, size=3)
            x, w, b = rng.normal(size=(n, f_in)), rng.normal(size=(f_out, f_in)), rng.normal(size=f_out)
            got = linear(Tensor(x), Tensor(w), Tensor(b)).values
            np.testing.assert_allclose(got, oracles.linear(x, w, b), atol=1e-12)

    def test_width_mismatch(self):
        with pytest.raises(DimensionError):
            linear(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 5))))


class TestActivations:
    def test_relu_and_leaky(self):
        x = Tensor([-2.0, 0.0, 3.0])
        assert relu(x).values.tolist() == [0.0, 0.0, 3.0]
        np.testing.assert_allclose(leaky_relu(x, 0.2).values, [-0.4, 0.0, 3.0])

    def test_softplus_is_stable_for_large_inputs(self):
        out = softplus(Tensor([-800.0, 0.0, 800.0])).values
        np.testing.assert_allclose(out, [0.0, np.log(2.0), 800.0])

    def test_dropout_identity_in_eval(self, rng):
        x = Tensor(rng.normal(size=10))
        assert dropout(x, 0.5, rng, training=False) is x

    def test_dropout_rescales_kept_units(self, rng):
        out = dropout(Tensor(np.ones(1000)), 0.5, rng, training=True).values
        assert set(np.unique(out)) <= {0.0, 2.0}

    def test_dropout_probability_range(self, rng):
        with pytest.raises(ArgumentError):
            dropout(Tensor(np.ones(3)), 1.0, rng, training=True)


class TestLosses:
    def test_cross_entropy_uniform_logits(self):
        loss = softmax_cross_entropy(Tensor(np.zeros(4)), 2)
        assert loss.item() == pytest.approx(np.log(4.0))

    def test_cross_entropy_label_range(self):
        with pytest.raises(ArgumentError):
            softmax_cross_entropy(Tensor(np.zeros(3)), 3)

    def test_masked_l1_ignores_unmasked_cells(self):
        pred = Tensor(np.array([[1.0, 100.0], [3.0, 4.0]]))
        target = np.array([[0.0, 0.0], [1.0, 4.0]])
        mask = np.array([[1, 0], [1, 1]])
        assert masked_l1(pred, target, mask).item() == pytest.approx((1.0 + 2.0 + 0.0) / 3)

    def test_masked_l1_empty_mask_is_zero(self):
        pred = Tensor(np.ones((2, 2)), requires_grad=True)
        assert masked_l1(pred, np.zeros((2, 2)), np.zeros((2, 2))).item() == 0.0


# =============================================================================
# Gradients
# =============================================================================


class TestGradients:
    def check(self, loss_fn, *tensors, tol=1e-4):
        assert gradient_check(loss_fn, tensors) < tol

    def test_conv2d_strided_padded(self, rng):
        x = Tensor(rng.normal(size=(2, 5, 6)), requires_grad=True)
        k = Tensor(rng.normal(size=(3, 2, 3, 3)), requires_grad=True)
        b = Tensor(rng.normal(size=3), requires_grad=True)
        weights = rng.normal(size=(3, 3, 3))
        self.check(lambda: (conv2d(x, k, stride=2, padding=1, bias=b) * weights).sum(), x, k, b)

    def test_max_pool(self, rng):
        x = Tensor(rng.permutation(30).reshape(2, 3, 5) * 0.1, requires_grad=True)
        weights = rng.normal(size=(2, 2, 3))
        self.check(lambda: (max_pool2d(x, 2)[0] * weights).sum(), x)

    def test_upsample(self, rng):
        x = Tensor(rng.normal(size=(2, 2, 3)), requires_grad=True)
        weights = rng.normal(size=(2, 4, 6))
        self.check(lambda: (upsample_nearest2d(x, 2) * weights).sum(), x)

    def test_activations(self, rng):
        x = Tensor(away_from_zero(rng, (4, 5)), requires_grad=True)
        self.check(lambda: (relu(x) + leaky_relu(x, 0.2) * 2.0 + softplus(x) * 3.0).sum(), x)

    def test_linear(self, rng):
        x = Tensor(rng.normal(size=(4, 3)), requires_grad=True)
        w = Tensor(rng.normal(size=(2, 3)), requires_grad=True)
        b = Tensor(rng.normal(size=2), requires_grad=True)
        weights = rng.normal(size=(4, 2))
        self.check(lambda: (linear(x, w, b) * weights).sum(), x, w, b)

    def test_cross_entropy(self, rng):
        z = Tensor(rng.normal(size=5), requires_grad=True)
        self.check(lambda: softmax_cross_entropy(z, 3), z)

    def test_masked_l1(self, rng):
        pred = Tensor(rng.normal(size=(3, 3)), requires_grad=True)
        target = pred.values + away_from_zero(rng, (3, 3))
        mask = rng.integers(0, 2, size=(3, 3))
        mask[0, 0] = 1
        self.check(lambda: masked_l1(pred, target, mask), pred)

    def test_structural_ops(self, rng):
        x = Tensor((rng.permutation(24).reshape(6, 4) + 1) * 0.3, requires_grad=True)
        rows = np.array([[0, 2], [5, 5], [1, 3]])

        def loss():
            gathered = x.take_rows(rows).max(axis=1)
            joined = concat([gathered, x[1:3].reshape(2, 4)], axis=0)
            return (joined * np.arange(20).reshape(5, 4)).mean() + x.abs().sum()

        self.check(loss, x)

    def test_backward_twice_doubles_leaf_gradients(self, rng):
        x = Tensor(rng.normal(size=3), requires_grad=True)
        loss = (x * x).sum()
        loss.backward()
        first = x.grad.copy()
        loss.backward()
        np.testing.assert_allclose(x.grad, 2 * first)


class TestGraphRecording:
    def test_no_grad_disables_tracking(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with no_grad():
            assert not is_grad_enabled()
            y = (x * 2.0).sum()
        assert is_grad_enabled()
        assert not y.requires_grad

    def test_backward_needs_scalar(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(ArgumentError):
            (x * 2.0).backward()

    def test_non_finite_result_raises(self):
        with np.errstate(over="ignore"):
            with pytest.raises(NumericalError):
                Tensor([1e308]) * 10.0

    def test_division_only_by_scalar(self):
        with pytest.raises(ArgumentError):
            Tensor([1.0]) / Tensor([2.0])


# =============================================================================
# Modules, optimizer, checkpoints
# =============================================================================


class TwoLayer(Module):
    def __init__(self, rng):
        super().__init__()
        self.conv = Conv2d(1, 2, 3, rng, padding=1)
        self.fc = Linear(8, 1, rng)


class TestModule:
    def test_parameter_names_follow_attribute_paths(self, rng):
        names = [name for name, _ in TwoLayer(rng).named_parameters()]
        assert names == ["conv.weight", "conv.bias", "fc.weight", "fc.bias"]

    def test_load_state_dict_missing_key(self, rng):
        net = TwoLayer(rng)
        state = net.state_dict()
        del state["fc.bias"]
        with pytest.raises(StateError):
            net.load_state_dict(state)

    def test_load_state_dict_shape_mismatch(self, rng):
        net = TwoLayer(rng)
        state = net.state_dict()
        state["fc.weight"] = np.zeros((2, 8))
        with pytest.raises(DimensionError):
            net.load_state_dict(state)


class TestAdam:
    def test_first_step_moves_by_learning_rate(self):
        p = Parameter(np.array([1.0, -2.0]))
        opt = Adam([p], lr=0.01)
        (p * p).sum().backward()
        opt.step()
        np.testing.assert_allclose(p.values, [0.99, -1.99], atol=1e-8)

    def test_rejects_non_positive_learning_rate(self):
        with pytest.raises(ArgumentError):
            Adam([Parameter(np.zeros(1))], lr=0.0)

    def test_minimizes_a_quadratic(self):
        p = Parameter(np.array([3.0]))
        opt = Adam([p], lr=0.1)
        for _ in range(300):
            opt.zero_grad()
            ((p - 1.0) * (p - 1.0)).sum().backward()
            opt.step()
        assert p.values[0] == pytest.approx(1.0, abs=1e-2)


class TestCheckpoint:
    def test_modules_round_trip(self, rng, tmp_path):
        net = TwoLayer(rng)
        path = tmp_path / "net.tdnz"
        save_modules({"a/": net}, path)
        other = TwoLayer(np.random.default_rng(99))
        other.load_state_dict(load_checkpoint(path), prefix="a/")
        for (_, p), (_, q) in zip(net.named_parameters(), other.named_parameters()):
            np.testing.assert_array_equal(p.values, q.values)

    def test_scalar_and_empty_arrays(self, tmp_path):
        path = tmp_path / "c.tdnz"
        save_checkpoint({"s": np.array(2.5), "e": np.zeros((0, 3))}, path)
        arrays = load_checkpoint(path)
        assert arrays["s"].shape == () and arrays["s"] == 2.5
        assert arrays["e"].shape == (0, 3)

    def test_bad_magic(self):
        with pytest.raises(ParseError):
            decode_checkpoint(b"NOPE" + b"\x00" * 10)

    def test_truncated_payload(self):
        blob = encode_checkpoint({"w": np.arange(6.0).reshape(2, 3)})
        with pytest.raises(ParseError):
            decode_checkpoint(blob[:-5])
