import numpy as np
import pytest

from common.errors import ArgumentError, StateError
from tests import oracles
from topface.pointcloud import PointCloud
from topface.recognizer import (
    EdgeConvLayer,
    RecognizerNet,
    forward,
    knn,
    load_recognizer,
    predict,
    save_recognizer,
    subsample_indices,
    train_recognizer,
)
from topface.schemas import RecognizerTrainingConfig
from topface.tensor import Tensor, softmax_cross_entropy
from topface.tensor.gradcheck import gradient_check


@pytest.fixture
def small_net(tiny_recognizer_config):
    net = RecognizerNet(3, tiny_recognizer_config)
    net.eval()
    return net


# =============================================================================
# Graph layers
# =============================================================================


class TestKnn:
    def test_matches_reference(self, rng):
        for _ in range(100):
            n = int(rng.integers(5, 30))
            k = int(rng.integers(1, n))
            features = rng.normal(size=(n, int(rng.integers(1, 6))))
            np.testing.assert_array_equal(knn(features, k).neighbors, oracles.knn(features, k))

    def test_excludes_self_and_breaks_ties_low(self):
        line = np.array([[0.0], [1.0], [2.0], [3.0]])
        graph = knn(line, 1)
        assert graph.neighbors[:, 0].tolist() == [1, 0, 1, 2]

    def test_k_must_be_below_point_count(self):
        with pytest.raises(ArgumentError):
            knn(np.zeros((4, 3)), 4)
        with pytest.raises(ArgumentError):
            knn(np.zeros((4, 3)), 0)


class TestEdgeConv:
    def test_matches_materialized_edges(self, rng):
        for _ in range(20):
            n, d, w = 12, int(rng.integers(1, 5)), int(rng.integers(1, 6))
            features = rng.normal(size=(n, d))
            layer = EdgeConvLayer(d, w, rng)
            layer.bias.values[:] = rng.normal(size=w)
            graph = knn(features, 4)
            got = layer(Tensor(features), graph).values
            expected = oracles.edge_conv(features, graph.neighbors, layer.weight.values, layer.bias.values)
            np.testing.assert_allclose(got, expected, atol=1e-12)


# =============================================================================
# Network
# =============================================================================


class TestRecognizerNet:
    def test_permutation_invariance(self, small_net, rng):
        for _ in range(20):
            points = rng.uniform(-50, 50, size=(24, 3))
            logits, _ = forward(small_net, PointCloud(points=points))
            for _ in range(20):
                shuffled, _ = forward(small_net, PointCloud(points=points[rng.permutation(24)]))
                np.testing.assert_allclose(shuffled, logits, atol=1e-9)

    def test_graph_is_rebuilt_from_layer_features(self, make_blobs, tiny_recognizer_config, rng):
        net = train_recognizer(make_blobs(), tiny_recognizer_config.model_copy(update={"epochs": 3})).net
        graphs = net.trace(rng.uniform(-50, 50, size=(64, 3)), training=False).graphs
        assert len(graphs) == len(net.widths)
        assert (graphs[0].neighbors != graphs[1].neighbors).any(axis=1).sum() > 0

    def test_global_pool_ignores_duplicate_rows(self, small_net, rng):
        per_point = rng.normal(size=(20, small_net.linked_width))
        base = small_net.global_pool(Tensor(per_point)).values
        doubled = small_net.global_pool(Tensor(np.vstack([per_point, per_point[:7]]))).values
        np.testing.assert_array_equal(doubled, base)

    def test_linked_features_stack_coordinates_and_layers(self, small_net, rng):
        _, linked = forward(small_net, PointCloud(points=rng.uniform(-50, 50, size=(30, 3))))
        assert linked.per_point.shape == (30, 3 + 8 + 8)
        assert linked.global_vector.shape == (16,)

    def test_gradients(self, rng):
        config = RecognizerTrainingConfig(k=3, widths=(4,), global_width=6, point_budget=10, dropout=0.0)
        net = RecognizerNet(3, config)
        points = rng.uniform(-50, 50, size=(10, 3))
        loss = lambda: softmax_cross_entropy(net.trace(points, training=False).logits, 1)  # noqa: E731
        assert gradient_check(loss, net.parameters(), h=1e-6) < 1e-4

    def test_needs_two_classes(self, tiny_recognizer_config):
        with pytest.raises(ArgumentError):
            RecognizerNet(1, tiny_recognizer_config)

    def test_cloud_must_exceed_k(self, small_net):
        with pytest.raises(ArgumentError):
            forward(small_net, PointCloud(points=np.arange(12.0).reshape(4, 3)))

    def test_subsample_is_sorted_and_seeded(self):
        idx = subsample_indices(100, 10, seed=3)
        assert idx.size == 10 and np.all(np.diff(idx) > 0)
        np.testing.assert_array_equal(idx, subsample_indices(100, 10, seed=3))
        np.testing.assert_array_equal(subsample_indices(5, 10, seed=3), np.arange(5))


# =============================================================================
# Training
# =============================================================================


class TestTraining:
    def test_separable_blobs_are_learned(self, make_blobs, tiny_recognizer_config):
        config = tiny_recognizer_config.model_copy(update={"epochs": 15, "lr": 1e-2})
        result = train_recognizer(make_blobs(), config)
        assert [e.epoch for e in result.log] == list(range(16))
        assert result.final_accuracy == 1.0
        assert result.log[-1].loss < result.log[0].loss

    def test_zero_epochs_keeps_initial_weights(self, make_blobs, tiny_recognizer_config):
        config = tiny_recognizer_config.model_copy(update={"epochs": 0})
        result = train_recognizer(make_blobs(), config)
        fresh = RecognizerNet(2, config)
        assert len(result.log) == 1
        for (name, p), (_, q) in zip(result.net.named_parameters(), fresh.named_parameters()):
            np.testing.assert_array_equal(p.values, q.values, err_msg=name)

    def test_untrained_accuracy_is_at_chance(self, make_blobs, tiny_recognizer_config):
        clouds = make_blobs(n_identities=4, per_identity=2)
        accuracies = [
            train_recognizer(clouds, tiny_recognizer_config.model_copy(update={"epochs": 0, "seed": seed})).log[0].accuracy
            for seed in range(40)
        ]
        assert abs(np.mean(accuracies) - 0.25) <= 0.10

    def test_same_seed_same_weights(self, make_blobs, tiny_recognizer_config):
        clouds = make_blobs()
        a = train_recognizer(clouds, tiny_recognizer_config).net.state_dict()
        b = train_recognizer(clouds, tiny_recognizer_config).net.state_dict()
        for key in a:
            np.testing.assert_array_equal(a[key], b[key])

    def test_single_identity_rejected(self, make_blobs, tiny_recognizer_config):
        with pytest.raises(ArgumentError):
            train_recognizer(make_blobs(n_identities=1), tiny_recognizer_config)

    def test_clouds_too_small_for_the_graph_are_skipped(self, make_blobs, tiny_recognizer_config, caplog):
        config = tiny_recognizer_config.model_copy(update={"epochs": 0})
        clouds = make_blobs()
        tiny = PointCloud(points=np.zeros((config.k, 3)), identity=0)
        with caplog.at_level("WARNING", logger="topface.recognizer.trainer"):
            result = train_recognizer(clouds + [tiny], config)
        assert "RECOGNIZER_SKIP_SMALL skipped=1" in caplog.text
        assert result.log[0].accuracy == train_recognizer(clouds, config).log[0].accuracy

    def test_predict_is_worker_independent(self, make_blobs, small_net):
        clouds = make_blobs(n_identities=3, per_identity=2)
        serial = predict(small_net, clouds, point_budget=48, workers=1)
        threaded = predict(small_net, clouds, point_budget=48, workers=3)
        np.testing.assert_array_equal(serial, threaded)


class TestCheckpoint:
    def test_save_and_load(self, small_net, tiny_recognizer_config, rng, tmp_path):
        path = tmp_path / "recognizer.tdnz"
        save_recognizer(small_net, path)
        loaded = load_recognizer(path, tiny_recognizer_config)
        assert loaded.n_classes == 3
        pc = PointCloud(points=rng.uniform(-50, 50, size=(30, 3)))
        np.testing.assert_array_equal(forward(loaded, pc)[0], forward(small_net, pc)[0])

    def test_missing_checkpoint(self, tiny_recognizer_config, tmp_path):
        with pytest.raises(StateError) as info:
            load_recognizer(tmp_path / "absent.tdnz", tiny_recognizer_config)
        assert info.value.stage == "recognizer"
