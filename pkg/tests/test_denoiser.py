import math

import numpy as np
import pytest

from common.errors import ArgumentError, DimensionError, StateError
from topface.denoiser import (
    DenoiserBundle,
    DenoisingPair,
    GeneratorNet,
    LossWeights,
    RecognitionFeatureDiscriminator,
    VisualAppearanceDiscriminator,
    denoise,
    discriminator_loss,
    gan_losses,
    generator_loss,
    train_denoiser,
)
from topface.pointcloud import NoiseSpec, PointCloud, add_gaussian_noise
from topface.projection import PLANE_ORDER
from topface.recognizer import RecognizerNet
from topface.synth import generate_face, make_identities
from topface.tensor import Tensor
from topface.tensor.gradcheck import gradient_check


@pytest.fixture
def recognizer(tiny_recognizer_config):
    net = RecognizerNet(2, tiny_recognizer_config)
    net.eval()
    return net


@pytest.fixture
def pairs(make_blobs):
    clouds = make_blobs(n_identities=2, per_identity=2)
    return [
        DenoisingPair(noisy=add_gaussian_noise(pc, NoiseSpec(variance=4.0, seed=i)), clean=pc)
        for i, pc in enumerate(clouds)
    ]


def make_identity(generator: GeneratorNet) -> None:
    """Zero the output conv except a unit centre tap on the raw gray channel."""
    weight = generator.output.weight.values
    weight[:] = 0.0
    weight[0, generator.channels[0], 2, 2] = 1.0
    generator.output.bias.values[:] = 0.0


# =============================================================================
# Loss arithmetic
# =============================================================================


class TestLosses:
    def test_discriminator_loss_weights(self):
        w = LossWeights()
        assert discriminator_loss(1.0, 1.0, w) == pytest.approx(1.00, abs=1e-15)
        assert discriminator_loss(0.5, 0.2, w) == pytest.approx(0.401, abs=1e-15)
        assert discriminator_loss(0.5, 0.2, w) == 0.67 * 0.5 + 0.33 * 0.2

    def test_generator_loss(self):
        w = LossWeights(lambda1=0.67, lambda2=0.33)
        assert generator_loss(1.0, 2.0, 0.5, w, mu=10.0) == 0.67 * 2.0 + 0.33 * 1.0 + 10.0 * 0.5
        with pytest.raises(ArgumentError):
            generator_loss(1.0, 1.0, 1.0, w, mu=-1.0)

    def test_negative_weights_rejected(self):
        with pytest.raises(ArgumentError):
            LossWeights(lambda1=-0.1)

    def test_gan_losses_at_zero_logits(self):
        disc, gen = gan_losses(Tensor([0.0]), Tensor([0.0]))
        assert disc.item() == pytest.approx(2 * math.log(2))
        assert gen.item() == pytest.approx(math.log(2))

    def test_confident_discriminator_has_small_loss(self):
        disc, gen = gan_losses(Tensor([20.0]), Tensor([-20.0]))
        assert disc.item() < 1e-8
        assert gen.item() == pytest.approx(20.0, abs=1e-8)


# =============================================================================
# Networks
# =============================================================================


class TestNetworks:
    def test_generator_shape_and_divisibility(self, rng):
        g = GeneratorNet((3, 4), rng)
        assert g(Tensor(rng.normal(size=(2, 8, 8)))).shape == (1, 8, 8)
        with pytest.raises(DimensionError):
            g(Tensor(np.zeros((2, 6, 6))))

    def test_generator_gradients(self, rng):
        g = GeneratorNet((2,), rng, value_scale=50.0)
        image = Tensor(np.stack([rng.uniform(-30, 30, size=(4, 4)), rng.integers(0, 2, size=(4, 4))]))
        weights = rng.normal(size=(1, 4, 4))
        assert gradient_check(lambda: (g(image) * weights).sum(), g.parameters(), h=1e-6) < 1e-4

    def test_vad_gradients(self, rng):
        vad = VisualAppearanceDiscriminator(8, (3,), rng)
        image = Tensor(np.stack([rng.uniform(-30, 30, size=(8, 8)), np.ones((8, 8))]))
        assert vad(image).shape == (1,)
        assert gradient_check(lambda: vad(image).sum(), vad.parameters(), h=1e-6) < 1e-4

    def test_rfd_gradients(self, rng):
        rfd = RecognitionFeatureDiscriminator(6, (5, 4), rng)
        features = Tensor(rng.normal(size=6), requires_grad=True)
        assert gradient_check(lambda: rfd(features).sum(), rfd.parameters() + [features], h=1e-6) < 1e-4

    def test_rfd_width_checked(self, rng):
        with pytest.raises(DimensionError):
            RecognitionFeatureDiscriminator(6, (4,), rng)(Tensor(np.zeros(5)))


class TestInference:
    def test_identity_generators_return_the_input(self, tiny_denoiser_config):
        bundle = DenoiserBundle(tiny_denoiser_config, feature_width=16)
        for axis in PLANE_ORDER:
            make_identity(bundle.generators[axis])
        i = np.arange(8)
        pc = PointCloud(
            points=np.stack([i * 10.0, (3 * i % 8) * 10.0, (5 * i % 8) * 10.0], axis=1), identity=1
        )
        out = denoise(pc, bundle)
        np.testing.assert_allclose(out.points, pc.points, rtol=1e-12, atol=1e-12)
        assert out.identity == 1

    def test_output_is_index_aligned(self, tiny_denoiser_config, cloud):
        out = denoise(cloud, DenoiserBundle(tiny_denoiser_config, feature_width=16))
        assert out.n_points == cloud.n_points

    def test_missing_bundle(self, cloud):
        with pytest.raises(StateError):
            denoise(cloud, None)


# =============================================================================
# Training
# =============================================================================


class TestTraining:
    def test_one_epoch_log(self, pairs, recognizer, tiny_denoiser_config):
        result = train_denoiser(pairs, recognizer, tiny_denoiser_config)
        assert [e.epoch for e in result.log] == [0, 1]
        first, last = result.log
        assert math.isnan(first.l_d) and math.isnan(first.generator_loss)
        for value in (last.l_d, last.l_v, last.l_r, last.generator_loss, last.recon, last.holdout_recon):
            assert math.isfinite(value)
        assert last.l_d == pytest.approx(0.67 * last.l_r + 0.33 * last.l_v)
        assert result.holdout_size == 1

    def test_held_out_reconstruction_improves(self, recognizer, tiny_denoiser_config):
        face = make_identities(1, seed=0)[0]
        clean = [generate_face(face, 1.0, sample_seed=s, n_points=256) for s in range(10)]
        pairs = [
            DenoisingPair(noisy=add_gaussian_noise(pc, NoiseSpec(variance=4.0, seed=100 + i)), clean=pc)
            for i, pc in enumerate(clean)
        ]
        config = tiny_denoiser_config.model_copy(update={"epochs": 30, "resolution": 16, "channels": (8,)})
        result = train_denoiser(pairs, recognizer, config)
        assert result.holdout_size == 1
        assert result.log[-1].holdout_recon < result.log[0].holdout_recon

    def test_zero_epochs_keeps_initial_weights(self, pairs, recognizer, tiny_denoiser_config):
        config = tiny_denoiser_config.model_copy(update={"epochs": 0})
        trained = train_denoiser(pairs, recognizer, config).bundle.state_dict()
        fresh = DenoiserBundle(config, feature_width=recognizer.global_width).state_dict()
        assert trained.keys() == fresh.keys()
        for key in fresh:
            np.testing.assert_array_equal(trained[key], fresh[key])

    def test_same_seed_same_weights(self, pairs, recognizer, tiny_denoiser_config):
        a = train_denoiser(pairs, recognizer, tiny_denoiser_config).bundle.state_dict()
        b = train_denoiser(pairs, recognizer, tiny_denoiser_config).bundle.state_dict()
        for key in a:
            np.testing.assert_array_equal(a[key], b[key])

    def test_recognizer_is_left_untouched(self, pairs, recognizer, tiny_denoiser_config):
        before = recognizer.state_dict()
        train_denoiser(pairs, recognizer, tiny_denoiser_config)
        for key, value in recognizer.state_dict().items():
            np.testing.assert_array_equal(value, before[key])

    def test_single_pair_is_its_own_holdout(self, pairs, recognizer, tiny_denoiser_config):
        result = train_denoiser(pairs[:1], recognizer, tiny_denoiser_config)
        assert result.holdout_size == 0
        assert result.log[0].holdout_recon == result.log[0].recon

    def test_vad_only_leaves_rfd_untrained(self, pairs, recognizer, tiny_denoiser_config):
        config = tiny_denoiser_config.model_copy(update={"lambda1": 0.0, "lambda2": 1.0})
        result = train_denoiser(pairs, recognizer, config)
        fresh = DenoiserBundle(config, feature_width=recognizer.global_width)
        for (_, p), (_, q) in zip(result.bundle.rfd.named_parameters(), fresh.rfd.named_parameters()):
            np.testing.assert_array_equal(p.values, q.values)
        assert result.log[-1].l_r == 0.0

    def test_empty_training_set(self, recognizer, tiny_denoiser_config):
        with pytest.raises(ArgumentError):
            train_denoiser([], recognizer, tiny_denoiser_config)


class TestBundle:
    def test_save_and_load(self, tiny_denoiser_config, tmp_path):
        bundle = DenoiserBundle(tiny_denoiser_config, feature_width=16)
        path = tmp_path / "denoiser.tdnz"
        bundle.save(path)
        loaded = DenoiserBundle.load(path, tiny_denoiser_config)
        assert loaded.feature_width == 16
        original = bundle.state_dict()
        for key, value in loaded.state_dict().items():
            np.testing.assert_array_equal(value, original[key])

    def test_missing_checkpoint(self, tiny_denoiser_config, tmp_path):
        with pytest.raises(StateError) as info:
            DenoiserBundle.load(tmp_path / "absent.tdnz", tiny_denoiser_config)
        assert info.value.stage == "denoiser"
