import numpy as np
import pytest

from common.errors import ArgumentError, DegenerateInputError, DimensionError, ParseError
from topface.pointcloud import (
    ExpressionTag,
    NoiseSpec,
    PointCloud,
    add_gaussian_noise,
    denormalize,
    derive_seed,
    level_key,
    load_xyz,
    normalize_unit_box,
    save_xyz,
    standard_normals,
    uniform_stream,
)


class TestPointCloud:
    def test_points_are_read_only(self, cloud):
        with pytest.raises(ValueError):
            cloud.points[0, 0] = 1.0

    def test_rejects_bad_shape(self):
        with pytest.raises(DimensionError):
            PointCloud(points=np.zeros((4, 2)))

    def test_rejects_empty_and_non_finite(self):
        with pytest.raises(ArgumentError):
            PointCloud(points=np.zeros((0, 3)))
        with pytest.raises(ArgumentError):
            PointCloud(points=np.array([[0.0, np.nan, 1.0]]))

    def test_subset_keeps_labels(self, cloud):
        tagged = PointCloud(points=cloud.points, identity=3, expression_tag="neutral")
        sub = tagged.subset([0, 5])
        assert sub.n_points == 2
        assert sub.identity == 3 and sub.expression_tag is ExpressionTag.NEUTRAL


class TestNoise:
    def test_same_seed_same_noise(self, cloud):
        spec = NoiseSpec(variance=4.0, seed=17)
        a = add_gaussian_noise(cloud, spec)
        b = add_gaussian_noise(cloud, spec)
        np.testing.assert_array_equal(a.points, b.points)

    def test_different_seed_different_noise(self, cloud):
        a = add_gaussian_noise(cloud, NoiseSpec(variance=4.0, seed=1))
        b = add_gaussian_noise(cloud, NoiseSpec(variance=4.0, seed=2))
        assert not np.array_equal(a.points, b.points)

    def test_zero_variance_is_an_exact_copy(self, cloud):
        out = add_gaussian_noise(cloud, NoiseSpec(variance=0.0, seed=5))
        np.testing.assert_array_equal(out.points, cloud.points)

    def test_value_depends_only_on_point_and_axis(self):
        short = standard_normals(9, 10)
        long = standard_normals(9, 100)
        np.testing.assert_array_equal(short, long[:10])

    def test_box_muller_over_the_stream(self):
        u = uniform_stream(3, 6)
        expected = np.sqrt(-2.0 * np.log(1.0 - u[0])) * np.cos(2.0 * np.pi * u[1])
        assert standard_normals(3, 1)[0, 0] == expected

    def test_sample_variance(self):
        z = standard_normals(0, 20000)
        assert abs(z.mean()) < 0.02
        assert z.var() == pytest.approx(1.0, abs=0.03)

    def test_centroid_barely_moves(self):
        pc = PointCloud(points=np.zeros((100_000, 3)))
        noisy = add_gaussian_noise(pc, NoiseSpec(variance=64.0, seed=42))
        sigma = 8.0
        assert abs(noisy.points.mean()) < 3 * sigma / np.sqrt(3 * 100_000)
        assert noisy.points.var() == pytest.approx(64.0, rel=0.03)

    def test_negative_variance_rejected(self):
        with pytest.raises(ArgumentError):
            NoiseSpec(variance=-1.0, seed=0)

    def test_derive_seed_is_a_pure_function(self):
        assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
        assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)
        assert 0 <= derive_seed(42) < 2**64

    def test_level_key(self):
        assert level_key(4) == 4000
        assert level_key(0.5) == 500


class TestNormalize:
    def test_longest_edge_becomes_extent(self, rng):
        pc = PointCloud(points=rng.uniform(0, [10, 20, 5], size=(50, 3)) + 7.0)
        out, record = normalize_unit_box(pc)
        edges = out.points.max(axis=0) - out.points.min(axis=0)
        assert edges.max() == pytest.approx(100.0)
        np.testing.assert_allclose(out.points.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(denormalize(out, record).points, pc.points, atol=1e-12)

    def test_coincident_points_rejected(self):
        with pytest.raises(DegenerateInputError):
            normalize_unit_box(PointCloud(points=np.ones((3, 3))))


class TestXyzIO:
    def test_round_trip_is_exact(self, cloud, tmp_path):
        tagged = PointCloud(points=cloud.points / 3.0, identity=4, expression_tag=ExpressionTag.NON_NEUTRAL)
        path = tmp_path / "c.xyz"
        save_xyz(tagged, path)
        back = load_xyz(path)
        np.testing.assert_array_equal(back.points, tagged.points)
        assert back.identity == 4 and back.expression_tag is ExpressionTag.NON_NEUTRAL

    def test_headerless_file(self, tmp_path):
        path = tmp_path / "plain.xyz"
        path.write_text("1 2 3\n\n4 5 6\n")
        pc = load_xyz(path)
        assert pc.n_points == 2 and pc.identity is None

    def test_wrong_field_count_reports_line(self, tmp_path):
        path = tmp_path / "bad.xyz"
        path.write_text("1 2 3\n4 5\n")
        with pytest.raises(ParseError) as info:
            load_xyz(path)
        assert info.value.line == 2
        assert ":2:" in str(info.value)

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "bad.xyz"
        path.write_text("1 2 z\n")
        with pytest.raises(ParseError):
            load_xyz(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.xyz"
        path.write_text("# identity=1\n")
        with pytest.raises(ParseError):
            load_xyz(path)
