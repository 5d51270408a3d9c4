import numpy as np
import pytest

from common.errors import ArgumentError, DegenerateInputError, DimensionError, ParseError, StateError
from tests import oracles
from topface.metrics import (
    METRIC_COLUMNS,
    EvalSample,
    SpatialGridIndex,
    TriangleMesh,
    accuracy,
    accuracy_by_level,
    chamfer,
    evaluate_pipeline,
    identity_denoiser,
    load_off,
    noisy_copy,
    point_to_mesh,
    read_metric_csv,
    save_off,
    write_metric_report,
    write_training_log,
)
from topface.metrics.report_io import DENOISER_LOG_COLUMNS
from topface.recognizer import RecognizerNet
from topface.schemas import Setting


def random_mesh(rng, n_vertices=12, n_faces=10):
    vertices = rng.uniform(-20, 20, size=(n_vertices, 3))
    faces = np.array([rng.choice(n_vertices, size=3, replace=False) for _ in range(n_faces)])
    return TriangleMesh(vertices=vertices, faces=faces)


@pytest.fixture
def floor_mesh():
    """Two triangles covering the z = 0 square of side 200."""
    vertices = [[-100, -100, 0], [100, -100, 0], [100, 100, 0], [-100, 100, 0]]
    return TriangleMesh(vertices=vertices, faces=[[0, 1, 2], [0, 2, 3]])


# =============================================================================
# Geometry
# =============================================================================


class TestGridIndex:
    def test_nearest_matches_brute_force(self, rng):
        for _ in range(100):
            points = rng.uniform(-50, 50, size=(200, 3))
            queries = rng.uniform(-80, 80, size=(50, 3))
            d2, idx = SpatialGridIndex(points, cell_size=float(rng.uniform(2, 30))).nearest(queries)
            brute = ((queries[:, None] - points[None]) ** 2).sum(axis=-1)
            np.testing.assert_array_equal(idx, brute.argmin(axis=1))
            np.testing.assert_array_equal(d2, brute.min(axis=1))

    def test_ties_go_to_lower_index(self):
        points = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
        _, idx = SpatialGridIndex(points).nearest(np.zeros((1, 3)))
        assert idx[0] == 0

    def test_empty_index(self):
        with pytest.raises(ArgumentError):
            SpatialGridIndex(np.zeros((0, 3)))


class TestChamfer:
    def test_matches_reference(self, rng):
        for _ in range(100):
            a = rng.normal(size=(int(rng.integers(1, 60)), 3)) * 10
            b = rng.normal(size=(int(rng.integers(1, 60)), 3)) * 10
            assert chamfer(a, b) == pytest.approx(oracles.chamfer(a, b), rel=1e-12)

    def test_identical_clouds(self, cloud):
        assert chamfer(cloud, cloud) == 0.0

    def test_symmetric(self, rng):
        a, b = rng.normal(size=(30, 3)), rng.normal(size=(40, 3))
        assert chamfer(a, b) == pytest.approx(chamfer(b, a), rel=1e-12)

    def test_single_points_one_unit_apart(self):
        assert chamfer(np.zeros((1, 3)), np.array([[1.0, 0.0, 0.0]])) == 2.0

    def test_empty_cloud_rejected(self):
        with pytest.raises(ArgumentError):
            chamfer(np.zeros((0, 3)), np.zeros((1, 3)))


class TestPointToMesh:
    def test_matches_reference(self, rng):
        for _ in range(100):
            mesh = random_mesh(rng)
            points = rng.uniform(-30, 30, size=(20, 3))
            expected = oracles.point_to_mesh(points, mesh.vertices, mesh.faces)
            assert point_to_mesh(points, mesh) == pytest.approx(expected, rel=1e-10, abs=1e-10)

    def test_invariant_under_rigid_motion(self, rng):
        for _ in range(10):
            mesh = random_mesh(rng)
            points = rng.uniform(-30, 30, size=(40, 3))
            rotation, _ = np.linalg.qr(rng.normal(size=(3, 3)))
            shift = rng.uniform(-100, 100, size=3)
            moved = TriangleMesh(vertices=mesh.vertices @ rotation.T + shift, faces=mesh.faces)
            expected = point_to_mesh(points, mesh)
            assert point_to_mesh(points @ rotation.T + shift, moved) == pytest.approx(expected, abs=1e-9)

    def test_distance_to_a_plane(self, floor_mesh, rng):
        points = np.column_stack([rng.uniform(-90, 90, size=(50, 2)), rng.normal(size=50)])
        assert point_to_mesh(points, floor_mesh) == pytest.approx(np.abs(points[:, 2]).mean(), abs=1e-12)

    def test_unit_triangle_face_and_vertex_regions(self):
        mesh = TriangleMesh(vertices=[[0, 0, 0], [1, 0, 0], [0, 1, 0]], faces=[[0, 1, 2]])
        assert point_to_mesh(np.array([[0.0, 0.0, 1.0]]), mesh) == pytest.approx(1.0)
        assert point_to_mesh(np.array([[2.0, 0.0, 0.0]]), mesh) == pytest.approx(1.0)

    def test_points_beyond_the_edge(self, floor_mesh):
        assert point_to_mesh(np.array([[103.0, 0.0, 4.0]]), floor_mesh) == pytest.approx(5.0)

    def test_degenerate_face_rejected(self):
        with pytest.raises(DegenerateInputError):
            TriangleMesh(vertices=[[0, 0, 0], [1, 0, 0], [2, 0, 0]], faces=[[0, 1, 2]])


class TestOffIO:
    def test_round_trip(self, rng, tmp_path):
        mesh = random_mesh(rng)
        path = tmp_path / "m.off"
        save_off(mesh, path)
        back = load_off(path)
        np.testing.assert_array_equal(back.vertices, mesh.vertices)
        np.testing.assert_array_equal(back.faces, mesh.faces)

    def test_comments_and_split_header(self, tmp_path):
        path = tmp_path / "m.off"
        path.write_text("OFF\n# counts follow\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
        assert load_off(path).n_faces == 1

    def test_bad_header(self, tmp_path):
        path = tmp_path / "m.off"
        path.write_text("PLY\n")
        with pytest.raises(ParseError):
            load_off(path)

    def test_quad_face(self, tmp_path):
        path = tmp_path / "m.off"
        path.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
        with pytest.raises(ParseError) as info:
            load_off(path)
        assert info.value.line == 7

    def test_truncated(self, tmp_path):
        path = tmp_path / "m.off"
        path.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n")
        with pytest.raises(ParseError):
            load_off(path)

    def test_face_index_out_of_range(self, tmp_path):
        path = tmp_path / "m.off"
        path.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n")
        with pytest.raises(ParseError):
            load_off(path)


class TestAccuracy:
    def test_fraction(self):
        assert accuracy([0, 1, 2, 2], [0, 1, 1, 2]) == 0.75

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            accuracy([0, 1], [0])

    def test_empty(self):
        with pytest.raises(ArgumentError):
            accuracy([], [])


# =============================================================================
# Evaluation runs and reports
# =============================================================================


@pytest.fixture
def eval_samples(make_blobs, floor_mesh):
    return [EvalSample(clean=pc, mesh=floor_mesh, sample_index=i) for i, pc in enumerate(make_blobs())]


@pytest.fixture
def recognizer(tiny_recognizer_config):
    net = RecognizerNet(2, tiny_recognizer_config)
    net.eval()
    return net


class TestEvaluation:
    def test_identity_denoiser_report(self, eval_samples, recognizer):
        report = evaluate_pipeline(
            eval_samples, identity_denoiser, recognizer, [16, 0, 4], seed=0, point_budget=48, setting=Setting.RANDOM
        )
        assert [row.sigma2 for row in report.levels] == [0.0, 4.0, 16.0]
        for row in report.levels:
            assert row.gain == 0.0
            assert row.cd == row.noisy_cd and row.p2m == row.noisy_p2m
        clean = report.levels[0]
        assert clean.cd == 0.0
        assert report.levels[2].cd > report.levels[1].cd > 0.0
        assert report.max_gain == 0.0

    def test_noisy_copy_is_seeded_per_sample(self, eval_samples):
        a = noisy_copy(eval_samples[0], 4.0, seed=0)
        assert np.array_equal(a.points, noisy_copy(eval_samples[0], 4.0, seed=0).points)
        assert not np.array_equal(a.points, noisy_copy(eval_samples[0], 4.0, seed=1).points)
        assert a.identity == eval_samples[0].label

    def test_workers_do_not_change_results(self, eval_samples, recognizer):
        serial = accuracy_by_level(eval_samples, identity_denoiser, recognizer, [4, 8], point_budget=48)
        threaded = accuracy_by_level(eval_samples, identity_denoiser, recognizer, [4, 8], point_budget=48, workers=4)
        assert serial == threaded

    def test_missing_models(self, eval_samples, recognizer):
        with pytest.raises(StateError):
            evaluate_pipeline(eval_samples, None, recognizer, [4])
        with pytest.raises(StateError):
            evaluate_pipeline(eval_samples, identity_denoiser, None, [4])

    def test_bad_levels(self, eval_samples, recognizer):
        with pytest.raises(ArgumentError):
            evaluate_pipeline(eval_samples, identity_denoiser, recognizer, [])
        with pytest.raises(ArgumentError):
            evaluate_pipeline(eval_samples, identity_denoiser, recognizer, [-1.0])


class TestReports:
    def test_metric_csv_layout(self, eval_samples, recognizer, tmp_path):
        report = evaluate_pipeline(eval_samples, identity_denoiser, recognizer, [8, 4], point_budget=48)
        csv_path, json_path = tmp_path / "eval.csv", tmp_path / "eval.json"
        write_metric_report(report, csv_path, json_path)
        header = csv_path.read_text().splitlines()[0]
        assert header == ",".join(METRIC_COLUMNS)
        assert header == "sigma2,noisy_accuracy,accuracy,gain,cd,p2m,noisy_cd,noisy_p2m"
        frame = read_metric_csv(csv_path)
        assert frame["sigma2"].tolist() == [4.0, 8.0]
        assert json_path.read_text().endswith("}\n")

    def test_training_log_keeps_nan_cells(self, tmp_path):
        rows = [
            dict(epoch=0, l_d=float("nan"), l_v=float("nan"), l_r=float("nan"), generator_loss=float("nan"), recon=1.5, holdout_recon=2.0),
            dict(epoch=1, l_d=0.5, l_v=0.4, l_r=0.6, generator_loss=3.0, recon=1.0, holdout_recon=1.25),
        ]
        path = tmp_path / "log.csv"
        write_training_log(rows, DENOISER_LOG_COLUMNS, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,l_d,l_v,l_r,generator_loss,recon,holdout_recon"
        assert lines[1] == "0,,,,,1.5,2"
