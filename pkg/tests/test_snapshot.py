import numpy as np
import pytest

from bardina.core.errors import FieldError, GridMismatchError
from bardina.models.grid import GridSpec
from bardina.services.bardina import iterate_truth
from bardina.services.snapshot_service import INDEX_COLUMNS, SnapshotService
from bardina.services.spectral import low_mode_project
from tests.conftest import TWO_PI, random_field


class TestFieldFiles:
    def test_write_and_read(self, tmp_path, grid8):
        field = random_field(grid8, 1)
        path = SnapshotService.write_field(tmp_path / "u.brdf", field)
        restored = SnapshotService.read_field(path, grid8)
        np.testing.assert_array_equal(restored.coeffs, field.coeffs)
        assert restored.divergence_free and restored.dealiased
        assert SnapshotService.read_field(path).grid == grid8

    def test_bad_magic(self, tmp_path, grid8):
        path = SnapshotService.write_field(tmp_path / "u.brdf", random_field(grid8, 2))
        data = bytearray(path.read_bytes())
        data[:5] = b"XXXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(FieldError):
            SnapshotService.read_field(path, grid8)

    def test_truncated(self, tmp_path, grid8):
        path = SnapshotService.write_field(tmp_path / "u.brdf", random_field(grid8, 3))
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(FieldError):
            SnapshotService.read_field(path, grid8)

    def test_grid_mismatch(self, tmp_path, grid8, grid16):
        path = SnapshotService.write_field(tmp_path / "u.brdf", random_field(grid8, 4))
        with pytest.raises(GridMismatchError):
            SnapshotService.read_field(path, grid16)
        with pytest.raises(GridMismatchError):
            SnapshotService.read_field(path, GridSpec(L=1.0, n_grid=8))


class TestTrajectoryDump:
    def test_dump_and_stream(self, tmp_path, grid8, steady_params):
        u0 = random_field(grid8, 5, norm=0.5)
        nodes = [(t, u, u_t) for _, t, u, u_t in iterate_truth(u0, 0.05, 4, steady_params)]
        index = SnapshotService.dump_trajectory(tmp_path / "truth", iter(nodes))
        assert list(index.columns) == INDEX_COLUMNS
        assert len(SnapshotService.read_index(tmp_path / "truth")) == 5

        stream, _ = SnapshotService.stream_from_dump(tmp_path / "truth", grid8, 3)
        assert len(stream) == 5
        assert stream.dt == pytest.approx(0.05, rel=1e-12)
        for i, (_, u, u_t) in enumerate(nodes):
            np.testing.assert_allclose(stream.obs_u(i).coeffs, low_mode_project(u, 3).coeffs, rtol=0, atol=1e-14)
            np.testing.assert_allclose(stream.obs_ut(i).coeffs, low_mode_project(u_t, 3).coeffs, rtol=0, atol=1e-14)

    def test_missing_index(self, tmp_path, grid8):
        with pytest.raises(FieldError):
            SnapshotService.stream_from_dump(tmp_path, grid8, 3)

    def test_single_snapshot(self, tmp_path, grid8):
        u = random_field(grid8, 6)
        SnapshotService.dump_trajectory(tmp_path / "truth", [(0.0, u, u)])
        with pytest.raises(FieldError):
            SnapshotService.stream_from_dump(tmp_path / "truth", grid8, 3)

    def test_dump_uses_box_length(self, tmp_path):
        grid = GridSpec(L=TWO_PI, n_grid=8)
        u = random_field(grid, 7)
        SnapshotService.dump_trajectory(tmp_path / "truth", [(0.0, u, u), (0.1, u, u)])
        times = [t for t, _, _ in SnapshotService.iter_dump(tmp_path / "truth", grid)]
        assert times == [0.0, 0.1]
