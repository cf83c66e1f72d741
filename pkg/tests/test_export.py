import numpy as np
import pytest
from PIL import Image

from sdmlp.data import DepthMap
from sdmlp.export import (
    write_csv_eval,
    write_csv_losses,
    write_depth_png,
    write_ply,
)
from sdmlp.metrics import EvalRecord, histogram
from sdmlp.numerics import SeededRng
from sdmlp.pipeline import PointCloud, TrainReport


def parse_ply(text):
    lines = text.splitlines()
    assert lines[0] == "ply"
    assert lines[1] == "format ascii 1.0"
    n = int(lines[2].split()[-1])
    header_end = lines.index("end_header")
    body = lines[header_end + 1 :]
    assert len(body) == n
    return lines[: header_end + 1], [line.split() for line in body]


class TestWritePly:
    def test_empty_cloud(self, tmp_path):
        path = tmp_path / "c.ply"
        write_ply(PointCloud(points=np.zeros((0, 3))), path)
        header, body = parse_ply(path.read_text())
        assert "element vertex 0" in header
        assert body == []

    def test_single_colored_point(self, tmp_path):
        path = tmp_path / "c.ply"
        cloud = PointCloud(
            points=np.array([[1.0, 2.0, 3.0]]),
            colors=np.array([[255, 0, 0]], dtype=np.uint8),
        )
        write_ply(cloud, path)
        text = path.read_text()
        assert "property uchar red" in text
        assert text.splitlines()[-1] == "1 2 3 255 0 0"

    def test_round_trip_six_significant_digits(self, tmp_path):
        rng = SeededRng(1)
        points = rng.uniform(-123.0, 456.0, 60).reshape(20, 3)
        path = tmp_path / "c.ply"
        write_ply(PointCloud(points=points), path)
        _, body = parse_ply(path.read_text())
        parsed = np.array([[float(v) for v in row] for row in body])
        assert np.allclose(parsed, points, rtol=1e-5)

    def test_header_count_matches_body(self, tmp_path):
        rng = SeededRng(2)
        points = rng.uniform(0.0, 1.0, 21).reshape(7, 3)
        path = tmp_path / "c.ply"
        write_ply(PointCloud(points=points), path)
        parse_ply(path.read_text())

    def test_uncolored_has_no_color_properties(self, tmp_path):
        path = tmp_path / "c.ply"
        write_ply(PointCloud(points=np.ones((2, 3))), path)
        assert "uchar" not in path.read_text()

    def test_color_count_mismatch(self, tmp_path):
        cloud = PointCloud(
            points=np.ones((3, 3)), colors=np.ones((2, 3), dtype=np.uint8)
        )
        with pytest.raises(ValueError, match="colors"):
            write_ply(cloud, tmp_path / "c.ply")

    def test_deterministic_bytes(self, tmp_path):
        rng = SeededRng(3)
        points = rng.uniform(-1.0, 1.0, 30).reshape(10, 3)
        write_ply(PointCloud(points=points), tmp_path / "a.ply")
        write_ply(PointCloud(points=points), tmp_path / "b.ply")
        assert (tmp_path / "a.ply").read_bytes() == (tmp_path / "b.ply").read_bytes()


class TestWriteCsvLosses:
    def make_report(self, epochs=20):
        rng = SeededRng(4)
        return TrainReport(
            epoch_mse=list(rng.uniform(0.0, 2.0, epochs)),
            epoch_l2=list(rng.uniform(0.0, 0.1, epochs)),
            epoch_wall_ms=list(rng.uniform(1.0, 50.0, epochs)),
        )

    def test_line_count(self, tmp_path):
        path = tmp_path / "losses.csv"
        write_csv_losses(self.make_report(20), path)
        lines = path.read_text().splitlines()
        assert len(lines) == 21
        assert lines[0] == "epoch,mse,l2,wall_ms"
        assert lines[1].startswith("1,")
        assert lines[-1].startswith("20,")

    def test_round_trip_exact(self, tmp_path):
        report = self.make_report(5)
        path = tmp_path / "losses.csv"
        write_csv_losses(report, path)
        rows = [line.split(",") for line in path.read_text().splitlines()[1:]]
        for i, row in enumerate(rows):
            assert float(row[1]) == report.epoch_mse[i]
            assert float(row[2]) == report.epoch_l2[i]

    def test_lf_endings_and_dot_decimal(self, tmp_path):
        path = tmp_path / "losses.csv"
        write_csv_losses(self.make_report(3), path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert b"," in raw


class TestWriteCsvEval:
    def make_records(self):
        return [
            EvalRecord(frame_index=21, rmse=4.0, n_pixels=9),
            EvalRecord(frame_index=20, rmse=2.0, n_pixels=10),
        ]

    def test_mean_row(self, tmp_path):
        records = self.make_records()
        hist = histogram([r.rmse for r in records], 2)
        write_csv_eval(records, hist, tmp_path / "r.csv", tmp_path / "h.csv")
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines[0] == "frame,rmse,n_pixels"
        assert lines[-1] == "mean,3.0,"

    def test_ascending_frame_order(self, tmp_path):
        records = self.make_records()
        hist = histogram([r.rmse for r in records], 2)
        write_csv_eval(records, hist, tmp_path / "r.csv", tmp_path / "h.csv")
        lines = (tmp_path / "r.csv").read_text().splitlines()[1:-1]
        frames = [int(line.split(",")[0]) for line in lines]
        assert frames == sorted(frames) == [20, 21]

    def test_histogram_counts_conserved(self, tmp_path):
        rng = SeededRng(5)
        records = [
            EvalRecord(frame_index=i, rmse=float(v), n_pixels=4)
            for i, v in enumerate(rng.uniform(0.0, 10.0, 23))
        ]
        hist = histogram([r.rmse for r in records], 6)
        write_csv_eval(records, hist, tmp_path / "r.csv", tmp_path / "h.csv")
        lines = (tmp_path / "h.csv").read_text().splitlines()
        assert lines[0] == "bin_lo,bin_hi,count"
        total = sum(int(line.split(",")[2]) for line in lines[1:])
        assert total == 23

    def test_empty_records_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="records"):
            write_csv_eval([], (np.array([0, 1]), np.array([0])),
                           tmp_path / "r.csv", tmp_path / "h.csv")


class TestWriteDepthPng:
    def test_constant_z_mid_gray(self, tmp_path):
        xyz = np.zeros((4, 5, 3))
        xyz[:, :, 2] = 7.25
        depth = DepthMap(xyz=xyz, valid=np.ones((4, 5), dtype=bool))
        path = tmp_path / "z.png"
        write_depth_png(depth, path)
        img = np.asarray(Image.open(path))
        assert img.shape == (4, 5)
        assert (img == 128).all()

    def test_normalization_endpoints(self, tmp_path):
        xyz = np.zeros((1, 3, 3))
        xyz[0, :, 2] = [10.0, 15.0, 20.0]
        depth = DepthMap(xyz=xyz, valid=np.ones((1, 3), dtype=bool))
        path = tmp_path / "z.png"
        write_depth_png(depth, path)
        img = np.asarray(Image.open(path))
        assert img[0, 0] == 0
        assert img[0, 1] == 128
        assert img[0, 2] == 255

    def test_invalid_pixels_black(self, tmp_path):
        xyz = np.zeros((1, 2, 3))
        xyz[0, 0, 2] = 100.0
        xyz[0, 1] = np.nan
        valid = np.array([[True, False]])
        path = tmp_path / "z.png"
        write_depth_png(DepthMap(xyz=xyz, valid=valid), path)
        img = np.asarray(Image.open(path))
        assert img[0, 1] == 0

    def test_all_invalid_rejected(self, tmp_path):
        depth = DepthMap(
            xyz=np.full((2, 2, 3), np.nan), valid=np.zeros((2, 2), dtype=bool)
        )
        with pytest.raises(ValueError, match="valid"):
            write_depth_png(depth, tmp_path / "z.png")
