"""End-to-end CLI pipeline tests."""

import json
import os

import numpy as np
import pytest

from pcadense import DepthMap, SceneParams
from pcadense import io_formats as iof
from pcadense.cli import main


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def corpus(workdir):
    params = SceneParams(width=32, height=12, horizon_row=4, box_count=2, noise_std=0.1)
    iof.write_scene_params(params, workdir / "scene.txt")
    assert run("synth", "--params", "scene.txt", "--count", 30, "--out", "train") == 0
    return workdir


@pytest.fixture
def learned(corpus):
    assert run(
        "learn", "--train", "train", "--out", "basis.pcab",
        "--variance", "0.95", "--blur", "3",
    ) == 0
    return corpus


class TestSynth:
    def test_writes_count_scenes(self, corpus):
        assert len(list((corpus / "train").glob("*.pfm"))) == 30

    def test_deterministic_across_runs(self, corpus):
        assert run("synth", "--params", "scene.txt", "--count", 30, "--out", "again") == 0
        for name in sorted(os.listdir(corpus / "train")):
            a = (corpus / "train" / name).read_bytes()
            b = (corpus / "again" / name).read_bytes()
            assert a == b


class TestLearnInfo:
    def test_info_reports_consistent_fraction(self, learned, capsys):
        assert run("info", "--basis", "basis.pcab", "--cumsum-csv", "cumsum.csv") == 0
        out = capsys.readouterr().out
        reported = float(out.split("variance fraction at l=")[1].split(":")[1])
        basis = iof.load_basis(learned / "basis.pcab")
        from pcadense import cumulative_variance_fraction

        expected = cumulative_variance_fraction(
            basis.eigenvalues, basis.total_variance, basis.n_components
        )
        assert reported == pytest.approx(expected, abs=1e-6)
        lines = (learned / "cumsum.csv").read_text().strip().splitlines()
        assert lines[0] == "k,variance_fraction"
        assert len(lines) == basis.n_components + 1

    def test_learn_missing_dir_fails(self, workdir):
        assert run("learn", "--train", "nowhere", "--out", "b.pcab") == 1
        assert not (workdir / "b.pcab").exists()


class TestDensifyBaseline:
    def test_empty_points_gives_mean(self, learned):
        (learned / "empty.csv").write_text("row,col,disparity\n")
        assert run(
            "densify", "--basis", "basis.pcab", "--sparse", "empty.csv",
            "--out", "dense.pfm",
        ) == 0
        basis = iof.load_basis(learned / "basis.pcab")
        dense = iof.read_depth(learned / "dense.pfm")
        np.testing.assert_array_equal(
            dense.vector, basis.mean.astype(np.float32).astype(np.float64)
        )

    def test_sigma_zero_rejected(self, learned, capsys):
        (learned / "p.csv").write_text("row,col,disparity\n1,1,3.0\n")
        code = run(
            "densify", "--basis", "basis.pcab", "--sparse", "p.csv",
            "--sigma-z", "0", "--out", "dense.pfm",
        )
        assert code == 1
        assert "--sigma-z" in capsys.readouterr().err
        assert not (learned / "dense.pfm").exists()

    def test_full_pipeline_with_uncertainty(self, learned):
        ref = iof.read_depth(learned / "train" / "scene_00000.pfm")
        assert run(
            "sample", "--depth", "train/scene_00000.pfm", "--strategy", "random",
            "--k", 20, "--seed", 9, "--out", "points.csv",
        ) == 0
        assert run(
            "densify", "--basis", "basis.pcab", "--sparse", "points.csv",
            "--out", "dense.pfm", "--uncertainty-out", "unc.pfm",
        ) == 0
        unc = iof.read_depth(learned / "unc.pfm")
        assert unc.fully_valid()
        assert np.all(unc.values >= 0)
        dense = iof.read_depth(learned / "dense.pfm")
        assert (dense.width, dense.height) == (ref.width, ref.height)

    def test_baseline(self, learned):
        (learned / "p.csv").write_text("row,col,disparity\n5,5,7.0\n")
        assert run(
            "baseline", "--sparse", "p.csv", "--width", 32, "--height", 12,
            "--out", "nn.pfm",
        ) == 0
        nn = iof.read_depth(learned / "nn.pfm")
        assert np.all(nn.values == 7.0)


class TestEvaluateCompare:
    @pytest.fixture
    def evaluated(self, learned):
        iof.write_camera(
            __import__("pcadense").CameraModel(
                fx=40.0, fy=40.0, cx=16.0, cy=6.0, baseline=0.5, focal=40.0
            ),
            learned / "cam.txt",
        )
        iof.write_pose(
            __import__("pcadense").RigidTransform(
                np.eye(3), np.array([-0.5, 0.0, 0.0])
            ),
            learned / "pose.txt",
        )
        run("sample", "--depth", "train/scene_00001.pfm", "--strategy", "random",
            "--k", 25, "--seed", 3, "--out", "points.csv")
        run("densify", "--basis", "basis.pcab", "--sparse", "points.csv",
            "--out", "dense.pfm", "--uncertainty-out", "unc.pfm")
        run("baseline", "--sparse", "points.csv", "--width", 32, "--height", 12,
            "--out", "nn.pfm")
        return learned

    def test_evaluate_and_compare(self, evaluated, capsys):
        assert run(
            "evaluate", "--recon", "dense.pfm", "--uncertainty", "unc.pfm",
            "--reference", "train/scene_00001.pfm", "--camera", "cam.txt",
            "--pose", "pose.txt", "--report", "pca.json",
            "--per-point", "pca_points.csv",
        ) == 0
        assert run(
            "evaluate", "--recon", "nn.pfm",
            "--reference", "train/scene_00001.pfm", "--camera", "cam.txt",
            "--pose", "pose.txt", "--report", "nn.json",
        ) == 0
        report = json.loads((evaluated / "pca.json").read_text())
        assert report["n_points"] > 0
        assert report["hist_2d_by_uncertainty"] is not None
        lines = (evaluated / "pca_points.csv").read_text().strip().splitlines()
        assert lines[0] == "row,col,delta2d,delta3d,uncertainty,ref_depth"
        assert len(lines) == report["n_points"] + 1
        capsys.readouterr()
        assert run("compare", "--report-a", "pca.json", "--report-b", "nn.json") == 0
        out = capsys.readouterr().out
        assert "mean d2d" in out


class TestExitCodes:
    def test_unknown_flag(self, workdir, capsys):
        assert run("densify", "--bogus") == 1

    def test_missing_file_is_io_error(self, workdir):
        assert run("info", "--basis", "missing.pcab") == 2

    def test_corrupt_basis_is_io_error(self, workdir):
        (workdir / "bad.pcab").write_bytes(b"JUNKJUNK")
        assert run("info", "--basis", "bad.pcab") == 2
