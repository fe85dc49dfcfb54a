import csv
import json

import numpy as np
import pytest

from ssinr.harness import cli
from ssinr.harness.config import DEFAULTS, merge, resolve
from ssinr.harness.sweep import SweepSpec
from ssinr.metrics import aggregate_trials
from ssinr.signals import load_image, write_wav

FAST = ["--width", "16", "--hidden-layers", "1"]


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def fit(out, *extra):
    argv = ["fit", "--input", "gradient64.png", "--backbone", "siren", "--input-transform", "scale:5",
            "--output-transform", "adaptive-shift", "--epochs", "50", "--seed", "1", "--crop", "24",
            "--out-dir", str(out), *FAST, *extra]
    return cli.main(argv)


class TestFit:
    def test_metrics_rows(self, tmp_path):
        assert fit(tmp_path / "a") == 0
        rows = read_rows(tmp_path / "a" / "metrics.csv")
        epochs = [int(r["epoch"]) for r in rows]
        assert epochs == list(range(50)) + [-1]
        assert rows[49]["ssim"] != "" and rows[0]["ssim"] == ""
        for name in ("run.json", "reconstruction.png", "checkpoint.ssir"):
            assert (tmp_path / "a" / name).exists()
        echo = json.loads((tmp_path / "a" / "run.json").read_text())
        assert echo["config"]["input_transform"] == "scale:5"
        assert echo["beta"] == pytest.approx(load_image("gradient64.png", crop=24).targets.mean(), rel=1e-12)

    def test_byte_identical_rerun(self, tmp_path):
        assert fit(tmp_path / "a") == 0
        assert fit(tmp_path / "b") == 0
        for name in ("metrics.csv", "checkpoint.ssir", "run.json", "reconstruction.png"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_config_file_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"epochs": 3, "width": 8, "input": "gradient64.png", "crop": 16}))
        assert cli.main(["fit", "--config", str(cfg), "--epochs", "4", "--out-dir", str(tmp_path / "o")]) == 0
        assert len(read_rows(tmp_path / "o" / "metrics.csv")) == 5

    def test_out_root_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SSINR_OUT", str(tmp_path / "root"))
        assert cli.main(["fit", "--input", "gradient64.png", "--crop", "16", "--epochs", "2", *FAST]) == 0
        assert (tmp_path / "root" / "fit" / "metrics.csv").exists()

    @pytest.mark.parametrize("argv", [
        ["fit", "--input", "missing.png"],
        ["fit", "--input-transform", "twist:3"],
        ["fit", "--backbone", "tanh"],
        ["fit", "--batch", "many"],
    ])
    def test_config_errors_exit_2(self, argv, capsys):
        assert cli.main(argv) == 2
        assert "error:" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"epoch": 3}))
        assert cli.main(["fit", "--config", str(cfg)]) == 2

    def test_numeric_abort_exit_3(self, tmp_path, capsys):
        code = cli.main(["fit", "--input", "gradient64.png", "--crop", "16", "--learning-rate", "1e9",
                         "--epochs", "20", "--out-dir", str(tmp_path), *FAST])
        assert code == 3
        assert "numeric abort" in capsys.readouterr().err


class TestConfig:
    def test_ss_default_scales(self):
        for backbone, scale in (("relu_pe", "0.3"), ("siren", "5"), ("finer", "2")):
            cfg = resolve(merge({"backbone": backbone, "input_transform": "ss-default"}))
            assert cfg["input_transform"] == f"scale:{scale}"

    def test_audio_inferred(self):
        assert resolve(merge({"input": "chord.wav"}))["signal"] == "audio"

    def test_defaults_complete(self):
        assert set(merge()) == set(DEFAULTS)


class TestSweep:
    def spec(self, tmp_path, axes, seeds=2):
        doc = {"base": {"epochs": 6, "width": 8, "hidden_layers": 1, "input": "gradient64.png", "crop": 16,
                        "ssim_every": 3}, "axes": axes, "seeds": seeds}
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(doc))
        return path

    def test_aggregates_match_cell_runs(self, tmp_path):
        path = self.spec(tmp_path, [{"name": "input_transform", "values": ["identity", "scale:5"]}])
        assert cli.main(["sweep", str(path), "--out", str(tmp_path / "sw"), "--jobs", "1"]) == 0
        rows = read_rows(tmp_path / "sw" / "sweep.csv")
        assert [r["input_transform"] for r in rows] == ["identity", "scale:5"]
        for ci, row in enumerate(rows):
            finals = [read_rows(tmp_path / "sw" / f"cell_{ci:03d}" / f"seed_{k}" / "metrics.csv")[-1]
                      for k in range(2)]
            for key in ("psnr", "mse", "ssim"):
                st = aggregate_trials(float(f[key]) for f in finals)
                assert float(row[f"{key}_mean"]) == st.mean
                assert float(row[f"{key}_std"]) == st.std

    def test_parallel_matches_serial(self, tmp_path):
        path = self.spec(tmp_path, [{"name": "width", "values": [4, 8]}], seeds=1)
        assert cli.main(["sweep", str(path), "--out", str(tmp_path / "s1"), "--jobs", "1"]) == 0
        assert cli.main(["sweep", str(path), "--out", str(tmp_path / "s2"), "--jobs", "2"]) == 0
        assert (tmp_path / "s1" / "sweep.csv").read_bytes() == (tmp_path / "s2" / "sweep.csv").read_bytes()

    def test_failed_cell_is_recorded(self, tmp_path):
        path = self.spec(tmp_path, [{"name": "output_transform", "values": ["identity", "kernel:bogus"]}], seeds=1)
        assert cli.main(["sweep", str(path), "--out", str(tmp_path / "sw")]) == 0
        rows = read_rows(tmp_path / "sw" / "sweep.csv")
        assert rows[0]["status"] == "ok" and rows[1]["status"].startswith("failed")

    def test_empty_axis_exit_2(self, tmp_path):
        path = self.spec(tmp_path, [{"name": "width", "values": []}])
        assert cli.main(["sweep", str(path)]) == 2

    def test_too_many_axes(self, tmp_path):
        axes = [{"name": n, "values": [1]} for n in ("width", "epochs", "seed")]
        assert cli.main(["sweep", str(self.spec(tmp_path, axes))]) == 2

    def test_cells_order(self):
        spec = SweepSpec.from_dict({"axes": [{"name": "width", "values": [1, 2]},
                                             {"name": "epochs", "values": [3, 4]}]})
        assert spec.cells() == [{"width": 1, "epochs": 3}, {"width": 1, "epochs": 4},
                                {"width": 2, "epochs": 3}, {"width": 2, "epochs": 4}]


class TestTable:
    def test_depth_parameters(self, tmp_path, capsys):
        out = tmp_path / "t10.csv"
        assert cli.main(["table", "t10_depth", "--epochs", "2", "--width", "8", "--crop", "16",
                         "--out", str(out)]) == 0
        rows = read_rows(out)
        assert [int(r["parameters"]) for r in rows[:4]] == [133123, 198915, 264707, 330499]
        assert [int(r["layers"]) for r in rows] == [4, 5, 6, 7, 7]
        assert "parameters" in capsys.readouterr().out

    def test_unknown_table_exit_2(self):
        assert cli.main(["table", "t99_nothing"]) == 2

    def test_dataset_dir(self, tmp_path):
        from ssinr.signals import FIXTURES

        d = tmp_path / "imgs"
        d.mkdir()
        for name in ("natural64.png", "gradient64.png"):
            (d / name).write_bytes((FIXTURES / name).read_bytes())
        out = tmp_path / "t5.csv"
        assert cli.main(["table", "t5_adaptive", "--dataset-dir", str(d), "--epochs", "2", "--width", "8",
                         "--crop", "16", "--out", str(out)]) == 0
        rows = read_rows(out)
        assert [r["method"] for r in rows] == ["baseline", "shift (fixed -0.2)", "shift (adaptive)"]
        assert all(r["images"] == "2" for r in rows)

    def test_empty_dataset_dir(self, tmp_path):
        assert cli.main(["table", "t6_ss", "--dataset-dir", str(tmp_path)]) == 2


class TestAudio:
    def test_single_trial_std_zero(self, tmp_path):
        out = tmp_path / "a.csv"
        assert cli.main(["audio", "--trials", "1", "--epochs", "3", "--width", "8", "--max-seconds", "0.05",
                         "--out", str(out)]) == 0
        rows = read_rows(out)
        assert [r["method"] for r in rows] == ["vanilla", "ss-siren"]
        assert all(float(r["mse_std"]) == 0.0 for r in rows)

    def test_stereo_exit_2(self, tmp_path):
        import wave

        path = tmp_path / "st.wav"
        with wave.open(str(path), "wb") as wf:
            wf.setnchannels(2)
            wf.setsampwidth(2)
            wf.setframerate(8000)
            wf.writeframes(b"\x00" * 400)
        assert cli.main(["audio", "--input", str(path), "--trials", "1", "--epochs", "1"]) == 2

    def test_fit_audio_writes_wav(self, tmp_path):
        path = tmp_path / "tone.wav"
        write_wav(path, (8000 * np.sin(np.linspace(0, 20, 400))).astype(np.int16), 8000)
        assert cli.main(["fit", "--input", str(path), "--epochs", "3", "--out-dir", str(tmp_path / "o"),
                         *FAST]) == 0
        assert (tmp_path / "o" / "reconstruction.wav").exists()
        rows = read_rows(tmp_path / "o" / "metrics.csv")
        assert rows[-1]["ssim"] == ""


class TestGradcheck:
    def test_fault_injection_names_siren(self, capsys):
        assert cli.main(["gradcheck", "--inject-fault", "siren"]) == 1
        err = capsys.readouterr().err
        assert "siren / in=identity / out=identity" in err
        assert "relu_pe" not in err

    def test_exit_code_tracks_failures(self, capsys):
        code = cli.main(["gradcheck"])
        out = capsys.readouterr().out
        failed = [line for line in out.splitlines() if line.startswith("FAIL")]
        assert code == (1 if failed else 0)
        assert out.count("\n") == 28


class TestReport:
    def test_merges_csvs(self, tmp_path):
        (tmp_path / "sub").mkdir()
        (tmp_path / "a.csv").write_text("x,y\n1,2\n")
        (tmp_path / "sub" / "b.csv").write_text("m\n3\n")
        assert cli.main(["report", str(tmp_path)]) == 0
        text = (tmp_path / "summary.md").read_text()
        assert "## a.csv" in text and "## sub/b.csv" in text
        assert "| 1 | 2 |" in text
        assert cli.main(["report", str(tmp_path)]) == 0  # rerun ignores its own output
        assert (tmp_path / "summary.md").read_text() == text


def test_run_audio_defaults_to_chord_fixture():
    from ssinr.harness.audio import run_audio

    rows = run_audio({"epochs": 1, "width": 8, "max_seconds": 0.05}, trials=1)
    assert [r["method"] for r in rows] == ["vanilla", "ss-siren"]
