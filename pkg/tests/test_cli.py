import json

import numpy as np
import pytest
from conftest import write_pair_dataset

from dichotuna.cli import main
from dichotuna.imagecore import read_png, write_png


@pytest.fixture
def files(tmp_path, photo_u8):
    ref = tmp_path / "ref.png"
    write_png(ref, photo_u8)
    assert main(["synth-darken", "--input", str(ref), "--gamma", "2.5",
                 "--output", str(tmp_path / "low.png")]) == 0
    return tmp_path


def test_synth_darken_default_output(files, capsys):
    assert main(["synth-darken", "--input", str(files / "ref.png")]) == 0
    assert (files / "ref_dark.png").exists()
    assert capsys.readouterr().out.strip().endswith("ref_dark.png")


def test_enhance_identity(files, photo_u8):
    out = files / "out.png"
    rc = main(["enhance", "--input", str(files / "ref.png"), "--output", str(out),
               "--method", "tuna", "--params", "1,0,0,0,1,0.5,1"])
    assert rc == 0 and np.array_equal(read_png(out), photo_u8)


def test_enhance_bad_params_exit_code(files, capsys):
    rc = main(["enhance", "--input", str(files / "ref.png"), "--output", str(files / "o.png"),
               "--params", "1,2"])
    assert rc == 2 and "parameters" in capsys.readouterr().err


def test_optimize_writes_json(files):
    cfg = files / "cfg.toml"
    cfg.write_text("population_size = 6\ngenerations = 2\nruns = 1\n")
    rc = main(["optimize", "--low", str(files / "low.png"), "--ref", str(files / "ref.png"),
               "--config", str(cfg), "--method", "dichotomy", "--out", str(files / "r.json"),
               "--output", str(files / "best.png")])
    assert rc == 0
    doc = json.loads((files / "r.json").read_text())
    assert set(doc["params"]) == {"gamma"}
    assert doc["evaluations"] == 6 + 2 * 5
    assert doc["metrics"]["psnr"] > 0 and (files / "best.png").exists()


def test_optimize_flags_override_config(files, capsys):
    cfg = files / "cfg.toml"
    cfg.write_text("population_size = 6\ngenerations = 5\nruns = 1\n")
    rc = main(["optimize", "--low", str(files / "low.png"), "--ref", str(files / "ref.png"),
               "--config", str(cfg), "--method", "dichotomy", "--generations", "1"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["evaluations"] == 6 + 5


def test_metrics(files, capsys):
    assert main(["metrics", "--a", str(files / "low.png"), "--b", str(files / "ref.png")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"psnr", "ssim", "loe", "fitness"}
    assert doc["fitness"] == pytest.approx(doc["psnr"] / 100 + doc["ssim"])


def test_benchmark_exit_codes(tmp_path, photo_u8):
    root = write_pair_dataset(tmp_path / "ds", {"1": photo_u8, "2": photo_u8[::-1].copy()})
    args = ["benchmark", "--dataset", str(root), "--method", "dichotomy",
            "--fixed-params", "0.4", "--report", str(tmp_path / "r.csv"),
            "--markdown", str(tmp_path / "r.md")]
    assert main(args) == 0
    assert (tmp_path / "r.md").exists()
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert len(lines) == 4 and lines[-1].startswith("AGGREGATE,dichotomy,")

    # too small for the SSIM window: a per-image failure, the batch carries on
    write_png(root / "low" / "3.png", photo_u8[:8, :8])
    write_png(root / "high" / "3.png", photo_u8[:8, :8])
    assert main(args) == 1
    assert len((tmp_path / "r.csv").read_text().splitlines()) == 4

    # an unreadable file stops the run before any work: usage error
    (root / "low" / "2.png").write_bytes(b"garbage")
    assert main(args) == 2


def test_missing_input_exit_code(tmp_path, capsys):
    rc = main(["metrics", "--a", str(tmp_path / "x.png"), "--b", str(tmp_path / "y.png")])
    assert rc == 2 and "metrics" in capsys.readouterr().err
