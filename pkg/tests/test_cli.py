import json
import subprocess
import sys

import numpy as np
import pytest

from wvae import pnm
from wvae.cli import main
from wvae.formats import load_coefficients
from wvae.wavelet import dwt2d_multi, pyramid_flatten

TINY = ["--synth-n", "8", "--synth-size", "8", "--batch", "4", "--hidden", "16"]


def test_dwt_idwt_roundtrip(tmp_path, rng):
    img = np.round(rng.uniform(size=(3, 8, 8)) * 255) / 255
    pnm.write(tmp_path / "a.ppm", img)
    assert main(["dwt", str(tmp_path / "a.ppm"), str(tmp_path / "a.wvp"), "--levels", "3"]) == 0
    p = load_coefficients(tmp_path / "a.wvp")
    np.testing.assert_allclose(pyramid_flatten(p)[0], pyramid_flatten(dwt2d_multi(img, 3))[0],
                               atol=1e-15)
    assert main(["idwt", str(tmp_path / "a.wvp"), str(tmp_path / "b.ppm")]) == 0
    np.testing.assert_array_equal(pnm.read(tmp_path / "b.ppm"), img)


def test_dwt_shape_error_exit_code(tmp_path):
    pnm.write(tmp_path / "a.pgm", np.zeros((1, 6, 6)))
    assert main(["dwt", str(tmp_path / "a.pgm"), str(tmp_path / "a.wvp"), "--levels", "2"]) == 2


def test_train_and_reconstruct(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["train", "--steps", "3", "--out", str(out), *TINY]) == 0
    final = json.loads(capsys.readouterr().out)
    assert final["type"] == "final"
    assert main(["reconstruct", "--checkpoint", str(out / "checkpoint.wvn"),
                 "--out", str(tmp_path / "rec"), "--count", "2", *TINY]) == 0
    report = json.loads(capsys.readouterr().out)
    assert "ssim" in report
    assert sorted(p.name for p in (tmp_path / "rec").iterdir()) == ["recon_0000.pgm", "recon_0001.pgm"]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("steps=50\nsynth_n=8\nsynth_size=8\nbatch=4\nhidden=8\n")
    out = tmp_path / "run"
    assert main(["train", "--config", str(cfg), "--steps", "2", "--out", str(out)]) == 0
    assert "steps=2" in (out / "config.txt").read_text()


def test_config_error_exit_code(tmp_path):
    assert main(["train", "--levels", "0", "--out", str(tmp_path)]) == 2
    assert main(["train", "--noise", "fixed", "--out", str(tmp_path)]) == 2


def test_bad_cifar_exit_code(tmp_path):
    (tmp_path / "bad.bin").write_bytes(bytes(3074))
    assert main(["train", "--data", f"cifar10:{tmp_path / 'bad.bin'}", "--out", str(tmp_path)]) == 3


def test_missing_data_exit_code(tmp_path):
    assert main(["train", "--data", f"cifar10:{tmp_path / 'none.bin'}", "--out", str(tmp_path)]) == 3


def test_metrics_pairs(tmp_path, capsys, rng):
    a = np.round(rng.uniform(size=(1, 8, 8)) * 255) / 255
    pnm.write(tmp_path / "a.pgm", a)
    pnm.write(tmp_path / "b.pgm", 1 - a)
    assert main(["metrics", str(tmp_path / "a.pgm"), str(tmp_path / "a.pgm"),
                 str(tmp_path / "a.pgm"), str(tmp_path / "b.pgm")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    first, second = (json.loads(l) for l in lines)
    assert first["mse"] == 0.0 and abs(first["ssim"] - 1) <= 1e-9
    assert second["mse"] > 0
    assert main(["metrics", str(tmp_path / "a.pgm")]) == 2


def test_heatmap_from_coefficients(tmp_path):
    z = np.zeros((1, 16, 8))
    pnm.write(tmp_path / "z.pgm", z)
    main(["dwt", str(tmp_path / "z.pgm"), str(tmp_path / "z.wvp"), "--levels", "2"])
    assert main(["heatmap", str(tmp_path / "h.pgm"), "--coeffs", str(tmp_path / "z.wvp")]) == 0
    raw = (tmp_path / "h.pgm").read_bytes()
    assert raw.startswith(b"P5\n8 16\n255\n")
    assert np.all(pnm.read(tmp_path / "h.pgm") == 0)
    assert main(["heatmap", str(tmp_path / "h.pgm")]) == 2


def test_ablate_and_synth(tmp_path, capsys):
    assert main(["ablate", "--steps", "5", "--out", str(tmp_path / "abl"), *TINY]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert set(rep) >= {"fixed", "learnable", "mse_relative_difference"}
    assert main(["synth", "--kind", "edges", "--n", "3", "--size", "8", "--out",
                 str(tmp_path / "s")]) == 0
    assert len(list((tmp_path / "s").iterdir())) == 3


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "wvae", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "train" in out.stdout
