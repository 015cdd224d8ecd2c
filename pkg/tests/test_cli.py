import json
import subprocess
import sys

import numpy as np
import pytest

from vlmd.cli import main
from vlmd.io import read_csv, write_csv


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert run("synth", "--scenario", "A", "--noise", 0.01, "--seed", 7, "--out", out) == 0
    return out


@pytest.fixture(scope="module")
def run_dir(synth_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    code = run("decompose", synth_dir / "data.csv", "--latents", 3, "--modes", 5, "--alpha", 45,
               "--lambda", 100, "--sample-rate", 256, "--out", out)
    assert code == 0
    return out


def test_synth_outputs(synth_dir):
    X, header = read_csv(synth_dir / "data.csv")
    assert X.shape == (2048, 5) and header == [f"ch{i}" for i in range(1, 6)]
    for name in ("clean.csv", "coefficients_true.csv", "freqs_true.csv", "modes_true_k5.csv",
                 "latent_modes_true_k1.csv", "spec.txt", "manifest.json"):
        assert (synth_dir / name).exists()
    manifest = json.loads((synth_dir / "manifest.json").read_text())
    assert manifest["command"] == "synth" and manifest["seed"] == 7


def test_synth_deterministic(synth_dir, tmp_path):
    run("synth", "--scenario", "A", "--noise", 0.01, "--seed", 7, "--out", tmp_path)
    assert (tmp_path / "data.csv").read_bytes() == (synth_dir / "data.csv").read_bytes()


def test_synth_from_spec_file(tmp_path):
    spec = tmp_path / "spec.txt"
    spec.write_text("n_channels = 4\nn_latents = 2\nsparsity = 0.5\nn_modes = 1\n"
                    "freqs_hz = 10\nduration_s = 1\n")
    assert run("synth", "--spec", spec, "--out", tmp_path / "o") == 0
    assert read_csv(tmp_path / "o" / "data.csv")[0].shape == (256, 4)
    spec.write_text("n_channels = 4\nbogus = 1\n")
    assert run("synth", "--spec", spec, "--out", tmp_path / "p") == 2


def test_synth_scenario_c_width(tmp_path):
    assert run("synth", "--scenario", "C", "--out", tmp_path) == 0
    assert read_csv(tmp_path / "data.csv")[0].shape[1] == 100


def test_synth_negative_noise_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        run("synth", "--scenario", "A", "--noise", -1, "--out", tmp_path)
    assert info.value.code == 2


def test_decompose_outputs(run_dir):
    for k in range(1, 6):
        U, header = read_csv(run_dir / f"modes_k{k}.csv")
        assert U.shape == (2048, 5) and header[0] == "ch1"
    assert read_csv(run_dir / "latents.csv")[0].shape == (2048, 3)
    assert read_csv(run_dir / "coefficients.csv")[0].shape == (3, 5)
    freqs, header = read_csv(run_dir / "frequencies.csv", allow_nonfinite=True)
    assert header == ["mode", "freq_hz", "freq_normalized", "period"]
    np.testing.assert_allclose(freqs[:, 1], [5, 17, 50, 73, 110], rtol=0.02)
    np.testing.assert_allclose(freqs[:, 3], 1 / freqs[:, 1])
    assert np.all(np.diff(freqs[:, 1]) >= 0)
    trace, header = read_csv(run_dir / "trace.csv")
    assert header[0] == "iteration" and trace.shape[1] == 6
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["config"]["lam"] == 100.0 and len(manifest["input_hash"]) == 64
    assert sorted(manifest["outputs"]) == sorted(
        [f"modes_k{k}.csv" for k in range(1, 6)]
        + ["latents.csv", "coefficients.csv", "frequencies.csv", "trace.csv"])


def test_decompose_byte_identical_rerun(synth_dir, run_dir, tmp_path):
    run("decompose", synth_dir / "data.csv", "--latents", 3, "--modes", 5, "--alpha", 45,
        "--lambda", 100, "--sample-rate", 256, "--out", tmp_path)
    for name in ("modes_k3.csv", "coefficients.csv", "trace.csv", "frequencies.csv"):
        assert (tmp_path / name).read_bytes() == (run_dir / name).read_bytes()


def test_decompose_config_file_precedence(synth_dir, tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("latents = 2\nmodes = 2\nlambda = 7\nmax_iter = 3\n")
    out = tmp_path / "o"
    assert run("decompose", synth_dir / "data.csv", "--config", cfg, "--modes", 1, "--out", out) == 0
    config = json.loads((out / "manifest.json").read_text())["config"]
    assert config["n_latents"] == 2 and config["n_modes"] == 1 and config["lam"] == 7.0
    cfg.write_text("whatever = 1\n")
    assert run("decompose", synth_dir / "data.csv", "--config", cfg, "--out", out) == 2


def test_decompose_mvmd_and_preprocessing(tmp_path):
    t = np.arange(256)
    X = np.column_stack([5 + np.cos(2 * np.pi * 0.1 * t), 2 * np.cos(2 * np.pi * 0.1 * t)])
    write_csv(tmp_path / "x.csv", X, ["p", "q"])
    out = tmp_path / "o"
    assert run("decompose", tmp_path / "x.csv", "--solver", "mvmd", "--modes", 1, "--zscore",
               "--out", out) == 0
    U, _ = read_csv(out / "modes_k1.csv")
    assert abs(U[:, 0].mean()) < 1e-2 and abs(U.std() - 1) < 0.1
    assert not (out / "coefficients.csv").exists()


def test_decompose_zero_input(tmp_path):
    write_csv(tmp_path / "z.csv", np.zeros((32, 2)), ["a", "b"])
    out = tmp_path / "o"
    assert run("decompose", tmp_path / "z.csv", "--latents", 2, "--modes", 2, "--out", out) == 0
    assert np.all(read_csv(out / "modes_k1.csv")[0] == 0)
    assert json.loads((out / "manifest.json").read_text())["config"]["n_iterations"] == 1


def test_decompose_errors(synth_dir, tmp_path, capsys):
    assert run("decompose", synth_dir / "data.csv", "--latents", 9, "--out", tmp_path) == 2
    err = capsys.readouterr().err
    assert err.startswith("vlmd: error: usage: UsageError:")
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n3,x\n")
    assert run("decompose", bad, "--out", tmp_path / "o") == 1
    assert "bad.csv:3:" in capsys.readouterr().err


def test_filter_clients(tmp_path, capsys):
    X = np.ones((10, 3))
    X[:, 1] = 0.0
    X[:6, 2] = 0.0
    write_csv(tmp_path / "in.csv", X, ["a", "b", "c"])
    out = tmp_path / "out.csv"
    assert run("filter-clients", tmp_path / "in.csv", "--max-zero-frac", 0.5, "--out", out) == 0
    assert read_csv(out)[1] == ["a"]
    assert "retained 1 of 3" in capsys.readouterr().out
    assert run("filter-clients", tmp_path / "in.csv", "--max-zero-frac", 1.0, "--out", out) == 0
    assert read_csv(out)[1] == ["a", "b", "c"]
    assert run("filter-clients", tmp_path / "in.csv", "--drop-head-rows", 6, "--drop-tail-rows", 1,
               "--max-zero-frac", 0.5, "--out", out) == 0
    data, header = read_csv(out)
    assert header == ["a", "c"] and data.shape == (3, 2)
    assert (tmp_path / "manifest.json").exists()


def test_filter_clients_empty(tmp_path, capsys):
    write_csv(tmp_path / "in.csv", np.zeros((5, 2)), ["a", "b"])
    assert run("filter-clients", tmp_path / "in.csv", "--max-zero-frac", 0.5,
               "--out", tmp_path / "o.csv") == 1
    assert "ExplicitEmptyOutput" in capsys.readouterr().err
    assert not (tmp_path / "o.csv").exists()


def test_cluster_coefficients_and_modes(run_dir, tmp_path):
    assert run("cluster", run_dir, "--out", tmp_path) == 0
    tree = json.loads((tmp_path / "dendrogram_coefficients.json").read_text())
    assert tree["leaf_labels"] == [f"ch{i}" for i in range(1, 6)] and len(tree["merges"]) == 4
    assert (tmp_path / "dendrogram_coefficients.nwk").read_text().strip().endswith(";")
    assert (tmp_path / "manifest.json").exists()
    assert run("cluster", run_dir, "--target", "mode:2", "--linkage", "complete",
               "--max-leaves", 3, "--out", tmp_path) == 0
    tree = json.loads((tmp_path / "dendrogram_mode2.json").read_text())
    assert len(tree["merges"]) == 2


def test_cluster_two_channel_single_merge(tmp_path):
    t = np.arange(128)
    X = np.column_stack([np.cos(0.3 * t), 0.5 * np.cos(0.3 * t) + 0.1 * np.sin(0.1 * t)])
    write_csv(tmp_path / "x.csv", X, ["u", "v"])
    run("decompose", tmp_path / "x.csv", "--latents", 1, "--modes", 1, "--out", tmp_path / "r")
    assert run("cluster", tmp_path / "r", "--target", "mode:1") == 0
    tree = json.loads((tmp_path / "r" / "dendrogram_mode1.json").read_text())
    assert len(tree["merges"]) == 1


def test_cluster_errors(run_dir, tmp_path, capsys):
    assert run("cluster", run_dir, "--target", "modes") == 2
    assert run("cluster", run_dir, "--target", "mode:0") == 2
    assert run("cluster", run_dir, "--target", "mode:9") == 1
    assert "vlmd decompose" in capsys.readouterr().err
    assert run("cluster", tmp_path / "nothing") == 1


def test_bench_minimal_grid(tmp_path, monkeypatch):
    monkeypatch.setenv("VLMD_NUM_THREADS", "1")
    out = tmp_path / "b"
    code = run("bench", "--scenarios", "A", "--noise-grid", 0.01, "--seeds", 0, "--datasets", 1,
               "--no-tune", "--max-iter", 50, "--out", out)
    assert code == 0
    lines = (out / "results.csv").read_text().splitlines()
    assert lines[0].startswith("scenario,dataset_id,seed,noise,solver,K,corr_error,freq_mape,"
                               "wall_ms,iters,converged")
    assert len(lines) == 3
    assert {line.split(",")[4] for line in lines[1:]} == {"vlmd", "mvmd"}
    assert (out / "summary.csv").exists() and (out / "manifest.json").exists()


def test_bench_usage_errors(tmp_path):
    assert run("bench", "--scenarios", "Z", "--out", tmp_path) == 2
    assert run("bench", "--solvers", "emd", "--out", tmp_path) == 2
    with pytest.raises(SystemExit) as info:
        run("bench", "--k-sweep", "x:y", "--out", tmp_path)
    assert info.value.code == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "vlmd.cli", "cluster", str(tmp_path),
                           "--target", "junk"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert proc.stderr.strip().startswith("vlmd: error: usage:")
