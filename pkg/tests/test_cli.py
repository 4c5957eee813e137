import json
import subprocess
import sys

import pytest

from learnedbf.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, git_blob_hash, main, parse_decoders, parse_float_list
from learnedbf.codes import load_pc
from learnedbf.evaluation import read_results_csv


def run(*argv):
    return main([str(a) for a in argv])


def test_gen_h_std_and_oc(tmp_path):
    assert run("gen-h", "--code", "rm:2,5", "--out", tmp_path / "std.txt") == EXIT_OK
    assert load_pc(tmp_path / "std.txt").shape == (16, 32)
    assert run("gen-h", "--code", "rm:2,5", "--overcomplete", "--out", tmp_path / "oc.txt") == EXIT_OK
    assert load_pc(tmp_path / "oc.txt").shape == (620, 32)
    manifest = json.loads((tmp_path / "oc.txt.manifest.json").read_text())
    assert manifest["outputs"]["oc.txt"] == git_blob_hash(tmp_path / "oc.txt")


def test_git_blob_hash_known_value(tmp_path):
    path = tmp_path / "x"
    path.write_bytes(b"hello\n")
    # `git hash-object` of "hello\n"
    assert git_blob_hash(path) == "ce013625030ba8dba906f756967f9e9ca394464a"


@pytest.mark.parametrize("argv", [
    ["gen-h", "--code", "rm:9", "--out", "x"],
    ["gen-h", "--code", "bch:63,45", "--out", "x"],
    ["gen-h", "--code", "rm:2,5"],
    ["eval", "--decoders", "bf,foo", "--out", "x"],
    ["eval", "--decoders", "lbf", "--out", "x"],
    ["train", "--channel", "awgn-sd", "--out", "x"],
    ["train", "--explore", "boltzmann", "--out", "x"],
    ["estimate-profile", "--samples", "10", "--out", "x"],
    ["frobnicate"],
    [],
    ["eval", "--snr", "4:3:x", "--out", "x"],
])
def test_usage_errors(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == EXIT_USAGE
    err = capsys.readouterr().err.strip()
    assert len(err.splitlines()) == 1 and "usage error" in err


def test_runtime_errors(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 3\n1 0 1\n")
    assert run("gen-h", "--code", f"file:{bad}", "--out", tmp_path / "o.txt") == EXIT_RUNTIME
    assert run("gen-h", "--code", f"file:{tmp_path / 'missing.txt'}", "--out", tmp_path / "o.txt") == EXIT_RUNTIME
    assert run("eval", "--code", "rm:3,6", "--decoders", "hdml", "--out", tmp_path / "e") == EXIT_RUNTIME
    assert len(capsys.readouterr().err.strip().splitlines()) == 3


def test_parsers():
    assert parse_float_list("3,4,5") == [3.0, 4.0, 5.0]
    assert parse_float_list("2:3:0.5") == [2.0, 2.5, 3.0]
    assert parse_decoders("bf, lbf-nn,osd3") == ["bf", "lbf-nn", "osd3"]


def test_train_and_eval_pipeline(tmp_path):
    out = tmp_path / "tab"
    assert run("train", "--code", "rm:1,3", "--episodes", 6000, "--seed", 3, "--out", out) == EXIT_OK
    assert (out / "qtable.bin").exists() and (out / "learning_curve.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3 and manifest["config"]["alpha"] == 0.1
    nn = tmp_path / "nn"
    assert run("train", "--code", "rm:1,3", "--method", "fitted", "--explore", "greedy",
               "--eps-schedule", "linear:0.9:0:0.9K", "--episodes", 3000, "--hidden", 16,
               "--batch", 20, "--curve", "--curve-every", 1, "--out", nn) == EXIT_OK
    assert json.loads((nn / "manifest.json").read_text())["config"]["alpha"] == 3e-5
    args = ["eval", "--code", "rm:1,3", "--decoders", "bf,wbf,lbf,lbf-nn,hdml,osd3,brute",
            "--model", out / "qtable.bin", "--model-nn", nn / "qnet.bin", "--snr", "3,5",
            "--max-words", 3000, "--seed", 11]
    assert run(*args, "--out", tmp_path / "e1") == EXIT_OK
    assert run(*args, "--workers", 2, "--out", tmp_path / "e2") == EXIT_OK
    a = (tmp_path / "e1" / "results.csv").read_bytes()
    assert a == (tmp_path / "e2" / "results.csv").read_bytes()
    rows = read_results_csv(tmp_path / "e1" / "results.csv")
    assert len(rows) == 14
    assert {r["decoder"] for r in rows} == {"bf", "wbf", "lbf", "lbf-nn", "hdml", "osd3", "brute"}


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("code: rm:1,3\nsnr: '4'\ndecoders: bf,hdml\nmax-words: 2000\nseed: 5\n")
    assert run("eval", "--config", cfg, "--out", tmp_path / "a") == EXIT_OK
    assert run("eval", "--config", cfg, "--decoders", "bf", "--out", tmp_path / "b") == EXIT_OK
    a = read_results_csv(tmp_path / "a" / "results.csv")
    b = read_results_csv(tmp_path / "b" / "results.csv")
    assert [r["decoder"] for r in a] == ["bf", "hdml"] and [r["decoder"] for r in b] == ["bf"]
    assert a[0] == b[0]
    cfg.write_text("bogus_option: 1\n")
    assert run("eval", "--config", cfg, "--out", tmp_path / "c") == EXIT_USAGE


def test_sort_discard_pipeline(tmp_path):
    prof = tmp_path / "prof"
    assert run("estimate-profile", "--code", "rm:1,3", "--samples", 100_000, "--out", prof) == EXIT_OK
    lines = (prof / "profile.csv").read_text().splitlines()
    assert len(lines) == 2 + 8
    sd = tmp_path / "sd"
    assert run("train", "--code", "rm:1,3", "--channel", "awgn-sd", "--profile", prof / "profile.csv",
               "--episodes", 5000, "--out", sd) == EXIT_OK
    assert run("eval", "--code", "rm:1,3", "--channel", "awgn-sd", "--decoders", "lbf,osd3",
               "--model", sd / "qtable.bin", "--snr", 4, "--max-words", 2000, "--out", tmp_path / "e") == EXIT_OK


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "learnedbf", "gen-h", "--code", "rm:1,3",
                          "--out", str(tmp_path / "h.txt")], capture_output=True, text=True)
    assert res.returncode == 0 and (tmp_path / "h.txt").exists()
