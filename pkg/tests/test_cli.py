"""CLI thin client: dispatch, exit codes, config files, artifacts, --server."""

import json
import os
import socket
import subprocess
import sys
import time

import numpy as np
import pytest

from gradlap.cli import main
from gradlap.radial import RadialProfile, uniform_grid
from gradlap.serialize import canonical_json, write_profile_csv

SOLVE_ARGS = ["solve", "--N", "3", "--m", "2.0", "--p", "1.2", "--q", "0.3",
              "--alpha1", "2.25", "--alpha2", "1.2", "--M1", "1.0",
              "--M2", "0.1", "--lam", "0.5", "--n", "1024"]


def _paraboloid_csv(tmp_path):
    grid = uniform_grid(2.0, n=65)
    prof = RadialProfile(grid=grid, values=5.0 - grid.nodes ** 2,
                         du=-2.0 * grid.nodes)
    path = os.path.join(tmp_path, "parab.csv")
    write_profile_csv(path, prof)
    return path


# --------------------------------------------------------------------------
# parser-level behaviour


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "gradlap" in capsys.readouterr().out


def test_no_command_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    assert "a command is required" in capsys.readouterr().err


def test_unknown_command_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_missing_required_arguments(capsys):
    rc = main(["classify", "--N", "3", "--m", "2.0", "--p", "0.0"])
    assert rc == 1
    assert "missing required arguments: --q" in capsys.readouterr().err


def test_bad_number_list(capsys):
    rc = main(["blowup", "--N", "3", "--m", "2.0", "--p", "0.0", "--q", "4.0",
               "--ladder", "a,b"])
    assert rc == 1
    assert "comma-separated list" in capsys.readouterr().err


# --------------------------------------------------------------------------
# human and JSON rendering


def test_classify_human(capsys):
    rc = main(["classify", "--N", "2", "--m", "2.0", "--p", "0.0",
               "--q", "2.0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "classification: liouville-bounded-large-q" in out
    assert "Q=1" in out
    assert "[pass]" in out and "[fail]" in out


def test_classify_json_is_canonical(capsys):
    argv = ["--json", "classify", "--N", "2", "--m", "2.0", "--p", "0.0",
            "--q", "2.0"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    second = capsys.readouterr().out
    assert first == second  # byte-identical across runs
    body = json.loads(first)
    assert body["classification"] == "liouville-bounded-large-q"
    assert first == canonical_json(body) + "\n"


def test_bernstein_human(capsys):
    rc = main(["bernstein", "--N", "2", "--m", "2.0", "--p", "0.0",
               "--q", "2.0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "beta=4" in out
    assert "D=-0.875" in out
    assert "gradient_exponent=-2" in out


def test_bernstein_manual_human(capsys):
    rc = main(["bernstein", "--N", "2", "--m", "2.0", "--p", "0.0",
               "--q", "2.0", "--beta", "4.0", "--lam", "-6.0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "manual frame" in out
    assert "positivity_margin=68" in out


def test_feasibility_human(capsys):
    rc = main(["feasibility", "--N", "3", "--m", "2.0",
               "--resolution", "40"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "feasible points: 0" in out
    assert "empty=True" in out
    assert "conflicting pair:" in out


def test_solve_human(capsys):
    rc = main(SOLVE_ARGS)
    assert rc == 0
    out = capsys.readouterr().out
    assert "converged in" in out
    assert "sup u=0.0873583" in out
    assert "positive_interior=True" in out


def test_eigen_human(capsys):
    rc = main(["eigen", "--N", "3", "--m", "2.0", "--n", "1024"])
    assert rc == 0
    assert "lambda1 = 9.8695" in capsys.readouterr().out


def test_bubble_human(capsys):
    rc = main(["bubble", "--N", "3", "--m", "2.0", "--p", "0.0", "--q", "5.0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "feasible: beta=0.5" in out


def test_blowup_human(capsys):
    rc = main(["blowup", "--N", "3", "--m", "2.0", "--p", "0.0", "--q", "4.0",
               "--n", "1024"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "mode=center" in out
    assert "predicted 0.666667" in out


def test_probe_nonexistence_human(capsys):
    rc = main(["probe-nonexistence", "--N", "3", "--m", "2.0", "--p", "1.2",
               "--q", "0.3", "--alpha1", "2.25", "--ladder", "0.2,2,8,40",
               "--n", "256"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "last convergent lam=2" in out
    assert "first divergent lam=8" in out
    assert "consistent=True" in out


def test_liouville_probe_human(capsys):
    rc = main(["liouville-probe", "--N", "2", "--m", "2.0", "--p", "0.0",
               "--q", "2.0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.count("hits-zero") == 4
    assert "all_failed=True" in out


def test_harnack_from_csv(tmp_path, capsys):
    path = _paraboloid_csv(tmp_path)
    rc = main(["harnack", "--profile", path, "--R", "0.5", "--lam", "0.0"])
    assert rc == 0
    assert "harnack ratio = 1.05263157895" in capsys.readouterr().out


def test_weak_harnack_from_csv(tmp_path, capsys):
    grid = uniform_grid(2.0, n=129)
    prof = RadialProfile(grid=grid, values=np.ones(grid.n),
                         du=np.zeros(grid.n))
    path = os.path.join(tmp_path, "const.csv")
    write_profile_csv(path, prof)
    rc = main(["weak-harnack", "--profile", path, "--R", "0.5",
               "--gamma", "1.5", "--N", "3", "--m", "2.0", "--p", "0.0",
               "--q", "1.0"])
    assert rc == 0
    assert "weak harnack constant = 0.0962" in capsys.readouterr().out


def test_scalings_from_csv(tmp_path, capsys):
    grid = uniform_grid(40.0, n=4096, r_min=0.05)
    vals = (2.0 / 9.0) ** (1.0 / 3.0) * grid.nodes ** (-2.0 / 3.0)
    prof = RadialProfile(grid=grid, values=vals)
    path = os.path.join(tmp_path, "sing.csv")
    write_profile_csv(path, prof)
    rc = main(["scalings", "--N", "3", "--m", "2.0", "--p", "0.0",
               "--q", "4.0", "--gamma", "1.0", "--mu", "1.0",
               "--radii", "1,2,4,8,16,32", "--profile", path])
    assert rc == 0
    out = capsys.readouterr().out
    assert "amplitude=n/a" in out
    assert "I1 (u^gamma)" in out


# --------------------------------------------------------------------------
# exit code mapping


def test_domain_error_exits_1(capsys):
    rc = main(["eigen", "--N", "3", "--m", "1.0"])
    assert rc == 1
    assert "domain error" in capsys.readouterr().err


def test_nonconvergence_exits_2(capsys):
    rc = main(["solve", "--N", "3", "--m", "2.0", "--p", "1.2", "--q", "0.3",
               "--alpha1", "2.25", "--lam", "8.0", "--n", "256"])
    assert rc == 2
    assert "nonconvergence error" in capsys.readouterr().err


def test_tolerance_exits_3(capsys):
    rc = main(["solve", "--N", "3", "--m", "2.0", "--p", "1.2", "--q", "0.3",
               "--alpha1", "2.25", "--lam", "0.5", "--n", "512"])
    assert rc == 3
    assert "tolerance error" in capsys.readouterr().err


# --------------------------------------------------------------------------
# artifacts


def test_out_writes_artifacts(tmp_path, capsys):
    outdir = os.path.join(tmp_path, "artifacts")
    rc = main(["--out", outdir, "--json"] + SOLVE_ARGS)
    assert rc == 0
    json_line = capsys.readouterr().out
    with open(os.path.join(outdir, "response.json"), encoding="utf-8") as fh:
        assert fh.read() == json_line
    csv_path = os.path.join(outdir, "profile.csv")
    with open(csv_path, encoding="utf-8") as fh:
        header = fh.readline().strip()
    assert header == "r,u,du"
    rows = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    body = json.loads(json_line)
    assert np.array_equal(rows[:, 1], np.asarray(body["profile"]["u"]))
    svg = open(os.path.join(outdir, "profile.svg"), encoding="utf-8").read()
    assert svg.lstrip().startswith("<?xml")
    assert len(svg) > 1000


def test_out_without_profile_writes_json_only(tmp_path):
    outdir = os.path.join(tmp_path, "cls")
    rc = main(["--out", outdir, "classify", "--N", "2", "--m", "2.0",
               "--p", "0.0", "--q", "2.0"])
    assert rc == 0
    assert os.path.exists(os.path.join(outdir, "response.json"))
    assert not os.path.exists(os.path.join(outdir, "profile.csv"))


# --------------------------------------------------------------------------
# config files


def test_config_supplies_defaults(tmp_path, capsys):
    cfg = os.path.join(tmp_path, "solve.cfg")
    with open(cfg, "w", encoding="utf-8") as fh:
        fh.write("# canonical run\n"
                 "N = 3\nm = 2.0\np = 1.2\nq = 0.3\n"
                 "alpha1 = 2.25\nalpha2 = 1.2\nM1 = 1.0\nM2 = 0.1\n"
                 "lam = 0.5\nn = 1024\n")
    rc = main(["--config", cfg, "solve"])
    assert rc == 0
    assert "sup u=0.0873583" in capsys.readouterr().out


def test_cli_flags_override_config(tmp_path, capsys):
    cfg = os.path.join(tmp_path, "solve.cfg")
    with open(cfg, "w", encoding="utf-8") as fh:
        fh.write("N = 3\nm = 2.0\np = 1.2\nq = 0.3\n"
                 "alpha1 = 2.25\nlam = 0.5\nn = 1024\n")
    rc = main(["--config", cfg, "solve", "--lam", "0.25"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "at lam=0.25" in out
    assert "sup u=0.0430061" in out


def test_config_unknown_key(tmp_path, capsys):
    cfg = os.path.join(tmp_path, "bad.cfg")
    with open(cfg, "w", encoding="utf-8") as fh:
        fh.write("bogus_key = 1\n")
    rc = main(["--config", cfg, "solve"])
    assert rc == 1
    err = capsys.readouterr().err
    assert "unknown config key 'bogus_key' for command 'solve'" in err


def test_config_global_boolean(tmp_path, capsys):
    cfg = os.path.join(tmp_path, "g.cfg")
    with open(cfg, "w", encoding="utf-8") as fh:
        fh.write("json = true\n")
    rc = main(["--config", cfg, "classify", "--N", "2", "--m", "2.0",
               "--p", "0.0", "--q", "2.0"])
    assert rc == 0
    json.loads(capsys.readouterr().out)  # output switched to JSON


def test_config_missing_file(capsys):
    rc = main(["--config", "/nonexistent/path.cfg", "classify", "--N", "2",
               "--m", "2.0", "--p", "0.0", "--q", "2.0"])
    assert rc == 1
    assert "cannot read config file" in capsys.readouterr().err


def test_config_malformed_line(tmp_path, capsys):
    cfg = os.path.join(tmp_path, "m.cfg")
    with open(cfg, "w", encoding="utf-8") as fh:
        fh.write("just some words\n")
    rc = main(["--config", cfg, "classify", "--N", "2", "--m", "2.0",
               "--p", "0.0", "--q", "2.0"])
    assert rc == 1
    assert "not 'key = value'" in capsys.readouterr().err


# --------------------------------------------------------------------------
# module entry point and a real server round-trip


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gradlap.cli", "--version"],
                         capture_output=True, text=True, timeout=60)
    assert res.returncode == 0
    assert "gradlap" in res.stdout


def test_against_live_server(capsys):
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    proc = subprocess.Popen(
        [sys.executable, "-m", "gradlap.cli", "serve", "--port", str(port)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
    )
    url = "http://127.0.0.1:%d" % port
    try:
        import httpx

        deadline = time.time() + 30.0
        while True:
            try:
                if httpx.get(url + "/health", timeout=2.0).status_code == 200:
                    break
            except Exception:
                if time.time() > deadline:
                    raise
                time.sleep(0.2)
        argv = ["--json", "classify", "--N", "2", "--m", "2.0", "--p", "0.0",
                "--q", "2.0"]
        assert main(argv) == 0
        local = capsys.readouterr().out
        assert main(["--server", url] + argv) == 0
        remote = capsys.readouterr().out
        assert remote == local  # transport must not change the bytes
    finally:
        proc.terminate()
        proc.wait(timeout=15)
