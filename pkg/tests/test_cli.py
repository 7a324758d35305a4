import json
import os
import subprocess
import sys

import pytest

from aphj.cli import main, solver_threads
from aphj.errors import ConfigError
from aphj.scenarios import REGISTRY, resolve_config

REQUIRED = [
    "constant-sanity", "transport-exact", "burgers-hopf-lax", "contraction-suite", "mass-conservation",
    "duality-burgers", "spectrum-containment-ap", "decay-ap", "traveling-wave-plateau", "cl-decay",
    "cl-traveling-wave", "kronecker-fill",
]


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _tree(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for f in files:
            full = os.path.join(dirpath, f)
            with open(full, "rb") as fh:
                out[os.path.relpath(full, root)] = fh.read()
    return out


def test_constant_sanity_passes(tmp_path, capsys):
    cfg = _write(tmp_path, {"scenario": "constant-sanity"})
    assert main(["run", cfg, "--out", str(tmp_path / "out")]) == 0
    assert "PASS constant-sanity" in capsys.readouterr().out
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["verdict"]["max_deviation"] == 0.0
    assert set(report) == {"scenario", "params", "series", "verdict", "thresholds"}


def test_unknown_key_exit_2(tmp_path):
    cfg = _write(tmp_path, {"scenario": "constant-sanity", "solve": {"gridM": 10}})
    assert main(["run", cfg]) == 2
    cfg = _write(tmp_path, {"scenario": "constant-sanity", "gridM": 10})
    assert main(["run", cfg]) == 2


def test_bad_override_and_missing_file(tmp_path):
    cfg = _write(tmp_path, {"scenario": "constant-sanity"})
    assert main(["run", cfg, "--override", "solve.scheme=\"bogus\""]) == 2
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    assert main(["verify", "no-such-scenario"]) == 2


def test_failed_verdict_exit_1(tmp_path):
    cfg = _write(tmp_path, {"scenario": "transport-exact"})
    rc = main(["run", cfg, "--out", str(tmp_path / "o"), "--override", "diagnostics.linf_threshold=1e-9",
               "--override", "solve.grid_n=64"])
    assert rc == 1


def test_runtime_failure_exit_1(tmp_path):
    cfg = _write(tmp_path, {"scenario": "transport-exact"})
    rc = main(["run", cfg, "--out", str(tmp_path / "o"), "--override", "hamiltonian={\"family\": \"quadratic\"}"])
    assert rc == 2
    # the step budget is exceeded before any stepping happens
    rc = main(["run", cfg, "--out", str(tmp_path / "o"), "--override", "solve.t_final=1e9",
               "--override", "solve.snapshot_cadence=1e9"])
    assert rc == 1


def test_list_rows(capsys):
    assert main(["list"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) >= 12
    assert main(["list", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    names = {r["name"] for r in rows}
    assert set(REQUIRED) <= names
    assert all(r["anchor"] for r in rows)


def test_reruns_bit_identical(tmp_path):
    cfg = _write(tmp_path, {"scenario": "transport-exact", "solve": {"grid_n": 64}})
    out = str(tmp_path / "a")
    assert main(["run", cfg, "--out", out]) == 0
    first = _tree(out)
    assert main(["run", cfg, "--out", out]) == 0
    second = _tree(out)
    assert len(first) > 3
    assert first == second


def test_manifest_echoes_resolved_config(tmp_path):
    cfg = _write(tmp_path, {"scenario": "transport-exact", "solve": {"grid_n": 64}, "output": {"snapshots": "final"}})
    out = tmp_path / "m"
    assert main(["run", cfg, "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    resolved = resolve_config({"scenario": "transport-exact", "solve": {"grid_n": 64}, "output": {"snapshots": "final"}})
    resolved.output["dir"] = str(out)
    assert man["config"] == json.loads(json.dumps(resolved.to_dict()))
    assert man["config"]["solve"]["t_final"] == 0.5
    assert len(man["snapshots"]) == 1
    assert (out / man["snapshots"][0]["file"]).exists()


def test_verify_single(capsys):
    assert main(["verify", "lattice-algebra"]) == 0
    assert "1/1 scenarios passed" in capsys.readouterr().out


def test_threads_env(monkeypatch, tmp_path):
    monkeypatch.setenv("APHJ_THREADS", "4")
    assert solver_threads() == 1
    monkeypatch.setenv("APHJ_THREADS", "zero")
    with pytest.raises(ConfigError):
        solver_threads()
    assert main(["verify", "constant-sanity"]) == 2


def test_console_entry_point(tmp_path):
    env = dict(os.environ, APHJ_THREADS="2")
    proc = subprocess.run([sys.executable, "-m", "aphj.cli", "list"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert "decay-ap" in proc.stdout


def test_every_default_resolves():
    for name in REGISTRY:
        resolve_config({"scenario": name})
