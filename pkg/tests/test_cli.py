"""Command-line interface: outputs, exit codes, flag documentation."""

import json
import os

import numpy as np
import pytest

from calderonlab import grid as G
from calderonlab.cli import build_parser, main


def run(args, tmp_path, sub="out"):
    out = str(tmp_path / sub)
    return main(args + ["--out", out, "--grid-n", "256"]), out


def test_selftest(tmp_path, capsys):
    code, out = run(["selftest"], tmp_path)
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert all(line.startswith("PASS") for line in lines)
    assert os.path.exists(os.path.join(out, "resolved_config.json"))


def test_dtn_gamma_R(tmp_path, capsys):
    code, out = run(["dtn", "--family", "gamma_R", "--R", "0.5", "--N", "8"], tmp_path)
    assert code == 0
    payload = json.load(open(os.path.join(out, "dtn.json")))
    assert abs(payload["exp_diff"][1] - 0.2222) <= 1e-2
    assert payload["pairing"] == "area-form-c-sqrt2"


def test_cgos_zero(tmp_path, capsys):
    code, out = run(["cgos", "--mu", "zero", "--k", "1,0"], tmp_path)
    assert code == 0
    f = G.read_field(os.path.join(out, "cgos.ckf1"))
    assert np.max(np.abs(f.values - np.exp(1j * f.grid.nodes()))) < 1e-12
    side = json.load(open(os.path.join(out, "cgos.json")))
    assert side["residual"] == 0.0
    # emitted field files reload bit-identically
    G.write_field(f, os.path.join(out, "again.ckf1"))
    a = open(os.path.join(out, "cgos.ckf1"), "rb").read()
    b = open(os.path.join(out, "again.ckf1"), "rb").read()
    assert a == b


def test_psi_and_modulus_and_scatter(tmp_path):
    code, out = run(["psi", "--family", "holder", "--k", "4,0"], tmp_path, "psi")
    assert code == 0
    diag = json.load(open(os.path.join(out, "psi.json")))
    assert diag["tail_l2_norm"] <= diag["tail_bound"]
    code, out = run(["modulus", "--family", "gamma_R", "--R", "0.5"], tmp_path, "mod")
    assert code == 0
    lines = open(os.path.join(out, "modulus.csv")).read().splitlines()
    assert lines[0] == "t,value"
    code, out = run(
        ["scatter", "--family", "holder", "--radii", "1", "--angles", "2"], tmp_path, "sc"
    )
    assert code == 0
    lines = open(os.path.join(out, "scatter.csv")).read().splitlines()
    assert lines[0] == "k_re,k_im,tau_re,tau_im,residuals" and len(lines) == 3


def test_instability_subcommand(tmp_path, capsys):
    code, out = run(["instability"], tmp_path)
    assert code == 0
    res = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert res["passed"] is True


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense-command"])
    assert exc.value.code == 2


def test_numerical_error_exit_3(tmp_path, capsys):
    # degree 30 is not resolvable on the default mesh: DegreeTooHigh -> 3
    code, _ = run(["dtn", "--family", "gamma_R", "--R", "0.5", "--N", "30", "--mesh-m", "8"], tmp_path)
    assert code == 3
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == "DegreeTooHigh"


def test_io_error_exit_4(capsys):
    code = main(["selftest", "--config", "/nonexistent/config.json"])
    assert code == 4


def test_every_flag_documented():
    """Reflection over the registry: undocumented flags are a failure."""
    parser = build_parser()
    stack = [parser]
    while stack:
        p = stack.pop()
        for action in p._actions:
            if action.dest == "help":
                continue
            if hasattr(action, "choices") and isinstance(action.choices, dict):
                stack.extend(action.choices.values())
                continue
            assert action.help, f"undocumented flag {action.option_strings or action.dest}"
