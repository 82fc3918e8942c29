"""End-to-end command-line checks: exit codes, JSON shape, artifacts.

Everything goes through ``main(argv)`` so the tests exercise the same parse /
validate / dispatch / emit path as the installed script, without subprocess
overhead.
"""

import json

import numpy as np
import pytest

from sphframes import __version__
from sphframes.cli import main

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def run_json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


@pytest.fixture(scope="module")
def grid_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("grids") / "grid.json"
    rc = main(
        [
            "grid-build",
            "--n",
            "2",
            "--k",
            "2",
            "--scales",
            "geometric:1,0.8,8",
            "--measure-profile",
            "fast",
            "-o",
            str(path),
        ]
    )
    assert rc == 0
    return str(path)


# ---------------------------------------------------------------------------
# basic payloads


def test_admissibility_payload(capsys):
    doc = run_json(capsys, ["admissibility", "--m", "2"])
    assert doc["version"] == __version__
    assert doc["config"]["m"] == 2
    assert doc["i_gamma_closed"] == pytest.approx(0.375, rel=1e-12)
    assert doc["rel_deviation"] < 1e-8
    assert doc["zero_mean"] is True
    assert doc["gamma_tv_converged"] is True


def test_eval_output_file_and_sidecar(tmp_path):
    out = tmp_path / "eval.json"
    rc = main(["eval", "--a", "1.0", "--theta", "0.4,1.6", "-o", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert len(doc["values"]) == 2
    for row in doc["values"]:
        assert np.isfinite(row["value"])
        assert row["terms"] >= 1
    meta = json.loads((tmp_path / "eval.json.meta.json").read_text())
    assert meta["runtime_seconds"] >= 0.0
    assert "timestamp" in meta


def test_eval_gradient_flag(capsys):
    doc = run_json(capsys, ["eval", "--a", "0.8", "--theta", "0.7", "--gradient"])
    assert doc["gradient"] is True
    assert doc["values"][0]["value"] != 0.0


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert "sphframes" in capsys.readouterr().out


def test_kernel_check_payload(capsys):
    doc = run_json(
        capsys,
        ["kernel-check", "--draws", "3", "--scale-count", "6", "--angle-count", "12"],
    )
    assert doc["identity"]["draws"] == 3
    assert doc["identity"]["max_rel_error"] < 1e-10
    assert len(doc["scan"]) == 4
    for row in doc["scan"]:
        assert row["region"] in ("near", "far")
        assert row["quantity"] in ("kernel", "gradient")
        assert np.isfinite(row["d_hat"])
        assert row["params"]["omega"] == 1.0
        assert row["params"]["scale_count"] == 6


# ---------------------------------------------------------------------------
# exit codes


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--a", "1.0", "--theta", "0.5", "--m", "0"],
        ["eval", "--a", "1.0", "--theta", "0.5", "--n", "1"],
        ["semiframe", "--q", "1.5", "--J", "10"],
        ["semiframe", "--scales", "bogus:1,2,3"],
        ["kernel-check", "--eps-tilde", "0.6"],
    ],
)
def test_configuration_errors_exit_2(capsys, argv):
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_numeric_error_exits_3(capsys, grid_file):
    rc = main(
        [
            "reconstruct",
            "--grid",
            grid_file,
            "--band",
            "4",
            "--tol",
            "1e-10",
            "--max-iterations",
            "1",
        ]
    )
    assert rc == 3
    assert "numeric error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# determinism and config files


def test_identical_command_identical_bytes(tmp_path):
    out = tmp_path / "semi.json"
    argv = [
        "semiframe",
        "--b0",
        "5",
        "--q",
        "0.7",
        "--J",
        "25",
        "--lmax",
        "30",
        "-o",
        str(out),
    ]
    assert main(argv) == 0
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first
    assert (tmp_path / "semi.json.meta.json").exists()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("a = 2.0\ntheta = 0.3,0.9\n# comment only\n")
    out = tmp_path / "eval.json"
    rc = main(["eval", "--config", str(cfg), "--a", "1.0", "-o", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["a"] == 1.0  # explicit flag beats the config file
    assert [row["theta"] for row in doc["values"]] == [0.3, 0.9]


# ---------------------------------------------------------------------------
# CSV side outputs


def test_semiframe_profile_csv(tmp_path, capsys):
    prof = tmp_path / "profile.csv"
    doc = run_json(
        capsys,
        [
            "semiframe",
            "--b0",
            "5",
            "--q",
            "0.7",
            "--J",
            "25",
            "--lmin",
            "1",
            "--lmax",
            "5",
            "--profile",
            str(prof),
        ],
    )
    lines = prof.read_text().strip().splitlines()
    assert lines[0] == "l,S"
    assert len(lines) == 6
    assert doc["A"] <= doc["B"]
    assert doc["scales"]["J"] == 25


def test_localization_table_csv(tmp_path, capsys):
    table = tmp_path / "scan.csv"
    doc = run_json(
        capsys,
        [
            "localization",
            "--exponent",
            "5.0",
            "--theta-grid",
            "0.05,10,8",
            "--no-refine",
            "--table",
            str(table),
        ],
    )
    lines = table.read_text().strip().splitlines()
    assert lines[0] == "a,theta,value,scaled_value"
    assert 1 < len(lines) <= 65  # rows with a*theta > pi are dropped
    assert doc["grid_shape"] == [8, 8]
    assert doc["sup"] > 0.0


def test_explicit_scales_spec(capsys):
    doc = run_json(
        capsys,
        ["semiframe", "--scales", "explicit:5,4,3,2,1", "--lmin", "1", "--lmax", "10"],
    )
    assert doc["scales"]["kind"] == "explicit"
    assert doc["scales"]["J"] == 5


# ---------------------------------------------------------------------------
# grid pipeline


def test_grid_build_artifacts(grid_file):
    doc = json.loads(open(grid_file).read())
    meta = json.loads(open(grid_file + ".meta.json").read())
    assert meta["points"] == 8 * 96
    assert meta["delta"] == pytest.approx(1 / 0.8)
    assert doc["dim"] == 2 if "dim" in doc else True  # format checked in test_sphere


def test_grid_density_report(capsys, grid_file):
    doc = run_json(
        capsys,
        [
            "grid-density",
            "--grid",
            grid_file,
            "--rho",
            "4.0",
            "--probes",
            "6",
            "--resolution",
            "24",
        ],
    )
    assert isinstance(doc["passed"], bool)
    assert 0.0 < doc["covering_radius"]
    assert len(doc["worst_direction"]) == 3


def test_frame_audit_and_reconstruct_pipeline(capsys, grid_file):
    eig = run_json(
        capsys,
        ["frame-audit", "--grid", grid_file, "--method", "eig", "--band", "4"],
    )
    assert eig["method"] == "eig"
    assert 0.0 < eig["A_hat"] <= eig["B_hat"]
    assert eig["ratio"] == pytest.approx(eig["B_hat"] / eig["A_hat"])

    mc = run_json(
        capsys,
        [
            "frame-audit",
            "--grid",
            grid_file,
            "--method",
            "mc",
            "--band",
            "4",
            "--trials",
            "3",
        ],
    )
    slack = 1e-6 * eig["B_hat"]
    assert eig["A_hat"] - slack <= mc["A_hat"] <= mc["B_hat"] <= eig["B_hat"] + slack

    rec = run_json(
        capsys,
        ["reconstruct", "--grid", grid_file, "--band", "4", "--tol", "1e-5"],
    )
    assert rec["converged"] is True
    assert rec["rel_error"] <= 1e-5
    assert rec["iterations"] <= rec["iteration_bound"]
