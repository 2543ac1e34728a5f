import argparse
import json
import os

import numpy as np
import pandas as pd
import pytest

from src.app import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, main
from src.geometry.errors import ConfigError
from src.verification.config import ENV_FIXTURES, ENV_OUT, ENV_PROBES, ENV_SEED, RunConfig


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in (ENV_FIXTURES, ENV_OUT, ENV_PROBES, ENV_SEED):
        monkeypatch.delenv(name, raising=False)


def write_fixture(directory, name, data):
    with open(os.path.join(directory, f"{name}.json"), "w", encoding="utf-8") as f:
        json.dump(data, f)


CONFIG_ERROR_CASES = [
    ("unknown suite", ["verify", "--suite", "nope"]),
    ("too few probes", ["verify", "--probes", "4"]),
    ("eps not decreasing", ["verify", "--eps", "0.1,0.2"]),
    ("eps out of range", ["surface", "--quantity", "g_eps", "--eps", "1.5,0.5"]),
    ("bad bounds", ["surface", "--bounds", "1,0,-1,1"]),
    ("unknown quantity", ["surface", "--quantity", "torsion"]),
    ("unknown fixture", ["verify", "--suite", "groupoid", "--fixture", "missing"]),
    ("no command", []),
]


@pytest.mark.parametrize("name,argv", CONFIG_ERROR_CASES, ids=[c[0] for c in CONFIG_ERROR_CASES])
def test_configuration_errors_exit_with_two(name, argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)] if argv else argv) == EXIT_CONFIG


def test_flags_override_the_environment(monkeypatch):
    monkeypatch.setenv(ENV_PROBES, "12")
    monkeypatch.setenv(ENV_SEED, "7")
    args = argparse.Namespace(
        command="verify", suite="bm", fixture=None, m=2, k=1, eps=None, seed=3, probes=None, out=None, tol_scale=1.0
    )
    config = RunConfig.from_args(args)
    assert config.seed == 3
    assert config.probes == 12
    assert config.suites == ["bm"]


def test_bad_environment_value(monkeypatch):
    monkeypatch.setenv(ENV_SEED, "seven")
    assert main(["verify", "--suite", "groupoid"]) == EXIT_CONFIG


def test_config_rejects_bad_tolerance_scale():
    with pytest.raises(ConfigError):
        RunConfig(tol_scale=0.0)


def test_verify_single_fixture_passes(tmp_path):
    out = tmp_path / "run"
    assert main(["verify", "--suite", "groupoid", "--fixture", "b_frame", "--probes", "8", "--out", str(out)]) == EXIT_PASS
    with open(out / "report.json", encoding="utf-8") as f:
        report = json.load(f)
    assert report["passed"] is True
    assert report["seed"] == 0
    assert [entry["check"] for entry in report["checks"]] == ["b_frame.axioms"]
    assert os.path.exists(out / "timings.csv")


def test_negative_control_is_reported_as_a_pass(tmp_path):
    out = tmp_path / "run"
    argv = ["verify", "--suite", "groupoid", "--fixture", "zero_tangent_frame", "--probes", "32", "--out", str(out)]
    assert main(argv) == EXIT_PASS


def test_verify_all_suites_pass(tmp_path):
    out = tmp_path / "run"
    assert main(["verify", "--suite", "all", "--probes", "8", "--out", str(out)]) == EXIT_PASS
    with open(out / "report.json", encoding="utf-8") as f:
        report = json.load(f)
    assert report["passed"] is True
    checks = [entry["check"] for entry in report["checks"]]
    assert "bm.m2.coefficients_ode" in checks
    assert any(check.startswith("desing_k1.") for check in checks)


def test_failing_check_exits_with_one(tmp_path, monkeypatch):
    fixtures = tmp_path / "fixtures"
    fixtures.mkdir()
    write_fixture(
        fixtures,
        "claims_to_commute",
        {
            "frame": "zero_tangent",
            "arrow_box": [[-1.0, 1.0], [-1.0, 1.0]],
            "base_box": [[-1.0, 1.0], [-1.0, 1.0]],
            "commutes": True,
        },
    )
    monkeypatch.setenv(ENV_FIXTURES, str(fixtures))
    out = tmp_path / "run"
    assert main(["verify", "--suite", "groupoid", "--probes", "8", "--out", str(out)]) == EXIT_FAIL
    with open(out / "report.json", encoding="utf-8") as f:
        report = json.load(f)
    assert report["passed"] is False
    assert report["checks"][0]["check"] == "claims_to_commute.axioms"


def test_malformed_fixture_is_a_configuration_error(tmp_path, monkeypatch):
    fixtures = tmp_path / "fixtures"
    fixtures.mkdir()
    (fixtures / "broken.json").write_text("{not json", encoding="utf-8")
    monkeypatch.setenv(ENV_FIXTURES, str(fixtures))
    assert main(["verify", "--suite", "groupoid", "--out", str(tmp_path / "run")]) == EXIT_CONFIG


def test_reports_are_reproducible(tmp_path):
    contents = []
    for run in ("first", "second"):
        out = tmp_path / run
        argv = ["verify", "--suite", "groupoid", "--fixture", "b_frame", "--probes", "8", "--seed", "5", "--out", str(out)]
        assert main(argv) == EXIT_PASS
        contents.append((out / "report.json").read_bytes())
    assert contents[0] == contents[1]


# --- surfaces ---


def read_surface(out, quantity):
    return pd.read_csv(out / f"surface_{quantity}.csv")


def test_alpha_surface_of_x_squared(tmp_path):
    assert main(["surface", "--quantity", "alpha", "--m", "2", "--grid", "5", "--out", str(tmp_path)]) == EXIT_PASS
    frame = read_surface(tmp_path, "alpha")
    assert list(frame.columns) == ["a", "x", "alpha"]
    assert len(frame) == 25
    inside = frame["alpha"].notna()
    # alpha = 1 - a x inside the chart, NaN where 1 - a x <= 0
    np.testing.assert_allclose(frame.loc[inside, "alpha"], 1.0 - frame.loc[inside, "a"] * frame.loc[inside, "x"], rtol=1e-12)
    assert np.all(1.0 - frame.loc[~inside, "a"] * frame.loc[~inside, "x"] <= 0.0)
    assert (~inside).sum() == 2


def test_pi_surface_matches_the_oracle(tmp_path):
    argv = ["surface", "--quantity", "pi", "--grid", "3", "--bounds", "-0.5,0.5,-0.5,0.5", "--out", str(tmp_path)]
    assert main(argv) == EXIT_PASS
    frame = read_surface(tmp_path, "pi")
    assert list(frame.columns) == ["a", "x", "pi_ay", "pi_bx", "pi_by", "pi_xy"]
    np.testing.assert_allclose(frame["pi_ay"], 1.0)
    np.testing.assert_allclose(frame["pi_bx"], 1.0 - frame["a"] * frame["x"], atol=1e-12)
    np.testing.assert_allclose(frame["pi_by"], frame["x"], atol=1e-12)
    np.testing.assert_allclose(frame["pi_xy"], -frame["x"] ** 2, atol=1e-12)


def test_g_eps_surface(tmp_path):
    argv = ["surface", "--quantity", "g_eps", "--k", "1", "--eps", "0.4,0.2", "--grid", "8", "--out", str(tmp_path)]
    assert main(argv) == EXIT_PASS
    frame = read_surface(tmp_path, "g_eps")
    assert len(frame) == 16
    assert sorted(frame["eps"].unique()) == [0.2, 0.4]
    outside = frame["x"].abs() >= frame["eps"] ** 2
    assert (frame.loc[outside, "g"] == 0.0).all()
    assert (frame.loc[~outside, "g"] > 0.0).all()


def test_empty_grid_writes_a_header(tmp_path):
    assert main(["surface", "--quantity", "g_eps", "--grid", "0", "--out", str(tmp_path)]) == EXIT_PASS
    with open(tmp_path / "surface_g_eps.csv", encoding="utf-8") as f:
        assert f.read().strip() == "eps,x,g,h_prime"


def test_csv_floats_round_trip(tmp_path):
    assert main(["surface", "--quantity", "alpha", "--grid", "7", "--m", "3", "--out", str(tmp_path)]) == EXIT_PASS
    frame = pd.read_csv(tmp_path / "surface_alpha.csv", float_precision="round_trip")
    nodes = np.linspace(-1.0, 1.0, 7)
    np.testing.assert_array_equal(frame["a"].unique(), nodes)
    np.testing.assert_array_equal(frame["x"].to_numpy()[:7], nodes)
