"""Tests for the fractional-transmission command line."""
import json
import math
from pathlib import Path

import pandas as pd
import pytest
from conftest import CONFIG_DIR
from scipy.special import rgamma

from fractional_transmission.app import (
    EXIT_DOMAIN,
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_UNIQUENESS,
    EXIT_VERIFICATION,
    dump_json,
    main,
)
from fractional_transmission.processing.mode_solver import find_degenerate_b


@pytest.fixture
def small_document(demo_document):
    demo_document.update(K=8, grid={"nx": 16, "ny": 16})
    return demo_document


@pytest.fixture(scope="module")
def degenerate_document():
    return {
        "s": 1, "alpha": 0.5, "beta": 1.5, "a": 2.0,
        "b": find_degenerate_b(0.5, 1.5, 2.0, 1.0),
        "phi": {"sine_coeffs": [0.0, 1.0]}, "K": 8, "grid": {"nx": 16, "ny": 16},
    }


def test_ml_value(capsys):
    assert main(["ml", "--mu", "1", "--eta", "1", "--z", "-1"]) == EXIT_OK
    value, bound, method = capsys.readouterr().out.split()
    assert float(value) == pytest.approx(math.exp(-1.0), abs=1e-10)
    assert float(bound) <= 1e-10
    assert method == "series"


def test_ml_zeros_skipped_when_none_exist(capsys):
    assert main(["ml", "zeros", "--mu", "1.2", "--eta", "2"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "none"


def test_ml_zeros_scan(capsys):
    args = ["ml", "zeros", "--mu", "1.9", "--eta", "1", "--tmax", "10", "--step", "0.01"]
    assert main(args) == EXIT_OK
    lines = capsys.readouterr().out.split()
    assert lines[-1].startswith("h=")
    assert float(lines[-1][2:]) == float(lines[-2])


def test_ml_errors(capsys):
    assert main(["ml", "--mu", "1", "--eta", "1"]) == EXIT_DOMAIN
    assert main(["ml", "--mu", "2.5", "--eta", "1", "--z", "-1"]) == EXIT_DOMAIN
    assert "error:" in capsys.readouterr().err


def test_delta_single_mode(capsys, small_document, write_config, tmp_path):
    summary_path = tmp_path / "summary.json"
    args = ["delta", write_config(small_document), "--kmax", "1", "--summary", str(summary_path)]
    assert main(args) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,lambda_k,delta_k"
    assert len(lines) == 2
    k, lam, _ = lines[1].split(",")
    assert (k, float(lam)) == ("1", 1.0)
    summary = json.loads(summary_path.read_text())
    assert summary["kmax"] == 1
    assert summary["limit"] == pytest.approx(-1.0 / math.sqrt(math.pi))


def test_delta_summary_limit(capsys, write_config):
    document = json.loads((Path(__file__).parent.parent / "configs" / "beta_1_2.json").read_text())
    assert main(["delta", write_config(document), "--kmax", "50"]) == EXIT_OK
    captured = capsys.readouterr()
    assert len(captured.out.strip().splitlines()) == 51
    summary = json.loads(captured.err[captured.err.index("{"):])
    assert summary["limit"] == pytest.approx(-float(rgamma(0.8)), abs=1e-7)
    assert summary["h"] is None
    assert summary["flagged"] == []


def test_delta_strict_on_degenerate(degenerate_document, write_config):
    path = write_config(degenerate_document)
    assert main(["delta", path]) == EXIT_OK
    assert main(["delta", path, "--strict"]) == EXIT_UNIQUENESS


def test_solve_writes_field_and_metadata(small_document, write_config, tmp_path):
    out = tmp_path / "out" / "field.csv"
    assert main(["solve", write_config(small_document), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "x,y,u"
    assert len(lines) == 1 + 17 * 17
    meta = json.loads((tmp_path / "out" / "field.csv.meta.json").read_text())
    assert meta["jump_condition"] == "u(x, b) - u(x, -a) = phi(x)"
    assert meta["transmission"]["passed"]
    assert meta["tail_bound"] == 0.0
    assert [m["k"] for m in meta["modes"]] == list(range(1, 9))


def test_solve_is_byte_reproducible(small_document, write_config, tmp_path):
    path = write_config(small_document)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["solve", path, "--out", str(first)]) == EXIT_OK
    assert main(["solve", path, "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_solve_infeasible(capsys, degenerate_document, write_config, tmp_path):
    document = dict(degenerate_document, phi={"sine_coeffs": [1.0]})
    out = tmp_path / "field.csv"
    assert main(["solve", write_config(document), "--out", str(out)]) == EXIT_INFEASIBLE
    report = json.loads(capsys.readouterr().out)
    assert report["infeasible"] == [1]
    assert report["magnitudes"][0] == pytest.approx(math.sqrt(math.pi / 2.0))
    assert not out.exists()


def test_config_errors(small_document, write_config, tmp_path):
    unknown = dict(small_document, colour="blue")
    assert main(["solve", write_config(unknown), "--out", str(tmp_path / "f.csv")]) == EXIT_DOMAIN

    endpoint = dict(small_document, alpha=1.0)
    assert main(["delta", write_config(endpoint)]) == EXIT_DOMAIN

    two_phis = dict(small_document, phi={"sine_coeffs": [1.0], "poly_coeffs": [0.0]})
    assert main(["delta", write_config(two_phis)]) == EXIT_DOMAIN

    assert main(["eigs", str(tmp_path / "missing.json")]) == EXIT_DOMAIN


def test_eigs_table(capsys, small_document, write_config, tmp_path):
    summary_path = tmp_path / "eigs.json"
    assert main(["eigs", write_config(small_document), "--summary", str(summary_path)]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,lambda_k"
    assert lines[-1] == "8,64"
    summary = json.loads(summary_path.read_text())
    assert summary["basis"] == "analytic"
    assert summary["orthonormality_defect"] <= 1e-12
    assert summary["asymptotic_fit"]["c0"] == pytest.approx(0.0, abs=1e-10)


def test_dump_json_maps_non_finite_to_null():
    assert json.loads(dump_json({"bound": math.inf, "n": 1})) == {"bound": None, "n": 1}


@pytest.mark.slow
def test_verify_round_trips_solved_field(capsys, small_document, write_config, tmp_path):
    path = write_config(small_document)
    out = tmp_path / "field.csv"
    assert main(["solve", path, "--out", str(out)]) == EXIT_OK
    capsys.readouterr()

    assert main(["verify", path, "--field", str(out)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["passed"]
    assert all(item["passed"] for item in report["items"])
    names = [item["name"] for item in report["items"]]
    assert names == ["ml_identities", "eigen_checks", "transmission", "mode_conditions",
                     "pde_residual", "oracle_orders", "field_file"]
    field_item = report["items"][-1]
    assert field_item["passed"]
    assert field_item["measurements"]["value_gap"] == 0.0

    frame = pd.read_csv(out)
    frame.assign(u=frame["u"] + 1e-6).to_csv(out, index=False)
    assert main(["verify", path, "--field", str(out)]) == EXIT_VERIFICATION
    report = json.loads(capsys.readouterr().out)
    assert not report["passed"]
    assert [item["name"] for item in report["items"] if not item["passed"]] == ["field_file"]


def test_verify_demo_config(capsys):
    assert main(["verify", str(CONFIG_DIR / "demo.json")]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["passed"]
    assert report["level"] == "fast"
    assert [item["name"] for item in report["items"]] == [
        "ml_identities", "eigen_checks", "transmission", "mode_conditions",
        "pde_residual", "oracle_orders"]
    oracle = report["items"][-1]["measurements"]
    assert oracle["alpha_orders"][0]["order"] == pytest.approx(1.5, abs=0.25)
