import io
import json

import numpy as np
import pandas as pd
import pytest

from app.config import settings
from app.main import app, run
from app.models.schemas import MatrixPayload
from app.utils.cycle_model import SymMatrix


def invoke(runner, *args):
    return runner.invoke(app, list(args))


# ============================================
# Formules
# ============================================

def test_formula_prints_bare_integer(runner):
    result = invoke(runner, "formula", "--n", "7")
    assert result.exit_code == 0
    assert result.stdout.strip() == "129"


def test_degree_prints_bare_integer(runner):
    result = invoke(runner, "degree", "--n", "5")
    assert result.exit_code == 0
    assert result.stdout.strip() == "57"


def test_formula_json_has_config_header(runner):
    result = invoke(runner, "formula", "--n", "6", "--format", "json")
    data = json.loads(result.stdout)
    assert list(data)[0] == "config"
    assert data["config"]["command"] == "formula"
    assert data["value"] == 49


def test_formula_to_file(runner, tmp_path):
    target = tmp_path / "out.json"
    result = invoke(runner, "formula", "--n", "4", "--output", str(target))
    assert result.exit_code == 0
    assert json.loads(target.read_text(encoding="utf-8"))["value"] == 5


def test_table(runner):
    result = invoke(runner, "table", "--n-range", "4..6")
    assert result.exit_code == 0
    rows = json.loads(result.stdout)["rows"]
    assert [r["ml_degree"] for r in rows] == [5, 17, 49]


# ============================================
# Recensement et certificats
# ============================================

def test_enumerate_json(runner):
    result = invoke(runner, "enumerate", "--n", "5")
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert list(data)[0] == "config"
    assert data["config"]["n"] == 5
    assert data["config"]["format"] == "json" and data["config"]["output"] is None
    assert data["distinct_count"] == 17 and data["count_matches"]
    assert len(data["points"]) == 17


def test_enumerate_csv_summary(runner):
    result = invoke(runner, "enumerate", "--n", "4", "--format", "csv")
    assert result.exit_code == 0
    frame = pd.read_csv(io.StringIO(result.stdout))
    assert len(frame) == 1
    assert frame.loc[0, "config.n"] == 4
    assert frame.loc[0, "distinct_count"] == 5


def test_enumerate_with_certificates(runner):
    result = invoke(runner, "enumerate", "--n", "4", "--certify")
    assert result.exit_code == 0
    points = json.loads(result.stdout)["points"]
    assert all(p["certificate"]["passed"] for p in points)


def test_enumerate_export_dir(runner, tmp_path):
    result = invoke(runner, "enumerate", "--n", "4", "--export-dir", str(tmp_path))
    assert result.exit_code == 0
    index = pd.read_csv(tmp_path / "index.csv")
    assert len(index) == 5
    assert sorted(index["family"].unique()) == ["Checkerboard", "Identity"]
    first = pd.read_csv(tmp_path / index.loc[0, "file"])
    assert list(first.columns) == ["i", "j", "re", "im"]
    assert len(first) == 10


def test_count(runner):
    result = invoke(runner, "count", "--n-range", "4..6")
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert data["all_pass"]
    assert [r["distinct_count"] for r in data["rows"]] == [5, 17, 49]


def test_certify(runner):
    result = invoke(runner, "certify", "--n", "5", "--threads", "2")
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert data["all_pass"] and data["points_checked"] == 17


# ============================================
# Identités et statistique
# ============================================

def test_identities(runner):
    result = invoke(runner, "identities", "--max-n", "8", "--samples", "10")
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert data["config"]["samples"] == 10
    assert data["all_pass"]
    assert any(r["check"] == "rk_mutation_detected" and r["passed"] for r in data["rows"])


def test_mle_random(runner):
    result = invoke(runner, "mle", "--n", "5", "--seed", "3")
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert data["config"]["command"] == "mle"
    assert data["config"]["max_iter"] == 100
    assert data["grad_norm"] <= 1e-10


def test_mle_max_iter_recorded(runner):
    result = invoke(runner, "mle", "--n", "4", "--seed", "1", "--max-iter", "40")
    assert result.exit_code == 0
    assert json.loads(result.stdout)["config"]["max_iter"] == 40


def test_mle_from_file(runner, tmp_path):
    k0 = np.eye(5) + 0.2 * (np.eye(5, k=1) + np.eye(5, k=-1))
    k0[0, 4] = k0[4, 0] = 0.2
    path = tmp_path / "s.json"
    path.write_text(SymMatrix(np.linalg.inv(k0)).to_payload().model_dump_json(), encoding="utf-8")
    result = invoke(runner, "mle", "--s", str(path))
    assert result.exit_code == 0
    k_hat = SymMatrix.from_payload(MatrixPayload.model_validate(json.loads(result.stdout)["K_hat"]))
    assert np.allclose(k_hat.entries, k0, atol=1e-9)


def test_oracle(runner):
    result = invoke(runner, "oracle", "--n", "4")
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert data["distinct_critical_points"] == data["formula_count"] == 5
    assert data["failed_runs"] + data["converged_runs"] <= data["starts"]


def test_oracle_overcount_exits_1(runner, monkeypatch):
    monkeypatch.setattr("app.utils.mle.ml_degree_formula", lambda n: 1)
    assert invoke(runner, "oracle", "--n", "4", "--starts", "100").exit_code == 1


def test_oracle_without_generic_sample_exits_1(runner, monkeypatch):
    monkeypatch.setattr(settings, "ORACLE_COND_LIMIT", 0.0)
    assert invoke(runner, "oracle", "--n", "4", "--starts", "50").exit_code == 1


@pytest.mark.slow
def test_pipeline(runner):
    result = invoke(runner, "all", "--n-range", "4..5")
    assert result.exit_code == 0
    assert json.loads(result.stdout)["all_pass"]


# ============================================
# Codes de sortie
# ============================================

@pytest.mark.parametrize("args", [
    ["enumerate", "--n", "3"],
    ["formula", "--n", "2"],
    ["count", "--n-range", "9..4"],
    ["oracle", "--n", "7"],
    ["mle"],
    ["formula", "--n", "abc"],
])
def test_usage_errors_exit_2(runner, args):
    assert invoke(runner, *args).exit_code == 2


def test_missing_matrix_file_exits_2(runner, tmp_path):
    assert invoke(runner, "mle", "--s", str(tmp_path / "absent.json")).exit_code == 2


def test_run_returns_exit_codes():
    assert run(["formula", "--n", "4"]) == 0
    assert run(["formula", "--n", "2"]) == 2
    assert run(["formula", "--n", "abc"]) == 2
