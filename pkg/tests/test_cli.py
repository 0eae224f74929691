from __future__ import annotations

import io
import json
from pathlib import Path

import pandas as pd
import pytest

from src.cli import main

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

pytestmark = pytest.mark.integration


def _run(capsys, *argv: str):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _solve_to(tmp_path: Path, capsys, fixture: str) -> Path:
    target = tmp_path / "solution.json"
    code, _, _ = _run(capsys, "solve", str(FIXTURES / fixture), "--quiet", "--output", str(target))
    assert code == 0
    return target


@pytest.mark.parametrize(
    "fixture,p_star,regions",
    [
        ("pure_pair_c05.json", 0.5, ["middle"]),
        ("orthogonal_pure_pair.json", 1.0, []),
        ("rank2_example.json", 0.5, ["middle", "middle"]),
    ],
)
def test_solve_fixtures(capsys, fixture: str, p_star: float, regions) -> None:
    code, out, _ = _run(capsys, "solve", str(FIXTURES / fixture), "--quiet")
    assert code == 0
    record = json.loads(out)
    assert record["status"] == "Optimal"
    assert record["P_star"] == pytest.approx(p_star, abs=1e-6)
    assert record["P_star"] + record["Q_star"] == pytest.approx(1.0, abs=1e-12)
    assert record["regions"] == regions
    assert max(record["residuals"].values()) <= 1e-7


def test_solve_then_verify_passes(tmp_path: Path, capsys) -> None:
    solution = _solve_to(tmp_path, capsys, "pure_pair_c05.json")
    code, out, _ = _run(capsys, "verify", str(FIXTURES / "pure_pair_c05.json"), str(solution), "--quiet")
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    names = {check["name"] for check in report["checks"]}
    assert {"failure_gram_psd", "pairwise_bound", "realization_mapping", "povm_objective"} <= names


def _rewrite(path: Path, edit) -> Path:
    data = json.loads(path.read_text(encoding="utf-8"))
    edit(data)
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_verify_detects_negative_success_block(tmp_path: Path, capsys) -> None:
    solution = _solve_to(tmp_path, capsys, "pure_pair_c05.json")

    def negate(data):
        data["Y"][0][0][0] = [-0.1, 0.0]

    _rewrite(solution, negate)
    code, out, err = _run(capsys, "verify", str(FIXTURES / "pure_pair_c05.json"), str(solution), "--quiet")
    assert code == 5
    assert json.loads(out)["passed"] is False
    assert "error[certification-failed]" in err


def test_verify_detects_oversized_success_blocks(tmp_path: Path, capsys) -> None:
    solution = _solve_to(tmp_path, capsys, "pure_pair_c05.json")

    def inflate(data):
        data["Y"] = [[[[1.0 + 1e-6, 0.0]]], [[[1.0 + 1e-6, 0.0]]]]

    _rewrite(solution, inflate)
    code, _, _ = _run(capsys, "verify", str(FIXTURES / "pure_pair_c05.json"), str(solution), "--quiet")
    assert code == 5


def test_verify_detects_objective_mismatch(tmp_path: Path, capsys) -> None:
    solution = _solve_to(tmp_path, capsys, "pure_pair_c05.json")

    def shift(data):
        data["P_star"] += 0.01
        data["Q_star"] -= 0.01

    _rewrite(solution, shift)
    code, _, _ = _run(capsys, "verify", str(FIXTURES / "pure_pair_c05.json"), str(solution), "--quiet")
    assert code == 6


def test_verify_rejects_foreign_priors(tmp_path: Path, capsys) -> None:
    solution = _solve_to(tmp_path, capsys, "pure_pair_c05.json")
    _rewrite(solution, lambda data: data.update(priors=[0.4, 0.6]))
    code, _, err = _run(capsys, "verify", str(FIXTURES / "pure_pair_c05.json"), str(solution), "--quiet")
    assert code == 3
    assert "error[invalid-priors]" in err


def test_malformed_json_reports_location(tmp_path: Path, capsys) -> None:
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "version": 1,\n  "states": [\n', encoding="utf-8")
    code, out, err = _run(capsys, "solve", str(bad), "--quiet")
    assert code == 2
    assert out == ""
    assert "error[parse-error]" in err
    assert f"{bad}:" in err
    assert "Traceback" not in err


def test_unknown_field_is_a_parse_error(tmp_path: Path, capsys) -> None:
    bad = tmp_path / "extra.json"
    bad.write_text(json.dumps({"version": 1, "states": [], "priors": [], "colour": "blue"}), encoding="utf-8")
    code, _, err = _run(capsys, "solve", str(bad), "--quiet")
    assert code == 2
    assert "colour" in err


def test_invalid_density_is_a_validation_error(tmp_path: Path, capsys) -> None:
    bad = tmp_path / "indefinite.json"
    payload = {
        "version": 1,
        "states": [{"density": [[1.5, 0.0], [0.0, -0.5]]}, {"density": [[0.5, 0.0], [0.0, 0.5]]}],
        "priors": [0.5, 0.5],
    }
    bad.write_text(json.dumps(payload), encoding="utf-8")
    code, _, err = _run(capsys, "solve", str(bad), "--quiet")
    assert code == 3
    assert "error[not-psd]" in err
    assert "states[0]" in err


def test_bad_solver_flag_is_a_validation_error(capsys) -> None:
    code, _, err = _run(capsys, "solve", str(FIXTURES / "pure_pair_c05.json"), "--tol", "-1", "--quiet")
    assert code == 3
    assert "tol" in err


def test_table1_csv(capsys) -> None:
    code, out, _ = _run(capsys, "table1", "--cos1", "0.4", "--cos2", "0.6", "--csv", "--quiet")
    assert code == 0
    frame = pd.read_csv(io.StringIO(out))
    assert len(frame) == 50
    assert list(frame.columns) == ["x", "region", "P", "P_Ra", "P_Ru", "eta1", "eta2", "P_sdp"]
    assert (frame["P_sdp"] - frame["P"]).abs().max() < 1e-6
    assert sorted(set(frame["region"])) == [1, 2, 3, 4, 5]


def test_table1_without_sdp_matches_golden(capsys) -> None:
    code, out, _ = _run(capsys, "table1", "--cos1", "0.4", "--cos2", "0.6", "--csv", "--no-sdp", "--quiet")
    assert code == 0
    frame = pd.read_csv(io.StringIO(out))
    golden = pd.read_csv(FIXTURES / "table1_c04_c06.csv")
    assert list(frame.columns) == list(golden.columns)
    assert frame["region"].tolist() == golden["region"].tolist()
    assert ((frame["P"] - golden["P"]).abs() < 1e-12).all()


def test_table1_needs_angles(capsys) -> None:
    code, _, _ = _run(capsys, "table1", "--cos1", "0.4", "--quiet")
    assert code == 3
    code, _, _ = _run(capsys, "table1", "--cos1", "0.6", "--cos2", "0.4", "--quiet")
    assert code == 3


@pytest.mark.parametrize(
    "fixture,segments",
    [("pure_pair_c05.json", 3), ("rank2_example.json", 5), ("orthogonal_pure_pair.json", 1)],
)
def test_scan_segments(capsys, fixture: str, segments: int) -> None:
    code, out, _ = _run(capsys, "scan", str(FIXTURES / fixture), "--eta-grid", "9", "--quiet")
    assert code == 0
    payload = json.loads(out)
    assert payload["segments"] == segments
    assert len(payload["rows"]) == 9
    for row in payload["rows"]:
        assert row["P_star"] <= row["upper_bound"] + 1e-7


def test_scan_workers_keep_grid_order(capsys) -> None:
    args = ["scan", str(FIXTURES / "pure_pair_c05.json"), "--eta-grid", "0.2,0.9,0.5", "--csv", "--quiet"]
    code, serial, _ = _run(capsys, *args)
    assert code == 0
    code, threaded, _ = _run(capsys, *args, "--workers", "3")
    assert code == 0
    first, second = pd.read_csv(io.StringIO(serial)), pd.read_csv(io.StringIO(threaded))
    assert first["eta1"].tolist() == [0.2, 0.9, 0.5]
    assert second["eta1"].tolist() == [0.2, 0.9, 0.5]
    assert (first["P_star"] - second["P_star"]).abs().max() < 1e-12


def test_bounds_and_canonical(capsys) -> None:
    code, out, _ = _run(capsys, "bounds", str(FIXTURES / "rank2_example.json"), "--quiet")
    assert code == 0
    bounds = json.loads(out)
    assert bounds["upper_bound"] == pytest.approx(0.5, abs=1e-10)
    assert bounds["breakpoints"] == pytest.approx([0.4, 0.6, 1.0 / 0.6, 2.5], abs=1e-9)
    assert bounds["middle_saturable"] is True

    code, out, _ = _run(capsys, "canonical", str(FIXTURES / "rank2_example.json"), "--quiet")
    assert code == 0
    canonical = json.loads(out)
    assert canonical["t"] == 2
    assert canonical["fidelity"] == pytest.approx(canonical["fidelity_direct"], abs=1e-8)
    assert max(canonical["residuals"].values()) < 1e-9
    assert canonical["support_intersection_dim"] == len(canonical["support_intersection"]) == 0

    code, out, _ = _run(capsys, "bounds", str(FIXTURES / "rank2_example.json"), "--csv", "--quiet")
    assert code == 0
    assert len(pd.read_csv(io.StringIO(out))) == 2


def _unpaired_problem(tmp_path: Path) -> Path:
    target = tmp_path / "unpaired.json"
    payload = {
        "version": 1,
        "states": [
            {"density": [[[0.5, 0.0], [0.2, 0.0]], [[0.2, 0.0], [0.5, 0.0]]]},
            {"density": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]},
        ],
        "priors": [0.5, 0.5],
    }
    target.write_text(json.dumps(payload), encoding="utf-8")
    return target


def test_bounds_use_projected_norms(tmp_path: Path, capsys) -> None:
    problem = _unpaired_problem(tmp_path)
    code, out, _ = _run(capsys, "bounds", str(problem), "--quiet")
    assert code == 0
    bounds = json.loads(out)
    assert bounds["per_pair"][0]["r"] == pytest.approx(0.5, abs=1e-10)
    assert bounds["upper_bound"] == pytest.approx(0.25, abs=1e-9)

    code, out, _ = _run(capsys, "solve", str(problem), "--quiet")
    assert code == 0
    record = json.loads(out)
    assert record["P_star"] == pytest.approx(0.25, abs=1e-6)
    assert record["bounds"]["comparison"]["gap_to_bound"] >= -1e-7

    code, out, _ = _run(capsys, "canonical", str(problem), "--quiet")
    assert code == 0
    canonical = json.loads(out)
    assert canonical["support_intersection_dim"] == len(canonical["support_intersection"]) == 1


def test_generate_writes_solvable_problem(tmp_path: Path, capsys) -> None:
    target = tmp_path / "generated.json"
    code, _, _ = _run(capsys, "generate", "--kind", "mixed", "--dim", "3", "--rank", "2", "--seed", "7", "--output", str(target), "--quiet")
    assert code == 0
    again = tmp_path / "again.json"
    _run(capsys, "generate", "--kind", "mixed", "--dim", "3", "--rank", "2", "--seed", "7", "--output", str(again), "--quiet")
    assert target.read_text(encoding="utf-8") == again.read_text(encoding="utf-8")

    code, out, _ = _run(capsys, "solve", str(target), "--quiet")
    assert code == 0
    assert json.loads(out)["status"] == "Optimal"


def test_solve_output_is_deterministic(capsys) -> None:
    outputs = []
    for _ in range(2):
        code, out, _ = _run(capsys, "solve", str(FIXTURES / "rank2_example.json"), "--quiet")
        assert code == 0
        record = json.loads(out)
        record.pop("wall_time")
        outputs.append(record)
    assert outputs[0] == outputs[1]
