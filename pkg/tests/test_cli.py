from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from spectral_partitions import suites
from spectral_partitions.cli import EXIT_CAP, EXIT_ERROR, EXIT_PARSE, run
from spectral_partitions.formats import eigen_str


@pytest.fixture(autouse=True)
def quick_env(monkeypatch):
    monkeypatch.setenv("SPL_MULTISTARTS", "3")
    monkeypatch.delenv("SPL_SEED", raising=False)


def _write(tmp_path: Path, name: str, payload) -> str:
    target = tmp_path / name
    target.write_text(json.dumps(payload), encoding="utf-8")
    return str(target)


@pytest.fixture
def files(tmp_path):
    return {
        "path": _write(tmp_path, "path.json", {"vertices": 3, "edges": [[0, 1, 1.0], [1, 2, 2.0]]}),
        "triangle": _write(tmp_path, "triangle.json", {"vertices": 3, "edges": [[0, 1, 1], [1, 2, 1], [0, 2, 1]]}),
        "star": _write(tmp_path, "star.json", {"vertices": 5, "edges": [[0, k, 1.0] for k in range(1, 5)]}),
        "singletons": _write(tmp_path, "singletons.json", {"labels": [0, 1, 2]}),
        "negative": _write(tmp_path, "negative.json", {"negative_edges": [[0, 1], [1, 2], [0, 2]]}),
        "star_vector": _write(tmp_path, "vector.json", {"vector": [0, 1, 1, -1, -1]}),
    }


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_spectrum(files, capsys):
    assert run(["spectrum", files["path"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["negative_edges"] == []
    assert payload["eigenvalues"][1] == eigen_str(3 - math.sqrt(3))
    assert payload["simple"] == [True, True, True]


def test_spectrum_with_signature(files, capsys):
    assert run(["spectrum", files["triangle"], "--signature", files["negative"]]) == 0
    payload = _stdout_json(capsys)
    assert [float(v) for v in payload["eigenvalues"]] == pytest.approx([1.0, 1.0, 4.0])
    assert payload["simple"] == [False, False, True]


def test_nodal_with_vector_and_dot(files, tmp_path, capsys):
    dot = tmp_path / "nodal.dot"
    assert run(["nodal", files["star"], "--index", "2", "--vector", files["star_vector"], "--dot", str(dot)]) == 0
    payload = _stdout_json(capsys)
    assert payload["domain_count"] == 4
    assert payload["zero_vertices"] == [0]
    assert payload["deficiency"] is None
    assert dot.read_text(encoding="utf-8").startswith("// nodal domains")


def test_nodal_index_out_of_range(files, capsys):
    assert run(["nodal", files["path"], "--index", "4"]) == EXIT_PARSE
    assert json.loads(capsys.readouterr().err)["error"] == "ValueError"


def test_critical(files, capsys):
    assert run(["critical", files["triangle"], files["singletons"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["nu"] == 3
    assert payload["betti"] == 1
    (critical,) = payload["critical_points"]
    assert critical["eigen_index"] == 3
    assert critical["morse_index"] == 0
    assert critical["courant_sharp"] is True
    assert critical["edge_restoration"]["consistent"] is True
    assert payload["at_alpha"] is None


def test_critical_evaluates_a_given_alpha(files, tmp_path, capsys):
    alpha = _write(tmp_path, "alpha.json", {"alpha": {"0-1": 1.0, "0-2": 1.0, "1-2": 1.0}})
    assert run(["critical", files["triangle"], files["singletons"], "--alpha", alpha]) == 0
    at_alpha = _stdout_json(capsys)["at_alpha"]
    assert at_alpha["phi"] == ["4", "4", "4"]
    assert at_alpha["energy"] == "4"
    assert at_alpha["equipartition"] is True


def test_critical_rejects_an_alpha_missing_an_edge(files, tmp_path, capsys):
    alpha = _write(tmp_path, "alpha.json", {"alpha": {"0-1": 1.0, "0-2": 1.0}})
    assert run(["critical", files["triangle"], files["singletons"], "--alpha", alpha]) == EXIT_PARSE
    assert json.loads(capsys.readouterr().err)["error"] == "ParseError"


def test_enumerate_min_writes_to_out(files, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert run(["enumerate-min", files["path"], "--nu", "2", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["labels"] == [0, 1, 1]
    assert payload["nodal_attains_minimum"] is True


def test_enumerate_min_respects_the_vertex_cap(files, capsys):
    assert run(["enumerate-min", files["path"], "--nu", "2", "--cap-vertices", "2"]) == EXIT_CAP
    assert json.loads(capsys.readouterr().err)["error"] == "CapExceeded"


def test_lower_bound(files, capsys):
    assert run(["lower-bound", files["triangle"], files["singletons"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["equality_case"] is True
    assert payload["maximizer"] == [[0, 1], [0, 2], [1, 2]]
    assert payload["certificate"]["holds"] is True
    nodal = payload["nodal_equipartition"]
    assert nodal["labels"] == [0, 1, 2]
    assert nodal["energy"] == nodal["eigenvalue"] == "4"


def test_ghost_check(files, capsys):
    assert run(["ghost-check", files["triangle"], files["singletons"]]) == 0
    payload = _stdout_json(capsys)
    assert payload["verified"] is True
    assert payload["ghost_vertices"] == 6
    assert [float(v) for v in payload["pullback_spectrum"]] == pytest.approx([1.0, 1.0, 4.0])


def test_verify(capsys):
    assert run(["verify", "homology", "--seed", "0x2a", "--count", "3"]) == 0
    payload = _stdout_json(capsys)
    assert payload["seed"] == 42
    assert payload["passed"] is True


def test_verify_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setitem(suites.SUITES, "always-fails", lambda rng, profile: (False, {}))
    assert run(["verify", "always-fails", "--count", "2"]) == EXIT_ERROR
    captured = capsys.readouterr()
    assert json.loads(captured.out)["failures"] == 2
    assert json.loads(captured.err)["error"] == "SuiteFailed"


def test_malformed_json_is_a_parse_error(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    assert run(["spectrum", str(broken)]) == EXIT_PARSE
    assert json.loads(capsys.readouterr().err)["error"] == "ParseError"


def test_structural_errors_exit_with_one(tmp_path, capsys):
    graph = _write(tmp_path, "split.json", {"vertices": 4, "edges": [[0, 1, 1.0], [2, 3, 1.0]]})
    assert run(["spectrum", graph]) == EXIT_ERROR
    assert json.loads(capsys.readouterr().err)["error"] == "Disconnected"


def test_invalid_tolerance_flag(files, capsys):
    assert run(["spectrum", files["path"], "--tol-gap", "0"]) == EXIT_PARSE
    assert "gap_tol" in json.loads(capsys.readouterr().err)["message"]


def test_jitter_changes_weights_reproducibly(files, capsys):
    assert run(["spectrum", files["path"], "--jitter", "--seed", "5"]) == 0
    first = _stdout_json(capsys)
    assert run(["spectrum", files["path"], "--jitter", "--seed", "5"]) == 0
    assert _stdout_json(capsys) == first
    assert first["eigenvalues"][1] != eigen_str(3 - math.sqrt(3))
