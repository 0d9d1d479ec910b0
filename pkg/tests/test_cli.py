from __future__ import annotations

import json

import pytest

from curtainlab.cli import main

Q3 = {
    "vertices": ["000", "001", "010", "011", "100", "101", "110", "111"],
    "edges": [[a, b] for a in ["000", "001", "010", "011", "100", "101", "110", "111"]
              for b in ["000", "001", "010", "011", "100", "101", "110", "111"]
              if a < b and sum(x != y for x, y in zip(a, b)) == 1],
}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def payload(text: str) -> dict:
    doc = json.loads(text)
    doc.pop("manifest", None)
    return doc


@pytest.fixture
def q3_doc(tmp_path, capsys):
    src = tmp_path / "q3.json"
    src.write_text(json.dumps(Q3))
    built = tmp_path / "q3m.json"
    code, out, _ = run(capsys, "build", "--graph", str(src), "--out", str(built))
    assert code == 0
    assert json.loads(out) == {"dimension": 3, "guard": 3, "median_checked": True, "vertices": 8, "walls": 3}
    return built


def test_distance_query(q3_doc, capsys):
    code, out, _ = run(capsys, "query", str(q3_doc), "dist", "000", "111")
    assert code == 0 and payload(out) == {"distance": 3}


def test_walls_query(q3_doc, capsys):
    _, out, _ = run(capsys, "query", str(q3_doc), "walls", "000", "110")
    assert payload(out)["count"] == 2


def test_hull_and_gate_queries(q3_doc, capsys):
    _, out, _ = run(capsys, "query", str(q3_doc), "hull", "100", "010")
    assert payload(out) == {"members": ["000", "010", "100", "110"], "rounds": 1, "size": 4}
    _, out, _ = run(capsys, "query", str(q3_doc), "gate", "111", "000", "110")
    assert payload(out) == {"gate": "110", "hull_size": 4, "distance": 1}


def test_contact_export_formats(q3_doc, capsys):
    _, out, _ = run(capsys, "query", str(q3_doc), "contact", "--format", "edges", "--E", "1")
    assert sorted(out.split("\n")[:-1]) == ["0 1", "0 2", "1 2"]
    _, out, _ = run(capsys, "query", str(q3_doc), "contact", "--format", "dot", "--E", "1")
    assert out.startswith("graph contact {") and out.count("--") == 3


def test_unknown_vertex_exits_2(q3_doc, capsys):
    code, _, err = run(capsys, "query", str(q3_doc), "dist", "000", "222")
    assert code == 2 and json.loads(err)["error"] == "InputError"


def test_malformed_json_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": ["a", "b"],\n "edges": [["a", "b"]] "oops"}\n')
    code, _, err = run(capsys, "build", "--graph", str(bad))
    doc = json.loads(err)
    assert code == 2 and doc["error"] == "ParseError"
    assert (doc["line"], doc["column"]) == (2, 24)


def test_window_guard_reports_vertex(tmp_path, capsys):
    win = tmp_path / "z2.json"
    assert run(capsys, "build", "--preset", "z2", "--horizon", "6", "--out", str(win))[0] == 0
    code, out, _ = run(capsys, "query", str(win), "dist", "e", "x y")
    assert code == 0 and payload(out) == {"distance": 2}
    code, _, err = run(capsys, "query", str(win), "dist", "e", "x^3")
    assert code == 2 and json.loads(err)["vertex"] == "x³"


def test_product_query(tmp_path, capsys):
    win = tmp_path / "z2.json"
    run(capsys, "build", "--preset", "z2", "--horizon", "6", "--out", str(win))
    _, out, _ = run(capsys, "query", str(win), "product")
    prod = payload(out)["product"]
    assert prod is not None and prod["family_a"] and prod["family_b"]


def test_relations_command(capsys):
    code, out, _ = run(capsys, "relations", "--preset", "tof", "x", "y", "--length", "4")
    assert code == 0 and payload(out)["relator"] == "g1 g2 g1⁻¹ g2⁻¹"
    _, out, _ = run(capsys, "relations", "--preset", "free", "a", "b", "--length", "3")
    assert payload(out)["relator"] is None


def test_verify_suite_passes(capsys):
    code, out, _ = run(capsys, "verify", "curtain-axioms", "--random", "5")
    doc = payload(out)
    assert code == 0 and doc["passed"] and doc["failure_count"] == 0


def test_recipe_on_a_product_exits_0(tmp_path, capsys):
    win = tmp_path / "f2xz.json"
    run(capsys, "build", "--preset", "f2xz", "--horizon", "6", "--out", str(win))
    code, out, _ = run(capsys, "recipe", str(win))
    doc = payload(out)
    assert code == 0 and doc["product"] is not None and doc["certificate"] is None


def test_output_is_deterministic(tmp_path, capsys):
    runs = []
    for _ in range(2):
        _, out, _ = run(capsys, "build", "--preset", "tof", "--horizon", "4")
        runs.append(out)
    assert runs[0] == runs[1]


def test_out_file_matches_stdout(q3_doc, tmp_path, capsys):
    target = tmp_path / "dist.json"
    _, direct, _ = run(capsys, "query", str(q3_doc), "dist", "000", "011")
    run(capsys, "query", str(q3_doc), "dist", "000", "011", "--out", str(target))
    assert payload(target.read_text()) == payload(direct)


def test_system_document_feeds_the_axiom_sweeps(tmp_path, capsys):
    win, system = tmp_path / "tof.json", tmp_path / "tof-system.json"
    code, _, _ = run(capsys, "build", "--preset", "tof", "--horizon", "6", "--out", str(win),
                     "--system-out", str(system))
    assert code == 0
    stored = json.loads(system.read_text())["constants"]["lambda"]
    code, out, _ = run(capsys, "verify", "behrstock", str(system))
    doc = payload(out)
    assert code == 0 and doc["passed"] and doc["lam"] == stored
