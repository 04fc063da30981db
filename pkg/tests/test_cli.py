import io
import json
import subprocess
import sys

import pytest

from oracles import FIXTURES, load
from quivergbp import (Quiver, VertexPartition, build_simplification,
                       canonical_labelling, field_algebra, search_simplifications)
from quivergbp.cli import main
from quivergbp.dsl import parse
from quivergbp.emit import emit_dot, emit_report, report_to_json

A2 = "algebra A2 { vertices 1 2; arrow a: 1 -> 2; }\n"


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def a2_file(tmp_path):
    path = tmp_path / "a2.alg"
    path.write_text(A2)
    return path


# ---------- emitters ----------

def test_dot_for_a_chain():
    q = Quiver.build("12", [("a", "1", "2")])
    assert emit_dot(q, "A2") == ('digraph "A2" {\n  rankdir=LR;\n  "1";\n  "2";\n'
                                 '  "1" -> "2" [label="a"];\n}\n')


def test_dot_for_the_fan_quotient():
    fan = load("fan.alg").algebras["Fan"]
    z = canonical_labelling(fan.quiver, VertexPartition.parse("1,2|3|4,5,6"))
    dot = emit_dot(z.target)
    assert dot.count(" -> ") == 3
    assert [line.strip() for line in dot.splitlines()[2:5]] == ['"1.2";', '"3";', '"4.5.6";']
    assert dot.count('"1.2" -> "3"') == 2


def test_dot_labels_for_a_built_gbp():
    a = load("square.alg").algebras["Zero"]
    g = build_simplification(a, canonical_labelling(a.quiver, VertexPartition.parse("1|2,3|4")))
    dot = emit_dot(g, "S")
    assert 'label="k (1)"' in dot and 'label="k² (2.3)"' in dot and 'label="k (4)"' in dot


def test_report_json_for_a2():
    a = parse(A2).algebras["A2"]
    data = report_to_json(search_simplifications(a), a)
    assert data["format"] == 1
    assert data["simplifiable"] is False and data["partitions_examined"] == 2
    assert list(data) == ["format", "input", "vertex_order", "partitions_examined",
                          "coherent_partitions", "results", "simplifiable", "diagnostics"]
    assert [sorted(r) for r in data["results"]][0] == sorted(
        ["partition", "rgs", "labelling", "trivial", "equivalent_to", "gamma", "family",
         "relations_I"])


def test_report_for_a_point():
    a = field_algebra()
    data = report_to_json(search_simplifications(a), a)
    assert len(data["results"]) == 1 and data["results"][0]["trivial"]
    assert "simplifiable: no" in emit_report(search_simplifications(a), a, "text")


# ---------- commands ----------

def test_check(a2_file):
    code, out = run("check", FIXTURES / "expansion.gbp")
    assert code == 0 and "gbp L: valid" in out
    code, out = run("check", a2_file)
    assert code == 0 and "admissible (J^2 in I)" in out


def test_check_reports_invalid_blocks(tmp_path):
    path = tmp_path / "bad.gbp"
    path.write_text("algebra F { vertices 1; arrow t: 1 -> 1; }\n"
                    "gbp G { quiver { vertices 1; } assign 1 = F; }\n")
    code, out = run("check", path)
    assert code == 3 and "algebra F: inconclusive" in out and "gbp G: invalid" in out


def test_expand_formats():
    code, text = run("expand", FIXTURES / "expansion.gbp", "--gbp", "L")
    assert code == 0
    expanded = parse(text).algebras["L_expanded"]
    assert len(expanded.quiver.arrows) == 11 and len(expanded.relations) == 7
    code, js = run("expand", FIXTURES / "expansion.gbp", "--gbp", "L", "--format", "json")
    data = json.loads(js)
    assert data["arrow_origin"]["beta__2__1"] == {"copy_of": "beta", "from": "2", "to": "1"}
    code, dot = run("expand", FIXTURES / "expansion.gbp", "--gbp", "L", "--format", "dot")
    assert dot.count(" -> ") == 11


def test_simplify_command():
    fan = FIXTURES / "fan.alg"
    code, text = run("simplify", fan, "--algebra", "Fan", "--partition", "1,2|3|4,5,6")
    assert code == 0 and "gbp Fan_simplified" in text
    g = parse(text).gbps["Fan_simplified"]
    assert len(g.gamma.vertices) == 3
    code, js = run("simplify", fan, "--algebra", "Fan", "--partition", "1,2|3|4,5,6",
                   "--labelling", "1", "--format", "json")
    assert code == 3 and "clause (3)" in js
    code, _ = run("simplify", fan, "--algebra", "Fan", "--partition", "1,2|3|4,5,6",
                  "--labelling", "9")
    assert code == 1


def test_simplify_rejects_incompatible_or_incoherent():
    sq = FIXTURES / "square.alg"
    code, out = run("simplify", sq, "--algebra", "Comm", "--partition", "1|2,3|4")
    assert code == 3 and "clause (1)" in out
    code, out = run("simplify", sq, "--algebra", "Comm", "--partition", "1,2|3|4")
    assert code == 3 and "not coherent" in out
    code, _ = run("simplify", sq, "--algebra", "Comm", "--partition", "1,2|3")
    assert code == 1


def test_search_and_dim(a2_file):
    code, js = run("search", a2_file, "--algebra", "A2")
    data = json.loads(js)
    assert code == 0 and not data["simplifiable"] and data["partitions_examined"] == 2
    code, js = run("search", FIXTURES / "fan.alg", "--algebra", "Fan")
    data = json.loads(js)
    assert data["simplifiable"]
    assert [["1", "2"], ["3"], ["4", "5", "6"]] in [r["partition"] for r in data["results"]]
    assert run("dim", FIXTURES / "square.alg", "--algebra", "Zero") == (0, "8\n")


def test_dot_command():
    code, dot = run("dot", FIXTURES / "expansion.gbp", "--target", "L")
    assert code == 0 and 'label="S2 (2)"' in dot
    code, dot = run("dot", FIXTURES / "square.alg", "--target", "Comm")
    assert code == 0 and dot.count(" -> ") == 4


def test_exit_codes(tmp_path, capsys):
    assert run()[0] == 1
    assert run("frobnicate")[0] == 1
    assert run("dim", tmp_path / "missing.alg", "--algebra", "A")[0] == 1
    broken = tmp_path / "broken.alg"
    broken.write_text("algebra A { vertices 1\n")
    assert run("dim", broken, "--algebra", "A")[0] == 2
    assert "broken.alg:2:1: syntax error" in capsys.readouterr().err
    cyclic = tmp_path / "cyclic.alg"
    cyclic.write_text("algebra C { vertices 1; arrow t: 1 -> 1; }\n")
    assert run("dim", cyclic, "--algebra", "C")[0] == 3
    assert run("search", FIXTURES / "fan.alg", "--algebra", "Fan", "--max-vertices", "4")[0] == 4
    assert run("dot", FIXTURES / "fan.alg", "--target", "Nope")[0] == 1


def test_outputs_are_byte_stable():
    commands = [("search", FIXTURES / "fan.alg", "--algebra", "Fan"),
                ("expand", FIXTURES / "expansion.gbp", "--gbp", "L", "--format", "json"),
                ("dot", FIXTURES / "expansion.gbp", "--target", "L")]
    for cmd in commands:
        assert run(*cmd) == run(*cmd)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "quivergbp", "dim", str(FIXTURES / "square.alg"),
                          "--algebra", "Zero"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "8\n"

