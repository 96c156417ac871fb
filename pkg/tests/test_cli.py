import json

import pytest

from momentgraph.cli import main
from momentgraph.demazure import correspondence_product, identity_tuple
from momentgraph.fga import additive_context
from momentgraph.root_system import build_root_system
from momentgraph.sections import section_from_dict, section_tuple


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_graph_single_edge(capsys):
    code, out, _ = run(capsys, "graph", "--kind", "A", "--rank", "2", "--p", "1", "--q", "1")
    assert code == 0
    double = out.split("double:")[1].split("closure:")[0]
    assert "1 edges" in double
    assert "e -> s2  (0,1,-1)" in double
    assert "closure equals the parabolic graph" in out


def test_graph_full_flag_has_nine_edges(capsys):
    code, out, _ = run(capsys, "graph", "--kind", "A", "--rank", "2", "--p", "", "--format", "json")
    assert code == 0
    assert len(json.loads(out)["edges"]) == 9


def test_graph_strictly_smaller_closure(capsys):
    code, out, _ = run(capsys, "graph", "--kind", "B", "--rank", "2", "--p", "2", "--q", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["closed"] is False
    assert len(doc["closure"]["edges"]) < len(doc["parabolic"]["edges"])


def test_graph_dot(capsys):
    code, out, _ = run(capsys, "graph", "--kind", "A", "--rank", "2", "--p", "1", "--format", "dot")
    assert code == 0
    assert out.lstrip().startswith("digraph")


@pytest.mark.parametrize(
    "kind, rank, summary",
    [("A", 3, "64/64 pairs closed"), ("G", 2, "12/16 pairs closed")],
)
def test_closed_sweep(capsys, kind, rank, summary):
    code, out, _ = run(capsys, "closed", "--kind", kind, "--rank", str(rank), "--sweep")
    assert code == 0
    last = out.strip().splitlines()[-1]
    assert summary in last and last.endswith("all verdicts agree: True")


def test_closed_sweep_d4_agrees(capsys):
    code, out, _ = run(capsys, "closed", "--kind", "D", "--rank", "4", "--sweep")
    assert code == 0
    assert "agree=False" not in out
    assert out.strip().endswith("all verdicts agree: True")


def test_closed_single_pair(capsys):
    code, out, _ = run(capsys, "closed", "--kind", "B", "--rank", "2", "--q", "1", "--p", "2")
    assert code == 0
    assert "brute=False" in out and "agree=True" in out


def test_sections_basis(capsys):
    code, out, _ = run(capsys, "sections", "--kind", "A", "--rank", "2", "--p", "", "--basis", "2")
    assert code == 0
    assert "dimensions [1, 4, 9]" in out
    assert "ranks [1, 2, 2]" in out


def test_sections_basis_json(capsys):
    code, out, _ = run(capsys, "sections", "--kind", "A", "--rank", "1", "--p", "", "--basis", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["ranks"] == [1, 1]


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_sections_check_member_and_not(capsys, tmp_path):
    good = {"theta_q": [], "theta_p": [], "values": {"e": "0", "s1": "a1"}}
    bad = {"theta_q": [], "theta_p": [], "values": {"e": "0", "s1": "1"}}
    path = _write(tmp_path, "t.json", [good, bad])
    code, out, _ = run(capsys, "sections", "--kind", "A", "--rank", "1", "--p", "", "--check", path)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "global section: True"
    assert lines[1] == "A model member: True"
    assert lines[2].startswith("global section: False  violated edge e -> s1")
    assert lines[3].startswith("A model member: False")


def test_sections_check_cosets(capsys, tmp_path):
    doc = {"theta_q": [], "theta_p": [], "index": "cosets", "values": {"e": "a1", "s1": "-a1"}}
    code, out, _ = run(capsys, "sections", "--kind", "A", "--rank", "1", "--p", "", "--check", _write(tmp_path, "c.json", doc))
    assert code == 0
    assert out.strip() == "R model member: True"


def test_product_identity(capsys, tmp_path):
    ctx = additive_context(build_root_system("A", 1))
    c = section_tuple(ctx, "", "", [ctx.x_simple(1), ctx.zero], over_cosets=True)
    ident = identity_tuple(ctx, "")
    pb = _write(tmp_path, "b.json", ident.to_dict())
    pc = _write(tmp_path, "c.json", c.to_dict())
    code, out, _ = run(capsys, "product", "--kind", "A", "--rank", "1", "--format", "json", pb, pc)
    assert code == 0
    got = section_from_dict(ctx, json.loads(out))
    assert got == correspondence_product(c, ident)
    assert got.values == c.values


def test_config_file(capsys, tmp_path):
    cfg = _write(tmp_path, "cfg.json", {"kind": "A", "rank": 2, "p": "1", "q": "1"})
    code, out, _ = run(capsys, "graph", "--config", cfg)
    assert code == 0
    assert "double: 2 vertices, 1 edges" in out
    # flags override the file
    code, out, _ = run(capsys, "graph", "--config", cfg, "--p", "")
    assert "parabolic: 6 vertices" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["graph", "--kind", "X", "--rank", "2", "--p", ""],
        ["graph", "--q", "1,x"],
        ["nonsense"],
        ["sections", "--kind", "A", "--rank", "2", "--p", ""],
        ["graph", "--kind", "A", "--rank", "2", "--p", "7"],
        ["sections", "--kind", "A", "--rank", "1", "--p", "", "--check", "/nonexistent.json"],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["graph", "--kind", "A", "--rank", "9", "--p", ""],
        ["graph", "--kind", "G", "--rank", "3", "--p", ""],
    ],
)
def test_math_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("momentgraph:")


def test_output_is_deterministic(capsys):
    argv = ["sections", "--kind", "B", "--rank", "2", "--q", "1", "--p", "2", "--basis", "2"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest", "--seed", "3")
    assert code == 0
    assert out.count("PASS") == 7 and "FAIL" not in out
