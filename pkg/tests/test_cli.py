import json

import pytest

from gl2g2 import cli


def run(argv):
    return cli.main(argv)


def test_classify_by_name(capsys, tmp_path):
    out = tmp_path / "cusp.json"
    rc = run(["classify", "--name", "cusp", "--json", str(out)])
    captured = capsys.readouterr()
    assert rc == 0
    assert "torsion type: W2+W4" in captured.out
    doc = json.loads(out.read_text())
    assert doc["fg"]["type_label"] == ["W2", "W4"]
    assert doc["admits_gl2_structure"] is True


def test_classify_report_schema(tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    out = tmp_path / "r.json"
    assert run(["classify", "--name", "submax", "--json", str(out)]) == 0
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, cli.REPORT_SCHEMA)
    assert doc["fg"]["lee_form_closed"] is True
    out2 = tmp_path / "r2.json"
    assert run(["classify", "--ode", "y", "--json", str(out2)]) == 0
    doc2 = json.loads(out2.read_text())
    jsonschema.validate(doc2, cli.REPORT_SCHEMA)
    assert doc2["admits_gl2_structure"] is False
    assert doc2["fg"] == {"applicable": False}


def test_classify_reports_are_byte_stable(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["classify", "--name", "trivial", "--seed", "7",
                "--json", str(a)]) == 0
    assert run(["classify", "--name", "trivial", "--seed", "7",
                "--json", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_classify_zero_rhs(capsys):
    rc = run(["classify", "--ode", "0"])
    captured = capsys.readouterr()
    assert rc == 0
    assert "torsion type: torsion-free" in captured.out


def test_classify_non_admitting_exit_zero(capsys):
    rc = run(["classify", "--ode", "y"])
    captured = capsys.readouterr()
    assert rc == 0
    assert "not applicable" in captured.out


def test_classify_parse_error_exit_2(capsys):
    assert run(["classify", "--ode", "1 + "]) == 2
    assert run(["classify", "--ode", "zz*3"]) == 2
    assert run(["classify", "--name", "none-such"]) == 2
    assert run(["classify"]) == 2
    assert run(["classify", "--ode", "0", "--name", "cusp"]) == 2


def test_papercheck_single_suite(capsys):
    rc = run(["papercheck", "--suite", "fg-types"])
    captured = capsys.readouterr()
    assert rc == 0
    assert "3/3 PASS" in captured.out
    assert captured.out.count("PASS") >= 3


def test_papercheck_unknown_suite(capsys):
    assert run(["papercheck", "--suite", "none-such"]) == 2


def test_papercheck_weights(capsys):
    rc = run(["papercheck", "--suite", "weights"])
    captured = capsys.readouterr()
    assert rc == 0
    assert "3/3 PASS" in captured.out


def test_catalog_lists_everything(capsys):
    rc = run(["catalog", "--list"])
    captured = capsys.readouterr()
    assert rc == 0
    for name in ("cusp", "submax", "trivial", "example2", "example4"):
        assert name in captured.out
    for name in ("flat", "example4_k3"):
        assert name in captured.out
    assert "cuspidal_sextic" in captured.out
