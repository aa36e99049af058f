import argparse
import io
import json

import pytest

import config
from cli.arguments import assignments, build_parser
from main import run
from tests.conftest import SIX_GAUSSIAN, model_path

FACTS = "X=1,Y=10,Z=2"


def _run(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def _json(*argv):
    code, text = _run(*argv)
    return code, json.loads(text)


class TestArguments:
    def test_assignments(self):
        assert assignments("X=1, Y=-2.5e1") == {"X": 1.0, "Y": -25.0}

    @pytest.mark.parametrize("text", ["X", "X=", "1X=2", "X=1,X=2", "X=nan", "X=1+1"])
    def test_bad_assignments(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            assignments(text)

    def test_engine_flags(self):
        args = build_parser().parse_args(["query", "assoc", "m", "--target", "A,B", "--engine", "mc", "-n", "5"])
        assert (args.target, args.engine, args.n, args.seed) == (["A", "B"], "mc", 5, 0)


class TestValidate:
    def test_valid_model(self):
        code, doc = _json("validate", model_path("example6.scm.txt"))
        assert code == 0
        assert doc["version"] == "dsl-v1"
        assert doc["result"]["valid"] is True
        assert doc["result"]["order"] == ["Z", "X", "Y"]
        assert doc["result"]["parents"]["Y"] == ["X", "Z"]
        assert doc["result"]["finite_support"] is True

    def test_cyclic_model(self):
        code, doc = _json("validate", model_path("cyclic.scm.txt"))
        assert code == 1
        assert doc["error"]["code"] == "cycle_detected"
        assert doc["error"]["aggregate"] == "validation_failed"
        assert "result" not in doc

    def test_syntax_error(self, tmp_path):
        path = tmp_path / "broken.scm.txt"
        path.write_text("noise U ~ Normal(0, 1)\nvar V = U +\n")
        code, doc = _json("validate", str(path))
        assert code == 1
        assert doc["error"]["code"] == "syntax_error"
        assert doc["error"]["details"]["diagnostics"][0]["details"]["span"]["line"] == 2

    def test_overly_deep_expression(self, tmp_path):
        path = tmp_path / "long.scm.txt"
        path.write_text("noise U ~ Normal(0, 1)\nvar V = U" + " + 1" * 3000 + "\n")
        code, doc = _json("validate", str(path))
        assert code == 1
        assert doc["error"]["code"] == "syntax_error"

    def test_missing_model_file(self, tmp_path):
        code, text = _run("validate", str(tmp_path / "absent.scm.txt"))
        assert code == 2
        assert text == ""

    def test_model_from_stdin(self, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO(SIX_GAUSSIAN))
        code, doc = _json("validate", "-")
        assert code == 0
        assert doc["result"]["finite_support"] is False

    def test_text_format(self):
        code, text = _run("validate", model_path("cyclic.scm.txt"), "--format", "text")
        assert code == 1
        assert text.startswith("error [cycle_detected]")


class TestQueries:
    @pytest.mark.parametrize("x, y", [("0", 9.0), ("1", 10.0), ("2", 11.0)])
    def test_indiv(self, x, y):
        code, doc = _json("query", "indiv", model_path("example6.scm.txt"),
                          "--facts", FACTS, "--do", f"X={x}", "--target", "Y")
        assert code == 0
        assert doc["result"] == {"kind": "point", "value": {"Y": y}}
        assert doc["query"]["method"] == {"name": "exact"}
        assert doc["diagnostics"]["abduction"] == "deterministic"

    def test_indiv_text(self):
        code, text = _run("query", "indiv", model_path("example6.scm.txt"),
                          "--facts", FACTS, "--do", "X=0", "--target", "Y", "--format", "text")
        assert code == 0
        assert text.splitlines()[0] == "Y = 9"

    def test_ice(self):
        code, doc = _json("ice", model_path("example6.scm.txt"), "--facts", FACTS,
                          "--do1", "X=1", "--do2", "X=0", "--target", "Y")
        assert code == 0
        assert doc["result"]["mean_difference"] == {"Y": 1.0}

    def test_alternatives(self):
        code, doc = _json("alternatives", model_path("example6.scm.txt"), "--facts", FACTS,
                          "--vary", "X", "--values", "0,1,2", "--target", "Y")
        assert code == 0
        got = [(a["value"], a["result"]["value"]["Y"]) for a in doc["result"]["alternatives"]]
        assert got == [(0.0, 9.0), (1.0, 10.0), (2.0, 11.0)]

    def test_abduce(self):
        code, doc = _json("abduce", model_path("example6.scm.txt"), "--facts", FACTS)
        assert code == 0
        assert doc["result"] == {"kind": "deterministic", "u_star": {"U_Z": 2.0, "U_X": -1.0, "U_Y": 7.0}}

    def test_partial_facts_need_another_method(self):
        code, doc = _json("abduce", model_path("example6_gaussian.scm.txt"), "--facts", "X=1")
        assert code == 1
        assert doc["error"]["code"] == "partial_observation"

    def test_update_method(self):
        code, doc = _json("abduce", model_path("example6_gaussian.scm.txt"), "--facts", "X=1",
                          "--method", "update")
        assert code == 0
        assert doc["result"]["u_star"]["U_Z"] == pytest.approx(0.5, abs=1e-4)
        assert doc["diagnostics"]["unconstrained"] == ["U_Y"]

    def test_assoc_exact(self):
        code, doc = _json("query", "assoc", model_path("coins.scm.txt"), "--target", "A", "--evidence", "C=0")
        assert code == 0
        result = doc["result"]
        assert result["kind"] == "pmf"
        assert result["support"] == [[0.0], [1.0]]
        assert result["probs"][1] == pytest.approx(1 / 7)
        assert doc["diagnostics"]["engine"] == "exact"

    def test_zero_probability_evidence(self):
        code, doc = _json("query", "assoc", model_path("coins.scm.txt"), "--target", "A", "--evidence", "C=3")
        assert code == 1
        assert doc["error"]["code"] == "zero_probability_evidence"

    def test_do_is_reproducible(self):
        argv = ["query", "do", model_path("example6_gaussian.scm.txt"), "--target", "Y", "--do", "X=0",
                "-n", "5000", "--seed", "7"]
        first = _run(*argv)
        assert first == _run(*argv)
        doc = json.loads(first[1])
        assert doc["result"]["kind"] == "empirical"
        assert doc["result"]["n"] == 5000
        assert "samples" not in doc["result"]

    def test_ace(self):
        code, doc = _json("ace", model_path("coins.scm.txt"), "--target", "C", "--do1", "A=1", "--do2", "A=0")
        assert code == 0
        assert doc["result"]["mean_difference"]["C"] == pytest.approx(0.75)

    def test_sample_lines(self):
        code, text = _run("sample", model_path("example6.scm.txt"), "-n", "3")
        assert code == 0
        rows = [json.loads(line) for line in text.splitlines()]
        assert rows == [{"X": 1.0, "Y": 10.0, "Z": 2.0}] * 3

    def test_unknown_variable(self):
        code, doc = _json("query", "do", model_path("example6.scm.txt"), "--target", "Q", "--do", "X=0")
        assert code == 1
        assert doc["error"]["code"] == "unknown_variable"

    def test_malformed_environment_is_a_usage_error(self, monkeypatch, capsys):
        monkeypatch.setattr(config, "_malformed", ["SCM_ICI_WORKERS='x' (expected integer)"])
        code, text = _run("validate", model_path("example6.scm.txt"))
        assert code == 2
        assert text == ""
        assert "SCM_ICI_WORKERS" in capsys.readouterr().err

    def test_usage_errors(self):
        assert _run("query", "indiv", model_path("example6.scm.txt"), "--facts", "X", "--do", "X=0",
                    "--target", "Y")[0] == 2
        assert _run("query", "assoc", model_path("coins.scm.txt"), "--target", "A", "-n", "0")[0] == 2
        assert _run("frobnicate")[0] == 2
