import numpy as np
import pytest

from dsl.parser import load_model
from scm.errors import (
    BadDistributionParams,
    CycleDetected,
    DuplicateName,
    InverseMismatch,
    NoiseCardinalityViolation,
    UnknownReference,
    UnknownVariable,
    ValidationFailed,
)
from scm.expr import evaluate_scalar
from scm.model import parents
from scm.validation import validate
from tests.conftest import MODELS


def _diagnostics(text: str):
    with pytest.raises(ValidationFailed) as info:
        load_model(text)
    return info.value.diagnostics


class TestStructure:
    def test_worked_example_order_and_parents(self, example6):
        assert example6.names == ["Z", "X", "Y"]
        assert example6.order == ("Z", "X", "Y")
        assert parents(example6, "Y") == {"X", "Z"}
        assert parents(example6, "Z") == set()
        assert example6.owner_of("U_X").name == "X"

    def test_order_follows_dependencies_not_declaration(self):
        scm = load_model("noise U ~ Normal(0, 1)\nnoise W ~ Normal(0, 1)\nvar Y = X + U\nvar X = W\n")
        assert scm.names == ["Y", "X"]
        assert scm.order == ("X", "Y")

    def test_ties_break_by_declaration(self):
        scm = load_model("noise U ~ Normal(0, 1)\nnoise W ~ Normal(0, 1)\nvar B = U\nvar A = W\n")
        assert scm.order == ("B", "A")

    def test_unknown_variable(self, example6):
        with pytest.raises(UnknownVariable):
            parents(example6, "Q")

    def test_finite_support(self, coins, six_gaussian):
        assert coins.is_finite_support
        assert coins.finite_variables == frozenset({"A", "B", "C"})
        assert coins.joint_state_bound() == 12
        assert not six_gaussian.is_finite_support
        assert six_gaussian.continuous_noises == ["U_Z", "U_X", "U_Y"]

    def test_mixed_model_finite_variables(self):
        scm = load_model(
            "noise U ~ Categorical(0, 1, 0.5, 0.5)\nnoise W ~ Normal(0, 1)\nnoise R ~ Point(1)\n"
            "var A = U\nvar B = A + W\nvar C = A * R\n"
        )
        assert scm.finite_variables == frozenset({"A", "C"})

    def test_revalidating_an_scm(self, coins):
        assert validate(coins) == coins


class TestDiagnostics:
    def test_cycle(self):
        (diagnostic,) = _diagnostics((MODELS / "cyclic.scm.txt").read_text())
        assert isinstance(diagnostic, CycleDetected)
        assert diagnostic.path == ["X", "Y", "X"]

    def test_self_loop(self):
        (diagnostic,) = _diagnostics("noise U ~ Normal(0, 1)\nvar X = X + U\n")
        assert isinstance(diagnostic, CycleDetected)
        assert diagnostic.path == ["X", "X"]

    def test_variable_without_noise(self):
        (diagnostic,) = _diagnostics("noise U ~ Normal(0, 1)\nvar A = U\nvar B = 2 * A\n")
        assert isinstance(diagnostic, NoiseCardinalityViolation)
        assert diagnostic.var == "B"

    def test_variable_with_two_noises(self):
        (diagnostic,) = _diagnostics("noise U ~ Normal(0, 1)\nnoise W ~ Normal(0, 1)\nvar A = U + W\n")
        assert isinstance(diagnostic, NoiseCardinalityViolation)
        assert "U, W" in diagnostic.reason

    def test_shared_noise(self):
        (diagnostic,) = _diagnostics("noise U ~ Normal(0, 1)\nvar A = U\nvar B = A + U\n")
        assert isinstance(diagnostic, NoiseCardinalityViolation)
        assert diagnostic.var == "B"
        assert "already belongs to 'A'" in diagnostic.reason

    def test_unused_noise(self):
        (diagnostic,) = _diagnostics("noise U ~ Normal(0, 1)\nnoise W ~ Normal(0, 1)\nvar A = U\n")
        assert isinstance(diagnostic, NoiseCardinalityViolation)
        assert diagnostic.var == "W"

    def test_unknown_reference(self):
        (diagnostic,) = _diagnostics("noise U ~ Normal(0, 1)\nvar A = U + Q\n")
        assert isinstance(diagnostic, UnknownReference)
        assert diagnostic.name == "Q"
        assert "line 2" in diagnostic.location

    @pytest.mark.parametrize("decl, fragment", [
        ("Normal(0, -1)", "stddev"),
        ("Normal(0, 0)", "stddev"),
        ("Uniform(1, 1)", "lo must be < hi"),
        ("Categorical(0, 1, 0.5, 0.6)", "sum to"),
        ("Categorical(0, 0, 0.5, 0.5)", "distinct"),
        ("Categorical(0, 1, 1.5, -0.5)", ">= 0"),
        ("Point(1, 2)", "1 argument"),
        ("Categorical(0, 1, 1)", "2k arguments"),
    ])
    def test_bad_distribution_params(self, decl, fragment):
        (diagnostic,) = _diagnostics(f"noise U ~ {decl}\nvar A = U\n")
        assert isinstance(diagnostic, BadDistributionParams)
        assert diagnostic.noise == "U"
        assert fragment in diagnostic.reason

    def test_duplicate_names(self):
        diagnostics = _diagnostics(
            "noise U ~ Normal(0, 1)\nnoise U ~ Normal(0, 2)\nnoise W ~ Normal(0, 1)\n"
            "var A = U\nvar A = W\n"
        )
        assert any(isinstance(d, DuplicateName) and d.name == "U" for d in diagnostics)
        assert any(isinstance(d, DuplicateName) and d.name == "A" for d in diagnostics)

    def test_variable_named_like_a_noise(self):
        diagnostics = _diagnostics("noise U ~ Normal(0, 1)\nvar U = U\n")
        assert any(isinstance(d, DuplicateName) for d in diagnostics)

    def test_every_violation_is_collected(self):
        diagnostics = _diagnostics(
            "noise U ~ Normal(0, -1)\nnoise W ~ Normal(0, 1)\nvar A = U + B\nvar B = A + W\n"
        )
        assert {d.code for d in diagnostics} == {"bad_distribution_params", "cycle_detected"}

    def test_aggregate_serialises_each_diagnostic(self):
        with pytest.raises(ValidationFailed) as info:
            load_model((MODELS / "cyclic.scm.txt").read_text())
        out = info.value.to_dict()
        assert out["code"] == "validation_failed"
        assert out["details"]["diagnostics"][0]["code"] == "cycle_detected"


class TestInverses:
    def test_declared_inverse_is_probed(self):
        (diagnostic,) = _diagnostics("noise U ~ Normal(0, 1)\nvar V = 2 * U\ninverse U = V\n")
        assert isinstance(diagnostic, InverseMismatch)
        assert diagnostic.var == "V"

    def test_inverse_may_only_use_the_variable_and_its_parents(self):
        (diagnostic,) = _diagnostics(
            "noise U ~ Normal(0, 1)\nnoise W ~ Normal(0, 1)\nvar A = W\nvar V = 2 * U\ninverse U = V / 2 + A\n"
        )
        assert isinstance(diagnostic, UnknownReference)
        assert diagnostic.name == "A"

    def test_inverse_for_undeclared_noise(self):
        (diagnostic,) = _diagnostics("noise U ~ Normal(0, 1)\nvar V = U\ninverse Q = V\n")
        assert isinstance(diagnostic, UnknownReference)
        assert diagnostic.name == "Q"

    def test_additive_inverse_is_derived(self, example6):
        inverse = example6.inverse_for("Y")
        assert evaluate_scalar(inverse, {"Y": 10.0, "X": 1.0, "Z": 2.0}) == 7.0

    def test_subtracted_noise(self):
        scm = load_model("noise U ~ Normal(0, 1)\nnoise W ~ Normal(0, 1)\nvar A = W\nvar B = 3 * A - U\n")
        inverse = scm.inverse_for("B")
        assert evaluate_scalar(inverse, {"A": 2.0, "B": 5.0}) == 1.0

    def test_non_additive_noise_has_no_inverse(self):
        scm = load_model("noise U ~ Normal(0, 1)\nvar V = 2 * U\n")
        assert scm.inverse_for("V") is None

    def test_declared_inverse_wins(self):
        scm = load_model("noise U ~ Normal(0, 1)\nvar V = 2 * U\ninverse U = V / 2\n")
        assert np.isclose(evaluate_scalar(scm.inverse_for("V"), {"V": 3.0}), 1.5)
