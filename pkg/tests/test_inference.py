import math

import numpy as np
import pytest

from inference.association import Exact, MonteCarlo, association_query, choose_engine
from inference.enumeration import (
    cpt_factors,
    enumerate_joint,
    enumerate_noise_posterior,
    noise_to_conditional,
    variable_supports,
)
from inference.factors import HEURISTICS, Factor, eliminate, product
from inference.results import Empirical, ExactPmf, PointResult, pmf_from_table
from inference.sampling import forward_batch, forward_sample, reproduces_facts, sample_noise
from dsl.parser import load_model
from scm.errors import (
    EvaluationError,
    InvalidQuery,
    NotFiniteSupport,
    SupportTooLarge,
    UnknownVariable,
    ZeroProbabilityEvidence,
)
from scm.expr import evaluate_scalar
from tests.model_factory import (
    FACTORY_SEED,
    condition_joint,
    joint_of,
    random_finite_models,
    random_linear_models,
    total_variation,
)

COINS_C = {-1.0: 0.0625, -0.5: 0.0625, 0.0: 0.4375, 0.5: 0.125, 1.0: 0.1875, 1.5: 0.0625, 2.0: 0.0625}


class TestFactors:
    def test_product_joins_on_shared_names(self):
        a = Factor(("A",), {(0.0,): 0.4, (1.0,): 0.6})
        b = Factor(("A", "B"), {(0.0, 0.0): 0.5, (0.0, 1.0): 0.5, (1.0, 1.0): 1.0})
        ab = a * b
        assert ab.scope == ("A", "B")
        assert ab.table == {(0.0, 0.0): 0.2, (0.0, 1.0): 0.2, (1.0, 1.0): 0.6}

    def test_marginalize_and_reduce(self):
        f = Factor(("A", "B"), {(0.0, 0.0): 0.2, (0.0, 1.0): 0.2, (1.0, 1.0): 0.6})
        assert f.marginalize(["A"]).table == pytest.approx({(0.0,): 0.2, (1.0,): 0.8})
        assert f.reduce({"B": 1.0}).table == {(0.0,): 0.2, (1.0,): 0.6}
        assert f.reduce({"B": 1.0}, keep=["B"]).scope == ("A", "B")

    def test_reorder(self):
        f = Factor(("A", "B"), {(0.0, 1.0): 1.0})
        assert f.reorder(["B", "A"]).table == {(1.0, 0.0): 1.0}
        with pytest.raises(ValueError):
            f.reorder(["A"])

    def test_duplicate_scope_rejected(self):
        with pytest.raises(ValueError):
            Factor(("A", "A"), {})

    def test_empty_product_is_unit(self):
        assert product([]).table == {(): 1.0}

    @pytest.mark.parametrize("heuristic", HEURISTICS)
    def test_elimination_matches_full_product(self, coins, heuristic):
        factors = cpt_factors(coins)
        reduced = eliminate(factors, ["A", "B"], heuristic, declaration=coins.names)
        expected = product(factors).marginalize(["A", "B"])
        assert reduced.scope == ("C",)
        for key, p in expected.table.items():
            assert reduced.table[key] == pytest.approx(p, abs=1e-15)

    def test_unknown_heuristic(self, coins):
        with pytest.raises(ValueError):
            eliminate(cpt_factors(coins), ["A"], "max-fill")


class TestEnumeration:
    def test_worked_example_joint_is_one_point(self, example6):
        joint = enumerate_joint(example6)
        assert joint.scope == ("Z", "X", "Y")
        assert joint.table == {(2.0, 1.0, 10.0): 1.0}

    def test_coins_joint_marginal(self, coins):
        joint = enumerate_joint(coins)
        assert math.isclose(joint.total(), 1.0)
        marginal = joint.marginalize(["A", "B"]).table
        assert {k[0]: v for k, v in marginal.items()} == pytest.approx(COINS_C)

    def test_noise_to_conditional(self, coins):
        f = noise_to_conditional(coins, "B", {"A": 0.0})
        assert f.table == {(1.0,): 0.5, (0.0,): 0.5}
        f = noise_to_conditional(coins, "C", {"A": 1.0, "B": 1.0})
        assert f.table == {(-0.5,): 0.25, (0.5,): 0.5, (1.5,): 0.25}

    def test_noise_to_conditional_needs_every_parent(self, coins):
        with pytest.raises(InvalidQuery):
            noise_to_conditional(coins, "C", {"A": 1.0})

    def test_guarded_branch_never_divides_by_zero(self, coins):
        assert noise_to_conditional(coins, "C", {"A": 0.0, "B": 0.0}).table == {(0.0,): 1.0}

    def test_variable_supports(self, coins):
        supports = variable_supports(coins)
        assert supports["A"] == [0.0, 1.0]
        assert supports["C"] == sorted(COINS_C)

    def test_continuous_noise_rejected(self, six_gaussian):
        with pytest.raises(NotFiniteSupport) as info:
            enumerate_joint(six_gaussian)
        assert info.value.noises == ["U_Z", "U_X", "U_Y"]

    def test_state_cap(self, coins):
        with pytest.raises(SupportTooLarge) as info:
            enumerate_joint(coins, cap=10)
        assert (info.value.size, info.value.cap) == (12, 10)

    def test_noise_posterior(self, coins):
        posterior = enumerate_noise_posterior(coins, {"C": 0.0})
        assert math.isclose(sum(posterior.values()), 1.0)
        p_a = sum(p for u, p in posterior.items() if u[0] == 1.0)
        assert p_a == pytest.approx(1 / 7)

    def test_noise_posterior_impossible_facts(self, coins):
        with pytest.raises(ZeroProbabilityEvidence):
            enumerate_noise_posterior(coins, {"C": 3.0})


class TestSampling:
    def test_forward_sample_worked_example(self, example6):
        assert forward_sample(example6, {"U_Z": 2.0, "U_X": -1.0, "U_Y": 7.0}) == {"Z": 2.0, "X": 1.0, "Y": 10.0}

    def test_same_seed_same_draws(self, six_gaussian):
        assert sample_noise(six_gaussian, 7, 5) == sample_noise(six_gaussian, 7, 5)
        assert sample_noise(six_gaussian, 7, 5) != sample_noise(six_gaussian, 8, 5)

    def test_zero_draws_rejected(self, six_gaussian):
        with pytest.raises(InvalidQuery):
            sample_noise(six_gaussian, 0, 0)

    def test_missing_noise_column(self, example6):
        with pytest.raises(InvalidQuery):
            forward_batch(example6, {"U_Z": np.zeros(2)})

    def test_evaluation_error_names_the_variable(self):
        scm = load_model("noise U ~ Categorical(0, 1, 0.5, 0.5)\nnoise W ~ Point(1)\nvar A = U\nvar B = W / A\n")
        with pytest.raises(EvaluationError) as info:
            forward_batch(scm, {"U": np.array([1.0, 0.0]), "W": np.ones(2)})
        assert info.value.var == "B"
        assert "division by zero" in info.value.cause

    def test_reproduces_facts(self, example6):
        u = {"U_Z": 2.0, "U_X": -1.0, "U_Y": 7.0}
        assert reproduces_facts(example6, u, {"Y": 10.0})
        assert not reproduces_facts(example6, u, {"Y": 11.0})

    def test_uniform_draws_average_to_the_midpoint(self):
        scm = load_model("noise U ~ Uniform(0, 1)\nvar V = U\n")
        draws = np.array([u["U"] for u in sample_noise(scm, 13, 100_000)])
        assert abs(draws.mean() - 0.5) <= 0.01
        assert draws.min() >= 0.0 and draws.max() <= 1.0

    def test_each_variable_regenerates_from_its_parents_and_noise(self):
        models = random_finite_models(count=10, seed=FACTORY_SEED + 8) + random_linear_models(count=3)
        for k, scm in enumerate(models):
            for u in sample_noise(scm, k, 10):
                values = forward_sample(scm, u)
                for var in scm.variables:
                    local = {p: values[p] for p in scm.parent_map[var.name]}
                    local[var.noise] = u[var.noise]
                    assert evaluate_scalar(var.expr, local) == values[var.name]


class TestExactAssociation:
    def test_coins_posterior(self, coins):
        result = association_query(coins, ["A"], {"C": 0.0}, Exact())
        assert isinstance(result, ExactPmf)
        assert result.prob(1.0) == pytest.approx(1 / 7, abs=1e-12)
        assert result.prob(0.0) == pytest.approx(6 / 7, abs=1e-12)

    def test_joint_targets_keep_requested_order(self, coins):
        result = association_query(coins, ["B", "A"], {}, Exact())
        assert result.targets == ("B", "A")
        assert result.as_dict() == pytest.approx({(b, a): 0.25 for a in (0.0, 1.0) for b in (0.0, 1.0)})

    def test_target_in_evidence_is_a_point_mass(self, coins):
        result = association_query(coins, ["A", "C"], {"A": 1.0}, Exact())
        assert set(result.marginal("A")) == {1.0}
        assert result.mean("C") == pytest.approx(0.5 * 1.0 + 0.5 * 0.5)

    def test_matches_direct_conditioning_on_random_models(self):
        rng = np.random.default_rng(FACTORY_SEED)
        for scm in random_finite_models(count=20):
            joint = joint_of(scm)
            names = scm.names
            target, observed = rng.choice(names, size=2, replace=False).tolist()
            values = sorted({key[names.index(observed)] for key in joint.table})
            evidence = {observed: float(rng.choice(values))}
            expected = condition_joint(joint, [target], evidence)
            for heuristic in HEURISTICS:
                result = association_query(scm, [target], evidence, Exact(order_heuristic=heuristic))
                got = result.as_dict()
                assert set(got) == set(expected)
                for key, p in expected.items():
                    assert abs(got[key] - p) <= 1e-12

    def test_zero_probability_evidence(self, coins):
        with pytest.raises(ZeroProbabilityEvidence):
            association_query(coins, ["A"], {"C": 3.0}, Exact())

    def test_exact_needs_finite_noise(self, six_gaussian):
        with pytest.raises(NotFiniteSupport):
            association_query(six_gaussian, ["Y"], {}, Exact())

    def test_cap_applies_to_conditional_tables(self, coins):
        with pytest.raises(SupportTooLarge):
            association_query(coins, ["C"], {}, Exact(cap=2))

    def test_bad_queries(self, coins):
        with pytest.raises(InvalidQuery):
            association_query(coins, [], {})
        with pytest.raises(UnknownVariable):
            association_query(coins, ["Q"], {})
        with pytest.raises(UnknownVariable):
            association_query(coins, ["A"], {"U_A": 1.0})
        with pytest.raises(InvalidQuery):
            association_query(coins, ["A"], {"C": float("nan")})

    def test_engine_choice(self, coins, six_gaussian):
        assert isinstance(choose_engine(coins), Exact)
        assert isinstance(choose_engine(six_gaussian), MonteCarlo)


class TestMonteCarloAssociation:
    def test_agrees_with_exact_on_finite_model(self, coins):
        exact = association_query(coins, ["C"], {}, Exact()).as_dict()
        mc = association_query(coins, ["C"], {}, MonteCarlo(n=100_000, seed=3))
        assert isinstance(mc, Empirical)
        assert total_variation(mc.pmf(), exact) < 0.01

    def test_matches_exact_on_random_models(self):
        rng = np.random.default_rng(FACTORY_SEED + 6)
        for k, scm in enumerate(random_finite_models(count=20)):
            joint = joint_of(scm)
            target, observed = rng.choice(scm.names, size=2, replace=False).tolist()
            column = joint.marginalize([n for n in scm.names if n != observed]).table
            # the likeliest value keeps enough draws for a tight comparison
            evidence = {observed: max(column, key=column.get)[0]}
            exact = association_query(scm, [target], evidence, Exact()).as_dict()
            mc = association_query(scm, [target], evidence, MonteCarlo(n=100_000, seed=k))
            assert total_variation(mc.pmf(), exact) <= 0.02, (k, target, evidence)


    def test_conditioning_on_atom_is_exact_match(self, coins):
        mc = association_query(coins, ["A"], {"C": 0.0}, MonteCarlo(n=100_000, seed=5))
        assert set(mc.column("A")) <= {0.0, 1.0}
        assert mc.mean("A") == pytest.approx(1 / 7, abs=0.01)

    def test_gaussian_conditional_mean(self, six_gaussian):
        mc = association_query(six_gaussian, ["Y"], {"X": 1.0}, MonteCarlo(n=200_000, seed=1, epsilon=0.05))
        # E[Y | X = 1] = 1 + E[Z | X = 1] = 1.5
        assert mc.mean("Y") == pytest.approx(1.5, abs=0.1)

    def test_unmatched_evidence(self, six_categorical):
        with pytest.raises(ZeroProbabilityEvidence):
            association_query(six_categorical, ["Y"], {"X": 100.0}, MonteCarlo(n=1000))

    def test_seeded_runs_repeat(self, six_gaussian):
        a = association_query(six_gaussian, ["Y"], {}, MonteCarlo(n=500, seed=11))
        b = association_query(six_gaussian, ["Y"], {}, MonteCarlo(n=500, seed=11))
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_workers_never_change_the_result(self, six_gaussian):
        serial = association_query(six_gaussian, ["X", "Y"], {}, MonteCarlo(n=4000, seed=2, shards=4, workers=1))
        threaded = association_query(six_gaussian, ["X", "Y"], {}, MonteCarlo(n=4000, seed=2, shards=4, workers=4))
        np.testing.assert_array_equal(serial.samples, threaded.samples)
        assert serial.n == 4000


class TestResults:
    def test_pmf_normalises_and_sorts(self):
        pmf = pmf_from_table(["A"], {(1.0,): 3.0, (0.0,): 1.0, (2.0,): 0.0})
        assert pmf.support == ((0.0,), (1.0,))
        assert pmf.probs == (0.25, 0.75)

    def test_pmf_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ExactPmf(("A",), ((0.0,),), (0.5,))

    def test_empirical_summary(self):
        result = Empirical.from_samples(["A"], np.array([0.0, 1.0, 2.0, 3.0]), np.array([1.0, 1.0, 1.0, 1.0]))
        assert result.mean("A") == pytest.approx(1.5)
        assert result.variance("A") == pytest.approx(1.25)
        assert result.to_dict()["summary"]["A"]["quantiles"]["q50"] == pytest.approx(1.5)
        assert "samples" in result.to_dict(include_samples=True)

    def test_empirical_rejects_all_zero_weights(self):
        with pytest.raises(ValueError):
            Empirical.from_samples(["A"], np.array([1.0]), np.array([0.0]))

    def test_point_result(self):
        assert PointResult({"Y": 9.0}).to_dict() == {"kind": "point", "value": {"Y": 9.0}}
