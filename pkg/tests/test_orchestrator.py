import numpy as np
import pytest

from abduction.methods import Exact, Mcmc, Rejection, Update
from abduction.results import Deterministic, Posterior
from dsl.parser import load_model
from inference.enumeration import enumerate_noise_posterior, variable_supports
from inference.results import Empirical, PointResult
from inference.sampling import forward_sample
from intervention.queries import intervention_query
from intervention.surgery import surgery
from orchestrator.ici_orchestrator import (
    IceRequest,
    IciOrchestrator,
    IndividualQuery,
    alternatives,
    ice,
    ici_query,
    indiv,
)
from scm.errors import InvalidQuery, PartialObservation, ZeroProbabilityEvidence
from tests.model_factory import FACTORY_SEED, joint_of, random_finite_models, total_variation


class TestWorkedExample:
    @pytest.mark.parametrize("x, y", [(0.0, 9.0), (1.0, 10.0), (2.0, 11.0)])
    def test_individual_response(self, example6, six_facts, x, y):
        result = ici_query(example6, IndividualQuery(six_facts, {"X": x}, ("Y",)))
        assert isinstance(result, PointResult)
        assert result.value == {"Y": y}

    def test_individual_effect(self, example6, six_facts):
        result = ice(example6, IceRequest(six_facts, ("Y",), {"X": 1.0}, {"X": 0.0}))
        assert result.mean_difference == {"Y": 1.0}
        assert result.kind == "point"

    def test_alternatives_share_one_abduction(self, example6, six_facts):
        results = alternatives(example6, six_facts, "X", [0.0, 1.0, 2.0], ["Y"])
        assert [(x, r.value["Y"]) for x, r in results] == [(0.0, 9.0), (1.0, 10.0), (2.0, 11.0)]

    def test_gaussian_prior_gives_the_same_answer(self, six_gaussian, six_facts):
        result = ici_query(six_gaussian, IndividualQuery(six_facts, {"X": 0.0}, ("Y", "Z")))
        assert result.value == {"Y": 9.0, "Z": 2.0}


class TestOrchestrator:
    def test_abduction_is_cached(self, example6, six_facts):
        orchestrator = IciOrchestrator(example6)
        first = orchestrator.abduce(six_facts, Exact())
        assert orchestrator.abduce(dict(reversed(list(six_facts.items()))), Exact()) is first
        assert orchestrator.mutilate({"X": 1.0}) is orchestrator.mutilate({"X": 1.0})

    def test_targets_must_not_be_intervened(self, example6, six_facts):
        with pytest.raises(InvalidQuery):
            ici_query(example6, IndividualQuery(six_facts, {"X": 0.0}, ("X",)))

    def test_evidence_on_a_deterministic_individual(self, example6, six_facts):
        q = IndividualQuery(six_facts, {"X": 0.0}, ("Y",), evidence={"Z": 2.0})
        assert ici_query(example6, q).value == {"Y": 9.0}
        q = IndividualQuery(six_facts, {"X": 0.0}, ("Y",), evidence={"Z": 3.0})
        with pytest.raises(ZeroProbabilityEvidence):
            ici_query(example6, q)

    def test_exact_abduction_errors_pass_through(self, example6):
        with pytest.raises(PartialObservation):
            ici_query(example6, IndividualQuery({"X": 1.0}, {"X": 0.0}, ("Y",)))

    def test_no_alternative_values(self, example6, six_facts):
        with pytest.raises(InvalidQuery):
            alternatives(example6, six_facts, "X", [], ["Y"])


class TestPosteriorIndividuals:
    def test_update_method(self, six_gaussian):
        result = ici_query(six_gaussian, IndividualQuery({"X": 1.0}, {"X": 0.0}, ("Y",), method=Update()))
        # u* = (0.5, 0.5, 0), so Y = 0 + 0.5 + 0
        assert result.value["Y"] == pytest.approx(0.5, abs=1e-4)

    def test_update_keeps_unobserved_coins_on_their_atoms(self):
        scm = load_model("noise U_A ~ Categorical(0, 1, 0.5, 0.5)\nnoise U_B ~ Categorical(0, 1, 0.5, 0.5)\n"
                         "var A = U_A\nvar B = U_B\n")
        result = ici_query(scm, IndividualQuery({"A": 1.0}, {"A": 0.0}, ("B",), method=Update()))
        assert result.value["B"] in {0.0, 1.0}

    def test_rejection_effect_is_paired(self, six_gaussian):
        r = IceRequest({"X": 1.0}, ("Y",), {"X": 1.0}, {"X": 0.0}, Rejection(n=500, epsilon=0.1), seed=3)
        result = ice(six_gaussian, r)
        assert isinstance(result.differences, Empirical)
        np.testing.assert_allclose(result.differences.column("Y"), 1.0, atol=1e-9)

    def test_rejection_response_distribution(self, six_gaussian):
        q = IndividualQuery({"X": 1.0}, {"X": 0.0}, ("Y",), method=Rejection(n=3000), seed=1)
        result = ici_query(six_gaussian, q)
        # Y = 0 + U_Z + U_Y with U_Z | X = 1 ~ N(0.5, 0.5) and U_Y ~ N(0, 1)
        assert result.mean("Y") == pytest.approx(0.5, abs=0.1)
        assert result.variance("Y") == pytest.approx(1.5, rel=0.15)

    def test_evidence_filters_propagated_draws(self, coins):
        # among individuals with C = 0 only (U_A, U_B, U_C) = (1, 0, -1) has A = 1
        q = IndividualQuery({"C": 0.0}, {"B": 1.0}, ("C",), evidence={"A": 1.0},
                            method=Rejection(n=4000), seed=2)
        result = ici_query(coins, q)
        assert set(result.column("C")) == {-0.5}

    def test_mcmc_method(self, coins):
        orchestrator = IciOrchestrator(coins)
        abduced = orchestrator.abduce({"C": 0.0}, Mcmc(n=2000), seed=5)
        assert isinstance(abduced, Posterior)
        assert abduced.diagnostics["chains"] == 1
        result = orchestrator.query(IndividualQuery({"C": 0.0}, {"A": 0.0}, ("B",), method=Mcmc(n=2000), seed=5))
        assert set(result.column("B")) <= {0.0, 1.0}

    def test_indiv_defaults_to_exact(self, example6, six_facts):
        assert isinstance(indiv(example6, six_facts), Deterministic)


def _propagated_mixture(scm, facts, do, target):
    """Exact answer: every posterior noise atom pushed through the mutilated model"""
    mutilated = surgery(scm, do)
    out = {}
    for atoms, p in enumerate_noise_posterior(scm, facts).items():
        value = forward_sample(mutilated, dict(zip(scm.noise_names, atoms)))[target]
        out[(value,)] = out.get((value,), 0.0) + p
    return out


class TestAgainstEnumeration:
    def test_posterior_queries_match_the_exact_mixture(self):
        rng = np.random.default_rng(FACTORY_SEED + 10)
        models = [m for m in random_finite_models(count=12, max_vars=4, seed=FACTORY_SEED + 11) if len(m.names) >= 3]
        for k, scm in enumerate(models):
            observed, intervened, target = rng.choice(scm.names, size=3, replace=False).tolist()
            column = joint_of(scm).marginalize([n for n in scm.names if n != observed]).table
            facts = {observed: max(column, key=column.get)[0]}
            do = {intervened: float(rng.choice(variable_supports(scm)[intervened]))}
            expected = _propagated_mixture(scm, facts, do, target)
            q = IndividualQuery(facts, do, (target,), method=Rejection(n=10_000), seed=k)
            result = ici_query(scm, q)
            assert total_variation(result.pmf(), expected) <= 0.02, (k, facts, do, target)

    def test_coins_posterior_query(self, coins):
        expected = _propagated_mixture(coins, {"C": 0.0}, {"A": 1.0}, "C")
        result = ici_query(coins, IndividualQuery({"C": 0.0}, {"A": 1.0}, ("C",), method=Rejection(n=10_000), seed=4))
        assert total_variation(result.pmf(), expected) <= 0.02

    @pytest.mark.parametrize("do", [{"X": 0.0}, {"Z": 5.0}, {"X": 3.0, "Z": -1.0}])
    def test_point_noise_population_is_one_individual(self, example6, do):
        population = intervention_query(example6, ["Y"], do).as_dict()
        forced = {"Z": 2.0, "X": 1.0, "Y": 10.0}
        exact = ici_query(example6, IndividualQuery(forced, do, ("Y",)))
        assert {(exact.value["Y"],): 1.0} == population
        sampled = ici_query(example6, IndividualQuery({"Z": 2.0}, do, ("Y",), method=Rejection(n=200), seed=1))
        assert sampled.pmf() == pytest.approx(population)
