"""
Tests for operators module.
"""

import random
from fractions import Fraction

import pytest

from fields import SymElement, Vertex, hopf_exp, star
from models import InapplicableCheck, ModelError, NonNilpotentError, ParityError, Truncation
from operators import (
    InteractingTheory, TensorWord, commutator_mod_locality, cutoff_compare, gns_gram, hermitian_check,
    hermitian_sides, interacting_eval, locality_defect, locality_generator, omega_tensor,
    renorm_covariance, s_matrix, unit_word,
)
from sampling import random_renormalization
from scalars import CouplingRing, I, is_zero
from uvgroup import Renormalization
from wick import CutPropagator, feynman_measure

TRUNC = Truncation(3, 8)


def phi(point="x", k=1):
    return SymElement.from_vertex(Vertex.of(point, {"phi": k}), truncation=TRUNC)


def one():
    return SymElement.one(TRUNC)


def group_like(element, coupling):
    """exp(i coupling element)"""
    return hopf_exp(element.scale(coupling).scale(I)).element


def lam():
    return CouplingRing(("lam",), 1).variable("lam")


@pytest.fixture
def spacelike_measure(sample_antichain):
    cut = CutPropagator.build(sample_antichain, [
        ("x", "phi", "x", "phi", 1),
        ("y", "phi", "y", "phi", 1),
        ("x", "phi", "y", "phi", Fraction(1, 2)),
        ("y", "phi", "x", "phi", Fraction(1, 2)),
    ])
    return feynman_measure(cut)


@pytest.fixture
def phi4_theory(sample_single_point_measure):
    ring = CouplingRing(("lam",), 1)
    lagrangian = phi(k=4).scale(ring.variable("lam") * Fraction(1, 24))
    return InteractingTheory(sample_single_point_measure, lagrangian)


class TestTensorWord:
    """Test word construction."""

    def test_positions(self):
        word = TensorWord.of([phi(k=2), one()])
        assert word.degree == 2
        assert word.factor_at(2) == phi(k=2)
        assert word.factor_at(1) == one()

    def test_star_reverses(self):
        word = TensorWord.of([phi(k=2), phi()])
        starred = word.star()
        assert starred.factors[0] == star(phi())
        assert starred.factors[1] == star(phi(k=2))

    def test_concat(self):
        word = unit_word(TRUNC) + TensorWord.of([phi(), phi()])
        assert word.degree == 4
        assert word.support() == {"x"}


class TestOmegaTensor:
    """Test the measure on even words (single point, Delta = 2)."""

    @pytest.mark.parametrize("factors,expected", [
        ([0, 0], 1),
        ([0, 2], 2),
        ([2, 0], -2),
        ([1, 1], -2),
        ([2, 2], -12),
        ([1, 0, 0, 1], -2),
        ([0, 0, 0, 4], 12),
    ])
    def test_monomial_words(self, sample_single_point_measure, factors, expected):
        word = TensorWord.of([phi(k=k) if k else one() for k in factors])
        assert omega_tensor(sample_single_point_measure, word) == expected

    def test_right_unit_word_is_measure(self, sample_single_point_measure):
        a = phi(k=4) + phi(k=2).scale(3)
        assert omega_tensor(sample_single_point_measure, TensorWord.of([one(), a])) == \
            sample_single_point_measure.evaluate(a)

    def test_odd_word_rejected(self, sample_single_point_measure):
        with pytest.raises(ParityError):
            omega_tensor(sample_single_point_measure, TensorWord.of([one()]))

    def test_twist_acts_on_factors(self, sample_single_point, sample_single_point_measure):
        rho = Renormalization(sample_single_point, {(Vertex.of("x", {"phi": 2}),): 3}, TRUNC)
        twisted = sample_single_point_measure.with_twist(rho)
        assert omega_tensor(twisted, TensorWord.of([one(), phi(k=2)])) == 5


class TestLocality:
    """Test commutators and locality generators."""

    def test_spacelike_commutator_vanishes(self, spacelike_measure):
        v = TensorWord.of([one(), phi("x")])
        w = TensorWord.of([one(), phi("y")])
        assert commutator_mod_locality(spacelike_measure, v, w) == 0

    def test_commutator_needs_spacelike_supports(self, sample_chain_measure):
        v = TensorWord.of([one(), phi("p0")])
        w = TensorWord.of([one(), phi("p1")])
        with pytest.raises(InapplicableCheck, match="not spacelike"):
            commutator_mod_locality(sample_chain_measure, v, w)

    def test_commutator_needs_even_context(self, spacelike_measure):
        v = TensorWord.of([one(), phi("x")])
        w = TensorWord.of([one(), phi("y")])
        with pytest.raises(InapplicableCheck, match="even length"):
            commutator_mod_locality(spacelike_measure, v, w, before=TensorWord.of([one()]))

    def test_generator_defect_vanishes(self, spacelike_measure):
        b = group_like(phi("y", 2), lam())
        d = group_like(phi("y").scale(3), lam())
        words = locality_generator(spacelike_measure.causal, phi("x"), b, phi("x"), d)
        assert is_zero(locality_defect(spacelike_measure, words))

    def test_generator_with_unit_d(self, spacelike_measure):
        b = group_like(phi("y"), lam())
        words = locality_generator(spacelike_measure.causal, phi("x"), b, phi("x"), one())
        assert is_zero(locality_defect(spacelike_measure, words))

    def test_generator_support_condition(self, sample_chain_measure):
        b = group_like(phi("p0"), lam())
        with pytest.raises(InapplicableCheck, match="support"):
            locality_generator(sample_chain_measure.causal, phi("p1"), b, phi("p1"), one())

    def test_generator_rejects_non_group_like_b(self, spacelike_measure):
        with pytest.raises(InapplicableCheck, match="B = .* is not group-like"):
            locality_generator(spacelike_measure.causal, phi("x"), phi("y"), phi("x"), one())

    def test_generator_rejects_non_group_like_d(self, spacelike_measure):
        b = group_like(phi("y"), lam())
        with pytest.raises(InapplicableCheck, match="D = .* is not group-like"):
            locality_generator(spacelike_measure.causal, phi("x"), b, phi("x"), one().scale(2))


class TestHermiticity:
    """Test Hermiticity and Gram matrices."""

    def test_hermitian_word(self, sample_single_point_measure):
        word = TensorWord.of([one(), phi(k=2)])
        lhs, rhs = hermitian_sides(sample_single_point_measure, word)
        assert lhs == rhs == 2
        assert hermitian_check(sample_single_point_measure, TensorWord.of([phi(k=2), phi(k=2)]))

    def test_gram_matrix(self, sample_single_point_measure):
        basis = [TensorWord.of([one(), one()]), TensorWord.of([one(), phi()])]
        report = gns_gram(sample_single_point_measure, basis)
        assert report.matrix == [[1, 0], [0, 2]]
        assert report.hermitian
        assert report.psd
        assert report.rank == 2

    def test_gram_rejects_odd_words(self, sample_single_point_measure):
        with pytest.raises(ParityError):
            gns_gram(sample_single_point_measure, [TensorWord.of([one()])])


class TestInteractingTheory:
    """Test the phi^4 theory on one point."""

    def test_non_local_lagrangian(self, spacelike_measure):
        ring = CouplingRing(("lam",), 1)
        lagrangian = (phi("x") * phi("y")).scale(ring.variable("lam"))
        with pytest.raises(ModelError, match="not local"):
            InteractingTheory(spacelike_measure, lagrangian)

    def test_non_nilpotent_lagrangian(self, sample_single_point_measure):
        with pytest.raises(NonNilpotentError):
            InteractingTheory(sample_single_point_measure, phi(k=4))

    def test_vacuum_expectation(self, phi4_theory):
        lam = CouplingRing(("lam",), 1).variable("lam")
        assert phi4_theory.measure.evaluate(phi4_theory.interaction()) == 1 + lam * I * Fraction(1, 2)

    def test_dressed_unit_word(self, phi4_theory):
        assert interacting_eval(phi4_theory, unit_word(TRUNC)) == 1

    def test_s_matrix(self, phi4_theory):
        s = s_matrix(phi4_theory)
        assert s.expectation() == phi4_theory.measure.evaluate(phi4_theory.interaction())
        assert s.matrix_element(s.unitarity_word()) == 1

    def test_cutoff_needs_a_hypothesis(self, phi4_theory):
        word = TensorWord.of([one(), phi()])
        with pytest.raises(InapplicableCheck):
            cutoff_compare(phi4_theory, {"x": 1}, {"x": 2}, word)

    def test_cutoff_equal_everywhere(self, phi4_theory):
        word = TensorWord.of([one(), phi(k=2)])
        reports = cutoff_compare(phi4_theory, {"x": 1}, {"x": 1}, word)
        assert [r.hypothesis for r in reports] == ['past', 'future']
        assert all(r.holds for r in reports)

    def test_covariance_rejects_degree_one(self, phi4_theory, sample_single_point):
        rho = Renormalization(sample_single_point, {(Vertex.of("x", {"phi": 2}),): 1}, TRUNC)
        with pytest.raises(ModelError, match="degree-1"):
            renorm_covariance(rho, phi4_theory, unit_word(TRUNC))

    def test_covariance_holds(self, phi4_theory, sample_single_point):
        key = (Vertex.of("x", {"phi": 2}), Vertex.of("x", {"phi": 4}))
        rho = Renormalization(sample_single_point, {key: Fraction(1, 2)}, TRUNC)
        report = renorm_covariance(rho, phi4_theory, TensorWord.of([one(), phi(k=2)]))
        assert report.holds
        assert report.lagrangian == phi4_theory.lagrangian
        assert report.factors_unchanged[0]

    @pytest.mark.parametrize("seed", [1, 2])
    def test_covariance_random_renormalization(self, phi4_theory, sample_single_point, seed):
        rho = random_renormalization(random.Random(seed), sample_single_point, TRUNC,
                                     min_degree=2, probability=0.3)
        report = renorm_covariance(rho, phi4_theory, TensorWord.of([one(), phi(k=2)]))
        assert report.holds, f"{report.lhs} != {report.rhs}"


class TestCutoff:
    """Test cutoff independence on the two-point chain."""

    @pytest.fixture
    def chain_theory(self, sample_chain_measure):
        lagrangian = (phi("p0", 2) + phi("p1", 2)).scale(lam() * Fraction(1, 2))
        return InteractingTheory(sample_chain_measure, lagrangian)

    def test_future_only(self, chain_theory):
        word = TensorWord.of([one(), phi("p1", 2)])
        reports = cutoff_compare(chain_theory, {"p0": 1, "p1": 1}, {"p0": 3, "p1": 1}, word)
        assert [r.hypothesis for r in reports] == ['future']
        assert reports[0].holds

    def test_past_only(self, chain_theory):
        word = TensorWord.of([one(), phi("p0", 2)])
        reports = cutoff_compare(chain_theory, {"p0": 1, "p1": 1}, {"p0": 1, "p1": 3}, word)
        assert [r.hypothesis for r in reports] == ['past']
        assert reports[0].holds
