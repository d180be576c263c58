"""
Tests for wick module.
"""

from fractions import Fraction

import pytest

from causal import CausalSet
from fields import SymElement, Vertex, make_key
from models import InapplicableCheck, ModelError, ScalarKind, Truncation
from scalars import ExactComplex
from wick import (
    CutPropagator, build_feynman_propagator, classify_measure, extend_propagator, feynman_from_measure,
    feynman_measure, gaussian_check, gaussian_sides, hermitian_ldl, pairing_sum, wick_key,
)

X = ("x", "phi")
P0 = ("p0", "phi")
P1 = ("p1", "phi")


def phi(point="x", k=1):
    return Vertex.of(point, {"phi": k})


class TestCutPropagator:
    """Test cut propagator tables and flags."""

    def test_duplicate_entry(self, sample_single_point):
        with pytest.raises(ModelError, match="listed twice"):
            CutPropagator.build(sample_single_point, [("x", "phi", "x", "phi", 1)] * 2)

    def test_undeclared_species(self, sample_single_point):
        with pytest.raises(ModelError, match="species psi"):
            CutPropagator.build(sample_single_point, [("x", "psi", "x", "phi", 1)])

    def test_unlisted_entries_are_zero(self, sample_antichain):
        cut = CutPropagator.build(sample_antichain, [("x", "phi", "x", "phi", 1)])
        assert cut.value(("x", "phi"), ("y", "phi")) == 0

    def test_flags(self, sample_single_point_measure):
        assert sample_single_point_measure.cut.flags() == {
            'local': True, 'symmetric': True, 'hermitian': True, 'positive': True,
        }

    def test_locality_violation(self, sample_antichain):
        cut = CutPropagator.build(sample_antichain, [
            ("x", "phi", "y", "phi", 1),
            ("y", "phi", "x", "phi", 2),
        ])
        assert not cut.is_local
        with pytest.raises(ModelError, match="not local"):
            build_feynman_propagator(cut)

    def test_timelike_asymmetry_is_local(self, sample_chain_measure):
        assert sample_chain_measure.cut.is_local
        assert not sample_chain_measure.cut.is_symmetric


class TestFeynmanPropagator:
    """Test time ordering."""

    def test_later_argument_first(self, sample_chain_measure):
        feynman = sample_chain_measure.feynman
        assert feynman.value(P0, P1) == 3
        assert feynman.value(P1, P0) == 3

    def test_diagonal_defaults_to_cut(self, sample_chain_measure):
        assert sample_chain_measure.feynman.diagonal()[("p0", ("phi", "phi"))] == 1

    def test_diagonal_override(self, sample_single_point):
        cut = CutPropagator.build(sample_single_point, [("x", "phi", "x", "phi", 2)])
        omega = feynman_measure(cut, {("x", ("phi", "phi")): 5})
        assert omega.evaluate_key((phi(k=2),)) == 5

    def test_diagonal_unknown_species(self, sample_single_point):
        cut = CutPropagator.build(sample_single_point, [("x", "phi", "x", "phi", 2)])
        with pytest.raises(ModelError, match="feynman_diagonal"):
            build_feynman_propagator(cut, {("x", ("phi", "chi")): 1})

    def test_two_way_comparable_points(self):
        causal = CausalSet.build(["a", "b"], [("a", "b"), ("b", "a")], allow_preorder=True)
        cut = CutPropagator.build(causal, [])
        with pytest.raises(ModelError, match="comparable both ways"):
            build_feynman_propagator(cut)


class TestWickSums:
    """Test Wick evaluation."""

    def test_pairing_count(self):
        assert pairing_sum((X,) * 4, lambda s, t: 1) == 3
        assert pairing_sum((X,) * 6, lambda s, t: 1) == 15
        assert pairing_sum((X,) * 3, lambda s, t: 1) == 0

    def test_single_point_values(self, sample_single_point_measure):
        feynman = sample_single_point_measure.feynman
        assert wick_key(feynman, (phi(k=4),)) == 12
        assert wick_key(feynman, make_key([phi(), phi()])) == 2
        assert wick_key(feynman, (Vertex.density("x"),)) == 1
        assert wick_key(feynman, (phi(),)) == 0

    def test_measure_is_linear(self, sample_single_point_measure):
        a = SymElement.from_vertex(phi(k=2)).scale(Fraction(1, 2)) + 3
        assert sample_single_point_measure.evaluate(a) == 4

    def test_extend_propagator(self, sample_chain_measure):
        cut = sample_chain_measure.cut
        assert extend_propagator(cut, [P1], [P0]) == 3
        assert extend_propagator(cut, [P0], [P1]) == 2
        assert extend_propagator(cut, [P0, P0], [P1]) == 0
        assert extend_propagator(cut, [], []) == 1

    def test_scalar_kind(self, sample_single_point_measure, sample_single_point, sample_regulator):
        assert sample_single_point_measure.scalar_kind == ScalarKind.EXACT
        cut = CutPropagator.build(sample_single_point, [("x", "phi", "x", "phi", 1)])
        omega = feynman_measure(cut, {("x", ("phi", "phi")): sample_regulator.pole(1)})
        assert omega.scalar_kind == ScalarKind.LAURENT

    def test_degree_two_restriction(self, sample_chain_measure):
        table = feynman_from_measure(sample_chain_measure)
        assert table[(P0, P1)] == 3
        assert table[(P0, P0)] == 1


class TestGaussianCondition:
    """Test the factorization of omega across causally ordered supports."""

    def test_holds_for_feynman_measure(self, sample_chain_measure):
        a = SymElement.from_vertex(phi("p1"))
        b = SymElement.from_vertex(phi("p0"))
        lhs, rhs = gaussian_sides(sample_chain_measure, a, b)
        assert lhs == rhs == 3

    def test_composite_fields(self, sample_chain_measure):
        a = SymElement.from_vertex(phi("p1", 2))
        b = SymElement.from_vertex(phi("p0", 2)) + SymElement.from_vertex(phi("p0"))
        assert gaussian_check(sample_chain_measure, a, b)

    def test_inapplicable_when_ordered_wrong_way(self, sample_chain_measure):
        a = SymElement.from_vertex(phi("p0"))
        b = SymElement.from_vertex(phi("p1"))
        with pytest.raises(InapplicableCheck):
            gaussian_sides(sample_chain_measure, a, b)


class TestClassification:
    """Test measure flags."""

    def test_single_point_flags(self, sample_single_point_measure):
        flags = classify_measure(sample_single_point_measure, Truncation(2, 4))
        assert flags.normalized
        assert flags.simple_operator
        assert not flags.normally_ordered
        assert 'normally_ordered' in flags.failures
        assert set(flags.to_dict()) == {
            'normalized', 'normally_ordered', 'simple_operator', 'hermitian', 'failures',
        }


class TestHermitianLDL:
    """Test exact positivity checks."""

    def test_positive_definite(self):
        result = hermitian_ldl([[2, 1], [1, 2]])
        assert result.hermitian
        assert result.psd
        assert result.rank == 2
        assert result.pivots == [2, Fraction(3, 2)]

    def test_indefinite(self):
        assert hermitian_ldl([[1, 2], [2, 1]]).psd is False

    def test_zero_pivot_with_nonzero_column(self):
        assert hermitian_ldl([[0, 1], [1, 0]]).psd is False

    def test_zero_matrix(self):
        result = hermitian_ldl([[0, 0], [0, 0]])
        assert result.psd
        assert result.rank == 0

    def test_not_hermitian(self):
        assert not hermitian_ldl([[1, 2], [3, 1]]).hermitian

    def test_complex_hermitian(self):
        i = ExactComplex(0, 1)
        result = hermitian_ldl([[1, i], [-i, 2]])
        assert result.hermitian
        assert result.psd
        assert result.rank == 2
