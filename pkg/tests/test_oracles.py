"""
Tests for oracles module.
"""

import pytest
import sympy

from causal import CausalSet
from fields import Vertex, key_fields
from operators import anti_time_ordered
from oracles import (
    all_pairings, anti_time_ordered_pairings, double_factorial, naive_wick, phi4_moments, phi4_single_moment,
    single_point_word_value,
)
from scalars import from_sympy, to_sympy
from wick import CutPropagator, build_feynman_propagator, feynman_measure, wick_key

c, g = sympy.symbols("c g")


class TestPairings:
    """Test explicit pair partitions."""

    @pytest.mark.parametrize("n,expected", [(0, 1), (2, 1), (3, 0), (4, 3), (6, 15)])
    def test_count(self, n, expected):
        assert len(list(all_pairings(range(n)))) == expected

    def test_naive_wick_constant_weight(self):
        assert naive_wick(["a"] * 4, lambda s, t: c) == 3 * c ** 2

    def test_naive_wick_is_ordered(self):
        weights = {("a", "b"): 2, ("b", "a"): 5}
        assert naive_wick(["a", "b"], lambda s, t: weights[(s, t)]) == 2

    @pytest.mark.parametrize("n,expected", [(-1, 1), (0, 1), (1, 1), (5, 15), (7, 105)])
    def test_double_factorial(self, n, expected):
        assert double_factorial(n) == expected


class TestSinglePointClosedForms:
    """Test closed forms against hand values and the engine."""

    @pytest.mark.parametrize("positions,expected", [
        ([[], [2]], 2),
        ([[2], []], -2),
        ([[1], [1]], -2),
        ([[4]], 12),
        ([[3]], 0),
        ([[1], [], [], [1]], -2),
    ])
    def test_word_values(self, positions, expected):
        assert single_point_word_value(positions, 2) == expected

    def test_engine_agrees_on_monomials(self):
        causal = CausalSet.build(["x"])
        feynman = build_feynman_propagator(CutPropagator.build(causal, [("x", "phi", "x", "phi", 3)]))
        for n in range(0, 7):
            key = (Vertex.of("x", {"phi": n}),) if n else ()
            oracle = naive_wick(key_fields(key), lambda s, t: to_sympy(feynman.value(s, t)))
            assert wick_key(feynman, key) == from_sympy(oracle)

    def test_single_moment(self):
        assert phi4_single_moment(0, 1, 1, 1) == {0: 1, 1: 3 * sympy.I}

    def test_vacuum_moment_is_one(self):
        assert phi4_moments(0, 0, c, g, 2) == {0: 1}

    def test_two_factor_moment(self):
        moments = phi4_moments(0, 2, c, 1, 0)
        assert moments == {0: c}


def closed_form(omega, key):
    return from_sympy(anti_time_ordered_pairings(
        key_fields(key), len(key),
        lambda s, t: to_sympy(omega.cut.value(s, t)),
        lambda s, t: to_sympy(omega.feynman.value(s, t)),
    ))


class TestAntiTimeOrdered:
    """Test omega-bar against the anti-Feynman pairing sum."""

    @pytest.mark.parametrize("vertices, expected", [
        ([("p0", 1)], 0),
        ([("p0", 2)], -1),
        ([("p0", 0)], -1),
        ([("p0", 1), ("p1", 1)], 2),
        ([("p0", 1), ("p0", 1)], 1),
        ([("p0", 0), ("p1", 2)], 1),
    ])
    def test_hand_values(self, sample_chain_measure, vertices, expected):
        key = tuple(sorted(Vertex.of(p, {"phi": k}) if k else Vertex.density(p) for p, k in vertices))
        assert anti_time_ordered(sample_chain_measure, key) == expected
        assert closed_form(sample_chain_measure, key) == expected

    @pytest.mark.parametrize("vertices", [
        [("p0", 2), ("p1", 2)],
        [("p0", 1), ("p1", 1), ("p1", 2)],
        [("p0", 3), ("p1", 1)],
        [("p0", 0), ("p0", 2), ("p1", 2)],
    ])
    def test_engine_agrees(self, sample_chain_measure, vertices):
        key = tuple(sorted(Vertex.of(p, {"phi": k}) if k else Vertex.density(p) for p, k in vertices))
        assert anti_time_ordered(sample_chain_measure, key) == closed_form(sample_chain_measure, key)

    def test_spacelike_pair(self):
        causal = CausalSet.build(["x", "y"])
        cut = CutPropagator.build(causal, [
            ("x", "phi", "x", "phi", 2),
            ("y", "phi", "y", "phi", 2),
            ("x", "phi", "y", "phi", 5),
            ("y", "phi", "x", "phi", 5),
        ])
        omega = feynman_measure(cut)
        key = (Vertex.of("x", {"phi": 1}), Vertex.of("y", {"phi": 1}))
        assert anti_time_ordered(omega, key) == closed_form(omega, key) == 5
