"""
Tests for causal module.
"""

import pytest

from causal import CausalSet, validate_preorder
from models import ModelError


class TestBuild:
    """Test building and validating causal sets."""

    def test_closure_adds_transitive_pairs(self, sample_chain):
        assert sample_chain.leq("a", "c")
        assert sample_chain.leq("b", "b")
        assert not sample_chain.leq("c", "a")

    def test_unclosed_relation_rejected(self):
        with pytest.raises(ModelError, match="transitivity violated"):
            CausalSet.build(
                ["a", "b", "c"],
                [("a", "a"), ("b", "b"), ("c", "c"), ("a", "b"), ("b", "c")],
                close=False,
            )

    def test_missing_reflexive_pair_rejected(self):
        with pytest.raises(ModelError, match="reflexivity"):
            CausalSet.build(["a"], [], close=False)

    def test_cycle_rejected_without_preorder(self):
        with pytest.raises(ModelError, match="antisymmetry"):
            CausalSet.build(["a", "b"], [("a", "b"), ("b", "a")])

    def test_cycle_accepted_as_preorder(self):
        causal = CausalSet.build(["a", "b"], [("a", "b"), ("b", "a")], allow_preorder=True)
        assert causal.comparable_pairs() == [("a", "b")]

    def test_unknown_point(self):
        with pytest.raises(ModelError, match="unknown point"):
            CausalSet.build(["a"], [("a", "z")])

    def test_duplicate_points(self):
        with pytest.raises(ModelError, match="duplicate"):
            CausalSet.build(["a", "a"])

    def test_species_mapping(self):
        causal = CausalSet.build(["x", "y"], species={"x": ["phi", "psi"], "y": ["phi"]})
        assert causal.slots() == [("x", "phi"), ("x", "psi"), ("y", "phi")]

    def test_species_mapping_missing_point(self):
        with pytest.raises(ModelError, match="no species"):
            CausalSet.build(["x", "y"], species={"x": ["phi"]})


class TestValidatePreorder:
    """Test the raw relation report."""

    def test_valid_partial_order(self):
        report = validate_preorder(["a", "b"], [("a", "a"), ("b", "b"), ("a", "b")])
        assert report.valid
        assert report.first_error() == ""

    def test_lists_every_violation(self):
        report = validate_preorder(["a", "b", "c"], [("a", "b"), ("b", "c")])
        assert not report.valid
        assert report.reflexivity_violations == ["a", "b", "c"]
        assert ("a", "b", "c") in report.transitivity_violations


class TestQueries:
    """Test spacelike separation, past/future and support splitting."""

    def test_spacelike(self, sample_diamond, sample_antichain):
        assert sample_diamond.is_spacelike("left", "right")
        assert not sample_diamond.is_spacelike("bottom", "top")
        assert sample_antichain.is_spacelike("x", "y")

    def test_point_is_not_spacelike_to_itself(self, sample_single_point):
        assert not sample_single_point.is_spacelike("x", "x")

    def test_none_leq(self, sample_diamond):
        assert sample_diamond.none_leq(["top"], ["left", "right"])
        assert not sample_diamond.none_leq(["bottom"], ["top"])
        assert sample_diamond.none_leq([], ["top"])

    def test_past_and_future(self, sample_diamond):
        assert sample_diamond.past_of(["left"]) == {"bottom", "left"}
        assert sample_diamond.future_of(["left"]) == {"left", "top"}
        assert sample_diamond.past_of(["top"]) == set(sample_diamond.points)

    def test_closure_graph(self, sample_chain):
        assert set(sample_chain.graph.edges) == {("a", "b"), ("b", "c"), ("a", "c")}
        assert sample_chain.past_of(["c"]) == {"a", "b", "c"}
        assert sample_chain.future_of(["a", "b"]) == {"a", "b", "c"}
        assert sample_chain.future_of([]) == frozenset()

    def test_past_of_unknown_point(self, sample_chain):
        with pytest.raises(ModelError, match="unknown point"):
            sample_chain.past_of(["nowhere"])

    def test_minimal_points_and_split(self, sample_diamond):
        support = ["left", "right", "top"]
        assert sample_diamond.minimal_points(support) == {"left", "right"}
        rest, minimal = sample_diamond.causal_split(support)
        assert rest == {"top"}
        assert minimal == {"left", "right"}

    def test_unknown_point_query(self, sample_chain):
        with pytest.raises(ModelError, match="unknown point"):
            sample_chain.leq("a", "nowhere")

    def test_to_dict(self, sample_chain):
        data = sample_chain.to_dict()
        assert data['points'] == ["a", "b", "c"]
        assert data['order'] == [["a", "b"], ["a", "c"], ["b", "c"]]
        assert data['species'] == {"a": ["phi"], "b": ["phi"], "c": ["phi"]}
        assert data['allow_preorder'] is False
