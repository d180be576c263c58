"""
Causal Model
Finite model spacetimes: a point set with a causality preorder, per-point
field species, spacelike separation, past/future and support splitting.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

import networkx as nx

from models import ModelError

Point = str
SupportSet = FrozenSet[Point]


@dataclass
class PreorderReport:
    """Outcome of validating a raw causality relation"""
    valid: bool
    reflexivity_violations: List[Point] = field(default_factory=list)
    transitivity_violations: List[Tuple[Point, Point, Point]] = field(default_factory=list)
    antisymmetry_violations: List[Tuple[Point, Point]] = field(default_factory=list)

    def first_error(self) -> str:
        if self.reflexivity_violations:
            x = self.reflexivity_violations[0]
            return f"reflexivity violated: missing {x} <= {x}"
        if self.transitivity_violations:
            a, b, c = self.transitivity_violations[0]
            return f"transitivity violated by ({a}, {b}, {c}): {a} <= {b} <= {c} but not {a} <= {c}"
        if self.antisymmetry_violations:
            a, b = self.antisymmetry_violations[0]
            return f"antisymmetry violated: {a} <= {b} and {b} <= {a}"
        return ""


def validate_preorder(points: Sequence[Point],
                      relation: Iterable[Tuple[Point, Point]],
                      antisymmetric: bool = True) -> PreorderReport:
    """
    Check a raw relation (no closure applied) for the preorder axioms.

    Args:
        points: The point identifiers
        relation: Pairs (x, y) meaning x <= y
        antisymmetric: Also require a partial order

    Returns:
        PreorderReport listing every violation found
    """
    rel = set(relation)
    report = PreorderReport(valid=True)
    for x in points:
        if (x, x) not in rel:
            report.reflexivity_violations.append(x)
    for (a, b), (b2, c) in product(sorted(rel), sorted(rel)):
        if b == b2 and (a, c) not in rel:
            report.transitivity_violations.append((a, b, c))
    if antisymmetric:
        for a, b in sorted(rel):
            if a < b and (b, a) in rel:
                report.antisymmetry_violations.append((a, b))
    report.valid = not (report.reflexivity_violations
                        or report.transitivity_violations
                        or report.antisymmetry_violations)
    return report


@dataclass(frozen=True, eq=False)
class CausalSet:
    """Finite point set with a closed causality relation and field species"""
    points: Tuple[Point, ...]
    leq_pairs: FrozenSet[Tuple[Point, Point]]
    species: Mapping[Point, Tuple[str, ...]]
    allow_preorder: bool = False

    @classmethod
    def build(cls,
              points: Sequence[Point],
              order: Iterable[Tuple[Point, Point]] = (),
              species=("phi",),
              close: bool = True,
              allow_preorder: bool = False) -> "CausalSet":
        """
        Build and validate a causal set.

        Args:
            points: Point identifiers, in display order
            order: Pairs (x, y) meaning x <= y
            species: Species tuple shared by all points, or a mapping point -> species list
            close: Apply the reflexive transitive closure before validating
            allow_preorder: Accept distinct two-way-comparable points

        Returns:
            Validated CausalSet

        Raises:
            ModelError: unknown points or a violated preorder axiom
        """
        points = tuple(str(p) for p in points)
        if len(set(points)) != len(points):
            raise ModelError(f"points: duplicate point identifiers in {list(points)}")
        known = set(points)
        pairs = [(str(x), str(y)) for x, y in order]
        for x, y in pairs:
            if x not in known or y not in known:
                raise ModelError(f"order: pair ({x}, {y}) names an unknown point")

        if close:
            graph = nx.DiGraph()
            graph.add_nodes_from(points)
            graph.add_edges_from(pairs)
            closed = nx.transitive_closure(graph, reflexive=True)
            relation = set(closed.edges())
        else:
            relation = set(pairs)

        report = validate_preorder(points, relation, antisymmetric=not allow_preorder)
        if not report.valid:
            raise ModelError(f"order: {report.first_error()}")

        if isinstance(species, Mapping):
            per_point = {}
            for p in points:
                names = species.get(p)
                if not names:
                    raise ModelError(f"species: no species declared at point {p}")
                per_point[p] = tuple(str(s) for s in names)
        else:
            per_point = {p: tuple(str(s) for s in species) for p in points}
        return cls(points, frozenset(relation), per_point, allow_preorder)

    def check_point(self, x: Point) -> None:
        if x not in self.species:
            raise ModelError(f"unknown point: {x}")

    def leq(self, x: Point, y: Point) -> bool:
        self.check_point(x)
        self.check_point(y)
        return (x, y) in self.leq_pairs

    def is_spacelike(self, x: Point, y: Point) -> bool:
        """True iff neither x <= y nor y <= x."""
        return not self.leq(x, y) and not self.leq(y, x)

    def none_leq(self, a: Iterable[Point], b: Iterable[Point]) -> bool:
        """True iff no point of a is <= a point of b."""
        b = list(b)
        return not any(self.leq(x, y) for x in a for y in b)

    @cached_property
    def graph(self) -> nx.DiGraph:
        """The closed relation as a digraph without self-loops."""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.points)
        graph.add_edges_from((x, y) for x, y in self.leq_pairs if x != y)
        return graph

    def past_of(self, a: Iterable[Point]) -> SupportSet:
        """Points <= some point of a (a included)."""
        out = set()
        for x in a:
            self.check_point(x)
            out |= nx.ancestors(self.graph, x) | {x}
        return frozenset(out)

    def future_of(self, a: Iterable[Point]) -> SupportSet:
        out = set()
        for x in a:
            self.check_point(x)
            out |= nx.descendants(self.graph, x) | {x}
        return frozenset(out)

    def minimal_points(self, a: Iterable[Point]) -> SupportSet:
        a = set(a)
        return frozenset(x for x in a if not any(y != x and self.leq(y, x) for y in a))

    def causal_split(self, a: Iterable[Point]) -> Tuple[SupportSet, SupportSet]:
        """(non-minimal points, minimal points) of a support."""
        a = frozenset(a)
        minimal = self.minimal_points(a)
        return a - minimal, minimal

    def comparable_pairs(self) -> List[Tuple[Point, Point]]:
        """Distinct pairs comparable both ways (only possible for preorders)."""
        return [(x, y) for x, y in sorted(self.leq_pairs) if x < y and (y, x) in self.leq_pairs]

    def slots(self) -> List[Tuple[Point, str]]:
        """Every (point, species) field slot, in point then species order."""
        return [(p, s) for p in self.points for s in self.species[p]]

    def order_pairs(self) -> List[Tuple[Point, Point]]:
        """Strict relations x < y, for reports."""
        return sorted((x, y) for x, y in self.leq_pairs if x != y)

    def to_dict(self) -> Dict:
        return {
            'points': list(self.points),
            'order': [list(p) for p in self.order_pairs()],
            'species': {p: list(self.species[p]) for p in self.points},
            'allow_preorder': self.allow_preorder,
        }
