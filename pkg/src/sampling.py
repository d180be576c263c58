"""
Random Models
Seeded generators of causal sets, propagators, field-algebra elements,
renormalizations and tensor words for the randomized check suites.
Every generator takes an explicit random.Random.
"""

import random
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from causal import CausalSet
from fields import SymElement, SymKey, Vertex, hopf_exp, make_key, vertices_at
from models import Truncation
from operators import TensorWord
from scalars import CouplingRing, ExactComplex, Scalar
from uvgroup import Renormalization, single_point_keys
from wick import CutPropagator, FeynmanPropagator


def random_fraction(rng: random.Random, bound: int = 3, nonzero: bool = False) -> Fraction:
    while True:
        value = Fraction(rng.randint(-bound, bound), rng.choice((1, 1, 2, 3)))
        if value or not nonzero:
            return value


def random_exact(rng: random.Random, complex_: bool = False, nonzero: bool = False) -> ExactComplex:
    while True:
        value = ExactComplex(random_fraction(rng), random_fraction(rng) if complex_ else 0)
        if not nonzero or not value.is_zero():
            return value


def random_causal_set(rng: random.Random, n_points: int, species: Sequence[str] = ("phi",),
                      density: float = 0.4) -> CausalSet:
    """Random partial order on p0..p{n-1}; edges only go from lower to higher index."""
    points = [f"p{i}" for i in range(n_points)]
    order = [(points[i], points[j]) for i, j in combinations(range(n_points), 2) if rng.random() < density]
    return CausalSet.build(points, order, tuple(species))


def chain(n_points: int, species: Sequence[str] = ("phi",)) -> CausalSet:
    points = [f"p{i}" for i in range(n_points)]
    return CausalSet.build(points, list(zip(points, points[1:])), tuple(species))


def random_local_cut(rng: random.Random, causal: CausalSet, hermitian: bool = False,
                     positive: bool = False) -> CutPropagator:
    """
    Local cut propagator: symmetric on spacelike and coincident pairs.

    hermitian makes it Hermitian as well; positive builds a real Gram matrix.
    """
    slots = causal.slots()
    if positive:
        vectors = {s: [rng.randint(-2, 2) for _ in range(len(slots))] for s in slots}
        entries = []
        for s in slots:
            for t in slots:
                value = sum(a * b for a, b in zip(vectors[s], vectors[t]))
                entries.append((s[0], s[1], t[0], t[1], value))
        return CutPropagator.build(causal, entries)

    table: Dict[Tuple, Scalar] = {}
    for i, s in enumerate(slots):
        for t in slots[i:]:
            symmetric = s[0] == t[0] or causal.is_spacelike(s[0], t[0])
            if symmetric:
                value = random_exact(rng, complex_=not hermitian)
                table[(s, t)] = table[(t, s)] = value
            elif hermitian:
                value = random_exact(rng, complex_=True)
                table[(s, t)] = value
                table[(t, s)] = value.conjugate()
            else:
                table[(s, t)] = random_exact(rng, complex_=True)
                table[(t, s)] = random_exact(rng, complex_=True)
    return CutPropagator.build(causal, [(s[0], s[1], t[0], t[1], v) for (s, t), v in table.items()])


def random_invariant_cut(rng: random.Random, causal: CausalSet,
                         permutation: Mapping[str, str]) -> CutPropagator:
    """Local cut propagator unchanged by a point permutation that keeps species."""
    table: Dict[Tuple, Scalar] = {}
    slots = causal.slots()
    for s in slots:
        for t in slots:
            if (s, t) in table:
                continue
            value = random_exact(rng, complex_=True)
            pairs = [(s, t)]
            if s[0] == t[0] or causal.is_spacelike(s[0], t[0]):
                pairs.append((t, s))
            for u, v in pairs:
                while (u, v) not in table:
                    table[(u, v)] = value
                    u, v = (permutation[u[0]], u[1]), (permutation[v[0]], v[1])
    return CutPropagator.build(causal, [(s[0], s[1], t[0], t[1], v) for (s, t), v in table.items()])


def random_feynman(rng: random.Random, causal: CausalSet) -> FeynmanPropagator:
    """Symmetric random Delta_F on all slot pairs."""
    slots = causal.slots()
    table = {}
    for i, s in enumerate(slots):
        for t in slots[i:]:
            value = random_exact(rng, complex_=True)
            if not value.is_zero():
                table[(s, t)] = table[(t, s)] = value
    return FeynmanPropagator(causal, table)


def random_diagonal(rng: random.Random, causal: CausalSet) -> Dict[Tuple[str, Tuple[str, str]], Scalar]:
    out = {}
    for p in causal.points:
        names = causal.species[p]
        for i, a in enumerate(names):
            for b in names[i:]:
                out[(p, (a, b))] = random_exact(rng, complex_=True)
    return out


def random_vertex(rng: random.Random, causal: CausalSet, point: str, max_fields: int,
                  allow_density: bool = True) -> Vertex:
    options = vertices_at(point, causal.species[point], max_fields)
    if not allow_density:
        options = [v for v in options if not v.is_density] or options
    return rng.choice(options)


def random_key(rng: random.Random, causal: CausalSet, points: Optional[Sequence[str]] = None,
               max_vertices: int = 2, max_fields: int = 4) -> SymKey:
    """Random multiset of at most max_vertices vertices with at most max_fields fields in total."""
    points = list(points or causal.points)
    vertices = []
    budget = max_fields
    for _ in range(rng.randint(1, max_vertices)):
        v = random_vertex(rng, causal, rng.choice(points), budget)
        vertices.append(v)
        budget -= v.field_degree
    return make_key(vertices)


def random_element(rng: random.Random, causal: CausalSet, truncation: Truncation,
                   points: Optional[Sequence[str]] = None, terms: int = 2,
                   max_vertices: int = 2, max_fields: int = 3) -> SymElement:
    data = {}
    for _ in range(terms):
        key = random_key(rng, causal, points, min(max_vertices, truncation.max_sym_degree),
                         min(max_fields, truncation.max_field_degree))
        data[key] = data.get(key, 0) + random_exact(rng, complex_=True, nonzero=True)
    return SymElement(data, truncation)


def random_split_supports(rng: random.Random, causal: CausalSet,
                          attempts: int = 20) -> Optional[Tuple[List[str], List[str]]]:
    """Non-empty supports (SA, SB) with no point of SA <= a point of SB."""
    points = list(causal.points)
    for _ in range(attempts):
        sa = rng.sample(points, rng.randint(1, max(1, len(points) - 1)))
        rest = [p for p in points if p not in sa]
        if not rest:
            continue
        sb = rng.sample(rest, rng.randint(1, len(rest)))
        if causal.none_leq(sa, sb):
            return sorted(sa), sorted(sb)
    return None


def random_renormalization(rng: random.Random, causal: CausalSet, truncation: Truncation,
                           min_degree: int = 1, simple: bool = False,
                           probability: float = 0.5) -> Renormalization:
    """
    Sparse random renormalization with data only in symmetric degree >= min_degree.

    simple keeps it in the simple-operator subgroup (no vertex with fewer than two fields).
    """
    data = {}
    for key in single_point_keys(causal, truncation):
        if len(key) < min_degree:
            continue
        if simple and any(v.field_degree < 2 for v in key):
            continue
        if rng.random() < probability:
            data[key] = random_fraction(rng, nonzero=True)
    return Renormalization(causal, data, truncation)


def random_lagrangian(rng: random.Random, causal: CausalSet, ring: CouplingRing,
                      truncation: Truncation, terms: int = 2, max_fields: int = 3,
                      points: Optional[Sequence[str]] = None) -> SymElement:
    """Single-vertex element with coefficients linear in the couplings."""
    points = list(points or causal.points)
    data = {}
    for _ in range(terms):
        v = random_vertex(rng, causal, rng.choice(points), max_fields, allow_density=False)
        coupling = ring.variable(rng.choice(ring.names)) * random_fraction(rng, nonzero=True)
        data[(v,)] = data[(v,)] + coupling if (v,) in data else coupling
    return SymElement(data, truncation)


def random_group_like(rng: random.Random, causal: CausalSet, ring: CouplingRing,
                      truncation: Truncation, terms: int = 2, max_fields: int = 2,
                      points: Optional[Sequence[str]] = None) -> SymElement:
    """exp(i L) for a random coupling-linear single-vertex L; the unit when points is empty."""
    if points is not None and not points:
        return SymElement.one(truncation)
    lagrangian = random_lagrangian(rng, causal, ring, truncation, terms, max_fields, points)
    return hopf_exp(lagrangian.scale(ExactComplex(0, 1))).element


def random_word(rng: random.Random, causal: CausalSet, degree: int, truncation: Truncation,
                points: Optional[Sequence[str]] = None, terms: int = 1,
                max_fields: int = 2) -> TensorWord:
    return TensorWord(tuple(
        random_element(rng, causal, truncation, points, terms, max_vertices=1, max_fields=max_fields)
        for _ in range(degree)
    ))


def constant_cut(causal: CausalSet, value) -> CutPropagator:
    """Every slot pair carries the same value."""
    slots = causal.slots()
    return CutPropagator.build(causal, [(s[0], s[1], t[0], t[1], value) for s in slots for t in slots])


def random_simple_vertex(rng: random.Random, causal: CausalSet) -> Vertex:
    """A single field or a density."""
    point = rng.choice(causal.points)
    if rng.random() < 0.25:
        return Vertex.density(point)
    return Vertex.of(point, {rng.choice(causal.species[point]): 1})
