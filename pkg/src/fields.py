"""
Field Hopf Algebra
The truncated symmetric Hopf algebra of composite fields: vertex monomials,
multiset keys, product, coproduct, the coaction that splits a vertex into a
density part and residual fields, the star involution, and exponentials and
logarithms of nilpotent elements.

Only bosonic species; a vertex with no fields is the density 1_x at x and
the empty key is the unit.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement, product
from math import comb
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from models import NonNilpotentError, Truncation
from scalars import I, Scalar, as_scalar, conj, is_nilpotent, is_zero

Slot = Tuple[str, str]


@dataclass(frozen=True, order=True)
class Vertex:
    """Monomial in the species at one point (a basis element of one vertex)"""
    point: str
    exponents: Tuple[Tuple[str, int], ...] = ()

    @classmethod
    def of(cls, point: str, exponents: Optional[Mapping[str, int]] = None) -> "Vertex":
        exps = tuple(sorted((str(s), int(k)) for s, k in (exponents or {}).items() if k))
        if any(k < 0 for _, k in exps):
            raise ValueError(f"negative exponent in vertex at {point}: {exps}")
        return cls(str(point), exps)

    @classmethod
    def density(cls, point: str) -> "Vertex":
        return cls(str(point), ())

    @property
    def field_degree(self) -> int:
        return sum(k for _, k in self.exponents)

    @property
    def is_density(self) -> bool:
        return not self.exponents

    def exponent(self, species: str) -> int:
        return dict(self.exponents).get(species, 0)

    def fields(self) -> Tuple[Slot, ...]:
        """Field slots with multiplicity."""
        return tuple((self.point, s) for s, k in self.exponents for _ in range(k))

    def __str__(self):
        if self.is_density:
            return f"1[{self.point}]"
        body = '*'.join(s if k == 1 else f"{s}^{k}" for s, k in self.exponents)
        if len(self.exponents) == 1:
            return f"{body}[{self.point}]"
        return f"({body})[{self.point}]"


SymKey = Tuple[Vertex, ...]
UNIT_KEY: SymKey = ()


def make_key(vertices: Iterable[Vertex]) -> SymKey:
    """Canonical sorted multiset encoding."""
    return tuple(sorted(vertices))


def key_field_degree(key: SymKey) -> int:
    return sum(v.field_degree for v in key)


def key_support(key: SymKey) -> FrozenSet[str]:
    return frozenset(v.point for v in key)


def is_single_point(key: SymKey) -> bool:
    return len(key_support(key)) == 1


def key_fields(key: SymKey) -> Tuple[Slot, ...]:
    return tuple(sorted(s for v in key for s in v.fields()))


def render_key(key: SymKey) -> str:
    if not key:
        return "1"
    return '*'.join(str(v) for v in key)


def _multiplicities(key: SymKey) -> Dict[Vertex, int]:
    counts: Dict[Vertex, int] = {}
    for v in key:
        counts[v] = counts.get(v, 0) + 1
    return counts


# =============================================================================
# SYMMETRIC ALGEBRA ELEMENTS
# =============================================================================

class SymElement:
    """
    Finite linear combination of multiset keys, truncated at (D, F).

    Binary operations keep the truncation of the left operand.
    """

    __slots__ = ('terms', 'truncation')

    def __init__(self, terms: Optional[Mapping[SymKey, Scalar]] = None,
                 truncation: Truncation = Truncation()):
        clean: Dict[SymKey, Scalar] = {}
        for key, coeff in (terms or {}).items():
            key = make_key(key)
            if not truncation.admits(len(key), key_field_degree(key)):
                continue
            coeff = as_scalar(coeff)
            if key in clean:
                coeff = clean[key] + coeff
            if is_zero(coeff):
                clean.pop(key, None)
            else:
                clean[key] = coeff
        self.terms = clean
        self.truncation = truncation

    @classmethod
    def zero(cls, truncation: Truncation = Truncation()) -> "SymElement":
        return cls({}, truncation)

    @classmethod
    def one(cls, truncation: Truncation = Truncation()) -> "SymElement":
        return cls({UNIT_KEY: 1}, truncation)

    @classmethod
    def from_vertex(cls, vertex: Vertex, coeff: Scalar = 1,
                    truncation: Truncation = Truncation()) -> "SymElement":
        return cls({(vertex,): coeff}, truncation)

    @classmethod
    def from_key(cls, key: Iterable[Vertex], coeff: Scalar = 1,
                 truncation: Truncation = Truncation()) -> "SymElement":
        return cls({make_key(key): coeff}, truncation)

    def _same(self, terms) -> "SymElement":
        return SymElement(terms, self.truncation)

    def with_truncation(self, truncation: Truncation) -> "SymElement":
        return SymElement(self.terms, truncation)

    def coefficient(self, key: Iterable[Vertex]) -> Scalar:
        return self.terms.get(make_key(key), 0)

    @property
    def constant_term(self) -> Scalar:
        return self.terms.get(UNIT_KEY, 0)

    def is_zero(self) -> bool:
        return not self.terms

    def support(self) -> FrozenSet[str]:
        points = set()
        for key in self.terms:
            points |= key_support(key)
        return frozenset(points)

    def max_sym_degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def max_field_degree(self) -> int:
        return max((key_field_degree(k) for k in self.terms), default=0)

    def homogeneous(self, m: int) -> "SymElement":
        return self._same({k: c for k, c in self.terms.items() if len(k) == m})

    def map_coefficients(self, fn) -> "SymElement":
        return self._same({k: fn(c) for k, c in self.terms.items()})

    def scale(self, c: Scalar) -> "SymElement":
        return self._same({k: v * c for k, v in self.terms.items()})

    def is_nilpotent(self) -> bool:
        return all(is_nilpotent(c) for c in self.terms.values())

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __len__(self):
        return len(self.terms)

    def __neg__(self):
        return self.scale(-1)

    def __add__(self, other):
        if not isinstance(other, SymElement):
            other = SymElement.one(self.truncation).scale(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc[k] + c if k in acc else c
        return self._same(acc)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, SymElement):
            other = SymElement.one(self.truncation).scale(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, SymElement):
            return sym_product(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if isinstance(other, SymElement):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"SymElement({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for key, coeff in self:
            parts.append(f"({coeff})*{render_key(key)}" if key else f"({coeff})")
        return " + ".join(parts)


def sym_product(a: SymElement, b: SymElement) -> SymElement:
    """Commutative product: multiset union of keys, truncated at (D, F)."""
    trunc = a.truncation
    acc: Dict[SymKey, Scalar] = {}
    for ka, ca in a.terms.items():
        fa = key_field_degree(ka)
        for kb, cb in b.terms.items():
            if not trunc.admits(len(ka) + len(kb), fa + key_field_degree(kb)):
                continue
            key = make_key(ka + kb)
            value = ca * cb
            acc[key] = acc[key] + value if key in acc else value
    return SymElement(acc, trunc)


def counit(a: SymElement) -> Scalar:
    return a.constant_term


def star(a: SymElement) -> SymElement:
    """Conjugate coefficients and multiply symmetric degree m by (-1)^m."""
    return a._same({k: conj(c) * (-1 if len(k) % 2 else 1) for k, c in a.terms.items()})


# =============================================================================
# COPRODUCT
# =============================================================================

Tensor = Dict[Tuple[SymKey, SymKey], Scalar]


@lru_cache(maxsize=None)
def key_coproduct(key: SymKey) -> Tuple[Tuple[SymKey, SymKey, int], ...]:
    """Sub-multiset splits (left, right, multiplicity) of a key."""
    counts = sorted(_multiplicities(key).items())
    splits = []
    for choice in product(*[range(n + 1) for _, n in counts]):
        left, right, mult = [], [], 1
        for (v, n), j in zip(counts, choice):
            left.extend([v] * j)
            right.extend([v] * (n - j))
            mult *= comb(n, j)
        splits.append((make_key(left), make_key(right), mult))
    return tuple(splits)


def coproduct(a: SymElement) -> Tensor:
    """Algebra-map extension of v -> v(x)1 + 1(x)v."""
    acc: Tensor = {}
    for key, coeff in a.terms.items():
        for left, right, mult in key_coproduct(key):
            pair = (left, right)
            value = coeff * mult
            acc[pair] = acc[pair] + value if pair in acc else value
    return {p: c for p, c in acc.items() if not is_zero(c)}


def tensor_square(a: SymElement) -> Tensor:
    """a (x) a, truncated on the combined degree of each pair."""
    trunc = a.truncation
    acc: Tensor = {}
    for k1, c1 in a.terms.items():
        for k2, c2 in a.terms.items():
            if not trunc.admits(len(k1) + len(k2), key_field_degree(k1) + key_field_degree(k2)):
                continue
            acc[(k1, k2)] = c1 * c2
    return {p: c for p, c in acc.items() if not is_zero(c)}


def tensor_product(s: Tensor, t: Tensor, truncation: Truncation) -> Tensor:
    """Product in S (x) S: (a(x)b)(c(x)d) = ac (x) bd, combined-degree truncation."""
    acc: Tensor = {}
    for (a, b), x in s.items():
        for (c, d), y in t.items():
            size = len(a) + len(b) + len(c) + len(d)
            fields = sum(key_field_degree(k) for k in (a, b, c, d))
            if not truncation.admits(size, fields):
                continue
            pair = (make_key(a + c), make_key(b + d))
            value = x * y
            acc[pair] = acc[pair] + value if pair in acc else value
    return {p: c for p, c in acc.items() if not is_zero(c)}


def tensor_map(t: Tensor, left, right) -> Tensor:
    """Apply key -> SymElement maps to each tensor factor."""
    acc: Tensor = {}
    for (a, b), c in t.items():
        for ka, ca in left(a).terms.items():
            for kb, cb in right(b).terms.items():
                pair = (ka, kb)
                value = c * ca * cb
                acc[pair] = acc[pair] + value if pair in acc else value
    return {p: c for p, c in acc.items() if not is_zero(c)}


def tensors_equal(s: Tensor, t: Tensor) -> bool:
    keys = set(s) | set(t)
    return all(is_zero(s.get(k, 0) - t.get(k, 0)) for k in keys)


def reduced_coproduct(a: SymElement) -> Tensor:
    """Coproduct with the a(x)1 and 1(x)a parts removed."""
    return {(l, r): c for (l, r), c in coproduct(a).items() if l and r}


# =============================================================================
# COACTION
# =============================================================================

@lru_cache(maxsize=None)
def coaction_split(vertex: Vertex) -> Tuple[Tuple[Vertex, Vertex, int], ...]:
    """
    Binomial splitting of a vertex into (density part, field part, multiplicity).

    For phi^k at x: sum_j C(k, j) phi^j (x) phi^(k-j), multiplicative over species;
    both parts live at the vertex's point.
    """
    splits = []
    for choice in product(*[range(k + 1) for _, k in vertex.exponents]):
        kept, moved, mult = {}, {}, 1
        for (s, k), j in zip(vertex.exponents, choice):
            kept[s] = j
            moved[s] = k - j
            mult *= comb(k, j)
        splits.append((Vertex.of(vertex.point, kept), Vertex.of(vertex.point, moved), mult))
    return tuple(splits)


@lru_cache(maxsize=None)
def key_coaction(key: SymKey) -> Tuple[Tuple[SymKey, Tuple[Slot, ...], int], ...]:
    """
    Coaction of a multiset key: (density-part key, residual field slots, multiplicity).

    Splits of equal results are merged.
    """
    acc: Dict[Tuple[SymKey, Tuple[Slot, ...]], int] = {}
    for choice in product(*[coaction_split(v) for v in key]):
        omega_key = make_key(kept for kept, _, _ in choice)
        slots = tuple(sorted(s for _, moved, _ in choice for s in moved.fields()))
        mult = 1
        for _, _, m in choice:
            mult *= m
        acc[(omega_key, slots)] = acc.get((omega_key, slots), 0) + mult
    return tuple((k, s, m) for (k, s), m in sorted(acc.items()))


# =============================================================================
# EXPONENTIAL AND LOGARITHM
# =============================================================================

@dataclass
class GroupLike:
    """exp(exponent) with nilpotent exponent; element is the expanded series"""
    exponent: SymElement
    element: SymElement


def _iteration_bound(a: SymElement) -> int:
    trunc = a.truncation
    return (trunc.max_sym_degree + 2) * (trunc.max_field_degree + 2) + 16


def hopf_exp(a: SymElement) -> GroupLike:
    """
    exp of an element whose coefficients are all nilpotent.

    Raises:
        NonNilpotentError: a coefficient has a nonzero constant term
    """
    if not a.is_nilpotent():
        bad = [render_key(k) for k, c in a.terms.items() if not is_nilpotent(c)]
        raise NonNilpotentError(f"exp of non-nilpotent element: coefficients of {bad} are not nilpotent")
    result = SymElement.one(a.truncation)
    term = SymElement.one(a.truncation)
    for n in range(1, _iteration_bound(a)):
        term = sym_product(term, a).scale(Fraction(1, n))
        if term.is_zero():
            return GroupLike(a, result)
        result = result + term
    raise NonNilpotentError("exp series did not terminate within truncation")


def hopf_log(g) -> SymElement:
    """
    log of a group-like element (or any element with constant term 1 + nilpotent).

    Raises:
        NonNilpotentError: the constant term minus 1 is not nilpotent
    """
    element = g.element if isinstance(g, GroupLike) else g
    u = element - 1
    if not is_nilpotent(u.constant_term):
        raise NonNilpotentError(f"log requires constant term 1, got {element.constant_term}")
    result = SymElement.zero(element.truncation)
    power = SymElement.one(element.truncation)
    for n in range(1, _iteration_bound(element)):
        power = sym_product(power, u)
        if power.is_zero():
            return result
        result = result + power.scale(Fraction((-1) ** (n + 1), n))
    raise NonNilpotentError("log series did not terminate within truncation")


def exp_i(a: SymElement) -> SymElement:
    """exp(i*a) expanded."""
    return hopf_exp(a.scale(I)).element


def is_group_like(g: SymElement) -> bool:
    """Delta(g) = g (x) g and counit(g) = 1 through truncation."""
    return is_zero(counit(g) - 1) and tensors_equal(coproduct(g), tensor_square(g))


# =============================================================================
# ENUMERATION
# =============================================================================

def vertices_at(point: str, species: Iterable[str], max_fields: int) -> List[Vertex]:
    """All vertices at a point with at most max_fields fields, densities included."""
    species = tuple(species)
    out = []
    for total in range(max_fields + 1):
        for combo in combinations_with_replacement(species, total):
            exps: Dict[str, int] = {}
            for s in combo:
                exps[s] = exps.get(s, 0) + 1
            out.append(Vertex.of(point, exps))
    return sorted(set(out))


def enumerate_keys(vertices: List[Vertex], truncation: Truncation,
                   min_size: int = 1) -> List[SymKey]:
    """All multisets of the given vertices admitted by the truncation."""
    vertices = sorted(set(vertices))
    keys = []
    for size in range(min_size, truncation.max_sym_degree + 1):
        for combo in combinations_with_replacement(vertices, size):
            if truncation.admits(size, key_field_degree(combo)):
                keys.append(make_key(combo))
    return keys


def spanning_keys(causal, truncation: Truncation, single_point: bool = False,
                  max_vertex_fields: Optional[int] = None) -> List[SymKey]:
    """
    Basis keys of the truncated algebra over a causal set, sorted by
    (symmetric degree, field degree, key).

    Args:
        causal: Object with points and per-point species
        truncation: Degree bounds (D, F)
        single_point: Only keys supported at one point
        max_vertex_fields: Extra bound on the fields of any one vertex
    """
    per_vertex = truncation.max_field_degree if max_vertex_fields is None else max_vertex_fields
    if single_point:
        keys = []
        for p in causal.points:
            keys.extend(enumerate_keys(vertices_at(p, causal.species[p], per_vertex), truncation))
    else:
        vertices = []
        for p in causal.points:
            vertices.extend(vertices_at(p, causal.species[p], per_vertex))
        keys = enumerate_keys(vertices, truncation)
    return sorted(set(keys), key=lambda k: (len(k), key_field_degree(k), k))


def coaction(a: SymElement) -> Dict[Tuple[SymKey, Tuple[Slot, ...]], Scalar]:
    """Linear extension of key_coaction: (density-part key, residual slots) -> coefficient."""
    acc: Dict[Tuple[SymKey, Tuple[Slot, ...]], Scalar] = {}
    for key, coeff in a.terms.items():
        for omega_key, slots, mult in key_coaction(key):
            pair = (omega_key, slots)
            value = coeff * mult
            acc[pair] = acc[pair] + value if pair in acc else value
    return {p: c for p, c in acc.items() if not is_zero(c)}
