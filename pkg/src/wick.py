"""
Wick Measures
Cut and Feynman propagators on a causal model, the bicharacter extension of
the cut propagator, Wick-sum evaluation, Feynman measures (a Feynman
propagator plus an optional renormalization twist), the Gaussian condition
and measure classification.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Tuple

from causal import CausalSet
from fields import (
    SymElement, SymKey, Slot, Vertex, key_coaction, key_field_degree, key_fields,
    make_key, render_key, spanning_keys, sym_product,
)
from models import InapplicableCheck, ModelError, ScalarKind, Truncation
from scalars import (
    CouplingSeries, ExactComplex, RegulatorLaurent, Scalar, ZERO, as_scalar, conj, is_zero,
)

logger = logging.getLogger(__name__)

SlotPair = Tuple[Slot, Slot]
DiagonalKey = Tuple[str, Tuple[str, str]]


def _counts(slots: Tuple[Slot, ...]) -> Tuple[Tuple[Slot, ...], Tuple[int, ...]]:
    types = sorted(set(slots))
    return tuple(types), tuple(slots.count(t) for t in types)


def pairing_sum(slots: Tuple[Slot, ...], weight: Callable[[Slot, Slot], Scalar]) -> Scalar:
    """
    Sum over perfect matchings of a field multiset of the product of pair weights.

    Recursion on the first unmatched slot type, memoized on the residual
    count signature; weight must be symmetric.
    """
    slots = tuple(slots)
    if len(slots) % 2:
        return ZERO
    types, counts = _counts(slots)

    @lru_cache(maxsize=None)
    def rec(state: Tuple[int, ...]) -> Scalar:
        i = next((k for k, n in enumerate(state) if n), None)
        if i is None:
            return ExactComplex(1)
        rest = list(state)
        rest[i] -= 1
        total = ZERO
        for j in range(i, len(types)):
            ways = rest[j]
            if not ways:
                continue
            w = weight(types[i], types[j])
            if is_zero(w):
                continue
            nxt = list(rest)
            nxt[j] -= 1
            total = total + w * ways * rec(tuple(nxt))
        return total

    return rec(counts)


def bijection_sum(left: Tuple[Slot, ...], right: Tuple[Slot, ...],
                  weight: Callable[[Slot, Slot], Scalar]) -> Scalar:
    """Sum over bijections left -> right of the product of weight(a, b)."""
    if len(left) != len(right):
        return ZERO
    ltypes, lcounts = _counts(tuple(left))
    rtypes, rcounts = _counts(tuple(right))

    @lru_cache(maxsize=None)
    def rec(lstate: Tuple[int, ...], rstate: Tuple[int, ...]) -> Scalar:
        i = next((k for k, n in enumerate(lstate) if n), None)
        if i is None:
            return ExactComplex(1)
        lrest = list(lstate)
        lrest[i] -= 1
        total = ZERO
        for j, ways in enumerate(rstate):
            if not ways:
                continue
            w = weight(ltypes[i], rtypes[j])
            if is_zero(w):
                continue
            rrest = list(rstate)
            rrest[j] -= 1
            total = total + w * ways * rec(tuple(lrest), tuple(rrest))
        return total

    return rec(lcounts, rcounts)


# =============================================================================
# EXACT HERMITIAN LDL
# =============================================================================

@dataclass
class LDLResult:
    """Outcome of an exact Hermitian LDL decomposition"""
    hermitian: bool
    psd: Optional[bool]
    rank: int
    pivots: List[Scalar] = field(default_factory=list)


def hermitian_ldl(matrix: List[List[Scalar]]) -> LDLResult:
    """
    Exact symmetric elimination of a Hermitian matrix over Gaussian rationals.

    A zero pivot with a nonzero remaining column means the matrix is not
    positive semidefinite. psd is None when an entry is not an exact scalar.
    """
    n = len(matrix)
    a = [[as_scalar(x) for x in row] for row in matrix]
    hermitian = all(is_zero(a[i][j] - conj(a[j][i])) for i in range(n) for j in range(i, n))
    if not hermitian:
        return LDLResult(hermitian=False, psd=False, rank=0)
    if any(not isinstance(x, ExactComplex) for row in a for x in row):
        return LDLResult(hermitian=True, psd=None, rank=0)

    pivots: List[Scalar] = []
    psd = True
    for k in range(n):
        d = a[k][k]
        pivots.append(d)
        if d.re < 0:
            psd = False
            break
        if d.is_zero():
            if any(not a[i][k].is_zero() for i in range(k + 1, n)):
                psd = False
                break
            continue
        for i in range(k + 1, n):
            l = a[i][k] / d
            if l.is_zero():
                continue
            for j in range(k + 1, n):
                a[i][j] = a[i][j] - l * a[k][j]
    rank = sum(1 for p in pivots if not is_zero(p))
    return LDLResult(hermitian=True, psd=psd, rank=rank, pivots=pivots)


# =============================================================================
# PROPAGATORS
# =============================================================================

@dataclass(frozen=True, eq=False)
class CutPropagator:
    """Delta(x, y) on field slots; unlisted entries are zero"""
    causal: CausalSet
    entries: Mapping[SlotPair, Scalar]

    @classmethod
    def build(cls, causal: CausalSet,
              entries: Iterable[Tuple[str, str, str, str, Scalar]]) -> "CutPropagator":
        """
        Args:
            causal: The causal model
            entries: Tuples (x, species, y, species, value)

        Raises:
            ModelError: unknown point or species, or a slot pair listed twice
        """
        table: Dict[SlotPair, Scalar] = {}
        for x, a, y, b, value in entries:
            s, t = (str(x), str(a)), (str(y), str(b))
            for point, sp in (s, t):
                causal.check_point(point)
                if sp not in causal.species[point]:
                    raise ModelError(f"propagator: species {sp} not declared at point {point}")
            if (s, t) in table:
                raise ModelError(f"propagator: entry {s} -> {t} listed twice")
            value = as_scalar(value)
            if not is_zero(value):
                table[(s, t)] = value
        return cls(causal, table)

    def value(self, s: Slot, t: Slot) -> Scalar:
        return self.entries.get((s, t), ZERO)

    __call__ = value

    def locality_violations(self) -> List[SlotPair]:
        """Slot pairs at spacelike or coincident points with Delta(s,t) != Delta(t,s)."""
        bad = []
        slots = self.causal.slots()
        for i, s in enumerate(slots):
            for t in slots[i + 1:]:
                if s[0] != t[0] and not self.causal.is_spacelike(s[0], t[0]):
                    continue
                if not is_zero(self.value(s, t) - self.value(t, s)):
                    bad.append((s, t))
        return bad

    @cached_property
    def is_local(self) -> bool:
        return not self.locality_violations()

    @cached_property
    def is_symmetric(self) -> bool:
        return all(is_zero(c - self.value(t, s)) for (s, t), c in self.entries.items())

    @cached_property
    def is_hermitian(self) -> bool:
        slots = self.causal.slots()
        return all(is_zero(self.value(t, s) - conj(self.value(s, t))) for s in slots for t in slots)

    @cached_property
    def is_positive(self) -> bool:
        slots = self.causal.slots()
        matrix = [[self.value(s, t) for t in slots] for s in slots]
        return bool(hermitian_ldl(matrix).psd)

    def flags(self) -> Dict[str, bool]:
        return {
            'local': self.is_local,
            'symmetric': self.is_symmetric,
            'hermitian': self.is_hermitian,
            'positive': self.is_positive,
        }

    def same_entries(self, other: "CutPropagator") -> bool:
        keys = set(self.entries) | set(other.entries)
        return all(is_zero(self.value(*k) - other.value(*k)) for k in keys)


@dataclass(frozen=True, eq=False)
class FeynmanPropagator:
    """Symmetric Delta_F on field slots"""
    causal: CausalSet
    entries: Mapping[SlotPair, Scalar]

    def value(self, s: Slot, t: Slot) -> Scalar:
        return self.entries.get((s, t), ZERO)

    __call__ = value

    def diagonal(self) -> Dict[DiagonalKey, Scalar]:
        out = {}
        for (s, t), c in self.entries.items():
            if s[0] == t[0] and s[1] <= t[1]:
                out[(s[0], (s[1], t[1]))] = c
        return out


def extend_propagator(delta, a_fields: Iterable[Slot], b_fields: Iterable[Slot]) -> Scalar:
    """
    Bicharacter extension Delta(A, B): sum over bijections between the fields
    of A and of B. Zero for different field degrees, 1 when both are empty.
    """
    weight = delta.value if hasattr(delta, 'value') else delta
    return bijection_sum(tuple(a_fields), tuple(b_fields), weight)


def build_feynman_propagator(cut: CutPropagator,
                             diagonal: Optional[Mapping[DiagonalKey, Scalar]] = None) -> FeynmanPropagator:
    """
    Time-order the cut propagator.

    Off the diagonal the later argument goes first: Delta_F(s, t) is
    Delta(s, t) unless point(s) <= point(t), in which case it is
    Delta(t, s). Coincident points take the diagonal entry keyed by
    (point, sorted species pair), defaulting to Delta(s, t).

    Raises:
        ModelError: cut propagator not local, two-way comparable points,
            or an unknown diagonal entry
    """
    causal = cut.causal
    comparable = causal.comparable_pairs()
    if comparable:
        x, y = comparable[0]
        raise ModelError(f"order: points {x} and {y} are comparable both ways; time ordering is undefined")
    violations = cut.locality_violations()
    if violations:
        s, t = violations[0]
        raise ModelError(
            f"propagator: not local, Delta{s}{t} = {cut.value(s, t)} but "
            f"Delta{t}{s} = {cut.value(t, s)} ({len(violations)} violating pairs)"
        )

    diag: Dict[DiagonalKey, Scalar] = {}
    for (point, pair), value in (diagonal or {}).items():
        causal.check_point(point)
        a, b = sorted(pair)
        for sp in (a, b):
            if sp not in causal.species[point]:
                raise ModelError(f"feynman_diagonal: species {sp} not declared at point {point}")
        diag[(point, (a, b))] = as_scalar(value)

    table: Dict[SlotPair, Scalar] = {}
    slots = causal.slots()
    for s in slots:
        for t in slots:
            if s[0] == t[0]:
                key = (s[0], tuple(sorted((s[1], t[1]))))
                value = diag[key] if key in diag else cut.value(s, t)
            elif causal.leq(s[0], t[0]):
                value = cut.value(t, s)
            else:
                value = cut.value(s, t)
            if not is_zero(value):
                table[(s, t)] = value
    return FeynmanPropagator(causal, table)


def wick_key(feynman: FeynmanPropagator, key: SymKey) -> Scalar:
    """Wick sum of one multiset; pure densities give 1."""
    return pairing_sum(key_fields(key), feynman.value)


def wick_eval(feynman: FeynmanPropagator, a: SymElement) -> Scalar:
    total = ZERO
    for key, coeff in a.terms.items():
        value = wick_key(feynman, key)
        if not is_zero(value):
            total = total + coeff * value
    return total


# =============================================================================
# FEYNMAN MEASURES
# =============================================================================

@dataclass(frozen=True, eq=False)
class FeynmanMeasure:
    """
    omega(A) = wick(Delta_F, twist(A)).

    The twist is a renormalization (None for the identity); values are
    memoized per key.
    """
    causal: CausalSet
    cut: CutPropagator
    feynman: FeynmanPropagator
    twist: Optional[object] = None
    _memo: Dict[SymKey, Scalar] = field(default_factory=dict, compare=False, repr=False)

    def evaluate_key(self, key: SymKey) -> Scalar:
        key = make_key(key)
        if key in self._memo:
            return self._memo[key]
        if self.twist is None:
            value = wick_key(self.feynman, key)
        else:
            value = wick_eval(self.feynman, self.twist.act_key(key))
        self._memo[key] = value
        return value

    def evaluate(self, a: SymElement) -> Scalar:
        total = ZERO
        for key, coeff in a.terms.items():
            value = self.evaluate_key(key)
            if not is_zero(value):
                total = total + coeff * value
        return total

    __call__ = evaluate

    def with_twist(self, twist) -> "FeynmanMeasure":
        return FeynmanMeasure(self.causal, self.cut, self.feynman, twist)

    @property
    def scalar_kind(self) -> ScalarKind:
        values = list(self.cut.entries.values()) + list(self.feynman.entries.values())
        if self.twist is not None:
            values.extend(self.twist.values())
        if any(isinstance(v, RegulatorLaurent) for v in values):
            return ScalarKind.LAURENT
        if any(isinstance(v, CouplingSeries) for v in values):
            return ScalarKind.COUPLING
        return ScalarKind.EXACT


def measure_eval(omega: FeynmanMeasure, a: SymElement) -> Scalar:
    return omega.evaluate(a)


def feynman_measure(cut: CutPropagator, diagonal: Optional[Mapping] = None,
                    twist=None) -> FeynmanMeasure:
    """Measure of a local cut propagator with optional diagonal values and twist."""
    return FeynmanMeasure(cut.causal, cut, build_feynman_propagator(cut, diagonal), twist)


# =============================================================================
# GAUSSIAN CONDITION
# =============================================================================

def gaussian_sides(omega: FeynmanMeasure, a: SymElement, b: SymElement) -> Tuple[Scalar, Scalar]:
    """
    Both sides of omega(AB) = sum omega(A') Delta(A'', B'') omega(B').

    Raises:
        InapplicableCheck: some point of supp A is <= a point of supp B
    """
    causal = omega.causal
    if not causal.none_leq(a.support(), b.support()):
        raise InapplicableCheck(
            f"gaussian condition needs no point of supp A <= supp B: "
            f"supp A = {sorted(a.support())}, supp B = {sorted(b.support())}"
        )
    wide = Truncation(a.max_sym_degree() + b.max_sym_degree(),
                      a.max_field_degree() + b.max_field_degree())
    lhs = omega.evaluate(sym_product(a.with_truncation(wide), b.with_truncation(wide)))

    rhs = ZERO
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            for a_key, a_slots, ma in key_coaction(ka):
                wa = omega.evaluate_key(a_key)
                if is_zero(wa):
                    continue
                for b_key, b_slots, mb in key_coaction(kb):
                    if len(a_slots) != len(b_slots):
                        continue
                    cross = extend_propagator(omega.cut, a_slots, b_slots)
                    if is_zero(cross):
                        continue
                    wb = omega.evaluate_key(b_key)
                    rhs = rhs + ca * cb * ma * mb * wa * cross * wb
    return lhs, rhs


def gaussian_check(omega: FeynmanMeasure, a: SymElement, b: SymElement) -> bool:
    lhs, rhs = gaussian_sides(omega, a, b)
    return is_zero(lhs - rhs)


# =============================================================================
# CLASSIFICATION
# =============================================================================

@dataclass
class MeasureFlags:
    """Classification of a measure through a truncation"""
    normalized: bool
    normally_ordered: bool
    simple_operator: bool
    hermitian: bool
    failures: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            'normalized': self.normalized,
            'normally_ordered': self.normally_ordered,
            'simple_operator': self.simple_operator,
            'hermitian': self.hermitian,
            'failures': dict(self.failures),
        }


def _remove_one(key: SymKey, index: int, species: str) -> SymKey:
    v = key[index]
    exps = dict(v.exponents)
    exps[species] -= 1
    return make_key(list(key[:index]) + [Vertex.of(v.point, exps)] + list(key[index + 1:]))


def simple_operator_sides(omega: FeynmanMeasure, slot: Slot, key: SymKey) -> Tuple[Scalar, Scalar]:
    """omega(phi_s B) and sum over single fields b of B of Delta_F(s, b) omega(B without b)."""
    lhs = omega.evaluate_key(make_key((Vertex.of(slot[0], {slot[1]: 1}),) + tuple(key)))
    rhs = ZERO
    seen = set()
    for index, v in enumerate(key):
        if v in seen:
            continue
        seen.add(v)
        copies = key.count(v)
        for sp, k in v.exponents:
            delta = omega.feynman.value(slot, (v.point, sp))
            if is_zero(delta):
                continue
            rhs = rhs + delta * copies * k * omega.evaluate_key(_remove_one(key, index, sp))
    return lhs, rhs


def classify_measure(omega: FeynmanMeasure, truncation: Truncation = Truncation(3, 4)) -> MeasureFlags:
    """Exhaustive flag tests over the spanning keys of a truncation."""
    from operators import TensorWord, hermitian_sides

    causal = omega.causal
    keys = spanning_keys(causal, truncation)
    failures: Dict[str, str] = {}

    normalized = is_zero(omega.evaluate_key(()) - 1)
    for key in keys:
        if not normalized:
            break
        if all(v.is_density for v in key) and not is_zero(omega.evaluate_key(key) - 1):
            normalized = False
            failures['normalized'] = f"omega({render_key(key)}) = {omega.evaluate_key(key)}"
    if not normalized and 'normalized' not in failures:
        failures['normalized'] = f"omega(1) = {omega.evaluate_key(())}"

    normally_ordered = True
    for key in keys:
        if len(key) == 1 and not key[0].is_density and not is_zero(omega.evaluate_key(key)):
            normally_ordered = False
            failures['normally_ordered'] = f"omega({render_key(key)}) = {omega.evaluate_key(key)}"
            break

    simple_operator = True
    inner = Truncation(truncation.max_sym_degree - 1, truncation.max_field_degree - 1)
    for slot in causal.slots():
        if not simple_operator:
            break
        for key in [()] + [k for k in keys if inner.admits(len(k), key_field_degree(k))]:
            lhs, rhs = simple_operator_sides(omega, slot, key)
            if not is_zero(lhs - rhs):
                simple_operator = False
                failures['simple_operator'] = (
                    f"omega({slot[1]}[{slot[0]}]*{render_key(key)}) = {lhs}, expected {rhs}"
                )
                break

    hermitian = omega.cut.is_hermitian
    if not hermitian:
        failures['hermitian'] = "cut propagator is not Hermitian"
    else:
        for key in keys:
            word = TensorWord.of([SymElement.one(truncation), SymElement.from_key(key, truncation=truncation)])
            lhs, rhs = hermitian_sides(omega, word)
            if not is_zero(lhs - rhs):
                hermitian = False
                failures['hermitian'] = f"word [1, {render_key(key)}]: {lhs} vs {rhs}"
                break

    logger.debug("classified measure over %d keys: %s", len(keys), failures or "all flags set")
    return MeasureFlags(normalized, normally_ordered, simple_operator, hermitian, failures)


def feynman_from_measure(omega: FeynmanMeasure) -> Dict[SlotPair, Scalar]:
    """Degree-2 restriction: omega(phi_s * phi_t) for distinct-vertex slot pairs."""
    out = {}
    slots = omega.causal.slots()
    for s in slots:
        for t in slots:
            key = make_key((Vertex.of(s[0], {s[1]: 1}), Vertex.of(t[0], {t[1]: 1})))
            value = omega.evaluate_key(key)
            if not is_zero(value):
                out[(s, t)] = value
    return out
