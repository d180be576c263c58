"""
Operator Layer
Even tensor words of field-algebra elements and the extension of a Feynman
measure to them: locality-ideal generators, commutators of spacelike
operators, Hermiticity, Gram matrices of states, interacting theories with
cutoffs, time-ordered products, the S-matrix and renormalization covariance.

Words are written [A_n, ..., A_1]: the leftmost factor sits at position n,
the rightmost at position 1. Odd positions are evaluated with the measure,
even positions with its anti-time-ordered partner; fields in different
factors pair through the cut propagator, higher position first.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple
from weakref import WeakKeyDictionary

from fields import (
    GroupLike, SymElement, SymKey, Slot, is_group_like, key_coaction, key_coproduct, key_field_degree,
    hopf_exp, hopf_log, make_key, star, sym_product,
)
from models import (
    InapplicableCheck, ModelError, NonNilpotentError, ParityError, Truncation,
)
from scalars import I, ONE, Scalar, ZERO, as_scalar, conj, is_zero
from wick import CutPropagator, FeynmanMeasure, hermitian_ldl

logger = logging.getLogger(__name__)


# =============================================================================
# TENSOR WORDS
# =============================================================================

def _element(value) -> SymElement:
    if isinstance(value, GroupLike):
        return value.element
    return value


@dataclass(frozen=True, eq=False)
class TensorWord:
    """
    Ordered factors, leftmost at the highest position.

    A truncation, when set, drops factor combinations whose combined degrees
    exceed it (the tensor truncation used for A (x) A of a group-like A).
    """
    factors: Tuple[SymElement, ...]
    truncation: Optional[Truncation] = None

    @classmethod
    def of(cls, factors: Iterable, truncation: Optional[Truncation] = None) -> "TensorWord":
        return cls(tuple(_element(f) for f in factors), truncation)

    @property
    def degree(self) -> int:
        return len(self.factors)

    @property
    def parity(self) -> int:
        return len(self.factors) % 2

    def factor_at(self, position: int) -> SymElement:
        return self.factors[len(self.factors) - position]

    def support(self) -> frozenset:
        points = set()
        for f in self.factors:
            points |= f.support()
        return frozenset(points)

    def star(self) -> "TensorWord":
        """(A_n ... A_1)* = A_1* ... A_n*"""
        return TensorWord(tuple(star(f) for f in reversed(self.factors)), self.truncation)

    def concat(self, other: "TensorWord") -> "TensorWord":
        return TensorWord(self.factors + other.factors, self.truncation or other.truncation)

    __add__ = concat

    def map(self, fn) -> "TensorWord":
        return TensorWord(tuple(fn(f) for f in self.factors), self.truncation)

    def __len__(self):
        return len(self.factors)

    def __str__(self):
        return "[" + ", ".join(str(f) for f in self.factors) + "]"


def unit_word(truncation: Truncation = Truncation(), degree: int = 2) -> TensorWord:
    return TensorWord(tuple(SymElement.one(truncation) for _ in range(degree)))


# =============================================================================
# EVALUATION
# =============================================================================

_UNTWISTED: "WeakKeyDictionary[FeynmanMeasure, FeynmanMeasure]" = WeakKeyDictionary()
_CACHES: "WeakKeyDictionary[FeynmanMeasure, Dict]" = WeakKeyDictionary()


def _untwisted(omega: FeynmanMeasure) -> FeynmanMeasure:
    if omega.twist is None:
        return omega
    if omega not in _UNTWISTED:
        _UNTWISTED[omega] = omega.with_twist(None)
    return _UNTWISTED[omega]


def _cache(base: FeynmanMeasure) -> Dict:
    if base not in _CACHES:
        _CACHES[base] = {'anti': {}, 'words': {}, 'cross': {}}
    return _CACHES[base]


def _cross_sum(cut: CutPropagator, parts: Tuple[Tuple[Slot, ...], ...], memo: Dict) -> Scalar:
    """Matchings that pair fields of different factors only; parts ordered by descending position."""
    if parts in memo:
        return memo[parts]
    sizes = [len(p) for p in parts]
    total_fields = sum(sizes)
    if total_fields % 2 or any(2 * s > total_fields for s in sizes):
        memo[parts] = ZERO
        return ZERO
    types = [tuple(sorted(set(p))) for p in parts]
    start = tuple(tuple(p.count(t) for t in ts) for p, ts in zip(parts, types))

    @lru_cache(maxsize=None)
    def rec(state):
        i = next((k for k, counts in enumerate(state) if any(counts)), None)
        if i is None:
            return ONE
        a = next(k for k, n in enumerate(state[i]) if n)
        row = list(state[i])
        row[a] -= 1
        base_state = list(state)
        base_state[i] = tuple(row)
        total = ZERO
        for j in range(i + 1, len(state)):
            for b, ways in enumerate(state[j]):
                if not ways:
                    continue
                w = cut.value(types[i][a], types[j][b])
                if is_zero(w):
                    continue
                nxt = list(base_state)
                col = list(nxt[j])
                col[b] -= 1
                nxt[j] = tuple(col)
                total = total + w * ways * rec(tuple(nxt))
        return total

    value = rec(start)
    memo[parts] = value
    return value


def anti_time_ordered(omega: FeynmanMeasure, key: SymKey) -> Scalar:
    """
    omega-bar on one key: 1 on the unit, otherwise minus the sum over the
    proper coproduct splits (M', M'') != (M, 1) of the word [M', M''].
    """
    base = _untwisted(omega)
    key = make_key(key)
    memo = _cache(base)['anti']
    if key in memo:
        return memo[key]
    if not key:
        return ONE
    total = ZERO
    for left, right, mult in key_coproduct(key):
        if not right:
            continue
        total = total + mult * _word_value(base, (left, right))
    memo[key] = -total
    return -total


def _word_value(base: FeynmanMeasure, keys: Tuple[SymKey, ...]) -> Scalar:
    cache = _cache(base)
    if keys in cache['words']:
        return cache['words'][keys]
    n = len(keys)
    choices = []
    for index, key in enumerate(keys):
        position = n - index
        options = []
        for kept, slots, mult in key_coaction(key):
            inner = anti_time_ordered(base, kept) if position % 2 == 0 else base.evaluate_key(kept)
            if not is_zero(inner):
                options.append((inner * mult, slots))
        if not options:
            cache['words'][keys] = ZERO
            return ZERO
        choices.append(options)

    total = ZERO
    for combo in product(*choices):
        cross = _cross_sum(base.cut, tuple(slots for _, slots in combo), cache['cross'])
        if is_zero(cross):
            continue
        value = cross
        for inner, _ in combo:
            value = value * inner
        total = total + value
    cache['words'][keys] = total
    return total


def omega_tensor(omega: FeynmanMeasure, word: TensorWord) -> Scalar:
    """
    Value of the measure on an even word; the twist acts on each factor.

    Raises:
        ParityError: odd number of factors
    """
    if word.parity:
        raise ParityError(f"tensor word with {word.degree} factors; only even words can be evaluated")
    base = _untwisted(omega)
    factors = word.factors
    if omega.twist is not None:
        factors = tuple(omega.twist.act(f) for f in factors)
    total = ZERO
    for keys, coeff in _term_choices(factors, word.truncation):
        value = _word_value(base, keys)
        if not is_zero(value):
            total = total + value * coeff
    return total


def _term_choices(factors: Tuple[SymElement, ...],
                  trunc: Optional[Truncation]) -> List[Tuple[Tuple[SymKey, ...], Scalar]]:
    """One term per factor, dropping choices whose coefficient product vanishes in the coupling truncation."""
    partial = [((), ONE, 0, 0)]
    for f in factors:
        grown = []
        for keys, coeff, sym, fields_ in partial:
            for key, c in f.terms.items():
                value = coeff * c
                if is_zero(value):
                    continue
                size, degree = sym + len(key), fields_ + key_field_degree(key)
                if trunc is not None and not trunc.admits(size, degree):
                    continue
                grown.append((keys + (key,), value, size, degree))
        partial = grown
    return [(keys, coeff) for keys, coeff, _, _ in partial]


# =============================================================================
# LOCALITY IDEAL
# =============================================================================

def _strictly_before(causal, first: Iterable[str], second: Iterable[str]) -> bool:
    second = list(second)
    return all(causal.leq(d, b) and d != b for d in first for b in second)


def locality_generator(causal, a: SymElement, b, c: SymElement, d,
                       before: Optional[TensorWord] = None,
                       after: Optional[TensorWord] = None) -> Tuple[TensorWord, TensorWord]:
    """
    The two words Y + [A B D, D B C] + X and Y + [A D, D C] + X whose
    difference generates the locality ideal; n = len(X).

    B and D must be group-like. For n even B must have no point <= a point
    of A or C, and D must lie strictly before B or have no point <= a point
    of A or C. For n odd the order is reversed.

    Raises:
        InapplicableCheck: B or D is not group-like, or the support conditions fail
    """
    b, d = _element(b), _element(d)
    for label, x in (('B', b), ('D', d)):
        if not is_group_like(x):
            raise InapplicableCheck(f"locality generator: {label} = {x} is not group-like")
    before = before or TensorWord(())
    after = after or TensorWord(())
    n = len(after)
    ac = a.support() | c.support()
    sb, sd = b.support(), d.support()
    if n % 2 == 0:
        b_ok = causal.none_leq(sb, ac)
        d_ok = _strictly_before(causal, sd, sb) or causal.none_leq(sd, ac)
    else:
        b_ok = causal.none_leq(ac, sb)
        d_ok = _strictly_before(causal, sb, sd) or causal.none_leq(ac, sd)
    if not b_ok:
        raise InapplicableCheck(f"locality generator: B supported at {sorted(sb)} fails the "
                                f"{'past' if n % 2 == 0 else 'future'} condition against {sorted(ac)}")
    if not d_ok:
        raise InapplicableCheck(f"locality generator: D supported at {sorted(sd)} fails the support condition")
    trunc = a.truncation
    a, b, c, d = (x.with_truncation(trunc) for x in (a, b, c, d))
    with_b = TensorWord((sym_product(sym_product(a, b), d), sym_product(sym_product(d, b), c)))
    without_b = TensorWord((sym_product(a, d), sym_product(d, c)))
    return before + with_b + after, before + without_b + after


def locality_defect(omega: FeynmanMeasure, words: Tuple[TensorWord, TensorWord]) -> Scalar:
    return omega_tensor(omega, words[0]) - omega_tensor(omega, words[1])


def commutator_value(omega: FeynmanMeasure, v: TensorWord, w: TensorWord,
                     before: Optional[TensorWord] = None,
                     after: Optional[TensorWord] = None) -> Scalar:
    before = before or TensorWord(())
    after = after or TensorWord(())
    return (omega_tensor(omega, before + v + w + after)
            - omega_tensor(omega, before + w + v + after))


def commutator_mod_locality(omega: FeynmanMeasure, v: TensorWord, w: TensorWord,
                            before: Optional[TensorWord] = None,
                            after: Optional[TensorWord] = None) -> Scalar:
    """
    omega(Y (VW - WV) X) for degree-2 words with pointwise spacelike supports.

    Raises:
        InapplicableCheck: supports not spacelike, or contexts of odd length
    """
    causal = omega.causal
    for x in v.support():
        for y in w.support():
            if not causal.is_spacelike(x, y):
                raise InapplicableCheck(f"commutator: {x} and {y} are not spacelike separated")
    if v.degree != 2 or w.degree != 2:
        raise InapplicableCheck("commutator: V and W must be words of degree 2")
    if len(before or ()) % 2 or len(after or ()) % 2:
        raise InapplicableCheck("commutator: context words must have even length")
    return commutator_value(omega, v, w, before, after)


# =============================================================================
# HERMITICITY AND POSITIVITY
# =============================================================================

def hermitian_sides(omega: FeynmanMeasure, word: TensorWord) -> Tuple[Scalar, Scalar]:
    """(omega(w), conj omega(w*))"""
    return omega_tensor(omega, word), conj(omega_tensor(omega, word.star()))


def hermitian_check(omega: FeynmanMeasure, word: TensorWord) -> bool:
    lhs, rhs = hermitian_sides(omega, word)
    return is_zero(lhs - rhs)


@dataclass
class GramReport:
    """Gram matrix of a word basis and its exact LDL data"""
    matrix: List[List[Scalar]]
    hermitian: bool
    psd: Optional[bool]
    rank: int
    pivots: List[Scalar] = field(default_factory=list)


def gns_gram(omega: FeynmanMeasure, basis: Sequence[TensorWord]) -> GramReport:
    """
    G_ij = omega(b_i* b_j) with exact Hermitian LDL.

    Raises:
        ParityError: an odd basis word
    """
    for b in basis:
        if b.parity:
            raise ParityError(f"basis word {b} has odd length {b.degree}")
    starred = [b.star() for b in basis]
    matrix = [[omega_tensor(omega, bi + bj) for bj in basis] for bi in starred]
    ldl = hermitian_ldl(matrix)
    logger.debug("gram matrix of %d words: psd=%s rank=%d", len(basis), ldl.psd, ldl.rank)
    return GramReport(matrix, ldl.hermitian, ldl.psd, ldl.rank, ldl.pivots)


# =============================================================================
# INTERACTING THEORIES
# =============================================================================

class InteractingTheory:
    """
    Measure plus a local interaction L with nilpotent coefficients and a
    cutoff f (default 1 at every point); factors are multiplied by exp(i f L).

    Raises:
        ModelError: L has a term that is not a single vertex
        NonNilpotentError: a coefficient of L is not nilpotent
    """

    def __init__(self, measure: FeynmanMeasure, lagrangian: SymElement,
                 cutoff: Optional[Mapping[str, Scalar]] = None):
        for key in lagrangian.terms:
            if len(key) != 1:
                raise ModelError(f"lagrangian: term of symmetric degree {len(key)} is not local")
        if not lagrangian.is_nilpotent():
            raise NonNilpotentError("lagrangian: coefficients must be nilpotent (carry a coupling)")
        self.measure = measure
        self.lagrangian = lagrangian
        self.cutoff = {str(p): as_scalar(v) for p, v in (cutoff or {}).items()}
        self.truncation = lagrangian.truncation
        self._exp: Dict[Tuple, SymElement] = {}

    def f(self, point: str, cutoff: Optional[Mapping[str, Scalar]] = None) -> Scalar:
        table = self.cutoff if cutoff is None else cutoff
        return table.get(point, 1)

    def localized(self, cutoff: Optional[Mapping[str, Scalar]] = None) -> SymElement:
        """f L"""
        terms = {k: c * self.f(k[0].point, cutoff) for k, c in self.lagrangian.terms.items()}
        return SymElement(terms, self.truncation)

    def interaction(self, cutoff: Optional[Mapping[str, Scalar]] = None) -> SymElement:
        """exp(i f L), expanded."""
        table = self.cutoff if cutoff is None else cutoff
        sig = tuple(sorted((p, str(v)) for p, v in table.items()))
        if sig not in self._exp:
            self._exp[sig] = hopf_exp(self.localized(cutoff).scale(I)).element
        return self._exp[sig]

    def dressed(self, word: TensorWord, cutoff: Optional[Mapping[str, Scalar]] = None) -> TensorWord:
        e = self.interaction(cutoff)
        return word.map(lambda a: sym_product(e, a.with_truncation(self.truncation)))

    def with_cutoff(self, cutoff: Mapping[str, Scalar]) -> "InteractingTheory":
        return InteractingTheory(self.measure, self.lagrangian, cutoff)


def interacting_eval(theory: InteractingTheory, word: TensorWord,
                     cutoff: Optional[Mapping[str, Scalar]] = None) -> Scalar:
    return omega_tensor(theory.measure, theory.dressed(word, cutoff))


class SMatrix:
    """Word factory for S = 1 (x) exp(i L) and time-ordered operators T(A) = 1 (x) exp(i L) A"""

    def __init__(self, theory: InteractingTheory):
        self.theory = theory
        self.one = SymElement.one(theory.truncation)

    def word(self) -> TensorWord:
        return TensorWord((self.one, self.theory.interaction()))

    def time_ordered(self, *factors: SymElement) -> TensorWord:
        """T(A_n ... A_1) as one word."""
        product_ = self.theory.interaction()
        for a in factors:
            product_ = sym_product(product_, a.with_truncation(self.theory.truncation))
        return TensorWord((self.one, product_))

    def time_ordered_chain(self, *factors: SymElement) -> TensorWord:
        """T(A_n) ... T(A_1) concatenated."""
        word = TensorWord(())
        for a in factors:
            word = word + self.time_ordered(a)
        return word

    def unitarity_word(self) -> TensorWord:
        """S* S = [exp(iL)*, 1, 1, exp(iL)]"""
        e = self.theory.interaction()
        return TensorWord((star(e), self.one, self.one, e))

    def expectation(self) -> Scalar:
        return omega_tensor(self.theory.measure, self.word())

    def matrix_element(self, word: TensorWord) -> Scalar:
        return omega_tensor(self.theory.measure, word)


def s_matrix(theory: InteractingTheory) -> SMatrix:
    return SMatrix(theory)


# =============================================================================
# CUTOFFS AND RENORMALIZATION COVARIANCE
# =============================================================================

@dataclass
class CutoffReport:
    """Outcome of one cutoff identity"""
    hypothesis: str
    lhs: Scalar
    rhs: Scalar

    @property
    def holds(self) -> bool:
        return is_zero(self.lhs - self.rhs)


def _agree_on(theory: InteractingTheory, f, g, points) -> bool:
    return all(is_zero(theory.f(p, f) - theory.f(p, g)) for p in points)


def cutoff_compare(theory: InteractingTheory, f: Mapping[str, Scalar],
                   g: Mapping[str, Scalar], word: TensorWord) -> List[CutoffReport]:
    """
    Cutoff lemma identities for every hypothesis that applies.

    past: f = g on the past of supp w, then omega(M_f w) = omega(M_g w).
    future: f = g on the future of supp w, then
    omega(M_f w) = omega(M_g [E_{f-g}, 1, w, 1, E_{f-g}]).

    Raises:
        InapplicableCheck: f and g differ on both the past and the future
    """
    causal = theory.measure.causal
    support = word.support()
    f = {str(p): as_scalar(v) for p, v in f.items()}
    g = {str(p): as_scalar(v) for p, v in g.items()}
    reports = []
    lhs = None
    if _agree_on(theory, f, g, causal.past_of(support)):
        lhs = interacting_eval(theory, word, f)
        reports.append(CutoffReport('past', lhs, interacting_eval(theory, word, g)))
    if _agree_on(theory, f, g, causal.future_of(support)):
        lhs = interacting_eval(theory, word, f) if lhs is None else lhs
        diff = {p: theory.f(p, f) - theory.f(p, g) for p in causal.points}
        e_diff = theory.interaction(diff)
        one = SymElement.one(theory.truncation)
        wrapped = TensorWord((e_diff, one)) + word + TensorWord((one, e_diff))
        reports.append(CutoffReport('future', lhs, interacting_eval(theory, wrapped, g)))
    if not reports:
        raise InapplicableCheck("cutoff: f and g differ on both the past and the future of the word")
    return reports


@dataclass
class CovarianceReport:
    """Interacting value before and after renormalizing measure, Lagrangian and factors"""
    lhs: Scalar
    rhs: Scalar
    lagrangian: SymElement
    factors_unchanged: List[bool] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return is_zero(self.lhs - self.rhs)


def renorm_covariance(rho, theory: InteractingTheory, word: TensorWord) -> CovarianceReport:
    """
    Compare omega(E A_n, ..., E A_1) with the transformed theory
    rho^-1 . omega, iL' = log(rho(E)), A'_k = exp(-iL') rho(E A_k).

    Raises:
        ModelError: rho changes single-field vertices in degree 1, or the
            transformed Lagrangian is not local
    """
    from uvgroup import renorm_act_measure, renorm_invert

    if rho.component(1):
        raise ModelError("renormalization covariance needs the degree-1 component to be the identity")
    trunc = theory.truncation
    e = theory.interaction()
    lhs = omega_tensor(theory.measure, theory.dressed(word))

    omega_new = renorm_act_measure(renorm_invert(rho), theory.measure)
    il_new = hopf_log(rho.act(e))
    transformed_theory = InteractingTheory(omega_new, il_new.scale(-I))
    e_new = transformed_theory.interaction()
    e_new_inverse = hopf_exp(-il_new).element

    transformed = []
    unchanged = []
    for a in word.factors:
        a = a.with_truncation(trunc)
        a_new = sym_product(e_new_inverse, rho.act(sym_product(e, a)))
        transformed.append(sym_product(e_new, a_new))
        unchanged.append(a_new == a)
    rhs = omega_tensor(omega_new, TensorWord(tuple(transformed), word.truncation))
    return CovarianceReport(lhs, rhs, transformed_theory.lagrangian, unchanged)
