"""
Ultraviolet Group
Renormalizations as point-local counterterm data, their block-substitution
action on the field algebra, composition and inversion, the action on
Feynman measures, the stage-by-stage solver between two measures,
factorization along the filtration, and Laurent pole killing.

Data convention: a renormalization stores c(X) for nonempty keys X supported
at a single point. c(1_x) = 1 is implicit; every other key defaults to 0,
so the identity has no stored data.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from sympy.utilities.iterables import multiset_partitions

from causal import CausalSet
from fields import (
    SymElement, SymKey, Vertex, is_single_point, key_coaction, key_field_degree,
    make_key, render_key, spanning_keys,
)
from models import InvariantViolation, ModelError, SubtractionScheme, Truncation
from scalars import Scalar, ZERO, as_scalar, conj, is_zero, principal_part
from wick import FeynmanMeasure

logger = logging.getLogger(__name__)


def _is_density_singleton(key: SymKey) -> bool:
    return len(key) == 1 and key[0].is_density


def _level(key: SymKey) -> Tuple[int, int]:
    return len(key), key_field_degree(key)


class Renormalization:
    """
    Element of the ultraviolet group through a truncation.

    Args:
        causal: The causal model the data lives on
        data: Mapping single-point key -> scalar
        truncation: Degrees the data is meaningful through

    Raises:
        ModelError: empty or multi-point key, or c(1_x) other than 1
    """

    def __init__(self, causal: CausalSet, data: Optional[Mapping[SymKey, Scalar]] = None,
                 truncation: Truncation = Truncation()):
        clean: Dict[SymKey, Scalar] = {}
        for key, value in (data or {}).items():
            key = make_key(key)
            value = as_scalar(value)
            if not key:
                raise ModelError("renormalization: no component on the unit (degree 0)")
            if not is_single_point(key):
                raise ModelError(f"renormalization: key {render_key(key)} spans several points")
            for v in key:
                causal.check_point(v.point)
            if _is_density_singleton(key):
                if not is_zero(value - 1):
                    raise ModelError(
                        f"renormalization: degree-1 density component must be the identity, "
                        f"got c({render_key(key)}) = {value}"
                    )
                continue
            if not is_zero(value):
                clean[key] = value
        self.causal = causal
        self.data = clean
        self.truncation = truncation
        self._blocks: Dict[SymKey, Dict[Vertex, Scalar]] = {}
        self._keys: Dict[SymKey, SymElement] = {}

    @classmethod
    def identity(cls, causal: CausalSet, truncation: Truncation = Truncation()) -> "Renormalization":
        return cls(causal, {}, truncation)

    def value(self, key: SymKey) -> Scalar:
        key = make_key(key)
        if _is_density_singleton(key):
            return 1
        return self.data.get(key, ZERO)

    def values(self) -> List[Scalar]:
        return list(self.data.values())

    def component(self, m: int) -> Dict[SymKey, Scalar]:
        return {k: c for k, c in self.data.items() if len(k) == m}

    def restricted(self, m: int) -> "Renormalization":
        """Keep only the symmetric-degree-m data."""
        return Renormalization(self.causal, self.component(m), self.truncation)

    def is_identity(self) -> bool:
        return not self.data

    def same_as(self, other: "Renormalization") -> bool:
        keys = set(self.data) | set(other.data)
        return all(is_zero(self.value(k) - other.value(k)) for k in keys)

    # -------------------------------------------------------------------------
    # Action
    # -------------------------------------------------------------------------

    def _block(self, block: SymKey) -> Dict[Vertex, Scalar]:
        """t(X) = sum over coaction splits of c(density part) * residual vertex."""
        if block in self._blocks:
            return self._blocks[block]
        out: Dict[Vertex, Scalar] = {}
        if is_single_point(block):
            point = block[0].point
            for omega_key, slots, mult in key_coaction(block):
                c = self.value(omega_key)
                if is_zero(c):
                    continue
                exps: Dict[str, int] = {}
                for _, sp in slots:
                    exps[sp] = exps.get(sp, 0) + 1
                v = Vertex.of(point, exps)
                out[v] = out[v] + c * mult if v in out else c * mult
        out = {v: c for v, c in out.items() if not is_zero(c)}
        self._blocks[block] = out
        return out

    def _point_terms(self, vertices: List[Vertex]) -> Dict[SymKey, Scalar]:
        """Sum over set partitions of the vertices at one point."""
        acc: Dict[SymKey, Scalar] = {}
        for partition in multiset_partitions(list(range(len(vertices)))):
            images = [self._block(make_key(vertices[i] for i in part)) for part in partition]
            if any(not img for img in images):
                continue
            for choice in product(*[list(img.items()) for img in images]):
                key = make_key(v for v, _ in choice)
                coeff = 1
                for _, c in choice:
                    coeff = coeff * c
                acc[key] = acc[key] + coeff if key in acc else coeff
        return {k: c for k, c in acc.items() if not is_zero(c)}

    def act_key(self, key: SymKey) -> SymElement:
        key = make_key(key)
        if key in self._keys:
            return self._keys[key]
        trunc = self.truncation.widen(len(key), key_field_degree(key))
        by_point: Dict[str, List[Vertex]] = {}
        for v in key:
            by_point.setdefault(v.point, []).append(v)
        factors = [self._point_terms(vs) for _, vs in sorted(by_point.items())]
        acc: Dict[SymKey, Scalar] = {}
        for choice in product(*[list(f.items()) for f in factors]):
            merged = make_key(v for k, _ in choice for v in k)
            coeff = 1
            for _, c in choice:
                coeff = coeff * c
            acc[merged] = acc[merged] + coeff if merged in acc else coeff
        result = SymElement(acc, trunc)
        self._keys[key] = result
        return result

    def act(self, a: SymElement) -> SymElement:
        acc: Dict[SymKey, Scalar] = {}
        for key, coeff in a.terms.items():
            for image, c in self.act_key(key).terms.items():
                value = c * coeff
                acc[image] = acc[image] + value if image in acc else value
        return SymElement(acc, a.truncation)

    __call__ = act

    # -------------------------------------------------------------------------
    # Serialization
    # -------------------------------------------------------------------------

    def to_entries(self) -> Dict[str, List[Dict]]:
        """Per-degree lists of {point, monomials, value}."""
        out: Dict[str, List[Dict]] = {}
        for key in sorted(self.data, key=lambda k: (_level(k), k)):
            out.setdefault(str(len(key)), []).append({
                'point': key[0].point,
                'monomials': [dict(v.exponents) for v in key],
                'value': self.data[key],
            })
        return out

    @classmethod
    def from_entries(cls, causal: CausalSet, entries: Mapping[str, Iterable[Mapping]],
                     truncation: Truncation = Truncation()) -> "Renormalization":
        data: Dict[SymKey, Scalar] = {}
        for degree, items in entries.items():
            for item in items:
                point = str(item['point'])
                key = make_key(Vertex.of(point, mono) for mono in item['monomials'])
                if len(key) != int(degree):
                    raise ModelError(
                        f"renormalization: entry {render_key(key)} listed under degree {degree}"
                    )
                if key in data:
                    raise ModelError(f"renormalization: entry {render_key(key)} listed twice")
                data[key] = as_scalar(item['value'])
        return cls(causal, data, truncation)

    def __repr__(self):
        body = ", ".join(f"{render_key(k)}: {c}" for k, c in sorted(self.data.items()))
        return f"Renormalization({{{body}}})"


def renorm_act_sym(rho: Renormalization, a: SymElement) -> SymElement:
    return rho.act(a)


def single_point_keys(causal: CausalSet, truncation: Truncation) -> List[SymKey]:
    return [k for k in spanning_keys(causal, truncation, single_point=True)
            if not _is_density_singleton(k)]


def _wider(*rhos: Renormalization) -> Truncation:
    trunc = rhos[0].truncation
    for r in rhos[1:]:
        trunc = trunc.widen(r.truncation.max_sym_degree, r.truncation.max_field_degree)
    return trunc


def renorm_compose(*rhos: Renormalization) -> Renormalization:
    """
    compose(r2, r1) acts as r2 after r1; any number of factors, leftmost last.

    The density coefficient of r2(Y) at x is c2(Y) for Y supported at x and
    zero otherwise, so c(X) = sum over single-point Y of r1(X)[Y] c2(Y).
    """
    if len(rhos) == 1:
        return rhos[0]
    if len(rhos) > 2:
        return renorm_compose(rhos[0], renorm_compose(*rhos[1:]))
    outer, inner = rhos
    trunc = _wider(outer, inner)
    data = {}
    for key in single_point_keys(inner.causal, trunc):
        total = ZERO
        for image, c in inner.act_key(key).terms.items():
            if image and is_single_point(image):
                total = total + c * outer.value(image)
        data[key] = total
    return Renormalization(inner.causal, data, trunc)


def renorm_invert(rho: Renormalization) -> Renormalization:
    """Solve compose(u, rho) = identity level by level."""
    trunc = rho.truncation
    u: Dict[SymKey, Scalar] = {}
    for key in single_point_keys(rho.causal, trunc):
        image = rho.act_key(key)
        total = ZERO
        for other, coeff in image.terms.items():
            if other == key or not other or not is_single_point(other):
                continue
            if _is_density_singleton(other):
                total = total + coeff
            elif other in u:
                total = total + coeff * u[other]
        u[key] = -total
    return Renormalization(rho.causal, u, trunc)


def commutator(a: Renormalization, b: Renormalization) -> Renormalization:
    """a b a^-1 b^-1"""
    return renorm_compose(a, b, renorm_invert(a), renorm_invert(b))


def renorm_act_measure(rho: Renormalization, omega: FeynmanMeasure) -> FeynmanMeasure:
    """(rho . omega)(A) = omega(rho(A)): the twist becomes twist after rho."""
    twist = rho if omega.twist is None else renorm_compose(omega.twist, rho)
    return omega.with_twist(None if twist.is_identity() else twist)


# =============================================================================
# FILTRATION AND SUBGROUPS
# =============================================================================

def in_filtration(rho: Renormalization, n: int) -> bool:
    """Member of G_n: components of symmetric degree <= n are trivial."""
    return all(len(k) > n for k in rho.data)


def in_simple_subgroup(rho: Renormalization) -> bool:
    """Vanishes on every key containing a vertex with at most one field."""
    return all(all(v.field_degree >= 2 for v in k) for k in rho.data)


def is_real(rho: Renormalization) -> bool:
    """Commutes with the star involution: conj c_m = (-1)^(m+1) c_m."""
    return all(is_zero(conj(c) - c * (1 if len(k) % 2 else -1)) for k, c in rho.data.items())


def factorize(rho: Renormalization) -> List[Renormalization]:
    """
    [g0, g1, ..., g_{D-1}] with rho = g_{D-1} ... g1 g0 and g_k in G_k
    carrying data only in symmetric degree k + 1.
    """
    parts = []
    current = rho
    for k in range(rho.truncation.max_sym_degree):
        g = current.restricted(k + 1)
        parts.append(g)
        if not g.is_identity():
            current = renorm_compose(current, renorm_invert(g))
    if not current.is_identity():
        raise InvariantViolation(f"factorization left a nontrivial remainder: {current}")
    return parts


# =============================================================================
# MEASURE COMPARISON AND SOLVING
# =============================================================================

def measures_agree(omega1: FeynmanMeasure, omega2: FeynmanMeasure,
                   keys: Iterable[SymKey]) -> List[SymKey]:
    """Keys where the two measures differ."""
    return [k for k in keys if not is_zero(omega1.evaluate_key(k) - omega2.evaluate_key(k))]


def _check_same_cut(omega1: FeynmanMeasure, omega2: FeynmanMeasure) -> None:
    if omega1.causal.points != omega2.causal.points or omega1.causal.leq_pairs != omega2.causal.leq_pairs:
        raise ModelError("measures live on different causal models")
    if not omega1.cut.same_entries(omega2.cut):
        raise ModelError("measures have different cut propagators; no renormalization relates them")


def _stage_keys(causal: CausalSet, truncation: Truncation, m: int):
    keys = [k for k in spanning_keys(causal, truncation) if len(k) == m]
    multi = [k for k in keys if not is_single_point(k)]
    levels: Dict[int, List[SymKey]] = {}
    for k in keys:
        if is_single_point(k) and not _is_density_singleton(k):
            levels.setdefault(key_field_degree(k), []).append(k)
    densities = [k for k in keys if _is_density_singleton(k)]
    return multi + densities, [levels[f] for f in sorted(levels)]


def find_renormalization(omega1: FeynmanMeasure, omega2: FeynmanMeasure,
                         truncation: Truncation = Truncation()) -> Renormalization:
    """
    The unique g with g . omega1 = omega2 through the truncation.

    Stage m first verifies agreement on multi-point keys of degree m, then
    solves each single-point cell g(X) = omega2(X) - omega1(g'(X)) where g'
    is the data found so far.

    Raises:
        ModelError: different cut propagators
        InvariantViolation: a multi-point difference survives its stage
    """
    _check_same_cut(omega1, omega2)
    causal = omega1.causal
    data: Dict[SymKey, Scalar] = {}
    for m in range(1, truncation.max_sym_degree + 1):
        checks, levels = _stage_keys(causal, truncation, m)
        current = Renormalization(causal, data, truncation)
        for key in checks:
            lhs = omega1.evaluate(current.act_key(key))
            rhs = omega2.evaluate_key(key)
            if not is_zero(lhs - rhs):
                raise InvariantViolation(
                    f"stage {m}: measures differ on {render_key(key)} ({lhs} vs {rhs}), "
                    f"which no point-local counterterm can fix"
                )
        for cells in levels:
            current = Renormalization(causal, data, truncation)
            for key in cells:
                value = omega2.evaluate_key(key) - omega1.evaluate(current.act_key(key))
                if not is_zero(value):
                    data[key] = value
        logger.debug("stage %d solved, %d nonzero cells so far", m, len(data))
    return Renormalization(causal, data, truncation)


# =============================================================================
# POLE KILLING
# =============================================================================

@dataclass
class PoleKillResult:
    """Counterterms and the resulting finite measure"""
    renormalization: Renormalization
    measure: FeynmanMeasure
    stages: List[Dict] = field(default_factory=list)
    verified_keys: int = 0


def pole_kill(omega: FeynmanMeasure, truncation: Truncation = Truncation(),
              scheme: SubtractionScheme = SubtractionScheme.MINIMAL,
              finite_parts: Optional[Mapping[SymKey, Scalar]] = None) -> PoleKillResult:
    """
    Cancel principal parts stage by stage: c(X) = -principal(omega(g'(X))),
    plus a finite part from the file scheme.

    Raises:
        InvariantViolation: a multi-point principal part survives its stage,
            or a pole remains after the last stage
    """
    finite_parts = dict(finite_parts or {}) if scheme == SubtractionScheme.FILE else {}
    causal = omega.causal
    data: Dict[SymKey, Scalar] = {}
    stages = []
    for m in range(1, truncation.max_sym_degree + 1):
        checks, levels = _stage_keys(causal, truncation, m)
        current = Renormalization(causal, data, truncation)
        for key in checks:
            pole = principal_part(omega.evaluate(current.act_key(key)))
            if not is_zero(pole):
                raise InvariantViolation(
                    f"stage {m}: pole {pole} on multi-point element {render_key(key)}"
                )
        killed = 0
        for cells in levels:
            current = Renormalization(causal, data, truncation)
            for key in cells:
                pole = principal_part(omega.evaluate(current.act_key(key)))
                value = -pole + finite_parts.get(key, ZERO)
                if not is_zero(pole):
                    killed += 1
                if not is_zero(value):
                    data[key] = value
        stages.append({'degree': m, 'poles_cancelled': killed})
        logger.info("pole_kill stage %d: cancelled %d poles", m, killed)

    rho = Renormalization(causal, data, truncation)
    finite = renorm_act_measure(rho, omega)
    keys = spanning_keys(causal, truncation)
    for key in keys:
        pole = principal_part(finite.evaluate_key(key))
        if not is_zero(pole):
            raise InvariantViolation(f"pole {pole} remains on {render_key(key)} after pole killing")
    return PoleKillResult(rho, finite, stages, len(keys))
