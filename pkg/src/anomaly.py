"""
Symmetries and Anomalies
Group actions on fields (point permutations with per-point linear species
maps, optionally followed by a renormalization twist), their action on
Feynman measures, the induced cocycle of renormalizations, coboundary
solving and the lifting of invariant elements to a twisted action.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import sympy
from sympy import linsolve

from causal import CausalSet
from fields import (
    SymElement, SymKey, Slot, Vertex, is_single_point, key_field_degree, make_key, render_key,
    reduced_coproduct, spanning_keys, tensor_map, tensors_equal,
)
from models import InvariantViolation, ModelError, Truncation
from scalars import (
    ExactComplex, Scalar, ZERO, as_scalar, assemble_scalar, from_sympy, is_zero, scalar_components,
    scalar_context, to_sympy,
)
from uvgroup import (
    Renormalization, find_renormalization, renorm_act_measure, renorm_compose, renorm_invert,
    single_point_keys,
)
from wick import FeynmanMeasure, FeynmanPropagator

logger = logging.getLogger(__name__)


# =============================================================================
# FIELD SYMMETRIES
# =============================================================================

class FieldSymmetry:
    """
    g = tau o F where F permutes points and maps species linearly,
    phi_{x,a} -> sum_b M_x[b][a] phi_{sigma(x),b}, and tau is an optional
    renormalization twist.

    Args:
        causal: The causal model
        permutation: point -> image point (identity when omitted)
        matrices: point -> matrix, rows indexed by species at the image point
        twist: Renormalization applied after F, or None
        name: Label for reports

    Raises:
        ModelError: not a bijection, order not preserved, wrong matrix shape
            or a singular matrix
    """

    def __init__(self, causal: CausalSet, permutation: Optional[Mapping[str, str]] = None,
                 matrices: Optional[Mapping[str, Sequence[Sequence]]] = None,
                 twist: Optional[Renormalization] = None, name: str = "g",
                 truncation: Optional[Truncation] = None):
        self.causal = causal
        self.name = name
        self.permutation = {p: str((permutation or {}).get(p, p)) for p in causal.points}
        self.twist = None if twist is None or twist.is_identity() else twist
        self.truncation = truncation or (twist.truncation if twist is not None else Truncation())
        self.matrices: Dict[str, sympy.Matrix] = {}
        self._validate_permutation()
        for p in causal.points:
            target = self.permutation[p]
            rows, cols = len(causal.species[target]), len(causal.species[p])
            raw = (matrices or {}).get(p)
            if raw is None:
                if rows != cols:
                    raise ModelError(f"symmetry {name}: point {p} and its image {target} carry different species counts")
                matrix = sympy.eye(rows)
            else:
                matrix = sympy.Matrix([[to_sympy(as_scalar(_exact(v))) for v in row] for row in raw])
            if matrix.shape != (rows, cols):
                raise ModelError(f"symmetry {name}: matrix at {p} has shape {matrix.shape}, expected {(rows, cols)}")
            if matrix.det() == 0:
                raise ModelError(f"symmetry {name}: species matrix at {p} is not invertible")
            self.matrices[p] = matrix
        self._vertices: Dict[Vertex, Dict[Vertex, Scalar]] = {}
        self._keys: Dict[SymKey, Dict[SymKey, Scalar]] = {}

    def _validate_permutation(self) -> None:
        images = list(self.permutation.values())
        for q in images:
            self.causal.check_point(q)
        if len(set(images)) != len(images):
            raise ModelError(f"symmetry {self.name}: point map is not a bijection")
        for x in self.causal.points:
            for y in self.causal.points:
                if self.causal.leq(x, y) != self.causal.leq(self.permutation[x], self.permutation[y]):
                    raise ModelError(
                        f"symmetry {self.name}: point map does not preserve the order at ({x}, {y})"
                    )

    @classmethod
    def identity(cls, causal: CausalSet, truncation: Truncation = Truncation()) -> "FieldSymmetry":
        return cls(causal, name="e", truncation=truncation)

    def signature(self) -> Tuple:
        matrices = tuple(
            (p, tuple(str(from_sympy(x)) for x in self.matrices[p])) for p in self.causal.points
        )
        twist = ()
        if self.twist is not None:
            twist = tuple(sorted((render_key(k), str(v)) for k, v in self.twist.data.items()))
        return tuple(sorted(self.permutation.items())), matrices, twist

    def is_identity(self) -> bool:
        return self.signature() == FieldSymmetry.identity(self.causal).signature()

    def linear_part(self) -> "FieldSymmetry":
        if self.twist is None:
            return self
        return FieldSymmetry(self.causal, self.permutation, self._raw_matrices(), None,
                             f"{self.name}.F", self.truncation)

    def _raw_matrices(self) -> Dict[str, List[List[Scalar]]]:
        return {p: [[from_sympy(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]
                for p, m in self.matrices.items()}

    # -------------------------------------------------------------------------
    # Action
    # -------------------------------------------------------------------------

    def vertex_image(self, vertex: Vertex) -> Dict[Vertex, Scalar]:
        if vertex in self._vertices:
            return self._vertices[vertex]
        target = self.permutation[vertex.point]
        if vertex.is_density:
            image = {Vertex.density(target): as_scalar(1)}
        else:
            source_species = self.causal.species[vertex.point]
            target_species = self.causal.species[target]
            syms = sympy.symbols(f"s0:{len(target_species)}")
            matrix = self.matrices[vertex.point]
            expr = sympy.Integer(1)
            for sp, k in vertex.exponents:
                a = source_species.index(sp)
                expr *= sum(matrix[b, a] * syms[b] for b in range(len(target_species))) ** k
            poly = sympy.Poly(sympy.expand(expr), *syms)
            image = {}
            for monom, coeff in poly.terms():
                v = Vertex.of(target, {target_species[b]: e for b, e in enumerate(monom)})
                image[v] = from_sympy(coeff)
        self._vertices[vertex] = image
        return image

    def slot_image(self, slot: Slot) -> List[Tuple[Slot, Scalar]]:
        image = self.vertex_image(Vertex.of(slot[0], {slot[1]: 1}))
        return [(v.fields()[0], c) for v, c in image.items()]

    def linear_key(self, key: SymKey) -> Dict[SymKey, Scalar]:
        if key in self._keys:
            return self._keys[key]
        acc: Dict[SymKey, Scalar] = {}
        for choice in product(*[list(self.vertex_image(v).items()) for v in key]):
            k = make_key(v for v, _ in choice)
            c = 1
            for _, x in choice:
                c = c * x
            acc[k] = acc[k] + c if k in acc else c
        acc = {k: c for k, c in acc.items() if not is_zero(c)}
        self._keys[key] = acc
        return acc

    def apply_linear(self, a: SymElement) -> SymElement:
        acc: Dict[SymKey, Scalar] = {}
        for key, coeff in a.terms.items():
            for k, c in self.linear_key(key).items():
                acc[k] = acc[k] + coeff * c if k in acc else coeff * c
        return SymElement(acc, a.truncation)

    def act(self, a: SymElement) -> SymElement:
        image = self.apply_linear(a)
        return image if self.twist is None else self.twist.act(image)

    __call__ = act

    # -------------------------------------------------------------------------
    # Group structure
    # -------------------------------------------------------------------------

    def compose(self, other: "FieldSymmetry") -> "FieldSymmetry":
        """self after other: twist tau_g conj_F(F_g, tau_h), matrices M_g[sigma_h x] M_h[x]."""
        permutation = {p: self.permutation[other.permutation[p]] for p in self.causal.points}
        matrices = {}
        for p in self.causal.points:
            m = self.matrices[other.permutation[p]] * other.matrices[p]
            matrices[p] = [[from_sympy(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]
        inner = None if other.twist is None else conjugate(self.linear_part(), other.twist)
        if self.twist is None:
            twist = inner
        elif inner is None:
            twist = self.twist
        else:
            twist = renorm_compose(self.twist, inner)
        return FieldSymmetry(self.causal, permutation, matrices, twist,
                             f"{self.name}*{other.name}", self.truncation)

    def inverse(self) -> "FieldSymmetry":
        inverse_perm = {q: p for p, q in self.permutation.items()}
        matrices = {}
        for y in self.causal.points:
            m = self.matrices[inverse_perm[y]].inv()
            matrices[y] = [[from_sympy(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]
        linear_inverse = FieldSymmetry(self.causal, inverse_perm, matrices, None,
                                       f"{self.name}^-1", self.truncation)
        if self.twist is None:
            return linear_inverse
        twist = conjugate(linear_inverse, renorm_invert(self.twist))
        return FieldSymmetry(self.causal, inverse_perm, matrices, twist,
                             f"{self.name}^-1", self.truncation)

    def __repr__(self):
        return f"FieldSymmetry({self.name})"


def _exact(value):
    if isinstance(value, float):
        raise ModelError(f"symmetry matrices need exact entries, got float {value}")
    if isinstance(value, str):
        return ExactComplex.parse(value)
    return value


def conjugate(g: FieldSymmetry, rho: Renormalization) -> Renormalization:
    """g rho g^-1 with data pi(g(rho(g^-1 X)))."""
    inverse = g.inverse()
    trunc = rho.truncation
    data = {}
    for key in single_point_keys(rho.causal, trunc):
        pulled = inverse.act(SymElement.from_key(key, truncation=trunc))
        image = g.act(rho.act(pulled))
        target = key[0].point
        data[key] = image.coefficient((Vertex.density(target),))
    return Renormalization(rho.causal, data, trunc)


def closure(generators: Sequence[FieldSymmetry], bound: int = 64) -> Optional[List[FieldSymmetry]]:
    """All products of the generators, identity first; None past the bound."""
    if not generators:
        return []
    causal = generators[0].causal
    identity = FieldSymmetry.identity(causal, generators[0].truncation)
    elements = {identity.signature(): identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for g in frontier:
            for s in generators:
                h = s.compose(g)
                sig = h.signature()
                if sig in elements:
                    continue
                elements[sig] = h
                nxt.append(h)
                if len(elements) > bound:
                    logger.info("closure exceeded %d elements; treating the group as infinite", bound)
                    return None
        frontier = nxt
    return list(elements.values())


# =============================================================================
# ACTION ON MEASURES
# =============================================================================

def _transport(g_inverse: FieldSymmetry, table, slots) -> Dict[Tuple[Slot, Slot], Scalar]:
    out = {}
    for s in slots:
        for t in slots:
            value = ZERO
            for s2, a in g_inverse.slot_image(s):
                for t2, b in g_inverse.slot_image(t):
                    entry = table.value(s2, t2)
                    if not is_zero(entry):
                        value = value + a * b * entry
            if not is_zero(value):
                out[(s, t)] = value
    return out


def act_measure(g: FieldSymmetry, omega: FeynmanMeasure) -> FeynmanMeasure:
    """
    (g . omega)(A) = omega(g^-1 A).

    Raises:
        ModelError: the linear part does not preserve the cut propagator
    """
    causal = omega.causal
    linear = g.linear_part()
    linear_inverse = linear.inverse()
    slots = causal.slots()
    moved_cut = _transport(linear_inverse, omega.cut, slots)
    keys = set(moved_cut) | set(omega.cut.entries)
    if any(not is_zero(moved_cut.get(k, ZERO) - omega.cut.value(*k)) for k in keys):
        raise ModelError(f"symmetry {g.name} does not preserve the cut propagator")
    feynman = FeynmanPropagator(causal, _transport(linear_inverse, omega.feynman, slots))
    twist = None if omega.twist is None else conjugate(linear, omega.twist)
    moved = FeynmanMeasure(causal, omega.cut, feynman, None if twist is None or twist.is_identity() else twist)
    if g.twist is not None:
        moved = renorm_act_measure(renorm_invert(g.twist), moved)
    return moved


def is_invariant(omega: FeynmanMeasure, group: Sequence[FieldSymmetry],
                 keys: Sequence[SymKey]) -> List[Tuple[str, SymKey]]:
    """(element name, key) pairs where omega(g X) != omega(X)."""
    bad = []
    for g in group:
        for key in keys:
            x = SymElement.from_key(key, truncation=Truncation(len(key), key_field_degree(key)))
            if not is_zero(omega.evaluate(g.act(x)) - omega.evaluate_key(key)):
                bad.append((g.name, key))
    return bad


# =============================================================================
# COCYCLES
# =============================================================================

@dataclass
class CocycleData:
    """r_g for each group element, with r_g . (g . omega) = omega"""
    measure: FeynmanMeasure
    elements: List[FieldSymmetry]
    values: Dict[Tuple, Renormalization]
    truncation: Truncation
    finite: bool = True

    def get(self, g: FieldSymmetry) -> Renormalization:
        sig = g.signature()
        if sig not in self.values:
            self.values[sig] = find_renormalization(act_measure(g, self.measure), self.measure, self.truncation)
        return self.values[sig]


def induced_cocycle(group: Sequence[FieldSymmetry], omega: FeynmanMeasure,
                    truncation: Truncation = Truncation(), finite: bool = True) -> CocycleData:
    """r_g = find_renormalization(g . omega, omega) for each element."""
    values = {}
    for g in group:
        values[g.signature()] = find_renormalization(act_measure(g, omega), omega, truncation)
        logger.debug("cocycle value for %s: %s", g.name, values[g.signature()])
    return CocycleData(omega, list(group), values, truncation, finite)


def cocycle_failures(cocycle: CocycleData) -> List[Tuple[str, str]]:
    """Pairs (g, h) violating r_gh = conj(g, r_h) o r_g."""
    bad = []
    for g in cocycle.elements:
        for h in cocycle.elements:
            expected = renorm_compose(conjugate(g, cocycle.get(h)), cocycle.get(g))
            if not cocycle.get(g.compose(h)).same_as(expected):
                bad.append((g.name, h.name))
    return bad


def cocycle_check(cocycle: CocycleData) -> bool:
    return not cocycle_failures(cocycle)


def coboundary_of(g: FieldSymmetry, rho: Renormalization) -> Renormalization:
    """conj(g, rho) o rho^-1, the value at g of the coboundary of rho."""
    return renorm_compose(conjugate(g, rho), renorm_invert(rho))


@dataclass
class CoboundaryResult:
    """A renormalization making the measure invariant, or the obstruction"""
    renormalization: Optional[Renormalization]
    method: str
    obstruction: Optional[Dict] = None

    @property
    def solved(self) -> bool:
        return self.renormalization is not None


def _levels(causal: CausalSet, truncation: Truncation, m: int):
    keys = [k for k in spanning_keys(causal, truncation) if len(k) == m]
    cells: Dict[int, List[SymKey]] = {}
    fixed: Dict[int, List[SymKey]] = {}
    for k in keys:
        target = cells if is_single_point(k) and not (len(k) == 1 and k[0].is_density) else fixed
        target.setdefault(key_field_degree(k), []).append(k)
    for f in sorted(set(cells) | set(fixed)):
        yield f, cells.get(f, []), fixed.get(f, [])


def _solve_components(unknowns: List[SymKey],
                      equations: List[Tuple[Dict[SymKey, Scalar], Scalar]]) -> Optional[Dict[SymKey, Scalar]]:
    """
    Solve sum_Y a_Y u(Y) = b per scalar component with sympy; a_Y must be exact.
    None when inconsistent; free parameters are set to zero.
    """
    ring, regulator = scalar_context([b for _, b in equations])
    components = sorted({k for _, b in equations for k in scalar_components(b)})
    syms = sympy.symbols(f"u0:{len(unknowns)}") if unknowns else ()
    index = {k: i for i, k in enumerate(unknowns)}
    solution: Dict[SymKey, Dict] = {k: {} for k in unknowns}
    for comp in components or [(0, ())]:
        eqs = []
        for coeffs, b in equations:
            lhs = sum((to_sympy(c) * syms[index[y]] for y, c in coeffs.items()), sympy.Integer(0))
            rhs = to_sympy(scalar_components(b).get(comp, ZERO))
            eq = sympy.expand(lhs - rhs)
            if eq != 0:
                eqs.append(eq)
        if not eqs:
            continue
        if not syms:
            return None
        result = linsolve(eqs, *syms)
        if result is sympy.S.EmptySet or len(result) == 0:
            return None
        values = next(iter(result))
        free = {s: 0 for v in values for s in sympy.sympify(v).free_symbols}
        for key, v in zip(unknowns, values):
            exact = from_sympy(sympy.sympify(v).subs(free))
            if not exact.is_zero():
                solution[key][comp] = exact
    return {k: assemble_scalar(c, ring, regulator) for k, c in solution.items()}


def coboundary_solve(cocycle: CocycleData, generators: Optional[Sequence[FieldSymmetry]] = None) -> CoboundaryResult:
    """
    Find rho with rho . omega invariant under the group, level by level.

    Finite groups average: u(X) = avg_g mu0(g X) - mu0(X). Otherwise the
    equations (g u)(X) - u(X) = mu0(X) - mu0(g X) are solved exactly for
    each generator, and an inconsistency is returned as an obstruction.
    """
    omega = cocycle.measure
    causal = omega.causal
    trunc = cocycle.truncation
    group = cocycle.elements if cocycle.finite else list(generators or cocycle.elements)
    method = 'average' if cocycle.finite else 'linear'
    data: Dict[SymKey, Scalar] = {}

    for m in range(1, trunc.max_sym_degree + 1):
        for f, cells, fixed in _levels(causal, trunc, m):
            rho = Renormalization(causal, data, trunc)
            mu0 = renorm_act_measure(rho, omega)
            images = {}
            for g in group:
                for key in cells + fixed:
                    x = SymElement.from_key(key, truncation=trunc)
                    images[(g.signature(), key)] = g.act(x)

            if method == 'average':
                for key in cells:
                    avg = ZERO
                    for g in group:
                        avg = avg + mu0.evaluate(images[(g.signature(), key)])
                    u = avg * Fraction(1, len(group)) - mu0.evaluate_key(key)
                    if not is_zero(u):
                        data[key] = u
                continue

            cell_set = set(cells)
            equations = []
            for g in group:
                for key in cells + fixed:
                    image = images[(g.signature(), key)]
                    coeffs: Dict[SymKey, Scalar] = {}
                    for y, c in image.terms.items():
                        if y in cell_set:
                            coeffs[y] = coeffs.get(y, ZERO) + c
                    if key in cell_set:
                        coeffs[key] = coeffs.get(key, ZERO) - 1
                    coeffs = {y: c for y, c in coeffs.items() if not is_zero(c)}
                    b = mu0.evaluate_key(key) - mu0.evaluate(image)
                    equations.append((coeffs, b, g.name, key))
            solution = _solve_components(cells, [(c, b) for c, b, _, _ in equations])
            if solution is None:
                residual = {
                    f"{name}:{render_key(key)}": str(b)
                    for c, b, name, key in equations if not is_zero(b)
                }
                logger.info("coboundary obstruction at degree %d, field degree %d", m, f)
                return CoboundaryResult(None, method, {'degree': m, 'field_degree': f, 'residual': residual})
            for key, u in solution.items():
                if not is_zero(u):
                    data[key] = u

    rho = Renormalization(causal, data, trunc)
    leftover = is_invariant(renorm_act_measure(rho, omega), group, spanning_keys(causal, trunc))
    if leftover:
        name, key = leftover[0]
        return CoboundaryResult(None, method, {
            'degree': len(key), 'field_degree': key_field_degree(key),
            'residual': {f"{name}:{render_key(key)}": "not invariant"},
        })
    return CoboundaryResult(rho, method)


# =============================================================================
# INVARIANT LIFTING
# =============================================================================

Action = Callable[[FieldSymmetry], Callable[[SymElement], SymElement]]


def plain_action(g: FieldSymmetry) -> Callable[[SymElement], SymElement]:
    return g.act


def twisted_action(cocycle: CocycleData) -> Action:
    """sigma(g) = r_g^-1 o g"""
    inverses: Dict[Tuple, Renormalization] = {}

    def sigma(g: FieldSymmetry):
        sig = g.signature()
        if sig not in inverses:
            inverses[sig] = renorm_invert(cocycle.get(g))
        return lambda a: inverses[sig].act(g.act(a))

    return sigma


@dataclass
class LiftResult:
    """a + v, or the cocycle class b_g when no v exists"""
    element: Optional[SymElement]
    correction: Optional[SymElement]
    differences: Dict[str, SymElement] = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.element is not None


def _key_map(action, trunc: Truncation):
    return lambda key: action(SymElement.from_key(key, truncation=trunc))


def invariant_lift(a: SymElement, cocycle: CocycleData,
                   generators: Optional[Sequence[FieldSymmetry]] = None) -> LiftResult:
    """
    Correct a sigma_1-invariant element into v + a with
    sigma_1(g)(a + v) = sigma_2(g)(a) + v.

    Raises:
        ModelError: a is not sigma_1-invariant, or its reduced coproduct is
            not invariant under both actions
        InvariantViolation: sigma_2(g)(a) - a is not primitive
    """
    trunc = a.truncation
    twisted = twisted_action(cocycle)
    group = cocycle.elements if cocycle.finite else list(generators or cocycle.elements)
    reduced = reduced_coproduct(a)
    differences: Dict[str, SymElement] = {}
    by_element: List[SymElement] = []
    for g in group:
        if g.act(a) != a:
            raise ModelError(f"invariant_lift: element is not invariant under {g.name}")
        for label, action in (('plain', g.act), ('twisted', twisted(g))):
            moved = tensor_map(reduced, _key_map(action, trunc), _key_map(action, trunc))
            if not tensors_equal(moved, reduced):
                raise ModelError(f"invariant_lift: reduced coproduct not invariant under the {label} action of {g.name}")
        b = twisted(g)(a) - a
        for key in b.terms:
            if len(key) != 1:
                raise InvariantViolation(
                    f"invariant_lift: sigma_2({g.name})(a) - a has a term {render_key(key)} that is not primitive"
                )
        differences[g.name] = b
        by_element.append(b)

    if cocycle.finite:
        v = SymElement.zero(trunc)
        for b in by_element:
            v = v - b
        v = v.scale(Fraction(1, len(group)))
    else:
        primitives = sorted({k for b in by_element for k in b.terms}
                            | {k for g in group for b in by_element
                               for key in b.terms for k in g.linear_key(key)})
        equations = []
        for g, b in zip(group, by_element):
            for key in primitives:
                coeffs: Dict[SymKey, Scalar] = {}
                for y in primitives:
                    image = g.act(SymElement.from_key(y, truncation=trunc))
                    c = image.coefficient(key)
                    if not is_zero(c):
                        coeffs[y] = c
                coeffs[key] = coeffs.get(key, ZERO) - 1
                coeffs = {y: c for y, c in coeffs.items() if not is_zero(c)}
                equations.append((coeffs, b.coefficient(key)))
        solution = _solve_components(primitives, equations)
        if solution is None:
            return LiftResult(None, None, differences)
        v = SymElement(solution, trunc)

    lifted = a + v
    for g in group:
        if g.act(lifted) != twisted(g)(a) + v:
            raise InvariantViolation(f"invariant_lift: correction fails for {g.name}")
    return LiftResult(lifted, v, differences)
