"""
Expression Grammar
Text forms of field-algebra elements, scalars and tensor words.

    phi[x]           one field at x            phi[x]^2    the vertex phi^2 at x
    (phi^2*psi)[x]   composite vertex          1[x]        the density at x
    phi[x]*phi[y]    product of vertices       lam, eps    coupling, regulator
    i, 1/2, 3i       scalars                   exp(...)    exponential
    [A_n, ..., A_1]  tensor word, rightmost factor at position 1

A power of a vertex written after a product, e.g. (phi[x]*1[y])^2, repeats
vertices in the multiset; only the bracketed exponent forms a composite.
"""

import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from causal import CausalSet
from fields import SymElement, Vertex, hopf_exp, sym_product
from models import ModelError, Truncation
from scalars import (
    CouplingRing, ExactComplex, I, Regulator, Scalar, as_scalar, series_exp,
)

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_POWER = r"(?:\s*(?:\^|\*\*)\s*(\d+))"
_COMPOSITE = re.compile(
    rf"\(\s*({_NAME}{_POWER}?(?:\s*\*\s*{_NAME}{_POWER}?)*)\s*\)\s*\[\s*({_NAME}|\d+)\s*\]"
)
_DENSITY = re.compile(rf"(?<![A-Za-z0-9_.])1\s*\[\s*({_NAME}|\d+)\s*\]")
_SIMPLE = re.compile(rf"({_NAME})\s*\[\s*({_NAME}|\d+)\s*\]{_POWER}?")
_FACTOR = re.compile(rf"({_NAME}){_POWER}?")
_IMAGINARY = re.compile(r"(?<![A-Za-z0-9_])(\d+)\s*i\b")

_TRANSFORMS = standard_transformations + (convert_xor,)
_Exp = sympy.Function('Exp')


class ExpressionContext:
    """
    Names an expression may use: the model's points and species, the coupling
    ring, the regulator and the truncation of produced elements.
    """

    def __init__(self, causal: CausalSet, ring: Optional[CouplingRing] = None,
                 regulator: Optional[Regulator] = None, truncation: Truncation = Truncation()):
        self.causal = causal
        self.ring = ring
        self.regulator = regulator
        self.truncation = truncation

    def vertex(self, point: str, exponents: Dict[str, int]) -> Vertex:
        if point not in self.causal.species:
            raise ModelError(f"expression: unknown point {point}")
        for sp in exponents:
            if sp not in self.causal.species[point]:
                raise ModelError(f"expression: species {sp} not declared at point {point}")
        return Vertex.of(point, exponents)


def _substitute_atoms(text: str, ctx: ExpressionContext, vertices: Dict[str, Vertex]) -> str:
    def register(vertex: Vertex) -> str:
        name = f"__v{len(vertices)}"
        vertices[name] = vertex
        return f" {name} "

    def composite(match):
        exps: Dict[str, int] = {}
        for factor in _FACTOR.finditer(match.group(1)):
            sp = factor.group(1)
            exps[sp] = exps.get(sp, 0) + int(factor.group(2) or 1)
        return register(ctx.vertex(match.group(len(match.groups())), exps))

    def density(match):
        return register(ctx.vertex(match.group(1), {}))

    def simple(match):
        return register(ctx.vertex(match.group(2), {match.group(1): int(match.group(3) or 1)}))

    text = _COMPOSITE.sub(composite, text)
    text = _DENSITY.sub(density, text)
    text = _SIMPLE.sub(simple, text)
    return _IMAGINARY.sub(r"\1*i", text)


def _local_dict(ctx: ExpressionContext, vertices: Dict[str, Vertex]) -> Dict:
    local = {name: sympy.Symbol(name) for name in vertices}
    local['i'] = sympy.I
    local['I'] = sympy.I
    local['exp'] = _Exp
    if ctx.ring is not None:
        for name in ctx.ring.names:
            local[name] = sympy.Symbol(name)
    if ctx.regulator is not None:
        local[ctx.regulator.name] = sympy.Symbol(ctx.regulator.name)
    return local


class _Converter:
    def __init__(self, ctx: ExpressionContext, vertices: Dict[str, Vertex]):
        self.ctx = ctx
        self.vertices = vertices

    def __call__(self, node):
        ctx = self.ctx
        if node.is_Integer:
            return ExactComplex(int(node))
        if node.is_Rational:
            return ExactComplex(Fraction(int(node.p), int(node.q)))
        if node.is_Float:
            raise ModelError(f"expression: inexact number {node}; write a fraction")
        if node == sympy.I:
            return I
        if node.is_Symbol:
            name = node.name
            if name in self.vertices:
                return SymElement.from_vertex(self.vertices[name], truncation=ctx.truncation)
            if ctx.ring is not None and name in ctx.ring.names:
                return ctx.ring.variable(name)
            if ctx.regulator is not None and name == ctx.regulator.name:
                return ctx.regulator.variable()
            raise ModelError(f"expression: unknown name {name}")
        if node.is_Add:
            result = None
            for arg in node.args:
                value = self(arg)
                result = value if result is None else _add(result, value)
            return result
        if node.is_Mul:
            result = None
            for arg in node.args:
                value = self(arg)
                result = value if result is None else _mul(result, value)
            return result
        if node.is_Pow:
            base, exponent = node.args
            if not exponent.is_Integer:
                raise ModelError(f"expression: non-integer power {node}")
            n = int(exponent)
            value = self(base)
            if isinstance(value, SymElement):
                if n < 0:
                    raise ModelError(f"expression: negative power of a field element in {node}")
                result = SymElement.one(ctx.truncation)
                for _ in range(n):
                    result = sym_product(result, value)
                return result
            return value ** n
        if isinstance(node, _Exp):
            value = self(node.args[0])
            if isinstance(value, SymElement):
                return hopf_exp(value.with_truncation(ctx.truncation)).element
            return series_exp(value)
        raise ModelError(f"expression: unsupported construct {node}")


def _add(a, b):
    if isinstance(b, SymElement) and not isinstance(a, SymElement):
        return b + a
    return a + b


def _mul(a, b):
    if isinstance(a, SymElement) and isinstance(b, SymElement):
        return sym_product(a, b)
    if isinstance(a, SymElement):
        return a.scale(b)
    if isinstance(b, SymElement):
        return b.scale(a)
    return a * b


def _parse(text: str, ctx: ExpressionContext):
    vertices: Dict[str, Vertex] = {}
    prepared = _substitute_atoms(text, ctx, vertices)
    try:
        tree = parse_expr(prepared, local_dict=_local_dict(ctx, vertices),
                          transformations=_TRANSFORMS, evaluate=True)
    except (SyntaxError, TypeError, sympy.SympifyError) as e:
        raise ModelError(f"expression: cannot parse {text!r}: {e}")
    return _Converter(ctx, vertices)(sympy.sympify(tree))


def parse_element(text: str, ctx: ExpressionContext) -> SymElement:
    """Parse a field-algebra element; a bare scalar becomes a multiple of 1."""
    value = _parse(text, ctx)
    if isinstance(value, SymElement):
        return value.with_truncation(ctx.truncation)
    return SymElement.one(ctx.truncation).scale(value)


def parse_scalar(text, ctx: Optional[ExpressionContext] = None,
                 ring: Optional[CouplingRing] = None,
                 regulator: Optional[Regulator] = None) -> Scalar:
    """Parse a scalar literal such as 3, -1/2, 1+2i, lam/2 or 1/eps."""
    if isinstance(text, bool):
        raise ModelError(f"expression: {text!r} is not a scalar")
    if isinstance(text, int):
        return as_scalar(text)
    if isinstance(text, float):
        raise ModelError(f"expression: inexact number {text}; write a fraction")
    if ctx is None:
        ctx = ExpressionContext(CausalSet.build(["_"]), ring, regulator)
    value = _parse(str(text), ctx)
    if isinstance(value, SymElement):
        raise ModelError(f"expression: {text!r} is a field element, expected a scalar")
    return value


def split_top_level(text: str, sep: str = ",") -> List[str]:
    """Split on separators outside () and []."""
    parts, depth, current = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise ModelError(f"expression: unbalanced brackets in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    if depth != 0:
        raise ModelError(f"expression: unbalanced brackets in {text!r}")
    parts.append("".join(current).strip())
    return parts


def is_word(text: str) -> bool:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        return False
    depth = 0
    for index, ch in enumerate(text):
        depth += ch in "(["
        depth -= ch in ")]"
        if depth == 0 and index < len(text) - 1:
            return False
    return True


def parse_word_factors(text: str, ctx: ExpressionContext) -> Tuple[SymElement, ...]:
    """[A_n, ..., A_1] -> factors, leftmost first."""
    if not is_word(text):
        raise ModelError(f"expression: a tensor word must be written [A_n, ..., A_1], got {text!r}")
    inner = text.strip()[1:-1]
    if not inner.strip():
        return ()
    return tuple(parse_element(part, ctx) for part in split_top_level(inner))
