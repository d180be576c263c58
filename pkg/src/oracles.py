"""
Reference Oracles
Brute-force evaluators that share no code with the engine: explicit pair
partitions, closed forms on single-point models and a direct expansion of
single-point phi^4 moments. Arithmetic is done in sympy.
"""

from math import factorial
from typing import Callable, Dict, Iterable, Iterator, List, Sequence, Tuple

import sympy


def all_pairings(items: Iterable) -> Iterator[List[Tuple]]:
    """Every partition of items into pairs; nothing for an odd count."""
    items = list(items)
    if not items:
        yield []
        return
    first = items.pop(0)
    for i, item in enumerate(items):
        for rest in all_pairings(items[:i] + items[i + 1:]):
            yield [(first, item)] + rest


def naive_wick(slots: Sequence, weight: Callable) -> sympy.Expr:
    """Sum over pairings of the product of weight(a, b), slots taken by position."""
    total = sympy.Integer(0)
    for pairing in all_pairings(range(len(slots))):
        term = sympy.Integer(1)
        for i, j in pairing:
            term *= weight(slots[i], slots[j])
        total += term
    return sympy.expand(total)


def anti_time_ordered_pairings(slots: Sequence, vertices: int, cut: Callable, feynman: Callable) -> sympy.Expr:
    """
    Closed form of omega-bar on one key when Delta_F agrees with the cut
    propagator at coincident points.

    Args:
        slots: Field slots of the key
        vertices: Number of vertices in the key, densities included
        cut: Delta(s, t) as a sympy value
        feynman: Delta_F(s, t) as a sympy value

    Returns:
        (-1)^vertices times the pairing sum with weight
        Delta(s, t) + Delta(t, s) - Delta_F(s, t)
    """
    def anti_feynman(s, t):
        return cut(s, t) + cut(t, s) - feynman(s, t)

    return sympy.expand((-1) ** vertices * naive_wick(slots, anti_feynman))


def double_factorial(n: int) -> int:
    """n!! with (-1)!! = 0!! = 1."""
    result = 1
    while n > 1:
        result *= n
        n -= 2
    return result


def single_point_word_value(positions: Sequence[Sequence[int]], c) -> sympy.Expr:
    """
    Value of a word of monomials on a one-point, one-species model where every
    propagator entry equals c.

    Args:
        positions: Field degrees of the vertices of each factor, leftmost factor first
        c: The common propagator value

    Returns:
        (-1)^(vertices in even positions) (N-1)!! c^(N/2), zero for odd N
    """
    n = len(positions)
    fields = sum(sum(vertices) for vertices in positions)
    if fields % 2:
        return sympy.Integer(0)
    even_vertices = sum(len(vertices) for index, vertices in enumerate(positions)
                        if (n - index) % 2 == 0)
    return sympy.expand((-1) ** even_vertices * double_factorial(fields - 1) * sympy.sympify(c) ** (fields // 2))


def phi4_moments(n_left: int, n_right: int, c, g, order: int) -> Dict[int, sympy.Expr]:
    """
    Coefficients of lam^k in omega(E phi^n_left (x) E phi^n_right) with
    E = exp(i g lam phi^4) on one point, through lam^order.

    A factor phi^0 is the unit and contributes no vertex.
    """
    c, g = sympy.sympify(c), sympy.sympify(g)
    coefficients: Dict[int, sympy.Expr] = {}
    for k_left in range(order + 1):
        for k_right in range(order + 1 - k_left):
            k = k_left + k_right
            fields = 4 * k + n_left + n_right
            if fields % 2:
                continue
            even_vertices = k_left + (1 if n_left else 0)
            term = ((sympy.I * g) ** k / (factorial(k_left) * factorial(k_right))
                    * (-1) ** even_vertices * double_factorial(fields - 1) * c ** (fields // 2))
            coefficients[k] = sympy.expand(coefficients.get(k, 0) + term)
    return {k: v for k, v in coefficients.items() if v != 0}


def phi4_single_moment(n: int, c, g, order: int) -> Dict[int, sympy.Expr]:
    """Coefficients of lam^k in omega(E phi^n) for one factor."""
    c, g = sympy.sympify(c), sympy.sympify(g)
    out = {}
    for k in range(order + 1):
        fields = 4 * k + n
        if fields % 2:
            continue
        value = sympy.expand((sympy.I * g) ** k / factorial(k) * double_factorial(fields - 1) * c ** (fields // 2))
        if value != 0:
            out[k] = value
    return out
