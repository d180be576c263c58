"""
Algebraic laws checked with generated data.
"""

import random

from hypothesis import assume, given, settings, strategies as st

from fields import key_fields, star, sym_product
from models import Truncation
from oracles import naive_wick
from sampling import (
    random_causal_set, random_diagonal, random_element, random_feynman, random_key, random_local_cut,
    random_renormalization,
)
from scalars import ONE, CouplingRing, ExactComplex, conj, from_sympy, series_exp, series_log, to_sympy
from uvgroup import (
    factorize, find_renormalization, renorm_act_measure, renorm_compose, renorm_invert,
)
from wick import feynman_measure, wick_key

TRUNC = Truncation(2, 4)

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)
exact = st.builds(ExactComplex, fractions, fractions)
seeds = st.integers(min_value=0, max_value=10 ** 6)

laws = settings(max_examples=25, deadline=None)


def model(seed, max_points=2):
    rng = random.Random(seed)
    return rng, random_causal_set(rng, rng.randint(1, max_points))


# Exact scalars

@given(exact, exact)
def test_addition_commutes(a, b):
    assert a + b == b + a


@given(exact, exact, exact)
def test_multiplication_associates(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(exact, exact, exact)
def test_distributive(a, b, c):
    assert a * (b + c) == a * b + a * c


@given(exact)
def test_conjugation_is_an_involution(a):
    assert conj(conj(a)) == a


@given(exact)
def test_exact_inverse(a):
    assume(not a.is_zero())
    assert a * (ONE / a) == ONE


@given(fractions, fractions)
def test_sympy_conversion_is_exact(re, im):
    value = ExactComplex(re, im)
    assert from_sympy(to_sympy(value)) == value


# Coupling series

@given(fractions, fractions)
def test_log_inverts_exp(a, b):
    lam = CouplingRing(("lam",), 3).variable("lam")
    x = lam * ExactComplex(a) + lam * lam * ExactComplex(b)
    assert series_log(series_exp(x)) == x


# Field algebra

@laws
@given(seeds)
def test_star_is_an_involution(seed):
    rng, causal = model(seed)
    a = random_element(rng, causal, TRUNC)
    assert star(star(a)) == a


@laws
@given(seeds)
def test_product_commutes(seed):
    rng, causal = model(seed)
    a, b = random_element(rng, causal, TRUNC), random_element(rng, causal, TRUNC)
    assert sym_product(a, b) == sym_product(b, a)


@laws
@given(seeds)
def test_wick_matches_pair_partitions(seed):
    rng, causal = model(seed, max_points=3)
    feynman = random_feynman(rng, causal)
    key = random_key(rng, causal, max_vertices=3, max_fields=6)
    oracle = naive_wick(key_fields(key), lambda s, t: to_sympy(feynman.value(s, t)))
    assert wick_key(feynman, key) == from_sympy(oracle)


@laws
@given(seeds, st.integers(min_value=2, max_value=5))
def test_causal_split_has_no_backward_relation(seed, n_points):
    rng = random.Random(seed)
    causal = random_causal_set(rng, n_points, density=0.5)
    support = rng.sample(list(causal.points), rng.randint(2, n_points))
    upper, lower = causal.causal_split(support)
    assert lower
    assert causal.none_leq(upper, lower)


# Renormalization group

@laws
@given(seeds)
def test_composition_associates(seed):
    rng, causal = model(seed)
    r1, r2, r3 = (random_renormalization(rng, causal, TRUNC, probability=0.3) for _ in range(3))
    left = renorm_compose(renorm_compose(r3, r2), r1)
    right = renorm_compose(r3, renorm_compose(r2, r1))
    assert left.same_as(right)


@laws
@given(seeds)
def test_inverse(seed):
    rng, causal = model(seed)
    rho = random_renormalization(rng, causal, TRUNC, probability=0.4)
    assert renorm_compose(rho, renorm_invert(rho)).is_identity()
    assert renorm_compose(renorm_invert(rho), rho).is_identity()


@laws
@given(seeds)
def test_action_is_a_homomorphism(seed):
    rng, causal = model(seed)
    r1, r2 = (random_renormalization(rng, causal, TRUNC, probability=0.3) for _ in range(2))
    a = random_element(rng, causal, TRUNC)
    assert renorm_compose(r2, r1).act(a) == r2.act(r1.act(a))


@laws
@given(seeds)
def test_factors_recompose(seed):
    rng, causal = model(seed)
    rho = random_renormalization(rng, causal, TRUNC, probability=0.4)
    assert renorm_compose(*reversed(factorize(rho))).same_as(rho)


@laws
@given(seeds)
def test_applied_renormalization_is_recovered(seed):
    rng, causal = model(seed)
    omega = feynman_measure(random_local_cut(rng, causal), random_diagonal(rng, causal))
    rho = random_renormalization(rng, causal, TRUNC, probability=0.4)
    found = find_renormalization(omega, renorm_act_measure(rho, omega), TRUNC)
    assert found.same_as(rho)
