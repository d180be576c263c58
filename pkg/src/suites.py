"""
Property Check Suites
Randomized, seeded checks of the algebraic identities the workbench relies
on. Each suite plans its cases up front from a seeded generator and returns
(name, runner) pairs; runners return a CheckCase and never raise.
"""

import logging
import random
import time
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from anomaly import (
    FieldSymmetry, closure, cocycle_failures, coboundary_solve, induced_cocycle, invariant_lift,
)
from causal import CausalSet
from fields import SymElement, Vertex, key_fields, spanning_keys, sym_product
from model_file import Model
from models import CheckCase, CheckResult, InapplicableCheck, Truncation, WorkbenchError
from operators import (
    InteractingTheory, TensorWord, anti_time_ordered, commutator_mod_locality, cutoff_compare, gns_gram,
    hermitian_sides, interacting_eval, locality_defect, locality_generator, omega_tensor,
    renorm_covariance,
)
from oracles import anti_time_ordered_pairings, naive_wick, phi4_moments, phi4_single_moment
from sampling import (
    chain, constant_cut, random_causal_set, random_diagonal, random_element, random_exact, random_feynman,
    random_fraction, random_group_like, random_invariant_cut, random_key, random_lagrangian, random_local_cut,
    random_renormalization, random_simple_vertex, random_split_supports, random_word,
)
from scalars import (
    CouplingRing, Regulator, RegulatorLaurent, from_sympy, has_pole, is_zero, render_scalar,
    scalar_components, to_sympy,
)
from session import SessionConfig
from uvgroup import (
    Renormalization, factorize, find_renormalization, in_filtration, measures_agree, pole_kill,
    renorm_act_measure, renorm_compose,
)
from wick import feynman_measure, gaussian_sides, wick_key

logger = logging.getLogger(__name__)

Outcome = Tuple[bool, str, Dict]
PlannedCase = Tuple[str, Callable[[], CheckCase]]

DEFAULT_CASES = {
    'wick': 50,
    'antitime': 30,
    'gaussian': 200,
    'transitivity': 20,
    'factorization': 20,
    'polekill': 10,
    'locality': 100,
    'commutativity': 50,
    'cutkosky': 20,
    'hermiticity': 100,
    'positivity': 5,
    'interacting': 12,
    'covariance': 6,
    'cutoff': 6,
    'anomaly': 4,
}

SUITES = tuple(DEFAULT_CASES)


def run_case(name: str, check: Callable[[], Outcome]) -> CheckCase:
    """Run one check; InapplicableCheck becomes SKIP and any other error FAIL."""
    start_time = time.time()
    try:
        ok, message, metadata = check()
        return CheckCase(
            name=name,
            result=CheckResult.PASS if ok else CheckResult.FAIL,
            message=message,
            duration_ms=int((time.time() - start_time) * 1000),
            metadata=metadata or None,
        )
    except InapplicableCheck as e:
        return CheckCase(
            name=name,
            result=CheckResult.SKIP,
            message=str(e),
            duration_ms=int((time.time() - start_time) * 1000),
        )
    except (WorkbenchError, ArithmeticError, KeyError, ValueError, TypeError) as e:
        logger.debug("case %s raised", name, exc_info=True)
        return CheckCase(
            name=name,
            result=CheckResult.FAIL,
            message=f"Check error: {type(e).__name__}: {e}",
            duration_ms=int((time.time() - start_time) * 1000),
        )


def _equal(lhs, rhs) -> bool:
    return is_zero(lhs - rhs)


def _sides(lhs, rhs) -> Dict:
    return {'lhs': str(render_scalar(lhs)), 'rhs': str(render_scalar(rhs))}


class PropertyChecker:
    """
    Plans the cases of every suite.

    Case parameters are drawn when the plan is built, so running the planned
    cases in any order or in parallel gives the same results.
    """

    def __init__(self, session: SessionConfig, model: Optional[Model] = None):
        """
        Args:
            session: Truncations, seed and case counts
            model: Optional model file; suites that can use it add cases on it
        """
        self.session = session
        self.model = model
        self.truncation = session.truncation(model)

    def small(self, sym_degree: int = 3, field_degree: int = 4) -> Truncation:
        """The session truncation capped for randomized cases."""
        return Truncation(min(sym_degree, self.truncation.max_sym_degree),
                          min(field_degree, self.truncation.max_field_degree))

    def coupling_order(self, cap: int = 2) -> int:
        if self.model is not None and self.model.ring is not None:
            return min(cap, self.model.ring.order)
        order = self.session.coupling_order
        if order is None:
            order = self.session.default_coupling_order()
        return min(cap, order)

    def plan(self, suite: str) -> List[PlannedCase]:
        if suite == 'all':
            return [case for name in SUITES for case in self.plan(name)]
        if suite not in DEFAULT_CASES:
            raise ValueError(f"unknown suite: {suite} (choose from {', '.join(SUITES + ('all',))})")
        rng = self.session.rng(suite)
        count = self.session.case_count(DEFAULT_CASES[suite])
        return getattr(self, f"plan_{suite}")(rng, count)

    # -------------------------------------------------------------------------
    # Measures
    # -------------------------------------------------------------------------

    def plan_wick(self, rng: random.Random, count: int) -> List[PlannedCase]:
        cases = []
        for i in range(count):
            causal = random_causal_set(rng, rng.randint(1, 3), ("phi", "psi")[:rng.randint(1, 2)])
            feynman = random_feynman(rng, causal)
            key = random_key(rng, causal, max_vertices=3, max_fields=8)

            def check(feynman=feynman, key=key) -> Outcome:
                engine = wick_key(feynman, key)
                oracle = naive_wick(key_fields(key), lambda s, t: to_sympy(feynman.value(s, t)))
                expected = from_sympy(oracle)
                return _equal(engine, expected), f"{len(key_fields(key))} fields", _sides(engine, expected)

            name = f"wick-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    def plan_antitime(self, rng: random.Random, count: int) -> List[PlannedCase]:
        cases = []
        for i in range(count):
            causal = random_causal_set(rng, rng.randint(1, 3), ("phi", "psi")[:rng.randint(1, 2)])
            omega = feynman_measure(random_local_cut(rng, causal))
            key = random_key(rng, causal, max_vertices=3, max_fields=6)

            def check(omega=omega, key=key) -> Outcome:
                engine = anti_time_ordered(omega, key)
                oracle = anti_time_ordered_pairings(
                    key_fields(key), len(key),
                    lambda s, t: to_sympy(omega.cut.value(s, t)),
                    lambda s, t: to_sympy(omega.feynman.value(s, t)),
                )
                expected = from_sympy(oracle)
                return _equal(engine, expected), f"{len(key)} vertices", _sides(engine, expected)

            name = f"antitime-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    def plan_gaussian(self, rng: random.Random, count: int) -> List[PlannedCase]:
        trunc = self.small(2, 3)
        measures = []
        for _ in range(10):
            causal = random_causal_set(rng, rng.randint(2, 4), density=0.5)
            cut = random_local_cut(rng, causal)
            omega = feynman_measure(cut, random_diagonal(rng, causal))
            if rng.random() < 0.25:
                omega = renorm_act_measure(random_renormalization(rng, causal, trunc, probability=0.3), omega)
            measures.append(omega)
        cases = []
        for i in range(count):
            omega = measures[i % len(measures)]
            supports = random_split_supports(rng, omega.causal)
            a = b = None
            if supports is not None:
                a = random_element(rng, omega.causal, trunc, supports[0])
                b = random_element(rng, omega.causal, trunc, supports[1])

            def check(omega=omega, a=a, b=b) -> Outcome:
                if a is None:
                    raise InapplicableCheck("no causally split supports in this causal set")
                lhs, rhs = gaussian_sides(omega, a, b)
                return _equal(lhs, rhs), f"supp A={sorted(a.support())} supp B={sorted(b.support())}", _sides(lhs, rhs)

            name = f"gaussian-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    # -------------------------------------------------------------------------
    # Renormalization group
    # -------------------------------------------------------------------------

    def plan_transitivity(self, rng: random.Random, count: int) -> List[PlannedCase]:
        trunc = self.small(3, 4)
        cases = []
        for i in range(count):
            causal = random_causal_set(rng, rng.randint(1, 3))
            cut = random_local_cut(rng, causal)
            omega1 = feynman_measure(cut, random_diagonal(rng, causal))
            if i % 2 == 0:
                rho = random_renormalization(rng, causal, trunc, probability=0.4)
                omega2 = renorm_act_measure(rho, omega1)
            else:
                rho = None
                omega2 = feynman_measure(cut, random_diagonal(rng, causal))

            def check(omega1=omega1, omega2=omega2, rho=rho) -> Outcome:
                g = find_renormalization(omega1, omega2, trunc)
                keys = spanning_keys(omega1.causal, trunc)
                differ = measures_agree(renorm_act_measure(g, omega1), omega2, keys)
                unique = rho is None or g.same_as(rho)
                message = f"{len(keys)} keys, {len(g.data)} components"
                if differ:
                    message = f"measures differ on {len(differ)} keys"
                elif not unique:
                    message = "recovered renormalization differs from the one applied"
                return not differ and unique, message, {'components': len(g.data)}

            name = f"transitivity-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    def plan_factorization(self, rng: random.Random, count: int) -> List[PlannedCase]:
        trunc = self.small(3, 4)
        cases = []
        for i in range(count):
            causal = random_causal_set(rng, rng.randint(1, 2), ("phi", "psi")[:rng.randint(1, 2)])
            rho = random_renormalization(rng, causal, trunc, probability=0.3)
            samples = [random_element(rng, causal, trunc, terms=2, max_vertices=3, max_fields=4) for _ in range(3)]

            def check(rho=rho, samples=samples) -> Outcome:
                parts = factorize(rho)
                graded = all(in_filtration(g, k) and all(len(key) == k + 1 for key in g.data)
                             for k, g in enumerate(parts))
                recomposed = renorm_compose(*reversed(parts))
                same = recomposed.same_as(rho) and all(recomposed.act(p) == rho.act(p) for p in samples)
                return graded and same, f"{len(parts)} graded factors", {
                    'factor_sizes': [len(g.data) for g in parts]}

            name = f"factorization-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    def plan_polekill(self, rng: random.Random, count: int) -> List[PlannedCase]:
        trunc = self.small(3, 4)
        cases = []
        if self.model is not None and self.model.regulator is not None:
            model_trunc = self.truncation
            measure = self.model.measure(model_trunc)
            cases.append(("polekill-model", lambda: run_case(
                "polekill-model", lambda: self._pole_check(measure, model_trunc))))
        regulator = Regulator("eps", 8)
        for i in range(count):
            causal = random_causal_set(rng, rng.randint(1, 3))
            cut = random_local_cut(rng, causal)
            diagonal = {}
            for key, value in random_diagonal(rng, causal).items():
                terms = {0: value, -1: random_exact(rng, complex_=True)}
                if rng.random() < 0.5:
                    terms[-2] = random_exact(rng)
                diagonal[key] = RegulatorLaurent(regulator, terms)
            omega = feynman_measure(cut, diagonal)
            name = f"polekill-{i:03d}"
            cases.append((name, lambda o=omega, n=name: run_case(n, lambda: self._pole_check(o, trunc))))
        return cases

    def _pole_check(self, omega, trunc: Truncation) -> Outcome:
        result = pole_kill(omega, trunc)
        keys = spanning_keys(omega.causal, trunc)
        poles = [k for k in keys if has_pole(result.measure.evaluate_key(k))]
        return not poles, f"{len(result.renormalization.data)} counterterms, {len(keys)} keys finite", {
            'stages': result.stages}

    # -------------------------------------------------------------------------
    # Operator layer
    # -------------------------------------------------------------------------

    def plan_locality(self, rng: random.Random, count: int) -> List[PlannedCase]:
        order = self.coupling_order(2)
        ring = CouplingRing(("lam",), order)
        trunc = Truncation(order + 1, 2 * order + 2)
        cases = []
        for i in range(count):
            causal = random_causal_set(rng, rng.randint(2, 4), density=0.5)
            omega = feynman_measure(random_local_cut(rng, causal), random_diagonal(rng, causal))
            n = rng.randint(0, 2)
            before_len = n % 2 + 2 * rng.randint(0, 1 - n % 2)
            pb = rng.choice(causal.points)
            excluded = causal.future_of([pb]) if n % 2 == 0 else causal.past_of([pb])
            ac_points = [p for p in causal.points if p not in excluded]
            if n % 2 == 0:
                strictly = [p for p in causal.past_of([pb]) if p != pb]
            else:
                strictly = [p for p in causal.future_of([pb]) if p != pb]
            ac = set(ac_points)
            loose = [p for p in causal.points
                     if (n % 2 == 0 and causal.none_leq([p], ac)) or (n % 2 == 1 and causal.none_leq(ac, [p]))]
            d_points = strictly if strictly and rng.random() < 0.5 else loose

            def elem(points):
                if not points:
                    return SymElement.one(trunc)
                return random_element(rng, causal, trunc, points, terms=1, max_vertices=1, max_fields=2)

            a, c = elem(ac_points), elem(ac_points)
            b = random_group_like(rng, causal, ring, trunc, terms=rng.randint(1, 2), points=[pb])
            d = random_group_like(rng, causal, ring, trunc, terms=1, points=d_points)
            before = random_word(rng, causal, before_len, trunc, max_fields=1)
            after = random_word(rng, causal, n, trunc, max_fields=1)

            def check(omega=omega, a=a, b=b, c=c, d=d, before=before, after=after) -> Outcome:
                words = locality_generator(omega.causal, a, b, c, d, before, after)
                defect = locality_defect(omega, words)
                return is_zero(defect), f"n={len(after)} word length {words[0].degree}", {
                    'defect': str(render_scalar(defect))}

            name = f"locality-{i:03d}"
            cases.append((name, lambda c_=check, n_=name: run_case(n_, c_)))
        return cases

    def plan_commutativity(self, rng: random.Random, count: int) -> List[PlannedCase]:
        trunc = self.small(3, 4)
        cases = []
        for i in range(count):
            causal = random_causal_set(rng, rng.randint(2, 4), density=0.3)
            omega = feynman_measure(random_local_cut(rng, causal), random_diagonal(rng, causal))
            pairs = [(x, y) for x in causal.points for y in causal.points if x < y and causal.is_spacelike(x, y)]
            v = w = before = after = None
            if pairs:
                x, y = rng.choice(pairs)
                v = random_word(rng, causal, 2, trunc, [x], max_fields=2)
                w = random_word(rng, causal, 2, trunc, [y], max_fields=2)
                before = random_word(rng, causal, 2 * rng.randint(0, 1), trunc, max_fields=1)
                after = random_word(rng, causal, 2 * rng.randint(0, 1), trunc, max_fields=1)

            def check(omega=omega, v=v, w=w, before=before, after=after) -> Outcome:
                if v is None:
                    raise InapplicableCheck("causal set has no spacelike pair")
                value = commutator_mod_locality(omega, v, w, before, after)
                return is_zero(value), f"context lengths {len(before)}/{len(after)}", {
                    'commutator': str(render_scalar(value))}

            name = f"commutativity-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    def plan_cutkosky(self, rng: random.Random, count: int) -> List[PlannedCase]:
        order = self.coupling_order(3)
        ring = CouplingRing(("lam",), order)
        cases = []
        for i in range(count):
            causal = random_causal_set(rng, rng.randint(1, 3))
            omega = feynman_measure(random_local_cut(rng, causal), random_diagonal(rng, causal))
            trunc = Truncation(order + 1, 2 * order + 2)
            a = random_group_like(rng, causal, ring, trunc, terms=2, max_fields=2)
            padding = rng.randint(0, 1)

            def check(omega=omega, a=a, padding=padding, trunc=trunc) -> Outcome:
                one = SymElement.one(trunc)
                word = TensorWord.of([a, a] + [one, one] * padding, truncation=trunc)
                value = omega_tensor(omega, word)
                return _equal(value, 1), f"word of length {word.degree}", {'value': str(render_scalar(value))}

            name = f"cutkosky-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    def plan_hermiticity(self, rng: random.Random, count: int) -> List[PlannedCase]:
        trunc = self.small(3, 4)
        cases = []
        for i in range(count):
            causal = random_causal_set(rng, rng.randint(1, 3))
            omega = feynman_measure(random_local_cut(rng, causal, hermitian=True))
            word = random_word(rng, causal, rng.choice((2, 2, 4)), trunc, terms=2, max_fields=2)

            def check(omega=omega, word=word) -> Outcome:
                lhs, rhs = hermitian_sides(omega, word)
                return _equal(lhs, rhs), f"word of length {word.degree}", _sides(lhs, rhs)

            name = f"hermiticity-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    def plan_positivity(self, rng: random.Random, count: int) -> List[PlannedCase]:
        basis_trunc = Truncation(1, min(3, self.truncation.max_field_degree))
        cases = []
        for i in range(count):
            causal = random_causal_set(rng, rng.randint(1, 2))
            omega = feynman_measure(random_local_cut(rng, causal, positive=True))
            one = SymElement.one(basis_trunc)
            basis = [TensorWord((one, one))] + [
                TensorWord((one, SymElement.from_key(k, truncation=basis_trunc)))
                for k in spanning_keys(causal, basis_trunc)
            ]

            def check(omega=omega, basis=basis) -> Outcome:
                normalized = _equal(omega.evaluate_key(()), 1)
                report = gns_gram(omega, basis)
                ok = normalized and report.hermitian and report.psd is True
                return ok, f"{len(basis)} basis words, rank {report.rank}", {
                    'pivots': [str(render_scalar(p)) for p in report.pivots]}

            name = f"positivity-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    # -------------------------------------------------------------------------
    # Interacting theories
    # -------------------------------------------------------------------------

    def plan_interacting(self, rng: random.Random, count: int) -> List[PlannedCase]:
        order = self.coupling_order(2)
        ring = CouplingRing(("lam",), order)
        causal = CausalSet.build(["x"])
        cases = []
        for i in range(count):
            c = random_fraction(rng, nonzero=True)
            g = rng.choice((Fraction(1), Fraction(1, 24), Fraction(-1, 2)))
            n_left, n_right = rng.choice((0, 2)), rng.choice((0, 1, 2, 4))
            single = i % 3 == 0
            trunc = Truncation(order + 2, 4 * order + 8)
            omega = feynman_measure(constant_cut(causal, c))

            def check(omega=omega, c=c, g=g, n_left=n_left, n_right=n_right, single=single, trunc=trunc) -> Outcome:
                lagrangian = SymElement.from_vertex(Vertex.of("x", {"phi": 4}), ring.variable("lam") * g, trunc)
                theory = InteractingTheory(omega, lagrangian)
                right = _power(n_right, trunc)
                if single:
                    value = omega.evaluate(sym_product(theory.interaction(), right))
                    expected = phi4_single_moment(n_right, to_sympy(c), to_sympy(g), order)
                    label = f"omega(E phi^{n_right})"
                else:
                    word = TensorWord((_power(n_left, trunc), right))
                    value = interacting_eval(theory, word)
                    expected = phi4_moments(n_left, n_right, to_sympy(c), to_sympy(g), order)
                    label = f"omega(E phi^{n_left}, E phi^{n_right})"
                got = {k[1][0] if k[1] else 0: v for k, v in scalar_components(value).items()}
                want = {k: from_sympy(v) for k, v in expected.items()}
                ok = set(got) == set(want) and all(_equal(got[k], want[k]) for k in want)
                return ok, label, {'value': str(render_scalar(value)),
                                   'expected': {str(k): str(v) for k, v in sorted(want.items())}}

            name = f"interacting-{i:03d}"
            cases.append((name, lambda c_=check, n=name: run_case(n, c_)))
        return cases

    def plan_covariance(self, rng: random.Random, count: int) -> List[PlannedCase]:
        order = self.coupling_order(2)
        ring = CouplingRing(("lam",), order)
        cases = []
        for i in range(count):
            simple = i % 2 == 1
            causal = random_causal_set(rng, rng.randint(1, 2))
            trunc = Truncation(order + 1, 3 * order + 2)
            omega = feynman_measure(random_local_cut(rng, causal), random_diagonal(rng, causal))
            lagrangian = random_lagrangian(rng, causal, ring, trunc, terms=2, max_fields=3)
            rho = random_renormalization(rng, causal, trunc,
                                         min_degree=2, simple=simple, probability=0.15)
            if simple:
                word = TensorWord(tuple(
                    SymElement.from_vertex(random_simple_vertex(rng, causal), truncation=trunc) for _ in range(2)))
            else:
                word = random_word(rng, causal, 2, trunc, max_fields=2)

            def check(omega=omega, lagrangian=lagrangian, rho=rho, word=word, simple=simple) -> Outcome:
                theory = InteractingTheory(omega, lagrangian)
                report = renorm_covariance(rho, theory, word)
                ok = report.holds and (not simple or all(report.factors_unchanged))
                return ok, f"{'simple ' if simple else ''}renormalization with {len(rho.data)} components", {
                    **_sides(report.lhs, report.rhs), 'factors_unchanged': report.factors_unchanged}

            name = f"covariance-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    def plan_cutoff(self, rng: random.Random, count: int) -> List[PlannedCase]:
        order = self.coupling_order(2)
        ring = CouplingRing(("lam",), order)
        cases = []
        for i in range(count):
            causal = chain(3)
            trunc = Truncation(order + 2, 2 * order + 4)
            omega = feynman_measure(random_local_cut(rng, causal), random_diagonal(rng, causal))
            lagrangian = random_lagrangian(rng, causal, ring, trunc, terms=2, max_fields=2)
            word = random_word(rng, causal, 2, trunc, ["p1"], max_fields=2)
            f = {p: random_fraction(rng) for p in causal.points}
            g = dict(f)
            hypothesis = 'past' if i % 2 == 0 else 'future'
            g["p2" if hypothesis == 'past' else "p0"] = f["p2" if hypothesis == 'past' else "p0"] + 1

            def check(omega=omega, lagrangian=lagrangian, word=word, f=f, g=g, hypothesis=hypothesis) -> Outcome:
                theory = InteractingTheory(omega, lagrangian)
                reports = cutoff_compare(theory, f, g, word)
                applied = [r.hypothesis for r in reports]
                ok = hypothesis in applied and all(r.holds for r in reports)
                return ok, f"hypotheses {', '.join(applied)}", {
                    r.hypothesis: _sides(r.lhs, r.rhs) for r in reports}

            name = f"cutoff-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        return cases

    # -------------------------------------------------------------------------
    # Anomalies
    # -------------------------------------------------------------------------

    def plan_anomaly(self, rng: random.Random, count: int) -> List[PlannedCase]:
        trunc = self.small(2, 4)
        cases = []
        if self.model is not None and self.model.symmetries:
            cases.append(("anomaly-model", lambda: run_case(
                "anomaly-model", lambda: self._anomaly_check(self.model.measure(trunc),
                                                             *self.model.symmetry_group(trunc), trunc))))
        causal = CausalSet.build(["x", "y"])
        permutation = {"x": "y", "y": "x"}
        for i in range(count):
            cut = random_invariant_cut(rng, causal, permutation)
            omega = feynman_measure(cut, random_diagonal(rng, causal))
            swap = FieldSymmetry(causal, permutation, name="swap", truncation=trunc)
            group = closure([swap])

            def check(omega=omega, group=group) -> Outcome:
                return self._anomaly_check(omega, group, True, trunc)

            name = f"anomaly-{i:03d}"
            cases.append((name, lambda c=check, n=name: run_case(n, c)))
        cases.append(("anomaly-obstruction", lambda: run_case("anomaly-obstruction", self._obstruction_check)))
        return cases

    def _anomaly_check(self, omega, group, finite: bool, trunc: Truncation) -> Outcome:
        cocycle = induced_cocycle(group, omega, trunc, finite)
        failures = cocycle_failures(cocycle) if finite else []
        solved = coboundary_solve(cocycle, None if finite else group)
        metadata = {'group_order': len(group) if finite else None, 'method': solved.method}
        if failures:
            return False, f"cocycle identity fails for {failures[0]}", metadata
        if not solved.solved:
            metadata['obstruction'] = solved.obstruction
            return False, "no invariant renormalization found", metadata
        a = _invariant_element(omega.causal, group, finite, trunc)
        lifted = invariant_lift(a, cocycle, None if finite else group)
        metadata['lift'] = str(lifted.correction) if lifted.solved else None
        return lifted.solved, f"{len(solved.renormalization.data)} counterterm components", metadata

    def _obstruction_check(self) -> Outcome:
        causal = CausalSet.build(["x"])
        trunc = Truncation(2, 2)
        omega = feynman_measure(constant_cut(causal, 1))
        density = Vertex.density("x")
        twist = Renormalization(causal, {(density, density): 1}, trunc)
        g = FieldSymmetry(causal, twist=twist, name="shift", truncation=trunc)
        group = closure([g], bound=8)
        cocycle = induced_cocycle([g], omega, trunc, finite=False)
        result = coboundary_solve(cocycle, [g])
        ok = group is None and not result.solved
        return ok, "obstruction reported" if ok else "expected an obstruction", {
            'obstruction': result.obstruction}


def _invariant_element(causal: CausalSet, group, finite: bool, trunc: Truncation) -> SymElement:
    """Sum of phi^2 over the points, summed over the group orbit when the group is finite."""
    a = SymElement({(Vertex.of(p, {causal.species[p][0]: 2}),): 1 for p in causal.points}, trunc)
    if finite:
        orbit = SymElement.zero(trunc)
        for g in group:
            orbit = orbit + g.act(a)
        a = orbit
    if a.is_zero() or any(g.act(a) != a for g in group):
        raise InapplicableCheck("no invariant quadratic element to lift")
    return a


def _power(n: int, trunc: Truncation) -> SymElement:
    if n == 0:
        return SymElement.one(trunc)
    return SymElement.from_vertex(Vertex.of("x", {"phi": n}), truncation=trunc)
