"""
Scalar Tower
Exact Gaussian rationals, truncated multivariate coupling series and
Laurent series in one regulator. Every value is immutable after construction.

Promotion order: ExactComplex < CouplingSeries < RegulatorLaurent. Mixed
arithmetic returns NotImplemented from the lower layer so the reflected
operator of the higher layer does the work.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Optional, Tuple, Union

import sympy

from models import NonNilpotentError


def _fraction(value) -> Fraction:
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"not a rational: {value!r}")


def _render_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# =============================================================================
# GAUSSIAN RATIONALS
# =============================================================================

@dataclass(frozen=True, eq=False)
class ExactComplex:
    """re + im*i with rational parts"""
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, 're', _fraction(self.re))
        object.__setattr__(self, 'im', _fraction(self.im))

    @classmethod
    def coerce(cls, value) -> Optional["ExactComplex"]:
        """Lift ints and Fractions; None for anything of a higher layer."""
        if isinstance(value, ExactComplex):
            return value
        if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            return cls(value)
        return None

    @classmethod
    def parse(cls, text: str) -> "ExactComplex":
        """Parse the "a/b+c/di" rendering (also "3", "-i", "1/2i")."""
        s = text.strip().replace(' ', '')
        if not s:
            raise ValueError("empty scalar")
        if not s.endswith('i'):
            return cls(Fraction(s))
        body = s[:-1]
        cut = max(body.rfind('+'), body.rfind('-'))
        if cut > 0:
            re_text, im_text = body[:cut], body[cut:]
        else:
            re_text, im_text = '', body
        if im_text in ('', '+'):
            im = Fraction(1)
        elif im_text == '-':
            im = Fraction(-1)
        else:
            im = Fraction(im_text)
        return cls(Fraction(re_text) if re_text else Fraction(0), im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def inverse(self) -> "ExactComplex":
        norm = self.re * self.re + self.im * self.im
        if norm == 0:
            raise ZeroDivisionError("inverse of zero")
        return ExactComplex(self.re / norm, -self.im / norm)

    def __bool__(self):
        return not self.is_zero()

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __add__(self, other):
        o = ExactComplex.coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = ExactComplex.coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = ExactComplex.coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = ExactComplex.coerce(other)
        if o is None:
            return NotImplemented
        return ExactComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = ExactComplex.coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = ExactComplex.coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = ExactComplex(1)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        o = ExactComplex.coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"ExactComplex({self})"

    def __str__(self):
        if self.im == 0:
            return _render_fraction(self.re)
        magnitude = '' if abs(self.im) == 1 else _render_fraction(abs(self.im))
        if self.re == 0:
            return f"{'-' if self.im < 0 else ''}{magnitude}i"
        sign = '-' if self.im < 0 else '+'
        return f"{_render_fraction(self.re)}{sign}{magnitude}i"


I = ExactComplex(0, 1)
ZERO = ExactComplex(0)
ONE = ExactComplex(1)


# =============================================================================
# COUPLING SERIES
# =============================================================================

@dataclass(frozen=True)
class CouplingRing:
    """Formal power series ring C[[names]] truncated at total degree order"""
    names: Tuple[str, ...]
    order: int

    def __post_init__(self):
        object.__setattr__(self, 'names', tuple(self.names))
        if self.order < 0:
            raise ValueError("coupling order must be non-negative")

    def zero(self) -> "CouplingSeries":
        return CouplingSeries(self, {})

    def constant(self, value) -> "CouplingSeries":
        return CouplingSeries(self, {(0,) * len(self.names): value})

    def one(self) -> "CouplingSeries":
        return self.constant(1)

    def variable(self, name: str) -> "CouplingSeries":
        if name not in self.names:
            raise KeyError(f"unknown coupling: {name}")
        exps = tuple(1 if n == name else 0 for n in self.names)
        return CouplingSeries(self, {exps: 1})


class CouplingSeries:
    """Truncated multivariate power series with ExactComplex coefficients."""

    __slots__ = ('ring', 'terms')

    def __init__(self, ring: CouplingRing, terms: Optional[Dict[Tuple[int, ...], object]] = None):
        clean: Dict[Tuple[int, ...], ExactComplex] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != len(ring.names):
                raise ValueError(f"exponent tuple {exps} does not match couplings {ring.names}")
            if sum(exps) > ring.order:
                continue
            c = ExactComplex.coerce(coeff)
            if c is None:
                raise TypeError(f"coupling series coefficient must be exact: {coeff!r}")
            if not c.is_zero():
                clean[exps] = c
        self.ring = ring
        self.terms = clean

    def _lift(self, other) -> Optional["CouplingSeries"]:
        if isinstance(other, CouplingSeries):
            if other.ring != self.ring:
                raise ValueError(f"incompatible coupling rings: {self.ring} vs {other.ring}")
            return other
        c = ExactComplex.coerce(other)
        if c is None:
            return None
        return self.ring.constant(c)

    @property
    def constant_term(self) -> ExactComplex:
        return self.terms.get((0,) * len(self.ring.names), ZERO)

    def coefficient(self, exps: Tuple[int, ...]) -> ExactComplex:
        return self.terms.get(tuple(exps), ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def is_nilpotent(self) -> bool:
        return self.constant_term.is_zero()

    def conjugate(self) -> "CouplingSeries":
        return CouplingSeries(self.ring, {e: c.conjugate() for e, c in self.terms.items()})

    def inverse(self) -> "CouplingSeries":
        c0 = self.constant_term
        if c0.is_zero():
            raise ZeroDivisionError("series with zero constant term is not invertible")
        u = self * c0.inverse() - 1
        result = self.ring.one()
        power = self.ring.one()
        for _ in range(self.ring.order):
            power = power * (-u)
            result = result + power
        return result * c0.inverse()

    def __bool__(self):
        return not self.is_zero()

    def __neg__(self):
        return CouplingSeries(self.ring, {e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        acc = dict(self.terms)
        for e, c in o.terms.items():
            acc[e] = acc.get(e, ZERO) + c
        return CouplingSeries(self.ring, acc)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        order = self.ring.order
        acc: Dict[Tuple[int, ...], ExactComplex] = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in o.terms.items():
                if d1 + sum(e2) > order:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, ZERO) + c1 * c2
        return CouplingSeries(self.ring, acc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ring.one()
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        try:
            o = self._lift(other)
        except ValueError:
            return False
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        if set(self.terms) <= {(0,) * len(self.ring.names)}:
            return hash(self.constant_term)
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"CouplingSeries({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms, key=lambda e: (sum(e), tuple(-x for x in e))):
            coeff = self.terms[exps]
            monomial = '*'.join(
                name if k == 1 else f"{name}^{k}"
                for name, k in zip(self.ring.names, exps) if k
            )
            if not monomial:
                parts.append(str(coeff))
                continue
            if coeff == 1:
                parts.append(monomial)
            elif coeff == -1:
                parts.append(f"-{monomial}")
            elif coeff.re != 0 and coeff.im != 0:
                parts.append(f"({coeff})*{monomial}")
            else:
                parts.append(f"{coeff}*{monomial}")
        return " + ".join(parts)


# =============================================================================
# LAURENT SERIES IN THE REGULATOR
# =============================================================================

@dataclass(frozen=True)
class Regulator:
    """The regulator variable and the highest exponent kept"""
    name: str = "eps"
    order: int = 8

    def variable(self) -> "RegulatorLaurent":
        return RegulatorLaurent(self, {1: 1})

    def pole(self, k: int = 1) -> "RegulatorLaurent":
        return RegulatorLaurent(self, {-k: 1})


def _lower(value):
    if isinstance(value, (ExactComplex, CouplingSeries)):
        return value
    c = ExactComplex.coerce(value)
    if c is None:
        raise TypeError(f"Laurent coefficient must be exact or a coupling series: {value!r}")
    return c


class RegulatorLaurent:
    """Laurent series in one regulator, coefficients exact or coupling series."""

    __slots__ = ('regulator', 'terms')

    def __init__(self, regulator: Regulator, terms: Optional[Dict[int, object]] = None):
        clean = {}
        for exp, coeff in (terms or {}).items():
            exp = int(exp)
            if exp > regulator.order:
                continue
            coeff = _lower(coeff)
            if not is_zero(coeff):
                clean[exp] = coeff
        self.regulator = regulator
        self.terms = clean

    def _lift(self, other) -> Optional["RegulatorLaurent"]:
        if isinstance(other, RegulatorLaurent):
            if other.regulator != self.regulator:
                raise ValueError(f"incompatible regulators: {self.regulator} vs {other.regulator}")
            return other
        if isinstance(other, CouplingSeries) or ExactComplex.coerce(other) is not None:
            return RegulatorLaurent(self.regulator, {0: other})
        return None

    @property
    def pole_order(self) -> int:
        return max([0] + [-e for e in self.terms])

    def principal(self) -> "RegulatorLaurent":
        return RegulatorLaurent(self.regulator, {e: c for e, c in self.terms.items() if e < 0})

    def finite(self) -> "RegulatorLaurent":
        return RegulatorLaurent(self.regulator, {e: c for e, c in self.terms.items() if e >= 0})

    def coefficient(self, exp: int):
        return self.terms.get(exp, ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def is_nilpotent(self) -> bool:
        return all(is_nilpotent(c) for c in self.terms.values())

    def conjugate(self) -> "RegulatorLaurent":
        return RegulatorLaurent(self.regulator, {e: conj(c) for e, c in self.terms.items()})

    def __bool__(self):
        return not self.is_zero()

    def __neg__(self):
        return RegulatorLaurent(self.regulator, {e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        acc = dict(self.terms)
        for e, c in o.terms.items():
            acc[e] = acc[e] + c if e in acc else c
        return RegulatorLaurent(self.regulator, acc)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        top = self.regulator.order
        acc = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = e1 + e2
                if e > top:
                    continue
                acc[e] = acc[e] + c1 * c2 if e in acc else c1 * c2
        return RegulatorLaurent(self.regulator, acc)

    __rmul__ = __mul__

    def _monomial_inverse(self) -> "RegulatorLaurent":
        if len(self.terms) != 1:
            raise ZeroDivisionError("only monomials in the regulator are invertible")
        (exp, coeff), = self.terms.items()
        return RegulatorLaurent(self.regulator, {-exp: 1 / coeff if isinstance(coeff, ExactComplex) else coeff.inverse()})

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o._monomial_inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self._monomial_inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self._monomial_inverse() ** (-n)
        result = RegulatorLaurent(self.regulator, {0: 1})
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        try:
            o = self._lift(other)
        except ValueError:
            return False
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        if set(self.terms) <= {0}:
            return hash(self.terms.get(0, ZERO))
        return hash(frozenset(self.terms.items()))

    def to_mapping(self) -> Dict[str, str]:
        return {str(e): str(self.terms[e]) for e in sorted(self.terms)}

    def __repr__(self):
        return f"RegulatorLaurent({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        name = self.regulator.name
        parts = []
        for e in sorted(self.terms):
            coeff = str(self.terms[e])
            if e == 0:
                parts.append(coeff)
            else:
                power = name if e == 1 else f"{name}^{e}"
                parts.append(f"({coeff})*{power}")
        return " + ".join(parts)


Scalar = Union[int, Fraction, ExactComplex, CouplingSeries, RegulatorLaurent]


# =============================================================================
# GENERIC HELPERS
# =============================================================================

def as_scalar(value) -> Scalar:
    c = ExactComplex.coerce(value)
    return c if c is not None else value


def is_zero(value) -> bool:
    if isinstance(value, (int, Fraction)):
        return value == 0
    return value.is_zero()


def is_nilpotent(value) -> bool:
    """Zero constant term; exact scalars are nilpotent only when zero."""
    if isinstance(value, (CouplingSeries, RegulatorLaurent)):
        return value.is_nilpotent()
    return is_zero(value)


def conj(value) -> Scalar:
    if isinstance(value, (int, Fraction)):
        return value
    return value.conjugate()


def principal_part(value) -> Scalar:
    if isinstance(value, RegulatorLaurent):
        return value.principal()
    return ZERO


def finite_part(value) -> Scalar:
    if isinstance(value, RegulatorLaurent):
        return value.finite()
    return value


def has_pole(value) -> bool:
    return isinstance(value, RegulatorLaurent) and not value.principal().is_zero()


def laurent_split(a: Scalar) -> Tuple[Scalar, Scalar]:
    """(principal, finite) with a = principal + finite."""
    return principal_part(a), finite_part(a)


def render_scalar(value):
    """Exact textual form; Laurent values render as exponent -> text."""
    if isinstance(value, RegulatorLaurent):
        return value.to_mapping()
    return str(as_scalar(value))


def series_exp(a) -> Scalar:
    """exp of a nilpotent coupling series, truncated at the ring order."""
    if not is_nilpotent(a):
        raise NonNilpotentError(f"exp of non-nilpotent series: constant term of {a} is not zero")
    if not isinstance(a, CouplingSeries):
        return ONE
    result = a.ring.one()
    term = a.ring.one()
    for n in range(1, a.ring.order + 1):
        term = term * a * Fraction(1, n)
        result = result + term
    return result


def series_log(a) -> Scalar:
    """log of a coupling series with constant term 1."""
    if not isinstance(a, CouplingSeries):
        if as_scalar(a) != 1:
            raise NonNilpotentError(f"log requires constant term 1, got {a}")
        return ZERO
    if a.constant_term != 1:
        raise NonNilpotentError(f"log requires constant term 1, got {a.constant_term}")
    u = a - 1
    result = a.ring.zero()
    power = a.ring.one()
    for n in range(1, a.ring.order + 1):
        power = power * u
        result = result + power * Fraction((-1) ** (n + 1), n)
    return result


# =============================================================================
# COMPONENT VIEW (for constant-coefficient linear solves)
# =============================================================================

ComponentKey = Tuple[int, Tuple[int, ...]]


def scalar_components(value) -> Dict[ComponentKey, ExactComplex]:
    """Flatten a scalar into (regulator exponent, coupling exponents) -> exact."""
    if isinstance(value, RegulatorLaurent):
        out = {}
        for e, c in value.terms.items():
            for (_, exps), x in scalar_components(c).items():
                out[(e, exps)] = x
        return out
    if isinstance(value, CouplingSeries):
        return {(0, exps): c for exps, c in value.terms.items()}
    c = as_scalar(value)
    return {} if c.is_zero() else {(0, ()): c}


def scalar_context(values: Iterable) -> Tuple[Optional[CouplingRing], Optional[Regulator]]:
    """Coupling ring and regulator carried by any of the values."""
    ring, regulator = None, None
    for v in values:
        if isinstance(v, RegulatorLaurent):
            regulator = v.regulator
            for c in v.terms.values():
                if isinstance(c, CouplingSeries):
                    ring = c.ring
        elif isinstance(v, CouplingSeries):
            ring = v.ring
    return ring, regulator


def assemble_scalar(components: Dict[ComponentKey, ExactComplex],
                    ring: Optional[CouplingRing] = None,
                    regulator: Optional[Regulator] = None) -> Scalar:
    """Inverse of scalar_components for the given ring and regulator."""
    by_exp: Dict[int, Dict[Tuple[int, ...], ExactComplex]] = {}
    for (e, exps), c in components.items():
        if ring is not None and not exps:
            exps = (0,) * len(ring.names)
        by_exp.setdefault(e, {})
        by_exp[e][exps] = by_exp[e].get(exps, ZERO) + c

    def lower(terms):
        if ring is None:
            return terms.get((), ZERO)
        return CouplingSeries(ring, terms)

    if regulator is None:
        return lower(by_exp.get(0, {}))
    return RegulatorLaurent(regulator, {e: lower(t) for e, t in by_exp.items()})


def to_sympy(value) -> sympy.Expr:
    c = ExactComplex.coerce(value)
    if c is None:
        raise TypeError(f"only exact scalars convert to sympy: {value!r}")
    return sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)


def from_sympy(expr) -> ExactComplex:
    re, im = sympy.sympify(expr).expand().as_real_imag()
    re, im = sympy.Rational(re), sympy.Rational(im)
    return ExactComplex(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))
