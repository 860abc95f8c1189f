"""Semisimple Q-algebras as products of simple components.

Three component kinds are supported: a number field F, a matrix algebra
M_n(F) and a rational quaternion algebra (a, b / Q).  Every component knows its
center, its Q-dimension, its reduced norm and the places where it ramifies.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .errors import NotAUnit, NotRamified, UnsupportedComponent, ValidationError, ZeroElement
from .exact_core import as_fraction, fraction_str
from .number_field import (
    DEFAULT_PRECISION, FieldElement, NumberField, _prime_factors, _vp, embed, rationals,
)


# ---------------------------------------------------------------------------
# Hilbert symbols over Q

def _legendre(u: int, p: int) -> int:
    r = pow(u % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def hilbert_symbol(a, b, p) -> int:
    """(a, b)_p for nonzero rationals; p a rational prime or the string "inf"."""
    a, b = as_fraction(a), as_fraction(b)
    if a == 0 or b == 0:
        raise ZeroElement("Hilbert symbol of zero")
    # a -> a * den^2 keeps the square class
    a = a.numerator * a.denominator
    b = b.numerator * b.denominator
    if p == "inf":
        return -1 if a < 0 and b < 0 else 1
    alpha, beta = _vp(a, p), _vp(b, p)
    u, v = a // p ** alpha, b // p ** beta
    if p != 2:
        eps = ((p - 1) // 2) % 2
        s = (-1) ** (alpha * beta * eps)
        return s * _legendre(u, p) ** beta * _legendre(v, p) ** alpha

    def e(x):
        return ((x - 1) // 2) % 2

    def w(x):
        return ((x * x - 1) // 8) % 2

    return (-1) ** ((e(u) * e(v) + alpha * w(v) + beta * w(u)) % 2)


# ---------------------------------------------------------------------------
# components

def _mat_det(M, one):
    M = [list(r) for r in M]
    n = len(M)
    det = one
    for c in range(n):
        piv = next((r for r in range(c, n) if not M[r][c].is_zero()), None)
        if piv is None:
            return one * 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det = det * M[c][c]
        inv = M[c][c].inverse()
        for r in range(c + 1, n):
            if not M[r][c].is_zero():
                f = M[r][c] * inv
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return det


def _mat_inv(M, one):
    n = len(M)
    zero = one * 0
    A = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        piv = next((r for r in range(c, n) if not A[r][c].is_zero()), None)
        if piv is None:
            raise NotAUnit("singular matrix")
        A[c], A[piv] = A[piv], A[c]
        inv = A[c][c].inverse()
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and not A[r][c].is_zero():
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return tuple(tuple(r[n:]) for r in A)


class SimpleComponent:
    kind: str
    center: NumberField
    dim: int
    nr_degree: int

    def key(self):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def is_invertible(self, x) -> bool:
        return not self.reduced_norm(x).is_zero()

    def norm_to_Q(self, x) -> Fraction:
        """N_{A_i/Q}(x), the determinant of left multiplication over Q."""
        return self.reduced_norm(x).norm() ** self.nr_degree

    def ramified_real_places(self) -> frozenset:
        return frozenset()

    def ramified_primes(self) -> frozenset:
        return frozenset()

    @property
    def is_commutative(self) -> bool:
        return False


class FieldComponent(SimpleComponent):
    kind = "field"

    def __init__(self, field: NumberField):
        self.field = self.center = field
        self.dim = field.degree
        self.nr_degree = 1

    def key(self):
        return ("field", self.field)

    def __repr__(self):
        return f"Field({self.field.name})"

    @property
    def is_commutative(self):
        return True

    def one(self):
        return self.field.one()

    def zero(self):
        return self.field.zero()

    def add(self, x, y):
        return x + y

    def neg(self, x):
        return -x

    def mul(self, x, y):
        return x * y

    def inv(self, x):
        if x.is_zero():
            raise NotAUnit("zero is not invertible")
        return x.inverse()

    def is_zero(self, x):
        return x.is_zero()

    def reduced_norm(self, x):
        return x

    def reduced_trace(self, x) -> Fraction:
        return x.trace()

    def maximal_discriminant(self) -> Fraction:
        return abs(self.field.discriminant)

    def scalar(self, c: FieldElement):
        return c

    def to_coords(self, x):
        return list(x.coords)

    def from_coords(self, v):
        return self.field(v)

    def random(self, rng: random.Random, bound: int = 10):
        return self.field([rng.randint(-bound, bound) for _ in range(self.dim)])

    def parse_value(self, data):
        if isinstance(data, (str, int)):
            return self.field.scalar(data)
        return self.field(data)

    def value_to_json(self, x):
        return x.to_json()


class MatrixComponent(SimpleComponent):
    kind = "matrix"

    def __init__(self, n: int, field: NumberField | None = None):
        if n < 1:
            raise ValidationError("matrix size must be positive")
        self.n = n
        self.field = self.center = field or rationals()
        self.dim = n * n * self.field.degree
        self.nr_degree = n

    def key(self):
        return ("matrix", self.n, self.field)

    def __repr__(self):
        return f"M_{self.n}({self.field.name})"

    @property
    def is_commutative(self):
        return self.n == 1

    def one(self):
        F = self.field
        return tuple(tuple(F.one() if i == j else F.zero() for j in range(self.n)) for i in range(self.n))

    def zero(self):
        F = self.field
        return tuple(tuple(F.zero() for _ in range(self.n)) for _ in range(self.n))

    def add(self, x, y):
        return tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(x, y))

    def neg(self, x):
        return tuple(tuple(-a for a in r) for r in x)

    def mul(self, x, y):
        n, F = self.n, self.field
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = F.zero()
                for k in range(n):
                    if not x[i][k].is_zero() and not y[k][j].is_zero():
                        acc = acc + x[i][k] * y[k][j]
                row.append(acc)
            out.append(tuple(row))
        return tuple(out)

    def inv(self, x):
        return _mat_inv(x, self.field.one())

    def is_zero(self, x):
        return all(a.is_zero() for r in x for a in r)

    def reduced_norm(self, x):
        return _mat_det(x, self.field.one())

    def reduced_trace(self, x) -> Fraction:
        return sum((x[i][i].trace() for i in range(self.n)), Fraction(0))

    def maximal_discriminant(self) -> Fraction:
        return abs(self.field.discriminant) ** (self.n * self.n)

    def scalar(self, c: FieldElement):
        F = self.field
        return tuple(tuple(c if i == j else F.zero() for j in range(self.n)) for i in range(self.n))

    def to_coords(self, x):
        return [c for r in x for a in r for c in a.coords]

    def from_coords(self, v):
        d = self.field.degree
        v = list(v)
        entries = [self.field(v[k * d:(k + 1) * d]) for k in range(self.n * self.n)]
        return tuple(tuple(entries[i * self.n:(i + 1) * self.n]) for i in range(self.n))

    def random(self, rng: random.Random, bound: int = 10):
        return self.from_coords([rng.randint(-bound, bound) for _ in range(self.dim)])

    def parse_value(self, data):
        if len(data) != self.n or any(len(r) != self.n for r in data):
            raise ValidationError(f"expected a {self.n}x{self.n} matrix")
        fc = FieldComponent(self.field)
        return tuple(tuple(fc.parse_value(a) for a in r) for r in data)

    def value_to_json(self, x):
        if self.field.degree == 1:
            return [[fraction_str(a.coords[0]) for a in r] for r in x]
        return [[a.to_json() for a in r] for r in x]


class QuaternionComponent(SimpleComponent):
    """(a, b / Q) with basis 1, i, j, k = ij; i^2 = a, j^2 = b."""

    kind = "quaternion"

    def __init__(self, a, b):
        self.a, self.b = as_fraction(a), as_fraction(b)
        if self.a == 0 or self.b == 0:
            raise ValidationError("quaternion parameters must be nonzero")
        self.center = rationals()
        self.dim = 4
        self.nr_degree = 2

    def key(self):
        return ("quaternion", self.a, self.b)

    def __repr__(self):
        return f"({fraction_str(self.a)}, {fraction_str(self.b)} / Q)"

    def one(self):
        return (Fraction(1), Fraction(0), Fraction(0), Fraction(0))

    def zero(self):
        return (Fraction(0),) * 4

    def add(self, x, y):
        return tuple(s + t for s, t in zip(x, y))

    def neg(self, x):
        return tuple(-s for s in x)

    def mul(self, p, q):
        a, b = self.a, self.b
        x1, y1, z1, w1 = p
        x2, y2, z2, w2 = q
        return (
            x1 * x2 + a * y1 * y2 + b * z1 * z2 - a * b * w1 * w2,
            x1 * y2 + y1 * x2 - b * z1 * w2 + b * w1 * z2,
            x1 * z2 + z1 * x2 + a * y1 * w2 - a * w1 * y2,
            x1 * w2 + w1 * x2 + y1 * z2 - z1 * y2,
        )

    def conj(self, x):
        return (x[0], -x[1], -x[2], -x[3])

    def nr_rational(self, x) -> Fraction:
        X, Y, Z, W = x
        return X * X - self.a * Y * Y - self.b * Z * Z + self.a * self.b * W * W

    def inv(self, x):
        n = self.nr_rational(x)
        if n == 0:
            raise NotAUnit("quaternion with zero reduced norm")
        return tuple(c / n for c in self.conj(x))

    def is_zero(self, x):
        return not any(x)

    def reduced_norm(self, x):
        return self.center.scalar(self.nr_rational(x))

    def reduced_trace(self, x) -> Fraction:
        return 2 * x[0]

    def maximal_discriminant(self) -> Fraction:
        d = 1
        for p in self.ramified_primes():
            d *= p
        return Fraction(d * d)

    def scalar(self, c: FieldElement):
        return (c.coords[0], Fraction(0), Fraction(0), Fraction(0))

    def to_coords(self, x):
        return list(x)

    def from_coords(self, v):
        v = tuple(as_fraction(c) for c in v)
        if len(v) != 4:
            raise ValidationError("quaternions have 4 coordinates")
        return v

    def random(self, rng: random.Random, bound: int = 10):
        return tuple(Fraction(rng.randint(-bound, bound)) for _ in range(4))

    def parse_value(self, data):
        if isinstance(data, (str, int)):
            return (as_fraction(data), Fraction(0), Fraction(0), Fraction(0))
        return self.from_coords(data)

    def value_to_json(self, x):
        return [fraction_str(c) for c in x]

    def ramified_real_places(self):
        return frozenset({0}) if hilbert_symbol(self.a, self.b, "inf") == -1 else frozenset()

    @cached_property
    def _ramified_primes(self):
        cands = {2} | _prime_factors(self.a.numerator * self.a.denominator) \
            | _prime_factors(self.b.numerator * self.b.denominator)
        return frozenset(p for p in cands if hilbert_symbol(self.a, self.b, p) == -1)

    def ramified_primes(self):
        return self._ramified_primes

    def local_valuation(self, x, p: int) -> int:
        if p not in self.ramified_primes():
            raise NotRamified(f"{self!r} is split at {p}")
        n = self.nr_rational(x)
        if n == 0:
            raise ZeroElement("valuation of zero")
        return _vp(n, p)


def component_from_json(data) -> SimpleComponent:
    kind = data.get("kind")
    if kind == "field":
        return FieldComponent(_field_from(data))
    if kind == "matrix":
        return MatrixComponent(int(data["n"]), _field_from(data) if ("field" in data or "quadratic" in data) else None)
    if kind == "quaternion":
        return QuaternionComponent(data["a"], data["b"])
    raise UnsupportedComponent(f"unknown component kind {kind!r}")


def _field_from(data) -> NumberField:
    if "quadratic" in data:
        from .number_field import quadratic_field
        return quadratic_field(int(data["quadratic"]))
    f = data.get("field")
    if f is None or f == "Q":
        return rationals()
    return NumberField.from_json(f)


def component_to_json(c: SimpleComponent) -> dict:
    if isinstance(c, FieldComponent):
        return {"kind": "field", "field": c.field.to_json()}
    if isinstance(c, MatrixComponent):
        return {"kind": "matrix", "n": c.n, "field": c.field.to_json()}
    return {"kind": "quaternion", "a": fraction_str(c.a), "b": fraction_str(c.b)}


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RamificationData:
    """Per component: the real places of its center at which it ramifies."""

    real_places: tuple[frozenset, ...]


class SemisimpleAlgebra:
    def __init__(self, components: Sequence[SimpleComponent]):
        if not components:
            raise ValidationError("an algebra needs at least one component")
        self.components = tuple(components)
        self.dim = sum(c.dim for c in self.components)
        offs, o = [], 0
        for c in self.components:
            offs.append(o)
            o += c.dim
        self.offsets = tuple(offs)

    def __eq__(self, other):
        return isinstance(other, SemisimpleAlgebra) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return " x ".join(repr(c) for c in self.components)

    @cached_property
    def ramification(self) -> RamificationData:
        return RamificationData(tuple(c.ramified_real_places() for c in self.components))

    @property
    def is_commutative(self) -> bool:
        return all(c.is_commutative for c in self.components)

    def one(self) -> AlgebraElement:
        return AlgebraElement(self, tuple(c.one() for c in self.components))

    def zero(self) -> AlgebraElement:
        return AlgebraElement(self, tuple(c.zero() for c in self.components))

    def element(self, parts) -> AlgebraElement:
        if len(parts) != len(self.components):
            raise ValidationError("wrong number of components")
        return AlgebraElement(self, tuple(parts))

    def from_coords(self, v) -> AlgebraElement:
        v = [as_fraction(x) for x in v]
        if len(v) != self.dim:
            raise ValidationError(f"expected {self.dim} coordinates, got {len(v)}")
        return AlgebraElement(self, tuple(c.from_coords(v[o:o + c.dim])
                                          for c, o in zip(self.components, self.offsets)))

    def embed_component(self, i: int, value) -> AlgebraElement:
        """The element equal to value in component i and 1 elsewhere."""
        parts = [c.one() for c in self.components]
        parts[i] = value
        return AlgebraElement(self, tuple(parts))

    def center_scalar(self, cs: Sequence[FieldElement]) -> AlgebraElement:
        return AlgebraElement(self, tuple(c.scalar(x) for c, x in zip(self.components, cs)))

    def random_element(self, rng: random.Random, bound: int = 10) -> AlgebraElement:
        return AlgebraElement(self, tuple(c.random(rng, bound) for c in self.components))

    def to_json(self) -> dict:
        return {"components": [component_to_json(c) for c in self.components]}

    @classmethod
    def from_json(cls, data) -> SemisimpleAlgebra:
        return cls([component_from_json(c) for c in data["components"]])


@dataclass(frozen=True)
class AlgebraElement:
    algebra: SemisimpleAlgebra
    parts: tuple

    def _zip(self, other):
        if not isinstance(other, AlgebraElement) or other.algebra != self.algebra:
            raise ValidationError("elements of different algebras")
        return zip(self.algebra.components, self.parts, other.parts)

    def __add__(self, other):
        return AlgebraElement(self.algebra, tuple(c.add(x, y) for c, x, y in self._zip(other)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(c.neg(x) for c, x in zip(self.algebra.components, self.parts)))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return AlgebraElement(self.algebra, tuple(c.mul(x, y) for c, x, y in self._zip(other)))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def scale(self, q) -> AlgebraElement:
        q = as_fraction(q)
        return self.algebra.from_coords([q * v for v in self.coords()])

    def inverse(self) -> AlgebraElement:
        return AlgebraElement(self.algebra, tuple(c.inv(x) for c, x in zip(self.algebra.components, self.parts)))

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self.algebra.one(), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def coords(self) -> list[Fraction]:
        return [v for c, x in zip(self.algebra.components, self.parts) for v in c.to_coords(x)]

    def reduced_norm(self) -> tuple[FieldElement, ...]:
        return tuple(c.reduced_norm(x) for c, x in zip(self.algebra.components, self.parts))

    def is_invertible(self) -> bool:
        return all(c.is_invertible(x) for c, x in zip(self.algebra.components, self.parts))

    def is_one(self) -> bool:
        return self == self.algebra.one()

    def norm_to_Q(self) -> Fraction:
        out = Fraction(1)
        for c, x in zip(self.algebra.components, self.parts):
            out *= c.norm_to_Q(x)
        return out

    def to_json(self) -> list:
        return [c.value_to_json(x) for c, x in zip(self.algebra.components, self.parts)]

    def __repr__(self):
        return f"AlgebraElement({self.parts!r})"


# ---------------------------------------------------------------------------
# operations named in the interface

def reduced_norm(x: AlgebraElement) -> tuple[FieldElement, ...]:
    return x.reduced_norm()


def is_norm_one(x: AlgebraElement) -> bool:
    if not x.is_invertible():
        raise NotAUnit("is_norm_one needs an invertible element")
    return all(n.is_one() for n in x.reduced_norm())


def is_totally_positive_plus(c: Sequence[FieldElement], ram: RamificationData,
                             precision_bits: int = DEFAULT_PRECISION) -> bool:
    """Positive at every ramified real place; other places are unconstrained."""
    for x, places in zip(c, ram.real_places):
        for pl in places:
            if x.is_rational():
                if x.coords[0] <= 0:
                    return False
            elif embed(x, pl, precision_bits) <= 0:
                return False
    return True


def quaternion_local_valuation(x, p: int, component: QuaternionComponent | None = None) -> int:
    if isinstance(x, AlgebraElement):
        comps = [(c, v) for c, v in zip(x.algebra.components, x.parts) if isinstance(c, QuaternionComponent)]
        if len(comps) != 1:
            raise UnsupportedComponent("expected exactly one quaternion component")
        component, x = comps[0]
    if component is None:
        raise ValidationError("quaternion component required")
    return component.local_valuation(x, p)


def hamilton_quaternions() -> SemisimpleAlgebra:
    return SemisimpleAlgebra([QuaternionComponent(-1, -1)])


def field_algebra(field: NumberField) -> SemisimpleAlgebra:
    return SemisimpleAlgebra([FieldComponent(field)])

