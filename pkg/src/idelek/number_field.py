"""Number fields, their elements and fractional ideals.

Fields are given by a monic integer defining polynomial and a user-supplied
integral basis (validated, never computed).  Exact class groups and unit
groups are provided for Q and quadratic fields only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import mpmath

from .errors import IndexDivisorError, UnsupportedField, ValidationError, ZeroElement
from .exact_core import (
    IntMatrix, ZLattice, as_fraction, fraction_str, lattice_index, lattice_intersect,
    rat_det, rat_inverse, smith_decomp, vec_mat,
)

DEFAULT_PRECISION = 128
GUARD_BITS = 24


# ---------------------------------------------------------------------------
# small polynomial helpers (ascending coefficient lists of Fractions)

def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_rem(a, b):
    a, b = _trim(a), _trim(b)
    while len(a) >= len(b) and a:
        f = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] -= f * c
        a = _trim(a)
    return a


def _poly_eval(p, x):
    acc = Fraction(0) if isinstance(x, Fraction) else 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _deriv(p):
    return [i * c for i, c in enumerate(p)][1:]


def _sturm_chain(f):
    chain = [_trim(f), _trim(_deriv(f))]
    while len(chain[-1]) > 1:
        r = _poly_rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-c for c in r])
    return chain


def _sign_changes(chain, x):
    signs = [s for s in ((_poly_eval(p, x) > 0) - (_poly_eval(p, x) < 0) for p in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _isolate_real_roots(f):
    """Disjoint rational intervals (a, b] each containing exactly one real root of f."""
    chain = _sturm_chain(f)
    bound = 1 + max(abs(c) for c in f[:-1]) if len(f) > 1 else Fraction(1)
    bound = Fraction(math.ceil(bound))
    out, stack = [], [(-bound, bound)]
    while stack:
        a, b = stack.pop()
        n = _sign_changes(chain, a) - _sign_changes(chain, b)
        if n == 0:
            continue
        if n == 1:
            out.append((a, b))
            continue
        m = (a + b) / 2
        stack.extend([(a, m), (m, b)])
    return sorted(out, key=lambda ab: -ab[0])


def _refine_root(f, a, b, bits):
    """Bisect an isolating interval until its width is below 2**-bits (exact signs)."""
    if _poly_eval(f, b) == 0:
        return b, b
    sa = _poly_eval(f, a) > 0
    width = Fraction(1, 2 ** bits)
    while b - a > width:
        m = (a + b) / 2
        v = _poly_eval(f, m)
        if v == 0:
            return m, m
        if (v > 0) == sa:
            a = m
        else:
            b = m
    return a, b


def _mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


@dataclass(frozen=True)
class Place:
    """An infinite place: real places first (descending roots), then complex ones."""

    index: int
    kind: str  # "real" | "complex"

    @property
    def is_real(self) -> bool:
        return self.kind == "real"


# ---------------------------------------------------------------------------

class NumberField:
    """F = Q[x]/(poly) with a validated integral basis of O_F in power-basis coordinates."""

    def __init__(self, poly: Sequence[int], integral_basis=None, prime_overrides=None,
                 name: str | None = None, check: bool = True):
        poly = [as_fraction(c) for c in poly]
        if not poly or poly[-1] != 1:
            raise ValidationError("defining polynomial must be monic")
        if any(c.denominator != 1 for c in poly):
            raise ValidationError("defining polynomial must have integer coefficients")
        self.poly = tuple(poly)
        self.degree = n = len(poly) - 1
        if n < 1:
            raise ValidationError("defining polynomial must have degree >= 1")
        if integral_basis is None:
            integral_basis = [[int(i == j) for j in range(n)] for i in range(n)]
        self.integral_basis = tuple(tuple(as_fraction(v) for v in r) for r in integral_basis)
        if len(self.integral_basis) != n or any(len(r) != n for r in self.integral_basis):
            raise ValidationError("integral basis must be n x n")
        self.prime_overrides = {int(p): v for p, v in (prime_overrides or {}).items()}
        self.name = name or f"Q[x]/({_poly_str(self.poly)})"
        self._root_cache: dict = {}
        self._reduction = self._powers_reduction()
        if check:
            self._validate()

    # -- identity --
    @property
    def key(self):
        return (self.poly, self.integral_basis)

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"NumberField({self.name})"

    # -- construction helpers --
    def _powers_reduction(self):
        n, c = self.degree, self.poly
        red = {}
        cur = [Fraction(0)] * n
        if n >= 1:
            cur = [-c[i] for i in range(n)]  # theta^n
        for k in range(n, 2 * n - 1):
            red[k] = cur
            top = cur[-1]
            nxt = [Fraction(0)] + cur[:-1]
            cur = [a - top * c[i] for i, a in enumerate(nxt)]
        return red

    def _validate(self):
        if self.degree > 1 and not _is_irreducible(self.poly):
            raise ValidationError(f"{_poly_str(self.poly)} is reducible over Q")
        B = [list(r) for r in self.integral_basis]
        if rat_det(B) == 0:
            raise ValidationError("integral basis is singular")
        one = [Fraction(int(i == 0)) for i in range(self.degree)]
        if any(v.denominator != 1 for v in self.ib_coords(one)):
            raise ValidationError("integral basis does not contain 1")
        for i in range(self.degree):
            for j in range(i, self.degree):
                prod = self._mul_coords(B[i], B[j])
                if any(v.denominator != 1 for v in self.ib_coords(prod)):
                    raise ValidationError("integral basis is not closed under multiplication")
        if self.degree > 1:
            theta = [Fraction(int(i == 1)) for i in range(self.degree)]
            if any(v.denominator != 1 for v in self.ib_coords(theta)):
                raise ValidationError("integral basis must contain the generator theta")
        s = len(_isolate_real_roots(list(self.poly)))
        if (self.degree - s) % 2:
            raise ValidationError("inconsistent signature")

    # -- basic data --
    @cached_property
    def _ib_inverse(self):
        return rat_inverse([list(r) for r in self.integral_basis])

    def ib_coords(self, coords) -> list[Fraction]:
        return vec_mat(list(coords), self._ib_inverse)

    def from_ib(self, v) -> FieldElement:
        return FieldElement(self, tuple(vec_mat([as_fraction(x) for x in v], self.integral_basis)))

    @cached_property
    def maximal_lattice(self) -> ZLattice:
        return ZLattice.standard(self.degree)

    @cached_property
    def index(self) -> int:
        """[O_F : Z[theta]]."""
        idx = 1 / abs(rat_det([list(r) for r in self.integral_basis]))
        assert idx.denominator == 1
        return int(idx)

    @cached_property
    def signature(self) -> tuple[int, int]:
        s = len(_isolate_real_roots(list(self.poly)))
        return s, (self.degree - s) // 2

    @cached_property
    def places(self) -> tuple[Place, ...]:
        s, r = self.signature
        return tuple([Place(i, "real") for i in range(s)] + [Place(s + i, "complex") for i in range(r)])

    @cached_property
    def discriminant(self) -> Fraction:
        B = self.integral_basis_elements
        return rat_det([[(x * y).trace() for y in B] for x in B])

    @cached_property
    def integral_basis_elements(self) -> tuple[FieldElement, ...]:
        return tuple(FieldElement(self, r) for r in self.integral_basis)

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    @property
    def is_quadratic(self) -> bool:
        return self.degree == 2

    # -- elements --
    def __call__(self, coords) -> FieldElement:
        if isinstance(coords, (int, Fraction, str)):
            return self.scalar(coords)
        coords = tuple(as_fraction(c) for c in coords)
        if len(coords) != self.degree:
            raise ValidationError(f"expected {self.degree} coordinates")
        return FieldElement(self, coords)

    def scalar(self, c) -> FieldElement:
        c = as_fraction(c)
        return FieldElement(self, (c,) + (Fraction(0),) * (self.degree - 1))

    def one(self) -> FieldElement:
        return self.scalar(1)

    def zero(self) -> FieldElement:
        return self.scalar(0)

    def gen(self) -> FieldElement:
        if self.degree == 1:
            return self.scalar(-self.poly[0])
        return FieldElement(self, tuple(Fraction(int(i == 1)) for i in range(self.degree)))

    def _mul_coords(self, a, b):
        n = self.degree
        raw = [Fraction(0)] * (2 * n - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        raw[i + j] += x * y
        out = raw[:n]
        for k in range(n, 2 * n - 1):
            if raw[k]:
                out = [o + raw[k] * r for o, r in zip(out, self._reduction[k])]
        return out

    def conj(self, x: FieldElement) -> FieldElement:
        """Nontrivial automorphism of a quadratic field (identity on Q)."""
        if self.degree == 1:
            return x
        if self.degree != 2:
            raise UnsupportedField("conjugation only for quadratic fields")
        a, b = x.coords
        # theta' = -c1 - theta
        return FieldElement(self, (a - b * self.poly[1], -b))

    # -- embeddings --
    def root(self, place: Place | int, precision_bits: int = DEFAULT_PRECISION):
        idx = place.index if isinstance(place, Place) else place
        key = (idx, precision_bits)
        if key not in self._root_cache:
            self._root_cache[key] = self._compute_root(idx, precision_bits)
        return self._root_cache[key]

    def _compute_root(self, idx, bits):
        f = list(self.poly)
        s, _ = self.signature
        with mpmath.workprec(bits + GUARD_BITS):
            if self.degree == 1:
                return _mp(-f[0])
            if idx < s:
                a, b = _isolate_real_roots(f)[idx]
                a, b = _refine_root(f, a, b, bits + GUARD_BITS)
                return (_mp(a) + _mp(b)) / 2
            coeffs = [mpmath.mpf(int(c)) for c in reversed(f)]
            roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=2 * bits)
            df = _deriv(f)
            polished = []
            for z in roots:
                z = mpmath.mpc(z)
                if z.imag <= 0:
                    continue
                for _ in range(4):
                    fz = mpmath.polyval([mpmath.mpf(int(c)) for c in reversed(f)], z)
                    dz = mpmath.polyval([_mp(c) for c in reversed(df)], z)
                    z = z - fz / dz
                polished.append(z)
            polished.sort(key=lambda z: (-z.real, z.imag))
            return polished[idx - s]

    def embed(self, x: FieldElement, place: Place | int, precision_bits: int = DEFAULT_PRECISION):
        return embed(x, place, precision_bits)

    # -- json --
    def to_json(self) -> dict:
        return {
            "poly": [fraction_str(c) for c in self.poly],
            "integral_basis": [[fraction_str(v) for v in r] for r in self.integral_basis],
            "prime_overrides": {str(p): v for p, v in self.prime_overrides.items()},
            "name": self.name,
        }

    @classmethod
    def from_json(cls, data) -> NumberField:
        if "quadratic" in data:
            return quadratic_field(int(data["quadratic"]))
        if data.get("builtin") == "Q" or data.get("rationals"):
            return rationals()
        return cls(data["poly"], data.get("integral_basis"), data.get("prime_overrides"),
                   data.get("name"))


def _poly_str(poly) -> str:
    terms = []
    for i, c in reversed(list(enumerate(poly))):
        if c == 0:
            continue
        cs = fraction_str(c)
        if i == 0:
            terms.append(cs)
        else:
            mon = "x" if i == 1 else f"x^{i}"
            terms.append(mon if c == 1 else (f"-{mon}" if c == -1 else f"{cs}*{mon}"))
    return " + ".join(terms).replace("+ -", "- ") or "0"


def _is_irreducible(poly) -> bool:
    from sympy import Poly, QQ, symbols
    x = symbols("x")
    return Poly([int(c) for c in reversed(poly)], x, domain=QQ).is_irreducible


_FIELDS: dict = {}


def rationals() -> NumberField:
    if "Q" not in _FIELDS:
        _FIELDS["Q"] = NumberField([0, 1], [[1]], name="Q")
    return _FIELDS["Q"]


def _squarefree(d: int) -> bool:
    d = abs(d)
    return all(d % (k * k) for k in range(2, math.isqrt(d) + 1))


def quadratic_field(d: int) -> NumberField:
    """Q(sqrt d) with the built-in maximal order; theta = sqrt d or (1 + sqrt d)/2."""
    if d in _FIELDS:
        return _FIELDS[d]
    if d in (0, 1) or not _squarefree(d):
        raise ValidationError(f"d = {d} must be squarefree and != 0, 1")
    if d % 4 == 1:
        F = NumberField([-(d - 1) // 4, -1, 1], name=f"Q(sqrt({d}))")
    else:
        F = NumberField([-d, 0, 1], name=f"Q(sqrt({d}))")
    F.quadratic_d = d
    _FIELDS[d] = F
    return F


def quadratic_d(F: NumberField) -> int:
    """The squarefree d with F = Q(sqrt d)."""
    if getattr(F, "quadratic_d", None) is not None:
        return F.quadratic_d
    if F.degree != 2:
        raise UnsupportedField(f"{F.name} is not quadratic")
    c0, c1 = F.poly[0], F.poly[1]
    disc = int(c1 * c1 - 4 * c0)
    sign = -1 if disc < 0 else 1
    m = abs(disc)
    for k in range(math.isqrt(m), 0, -1):
        if m % (k * k) == 0:
            m //= k * k
            break
    F.quadratic_d = sign * m
    return F.quadratic_d


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldElement:
    field: NumberField
    coords: tuple[Fraction, ...]

    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValidationError("elements of different fields")
            return other
        return self.field.scalar(other)

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldElement(self.field, tuple(self.field._mul_coords(self.coords, o.coords)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self.field.one(), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __bool__(self):
        return not self.is_zero()

    def is_one(self) -> bool:
        return self.coords[0] == 1 and not any(self.coords[1:])

    @cached_property
    def mult_matrix(self) -> list[list[Fraction]]:
        """Rows: coordinates of x * theta^i."""
        n = self.field.degree
        return [self.field._mul_coords(self.coords, [Fraction(int(i == j)) for j in range(n)])
                for i in range(n)]

    def norm(self) -> Fraction:
        return rat_det(self.mult_matrix)

    def trace(self) -> Fraction:
        return sum((self.mult_matrix[i][i] for i in range(self.field.degree)), Fraction(0))

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise ZeroElement("zero has no inverse")
        e0 = [Fraction(int(i == 0)) for i in range(self.field.degree)]
        return FieldElement(self.field, tuple(vec_mat(e0, rat_inverse(self.mult_matrix))))

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def ib_coords(self) -> list[Fraction]:
        return self.field.ib_coords(self.coords)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.ib_coords())

    def __repr__(self):
        F = self.field
        if F.degree == 1:
            return fraction_str(self.coords[0])
        parts = []
        for i, c in enumerate(self.coords):
            if c:
                mon = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
                parts.append(f"{fraction_str(c)}{'*' if mon else ''}{mon}")
        return "(" + " + ".join(parts or ["0"]) + ")"

    def to_json(self) -> list[str]:
        return [fraction_str(c) for c in self.coords]


def embed(x: FieldElement, place: Place | int, precision_bits: int = DEFAULT_PRECISION):
    """sigma(x) at the given infinite place as an mpmath number (mpf for real places)."""
    if precision_bits < 64:
        raise ValidationError("precision_bits must be >= 64")
    F = x.field
    idx = place.index if isinstance(place, Place) else place
    if x.is_rational():
        with mpmath.workprec(precision_bits + GUARD_BITS):
            v = _mp(x.coords[0])
            return v if F.places[idx].is_real else mpmath.mpc(v, 0)
    r = F.root(idx, precision_bits)
    with mpmath.workprec(precision_bits + GUARD_BITS):
        acc = mpmath.mpf(0)
        for c in reversed(x.coords):
            acc = acc * r + _mp(c)
        return acc


# ---------------------------------------------------------------------------
# fractional ideals

@dataclass(frozen=True)
class FractionalIdeal:
    """Fractional ideal as a Z-lattice in integral-basis coordinates."""

    field: NumberField
    lattice: ZLattice

    @classmethod
    def from_generators(cls, field: NumberField, gens: Iterable[FieldElement]) -> FractionalIdeal:
        rows = []
        for g in gens:
            for w in field.integral_basis_elements:
                rows.append((g * w).ib_coords())
        return cls(field, ZLattice.from_rows(rows, field.degree))

    @classmethod
    def principal(cls, x: FieldElement) -> FractionalIdeal:
        if x.is_zero():
            raise ZeroElement("zero ideal is not a fractional ideal")
        return cls.from_generators(x.field, [x])

    @classmethod
    def unit(cls, field: NumberField) -> FractionalIdeal:
        return cls(field, field.maximal_lattice)

    def basis_elements(self) -> list[FieldElement]:
        return [self.field.from_ib(r) for r in self.lattice.rational_basis]

    def __mul__(self, other: FractionalIdeal) -> FractionalIdeal:
        if isinstance(other, FieldElement):
            other = FractionalIdeal.principal(other)
        A, B = self.basis_elements(), other.basis_elements()
        return FractionalIdeal(self.field, ZLattice.from_rows(
            [(a * b).ib_coords() for a in A for b in B], self.field.degree))

    def inverse(self) -> FractionalIdeal:
        # I^{-1} = intersection over basis elements b of b^{-1} O_F
        out = None
        for b in self.basis_elements():
            L = FractionalIdeal.principal(b.inverse()).lattice
            out = L if out is None else lattice_intersect(out, L)
        return FractionalIdeal(self.field, out)

    def __truediv__(self, other: FractionalIdeal) -> FractionalIdeal:
        return self * other.inverse()

    def __pow__(self, k: int) -> FractionalIdeal:
        if k < 0:
            return self.inverse() ** (-k)
        out, base = FractionalIdeal.unit(self.field), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def norm(self) -> Fraction:
        return lattice_index(self.lattice, self.field.maximal_lattice)

    def __contains__(self, x: FieldElement) -> bool:
        return x.ib_coords() in self.lattice

    def issubset(self, other: FractionalIdeal) -> bool:
        return self.lattice.issubset(other.lattice)

    def is_integral(self) -> bool:
        return self.lattice.denominator == 1

    def is_unit_ideal(self) -> bool:
        return self.lattice == self.field.maximal_lattice

    def scale(self, c) -> FractionalIdeal:
        return FractionalIdeal(self.field, self.lattice.scale(c))

    def valuation(self, P: PrimeIdeal) -> int:
        d = self.lattice.denominator
        J = self.scale(d) if d > 1 else self
        k = 0
        Pinv = P.ideal.inverse()
        while J.issubset(P.ideal):
            J = J * Pinv
            k += 1
        return k - P.e * _vp(d, P.p)

    def factor(self) -> dict[PrimeIdeal, int]:
        N = self.norm()
        out = {}
        for p in sorted(_prime_factors(N.numerator) | _prime_factors(N.denominator)):
            for P in factor_prime(self.field, p):
                v = self.valuation(P)
                if v:
                    out[P] = v
        return out

    def __repr__(self):
        return f"Ideal({self.field.name}, basis={self.lattice.basis.tolist()}, den={self.lattice.denominator})"


@dataclass(frozen=True, eq=False)
class PrimeIdeal:
    """A prime (p, g(theta)) with ramification index e and residue degree f."""

    ideal: FractionalIdeal
    p: int
    e: int
    f: int
    gen: FieldElement

    def __eq__(self, other):
        return isinstance(other, PrimeIdeal) and self.ideal == other.ideal

    def __hash__(self):
        return hash(self.ideal)

    def __repr__(self):
        return f"P({self.p}, {self.gen!r}; e={self.e}, f={self.f})"

    def to_json(self) -> dict:
        index = factor_prime(self.ideal.field, self.p).index(self)
        return {"p": str(self.p), "index": index}


def _vp(n, p) -> int:
    if isinstance(n, Fraction):
        return _vp(n.numerator, p) - _vp(n.denominator, p)
    n = abs(n)
    if n == 0:
        raise ZeroElement("valuation of zero")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def _prime_factors(n: int) -> set[int]:
    n = abs(n)
    out, d = set(), 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1
    if n > 1:
        out.add(n)
    return out


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


_FACTOR_CACHE: dict = {}


def factor_prime(field: NumberField, p: int) -> list[PrimeIdeal]:
    """Decompose pO_F = prod P_i^{e_i} by Dedekind-Kummer (or the user's override)."""
    p = int(p)
    if not _is_prime(p):
        raise ValidationError(f"{p} is not prime")
    key = (field, p)
    if key in _FACTOR_CACHE:
        return _FACTOR_CACHE[key]
    n = field.degree
    if field.index % p == 0:
        if p not in field.prime_overrides:
            raise IndexDivisorError(f"{p} divides [O_F : Z[theta]] = {field.index}; supply prime_overrides")
        out = []
        for spec in field.prime_overrides[p]:
            g = field(spec["gen"])
            I = FractionalIdeal.from_generators(field, [field.scalar(p), g])
            out.append(PrimeIdeal(I, p, int(spec["e"]), int(spec["f"]), g))
    elif n == 1:
        out = [PrimeIdeal(FractionalIdeal.principal(field.scalar(p)), p, 1, 1, field.scalar(p))]
    else:
        out = []
        for g_coeffs, e in _factor_mod_p(field.poly, p):
            g = field.zero()
            theta = field.gen()
            for i, c in enumerate(g_coeffs):
                g = g + c * theta ** i
            I = FractionalIdeal.from_generators(field, [field.scalar(p), g])
            out.append(PrimeIdeal(I, p, e, len(g_coeffs) - 1, g))
    if sum(P.e * P.f for P in out) != n:
        raise ValidationError(f"prime data at {p} inconsistent: sum e*f != {n}")
    for P in out:
        if P.ideal.norm() != p ** P.f:
            raise ValidationError(f"prime ideal above {p} has wrong norm")
    out.sort(key=lambda P: (P.f, P.ideal.lattice.basis.entries))
    _FACTOR_CACHE[key] = out
    return out


def _factor_mod_p(poly, p):
    from sympy import Poly, symbols
    x = symbols("x")
    f = Poly([int(c) % p for c in reversed(poly)], x, modulus=p)
    _, facs = f.factor_list()
    out = []
    for g, e in facs:
        coeffs = [int(c) % p for c in reversed(g.all_coeffs())]
        out.append((coeffs, int(e)))
    out.sort()
    return out


# ---------------------------------------------------------------------------
# exact norm-equation search (quadratic fields)

def _gram_t2(field: NumberField, basis: list[FieldElement]) -> list[list[Fraction]]:
    s, _ = field.signature
    if s == field.degree:
        return [[(a * b).trace() for b in basis] for a in basis]
    return [[(a * field.conj(b)).trace() for b in basis] for a in basis]


def _reduce_basis_2d(field: NumberField, basis: list[FieldElement]) -> list[FieldElement]:
    """Lagrange-Gauss reduction with respect to the positive definite T2 form."""
    b1, b2 = basis

    def t2(x):
        return _gram_t2(field, [x])[0][0]

    if t2(b1) > t2(b2):
        b1, b2 = b2, b1
    while True:
        G = _gram_t2(field, [b1, b2])
        mu = G[0][1] / G[0][0]
        q = math.floor(mu + Fraction(1, 2))
        b2 = b2 - q * b1
        if t2(b2) < t2(b1):
            b1, b2 = b2, b1
            continue
        return [b1, b2]


def _isqrt_exact(n: int):
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def elements_of_norm(ideal: FractionalIdeal, target: int) -> list[FieldElement]:
    """Elements a of an integral ideal I in a quadratic field with |N(a)| == target.

    Imaginary fields: every solution.  Real fields: every solution with
    |sigma_j(a)| <= sqrt(eps*T) at both places.  Multiplying by eps scales
    |sigma_0/sigma_1| by eps^2, so every unit orbit meets this box.
    """
    F = ideal.field
    if F.degree != 2 or not ideal.is_integral():
        raise UnsupportedField("norm search needs an integral ideal of a quadratic field")
    b1, b2 = _reduce_basis_2d(F, ideal.basis_elements())
    A, C = b1.norm(), b2.norm()
    B = (b1 + b2).norm() - A - C
    A, B, C = int(A), int(B), int(C)
    sols = []
    s, _ = F.signature
    if s == 0:
        disc = 4 * A * C - B * B
        ymax = math.isqrt(4 * A * target // disc) + 1
        targets = [target]
    else:
        eps = unit_group(F).fundamental_unit
        with mpmath.workprec(96):
            e0 = embed(eps, 0, 64)
            M = [[embed(b1, 0, 64), embed(b2, 0, 64)], [embed(b1, 1, 64), embed(b2, 1, 64)]]
            det = M[0][0] * M[1][1] - M[0][1] * M[1][0]
            rt = mpmath.sqrt(target)
            box = mpmath.sqrt(e0) * rt
            ymax = int(mpmath.ceil((abs(M[1][0]) + abs(M[0][0])) * box / abs(det))) + 2
        targets = [target, -target]
    for y in range(-ymax, ymax + 1):
        for T in targets:
            # A x^2 + B y x + C y^2 - T = 0
            if A == 0:
                continue
            disc = B * B * y * y - 4 * A * (C * y * y - T)
            r = _isqrt_exact(disc)
            if r is None:
                continue
            for num in {-B * y + r, -B * y - r}:
                if num % (2 * A) == 0:
                    x = num // (2 * A)
                    a = x * b1 + y * b2
                    if not a.is_zero():
                        sols.append(a)
    uniq = {a.coords: a for a in sols}
    return [uniq[k] for k in sorted(uniq)]


def is_principal(ideal: FractionalIdeal) -> FieldElement | None:
    """A generator of the ideal if it is principal, else None (Q and quadratic fields)."""
    F = ideal.field
    if F.degree == 1:
        return F.scalar(ideal.norm())
    if F.degree != 2:
        raise UnsupportedField(f"principality is decided for Q and quadratic fields only, not {F.name}")
    d = ideal.lattice.denominator
    J = ideal.scale(d) if d > 1 else ideal
    N = J.norm()
    assert N.denominator == 1
    for a in elements_of_norm(J, int(N)):
        if FractionalIdeal.principal(a) == J:
            return a / d
    return None


# ---------------------------------------------------------------------------
# units

@dataclass(frozen=True)
class UnitGroup:
    mu_order: int
    mu_generator: FieldElement
    fundamental_unit: FieldElement | None

    def roots_of_unity(self) -> list[FieldElement]:
        return [self.mu_generator ** k for k in range(self.mu_order)]


def _cf_quadratic(P: int, Q: int, D: int):
    """Partial quotients of (P + sqrt D)/Q, requiring Q | D - P^2."""
    assert (D - P * P) % Q == 0
    r = math.isqrt(D)
    while True:
        # floor((P + sqrt D)/Q); sqrt D is irrational
        if Q > 0:
            a = (P + r) // Q
        else:
            a = -((P + r) // -Q) - 1
        yield a
        P = a * Q - P
        Q = (D - P * P) // Q


_UNIT_CACHE: dict = {}


def unit_group(field: NumberField) -> UnitGroup:
    if field in _UNIT_CACHE:
        return _UNIT_CACHE[field]
    F = field
    if F.degree == 1:
        res = UnitGroup(2, F.scalar(-1), None)
    elif F.degree != 2:
        raise UnsupportedField(f"unit groups are computed for Q and quadratic fields only, not {F.name}")
    elif F.signature[0] == 0:
        units = elements_of_norm(FractionalIdeal.unit(F), 1)
        w = len(units)
        gen = next(u for u in units if all(not (u ** k).is_one() for k in range(1, w)))
        res = UnitGroup(w, gen, None)
    else:
        d = quadratic_d(F)
        theta = F.gen()
        # theta = sqrt d or (1 + sqrt d)/2, i.e. (P0 + sqrt d)/Q0
        P0, Q0 = (0, 1) if d % 4 != 1 else (1, 2)
        h0, k0 = 1, 0  # convergent p_{-1}/q_{-1}
        hm1, km1 = 0, 1  # p_{-2}/q_{-2}
        eps = None
        for a in _cf_quadratic(P0, Q0, d):
            h, k = a * h0 + hm1, a * k0 + km1
            hm1, km1, h0, k0 = h0, k0, h, k
            u = h - k * theta
            if k >= 1 and abs(u.norm()) == 1:
                eps = u
                break
        e0 = embed(eps, 0, 64)
        if abs(e0) < 1:
            eps = eps.inverse()
            e0 = embed(eps, 0, 64)
        if e0 < 0:
            eps = -eps
        res = UnitGroup(2, F.scalar(-1), eps)
    _UNIT_CACHE[field] = res
    return res


# ---------------------------------------------------------------------------
# class groups

def minkowski_bound(field: NumberField) -> float:
    n = field.degree
    _, r = field.signature
    D = abs(field.discriminant)
    with mpmath.workprec(80):
        return float(mpmath.sqrt(_mp(D)) * mpmath.factorial(n) / mpmath.mpf(n) ** n
                     * (4 / mpmath.pi) ** r)


class ClassGroup:
    """Exact class group of O_F for F = Q or quadratic.

    Built by breadth-first search over the Cayley graph generated by the
    primes below the Minkowski bound; every relation found is certified by an
    explicit generator.
    """

    def __init__(self, field: NumberField):
        F = field
        if F.degree > 2:
            raise UnsupportedField(f"class groups are computed for Q and quadratic fields only, not {F.name}")
        self.field = F
        bound = minkowski_bound(F) if F.degree == 2 else 1.0
        self.primes: list[PrimeIdeal] = [P for p in range(2, int(math.floor(bound)) + 1)
                                         if _is_prime(p) for P in factor_prime(F, p)]
        k = len(self.primes)
        O = FractionalIdeal.unit(F)
        reps, words = [O], [(0,) * k]
        relations, certificates = [], []
        queue = [0]
        while queue:
            i = queue.pop(0)
            for j, P in enumerate(self.primes):
                J = reps[i] * P.ideal
                w = tuple(a + (1 if t == j else 0) for t, a in enumerate(words[i]))
                for t, R in enumerate(reps):
                    g = is_principal(J / R)
                    if g is not None:
                        rel = tuple(a - b for a, b in zip(w, words[t]))
                        if any(rel):
                            relations.append(rel)
                            certificates.append(g)
                        break
                else:
                    reps.append(J)
                    words.append(w)
                    queue.append(len(reps) - 1)
        self.reps = reps
        self.words = words
        self.relations = relations
        self.certificates = certificates
        if k and relations:
            D, _, V = smith_decomp(IntMatrix.from_rows(relations, k))
            diag = [D.entries[i][i] if i < D.nrows else 0 for i in range(k)]
        else:
            V = IntMatrix.identity(k)
            diag = [0] * k
        if 0 in diag:
            raise AssertionError("class group relation lattice is not full rank")
        self._V = V
        self._diag = diag
        self._keep = [i for i, d in enumerate(diag) if d != 1]
        self.invariants = [diag[i] for i in self._keep]
        self.order = math.prod(self.invariants)
        assert self.order == len(reps)
        self.coords_of_rep = [self.word_coords(w) for w in words]
        self._index_of = {c: i for i, c in enumerate(self.coords_of_rep)}
        self._combine_cache: dict = {}
        self._dlog_cache: dict = {}

    def word_coords(self, w) -> tuple[int, ...]:
        k = len(self.primes)
        c = [sum(w[t] * self._V.entries[t][i] for t in range(k)) for i in range(k)]
        return tuple(c[i] % self._diag[i] for i in self._keep)

    def identity(self) -> tuple[int, ...]:
        return (0,) * len(self.invariants)

    def add(self, a, b) -> tuple[int, ...]:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.invariants))

    def neg(self, a) -> tuple[int, ...]:
        return tuple((-x) % d for x, d in zip(a, self.invariants))

    def rep(self, coords) -> FractionalIdeal:
        return self.reps[self._index_of[tuple(coords)]]

    def prime_class(self, P: PrimeIdeal) -> tuple[int, ...]:
        return self.discrete_log(P.ideal)[0]

    def generator_ideals(self) -> list[FractionalIdeal]:
        """Ideals whose classes are the cyclic generators for the invariant factors."""
        k = len(self.primes)
        Vinv = rat_inverse([[Fraction(v) for v in r] for r in self._V.entries]) if k else []
        out = []
        for i in self._keep:
            I = FractionalIdeal.unit(self.field)
            for t, P in enumerate(self.primes):
                e = int(Vinv[i][t])
                if e:
                    I = I * P.ideal ** e
            out.append(I)
        return out

    def discrete_log(self, ideal: FractionalIdeal) -> tuple[tuple[int, ...], FieldElement]:
        """(coords, g) with ideal == g * rep(coords)."""
        key = ideal.lattice
        if key in self._dlog_cache:
            return self._dlog_cache[key]
        for i, R in enumerate(self.reps):
            g = is_principal(ideal / R)
            if g is not None:
                res = (self.coords_of_rep[i], g)
                self._dlog_cache[key] = res
                return res
        raise AssertionError("ideal not equivalent to any class representative")

    def combine(self, a, b) -> tuple[tuple[int, ...], FieldElement]:
        """(c, g) with rep(a) * rep(b) == g * rep(c)."""
        key = (tuple(a), tuple(b))
        if key not in self._combine_cache:
            self._combine_cache[key] = self.discrete_log(self.rep(a) * self.rep(b))
        return self._combine_cache[key]

    def describe(self) -> str:
        if not self.invariants:
            return "trivial"
        return " x ".join(f"Z/{d}" for d in self.invariants)


_CLASS_CACHE: dict = {}


def class_group(field: NumberField) -> ClassGroup:
    if field not in _CLASS_CACHE:
        _CLASS_CACHE[field] = ClassGroup(field)
    return _CLASS_CACHE[field]
