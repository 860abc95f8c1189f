"""Idèles of an order, their classes, the map θ into Swan generators, Fröhlich's
class map and the extended boundary map δ̂¹.

Finite components are keyed by (component index, rational prime p); the stored
value is a global element of that component read locally at every place above
p.  Infinite components are keyed by (component index, place of the centre) and
split into an exact algebra value and a symbolic numeric factor, so values can
be re-evaluated at any working precision.

Every class is computed after applying the reduced norm, in the idèle group of
the centre modulo positive global elements and local units.  For commutative
components the reduced norm is the identity, so nothing is lost.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator, Mapping

import mpmath

from .algebra import AlgebraElement, FieldComponent, SemisimpleAlgebra
from .errors import (
    InvalidIdele, NoLambdaFound, NonInvertibleComponent, PrecisionExhausted, UnsupportedComponent,
    ValidationError,
)
from .exact_core import as_fraction, fraction_str
from .number_field import (
    DEFAULT_PRECISION, GUARD_BITS, FieldElement, FractionalIdeal, NumberField, _is_prime, _mp,
    _prime_factors, _vp, class_group, embed, factor_prime, unit_group,
)
from .order_lattice import (
    DEFAULT_SEARCH_BOUND, Order, OrderLattice, is_local_unit, lattice_from_local_data,
    local_generators, maximal_order,
)
from .presentations import (
    ZERO_MODULE, AdelicTag, DoubleExactSequence, IdentityMap, MulMap, SwanElement, ZeroMap, mul_map,
)

MAX_PRECISION = 1024
FLAVORS = ("K0Rel", "Cl", "CenterForm")
LAMBDA_BOUND = 20


# ---------------------------------------------------------------------------
# numeric infinite factors

@dataclass(frozen=True)
class Numeric:
    """(re + i im) * exp(log_abs + i pi arg_pi), with all four parameters exact rationals."""

    re: Fraction = Fraction(1)
    im: Fraction = Fraction(0)
    log_abs: Fraction = Fraction(0)
    arg_pi: Fraction = Fraction(0)

    def __post_init__(self):
        re, im = as_fraction(self.re), as_fraction(self.im)
        la, arg = as_fraction(self.log_abs), as_fraction(self.arg_pi) % 2
        if (2 * arg).denominator == 1:
            # a fourth root of unity: fold it into the rectangular part
            for _ in range(int(2 * arg)):
                re, im = -im, re
            arg = Fraction(0)
        if re == 0 and im == 0:
            raise NonInvertibleComponent("numeric infinite component is zero")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "log_abs", la)
        object.__setattr__(self, "arg_pi", arg)

    @property
    def is_trivial(self) -> bool:
        return self.re == 1 and self.im == 0 and self.log_abs == 0 and self.arg_pi == 0

    @property
    def is_real(self) -> bool:
        return self.im == 0 and self.arg_pi == 0

    def __mul__(self, other: Numeric) -> Numeric:
        return Numeric(self.re * other.re - self.im * other.im, self.re * other.im + self.im * other.re,
                       self.log_abs + other.log_abs, self.arg_pi + other.arg_pi)

    def inverse(self) -> Numeric:
        n = self.re * self.re + self.im * self.im
        return Numeric(self.re / n, -self.im / n, -self.log_abs, -self.arg_pi)

    def __pow__(self, k: int) -> Numeric:
        if k < 0:
            return self.inverse() ** (-k)
        out, base = Numeric(), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def at(self, precision_bits: int, real: bool = False):
        with mpmath.workprec(precision_bits + GUARD_BITS):
            z = mpmath.mpc(_mp(self.re), _mp(self.im))
            if self.log_abs:
                z *= mpmath.exp(_mp(self.log_abs))
            if self.arg_pi:
                z *= mpmath.expjpi(_mp(self.arg_pi))
            return z.real if real else z

    def to_json(self) -> dict:
        out = {"re": fraction_str(self.re), "im": fraction_str(self.im)}
        if self.log_abs:
            out["log_abs"] = fraction_str(self.log_abs)
        if self.arg_pi:
            out["arg_pi"] = fraction_str(self.arg_pi)
        return out

    @classmethod
    def from_json(cls, data) -> Numeric:
        if isinstance(data, (int, str)):
            return cls(as_fraction(data))
        try:
            return cls(as_fraction(data.get("re", 1)), as_fraction(data.get("im", 0)),
                       as_fraction(data.get("log_abs", 0)), as_fraction(data.get("arg_pi", 0)))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"bad numeric value {data!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# infinite components

@dataclass(frozen=True)
class InfiniteComponent:
    """exact * numeric at one infinite place; None stands for 1."""

    component: Any
    exact: Any = None
    numeric: Numeric | None = None

    def __post_init__(self):
        if self.exact is not None and self.exact == self.component.one():
            object.__setattr__(self, "exact", None)
        if self.numeric is not None and self.numeric.is_trivial:
            object.__setattr__(self, "numeric", None)

    @property
    def is_trivial(self) -> bool:
        return self.exact is None and self.numeric is None

    def __mul__(self, other: InfiniteComponent) -> InfiniteComponent:
        c = self.component
        if self.exact is None or other.exact is None:
            ex = self.exact if other.exact is None else other.exact
        else:
            ex = c.mul(self.exact, other.exact)
        if self.numeric is None or other.numeric is None:
            nu = self.numeric if other.numeric is None else other.numeric
        else:
            nu = self.numeric * other.numeric
        return InfiniteComponent(c, ex, nu)

    def inverse(self) -> InfiniteComponent:
        return InfiniteComponent(self.component,
                                 None if self.exact is None else self.component.inv(self.exact),
                                 None if self.numeric is None else self.numeric.inverse())

    def reduced_norm(self, center_component: FieldComponent) -> InfiniteComponent:
        c = self.component
        return InfiniteComponent(center_component,
                                 None if self.exact is None else c.reduced_norm(self.exact),
                                 None if self.numeric is None else self.numeric ** c.nr_degree)

    def center_value(self, place: int, precision_bits: int):
        """The value at the place, for components that are fields."""
        F = self.component.field
        real = F.places[place].is_real
        with mpmath.workprec(precision_bits + GUARD_BITS):
            v = mpmath.mpf(1) if real else mpmath.mpc(1)
            if self.exact is not None:
                v = v * embed(self.exact, place, precision_bits)
            if self.numeric is not None:
                v = v * self.numeric.at(precision_bits, real)
            return v

    def to_json(self, i: int, place: int) -> dict:
        out: dict = {"component": i, "place": place}
        if self.exact is not None:
            out["exact"] = self.component.value_to_json(self.exact)
        if self.numeric is not None:
            out["numeric"] = self.numeric.to_json()
        return out


def _as_infinite(component, v) -> InfiniteComponent:
    if isinstance(v, InfiniteComponent):
        return v
    if isinstance(v, Numeric):
        return InfiniteComponent(component, None, v)
    if isinstance(v, (int, Fraction, str)):
        return InfiniteComponent(component, component.parse_value(v))
    return InfiniteComponent(component, v)


# ---------------------------------------------------------------------------
# idèles

class Idele:
    def __init__(self, order: Order, finite: Mapping = (), infinite: Mapping = ()):
        self.order = order
        comps = order.algebra.components
        fin = {}
        for (i, p), v in dict(finite).items():
            i, p = int(i), int(p)
            if not 0 <= i < len(comps):
                raise ValidationError(f"no component {i}")
            if not _is_prime(p):
                raise ValidationError(f"{p} is not prime")
            c = comps[i]
            if isinstance(v, AlgebraElement):
                v = v.parts[i]
            elif isinstance(v, (int, Fraction, str)):
                v = c.parse_value(v)
            if (i, p) in fin:
                v = c.mul(fin[(i, p)], v)
            if v != c.one():
                fin[(i, p)] = v
            else:
                fin.pop((i, p), None)
        inf = {}
        for (i, place), v in dict(infinite).items():
            i, place = int(i), int(place)
            if not 0 <= i < len(comps):
                raise ValidationError(f"no component {i}")
            if not 0 <= place < len(comps[i].center.places):
                raise ValidationError(f"component {i} has no infinite place {place}")
            ic = _as_infinite(comps[i], v)
            if not ic.is_trivial:
                inf[(i, place)] = ic
        self.finite = tuple(sorted(fin.items(), key=lambda kv: kv[0]))
        self.infinite = tuple(sorted(inf.items(), key=lambda kv: kv[0]))

    @classmethod
    def trivial(cls, order: Order) -> Idele:
        return cls(order)

    def __eq__(self, other):
        return (isinstance(other, Idele) and self.order == other.order
                and self.finite == other.finite and self.infinite == other.infinite)

    def __hash__(self):
        return hash((self.order, self.finite, self.infinite))

    def __repr__(self):
        return f"Idele(finite={dict(self.finite)!r}, infinite={dict(self.infinite)!r})"

    @property
    def components(self):
        return self.order.algebra.components

    def validate(self) -> None:
        for (i, p), v in self.finite:
            if not self.components[i].is_invertible(v):
                raise NonInvertibleComponent(f"component {i} at p={p} is not invertible")
        for (i, place), ic in self.infinite:
            c = self.components[i]
            if ic.exact is not None and not c.is_invertible(ic.exact):
                raise NonInvertibleComponent(f"component {i} at infinite place {place} is not invertible")
            if ic.numeric is not None and c.center.places[place].is_real and not ic.numeric.is_real:
                raise InvalidIdele(f"non-real numeric value at the real place {place} of component {i}")

    def is_trivial_structurally(self) -> bool:
        return not self.finite and not self.infinite

    def primes(self) -> list[int]:
        return sorted({p for (_, p), _ in self.finite})

    def finite_at(self, p: int) -> AlgebraElement:
        parts = [c.one() for c in self.components]
        for (i, q), v in self.finite:
            if q == p:
                parts[i] = v
        return AlgebraElement(self.order.algebra, tuple(parts))

    def infinite_part(self) -> dict:
        return dict(self.infinite)

    def finite_part(self) -> Idele:
        return Idele(self.order, dict(self.finite))

    def __mul__(self, other: Idele) -> Idele:
        if other.order != self.order:
            raise ValidationError("idèles of different orders")
        fin = dict(self.finite)
        for k, v in other.finite:
            fin[k] = self.components[k[0]].mul(fin[k], v) if k in fin else v
        inf = dict(self.infinite)
        for k, v in other.infinite:
            inf[k] = inf[k] * v if k in inf else v
        return Idele(self.order, fin, inf)

    def inverse(self) -> Idele:
        return Idele(self.order, {k: self.components[k[0]].inv(v) for k, v in self.finite},
                     {k: v.inverse() for k, v in self.infinite})

    def __truediv__(self, other: Idele) -> Idele:
        return self * other.inverse()

    def to_json(self) -> dict:
        return {
            "finite": [{"component": i, "prime": str(p), "value": self.components[i].value_to_json(v)}
                       for (i, p), v in self.finite],
            "infinite": [ic.to_json(i, place) for (i, place), ic in self.infinite],
        }

    @classmethod
    def from_json(cls, order: Order, data) -> Idele:
        comps = order.algebra.components
        try:
            fin, inf = {}, {}
            for e in data.get("finite", []):
                i, p = int(e.get("component", 0)), int(e["prime"])
                if not 0 <= i < len(comps):
                    raise ValidationError(f"no component {i}")
                key = (i, p)
                v = comps[i].parse_value(e["value"])
                fin[key] = comps[i].mul(fin[key], v) if key in fin else v
            for e in data.get("infinite", []):
                i, place = int(e.get("component", 0)), int(e["place"])
                if not 0 <= i < len(comps):
                    raise ValidationError(f"no component {i}")
                if "exact" not in e and "numeric" not in e:
                    raise ValidationError("infinite entry needs 'exact' or 'numeric'")
                ex = comps[i].parse_value(e["exact"]) if "exact" in e else None
                nu = Numeric.from_json(e["numeric"]) if "numeric" in e else None
                ic = InfiniteComponent(comps[i], ex, nu)
                inf[(i, place)] = inf[(i, place)] * ic if (i, place) in inf else ic
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed idèle: {exc}") from exc
        a = cls(order, fin, inf)
        a.validate()
        return a


def is_unit_finite(a: Idele) -> bool:
    a.validate()
    if a.infinite:
        return False
    return all(is_local_unit(a.finite_at(p), p, a.order) for p in a.primes())


def _close_to_one(v, precision_bits: int) -> bool:
    with mpmath.workprec(precision_bits + GUARD_BITS):
        return abs(v - 1) <= mpmath.mpf(2) ** (-(precision_bits // 2))


def is_norm_one_idele(a: Idele, precision_bits: int = DEFAULT_PRECISION) -> bool:
    a.validate()
    comps = a.components
    if not all(comps[i].reduced_norm(v).is_one() for (i, _), v in a.finite):
        return False
    for (i, place), ic in a.infinite:
        z = ic.reduced_norm(FieldComponent(comps[i].center)).center_value(place, precision_bits)
        if not _close_to_one(z, precision_bits):
            return False
    return True


def diagonal(order: Order, g: AlgebraElement) -> Idele:
    """The principal idèle of g, listed at the primes where g is not a local unit."""
    if not g.is_invertible():
        raise NonInvertibleComponent("diagonal idèle of a non-invertible element")
    primes = set()
    for v in order.to_coords(g) + order.to_coords(g.inverse()):
        primes |= _prime_factors(v.denominator)
    comps = order.algebra.components
    fin = {(i, p): g.parts[i] for p in primes for i in range(len(comps))}
    inf = {(i, k): InfiniteComponent(c, g.parts[i])
           for i, c in enumerate(comps) for k in range(len(c.center.places))}
    return Idele(order, fin, inf)


# ---------------------------------------------------------------------------
# reduced norm to the centre

_CENTER_ORDERS: dict = {}


def center_order(order: Order) -> Order:
    A = order.algebra
    if A not in _CENTER_ORDERS:
        Z = SemisimpleAlgebra([FieldComponent(c.center) for c in A.components])
        _CENTER_ORDERS[A] = maximal_order(Z, "center")
    return _CENTER_ORDERS[A]


def center_idele(a: Idele) -> Idele:
    Zo = center_order(a.order)
    zc = Zo.algebra.components
    comps = a.components
    fin = {k: comps[k[0]].reduced_norm(v) for k, v in a.finite}
    inf = {k: ic.reduced_norm(zc[k[0]]) for k, ic in a.infinite}
    return Idele(Zo, fin, inf)


# ---------------------------------------------------------------------------
# per-component class data

def _finite_ideal(F: NumberField, entries: Mapping[int, FieldElement]) -> FractionalIdeal:
    I = FractionalIdeal.unit(F)
    for p, c in entries.items():
        if F.degree == 1:
            I = I.scale(Fraction(p) ** _vp(c.coords[0], p))
            continue
        J = FractionalIdeal.principal(c)
        for P in factor_prime(F, p):
            k = J.valuation(P)
            if k:
                I = I * P.ideal ** k
    return I


def _class_and_generator(F: NumberField, entries) -> tuple[tuple[int, ...], FieldElement]:
    """(e, g) with the finite ideal equal to g * rep(e); g > 0 over Q."""
    I = _finite_ideal(F, entries)
    if F.degree == 1:
        return (), F.scalar(I.norm())
    return class_group(F).discrete_log(I)


def _check_supported(F: NumberField, ramified) -> None:
    if F.degree > 2:
        raise UnsupportedComponent(f"classes are decided for Q and quadratic centres only, not {F.name}")
    if ramified and F.degree != 1:
        raise UnsupportedComponent("ramified real places over a quadratic centre are not supported")


def _residual(F, g, inf: Mapping[int, InfiniteComponent], prec: int) -> list:
    """w_sigma = (infinite value) / sigma(g) for every place of F."""
    out = []
    with mpmath.workprec(prec + GUARD_BITS):
        for k, pl in enumerate(F.places):
            v = inf[k].center_value(k, prec) if k in inf else mpmath.mpf(1)
            out.append(v / embed(g, k, prec))
    return out


def _unit_images(F: NumberField, ramified, w: list, prec: int) -> list[list]:
    """Candidate vectors sigma(u) for positive units u that could match w."""
    if F.degree == 1:
        return [[mpmath.mpf(1)]] if ramified else [[mpmath.mpf(1)], [mpmath.mpf(-1)]]
    U = unit_group(F)
    if U.fundamental_unit is None:
        return [[embed(z, 0, prec)] for z in U.roots_of_unity()]
    e = [embed(U.fundamental_unit, k, prec) for k in range(2)]
    n0 = int(mpmath.nint(mpmath.log(abs(w[0])) / mpmath.log(abs(e[0]))))
    return [[s * x ** n for x in e] for n in (n0 - 1, n0, n0 + 1) for s in (1, -1)]


def _unit_distance(F, ramified, g, inf, prec: int):
    with mpmath.workprec(prec + GUARD_BITS):
        w = _residual(F, g, inf, prec)
        best = None
        for u in _unit_images(F, ramified, w, prec):
            d = max(abs(wk / uk - 1) for wk, uk in zip(w, u))
            best = d if best is None or d < best else best
        return best


def _in_unit_image(F, ramified, g, inf, precision_bits: int) -> bool:
    """Is the residual vector sigma(u) for a unit u allowed as a global multiplier?

    Equal below 2^-(prec/2) relative, unequal above 2^-(prec/4); otherwise the
    precision is doubled, up to MAX_PRECISION.
    """
    prec = precision_bits
    while True:
        d = _unit_distance(F, ramified, g, inf, prec)
        if d <= mpmath.mpf(2) ** (-(prec // 2)):
            return True
        if d >= mpmath.mpf(2) ** (-(prec // 4)):
            return False
        if prec >= MAX_PRECISION:
            raise PrecisionExhausted(f"cannot separate the residual from the unit image at {prec} bits")
        prec = min(2 * prec, MAX_PRECISION)


def _canonical_residual(F, ramified, w: list, prec: int) -> list:
    """A representative of w modulo positive units, for display."""
    with mpmath.workprec(prec + GUARD_BITS):
        if F.degree == 1:
            return [w[0] if ramified else abs(w[0])]
        U = unit_group(F)
        if U.fundamental_unit is None:
            m = U.mu_order
            step = 2 * mpmath.pi / m
            k = int(mpmath.floor(mpmath.arg(w[0]) / step))
            return [w[0] * mpmath.expj(-k * step)]
        e = [embed(U.fundamental_unit, k, prec) for k in range(2)]
        n = int(mpmath.floor(mpmath.log(abs(w[0])) / mpmath.log(e[0])))
        w = [wk / ek ** n for wk, ek in zip(w, e)]
        if w[0] < 0:
            w = [-x for x in w]
        return w


def _num_json(v, prec: int):
    digits = max(15, prec // 6)
    tol = mpmath.mpf(2) ** (-(prec // 2))
    with mpmath.workprec(prec + GUARD_BITS):
        if isinstance(v, mpmath.mpc):
            re, im = mpmath.chop(v.real, tol), mpmath.chop(v.imag, tol)
            return {"re": mpmath.nstr(re, digits), "im": mpmath.nstr(im, digits)}
        return mpmath.nstr(mpmath.chop(v, tol), digits)


# ---------------------------------------------------------------------------
# classes

def _require_maximal(order: Order) -> None:
    if not order.is_maximal:
        raise UnsupportedComponent("class computations need a maximal order")


class IdeleClass:
    """The class of a centre idèle for one of three quotients.

    K0Rel and CenterForm both keep the infinite part modulo positive global
    units; Cl forgets it.
    """

    def __init__(self, order: Order, flavor: str, center: Idele, precision_bits: int = DEFAULT_PRECISION):
        if flavor not in FLAVORS:
            raise ValidationError(f"unknown class flavor {flavor!r}")
        _require_maximal(order)
        if center.order != center_order(order):
            raise ValidationError("centre idèle belongs to a different algebra")
        self.order = order
        self.flavor = flavor
        self.center = center
        self.precision_bits = precision_bits

    def _check(self, other: IdeleClass) -> None:
        if not isinstance(other, IdeleClass) or other.order != self.order or other.flavor != self.flavor:
            raise ValidationError("classes of different orders or flavors")

    def __mul__(self, other: IdeleClass) -> IdeleClass:
        self._check(other)
        return IdeleClass(self.order, self.flavor, self.center * other.center,
                          max(self.precision_bits, other.precision_bits))

    def inverse(self) -> IdeleClass:
        return IdeleClass(self.order, self.flavor, self.center.inverse(), self.precision_bits)

    def __truediv__(self, other: IdeleClass) -> IdeleClass:
        return self * other.inverse()

    def with_flavor(self, flavor: str) -> IdeleClass:
        return IdeleClass(self.order, flavor, self.center, self.precision_bits)

    def cl_projection(self) -> IdeleClass:
        return self.with_flavor("Cl")

    def _components(self) -> Iterator:
        ram = self.order.algebra.ramification.real_places
        fin = dict(self.center.finite)
        inf = dict(self.center.infinite)
        for i, c in enumerate(self.center.components):
            F = c.field
            _check_supported(F, ram[i])
            entries = {p: v for (j, p), v in fin.items() if j == i}
            places = {k: ic for (j, k), ic in inf.items() if j == i}
            yield i, F, ram[i], entries, places

    def cl_invariant(self) -> tuple:
        return tuple(_class_and_generator(F, entries)[0] for _, F, _, entries, _ in self._components())

    def is_trivial(self) -> bool:
        for _, F, ram, entries, places in self._components():
            e, g = _class_and_generator(F, entries)
            if any(e):
                return False
            if self.flavor != "Cl" and not _in_unit_image(F, ram, g, places, self.precision_bits):
                return False
        return True

    def normal_form(self) -> list[dict]:
        prec = self.precision_bits
        out = []
        for i, F, ram, entries, places in self._components():
            e, g = _class_and_generator(F, entries)
            item: dict = {"component": i, "class": list(e)}
            if self.flavor != "Cl":
                w = _canonical_residual(F, ram, _residual(F, g, places, prec), prec)
                item["infinite"] = [_num_json(v, prec) for v in w]
            out.append(item)
        return out

    def describe(self) -> str:
        parts = []
        for item in self.normal_form():
            s = f"component {item['component']}: class {tuple(item['class'])}"
            if "infinite" in item:
                vals = [v if isinstance(v, str) else f"{v['re']}{'+' if not v['im'].startswith('-') else ''}{v['im']}i"
                        for v in item["infinite"]]
                s += ", inf-part " + ", ".join(vals)
            parts.append(s)
        return f"{self.flavor} class; " + "; ".join(parts)

    def to_json(self) -> dict:
        return {"flavor": self.flavor, "precision_bits": self.precision_bits,
                "trivial": self.is_trivial(), "normal_form": self.normal_form()}

    def __eq__(self, other):
        return class_equal(self, other)

    def __hash__(self):
        return hash((self.order, self.flavor, self.cl_invariant()))


def class_equal(x: IdeleClass, y: IdeleClass) -> bool:
    x._check(y)
    return (x / y).is_trivial()


def idele_class(a: Idele, flavor: str = "K0Rel", precision_bits: int = DEFAULT_PRECISION) -> IdeleClass:
    a.validate()
    return IdeleClass(a.order, flavor, center_idele(a), precision_bits)


def trivial_class(order: Order, flavor: str = "K0Rel", precision_bits: int = DEFAULT_PRECISION) -> IdeleClass:
    return IdeleClass(order, flavor, Idele(center_order(order)), precision_bits)


def frohlich_class(a: Idele, precision_bits: int = DEFAULT_PRECISION) -> IdeleClass:
    """Class of a in Cl(𝔄): the infinite part is discarded."""
    return idele_class(a, "Cl", precision_bits)


# ---------------------------------------------------------------------------
# θ and the Swan side

def lattice_of_idele(a: Idele) -> OrderLattice:
    a.validate()
    return lattice_from_local_data(a.order, {p: a.finite_at(p) for p in a.primes()})


def theta(a: Idele) -> SwanElement:
    """[𝔄, a_inf, a𝔄]."""
    return SwanElement.single(OrderLattice.unit(a.order), a.infinite_part(), lattice_of_idele(a))


_GEN_CACHE: dict = {}


def generator_idele(L: OrderLattice, bound: int = DEFAULT_SEARCH_BOUND) -> Idele:
    """A finite idèle g with g𝔄 = L."""
    key = (L, bound)
    if key not in _GEN_CACHE:
        fin = {}
        for p, x in local_generators(L, bound).items():
            for i, v in enumerate(x.parts):
                fin[(i, p)] = v
        _GEN_CACHE[key] = Idele(L.order, fin)
    return _GEN_CACHE[key]


def _summand_order(s: SwanElement, order: Order | None) -> Order:
    for t in s.summands:
        for L in (t.P, t.Q):
            if not isinstance(L, OrderLattice):
                raise UnsupportedComponent("Swan generators must be built from rank one lattices")
            if order is None:
                order = L.order
            elif L.order != order:
                raise ValidationError("Swan generators over different orders")
    if order is None:
        raise ValidationError("empty Swan element needs an explicit order")
    return order


def swan_to_class(s: SwanElement, order: Order | None = None,
                  precision_bits: int = DEFAULT_PRECISION, bound: int = DEFAULT_SEARCH_BOUND) -> IdeleClass:
    """Product over summands of the class of gen(Q) gen(P)^-1 with phi at infinity."""
    order = _summand_order(s, order)
    out = trivial_class(order, "K0Rel", precision_bits)
    for t in s.summands:
        a = generator_idele(t.Q, bound) * generator_idele(t.P, bound).inverse() * Idele(order, {}, dict(t.phi))
        out = out * idele_class(a, "K0Rel", precision_bits)
    return out


def swan_boundary(s: SwanElement, order: Order | None = None, bound: int = DEFAULT_SEARCH_BOUND) -> IdeleClass:
    """[P] - [Q] in Cl(𝔄), summed over summands."""
    order = _summand_order(s, order)
    out = trivial_class(order, "Cl")
    for t in s.summands:
        a = generator_idele(t.P, bound) * generator_idele(t.Q, bound).inverse()
        out = out * idele_class(a, "Cl")
    return out


def k0_class(lattices, bound: int = DEFAULT_SEARCH_BOUND,
             precision_bits: int = DEFAULT_PRECISION) -> tuple[int, IdeleClass]:
    """(rank, Steinitz class) of a direct sum of rank one locally free lattices."""
    lattices = list(lattices)
    if not lattices:
        raise ValidationError("k0_class needs at least one lattice")
    order = lattices[0].order
    g = Idele(order)
    for L in lattices:
        if L.order != order:
            raise ValidationError("lattices over different orders")
        g = g * generator_idele(L, bound)
    return len(lattices), idele_class(g, "Cl", precision_bits)


# ---------------------------------------------------------------------------
# the extended boundary map

def center_infinite(order: Order, y) -> dict:
    """Normalize y to {(component, place): InfiniteComponent over the centre}.

    A bare scalar or Numeric applies to every infinite place of every component.
    """
    zc = center_order(order).algebra.components
    if isinstance(y, Idele):
        y = dict(y.infinite)
    if not isinstance(y, Mapping):
        return {(i, k): _as_infinite(c, y) for i, c in enumerate(zc) for k in range(len(c.field.places))}
    return {(int(i), int(k)): _as_infinite(zc[int(i)], v) for (i, k), v in y.items()}


def _sign_at(ic: InfiniteComponent | None, place: int, precision_bits: int) -> int:
    if ic is None:
        return 1
    prec = precision_bits
    while True:
        with mpmath.workprec(prec + GUARD_BITS):
            v = ic.center_value(place, prec)
            if abs(v) > mpmath.mpf(2) ** (-(prec // 2)):
                return 1 if v > 0 else -1
        if prec >= MAX_PRECISION:
            raise PrecisionExhausted("cannot determine the sign of y")
        prec *= 2


def _lambda_ok(lam: FieldElement, signs: Mapping[int, int], precision_bits: int) -> bool:
    for place, s in signs.items():
        v = embed(lam, place, precision_bits)
        if (1 if v > 0 else -1) != s:
            return False
    return True


def lambda_candidates(F: NumberField, bound: int = LAMBDA_BOUND) -> Iterator[FieldElement]:
    """Nonzero small elements: 1, -1, 2, -2, ... over Q; a + b theta by growing height otherwise."""
    if F.degree == 1:
        for n in range(1, bound + 1):
            yield F.scalar(n)
            yield F.scalar(-n)
        return
    for h in range(0, bound + 1):
        for a in range(-h, h + 1):
            for b in range(-h, h + 1):
                if max(abs(a), abs(b)) == h and (a or b):
                    yield F([a, b])


def _sign_pattern(order: Order, yinf: dict, precision_bits: int) -> list[dict]:
    """Per component, the sign lambda must have at each ramified real place."""
    out = []
    for i, places in enumerate(order.algebra.ramification.real_places):
        out.append({k: _sign_at(yinf.get((i, k)), k, precision_bits) for k in sorted(places)})
    return out


def lambda_choices(order: Order, y, precision_bits: int = DEFAULT_PRECISION,
                   bound: int = LAMBDA_BOUND) -> Iterator[tuple]:
    """All admissible lambda tuples from the bounded candidate lists, in search order."""
    yinf = center_infinite(order, y)
    signs = _sign_pattern(order, yinf, precision_bits)
    zc = center_order(order).algebra.components
    per = [[lam for lam in lambda_candidates(c.field, bound) if _lambda_ok(lam, signs[i], precision_bits)]
           for i, c in enumerate(zc)]
    if any(not lst for lst in per):
        raise NoLambdaFound(f"no lambda up to height {bound} for sign pattern {signs}")
    # vary the components together so that the first few choices differ everywhere
    for j in range(max(len(lst) for lst in per)):
        yield tuple(lst[min(j, len(lst) - 1)] for lst in per)


def extended_boundary(order: Order, y, lam=None, precision_bits: int = DEFAULT_PRECISION) -> IdeleClass:
    """δ̂¹(y): the CenterForm class of (lambda at finite places, lambda*y at infinity)."""
    _require_maximal(order)
    yinf = center_infinite(order, y)
    for (i, k), ic in yinf.items():
        if ic.exact is not None and ic.exact.is_zero():
            raise NonInvertibleComponent("y must be invertible at every infinite place")
        if ic.numeric is not None and ic.component.field.places[k].is_real and not ic.numeric.is_real:
            raise InvalidIdele("y must be real at real places")
    zc = center_order(order).algebra.components
    if lam is None:
        lam = next(lambda_choices(order, yinf, precision_bits))
    else:
        if not isinstance(lam, (tuple, list)):
            lam = (lam,) * len(zc)
        lam = tuple(c.parse_value(x) if isinstance(x, (int, str, Fraction)) else x for c, x in zip(zc, lam))
        signs = _sign_pattern(order, yinf, precision_bits)
        for i, x in enumerate(lam):
            if x.is_zero() or not _lambda_ok(x, signs[i], precision_bits):
                raise ValidationError(f"lambda {x!r} does not make lambda*y a reduced norm in component {i}")
    fin, inf = {}, {}
    for i, (c, x) in enumerate(zip(zc, lam)):
        N = x.norm()
        for p in _prime_factors(N.numerator * N.denominator):
            fin[(i, p)] = x
        for k in range(len(c.field.places)):
            inf[(i, k)] = InfiniteComponent(c, x) * yinf.get((i, k), InfiniteComponent(c))
    return IdeleClass(order, "CenterForm", Idele(center_order(order), fin, inf), precision_bits)


# ---------------------------------------------------------------------------
# the Nenashev representative

def nenashev_rep(a: Idele) -> DoubleExactSequence:
    """0 ⇉ A_𝔸 ⇉ A_𝔸 with Yin surjection "multiply by a" and Yang surjection the identity."""
    a.validate()
    X = AdelicTag()
    return DoubleExactSequence(ZERO_MODULE, X, X, (ZeroMap(), mul_map(a)), (ZeroMap(), IdentityMap()))


def nenashev_class(des: DoubleExactSequence, order: Order | None = None,
                   precision_bits: int = DEFAULT_PRECISION) -> IdeleClass:
    """Class of a symbolic generator: Yin multiplier times the inverse Yang multiplier."""
    mults = []
    for _, r in (des.yin, des.yang):
        if isinstance(r, MulMap):
            mults.append(r.idele)
            order = order or r.idele.order
        elif isinstance(r, IdentityMap):
            mults.append(None)
        else:
            raise UnsupportedComponent(f"not a symbolic adelic generator: {r!r}")
    if order is None:
        raise ValidationError("both maps are identities; pass the order explicitly")
    a = Idele(order)
    if mults[0] is not None:
        a = a * mults[0]
    if mults[1] is not None:
        a = a * mults[1].inverse()
    return idele_class(a, "K0Rel", precision_bits)


# ---------------------------------------------------------------------------
# random idèles

_SMALL_PRIMES = [p for p in range(2, 51) if _is_prime(p)]


def _random_invertible(c, rng: random.Random, bound: int):
    while True:
        x = c.random(rng, bound)
        if c.is_invertible(x):
            return x


def _random_fraction(rng: random.Random, bound: int = 6, nonzero: bool = True) -> Fraction:
    while True:
        q = Fraction(rng.randint(-bound, bound), rng.randint(1, 3))
        if q or not nonzero:
            return q


def _random_numeric(rng: random.Random, real: bool) -> Numeric:
    kind = rng.choice(["rect", "polar", "both"])
    rect, polar = Numeric(), Numeric()
    if kind in ("rect", "both"):
        if real:
            rect = Numeric(_random_fraction(rng))
        else:
            while True:
                re, im = _random_fraction(rng, nonzero=False), _random_fraction(rng, nonzero=False)
                if re or im:
                    rect = Numeric(re, im)
                    break
    if kind in ("polar", "both"):
        arg = Fraction(rng.randint(0, 1)) if real else Fraction(rng.randint(0, 15), 8)
        polar = Numeric(log_abs=Fraction(rng.randint(-8, 8), rng.randint(1, 4)), arg_pi=arg)
    return rect * polar


def random_idele(order: Order, rng: random.Random, support: int = 3, bound: int = 10,
                 max_prime: int = 50) -> Idele:
    """Support of at most `support` finite places at primes <= max_prime, coordinates <= bound,
    and infinite parts mixing exact values with numeric factors."""
    comps = order.algebra.components
    primes = [p for p in _SMALL_PRIMES if p <= max_prime]
    fin = {}
    for _ in range(rng.randint(0, support)):
        i = rng.randrange(len(comps))
        c = comps[i]
        x = _random_invertible(c, rng, bound)
        N = c.norm_to_Q(x)
        norm_primes = [p for p in _prime_factors(N.numerator * N.denominator) if p <= max_prime]
        p = rng.choice(norm_primes) if norm_primes and rng.random() < 0.7 else rng.choice(primes)
        if rng.random() < 0.3:
            x = c.inv(x)
        fin[(i, p)] = c.mul(fin[(i, p)], x) if (i, p) in fin else x
    inf = {}
    for i, c in enumerate(comps):
        for k, pl in enumerate(c.center.places):
            r = rng.random()
            if r < 0.35:
                continue
            ex = _random_invertible(c, rng, 3) if r < 0.7 or r > 0.9 else None
            nu = _random_numeric(rng, pl.is_real) if r >= 0.7 else None
            inf[(i, k)] = InfiniteComponent(c, ex, nu)
    return Idele(order, fin, inf)


def random_unit_finite_idele(order: Order, rng: random.Random, support: int = 3, bound: int = 10) -> Idele:
    comps = order.algebra.components
    fin = {}
    for _ in range(rng.randint(1, support)):
        p = rng.choice(_SMALL_PRIMES)
        while True:
            v = [rng.randint(-bound, bound) for _ in range(order.rank)]
            x = order.from_coords(v)
            if x.is_invertible() and is_local_unit(x, p, order):
                break
        for i, part in enumerate(x.parts):
            key = (i, p)
            fin[key] = comps[i].mul(fin[key], part) if key in fin else part
    return Idele(order, fin)


def _norm_one_value(c, rng: random.Random, bound: int):
    if isinstance(c, FieldComponent):
        # the reduced norm of a field is the identity
        return c.one()
    x = _random_invertible(c, rng, bound)
    y = _random_invertible(c, rng, bound)
    # commutators have reduced norm one
    return c.mul(c.mul(x, y), c.mul(c.inv(x), c.inv(y)))


def random_norm_one_idele(order: Order, rng: random.Random, support: int = 3, bound: int = 10) -> Idele:
    comps = order.algebra.components
    fin, inf = {}, {}
    for _ in range(rng.randint(1, support)):
        i = rng.randrange(len(comps))
        fin[(i, rng.choice(_SMALL_PRIMES))] = _norm_one_value(comps[i], rng, bound)
    for i, c in enumerate(comps):
        if isinstance(c, FieldComponent):
            continue
        for k in range(len(c.center.places)):
            r = rng.random()
            if r < 0.3:
                inf[(i, k)] = InfiniteComponent(c, _norm_one_value(c, rng, 3))
            elif r < 0.6 and c.nr_degree % 2 == 0:
                inf[(i, k)] = InfiniteComponent(c, None, Numeric(-1))
    return Idele(order, fin, inf)
