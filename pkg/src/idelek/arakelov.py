"""Arakelov divisors of Q and quadratic fields, the group Pic-hat, metrized line
bundles, and the extension of Pic-hat by angular data inside K0(O_F, R).

Infinite coefficients are symbolic: a rational constant plus rational multiples
of log|sigma(f)|, so every comparison can be redone at higher precision.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import mpmath

from .algebra import FieldComponent, field_algebra
from .errors import NotInKernel, PrecisionExhausted, UnsupportedField, ValidationError, ZeroElement
from .exact_core import as_fraction
from .ideles import MAX_PRECISION, Idele, IdeleClass, InfiniteComponent, Numeric, idele_class
from .number_field import (
    DEFAULT_PRECISION, GUARD_BITS, FieldElement, FractionalIdeal, NumberField, PrimeIdeal, embed,
    _prime_factors, _vp, factor_prime, is_principal, unit_group,
)
from .order_lattice import OrderLattice, local_generator, maximal_order

# ||1||^2 = C * exp(-2x) at a complex place; real places use 1
C_REAL = 1
C_COMPLEX = 2


@dataclass(frozen=True)
class ArchValue:
    """const + sum k * log|sigma(f)| with rational k, evaluated at a chosen place."""

    const: Fraction = Fraction(0)
    logs: tuple = ()  # ((FieldElement, Fraction), ...)

    def __add__(self, other: ArchValue) -> ArchValue:
        return ArchValue(self.const + other.const, _merge(self.logs + other.logs))

    def __neg__(self) -> ArchValue:
        return ArchValue(-self.const, tuple((f, -k) for f, k in self.logs))

    def __sub__(self, other: ArchValue) -> ArchValue:
        return self + (-other)

    def at(self, place: int, precision_bits: int):
        with mpmath.workprec(precision_bits + GUARD_BITS):
            v = mpmath.mpf(self.const.numerator) / self.const.denominator
            for f, k in self.logs:
                v += (mpmath.mpf(k.numerator) / k.denominator) * mpmath.log(abs(embed(f, place, precision_bits)))
            return v

    def element(self) -> FieldElement | None:
        """prod f^k (integer k only), or None when there are no log terms."""
        out = None
        for f, k in self.logs:
            if k.denominator != 1:
                raise ValidationError("log term with a fractional multiple has no exact element")
            t = f ** int(k)
            out = t if out is None else out * t
        return out


def _merge(logs) -> tuple:
    acc: dict = {}
    for f, k in logs:
        acc[f] = acc.get(f, Fraction(0)) + Fraction(k)
    return tuple((f, k) for f, k in sorted(acc.items(), key=lambda t: t[0].coords) if k)


class ArakelovDivisor:
    def __init__(self, field: NumberField, finite: Mapping[PrimeIdeal, int] = (), infinite=None):
        self.field = field
        fin: dict = {}
        for P, m in dict(finite).items():
            if P.ideal.field != field:
                raise ValidationError("prime of a different field")
            fin[P] = fin.get(P, 0) + int(m)
        self.finite = tuple(sorted(((P, m) for P, m in fin.items() if m),
                                   key=lambda t: (t[0].p, t[0].ideal.lattice.basis.entries)))
        n = len(field.places)
        inf = list(infinite) if infinite is not None else [ArchValue()] * n
        if len(inf) != n:
            raise ValidationError(f"expected {n} infinite coefficients")
        self.infinite = tuple(v if isinstance(v, ArchValue) else ArchValue(as_fraction(v)) for v in inf)

    @classmethod
    def zero(cls, field: NumberField) -> ArakelovDivisor:
        return cls(field)

    def __add__(self, other: ArakelovDivisor) -> ArakelovDivisor:
        if other.field != self.field:
            raise ValidationError("divisors of different fields")
        fin = dict(self.finite)
        for P, m in other.finite:
            fin[P] = fin.get(P, 0) + m
        return ArakelovDivisor(self.field, fin, [a + b for a, b in zip(self.infinite, other.infinite)])

    def __neg__(self) -> ArakelovDivisor:
        return ArakelovDivisor(self.field, {P: -m for P, m in self.finite}, [-v for v in self.infinite])

    def __sub__(self, other: ArakelovDivisor) -> ArakelovDivisor:
        return self + (-other)

    def ideal(self) -> FractionalIdeal:
        I = FractionalIdeal.unit(self.field)
        for P, m in self.finite:
            I = I * P.ideal ** m
        return I

    def infinite_values(self, precision_bits: int = DEFAULT_PRECISION) -> list:
        return [v.at(k, precision_bits) for k, v in enumerate(self.infinite)]

    def to_json(self, precision_bits: int = DEFAULT_PRECISION) -> dict:
        digits = max(15, precision_bits // 6)
        return {
            "finite": [{"prime": P.to_json(), "mult": m} for P, m in self.finite],
            "infinite": [{"place": k, "value": mpmath.nstr(v, digits)}
                         for k, v in enumerate(self.infinite_values(precision_bits))],
        }

    @classmethod
    def from_json(cls, field: NumberField, data) -> ArakelovDivisor:
        try:
            fin: dict = {}
            for e in data.get("finite", []):
                pr = e["prime"]
                p, idx = (int(pr["p"]), int(pr.get("index", 0))) if isinstance(pr, Mapping) else (int(pr), 0)
                primes = factor_prime(field, p)
                if not 0 <= idx < len(primes):
                    raise ValidationError(f"no prime with index {idx} above {p}")
                fin[primes[idx]] = fin.get(primes[idx], 0) + int(e["mult"])
            inf = [ArchValue() for _ in field.places]
            for e in data.get("infinite", []):
                k = int(e["place"])
                if not 0 <= k < len(inf):
                    raise ValidationError(f"no infinite place {k}")
                inf[k] = inf[k] + ArchValue(as_fraction(str(e["value"]).rstrip("…")))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed divisor: {exc}") from exc
        return cls(field, fin, inf)


@dataclass(frozen=True)
class MetrizedLineBundle:
    ideal: FractionalIdeal
    norms_sq: tuple  # ||1||^2 per infinite place


def _check_field(F: NumberField) -> None:
    if F.degree > 2:
        raise UnsupportedField(f"Pic-hat is decided for Q and quadratic fields only, not {F.name}")


def principal_divisor(f: FieldElement) -> ArakelovDivisor:
    """(v_P(f))_P together with log|sigma(f)| at every infinite place."""
    if f.is_zero():
        raise ZeroElement("principal divisor of zero")
    F = f.field
    fin = FractionalIdeal.principal(f).factor() if F.degree > 1 else _rational_factor(F, f)
    return ArakelovDivisor(F, fin, [ArchValue(Fraction(0), ((f, Fraction(1)),))] * len(F.places))


def _rational_factor(F: NumberField, f: FieldElement) -> dict:
    q = f.coords[0]
    out = {}
    for p in _prime_factors(q.numerator * q.denominator):
        (P,) = factor_prime(F, p)
        out[P] = _vp(q, p)
    return out


def _log_units(F: NumberField, prec: int) -> list | None:
    """log|sigma(eps)| per place for a fundamental unit, or None when the unit rank is 0."""
    if F.degree == 1 or F.signature[0] == 0:
        return None
    eps = unit_group(F).fundamental_unit
    return [mpmath.log(abs(embed(eps, k, prec))) for k in range(2)]


def _lattice_distance(F: NumberField, r: list, prec: int):
    with mpmath.workprec(prec + GUARD_BITS):
        L = _log_units(F, prec)
        if L is None:
            return max(abs(x) for x in r)
        n0 = int(mpmath.nint(r[0] / L[0]))
        return min(max(abs(x - n * l) for x, l in zip(r, L)) for n in (n0 - 1, n0, n0 + 1))


def pic_hat_equal(d1: ArakelovDivisor, d2: ArakelovDivisor, precision_bits: int = DEFAULT_PRECISION) -> bool:
    """Is d1 - d2 a principal Arakelov divisor?"""
    F = d1.field
    _check_field(F)
    d = d1 - d2
    g = is_principal(d.ideal())
    if g is None:
        return False
    res = [v - ArchValue(Fraction(0), ((g, Fraction(1)),)) for v in d.infinite]
    prec = precision_bits
    while True:
        dist = _lattice_distance(F, [v.at(k, prec) for k, v in enumerate(res)], prec)
        if dist <= mpmath.mpf(2) ** (-(prec // 2)):
            return True
        if dist >= mpmath.mpf(2) ** (-(prec // 4)):
            return False
        if prec >= MAX_PRECISION:
            raise PrecisionExhausted("cannot decide membership in the log-unit lattice")
        prec = min(2 * prec, MAX_PRECISION)


def metric_of_divisor(d: ArakelovDivisor, precision_bits: int = DEFAULT_PRECISION) -> MetrizedLineBundle:
    """||1||_sigma^2 = c_sigma exp(-2 x_sigma), c = 1 at real and C_COMPLEX at complex places."""
    out = []
    with mpmath.workprec(precision_bits + GUARD_BITS):
        for k, pl in enumerate(d.field.places):
            c = C_REAL if pl.is_real else C_COMPLEX
            out.append(c * mpmath.exp(-2 * d.infinite[k].at(k, precision_bits)))
    return MetrizedLineBundle(d.ideal(), tuple(out))


# ---------------------------------------------------------------------------
# relation with K0(O_F, R)

def _field_of(x: IdeleClass) -> NumberField:
    comps = x.order.algebra.components
    if len(comps) != 1 or not isinstance(comps[0], FieldComponent):
        raise UnsupportedField("the Arakelov comparison needs the maximal order of a single field")
    F = comps[0].field
    _check_field(F)
    return F


def _arch_of(ic: InfiniteComponent | None) -> ArchValue:
    """log|value| of an infinite component as an exact symbolic expression."""
    if ic is None:
        return ArchValue()
    F = ic.component.field
    logs = [] if ic.exact is None else [(ic.exact, Fraction(1))]
    const = Fraction(0)
    if ic.numeric is not None:
        nu = ic.numeric
        const = nu.log_abs
        # log|re + i im| = 1/2 log(re^2 + im^2)
        logs.append((F.scalar(nu.re * nu.re + nu.im * nu.im), Fraction(1, 2)))
    return ArchValue(const, _merge(tuple(logs)))


def k0_to_pic_hat(x: IdeleClass) -> ArakelovDivisor:
    """Forget the angles: valuations at finite places, log|.| at infinite ones."""
    F = _field_of(x)
    fin: dict = {}
    for (_, p), c in x.center.finite:
        if F.degree == 1:
            fin.update({P: m for P, m in _rational_factor(F, c).items() if P.p == p})
            continue
        J = FractionalIdeal.principal(c)
        for P in factor_prime(F, p):
            m = J.valuation(P)
            if m:
                fin[P] = fin.get(P, 0) + m
    inf = dict(x.center.infinite)
    return ArakelovDivisor(F, fin, [_arch_of(inf.get((0, k))) for k in range(len(F.places))])


@dataclass(frozen=True)
class AngularElement:
    """Signs at real places and angles (in turns, in [0, 1)) at complex places, modulo mu_F."""

    field: NumberField
    signs: tuple
    angles: tuple

    def to_json(self, digits: int = 20) -> dict:
        return {"signs": list(self.signs), "angles": [mpmath.nstr(a, digits) for a in self.angles]}


def _reduce_angular(F: NumberField, signs: list, angles: list) -> AngularElement:
    # mu_F acts diagonally: -1 flips every sign, a primitive m-th root rotates the angle by 1/m
    m = unit_group(F).mu_order
    if signs and signs[0] < 0:
        signs = [-s for s in signs]
    if angles:
        t = angles[0] * m
        n = mpmath.nint(t)
        # a multiple of 1/m up to rounding is the identity
        r = mpmath.mpf(0) if abs(t - n) <= mpmath.eps * 2 ** 8 else mpmath.frac(t)
        angles = [r / m]
    return AngularElement(F, tuple(signs), tuple(angles))


def angular_part(x: IdeleClass, precision_bits: int | None = None) -> AngularElement:
    """The angular coordinates of a class whose Pic-hat image vanishes."""
    F = _field_of(x)
    prec = precision_bits or x.precision_bits
    D = k0_to_pic_hat(x)
    if not pic_hat_equal(D, ArakelovDivisor.zero(F), prec):
        raise NotInKernel("the class has nonzero image in Pic-hat")
    g = is_principal(D.ideal())
    inf = dict(x.center.infinite)
    with mpmath.workprec(prec + GUARD_BITS):
        w = []
        for k in range(len(F.places)):
            v = inf[(0, k)].center_value(k, prec) if (0, k) in inf else mpmath.mpf(1)
            w.append(v / embed(g, k, prec))
        signs = [1 if w[k] > 0 else -1 for k, pl in enumerate(F.places) if pl.is_real]
        angles = [mpmath.frac(mpmath.arg(w[k]) / (2 * mpmath.pi)) for k, pl in enumerate(F.places)
                  if not pl.is_real]
        return _reduce_angular(F, signs, angles)


def angular_trivial(a: AngularElement, precision_bits: int = DEFAULT_PRECISION) -> bool:
    tol = mpmath.mpf(2) ** (-(precision_bits // 2))
    return all(s == 1 for s in a.signs) and all(min(t, 1 - t) <= tol for t in a.angles)


def angular_to_k0(order, signs, angles, precision_bits: int = DEFAULT_PRECISION) -> IdeleClass:
    """Class of the idèle with the given signs at real places and angles (rational turns) at complex ones."""
    F = order.algebra.components[0].field
    it_s, it_a = iter(signs), iter(angles)
    inf = {}
    for k, pl in enumerate(F.places):
        if pl.is_real:
            inf[(0, k)] = Numeric(Fraction(next(it_s)))
        else:
            inf[(0, k)] = Numeric(arg_pi=2 * as_fraction(next(it_a)))
    return idele_class(Idele(order, {}, inf), "K0Rel", precision_bits)


def lift_divisor(order, D: ArakelovDivisor, precision_bits: int = DEFAULT_PRECISION) -> IdeleClass:
    """A K0 class mapping to D: local generators of the ideal, exp(x_sigma) at infinity."""
    F = D.field
    if order.algebra != field_algebra(F):
        raise ValidationError("order does not belong to the divisor's field")
    fin = {}
    L = OrderLattice(order, D.ideal().lattice)
    for p in sorted({P.p for P, _ in D.finite}):
        fin[(0, p)] = local_generator(L, p).parts[0]
    inf = {}
    for k, v in enumerate(D.infinite):
        ex = v.element()
        inf[(0, k)] = InfiniteComponent(order.algebra.components[0], ex, Numeric(log_abs=v.const))
    return idele_class(Idele(order, fin, inf), "K0Rel", precision_bits)


def field_order(F: NumberField):
    return maximal_order(field_algebra(F))
