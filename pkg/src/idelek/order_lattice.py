"""Orders in semisimple algebras, right lattices over them, and the lattice a𝔄
attached to the finite part of an idèle.

All lattices are stored in the coordinates of the order's Z-basis, so the
order itself is the standard lattice and [𝔄 : L] is the volume of L.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product as iproduct
from typing import Mapping, Sequence

from .algebra import (
    AlgebraElement, FieldComponent, MatrixComponent, QuaternionComponent, SemisimpleAlgebra,
)
from .errors import CriteriaDisagree, InvalidIdele, NotAUnit, NotLocallyFree, ValidationError
from .exact_core import ZLattice, as_fraction, fraction_str, rat_det, rat_inverse, vec_mat
from .number_field import _prime_factors, _vp

DEFAULT_SEARCH_BOUND = 50


class Order:
    """A Z-order of a semisimple algebra, given by a Z-basis."""

    def __init__(self, algebra: SemisimpleAlgebra, basis: Sequence[AlgebraElement],
                 name: str | None = None, declared_maximal: bool = False):
        self.algebra = algebra
        self.basis = tuple(basis)
        self.name = name or "order"
        n = algebra.dim
        if len(self.basis) != n:
            raise ValidationError(f"an order of a {n}-dimensional algebra needs {n} basis elements")
        self._B = [b.coords() for b in self.basis]
        if rat_det(self._B) == 0:
            raise ValidationError("order basis does not span the algebra")
        self._Binv = rat_inverse(self._B)
        one = self.to_coords(algebra.one())
        if any(c.denominator != 1 for c in one):
            raise ValidationError("order does not contain 1")
        sc = []
        for x in self.basis:
            row = []
            for y in self.basis:
                c = self.to_coords(x * y)
                if any(v.denominator != 1 for v in c):
                    raise ValidationError("order basis is not closed under multiplication")
                row.append(tuple(int(v) for v in c))
            sc.append(tuple(row))
        self.structure_constants = tuple(sc)
        if declared_maximal and not self.is_maximal:
            raise ValidationError("order declared maximal but its discriminant is too large")

    @cached_property
    def key(self):
        return (self.algebra, ZLattice.from_rows(self._B, self.algebra.dim))

    def __eq__(self, other):
        return isinstance(other, Order) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Order({self.name} in {self.algebra!r})"

    @property
    def rank(self) -> int:
        return self.algebra.dim

    def to_coords(self, x: AlgebraElement) -> list[Fraction]:
        return vec_mat(x.coords(), self._Binv)

    def from_coords(self, v) -> AlgebraElement:
        return self.algebra.from_coords(vec_mat([as_fraction(c) for c in v], self._B))

    def __contains__(self, x: AlgebraElement) -> bool:
        return all(c.denominator == 1 for c in self.to_coords(x))

    def right_mult_rows(self, j: int) -> list[list[int]]:
        """R with v R = coordinates of (v . omega_j)."""
        return [list(self.structure_constants[i][j]) for i in range(self.rank)]

    def left_mult_rows(self, a: AlgebraElement) -> list[list[Fraction]]:
        """Rows: coordinates of a * omega_i."""
        return [self.to_coords(a * w) for w in self.basis]

    @cached_property
    def discriminant(self) -> Fraction:
        comps = self.algebra.components

        def trd(x: AlgebraElement) -> Fraction:
            return sum((c.reduced_trace(v) for c, v in zip(comps, x.parts)), Fraction(0))

        return rat_det([[trd(x * y) for y in self.basis] for x in self.basis])

    @cached_property
    def is_maximal(self) -> bool:
        """Decided by the discriminant: an order is maximal iff its reduced-trace
        discriminant equals the product of the components' maximal discriminants."""
        A = self.algebra
        # a maximal order contains every central idempotent
        for i in range(len(A.components)):
            parts = [c.zero() for c in A.components]
            parts[i] = A.components[i].one()
            if AlgebraElement(A, tuple(parts)) not in self:
                return False
        target = Fraction(1)
        for c in A.components:
            target *= c.maximal_discriminant()
        return abs(self.discriminant) == target

    def to_json(self) -> dict:
        return {"algebra": self.algebra.to_json(),
                "basis": [[fraction_str(v) for v in b.coords()] for b in self.basis],
                "name": self.name}


# ---------------------------------------------------------------------------
# built-in orders

def _component_order_basis(c) -> list:
    if isinstance(c, FieldComponent):
        return [w for w in c.field.integral_basis_elements]
    if isinstance(c, MatrixComponent):
        F = c.field
        out = []
        for a in range(c.n):
            for b in range(c.n):
                for w in F.integral_basis_elements:
                    out.append(tuple(tuple(w if (i, j) == (a, b) else F.zero() for j in range(c.n))
                                     for i in range(c.n)))
        return out
    if isinstance(c, QuaternionComponent):
        if (c.a, c.b) != (-1, -1):
            raise ValidationError("built-in maximal orders of quaternion algebras exist only for (-1, -1)")
        h = Fraction(1, 2)
        return [(Fraction(1), Fraction(0), Fraction(0), Fraction(0)),
                (Fraction(0), Fraction(1), Fraction(0), Fraction(0)),
                (Fraction(0), Fraction(0), Fraction(1), Fraction(0)),
                (h, h, h, h)]
    raise ValidationError(f"no built-in order for {c!r}")


def maximal_order(algebra: SemisimpleAlgebra, name: str | None = None) -> Order:
    """Product of the built-in maximal orders of the components (Hurwitz for (-1,-1))."""
    basis = []
    for i, c in enumerate(algebra.components):
        for v in _component_order_basis(c):
            parts = [d.zero() for d in algebra.components]
            parts[i] = v
            basis.append(AlgebraElement(algebra, tuple(parts)))
    return Order(algebra, basis, name or "maximal", declared_maximal=True)


def hurwitz_order() -> Order:
    from .algebra import hamilton_quaternions
    return maximal_order(hamilton_quaternions(), "hurwitz")


def order_from_json(data) -> Order:
    A = SemisimpleAlgebra.from_json(data["algebra"])
    basis = data.get("basis", "maximal")
    if basis in ("maximal", "hurwitz"):
        if basis == "hurwitz" and any(not isinstance(c, QuaternionComponent) or (c.a, c.b) != (-1, -1)
                                      for c in A.components):
            raise ValidationError("the hurwitz order needs the algebra (-1, -1 / Q)")
        return maximal_order(A, basis)
    return Order(A, [A.from_coords(v) for v in basis], data.get("name"),
                 declared_maximal=bool(data.get("maximal", False)))


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderLattice:
    """A full right 𝔄-lattice in A, in order-basis coordinates."""

    order: Order
    lattice: ZLattice

    def __post_init__(self):
        if self.lattice.ambient_dim != self.order.rank:
            raise ValidationError("lattice dimension differs from order rank")
        for j in range(self.order.rank):
            R = self.order.right_mult_rows(j)
            for b in self.lattice.rational_basis:
                if vec_mat(b, R) not in self.lattice:
                    raise ValidationError("lattice is not stable under right multiplication by the order")

    @classmethod
    def unit(cls, order: Order) -> OrderLattice:
        return cls(order, ZLattice.standard(order.rank))

    @classmethod
    def from_elements(cls, order: Order, gens: Sequence[AlgebraElement]) -> OrderLattice:
        """The right 𝔄-lattice sum_g g𝔄."""
        rows = [r for g in gens for r in order.left_mult_rows(g)]
        return cls(order, ZLattice.from_rows(rows, order.rank))

    def index(self) -> Fraction:
        """Generalized index [𝔄 : L]."""
        return self.lattice.volume

    def elements(self) -> list[AlgebraElement]:
        return [self.order.from_coords(r) for r in self.lattice.rational_basis]

    def __contains__(self, x: AlgebraElement) -> bool:
        return self.order.to_coords(x) in self.lattice

    def relevant_primes(self) -> list[int]:
        """Primes p with L_p != 𝔄_p are among these."""
        det = 1
        for i in range(self.order.rank):
            det *= self.lattice.basis.entries[i][i]
        return sorted(_prime_factors(det) | _prime_factors(self.lattice.denominator))

    def to_json(self) -> dict:
        return self.lattice.to_json()


# ---------------------------------------------------------------------------
# local units

def _p_integral(v: Sequence[Fraction], p: int) -> bool:
    return all(c.denominator % p for c in v)


def is_local_unit(x: AlgebraElement, p: int, order: Order) -> bool:
    """x in (𝔄 ⊗ Z_(p))^×, decided by two criteria which must agree."""
    if not x.is_invertible():
        raise NotAUnit("is_local_unit needs an invertible element")
    cx = order.to_coords(x)
    by_containment = _p_integral(cx, p) and _p_integral(order.to_coords(x.inverse()), p)
    by_norm = _p_integral(cx, p) and all(
        _vp(n.norm(), p) == 0 for n in x.reduced_norm())
    if by_containment != by_norm:
        raise CriteriaDisagree(f"unit criteria disagree at p={p} for {x!r}")
    return by_containment


# ---------------------------------------------------------------------------
# the lattice a𝔄

def _min_val(rows, p) -> int:
    vals = [_vp(v, p) for r in rows for v in r if v]
    return min(vals) if vals else 0


def sandwich_exponent(order: Order, a: AlgebraElement, p: int) -> int:
    """Least k >= 0 with p^k 𝔄_p ⊆ a𝔄_p ⊆ p^-k 𝔄_p."""
    m = -_min_val(order.left_mult_rows(a), p)
    n = -_min_val(order.left_mult_rows(a.inverse()), p)
    return max(0, m, n)


def _crt_idempotent(mod_here: int, mod_rest: int) -> int:
    # e = 1 mod mod_here, e = 0 mod mod_rest
    if mod_rest == 1:
        return 1
    return (mod_rest * pow(mod_rest, -1, mod_here)) % (mod_here * mod_rest)


def lattice_from_local_data(order: Order, local: Mapping[int, AlgebraElement]) -> OrderLattice:
    """The unique lattice L with L_p = a_p𝔄_p for p in the mapping and L_q = 𝔄_q otherwise."""
    ks = {}
    for p, a in local.items():
        if not a.is_invertible():
            raise InvalidIdele(f"component at {p} is not invertible")
        k = sandwich_exponent(order, a, p)
        if k:
            ks[p] = k
    if not ks:
        return OrderLattice.unit(order)
    D = 1
    for p, k in ks.items():
        D *= p ** k
    D2 = D * D
    n = order.rank
    rows = [[D2 * int(i == j) for j in range(n)] for i in range(n)]
    for p, k in ks.items():
        mod = p ** (2 * k)
        e = _crt_idempotent(mod, D2 // mod)
        scale = p ** k
        for r in order.left_mult_rows(local[p]):
            out = []
            for v in r:
                v = v * scale
                out.append((e * (v.numerator * pow(v.denominator, -1, mod) % mod)) % D2)
            rows.append(out)
    L = ZLattice.from_rows([[Fraction(v, D) for v in r] for r in rows], n)
    return OrderLattice(order, L)


def local_index_exponent(order: Order, a: AlgebraElement, p: int) -> int:
    """v_p of [𝔄_p : a𝔄_p], computed from the norm of a alone."""
    return _vp(a.norm_to_Q(), p)


# ---------------------------------------------------------------------------
# local generators

def _shell(dim: int, r: int):
    """Integer vectors of sup-norm exactly r."""
    if r == 0:
        yield (0,) * dim
        return
    for v in iproduct(range(-r, r + 1), repeat=dim):
        if max(abs(c) for c in v) == r:
            yield v


def local_generator(L: OrderLattice, p: int, bound: int = DEFAULT_SEARCH_BOUND) -> AlgebraElement:
    """x in L with x𝔄_p = L_p; found by enumerating L in growing sup-norm shells."""
    order = L.order
    target = _vp(L.index(), p)
    basis = L.lattice.rational_basis
    n = order.rank
    for r in range(bound + 1):
        for c in _shell(n, r):
            v = [sum((ci * basis[i][j] for i, ci in enumerate(c) if ci), Fraction(0)) for j in range(n)]
            x = order.from_coords(v)
            N = x.norm_to_Q()
            if N and _vp(N, p) == target:
                return x
    raise NotLocallyFree(f"no local generator at p={p} with coordinates <= {bound}")


def local_generators(L: OrderLattice, bound: int = DEFAULT_SEARCH_BOUND) -> dict[int, AlgebraElement]:
    """{p: a_p} with L = a𝔄 (primes where L_p = 𝔄_p omitted)."""
    out = {}
    for p in L.relevant_primes():
        if _vp(L.index(), p) == 0 and L.lattice.denominator % p and _is_local_identity(L, p):
            continue
        out[p] = local_generator(L, p, bound)
    return out


def _is_local_identity(L: OrderLattice, p: int) -> bool:
    # L ⊆ 𝔄 at p and equal volume at p
    return all(_p_integral(r, p) for r in L.lattice.rational_basis)


def k0_class(lattices, bound: int = DEFAULT_SEARCH_BOUND, precision_bits: int = 128):
    """(rank, Steinitz class) of the direct sum of locally free rank one lattices."""
    from .ideles import k0_class as _k0
    return _k0(lattices, bound=bound, precision_bits=precision_bits)
