import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from idelek.errors import IndexDivisorError, ValidationError, ZeroElement
from idelek.number_field import (
    FractionalIdeal, NumberField, class_group, embed, factor_prime, is_principal,
    quadratic_field, rationals, unit_group,
)


# --- oracles ------------------------------------------------------------------

def roots_mod_p(coeffs, p):
    """Roots of an integer polynomial (ascending coefficients) in F_p by exhaustion."""
    return [x for x in range(p) if sum(c * x ** i for i, c in enumerate(coeffs)) % p == 0]


def pell_bruteforce(d, limit=10 ** 4):
    """Smallest u = a + b sqrt d > 1 (a, b half-integers allowed if d = 1 mod 4) with norm +-1."""
    best = None
    for b2 in range(1, limit):
        for s in (1, -1):
            # (a2^2 - d b2^2) / 4 = s with a2, b2 of equal parity when d = 1 mod 4
            t = d * b2 * b2 + 4 * s
            if t < 0:
                continue
            a2 = math.isqrt(t)
            if a2 * a2 != t:
                continue
            if d % 4 != 1 and (a2 % 2 or b2 % 2):
                continue
            if d % 4 == 1 and (a2 - b2) % 2:
                continue
            cand = (a2 + b2 * math.sqrt(d)) / 2
            if best is None or cand < best[0]:
                best = (cand, Fraction(a2, 2), Fraction(b2, 2))
        if best is not None:
            return best
    raise AssertionError("no unit found")


def reduced_forms_count(D):
    """Class number of discriminant D < 0 by counting reduced primitive forms."""
    h = 0
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a:
                continue
            if c == a and b < 0:
                continue
            if math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            h += 1
        a += 1
    return h


def elements_as_sqrt_pairs(F, x):
    """x -> (a, b) with x = a + b sqrt d using the closed form of theta."""
    d = F.quadratic_d
    u, v = x.coords
    if d % 4 == 1:
        return u + v / 2, v / 2
    return u, v


# --- field basics ---------------------------------------------------------------

def test_rejects_bad_polynomials():
    with pytest.raises(ValidationError):
        NumberField([1, 0, 2])  # not monic
    with pytest.raises(ValidationError):
        NumberField([-1, 0, 1])  # reducible
    with pytest.raises(ValidationError):
        quadratic_field(8)


def test_basis_validation():
    with pytest.raises(ValidationError):
        NumberField([-5, -1, 1], [[1, 0], [Fraction(1, 3), Fraction(1, 3)]])
    # Z[sqrt 5] inside Q(sqrt 5) is accepted; it simply is not maximal
    F = NumberField([-5, 0, 1])
    assert F.index == 1 and F.discriminant == 20


def test_quadratic_builders():
    F = quadratic_field(-5)
    assert F.poly == (5, 0, 1) and F.discriminant == -20
    G = quadratic_field(5)
    assert G.poly == (-1, -1, 1) and G.discriminant == 5
    assert rationals().degree == 1


q_elts = st.tuples(st.fractions(-20, 20, max_denominator=5), st.fractions(-20, 20, max_denominator=5))


@settings(max_examples=80)
@given(st.sampled_from([-5, -3, -1, 2, 5, 13]), q_elts, q_elts)
def test_norm_multiplicative_and_matches_closed_form(d, a, b):
    F = quadratic_field(d)
    x, y = F(a), F(b)
    assert (x * y).norm() == x.norm() * y.norm()
    s, t = elements_as_sqrt_pairs(F, x)
    assert x.norm() == s * s - d * t * t
    if not x.is_zero():
        assert (x * x.inverse()).is_one()


def test_zero_inverse():
    with pytest.raises(ZeroElement):
        quadratic_field(2).zero().inverse()


# --- embeddings -----------------------------------------------------------------

def test_sqrt2_embedding_against_bisection_oracle():
    F = quadratic_field(2)
    lo, hi = Fraction(1), Fraction(2)
    while hi - lo > Fraction(1, 2 ** 140):
        m = (lo + hi) / 2
        lo, hi = (m, hi) if m * m < 2 else (lo, m)
    v = embed(F.gen(), 0, 128)
    with mpmath.workprec(200):
        assert abs(v - mpmath.mpf(lo.numerator) / lo.denominator) < mpmath.mpf(2) ** -125
    assert embed(F.gen(), 1, 128) < 0


def test_complex_place_upper_half_plane():
    F = quadratic_field(-3)
    z = embed(F.gen(), 0, 128)
    with mpmath.workprec(160):
        assert abs(z - mpmath.mpc(0.5, mpmath.sqrt(3) / 2)) < mpmath.mpf(2) ** -120


def test_embedding_is_ring_homomorphism():
    F = NumberField([-2, 0, 0, 1])  # cube root of 2, signature (1, 1)
    assert F.signature == (1, 1)
    x, y = F([1, 2, 3]), F([0, -1, Fraction(1, 2)])
    for pl in F.places:
        with mpmath.workprec(160):
            lhs = embed(x * y, pl, 128)
            rhs = embed(x, pl, 128) * embed(y, pl, 128)
            assert abs(lhs - rhs) < mpmath.mpf(2) ** -110


def test_precision_floor():
    with pytest.raises(ValidationError):
        embed(quadratic_field(2).gen(), 0, 32)


# --- primes -------------------------------------------------------------------

def test_factor_x2_plus_5_mod_2_ramified():
    assert roots_mod_p([5, 0, 1], 2) == [1]  # oracle: single double root
    F = quadratic_field(-5)
    (P,) = factor_prime(F, 2)
    assert (P.e, P.f) == (2, 1)
    assert P.ideal ** 2 == FractionalIdeal.principal(F.scalar(2))


def test_factor_x2_plus_1_mod_5_split():
    assert roots_mod_p([1, 0, 1], 5) == [2, 3]
    F = quadratic_field(-1)
    Ps = factor_prime(F, 5)
    assert [(P.e, P.f) for P in Ps] == [(1, 1), (1, 1)]
    prod = Ps[0].ideal * Ps[1].ideal
    assert prod == FractionalIdeal.principal(F.scalar(5))


def test_inert_prime():
    assert roots_mod_p([1, 0, 1], 7) == []
    (P,) = factor_prime(quadratic_field(-1), 7)
    assert (P.e, P.f) == (1, 2)


def test_index_divisor_needs_override():
    F = NumberField([-5, 0, 1])  # Z[sqrt 5], index 1 relative to its own basis
    G = NumberField([-5, 0, 1], [[1, 0], [Fraction(1, 2), Fraction(1, 2)]])
    assert G.index == 2
    with pytest.raises(IndexDivisorError):
        factor_prime(G, 2)
    H = NumberField([-5, 0, 1], [[1, 0], [Fraction(1, 2), Fraction(1, 2)]],
                    prime_overrides={2: [{"gen": [2, 0], "e": 1, "f": 2}]})
    (P,) = factor_prime(H, 2)
    assert P.f == 2
    assert len(factor_prime(F, 11)) == 2


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([-5, -1, 2, 10, -23]), st.integers(-30, 30), st.integers(-30, 30))
def test_factorization_reconstructs_principal_ideal(d, a, b):
    F = quadratic_field(d)
    x = F([a, b])
    if x.is_zero():
        return
    I = FractionalIdeal.principal(x)
    fac = I.factor()
    J = FractionalIdeal.unit(F)
    for P, e in fac.items():
        J = J * P.ideal ** e
    assert J == I
    assert abs(x.norm()) == I.norm()


def test_ideal_inverse():
    F = quadratic_field(-5)
    (P,) = factor_prime(F, 2)
    assert (P.ideal * P.ideal.inverse()).is_unit_ideal()
    assert P.ideal.inverse().norm() == Fraction(1, 2)


# --- principality, units, class groups ----------------------------------------

def test_principality_in_z_sqrt_minus_5():
    F = quadratic_field(-5)
    (P2,) = factor_prime(F, 2)
    assert is_principal(P2.ideal) is None
    g = is_principal(P2.ideal ** 2)
    assert FractionalIdeal.principal(g) == P2.ideal ** 2
    x = F([3, 1])
    assert FractionalIdeal.principal(is_principal(FractionalIdeal.principal(x))) == \
        FractionalIdeal.principal(x)


@pytest.mark.parametrize("d", [2, 3, 5, 6, 7, 13, 19, 22, 29, 31, 43, 46])
def test_fundamental_unit_matches_pell_oracle(d):
    _, a, b = pell_bruteforce(d)
    eps = unit_group(quadratic_field(d)).fundamental_unit
    assert elements_as_sqrt_pairs(quadratic_field(d), eps) == (a, b)


def test_roots_of_unity():
    assert unit_group(quadratic_field(-1)).mu_order == 4
    assert unit_group(quadratic_field(-3)).mu_order == 6
    assert unit_group(quadratic_field(-5)).mu_order == 2
    assert unit_group(rationals()).mu_order == 2


@pytest.mark.parametrize("d", [-1, -2, -3, -5, -6, -14, -23, -26, -47, -71])
def test_imaginary_class_numbers_against_form_count(d):
    D = d if d % 4 == 1 else 4 * d
    C = class_group(quadratic_field(d))
    assert C.order == reduced_forms_count(D)


def test_known_class_groups():
    assert class_group(quadratic_field(-5)).invariants == [2]
    assert class_group(quadratic_field(-1)).invariants == []
    assert class_group(quadratic_field(2)).invariants == []
    assert class_group(quadratic_field(10)).invariants == [2]
    assert class_group(rationals()).invariants == []
    # (-84) has class group (Z/2)^2, which exercises a non-cyclic SNF
    assert class_group(quadratic_field(-21)).invariants == [2, 2]


def test_discrete_log_and_combine():
    F = quadratic_field(-23)
    C = class_group(F)
    for P in factor_prime(F, 2) + factor_prime(F, 3):
        c, g = C.discrete_log(P.ideal)
        assert FractionalIdeal.principal(g) * C.rep(c) == P.ideal
    a = C.prime_class(factor_prime(F, 2)[0])
    c, g = C.combine(a, a)
    assert C.rep(a) * C.rep(a) == FractionalIdeal.principal(g) * C.rep(c)
    assert c == C.add(a, a)
