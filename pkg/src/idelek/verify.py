"""Seeded property suites over random idèles.

Every sample draws from its own generator seeded by (seed, suite, index), so a
failing sample can be re-run alone and reproduces the same inputs.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

from .errors import IdelekError, PrecisionExhausted, UnsupportedComponent, UnsupportedField
from .exact_core import fraction_str
from .ideles import (
    Numeric, center_order, class_equal, diagonal, extended_boundary, frohlich_class, idele_class,
    is_norm_one_idele, k0_class, lambda_choices, lattice_of_idele, random_idele, random_norm_one_idele,
    random_unit_finite_idele, swan_boundary, swan_to_class, theta, trivial_class,
)
from .number_field import DEFAULT_PRECISION, _vp
from .order_lattice import Order, OrderLattice, local_index_exponent
from .presentations import swan_add


class Sample:
    """Outcome of one sample: ok flag, the inputs as JSON, and a short reason on failure."""

    __slots__ = ("ok", "inputs", "reason")

    def __init__(self, ok: bool, inputs: dict, reason: str = ""):
        self.ok, self.inputs, self.reason = ok, inputs, reason


def _theta_homomorphism(order, rng, prec):
    a, b = random_idele(order, rng), random_idele(order, rng)
    inputs = {"a": a.to_json(), "b": b.to_json()}
    ca = swan_to_class(theta(a), precision_bits=prec)
    cb = swan_to_class(theta(b), precision_bits=prec)
    if not class_equal(idele_class(a * b, "K0Rel", prec), idele_class(a, "K0Rel", prec) * idele_class(b, "K0Rel", prec)):
        return Sample(False, inputs, "class(ab) != class(a) class(b)")
    if not class_equal(swan_to_class(theta(a * b), precision_bits=prec), ca * cb):
        return Sample(False, inputs, "theta(ab) != theta(a) + theta(b)")
    if not class_equal(swan_to_class(swan_add(theta(a), theta(b)), precision_bits=prec), ca * cb):
        return Sample(False, inputs, "direct sum of Swan generators is not the product")
    return Sample(True, inputs)


def _unit_vanishing(order, rng, prec):
    u = random_unit_finite_idele(order, rng)
    ok = swan_to_class(theta(u), precision_bits=prec).is_trivial()
    return Sample(ok, {"a": u.to_json()}, "" if ok else "theta of a unit-finite idèle is nonzero")


def _diagonal_vanishing(order, rng, prec):
    while True:
        g = order.algebra.random_element(rng, 6)
        if g.is_invertible():
            break
    a = diagonal(order, g)
    ok = swan_to_class(theta(a), precision_bits=prec).is_trivial()
    return Sample(ok, {"a": a.to_json()}, "" if ok else "theta of a global element is nonzero")


def _norm_one_vanishing(order, rng, prec):
    u = random_norm_one_idele(order, rng)
    inputs = {"a": u.to_json()}
    if not is_norm_one_idele(u, prec):
        return Sample(False, inputs, "generator produced an idèle of reduced norm != 1")
    ok = idele_class(u, "CenterForm", prec).is_trivial()
    return Sample(ok, inputs, "" if ok else "norm-one idèle has a nontrivial CenterForm class")


def _swan_cl_square(order, rng, prec):
    a = random_idele(order, rng)
    inputs = {"a": a.to_json()}
    f = frohlich_class(a, prec)
    if not class_equal(swan_to_class(theta(a), precision_bits=prec).cl_projection(), f):
        return Sample(False, inputs, "Cl projection of the Swan class differs from the Fröhlich class")
    if not class_equal(swan_boundary(theta(a)), f.inverse()):
        return Sample(False, inputs, "[P] - [Q] differs from the inverse Fröhlich class")
    return Sample(True, inputs)


def _cancellation(order, rng, prec):
    a = random_idele(order, rng).finite_part()
    b = random_idele(order, rng).finite_part()
    inputs = {"a": a.to_json(), "b": b.to_json()}
    m1, c1 = k0_class([lattice_of_idele(a), lattice_of_idele(b)], precision_bits=prec)
    m2, c2 = k0_class([lattice_of_idele(a * b), OrderLattice.unit(order)], precision_bits=prec)
    ok = m1 == m2 and c1.normal_form() == c2.normal_form()
    return Sample(ok, inputs, "" if ok else "a(A) + b(A) and ab(A) + A have different classes")


def _lattice_index(order, rng, prec):
    a = random_idele(order, rng)
    inputs = {"a": a.to_json()}
    idx = Fraction(lattice_of_idele(a).index())
    for p in a.primes():
        got, want = _vp(idx, p), local_index_exponent(order, a.finite_at(p), p)
        if got != want:
            return Sample(False, inputs, f"p = {p}: index exponent {got}, local index {want}")
    return Sample(True, inputs)


def _random_center_y(order, rng) -> dict:
    y = {}
    for i, c in enumerate(center_order(order).algebra.components):
        for k, pl in enumerate(c.field.places):
            re = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 4))
            im = Fraction(0) if pl.is_real else Fraction(rng.randint(-9, 9), rng.randint(1, 4))
            y[(i, k)] = Numeric(re, im, Fraction(rng.randint(-4, 4), 3))
    return y


def _delta_hat(order, rng, prec):
    y = _random_center_y(order, rng)
    inputs = {"y": [{"component": i, "place": k, "numeric": v.to_json()} for (i, k), v in sorted(y.items())]}
    lams = list(lambda_choices(order, y, prec))
    if len(lams) < 2:
        return Sample(True, inputs)
    l1, l2 = lams[0], lams[1 + rng.randrange(len(lams) - 1)]
    inputs["lambda"] = [[fraction_str(c) for c in x.coords] for x in l1]
    inputs["lambda_prime"] = [[fraction_str(c) for c in x.coords] for x in l2]
    ok = class_equal(extended_boundary(order, y, l1, prec), extended_boundary(order, y, l2, prec))
    return Sample(ok, inputs, "" if ok else "the two lambda choices give different classes")


SUITES: dict[str, Callable[[Order, random.Random, int], Sample]] = {
    "theta-homomorphism": _theta_homomorphism,
    "unit-vanishing": _unit_vanishing,
    "diagonal-vanishing": _diagonal_vanishing,
    "norm-one-vanishing": _norm_one_vanishing,
    "swan-cl-square": _swan_cl_square,
    "cancellation": _cancellation,
    "lattice-index": _lattice_index,
    "delta-hat": _delta_hat,
}


def sample_rng(seed: int, suite: str, index: int) -> random.Random:
    return random.Random(f"{seed}/{suite}/{index}")


def run_sample(order: Order, suite: str, seed: int, index: int,
               precision_bits: int = DEFAULT_PRECISION) -> Sample:
    fn = SUITES[suite]
    rng = sample_rng(seed, suite, index)
    try:
        return fn(order, rng, precision_bits)
    except (PrecisionExhausted, UnsupportedComponent, UnsupportedField):
        raise
    except IdelekError as exc:
        return Sample(False, {}, f"{type(exc).__name__}: {exc}")


def run_suite(order: Order, suite: str, samples: int = 100, seed: int = 0,
              precision_bits: int = DEFAULT_PRECISION, only: int | None = None) -> dict:
    """Run a suite and return a JSON-ready report; failures carry their inputs."""
    if suite not in SUITES:
        raise KeyError(suite)
    trivial_class(order)  # rejects unsupported orders before sampling
    indices = [only] if only is not None else range(samples)
    failures = []
    for i in indices:
        s = run_sample(order, suite, seed, i, precision_bits)
        if not s.ok:
            failures.append({"sample": i, "reason": s.reason, "inputs": s.inputs})
    return {
        "suite": suite,
        "order": order.name,
        "seed": seed,
        "samples": len(indices),
        "precision_bits": precision_bits,
        "passed": not failures,
        "failures": failures,
    }
