"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 unsupported field or component,
3 precision exhausted, 4 a verified property failed.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction

import mpmath

from .algebra import MatrixComponent, SemisimpleAlgebra, field_algebra
from .arakelov import ArakelovDivisor, metric_of_divisor, pic_hat_equal
from .errors import (
    IdelekError, NoLambdaFound, PrecisionExhausted, UnsupportedComponent, UnsupportedField, ValidationError,
)
from .exact_core import fraction_str
from .ideles import (
    FLAVORS, Idele, InfiniteComponent, Numeric, center_order, extended_boundary, frohlich_class, idele_class,
    swan_to_class, theta,
)
from .number_field import NumberField, class_group, quadratic_field, rationals
from .order_lattice import Order, hurwitz_order, maximal_order, order_from_json
from .verify import SUITES, run_suite

EXIT_OK, EXIT_INVALID, EXIT_UNSUPPORTED, EXIT_PRECISION, EXIT_PROPERTY = 0, 1, 2, 3, 4

_SQRT = re.compile(r"^Q\(\s*sqrt\s*\(?\s*(-?\d+)\s*\)?\s*\)$")
_MATRIX = re.compile(r"^M(\d+)\(Q\)$")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# input resolution

def _load_json(arg: str):
    """Inline JSON, or the path of a JSON file."""
    s = arg.strip()
    try:
        if s[:1] in "{[":
            return json.loads(s)
        with open(os.path.expanduser(arg), encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {arg}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {arg}: {exc}") from exc


def _field_by_name(name: str) -> NumberField | None:
    s = name.replace(" ", "")
    if s in ("Q", "QQ"):
        return rationals()
    if s == "Q(i)":
        return quadratic_field(-1)
    m = _SQRT.match(s)
    if m:
        return quadratic_field(int(m.group(1)))
    return None


def resolve_field(arg: str) -> NumberField:
    F = _field_by_name(arg)
    if F is not None:
        return F
    data = _load_json(arg)
    try:
        return NumberField.from_json(data)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed field description: {exc}") from exc


def resolve_order(arg: str) -> Order:
    """A built-in name (hurwitz, Mn(Q), a field name) or an order JSON file."""
    s = arg.replace(" ", "")
    if s.lower() == "hurwitz":
        return hurwitz_order()
    m = _MATRIX.match(s)
    if m:
        return maximal_order(SemisimpleAlgebra([MatrixComponent(int(m.group(1)))]), s)
    F = _field_by_name(s)
    if F is not None:
        return maximal_order(field_algebra(F), F.name)
    data = _load_json(arg)
    try:
        if "algebra" not in data and ("poly" in data or "quadratic" in data or "rationals" in data):
            F = NumberField.from_json(data)
            return maximal_order(field_algebra(F), F.name)
        return order_from_json(data)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed order description: {exc}") from exc


def _need(args, name: str):
    v = getattr(args, name)
    if v is None:
        raise ValidationError(f"--{name.replace('_', '-')} is required for {args.command}")
    return v


def _order_and_idele(args) -> tuple[Order, Idele]:
    order = resolve_order(_need(args, "order"))
    return order, Idele.from_json(order, _load_json(_need(args, "idele")))


def _scalar_or_json(text: str):
    s = text.strip()
    if s[:1] in "{[":
        return json.loads(s)
    try:
        return Fraction(s)
    except ValueError as exc:
        raise ValidationError(f"not a rational number: {text!r}") from exc


# ---------------------------------------------------------------------------
# commands; each returns (report, human text, exit code)

def cmd_classgroup(args):
    F = resolve_field(_need(args, "field"))
    G = class_group(F)
    desc = G.describe()
    report = {"command": "classgroup", "field": F.name, "invariants": list(G.invariants), "order": G.order,
              "via": "Minkowski-bound enumeration of ideal classes"}
    human = f"Cl({F.name}) ≅ {'1' if desc == 'trivial' else desc}  (class number {G.order})"
    return report, human, EXIT_OK


def _lattice_report(L) -> dict:
    return {"index": fraction_str(Fraction(L.index())), "lattice": L.to_json()}


def cmd_theta(args):
    order, a = _order_and_idele(args)
    s = theta(a)
    (t,) = s.summands
    c = swan_to_class(s, precision_bits=args.precision)
    zero = c.is_trivial()
    report = {
        "command": "theta",
        "order": order.name,
        "swan": {"P": _lattice_report(t.P),
                 "phi": [ic.to_json(i, k) for (i, k), ic in t.phi],
                 "Q": _lattice_report(t.Q)},
        "zero": zero,
        "class": c.to_json(),
        "via": "theta: idèle to Swan generator [A, a_inf, aA], then back to its idèle class",
    }
    human = ("zero Swan element" if zero else "nonzero Swan element") + f"\n[A, a_inf, aA] with [A : aA] = " \
        f"{report['swan']['Q']['index']}\n{c.describe()}"
    return report, human, EXIT_OK


def cmd_normalform(args):
    order, a = _order_and_idele(args)
    c = idele_class(a, args.flavor, args.precision)
    report = {"command": "normalform", "order": order.name, "class": c.to_json(),
              "via": "reduced norm to the centre, then class group and unit reduction"}
    return report, c.describe(), EXIT_OK


def cmd_frohlich(args):
    order, a = _order_and_idele(args)
    c = frohlich_class(a, args.precision)
    report = {"command": "frohlich", "order": order.name, "class": c.to_json(),
              "via": "locally free class group: finite part of the idèle modulo global elements"}
    return report, c.describe(), EXIT_OK


def cmd_delta_hat(args):
    order = resolve_order(_need(args, "order"))
    y = _scalar_or_json(_need(args, "y"))
    if isinstance(y, dict):
        y = {(int(e.get("component", 0)), int(e["place"])): _infinite_entry(order, e) for e in y.get("infinite", [])}
    lam = None if args.lam is None else _scalar_or_json(args.lam)
    c = extended_boundary(order, y, lam, args.precision)
    report = {"command": "delta-hat", "order": order.name, "class": c.to_json(),
              "via": "extended boundary map with a weak-approximation twist lambda"}
    return report, c.describe(), EXIT_OK


def _infinite_entry(order, e):
    c = center_order(order).algebra.components[int(e.get("component", 0))]
    ex = c.parse_value(e["exact"]) if "exact" in e else None
    nu = Numeric.from_json(e["numeric"]) if "numeric" in e else None
    return InfiniteComponent(c, ex, nu)


def cmd_arakelov(args):
    F = resolve_field(_need(args, "field"))
    D = ArakelovDivisor.from_json(F, _load_json(_need(args, "divisor")))
    other = ArakelovDivisor.from_json(F, _load_json(args.compare)) if args.compare else ArakelovDivisor.zero(F)
    equal = pic_hat_equal(D, other, args.precision)
    m = metric_of_divisor(D, args.precision)
    digits = max(15, args.precision // 6)
    report = {
        "command": "arakelov",
        "field": F.name,
        "divisor": D.to_json(args.precision),
        "ideal_norm": fraction_str(m.ideal.norm()),
        "metric_norms_sq": [mpmath.nstr(v, digits) for v in m.norms_sq],
        "compared_with": "divisor" if args.compare else "zero",
        "pic_hat_equal": equal,
        "via": "Arakelov divisors modulo principal divisors; metric c exp(-2x) with c = 1 real, 2 complex",
    }
    human = (f"{'equal' if equal else 'not equal'} in Pic-hat to the {report['compared_with']} divisor\n"
             f"ideal norm {report['ideal_norm']}, ||1||^2 = {', '.join(report['metric_norms_sq'])}")
    return report, human, EXIT_OK


def cmd_verify(args):
    order = resolve_order(_need(args, "order"))
    names = list(SUITES) if args.suite == "all" else [args.suite]
    reports = [run_suite(order, n, args.samples, args.seed, args.precision, args.sample_index) for n in names]
    ok = all(r["passed"] for r in reports)
    report = {"command": "verify", "order": order.name, "seed": args.seed, "passed": ok, "suites": reports}
    lines = []
    for r in reports:
        lines.append(f"{'PASS' if r['passed'] else 'FAIL'} {r['suite']} ({r['samples']} samples, seed {r['seed']})")
        for f in r["failures"]:
            lines.append(f"  sample {f['sample']}: {f['reason']}")
            lines.append(f"    reproduce: idelek verify --order {args.order} --suite {r['suite']} "
                         f"--seed {args.seed} --sample-index {f['sample']} --json")
            lines.append("    inputs: " + json.dumps(f["inputs"], sort_keys=True))
    return report, "\n".join(lines), EXIT_OK if ok else EXIT_PROPERTY


COMMANDS = {
    "classgroup": cmd_classgroup,
    "theta": cmd_theta,
    "normalform": cmd_normalform,
    "frohlich": cmd_frohlich,
    "delta-hat": cmd_delta_hat,
    "arakelov": cmd_arakelov,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=128, help="working precision in bits (default 128)")
    common.add_argument("--samples", type=int, default=100, help="samples per verify suite (default 100)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized runs")
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--field", help="field name (Q, Q(i), Q(sqrt -5)) or JSON path")
    common.add_argument("--order", help="order name (hurwitz, M2(Q), a field name) or JSON path")
    common.add_argument("--idele", help="idèle JSON path or inline JSON")

    p = _Parser(prog="idelek", description="Idèle normal forms for class groups and relative K-groups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("classgroup", parents=[common], help="class group of Q or a quadratic field")
    sub.add_parser("theta", parents=[common], help="Swan generator of an idèle and its class")
    nf = sub.add_parser("normalform", parents=[common], help="normal form of an idèle class")
    nf.add_argument("--flavor", choices=FLAVORS, default="K0Rel")
    sub.add_parser("frohlich", parents=[common], help="locally free class of an idèle")
    dh = sub.add_parser("delta-hat", parents=[common], help="extended boundary map of a centre value")
    dh.add_argument("--y", help="rational value, or JSON {'infinite': [...]} over the centre")
    dh.add_argument("--lambda", dest="lam", help="explicit lambda (rational or JSON coordinates)")
    ar = sub.add_parser("arakelov", parents=[common], help="Pic-hat triviality and metric of a divisor")
    ar.add_argument("--divisor", help="divisor JSON path or inline JSON")
    ar.add_argument("--compare", help="second divisor to compare with (default: zero)")
    ve = sub.add_parser("verify", parents=[common], help="run seeded property suites")
    ve.add_argument("--suite", choices=["all", *SUITES], default="all")
    ve.add_argument("--sample-index", type=int, help="re-run a single sample")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.precision < 16:
        print("idelek: error: --precision must be at least 16", file=sys.stderr)
        return EXIT_INVALID
    if args.samples < 0:
        print("idelek: error: --samples must be non-negative", file=sys.stderr)
        return EXIT_INVALID
    try:
        report, human, code = COMMANDS[args.command](args)
    except PrecisionExhausted as exc:
        print(f"idelek: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (UnsupportedField, UnsupportedComponent) as exc:
        print(f"idelek: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except NoLambdaFound as exc:
        print(f"idelek: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (IdelekError, ValueError, KeyError, TypeError) as exc:
        print(f"idelek: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False))
    else:
        print(human)
    return code


if __name__ == "__main__":
    sys.exit(main())
