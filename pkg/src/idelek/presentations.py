"""Presentation-level objects: double short exact sequences (Nenashev),
3x3 grids, Swan generators [P, phi, Q] and group completion of monoids.

Modules are finitely generated abelian groups Z^n / diag(d) (d_i = 0 means a
free summand) or the symbolic adelic object.  Integer maps act on column
vectors, so a map Z^n -> Z^m is an m x n IntMatrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

from .errors import DimensionMismatch, MiddleMismatch, NotInvertible, ValidationError
from .exact_core import IntMatrix, cokernel_invariants, hnf, left_kernel


# ---------------------------------------------------------------------------
# modules and maps

@dataclass(frozen=True)
class FiniteModule:
    """Z^n / (d_1 Z + ... + d_n Z)."""

    diag: tuple[int, ...] = ()

    @classmethod
    def free(cls, n: int) -> FiniteModule:
        return cls((0,) * n)

    @property
    def rank(self) -> int:
        return len(self.diag)

    def relation_rows(self) -> list[list[int]]:
        n = self.rank
        return [[d if j == i else 0 for j in range(n)] for i, d in enumerate(self.diag) if d]

    def order(self) -> int | None:
        if 0 in self.diag:
            return None
        out = 1
        for d in self.diag:
            out *= d
        return out


ZERO_MODULE = FiniteModule(())


@dataclass(frozen=True)
class AdelicTag:
    """The symbolic adelic object A_𝔸 (as a module over itself)."""

    name: str = "A_adele"


def module_of(obj) -> FiniteModule | AdelicTag:
    if isinstance(obj, (FiniteModule, AdelicTag)):
        return obj
    # an OrderLattice is a free Z-module of the order's rank
    rank = getattr(getattr(obj, "order", None), "rank", None)
    if rank is not None:
        return FiniteModule.free(rank)
    raise ValidationError(f"not a module descriptor: {obj!r}")


@dataclass(frozen=True)
class ZeroMap:
    pass


@dataclass(frozen=True)
class IdentityMap:
    pass


@dataclass(frozen=True)
class MulMap:
    """Multiplication by an idèle on the adelic object."""

    idele: Any


def mul_map(idele) -> MulMap | IdentityMap:
    return IdentityMap() if idele.is_trivial_structurally() else MulMap(idele)


def _span(rows: Sequence[Sequence[int]], n: int) -> tuple:
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return ()
    return hnf(IntMatrix.from_rows(rows, n)).entries


def _apply(M: IntMatrix, v) -> list[int]:
    return [sum(a * b for a, b in zip(r, v)) for r in M.entries]


def _image_rows(M: IntMatrix, rows) -> list[list[int]]:
    return [_apply(M, r) for r in rows]


def _columns(M: IntMatrix) -> list[list[int]]:
    return [list(c) for c in M.transpose().entries] if M.ncols else []


def _preimage(M: IntMatrix, target_rows, n: int) -> tuple:
    """HNF of {x in Z^n : M x in span(target_rows)}."""
    m = M.nrows
    stacked = [list(r) for r in M.transpose().entries] + [[-v for v in r] for r in target_rows]
    if not stacked:
        return ()
    K = left_kernel(IntMatrix.from_rows(stacked, m))
    return _span([r[:n] for r in K.entries], n)


def _as_matrix(f, src: FiniteModule, dst: FiniteModule) -> IntMatrix:
    if isinstance(f, ZeroMap):
        return IntMatrix.zero(dst.rank, src.rank)
    if isinstance(f, IdentityMap):
        if src.rank != dst.rank:
            raise DimensionMismatch("identity between modules of different rank")
        return IntMatrix.identity(src.rank)
    if isinstance(f, IntMatrix):
        if (f.nrows, f.ncols) != (dst.rank, src.rank):
            raise DimensionMismatch(f"map is {f.nrows}x{f.ncols}, expected {dst.rank}x{src.rank}")
        return f
    raise ValidationError(f"unsupported map {f!r} between finite modules")


def is_short_exact(A, B, C, p, r) -> tuple[bool, str]:
    """Is 0 -> A -p-> B -r-> C -> 0 exact?  Returns (verdict, reason)."""
    A, B, C = module_of(A), module_of(B), module_of(C)
    if any(isinstance(X, AdelicTag) for X in (A, B, C)):
        return _symbolic_exact(A, B, C, p, r)
    P, R = _as_matrix(p, A, B), _as_matrix(r, B, C)
    relA, relB, relC = A.relation_rows(), B.relation_rows(), C.relation_rows()
    spanB, spanC = _span(relB, B.rank), _span(relC, C.rank)
    # well defined on the quotients
    if _span(relB + _image_rows(P, relA), B.rank) != spanB:
        return False, "p does not respect relations"
    if _span(relC + _image_rows(R, relB), C.rank) != spanC:
        return False, "r does not respect relations"
    if _preimage(P, relB, A.rank) != _span(relA, A.rank):
        return False, "p is not injective"
    if _span(relB + _columns(P), B.rank) != _preimage(R, relC, B.rank):
        return False, "im p != ker r"
    full = _span([[int(i == j) for j in range(C.rank)] for i in range(C.rank)], C.rank)
    if _span(relC + _columns(R), C.rank) != full:
        return False, "r is not surjective"
    return True, "exact"


def _symbolic_exact(A, B, C, p, r) -> tuple[bool, str]:
    if not (A == ZERO_MODULE and isinstance(B, AdelicTag) and B == C):
        return False, "symbolic sequences must have the shape 0 -> X -> X"
    if not isinstance(p, ZeroMap):
        return False, "injection out of 0 must be the zero map"
    if isinstance(r, IdentityMap):
        return True, "exact"
    if isinstance(r, MulMap):
        try:
            r.idele.validate()
        except Exception as exc:  # noqa: BLE001 - any validation failure means not invertible
            return False, f"multiplier not invertible: {exc}"
        return True, "exact"
    return False, f"unsupported symbolic map {r!r}"


# ---------------------------------------------------------------------------
# double exact sequences

@dataclass(frozen=True)
class DoubleExactSequence:
    A: Any
    B: Any
    C: Any
    yin: tuple
    yang: tuple

    def to_json(self) -> dict:
        return {"objects": [_module_json(X) for X in (self.A, self.B, self.C)],
                "yin": [_map_json(f) for f in self.yin],
                "yang": [_map_json(f) for f in self.yang]}


def _module_json(X):
    X = module_of(X)
    if isinstance(X, AdelicTag):
        return {"adelic": X.name}
    return {"diag": [str(d) for d in X.diag]}


def _map_json(f):
    if isinstance(f, ZeroMap):
        return "zero"
    if isinstance(f, IdentityMap):
        return "identity"
    if isinstance(f, MulMap):
        return {"mul": f.idele.to_json()}
    return f.to_json()


@dataclass(frozen=True)
class DesReport:
    valid: bool
    degenerate: bool
    reason: str = ""

    def __bool__(self):
        return self.valid


def validate_des(d: DoubleExactSequence) -> DesReport:
    ok1, why1 = is_short_exact(d.A, d.B, d.C, *d.yin)
    ok2, why2 = is_short_exact(d.A, d.B, d.C, *d.yang)
    valid = ok1 and ok2
    reason = "ok" if valid else ("yin: " + why1 if not ok1 else "yang: " + why2)
    return DesReport(valid, valid and _same_maps(d), reason)


def _same_maps(d: DoubleExactSequence) -> bool:
    if tuple(d.yin) == tuple(d.yang):
        return True
    A, B, C = (module_of(X) for X in (d.A, d.B, d.C))
    if any(isinstance(X, AdelicTag) for X in (A, B, C)):
        return False
    return all(_as_matrix(f, s, t) == _as_matrix(g, s, t)
               for f, g, s, t in ((d.yin[0], d.yang[0], A, B), (d.yin[1], d.yang[1], B, C)))


def aut_to_des(phi, X) -> DoubleExactSequence:
    """The generator [0 ⇉ X ⇉ X] with surjections (phi, 1)."""
    M = module_of(X)
    if isinstance(M, AdelicTag):
        if not isinstance(phi, (IdentityMap, MulMap)):
            raise NotInvertible("maps on the adelic object must be identity or multiplication")
    else:
        phi = _as_matrix(phi, M, M)
        ok, why = is_short_exact(ZERO_MODULE, M, M, ZeroMap(), phi)
        if not ok:
            raise NotInvertible(f"phi is not an automorphism ({why})")
    d = DoubleExactSequence(ZERO_MODULE, X, X, (ZeroMap(), phi), (ZeroMap(), IdentityMap()))
    if not validate_des(d):
        raise NotInvertible("phi is not invertible")
    return d


# ---------------------------------------------------------------------------
# 3x3 grids

@dataclass(frozen=True)
class Grid3x3:
    objects: tuple  # 3 x 3
    rows: tuple  # three DoubleExactSequences, row i: X_i0 -> X_i1 -> X_i2
    cols: tuple  # three DoubleExactSequences, col j: X_0j -> X_1j -> X_2j

    def transpose(self) -> Grid3x3:
        objs = tuple(tuple(self.objects[j][i] for j in range(3)) for i in range(3))
        return Grid3x3(objs, self.cols, self.rows)


def _square_commutes(g: Grid3x3, side: str) -> bool:
    def hmap(i, j):
        seq = getattr(g.rows[i], side)
        return _as_matrix(seq[j], module_of(g.objects[i][j]), module_of(g.objects[i][j + 1]))

    def vmap(i, j):
        seq = getattr(g.cols[j], side)
        return _as_matrix(seq[i], module_of(g.objects[i][j]), module_of(g.objects[i + 1][j]))

    for i in range(2):
        for j in range(2):
            target = module_of(g.objects[i + 1][j + 1])
            diff_a = vmap(i, j + 1) @ hmap(i, j)
            diff_b = hmap(i + 1, j) @ vmap(i, j)
            rel = target.relation_rows()
            cols_a, cols_b = _columns(diff_a), _columns(diff_b)
            for ca, cb in zip(cols_a, cols_b):
                delta = [x - y for x, y in zip(ca, cb)]
                if any(delta) and _span(rel + [delta], target.rank) != _span(rel, target.rank):
                    return False
    return True


def validate_3x3(g: Grid3x3) -> bool:
    """All six sequences valid, objects consistent, Yin and Yang squares commute."""
    if len(g.objects) != 3 or any(len(r) != 3 for r in g.objects):
        raise DimensionMismatch("grid must be 3x3")
    for i, d in enumerate(g.rows):
        if (d.A, d.B, d.C) != tuple(g.objects[i]):
            return False
    for j, d in enumerate(g.cols):
        if (d.A, d.B, d.C) != tuple(g.objects[i][j] for i in range(3)):
            return False
    if not all(validate_des(d) for d in g.rows + g.cols):
        return False
    return _square_commutes(g, "yin") and _square_commutes(g, "yang")


def _kron(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    rows = []
    for ra in A.entries:
        for rb in B.entries:
            rows.append([a * b for a in ra for b in rb])
    return IntMatrix.from_rows(rows, A.ncols * B.ncols)


def tensor_grid(E: DoubleExactSequence, F: DoubleExactSequence) -> Grid3x3:
    """Grid with X_ij = F_i ⊗ E_j for double exact sequences of free modules."""
    Eo = [module_of(X) for X in (E.A, E.B, E.C)]
    Fo = [module_of(X) for X in (F.A, F.B, F.C)]
    if any(isinstance(X, AdelicTag) or any(X.diag) for X in Eo + Fo):
        raise ValidationError("tensor grids need free modules")
    Em = {s: [_as_matrix(getattr(E, s)[k], Eo[k], Eo[k + 1]) for k in range(2)] for s in ("yin", "yang")}
    Fm = {s: [_as_matrix(getattr(F, s)[k], Fo[k], Fo[k + 1]) for k in range(2)] for s in ("yin", "yang")}
    objs = tuple(tuple(FiniteModule.free(Fo[i].rank * Eo[j].rank) for j in range(3)) for i in range(3))
    rows, cols = [], []
    for i in range(3):
        Id = IntMatrix.identity(Fo[i].rank)
        rows.append(DoubleExactSequence(*objs[i], tuple(_kron(Id, m) for m in Em["yin"]),
                                        tuple(_kron(Id, m) for m in Em["yang"])))
    for j in range(3):
        Id = IntMatrix.identity(Eo[j].rank)
        cols.append(DoubleExactSequence(objs[0][j], objs[1][j], objs[2][j],
                                        tuple(_kron(m, Id) for m in Fm["yin"]),
                                        tuple(_kron(m, Id) for m in Fm["yang"])))
    return Grid3x3(objs, tuple(rows), tuple(cols))


# ---------------------------------------------------------------------------
# group completion

@dataclass(frozen=True)
class MonoidPresentation:
    generators: int
    relations: tuple = field(default_factory=tuple)  # pairs (u, v) of N-vectors, u = v

    def __post_init__(self):
        for u, v in self.relations:
            if len(u) != self.generators or len(v) != self.generators:
                raise DimensionMismatch("relation length differs from generator count")
            if any(x < 0 for x in list(u) + list(v)):
                raise ValidationError("monoid words must have nonnegative exponents")


def group_completion(m: MonoidPresentation) -> list[int]:
    """Invariant factors of GC(M): Z^k / span(u - v); 0 stands for a copy of Z."""
    rows = [[a - b for a, b in zip(u, v)] for u, v in m.relations]
    return cokernel_invariants(IntMatrix.from_rows(rows, m.generators))


# ---------------------------------------------------------------------------
# Swan generators

@dataclass(frozen=True)
class SwanSummand:
    P: Any
    phi: tuple  # sorted ((component, place), InfiniteComponent) pairs; missing = 1
    Q: Any


@dataclass(frozen=True)
class SwanElement:
    """A formal sum of Swan generators [P, phi, Q]."""

    summands: tuple

    @classmethod
    def single(cls, P, phi, Q) -> SwanElement:
        return cls((SwanSummand(P, _freeze(phi), Q),))


def _freeze(phi) -> tuple:
    if isinstance(phi, dict):
        return tuple(sorted(phi.items(), key=lambda kv: kv[0]))
    return tuple(phi)


def swan_add(s1: SwanElement, s2: SwanElement) -> SwanElement:
    """Direct sum [P ⊕ P', phi ⊕ phi', Q ⊕ Q']."""
    return SwanElement(s1.summands + s2.summands)


def _phi_product(psi: tuple, phi: tuple) -> tuple:
    a, b = dict(psi), dict(phi)
    out = {}
    for k in set(a) | set(b):
        if k in a and k in b:
            out[k] = a[k] * b[k]
        else:
            out[k] = a.get(k, b.get(k))
    return _freeze(out)


def swan_compose(s1: SwanElement, s2: SwanElement) -> SwanElement:
    """[P, phi, Q] then [Q, psi, R] gives [P, psi phi, R], summand by summand."""
    if len(s1.summands) != len(s2.summands):
        raise MiddleMismatch("different numbers of summands")
    out = []
    for a, b in zip(s1.summands, s2.summands):
        if a.Q != b.P:
            raise MiddleMismatch("middle objects differ")
        out.append(SwanSummand(a.P, _phi_product(b.phi, a.phi), b.Q))
    return SwanElement(tuple(out))
