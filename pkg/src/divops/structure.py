"""Kernels, centralizers, nil degree, free-module decomposition and rigidity.

Subalgebras are described by exponent patterns on the normal form.  Kinds
``a1``..``a8`` are centralizer-type subalgebras of D(P_n); ``b1``..``b4`` are
kernels of divided powers acting on P_n.  Every pattern predicate has a
direct counterpart (``member_direct``) that evaluates the defining
commutators or actions.

For ``a1`` at k >= 1, ``a2`` with some k_j >= 1 and ``a8`` the closed form
is only contained in the kernel: in characteristic p the Euler operator
x d commutes with d^[p] and with all of F_x^k(D(P_n)), and kernels such as
that of ad(d^[2]) at p = 2 contain x + x^2 d without either term.  These
kernels are not spanned by monomials, so ``member_direct`` is the
authoritative test there and ``SubalgebraSpec.exact`` reports False.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as cartesian
from typing import Sequence

from .descent import Descent, DerivationSpec, verify_descent
from .field import check_prime
from .frobenius import FrobMap, frob_apply
from .report import Report
from .ring import (
    DiffOp,
    Poly,
    ShapeError,
    ad_dpk,
    ad_x,
    ad_x_power,
    apply,
    max_beta,
    mul,
)

KINDS = {
    "a1": "ker ad(d_i^[p^k])",
    "a2": "intersection over j of ker ad(d_j^[p^(k_j)])",
    "a3": "intersection over k of ker ad(d_i^[p^k])",
    "a4": "intersection over i, k of ker ad(d_i^[p^k])",
    "a5": "ker ad(x_i^(p^k))",
    "a6": "intersection over j of ker ad(x_j^(p^(k_j)))",
    "a7": "intersection over i of ker ad(x_i)",
    "a8": "centralizer of F_x^k(D(P_n))",
    "b1": "ker of d_i^[p^k] on P_n",
    "b2": "intersection over j of ker d_j^[p^(k_j)] on P_n",
    "b3": "intersection over k of ker d_i^[p^k] on P_n",
    "b4": "intersection over i, k of ker d_i^[p^k] on P_n",
}

_NEEDS_AXIS = {"a1", "a3", "a5", "b1", "b3"}
_NEEDS_LEVEL = {"a1", "a5", "a8", "b1"}
_NEEDS_LEVELS = {"a2", "a6", "b2"}


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class SubalgebraSpec:
    """One closed-form subalgebra.  ``axis`` is 1-based."""

    kind: str
    p: int
    n: int
    axis: int | None = None
    level: int | None = None
    levels: tuple[int, ...] | None = None

    def __post_init__(self):
        check_prime(self.p)
        if self.kind not in KINDS:
            raise StructureError(f"unknown kind {self.kind!r}; expected one of {sorted(KINDS)}")
        if self.n < 1:
            raise StructureError("n must be >= 1")
        if self.kind in _NEEDS_AXIS and not (self.axis and 1 <= self.axis <= self.n):
            raise StructureError(f"{self.kind} needs an axis in 1..{self.n}")
        if self.kind in _NEEDS_LEVEL and (self.level is None or self.level < 0):
            raise StructureError(f"{self.kind} needs a level k >= 0")
        if self.kind == "a8" and self.level < 1:
            raise StructureError("a8 needs k >= 1")
        if self.kind in _NEEDS_LEVELS:
            if self.levels is None or len(self.levels) != self.n or any(k < 0 for k in self.levels):
                raise StructureError(f"{self.kind} needs {self.n} levels >= 0")
            object.__setattr__(self, "levels", tuple(self.levels))

    @property
    def exact(self) -> bool:
        """Whether the exponent pattern describes the whole kernel."""
        if self.kind == "a1":
            return self.level == 0
        if self.kind == "a2":
            return not any(self.levels)
        return self.kind != "a8"

    @property
    def description(self) -> str:
        return KINDS[self.kind]

    def term_ok(self, alpha: Sequence[int], beta: Sequence[int]) -> bool:
        """Exponent-pattern test for a single monomial x^alpha d^[beta]."""
        p, kind = self.p, self.kind
        i = self.axis - 1 if self.axis else None
        k = self.level
        if kind == "a1":
            return alpha[i] % p ** (k + 1) == 0
        if kind == "a2":
            return all(a % p ** (kj + 1) == 0 for a, kj in zip(alpha, self.levels))
        if kind == "a3":
            return alpha[i] == 0
        if kind == "a4":
            return not any(alpha)
        if kind == "a5":
            return beta[i] < p**k
        if kind == "a6":
            return all(b < p**kj for b, kj in zip(beta, self.levels))
        if kind == "a7":
            return not any(beta)
        if kind == "a8":
            return not any(alpha) and all(b < p**k for b in beta)
        if any(beta):
            return False
        if kind == "b1":
            return _digit(alpha[i], k, p) == 0
        if kind == "b2":
            return all(_digit(a, kj, p) == 0 for a, kj in zip(alpha, self.levels))
        if kind == "b3":
            return alpha[i] == 0
        return not any(alpha)


def _digit(m: int, k: int, p: int) -> int:
    return (m // p**k) % p


def _check_shape(spec: SubalgebraSpec, a: DiffOp):
    if (a.p, a.n) != (spec.p, spec.n):
        raise ShapeError(f"element over (p={a.p}, n={a.n}) tested against spec over (p={spec.p}, n={spec.n})")


def member(spec: SubalgebraSpec, a: DiffOp) -> bool:
    """Pattern test: every term of ``a`` matches the closed form."""
    _check_shape(spec, a)
    return all(spec.term_ok(al, be) for (al, be), _ in a.items())


def _max_alpha(a: DiffOp, i: int) -> int:
    return max((al[i] for (al, _), _ in a.items()), default=0)


def _max_order(a: DiffOp, i: int) -> int:
    return max((al[i] + be[i] for (al, be), _ in a.items()), default=0)


def _levels_to_cover(m: int, p: int, start: int = 0) -> range:
    # cumulative from level 0: commuting with d^[p^t], t <= top, forces
    # alpha_i = 0 mod p^(top+1) > m
    top = start
    while p ** (top + 1) <= m:
        top += 1
    return range(start, top + 1)


def _levels_past(bound: int, p: int, start: int) -> range:
    # once p^t > alpha_i + beta_i for every term, [d^[p^t], a] is the level-t
    # commutator shifted uniformly in d, so one such level stands for all
    top = start
    while p**top <= bound:
        top += 1
    return range(start, top + 1)


def member_direct(spec: SubalgebraSpec, a: DiffOp) -> bool:
    """Evaluate the defining commutators or actions on ``a``.

    Infinite intersections are cut at a finite level chosen from the
    exponents of ``a``; past it every further condition is implied.
    """
    _check_shape(spec, a)
    p, n, kind = spec.p, spec.n, spec.kind
    i = spec.axis
    k = spec.level
    if kind == "a1":
        return not ad_dpk(i, k, a)
    if kind == "a2":
        return all(not ad_dpk(j + 1, kj, a) for j, kj in enumerate(spec.levels))
    if kind == "a3":
        return all(not ad_dpk(i, t, a) for t in _levels_to_cover(_max_alpha(a, i - 1), p))
    if kind == "a4":
        return all(not ad_dpk(j + 1, t, a) for j in range(n) for t in _levels_to_cover(_max_alpha(a, j), p))
    if kind == "a5":
        return not ad_x_power(i, p**k, a)
    if kind == "a6":
        return all(not ad_x_power(j + 1, p**kj, a) for j, kj in enumerate(spec.levels))
    if kind == "a7":
        return all(not ad_x(j + 1, a) for j in range(n))
    if kind == "a8":
        # generators of F_x^k(D(P_n)): x_j^(p^k) and d_j^[p^(k+l)], l >= 0
        for j in range(n):
            if ad_x_power(j + 1, p**k, a):
                return False
            for t in _levels_past(_max_order(a, j), p, k):
                if ad_dpk(j + 1, t, a):
                    return False
        return True
    # b-kinds: a must be a polynomial killed by the operators
    if not a.in_polynomials():
        return False
    f = Poly.from_op(a)
    if kind == "b1":
        return not apply(DiffOp.d(i, p**k, p, n), f)
    if kind == "b2":
        return all(not apply(DiffOp.d(j + 1, p**kj, p, n), f) for j, kj in enumerate(spec.levels))
    if kind == "b3":
        return all(not apply(DiffOp.d(i, p**t, p, n), f) for t in _levels_to_cover(_max_alpha(a, i - 1), p))
    return all(
        not apply(DiffOp.d(j + 1, p**t, p, n), f) for j in range(n) for t in _levels_to_cover(_max_alpha(a, j), p)
    )


def _monomials_upto(n: int, bound: int):
    for total in range(bound + 1):
        for cut in _compositions(total, 2 * n):
            yield cut[:n], cut[n:]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def basis_upto(spec: SubalgebraSpec, degree_bound: int) -> list[DiffOp]:
    """Monomials of the closed form with canonical degree <= bound.

    Ordered by degree, then by the concatenated exponent vector.
    """
    if degree_bound < 0:
        raise StructureError("degree bound must be >= 0")
    found = [(al, be) for al, be in _monomials_upto(spec.n, degree_bound) if spec.term_ok(al, be)]
    found.sort(key=lambda t: (sum(t[0]) + sum(t[1]), t[0] + t[1]))
    return [DiffOp(spec.p, spec.n, {(al, be): 1}) for al, be in found]


def nil_degree(a: DiffOp):
    """Least alpha with a in N_alpha = sum over beta <= alpha of P_n d^[beta]."""
    if not a:
        raise StructureError("nil degree of zero is undefined")
    return max_beta(a)


def shift_identity_report(p: int, k: int, jmax: int) -> Report:
    """[d^[j], x^(p^k)] = d^[j - p^k] (zero when j < p^k) for all j < jmax."""
    report = Report(f"commutator shift identity k={k}")
    q = p**k
    x = DiffOp.x(1, p, 1, q)
    for j in range(jmax):
        lhs = mul(DiffOp.d(1, j, p, 1), x) - mul(x, DiffOp.d(1, j, p, 1))
        rhs = DiffOp.d(1, j - q, p, 1) if j >= q else DiffOp.zero(p, 1)
        report.check(lhs == rhs, "shift", (j,), str(lhs))
    return report


def check_polynomial_kernel(p: int, n: int, degree_bound: int) -> Report:
    """ad(x_i) is locally nilpotent and the common kernel is P_n, on all monomials of bounded degree."""
    report = Report("locally nilpotent ad(x), kernel P_n")
    report.notes.append(f"checked on monomials of canonical degree <= {degree_bound}")
    spec = SubalgebraSpec("a7", p, n)
    for alpha, beta in _monomials_upto(n, degree_bound):
        a = DiffOp(p, n, {(alpha, beta): 1})
        for i in range(n):
            # ad(x_i) lowers beta_i by one, so beta_i + 1 steps must kill a
            cur = a
            for _ in range(beta[i] + 1):
                cur = ad_x(i + 1, cur)
            report.check(not cur, "nilpotent", (i + 1, alpha, beta))
        report.check(member_direct(spec, a) == (not any(beta)), "kernel", (alpha, beta))
    return report


# free-module decomposition over G(D(P_n)), s = 1


def _split(v: Sequence[int], p: int):
    return tuple(x % p for x in v), tuple(x // p for x in v)


def decompose_over_frobenius_image(G: FrobMap, a: DiffOp, side: str = "left") -> dict:
    """Coefficients c_(alpha, beta) with a = sum G(c) x^alpha d^[beta] (``left``)
    or a = sum x^alpha d^[beta] G(c) (``right``), alpha, beta in C_1^n.

    The leading term x^(alpha + p gamma) d^[beta + p delta] of the remainder
    (largest floor(B/p)) is removed by G(x^gamma d^[delta]) x^alpha d^[beta];
    every other term this produces has a strictly smaller floor(B/p).
    """
    if G.s != 1:
        raise StructureError("decomposition is over the image of a level-1 Frobenius")
    if (a.p, a.n) != (G.p, G.n):
        raise ShapeError("element and map live over different rings")
    if side not in ("left", "right"):
        raise StructureError("side must be 'left' or 'right'")
    p, n = a.p, a.n
    keys = [(al, be) for al in cartesian(range(p), repeat=n) for be in cartesian(range(p), repeat=n)]
    coeffs: dict = {k: {} for k in keys}
    rest = dict(a.terms)
    guard = 0
    while rest:
        guard += 1
        if guard > 10**6:
            raise StructureError("decomposition did not terminate")

        def rank(key):
            d = tuple(b // p for b in key[1])
            return (sum(d), d, key)

        (A, B) = max(rest, key=rank)
        c = rest[(A, B)]
        alpha, gamma = _split(A, p)
        beta, delta = _split(B, p)
        base = DiffOp(p, n, {(alpha, beta): 1})
        image = frob_apply(G, DiffOp(p, n, {(gamma, delta): 1}))
        piece = mul(image, base) if side == "left" else mul(base, image)
        for key, v in piece.terms.items():
            w = (rest.get(key, 0) - c * v) % p
            if w:
                rest[key] = w
            else:
                rest.pop(key, None)
        slot = coeffs[(alpha, beta)]
        slot[(gamma, delta)] = (slot.get((gamma, delta), 0) + c) % p
    return {k: DiffOp(p, n, v) for k, v in coeffs.items()}


def reconstruct(G: FrobMap, coeffs: dict, side: str = "left") -> DiffOp:
    out = DiffOp.zero(G.p, G.n)
    for (alpha, beta), c in coeffs.items():
        if not c:
            continue
        base = DiffOp(G.p, G.n, {(tuple(alpha), tuple(beta)): 1})
        img = frob_apply(G, c)
        out = out + (mul(img, base) if side == "left" else mul(base, img))
    return out


# rigidity


def rigidity_check(candidate_gens: Sequence[Sequence[DiffOp]], bounds: Sequence[int] | None = None) -> Report:
    """Does the table g[i][k] (standing for y_i^[p^k]) coincide with d_i^[p^k]?

    Necessary conditions are checked level by level as in the uniqueness
    argument: delta_j(g_ik) = [i == j] y_i^[p^k - 1] against the candidate's
    own lower generators, commutation, and g^p = 0.  A table that is not
    canonical yet passes every condition would contradict uniqueness and is
    reported as such.
    """
    rows = [list(r) for r in candidate_gens]
    if not rows or not any(rows):
        raise StructureError("empty generator table")
    first = next(g for r in rows for g in r)
    p, n = first.p, first.n
    if len(rows) != n:
        raise ShapeError(f"table has {len(rows)} rows for n={n}")
    if bounds is not None:
        if len(bounds) != n:
            raise ShapeError("one bound per axis is required")
        rows = [r[:b] for r, b in zip(rows, bounds)]
    report = Report("rigidity")
    desc = Descent(p, n, rows)
    axioms = verify_descent(desc, DerivationSpec(n))
    report.merge(axioms)
    if not axioms.ok:
        report.notes.append(f"first violated axiom: {axioms.failures[0]}")
    canonical = all(g == DiffOp.d(i + 1, p**k, p, n) for i, r in enumerate(rows) for k, g in enumerate(r))
    if axioms.ok:
        report.check(canonical, "uniqueness", (), "non-canonical table satisfies every descent axiom")
    else:
        report.check(not canonical, "internal", (), "canonical table failed an axiom")
    return report


def perturbation_samples(p: int, n: int, depth: int, count: int, rng) -> list[tuple[int, int, DiffOp]]:
    """Nonzero perturbations (axis, level, e) to add to a canonical generator.

    Mixes generic elements, pure polynomials, scalars and K[x^(p^k)]-multiples
    of lower divided powers, so every branch of the uniqueness argument is hit.
    """
    from .ring import random_element

    out = []
    while len(out) < count:
        i = rng.randrange(n)
        k = rng.randrange(depth)
        style = rng.randrange(4)
        if style == 0:
            e = random_element(p, n, rng, max_terms=3, max_degree=2 * p**k + 1)
        elif style == 1:
            e = DiffOp(p, n, {(tuple(rng.randint(0, p**k) for _ in range(n)), (0,) * n): rng.randint(1, p - 1)})
        elif style == 2:
            e = DiffOp.scalar(rng.randint(1, p - 1), p, n)
        else:
            alpha = tuple(p**k * rng.randint(1, 2) if j == i else 0 for j in range(n))
            beta = tuple(rng.randrange(p**k) if j == i else 0 for j in range(n))
            e = DiffOp(p, n, {(alpha, beta): rng.randint(1, p - 1)})
        if e:
            out.append((i, k, e))
    return out


def perturbed_table(p: int, n: int, depth: int, i: int, k: int, e: DiffOp) -> list[list[DiffOp]]:
    rows = [[DiffOp.d(j + 1, p**t, p, n) for t in range(depth)] for j in range(n)]
    rows[i][k] = rows[i][k] + e
    return rows


__all__ = [
    "KINDS",
    "StructureError",
    "SubalgebraSpec",
    "basis_upto",
    "check_polynomial_kernel",
    "decompose_over_frobenius_image",
    "member",
    "member_direct",
    "nil_degree",
    "perturbation_samples",
    "perturbed_table",
    "reconstruct",
    "rigidity_check",
    "shift_identity_report",
]
