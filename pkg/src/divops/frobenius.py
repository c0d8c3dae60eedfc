"""Frobenius endomorphisms of D(P_n).

Every ring endomorphism G with G(f) = f^(p^s) on P_n and G(D_n) inside D_n
is determined by the images y_i^[p^k] = G(d_i^[p^k]), and these are
parameterised by matrices u = (u_ik) with entries in the span of d^[alpha],
0 != alpha in the cube C_s^n = {alpha : all alpha_i < p^s}:

    y_i^[1]   = d_i^[p^s] + u_i0
    y_i^[p^k] = u_ik + J_i^(p^s) y_i^[p^k - 1]            (k >= 1)

where J_i is the dual integration d^[alpha] -> d^[alpha + e_i] and
y_i^[p^k - 1] = prod_(l<k) (y_i^[p^l])^(p-1) / (p-1)!.  The inverse reads
u_ik = G(d_i^[p^k]) - J_i^(p^s) G(d_i^[p^k - 1]).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .field import check_prime, digits, inv_factorial_int
from .report import Report
from .ring import (
    DiffOp,
    Poly,
    ShapeError,
    ad_x,
    commutator,
    mul,
    power,
    random_element,
    scalar_mul,
)


class FrobeniusError(ValueError):
    pass


class DepthError(FrobeniusError):
    """A generator image beyond the known depth was needed."""


def canonical_frobenius(a: DiffOp, s: int = 1) -> DiffOp:
    """F_x^s : x^alpha d^[beta] -> x^(p^s alpha) d^[p^s beta]."""
    if s < 0:
        raise ValueError("s must be >= 0")
    q = a.p**s
    return DiffOp(a.p, a.n, {(tuple(q * v for v in al), tuple(q * v for v in be)): c for (al, be), c in a.items()})


def dual_integration(i: int, a: DiffOp, times: int = 1) -> DiffOp:
    """J_i^times on D_n: d^[alpha] -> d^[alpha + times e_i]."""
    if not 1 <= i <= a.n:
        raise IndexError(f"axis {i} out of range 1..{a.n}")
    if not a.in_scalar_ops():
        raise FrobeniusError("dual integration is only defined on D_n")
    ax = i - 1
    return DiffOp(a.p, a.n, {(al, be[:ax] + (be[ax] + times,) + be[ax + 1:]): c for (al, be), c in a.items()})


def in_cube_span(a: DiffOp, s: int) -> bool:
    """a lies in the span of d^[alpha], 0 != alpha in C_s^n."""
    q = a.p**s
    for (al, be), _ in a.items():
        if any(al) or not any(be) or any(b >= q for b in be):
            return False
    return True


@dataclass(frozen=True)
class FrobParams:
    """A parameter matrix u in M_(n,s), truncated to ``depth`` columns.

    Entries past the stored columns are zero.
    """

    p: int
    n: int
    s: int
    u: tuple[tuple[DiffOp, ...], ...]

    def __post_init__(self):
        check_prime(self.p)
        if self.s < 1:
            raise FrobeniusError("level s must be >= 1")
        if len(self.u) != self.n:
            raise ShapeError(f"parameter matrix has {len(self.u)} rows, expected {self.n}")
        rows = tuple(tuple(r) for r in self.u)
        object.__setattr__(self, "u", rows)
        for i, row in enumerate(rows):
            for k, entry in enumerate(row):
                if (entry.p, entry.n) != (self.p, self.n):
                    raise ShapeError(f"u[{i + 1}][{k}] lives in a different ring")
                if not in_cube_span(entry, self.s):
                    raise FrobeniusError(f"u[{i + 1}][{k}] = {entry} is outside the admissible span")

    @classmethod
    def zero(cls, p: int, n: int, s: int = 1, depth: int = 3) -> "FrobParams":
        z = DiffOp.zero(p, n)
        return cls(p, n, s, tuple((z,) * depth for _ in range(n)))

    @classmethod
    def random(cls, p: int, n: int, s: int, depth: int, rng: random.Random, max_terms: int = 2,
               zero_prob: float = 0.3, separated: bool = False) -> "FrobParams":
        """Random sparse parameters; ``separated`` keeps row i inside K[d_i^[j]]."""
        q = p**s
        rows = []
        for i in range(n):
            row = []
            for _ in range(depth):
                terms = {}
                if rng.random() >= zero_prob:
                    for _ in range(rng.randint(1, max_terms)):
                        beta = tuple(rng.randrange(q) if not separated or j == i else 0 for j in range(n))
                        if any(beta):
                            terms[((0,) * n, beta)] = rng.randint(1, p - 1)
                row.append(DiffOp(p, n, terms))
            rows.append(tuple(row))
        return cls(p, n, s, tuple(rows))

    @property
    def depth(self) -> int:
        return max((len(r) for r in self.u), default=0)

    def entry(self, i: int, k: int) -> DiffOp:
        """u_(i+1, k) for 0-based row i; zero past the stored columns."""
        row = self.u[i]
        return row[k] if k < len(row) else DiffOp.zero(self.p, self.n)

    def padded(self, depth: int) -> "FrobParams":
        return FrobParams(self.p, self.n, self.s, tuple(tuple(self.entry(i, k) for k in range(depth)) for i in range(self.n)))

    def __eq__(self, other):
        if not isinstance(other, FrobParams):
            return NotImplemented
        if (self.p, self.n, self.s) != (other.p, other.n, other.s):
            return False
        depth = max(self.depth, other.depth)
        return all(self.entry(i, k) == other.entry(i, k) for i in range(self.n) for k in range(depth))

    def __hash__(self):
        return hash((self.p, self.n, self.s))


class FrobMap:
    """A ring endomorphism x_i -> x_i^(p^s), d_i^[p^k] -> images[i][k].

    Built from parameters (``build_gu``) the image table extends itself on
    demand; built from an explicit table (``from_images``) it cannot, and
    reaching past the table raises ``DepthError``.
    """

    def __init__(self, p: int, n: int, s: int, images: Sequence[Sequence[DiffOp]],
                 params: FrobParams | None = None, extend: bool = True):
        self.p = check_prime(p)
        self.n = n
        self.s = s
        if len(images) != n:
            raise ShapeError("image table must have one row per variable")
        self._gens = [list(row) for row in images]
        self.params = params
        self.extend = extend and params is not None
        self._axis_memo: dict[tuple[int, int], DiffOp] = {}
        self._memo: dict[tuple[int, ...], DiffOp] = {}

    @classmethod
    def from_images(cls, p: int, n: int, s: int, images: Sequence[Sequence[DiffOp]]) -> "FrobMap":
        return cls(p, n, s, images, params=None, extend=False)

    @property
    def depth(self) -> int:
        return min(len(row) for row in self._gens)

    def generator(self, i: int, k: int) -> DiffOp:
        """G(d_(i+1)^[p^k]) for 0-based axis i."""
        row = self._gens[i]
        while len(row) <= k:
            if not self.extend:
                raise DepthError(f"no image for d_{i + 1}^[{self.p}^{k}] (depth {len(row)})")
            row.append(self._next_generator(i, len(row)))
        return row[k]

    def _next_generator(self, i: int, k: int) -> DiffOp:
        u = self.params.entry(i, k)
        if k == 0:
            return DiffOp.d(i + 1, self.p**self.s, self.p, self.n) + u
        low = self.axis_image(i, self.p**k - 1)
        return u + dual_integration(i + 1, low, self.p**self.s)

    def generators(self, depth: int | None = None) -> tuple[tuple[DiffOp, ...], ...]:
        depth = self.depth if depth is None else depth
        return tuple(tuple(self.generator(i, k) for k in range(depth)) for i in range(self.n))

    def axis_image(self, i: int, j: int) -> DiffOp:
        """G(d_(i+1)^[j]) = prod_k G(d^[p^k])^(j_k) / j_k!."""
        key = (i, j)
        hit = self._axis_memo.get(key)
        if hit is not None:
            return hit
        result = DiffOp.one(self.p, self.n)
        for k, dk in enumerate(digits(j, self.p)):
            if dk:
                g = self.generator(i, k)
                result = mul(result, scalar_mul(inv_factorial_int(dk, self.p), power(g, dk)))
        self._axis_memo[key] = result
        return result

    def image_d(self, beta: Sequence[int]) -> DiffOp:
        beta = tuple(beta)
        hit = self._memo.get(beta)
        if hit is not None:
            return hit
        result = DiffOp.one(self.p, self.n)
        for i, b in enumerate(beta):
            if b:
                result = mul(result, self.axis_image(i, b))
        self._memo[beta] = result
        return result

    def image_x(self, alpha: Sequence[int]) -> DiffOp:
        q = self.p**self.s
        return DiffOp(self.p, self.n, {(tuple(q * a for a in alpha), (0,) * self.n): 1})

    def __call__(self, a: DiffOp) -> DiffOp:
        return frob_apply(self, a)

    def __repr__(self):
        return f"FrobMap(p={self.p}, n={self.n}, s={self.s}, depth={self.depth})"


def build_gu(params: FrobParams, depth: int | None = None) -> FrobMap:
    """G_u, with generator images pre-built to ``depth`` (default: the parameter depth, at least 3)."""
    G = FrobMap(params.p, params.n, params.s, [[] for _ in range(params.n)], params=params, extend=True)
    depth = max(params.depth, 3) if depth is None else depth
    for i in range(params.n):
        for k in range(depth):
            G.generator(i, k)
    return G


def frob_apply(G: FrobMap, a: DiffOp) -> DiffOp:
    """G(x^alpha d^[beta]) = x^(p^s alpha) * G(d^[beta]), extended linearly."""
    if (a.p, a.n) != (G.p, G.n):
        raise ShapeError("element and map live over different rings")
    out = DiffOp.zero(a.p, a.n)
    for (alpha, beta), c in a.items():
        img = G.image_d(beta)
        if any(alpha):
            img = mul(G.image_x(alpha), img)
        out = out + scalar_mul(c, img)
    return out


def recover_u(G: FrobMap | Sequence[Sequence[DiffOp]], s: int | None = None, depth: int | None = None) -> FrobParams:
    """u_ik = G(d_i^[p^k]) - J_i^(p^s) G(d_i^[p^k - 1]).

    ``G`` may be a ``FrobMap`` or a raw table of generator images, in which
    case ``s`` is required.
    """
    if not isinstance(G, FrobMap):
        table = [list(row) for row in G]
        if s is None:
            raise FrobeniusError("level s is required for a raw image table")
        first = next(g for row in table for g in row)
        G = FrobMap.from_images(first.p, len(table), s, table)
    elif s is not None and s != G.s:
        raise FrobeniusError(f"map has level {G.s}, not {s}")
    depth = G.depth if depth is None else depth
    q = G.p**G.s
    rows = []
    for i in range(G.n):
        row = []
        for k in range(depth):
            top = G.generator(i, k)
            if not top.in_scalar_ops():
                raise FrobeniusError(f"image of d_{i + 1}^[p^{k}] is outside D_n")
            low = G.axis_image(i, G.p**k - 1)
            if not low.in_scalar_ops():
                raise FrobeniusError(f"image of d_{i + 1}^[p^{k} - 1] is outside D_n")
            row.append(top - dual_integration(i + 1, low, q))
        rows.append(tuple(row))
    return FrobParams(G.p, G.n, G.s, tuple(rows))


def _relation_checks(report: Report, G: FrobMap, depth: int):
    p, n = G.p, G.n
    zero = DiffOp.zero(p, n)
    xs = [G.image_x(tuple(1 if j == i else 0 for j in range(n))) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            report.check(not commutator(xs[i], xs[j]), "[x_i,x_j]=0", (i + 1, j + 1))
    gens = {(i, k): G.generator(i, k) for i in range(n) for k in range(depth)}
    keys = sorted(gens)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            report.check(not commutator(gens[keys[a]], gens[keys[b]]), "[d,d]=0",
                         ((keys[a][0] + 1, keys[a][1]), (keys[b][0] + 1, keys[b][1])))
    for (i, k), g in gens.items():
        report.check(not power(g, p), "d^p=0", (i + 1, k))
        for j in range(n):
            lhs = commutator(g, xs[j])
            rhs = G.axis_image(i, p**k - 1) if i == j else zero
            report.check(lhs == rhs, "[d,x]", ((i + 1, k), j + 1))


def verify_homomorphism(G: FrobMap, depth: int = 3, samples: int = 200, seed: int = 0,
                        max_degree: int = 4) -> Report:
    """Images of the defining relations up to ``depth`` plus G(ab) = G(a)G(b) on random pairs."""
    report = Report("homomorphism")
    usable = depth
    if not G.extend:
        usable = min(depth, G.depth)
        if usable < depth:
            report.notes.append(f"image table only reaches depth {usable}")
    report.notes.append(f"relations checked for k < {usable}; {samples} random pairs")
    try:
        _relation_checks(report, G, usable)
    except DepthError as exc:
        report.check(False, "depth", (), str(exc))
    rng = random.Random(seed)
    # keep every product inside the available digits
    cap = max((G.p**usable - 1) // 2, 0)
    for t in range(samples):
        a = random_element(G.p, G.n, rng, max_terms=3, max_degree=max_degree, max_d=cap)
        b = random_element(G.p, G.n, rng, max_terms=3, max_degree=max_degree, max_d=cap)
        try:
            ok = frob_apply(G, mul(a, b)) == mul(frob_apply(G, a), frob_apply(G, b))
        except DepthError as exc:
            report.check(False, "depth", (t,), str(exc))
            continue
        report.check(ok, "G(ab)=G(a)G(b)", (t,), f"a={a}; b={b}")
    return report


def verify_frobenius_axioms(G: FrobMap, depth: int = 3, degree_bound: int = 4, seed: int = 0) -> Report:
    """Conditions of a Frobenius with P_n' = P_n, D' = D_n and y_i = d_i.

    1. G(f) = f^(p^s) on P_n (checked on monomials and random polynomials);
    2. ad(x_i) locally nilpotent with common kernel P_n (bounded degree);
    3. G(D_n) in D_n, y_i^p = 0, [y_i, x_j] = delta_ij and
       [G^k(y_i), x_j] = 0 for i != j, 1 <= k <= depth.
    """
    from .structure import check_polynomial_kernel

    p, n = G.p, G.n
    q = p**G.s
    report = Report("frobenius axioms")
    report.notes.append(f"condition 3 checked with witness y_i = d_i for 1 <= k <= {depth} only")
    rng = random.Random(seed)

    # condition 1
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(n))
        report.check(frob_apply(G, DiffOp(p, n, {(e, (0,) * n): 1})) == DiffOp.x(i + 1, p, n, q),
                     "cond1:G(x_i)", (i + 1,))
    for t in range(10):
        f = Poly(p, n, {tuple(rng.randint(0, degree_bound) for _ in range(n)): rng.randint(1, p - 1) for _ in range(3)})
        report.check(frob_apply(G, f.to_op()) == (f**q).to_op(), "cond1:G(f)=f^q", (t,), str(f))

    # condition 2
    report.merge(check_polynomial_kernel(p, n, degree_bound))

    # condition 3
    levels = depth if G.extend else min(depth, G.depth)
    for i in range(n):
        for k in range(levels):
            img = G.generator(i, k)
            report.check(img.in_scalar_ops(), "cond3:G(D_n) in D_n", (i + 1, k), str(img))
    for i in range(n):
        y = DiffOp.d(i + 1, 1, p, n)
        report.check(not power(y, p), "cond3:y^p=0", (i + 1,))
        for j in range(n):
            want = DiffOp.one(p, n) if i == j else DiffOp.zero(p, n)
            report.check(commutator(y, DiffOp.x(j + 1, p, n)) == want, "cond3:[y_i,x_j]", (i + 1, j + 1))
        iterate = y
        for k in range(1, depth + 1):
            try:
                iterate = frob_apply(G, iterate)
            except DepthError as exc:
                report.check(False, "cond3:depth", (i + 1, k), str(exc))
                break
            for j in range(n):
                if j != i:
                    report.check(not ad_x(j + 1, iterate), "cond3:[G^k(y_i),x_j]=0", (i + 1, k, j + 1))
    return report
