"""Iterative delta-descents over commutative subalgebras of D(P_n).

A descent of exponent (d_1..d_n) is stored through its generators
g[i][k] = y_i^[p^k]; every other member is recovered as

    y^[alpha] = prod_i prod_k g[i][k]^(alpha_ik) / alpha_ik!

over the base-p digits alpha_ik of alpha_i.  Arbitrary multi-sequences (for
instance perturbed descents, which need not be iterative) are held
explicitly by ``MultiSequence``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as cartesian
from typing import Callable, Mapping, Sequence, Union

from .field import binom_int, digits, inv_factorial_int, multi_binom_int
from .report import Report
from .ring import DiffOp, MultiIndex, ShapeError, mul, power, scalar_mul, shift_d, shift_d_multi


class DescentError(ValueError):
    pass


@dataclass(frozen=True)
class DerivationSpec:
    """The commuting derivations delta_i = -ad(x_i^(p^s)) of D(P_n).

    ``s == 0`` is the plain inner derivation -ad(x_i).  On normal forms
    delta_i lowers the i-th divided-power exponent by p^s.
    """

    n: int
    s: int = 0
    axes: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.n < 1 or self.s < 0:
            raise ValueError("need n >= 1 and s >= 0")
        if self.axes is not None:
            axes = tuple(sorted(set(self.axes)))
            if not axes or not all(1 <= i <= self.n for i in axes):
                raise ValueError(f"axes {self.axes} out of range 1..{self.n}")
            object.__setattr__(self, "axes", axes)

    @property
    def kind(self) -> str:
        return "neg_ad_x" if self.s == 0 else "neg_ad_x_pow_ps"

    @property
    def active_axes(self) -> tuple[int, ...]:
        return self.axes if self.axes is not None else tuple(range(1, self.n + 1))

    def single_axis(self) -> int:
        axes = self.active_axes
        if len(axes) != 1:
            raise DescentError(f"expected a single-axis derivation, got axes {axes}")
        return axes[0]

    def apply(self, i: int, a: DiffOp, times: int = 1) -> DiffOp:
        """delta_i^times (a), 1-based axis i."""
        if a.n != self.n:
            raise ShapeError("derivation and element have different n")
        return shift_d(a, i, times * a.p**self.s)

    def apply_multi(self, alpha: Sequence[int], a: DiffOp) -> DiffOp:
        """delta^alpha (a) over all n axes."""
        if a.n != self.n:
            raise ShapeError("derivation and element have different n")
        q = a.p**self.s
        return shift_d_multi(a, [q * v for v in alpha])

    def is_constant(self, a: DiffOp) -> bool:
        return all(not self.apply(i, a) for i in self.active_axes)


def in_scalar_ops(a: DiffOp) -> bool:
    """Membership predicate for D_n = sum K d^[alpha]."""
    return a.in_scalar_ops()


Algebra = Union[str, Callable[[DiffOp], bool]]


def _predicate(algebra: Algebra) -> Callable[[DiffOp], bool]:
    if callable(algebra):
        return algebra
    if algebra == "D_n":
        return in_scalar_ops
    raise ValueError(f"unknown commutative subalgebra {algebra!r}")


class MultiSequence:
    """An explicit family {y^[alpha] : alpha in prod [0, l_i)}; y^[0] = 1."""

    def __init__(self, p: int, n: int, box: Sequence[int], elements: Mapping[MultiIndex, DiffOp], s: int = 0):
        self.p = p
        self.n = n
        self.s = s
        self.box = tuple(box)
        if len(self.box) != n:
            raise ShapeError("box length differs from n")
        self._elements = {}
        for alpha in self.indices():
            try:
                el = elements[alpha]
            except KeyError:
                raise DescentError(f"missing member {alpha}") from None
            if (el.p, el.n) != (p, n):
                raise ShapeError(f"member {alpha} lives in a different ring")
            self._elements[alpha] = el
        if self._elements[(0,) * n] != DiffOp.one(p, n):
            raise DescentError("y^[0] must be 1")

    def indices(self):
        return cartesian(*(range(l) for l in self.box))

    def contains(self, alpha: Sequence[int]) -> bool:
        return all(0 <= a < l for a, l in zip(alpha, self.box))

    def __getitem__(self, alpha) -> DiffOp:
        alpha = tuple(alpha)
        if any(a < 0 for a in alpha):
            return DiffOp.zero(self.p, self.n)
        return self._elements[alpha]

    def __eq__(self, other):
        if not isinstance(other, MultiSequence):
            return NotImplemented
        return (self.p, self.n, self.box) == (other.p, other.n, other.box) and self._elements == other._elements

    def items(self):
        for alpha in self.indices():
            yield alpha, self._elements[alpha]

    def generators(self) -> tuple[tuple[DiffOp, ...], ...]:
        """Read off y_i^[p^k] along each axis (box sides must be powers of p)."""
        gens = []
        for i, l in enumerate(self.box):
            d = _log_p(l, self.p)
            row = []
            for k in range(d):
                alpha = tuple(self.p**k if j == i else 0 for j in range(self.n))
                row.append(self._elements[alpha])
            gens.append(tuple(row))
        return tuple(gens)

    def to_descent(self) -> "Descent":
        return Descent(self.p, self.n, self.generators(), s=self.s)


def _log_p(l: int, p: int) -> int:
    d = 0
    while p**d < l:
        d += 1
    if p**d != l:
        raise DescentError(f"box side {l} is not a power of {p}")
    return d


class Descent:
    """A multi-sequence given by p-power generators, expanded on demand.

    ``gens[i][k]`` is y_{i+1}^[p^k] (0-based table, 1-based axes elsewhere).
    Axes with no generators carry only y^[0] = 1.  ``s`` records the level
    of the derivation -ad(x^(p^s)) the descent is meant for.
    """

    def __init__(self, p: int, n: int, gens: Sequence[Sequence[DiffOp]], s: int = 0):
        if len(gens) != n:
            raise ShapeError(f"generator table has {len(gens)} rows, expected {n}")
        self.p = p
        self.n = n
        self.s = s
        self.gens = tuple(tuple(row) for row in gens)
        for row in self.gens:
            for g in row:
                if (g.p, g.n) != (p, n):
                    raise ShapeError("generator lives in a different ring")
        self._axis_memo: dict[tuple[int, int], DiffOp] = {}
        self._memo: dict[MultiIndex, DiffOp] = {}

    @property
    def bounds(self) -> tuple[int, ...]:
        return tuple(len(row) for row in self.gens)

    @property
    def box(self) -> tuple[int, ...]:
        return tuple(self.p**d for d in self.bounds)

    def indices(self):
        return cartesian(*(range(l) for l in self.box))

    def contains(self, alpha: Sequence[int]) -> bool:
        return all(0 <= a < l for a, l in zip(alpha, self.box))

    def axis_member(self, i: int, j: int) -> DiffOp:
        """y_i^[j] for 0-based axis i."""
        key = (i, j)
        hit = self._axis_memo.get(key)
        if hit is not None:
            return hit
        if not 0 <= j < self.p ** len(self.gens[i]):
            raise DescentError(f"index {j} out of bounds on axis {i + 1}")
        result = DiffOp.one(self.p, self.n)
        for k, dk in enumerate(digits(j, self.p)):
            if dk:
                factor = scalar_mul(inv_factorial_int(dk, self.p), power(self.gens[i][k], dk))
                result = mul(result, factor)
        self._axis_memo[key] = result
        return result

    def expand(self, alpha: Sequence[int]) -> DiffOp:
        alpha = tuple(alpha)
        if len(alpha) != self.n:
            raise ShapeError("multi-index length differs from n")
        hit = self._memo.get(alpha)
        if hit is not None:
            return hit
        if not self.contains(alpha):
            raise DescentError(f"index {alpha} outside bounds {self.box}")
        result = DiffOp.one(self.p, self.n)
        for i, a in enumerate(alpha):
            if a:
                result = mul(result, self.axis_member(i, a))
        self._memo[alpha] = result
        return result

    def __getitem__(self, alpha) -> DiffOp:
        alpha = tuple(alpha)
        if any(a < 0 for a in alpha):
            return DiffOp.zero(self.p, self.n)
        return self.expand(alpha)

    def sequence(self) -> MultiSequence:
        return MultiSequence(self.p, self.n, self.box, {a: self.expand(a) for a in self.indices()}, s=self.s)

    def truncate(self, bounds: Sequence[int]) -> "Descent":
        return Descent(self.p, self.n, [row[:b] for row, b in zip(self.gens, bounds)], s=self.s)

    def __eq__(self, other):
        if not isinstance(other, Descent):
            return NotImplemented
        return (self.p, self.n, self.gens) == (other.p, other.n, other.gens)

    def __repr__(self):
        rows = "; ".join(", ".join(str(g) for g in row) for row in self.gens)
        return f"Descent(p={self.p}, n={self.n}, s={self.s}, gens=[{rows}])"


def canonical_descent(p: int, n: int, bounds: Sequence[int] | int = 3, s: int = 0) -> Descent:
    """Generators d_i^[p^(k+s)]: the canonical descent for -ad(x^(p^s))."""
    if isinstance(bounds, int):
        bounds = (bounds,) * n
    gens = [[DiffOp.d(i, p ** (k + s), p, n) for k in range(b)] for i, b in zip(range(1, n + 1), bounds)]
    return Descent(p, n, gens, s=s)


Sequenceish = Union[Descent, MultiSequence]


def _all_generators(desc: Descent):
    for i, row in enumerate(desc.gens):
        for k, g in enumerate(row):
            yield i, k, g


def _commute_checks(report: Report, desc: Descent):
    flat = list(_all_generators(desc))
    for a in range(len(flat)):
        for b in range(a + 1, len(flat)):
            i, k, g = flat[a]
            j, l, h = flat[b]
            report.check(mul(g, h) == mul(h, g), "commute", ((i + 1, k), (j + 1, l)))


def _nilpotent_checks(report: Report, desc: Descent):
    for i, k, g in _all_generators(desc):
        report.check(not power(g, desc.p), "nilpotent", (i + 1, k), "generator^p != 0")


def verify_iterative(desc: Sequenceish, full: bool = False) -> Report:
    """Check y^[a] y^[b] = C(a+b, b) y^[a+b].

    For a ``Descent`` the default is the generator-level test (g^p = 0 and
    pairwise commutation), which is sufficient for iterativity; ``full``
    enumerates every pair a, b in the box.  When a + b leaves a p-power box
    the binomial vanishes mod p, so the product must be zero.
    """
    report = Report("iterative")
    if isinstance(desc, Descent) and not full:
        report.notes.append(f"generator-level check, bounds {desc.bounds}")
        _nilpotent_checks(report, desc)
        _commute_checks(report, desc)
        return report
    report.notes.append(f"full pairwise check over box {desc.box}")
    p = desc.p
    idx = list(desc.indices())
    members = {a: desc[a] for a in idx}
    zero = DiffOp.zero(desc.p, desc.n)
    for a in idx:
        ya = members[a]
        for b in idx:
            total = tuple(x + y for x, y in zip(a, b))
            c = multi_binom_int(total, b, p)
            lhs = mul(ya, members[b])
            if desc.contains(total):
                rhs = scalar_mul(c, members[total]) if c else zero
            elif c == 0:
                rhs = zero
            else:
                continue
            report.check(lhs == rhs, "iterative", (a, b))
    return report


def _delta_generator_checks(report: Report, desc: Descent, delta: DerivationSpec):
    for mu, k, g in _all_generators(desc):
        for nu in delta.active_axes:
            lhs = delta.apply(nu, g)
            if nu == mu + 1:
                target = tuple(desc.p**k - 1 if j == mu else 0 for j in range(desc.n))
                rhs = desc.expand(target)
            else:
                rhs = DiffOp.zero(desc.p, desc.n)
            report.check(lhs == rhs, "delta", (nu, (mu + 1, k)))


def check_delta_axiom(seq: Sequenceish, delta: DerivationSpec) -> Report:
    """delta^a (y^[b]) = y^[b - a] for every b in the box and every a.

    Exponents a with some a_i > b_i + 1 follow from a_i = b_i + 1, so the
    enumeration stops there.
    """
    if seq.n != delta.n:
        raise ShapeError("derivation and descent have different n")
    report = Report("delta-descent")
    n = seq.n
    active = set(delta.active_axes)
    for beta in seq.indices():
        y = seq[beta]
        ranges = [range(b + 2) if (i + 1) in active else range(1) for i, b in enumerate(beta)]
        for alpha in cartesian(*ranges):
            lhs = delta.apply_multi(alpha, y)
            rest = tuple(b - a for b, a in zip(beta, alpha))
            rhs = seq[rest] if all(r >= 0 for r in rest) else DiffOp.zero(seq.p, n)
            report.check(lhs == rhs, "delta", (alpha, beta))
    return report


def verify_descent(desc: Sequenceish, delta: DerivationSpec, full: bool = False) -> Report:
    """Is ``desc`` an iterative delta-descent within its bounds?

    Generator level: delta_nu(g_mu^k) = [nu == mu] y_mu^[p^k - 1],
    g^p = 0 and pairwise commutation.  ``full`` (forced for explicit
    multi-sequences) checks both axioms on every index.
    """
    if desc.n != delta.n:
        raise ShapeError("derivation and descent have different n")
    if isinstance(desc, Descent) and not full:
        report = Report("iterative delta-descent")
        report.notes.append(f"generator-level check, bounds {desc.bounds}, delta level s={delta.s}")
        _delta_generator_checks(report, desc, delta)
        _nilpotent_checks(report, desc)
        _commute_checks(report, desc)
        return report
    report = check_delta_axiom(desc, delta)
    report.name = "iterative delta-descent"
    return report.merge(verify_iterative(desc, full=True))


def construct_rank1(delta: DerivationSpec, seeds: Sequence[DiffOp], algebra: Algebra = "D_n") -> Descent:
    """Build the rank-one iterative delta-descent generated by the seeds.

    Seeds must satisfy y_k^p = 0 and delta^(p^k)(y_k) = 1 and lie in the
    given commutative subalgebra.  Then g_0 = y_0 and

        g_(k+1) = (-1)^(p-1) delta^(p^k - 1)( y^[p^k - 1] * phi_k(y_(k+1)) ),
        phi_k(z) = sum_(j<p) (-1)^j g_k^j / j! * delta^(p^k j)(z).
    """
    axis = delta.single_axis()
    if not seeds:
        raise DescentError("need at least one seed")
    p, n = seeds[0].p, seeds[0].n
    if n != delta.n:
        raise ShapeError("seeds and derivation have different n")
    member = _predicate(algebra)
    one = DiffOp.one(p, n)
    for k, y in enumerate(seeds):
        if not member(y):
            raise DescentError(f"seed {k} lies outside the commutative subalgebra")
        if power(y, p):
            raise DescentError(f"seed {k} is not p-nilpotent")
        if delta.apply(axis, y, p**k) != one:
            raise DescentError(f"seed {k}: delta^(p^{k}) (y_{k}) != 1")

    sign = (-1) ** (p - 1)
    gens = [seeds[0]]
    for k in range(len(seeds) - 1):
        g = gens[k]
        z = seeds[k + 1]
        q = p**k
        phi = DiffOp.zero(p, n)
        g_pow = one
        for j in range(p):
            term = mul(scalar_mul((-1) ** j * inv_factorial_int(j, p), g_pow), delta.apply(axis, z, q * j))
            phi = phi + term
            g_pow = mul(g_pow, g)
        low = one
        for l in range(k):
            low = mul(low, scalar_mul(inv_factorial_int(p - 1, p), power(gens[l], p - 1)))
        nxt = delta.apply(axis, mul(low, phi), q - 1)
        gens.append(scalar_mul(sign, nxt))

    table = [() for _ in range(n)]
    table[axis - 1] = tuple(gens)
    return Descent(p, n, table, s=delta.s)


def _covered_axes(desc: Descent) -> set[int]:
    return {i for i, row in enumerate(desc.gens) if row}


def product(descs: Sequence[Descent]) -> Descent:
    """Product of descents on disjoint axes: y^[alpha] = prod_i y_i^[alpha_i]."""
    if not descs:
        raise DescentError("empty product")
    first = descs[0]
    if len(descs) == 1:
        return first
    p, n, s = first.p, first.n, first.s
    table: list[tuple[DiffOp, ...]] = [() for _ in range(n)]
    seen: set[int] = set()
    for desc in descs:
        if (desc.p, desc.n, desc.s) != (p, n, s):
            raise ShapeError("descents differ in p, n or s")
        axes = _covered_axes(desc)
        if axes & seen:
            raise DescentError(f"axes {sorted(a + 1 for a in axes & seen)} covered twice")
        seen |= axes
        for i in axes:
            table[i] = desc.gens[i]
    for a in range(len(descs)):
        for b in range(a + 1, len(descs)):
            for _, _, g in _all_generators(descs[a]):
                for _, _, h in _all_generators(descs[b]):
                    if mul(g, h) != mul(h, g):
                        raise DescentError("generators of different factors do not commute")
    return Descent(p, n, table, s=s)


def expand_over(delta: DerivationSpec, reference: Sequenceish, z: DiffOp, top: Sequence[int]) -> dict[MultiIndex, DiffOp]:
    """Coefficients c_b in the constants with z = sum_(b <= top) c_b y^[b].

    Peels off the top index first: for |b| maximal among what is left,
    delta^b kills every other reference member, so c_b = delta^b(rest).
    """
    top = tuple(top)
    order = sorted(cartesian(*(range(t + 1) for t in top)), key=lambda b: (-sum(b), b))
    coeffs: dict[MultiIndex, DiffOp] = {}
    rest = z
    for beta in order:
        c = delta.apply_multi(beta, rest)
        if c:
            if not delta.is_constant(c):
                raise DescentError(f"{z} is not in the nil filtration piece {top}")
            coeffs[beta] = c
            rest = rest - mul(c, reference[beta])
    if rest:
        raise DescentError(f"{z} is not in the span of the reference below {top}")
    return coeffs


def _constant_part(delta, reference, z, top) -> DiffOp:
    return expand_over(delta, reference, z, top).get((0,) * z.n, DiffOp.zero(z.p, z.n))


def _nonzero_leq(alpha):
    for gamma in cartesian(*(range(a + 1) for a in alpha)):
        if any(gamma):
            yield gamma


def perturb(reference: Descent, lambdas: Mapping[Sequence[int], DiffOp], delta: DerivationSpec | None = None) -> MultiSequence:
    """x'^[a] = x^[a] + sum_(0 != b <= a) lambda_b x^[a - b].

    The result is always a delta-descent but in general not iterative.
    """
    delta = delta or DerivationSpec(reference.n, reference.s)
    lam = {}
    for beta, c in lambdas.items():
        beta = tuple(beta)
        if not any(beta):
            raise DescentError("lambda indices must be nonzero")
        if not delta.is_constant(c):
            raise DescentError(f"lambda_{beta} = {c} is not a constant for delta")
        if c:
            lam[beta] = c
    out = {}
    for alpha in reference.indices():
        el = reference[alpha]
        for beta in _nonzero_leq(alpha):
            c = lam.get(beta)
            if c is not None:
                el = el + mul(c, reference[tuple(a - b for a, b in zip(alpha, beta))])
        out[alpha] = el
    return MultiSequence(reference.p, reference.n, reference.box, out, s=reference.s)


def normalize(delta: DerivationSpec, reference: Sequenceish, raw: Sequenceish) -> MultiSequence:
    """The unique delta-descent x with x^[a] = x'^[a] + sum lambda_g x'^[a-g]
    whose expansion over the reference has zero constant part for a != 0.
    """
    check = check_delta_axiom(raw, delta)
    if not check.ok:
        raise DescentError(f"raw family is not a delta-descent: {check.failures[0]}")
    n = raw.n
    zero_idx = (0,) * n
    order = sorted(raw.indices(), key=lambda a: (sum(a), a))
    c0 = {alpha: _constant_part(delta, reference, raw[alpha], alpha) for alpha in order if any(alpha)}
    lam: dict[MultiIndex, DiffOp] = {}
    for alpha in order:
        if alpha == zero_idx:
            continue
        acc = -c0[alpha]
        for gamma in _nonzero_leq(alpha):
            if gamma == alpha:
                continue
            rest = tuple(a - g for a, g in zip(alpha, gamma))
            acc = acc - mul(lam[gamma], c0[rest])
        lam[alpha] = acc
    out = {}
    for alpha in order:
        el = raw[alpha]
        for gamma in _nonzero_leq(alpha):
            if lam[gamma]:
                el = el + mul(lam[gamma], raw[tuple(a - g for a, g in zip(alpha, gamma))])
        out[alpha] = el
    return MultiSequence(raw.p, n, raw.box, out, s=raw.s)


@dataclass(frozen=True)
class DescentParameters:
    """Per-axis tuples (lambda_0, lambda_1, ...) of a descent, relative to a reference."""

    params: tuple[tuple[DiffOp, ...], ...]
    reference: str

    def is_zero(self) -> bool:
        return all(not c for row in self.params for c in row)


def classify(delta: DerivationSpec, reference: Descent, candidate: Descent) -> DescentParameters:
    """lambda_j = y_i^[p^j] mod the ideal generated by the reference generators."""
    for name, desc in (("reference", reference), ("candidate", candidate)):
        report = verify_descent(desc, delta)
        if not report.ok:
            raise DescentError(f"{name} is not an iterative delta-descent: {report.failures[0]}")
    p, n = candidate.p, candidate.n
    params = []
    for i, row in enumerate(candidate.gens):
        out = []
        for j, g in enumerate(row):
            top = tuple(p**j if a == i else 0 for a in range(n))
            lam = _constant_part(delta, reference, g, top)
            if power(lam, p):
                raise DescentError(f"parameter ({i + 1}, {j}) is not p-nilpotent")
            out.append(lam)
        params.append(tuple(out))
    ref = f"canonical d^[p^(k+{reference.s})]" if reference == canonical_descent(p, n, reference.bounds, reference.s) else "custom"
    return DescentParameters(tuple(params), ref)
