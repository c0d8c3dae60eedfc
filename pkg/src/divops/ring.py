"""The ring D(P_n) of differential operators on K[x_1..x_n] in characteristic p.

Elements are kept in the normal form  sum c * x^a d^[b]  with every x to the
left of every divided power d^[b] = d^b / b!.  Multiplication uses the
normal-ordering identity

    d^[k] x^m = sum_{j <= min(k, m)} C(m, j) x^(m-j) d^[k-j]

together with d^[a] d^[b] = C(a+b, b) d^[a+b], axis by axis.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product as cartesian
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .field import Scalar, binom_int, check_prime

MultiIndex = tuple[int, ...]
Key = tuple[MultiIndex, MultiIndex]


class ShapeError(ValueError):
    """Operands live in different rings (prime or number of variables)."""


def _coeff(c, p: int) -> int:
    if isinstance(c, Scalar):
        if c.p != p:
            raise ShapeError(f"scalar over F_{c.p} used in ring over F_{p}")
        return c.value
    return int(c) % p


def _check_index(idx: Sequence[int], n: int) -> MultiIndex:
    idx = tuple(int(v) for v in idx)
    if len(idx) != n:
        raise ShapeError(f"multi-index {idx} has length {len(idx)}, expected {n}")
    if any(v < 0 for v in idx):
        raise ValueError(f"negative exponent in {idx}")
    return idx


def term_sort_key(key: Key) -> MultiIndex:
    return key[0] + key[1]


def leq(a: Sequence[int], b: Sequence[int]) -> bool:
    """Componentwise a <= b."""
    return all(x <= y for x, y in zip(a, b))


class DiffOp:
    """An element of D(P_n) over F_p in normal form.

    ``terms`` maps ``(alpha, beta)`` to a coefficient; zero coefficients are
    dropped.  Instances are immutable and hashable.
    """

    __slots__ = ("p", "n", "_terms", "_hash")

    def __init__(self, p: int, n: int, terms: Mapping | Iterable | None = None):
        p = check_prime(p)
        if n < 1:
            raise ValueError("number of variables must be >= 1")
        clean: dict[Key, int] = {}
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for (alpha, beta), c in items:
                key = (_check_index(alpha, n), _check_index(beta, n))
                v = (clean.get(key, 0) + _coeff(c, p)) % p
                if v:
                    clean[key] = v
                else:
                    clean.pop(key, None)
        self.p = p
        self.n = n
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, p: int, n: int, terms: dict[Key, int]) -> "DiffOp":
        # terms must already be reduced, zero-free and well-shaped
        obj = cls.__new__(cls)
        obj.p = p
        obj.n = n
        obj._terms = terms
        obj._hash = None
        return obj

    # constructors

    @classmethod
    def zero(cls, p: int, n: int) -> "DiffOp":
        return cls(p, n)

    @classmethod
    def scalar(cls, c, p: int, n: int) -> "DiffOp":
        z = (0,) * n
        return cls(p, n, {(z, z): c})

    @classmethod
    def one(cls, p: int, n: int) -> "DiffOp":
        return cls.scalar(1, p, n)

    @classmethod
    def monomial(cls, alpha: Sequence[int], beta: Sequence[int], p: int, c=1) -> "DiffOp":
        return cls(p, len(alpha), {(tuple(alpha), tuple(beta)): c})

    @classmethod
    def x(cls, i: int, p: int, n: int, power: int = 1) -> "DiffOp":
        """x_i^power, with 1-based axis i."""
        _check_axis(i, n)
        alpha = tuple(power if j == i - 1 else 0 for j in range(n))
        return cls(p, n, {(alpha, (0,) * n): 1})

    @classmethod
    def d(cls, i: int, k: int, p: int, n: int) -> "DiffOp":
        """The divided power d_i^[k], with 1-based axis i."""
        _check_axis(i, n)
        beta = tuple(k if j == i - 1 else 0 for j in range(n))
        return cls(p, n, {((0,) * n, beta): 1})

    @classmethod
    def d_multi(cls, beta: Sequence[int], p: int) -> "DiffOp":
        n = len(beta)
        return cls(p, n, {((0,) * n, tuple(beta)): 1})

    # container protocol

    @property
    def terms(self) -> dict[Key, int]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Key, int]]:
        """Terms in the canonical deterministic order."""
        for key in sorted(self._terms, key=term_sort_key):
            yield key, self._terms[key]

    def coefficient(self, alpha: Sequence[int], beta: Sequence[int]) -> int:
        return self._terms.get((tuple(alpha), tuple(beta)), 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def in_scalar_ops(self) -> bool:
        """True iff the element lies in D_n (no x-part in any term)."""
        return all(not any(a) for a, _ in self._terms)

    def in_polynomials(self) -> bool:
        return all(not any(b) for _, b in self._terms)

    def constant_term(self) -> int:
        z = (0,) * self.n
        return self._terms.get((z, z), 0)

    def _check_same(self, other: "DiffOp"):
        if self.p != other.p or self.n != other.n:
            raise ShapeError(
                f"ring mismatch: (p={self.p}, n={self.n}) vs (p={other.p}, n={other.n})"
            )

    # arithmetic

    def __add__(self, other):
        if isinstance(other, (int, Scalar)):
            other = DiffOp.scalar(other, self.p, self.n)
        if not isinstance(other, DiffOp):
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        p = self.p
        return DiffOp._raw(p, self.n, {k: p - c for k, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Scalar)):
            other = DiffOp.scalar(other, self.p, self.n)
        if not isinstance(other, DiffOp):
            return NotImplemented
        return add(self, -other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return mul(self, other)
        if isinstance(other, (int, Scalar)):
            return scalar_mul(other, self)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Scalar)):
            return scalar_mul(other, self)
        return NotImplemented

    def __pow__(self, e: int) -> "DiffOp":
        return power(self, e)

    def __call__(self, f: "Poly") -> "Poly":
        return apply(self, f)

    def __eq__(self, other):
        if isinstance(other, DiffOp):
            return self.p == other.p and self.n == other.n and self._terms == other._terms
        if isinstance(other, (int, Scalar)):
            return self == DiffOp.scalar(other, self.p, self.n)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, self.n, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"DiffOp(p={self.p}, n={self.n}, {self})"

    def __str__(self):
        return format_element(self)


def _check_axis(i: int, n: int):
    if not 1 <= i <= n:
        raise IndexError(f"axis {i} out of range 1..{n}")


def format_monomial(alpha: Sequence[int], beta: Sequence[int], c: int) -> str:
    parts = []
    for i, a in enumerate(alpha, 1):
        if a == 1:
            parts.append(f"x{i}")
        elif a > 1:
            parts.append(f"x{i}^{a}")
    for i, b in enumerate(beta, 1):
        if b:
            parts.append(f"d{i}[{b}]")
    if c != 1 or not parts:
        parts.insert(0, str(c))
    return "*".join(parts)


def format_element(a: DiffOp) -> str:
    if not a:
        return "0"
    return " + ".join(format_monomial(al, be, c) for (al, be), c in a.items())


class Poly:
    """A polynomial in K[x_1..x_n] over F_p, as a sparse exponent map."""

    __slots__ = ("p", "n", "_terms")

    def __init__(self, p: int, n: int, terms: Mapping | Iterable | None = None):
        p = check_prime(p)
        clean: dict[MultiIndex, int] = {}
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for alpha, c in items:
                alpha = _check_index(alpha, n)
                v = (clean.get(alpha, 0) + _coeff(c, p)) % p
                if v:
                    clean[alpha] = v
                else:
                    clean.pop(alpha, None)
        self.p = p
        self.n = n
        self._terms = clean

    @classmethod
    def monomial(cls, gamma: Sequence[int], p: int, c=1) -> "Poly":
        return cls(p, len(gamma), {tuple(gamma): c})

    @property
    def terms(self) -> dict[MultiIndex, int]:
        return dict(self._terms)

    def items(self):
        for k in sorted(self._terms):
            yield k, self._terms[k]

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.p == other.p and self.n == other.n and self._terms == other._terms
        if isinstance(other, int):
            return self == Poly(self.p, self.n, {(0,) * self.n: other})
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.n, frozenset(self._terms.items())))

    def __add__(self, other: "Poly") -> "Poly":
        if not isinstance(other, Poly):
            return NotImplemented
        if (self.p, self.n) != (other.p, other.n):
            raise ShapeError("polynomial ring mismatch")
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = (out.get(k, 0) + c) % self.p
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return Poly(self.p, self.n, out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(-1)

    def __mul__(self, other):
        if isinstance(other, (int, Scalar)):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        if (self.p, self.n) != (other.p, other.n):
            raise ShapeError("polynomial ring mismatch")
        out: dict[MultiIndex, int] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                k = tuple(x + y for x, y in zip(a, b))
                out[k] = (out.get(k, 0) + ca * cb) % self.p
        return Poly(self.p, self.n, out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        result = Poly(self.p, self.n, {(0,) * self.n: 1})
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def scale(self, c) -> "Poly":
        c = _coeff(c, self.p)
        return Poly(self.p, self.n, {k: v * c for k, v in self._terms.items()})

    def to_op(self) -> DiffOp:
        z = (0,) * self.n
        return DiffOp(self.p, self.n, {(a, z): c for a, c in self._terms.items()})

    @classmethod
    def from_op(cls, a: DiffOp) -> "Poly":
        if not a.in_polynomials():
            raise ValueError("element has a nonzero derivative part")
        return cls(a.p, a.n, {al: c for (al, _), c in a._terms.items()})

    def __str__(self):
        if not self._terms:
            return "0"
        z = (0,) * self.n
        return " + ".join(format_monomial(a, z, c) for a, c in self.items())

    def __repr__(self):
        return f"Poly(p={self.p}, n={self.n}, {self})"


# ring operations


def add(a: DiffOp, b: DiffOp) -> DiffOp:
    a._check_same(b)
    p = a.p
    out = dict(a._terms)
    for k, c in b._terms.items():
        v = (out.get(k, 0) + c) % p
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return DiffOp._raw(p, a.n, out)


def scalar_mul(c, a: DiffOp) -> DiffOp:
    c = _coeff(c, a.p)
    if not c:
        return DiffOp.zero(a.p, a.n)
    p = a.p
    return DiffOp._raw(p, a.n, {k: v * c % p for k, v in a._terms.items()})


@lru_cache(maxsize=1 << 20)
def _axis_kernel(b: int, c: int, d: int, p: int) -> tuple[tuple[int, int, int], ...]:
    """d^[b] x^c d^[d] in one variable, as (x exponent, d exponent, coeff) triples."""
    out = []
    for j in range(min(b, c) + 1):
        coef = binom_int(c, j, p)
        if coef:
            coef = coef * binom_int(b - j + d, d, p) % p
            if coef:
                out.append((c - j, b - j + d, coef))
    return tuple(out)


def mul(a: DiffOp, b: DiffOp) -> DiffOp:
    a._check_same(b)
    p, n = a.p, a.n
    out: dict[Key, int] = {}
    get = out.get
    if n == 1:
        for ((ax,), (ad,)), ca in a._terms.items():
            for ((bx,), (bd,)), cb in b._terms.items():
                c0 = ca * cb
                for xs, ds, coef in _axis_kernel(ad, bx, bd, p):
                    key = ((ax + xs,), (ds,))
                    out[key] = (get(key, 0) + c0 * coef) % p
    else:
        for (ax, ad), ca in a._terms.items():
            for (bx, bd), cb in b._terms.items():
                factors = [_axis_kernel(ad[i], bx[i], bd[i], p) for i in range(n)]
                if not all(factors):
                    continue
                c0 = ca * cb
                for combo in cartesian(*factors):
                    coef = c0
                    alpha = []
                    beta = []
                    for i, (xs, ds, cf) in enumerate(combo):
                        coef = coef * cf
                        alpha.append(ax[i] + xs)
                        beta.append(ds)
                    key = (tuple(alpha), tuple(beta))
                    out[key] = (get(key, 0) + coef) % p
    return DiffOp._raw(p, n, {k: v for k, v in out.items() if v})


def power(a: DiffOp, e: int) -> DiffOp:
    if e < 0:
        raise ValueError("negative power")
    result = DiffOp.one(a.p, a.n)
    base = a
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return result


def product(factors: Sequence[DiffOp], p: int, n: int) -> DiffOp:
    result = DiffOp.one(p, n)
    for f in factors:
        result = mul(result, f)
    return result


def commutator(a: DiffOp, b: DiffOp) -> DiffOp:
    """[a, b] = ab - ba."""
    return add(mul(a, b), -mul(b, a))


def apply(a: DiffOp, f: Poly) -> Poly:
    """Action of a on a polynomial: d^[b](x^g) = C(g, b) x^(g-b)."""
    if (a.p, a.n) != (f.p, f.n):
        raise ShapeError("operator and polynomial live over different rings")
    p, n = a.p, a.n
    out: dict[MultiIndex, int] = {}
    for (alpha, beta), ca in a._terms.items():
        for gamma, cf in f._terms.items():
            coef = ca * cf
            for g, b in zip(gamma, beta):
                if b > g:
                    coef = 0
                    break
                coef = coef * binom_int(g, b, p) % p
                if not coef:
                    break
            if coef:
                key = tuple(al + g - b for al, g, b in zip(alpha, gamma, beta))
                out[key] = (out.get(key, 0) + coef) % p
    return Poly(p, n, out)


def ad_x_power(i: int, e: int, a: DiffOp) -> DiffOp:
    """[a, x_i^e] in closed form; equals (-ad x_i)^e (a) when e is a power of p."""
    _check_axis(i, a.n)
    p, n = a.p, a.n
    ax = i - 1
    out: dict[Key, int] = {}
    for (alpha, beta), c in a._terms.items():
        top = min(e, beta[ax])
        for j in range(1, top + 1):
            coef = binom_int(e, j, p)
            if not coef:
                continue
            al = alpha[:ax] + (alpha[ax] + e - j,) + alpha[ax + 1:]
            be = beta[:ax] + (beta[ax] - j,) + beta[ax + 1:]
            key = (al, be)
            out[key] = (out.get(key, 0) + c * coef) % p
    return DiffOp._raw(p, n, {k: v for k, v in out.items() if v})


def ad_x(i: int, a: DiffOp) -> DiffOp:
    """delta_i(a) = -[x_i, a] = [a, x_i]; lowers the i-th d-exponent by one."""
    return ad_x_power(i, 1, a)


def shift_d(a: DiffOp, i: int, amount: int) -> DiffOp:
    """x^a d^[b] -> x^a d^[b - amount*e_i] (dropped when negative).

    This is (-ad x_i^q)(a) for q = amount a power of p, and more generally
    the composite of ``amount`` applications of ad_x on axis i.
    """
    ax = i - 1
    out = {}
    for (alpha, beta), c in a._terms.items():
        if beta[ax] >= amount:
            out[(alpha, beta[:ax] + (beta[ax] - amount,) + beta[ax + 1:])] = c
    return DiffOp._raw(a.p, a.n, out)


def shift_d_multi(a: DiffOp, gamma: Sequence[int]) -> DiffOp:
    out = {}
    for (alpha, beta), c in a._terms.items():
        if all(b >= g for b, g in zip(beta, gamma)):
            out[(alpha, tuple(b - g for b, g in zip(beta, gamma)))] = c
    return DiffOp._raw(a.p, a.n, out)


def ad_dpk(i: int, k: int, a: DiffOp) -> DiffOp:
    """[d_i^[p^k], a] in closed form (normal ordering of d^[q] past x_i^m)."""
    _check_axis(i, a.n)
    p, n = a.p, a.n
    q = p**k
    ax = i - 1
    out: dict[Key, int] = {}
    for (alpha, beta), c in a._terms.items():
        m = alpha[ax]
        for j in range(1, min(q, m) + 1):
            coef = binom_int(m, j, p)
            if not coef:
                continue
            coef = coef * binom_int(q - j + beta[ax], beta[ax], p) % p
            if not coef:
                continue
            al = alpha[:ax] + (m - j,) + alpha[ax + 1:]
            be = beta[:ax] + (beta[ax] + q - j,) + beta[ax + 1:]
            key = (al, be)
            out[key] = (out.get(key, 0) + c * coef) % p
    return DiffOp._raw(p, n, {kk: v for kk, v in out.items() if v})


def max_beta(a: DiffOp) -> MultiIndex:
    top = [0] * a.n
    for _, beta in a._terms:
        for i, b in enumerate(beta):
            if b > top[i]:
                top[i] = b
    return tuple(top)


def degrees(a: DiffOp) -> tuple[int, int]:
    """(order, canonical degree) = (max |beta|, max |alpha| + |beta|)."""
    if not a:
        raise ValueError("degrees of the zero element are undefined")
    order = max(sum(b) for _, b in a._terms)
    canonical = max(sum(al) + sum(b) for al, b in a._terms)
    return order, canonical


OperatorLike = Union[DiffOp, Sequence[DiffOp]]


def _as_factors(a: OperatorLike) -> list[DiffOp]:
    return [a] if isinstance(a, DiffOp) else list(a)


def act(a: OperatorLike, f: Poly) -> Poly:
    """Apply a DiffOp, or a product given as a factor list (rightmost first)."""
    for factor in reversed(_as_factors(a)):
        f = apply(factor, f)
    return f


def equals_via_action(a: OperatorLike, b: OperatorLike) -> bool:
    """Decide a == b from the action on monomials x^g with g <= max beta.

    Either side may be a list of factors standing for their product, in
    which case nothing is multiplied: the factors are applied in turn.  If
    a != b, a minimal beta0 in the support of a - b gives
    (a - b)(x^beta0) = sum_alpha c_(alpha,beta0) x^alpha != 0, so the check
    is exact.
    """
    fa, fb = _as_factors(a), _as_factors(b)
    ref = (fa + fb)[0]
    p, n = ref.p, ref.n
    for f in fa + fb:
        ref._check_same(f)

    def bound(factors):
        top = [0] * n
        for f in factors:
            for i, v in enumerate(max_beta(f)):
                top[i] += v
        return top

    ba, bb = bound(fa), bound(fb)
    top = [max(x, y) for x, y in zip(ba, bb)]
    for gamma in cartesian(*(range(t + 1) for t in top)):
        mono = Poly(p, n, {gamma: 1})
        if act(fa, mono) != act(fb, mono):
            return False
    return True


class DRing:
    """Convenience factory for elements of D(P_n) over F_p."""

    def __init__(self, p: int, n: int = 1):
        self.p = check_prime(p)
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n

    def zero(self) -> DiffOp:
        return DiffOp.zero(self.p, self.n)

    def one(self) -> DiffOp:
        return DiffOp.one(self.p, self.n)

    def scalar(self, c) -> DiffOp:
        return DiffOp.scalar(c, self.p, self.n)

    def x(self, i: int = 1, power: int = 1) -> DiffOp:
        return DiffOp.x(i, self.p, self.n, power)

    def d(self, i: int = 1, k: int = 1) -> DiffOp:
        return DiffOp.d(i, k, self.p, self.n)

    def dm(self, beta: Sequence[int]) -> DiffOp:
        return DiffOp.d_multi(beta, self.p)

    def monomial(self, alpha: Sequence[int], beta: Sequence[int], c=1) -> DiffOp:
        return DiffOp(self.p, self.n, {(tuple(alpha), tuple(beta)): c})

    def poly(self, terms) -> Poly:
        return Poly(self.p, self.n, terms)

    def xmono(self, gamma: Sequence[int]) -> Poly:
        return Poly(self.p, self.n, {tuple(gamma): 1})

    def __repr__(self):
        return f"DRing(p={self.p}, n={self.n})"


def random_element(p: int, n: int, rng, max_terms: int = 4, max_degree: int = 6,
                   max_d: int | None = None, max_x: int | None = None) -> DiffOp:
    """A random element with at most ``max_terms`` terms of canonical degree <= max_degree.

    ``max_d`` / ``max_x`` additionally cap each individual exponent.
    """
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        budget = rng.randint(0, max_degree)
        cuts = sorted(rng.randint(0, budget) for _ in range(2 * n - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [budget])]
        alpha = parts[:n]
        beta = parts[n:]
        if max_x is not None:
            alpha = [min(a, max_x) for a in alpha]
        if max_d is not None:
            beta = [min(b, max_d) for b in beta]
        key = (tuple(alpha), tuple(beta))
        terms[key] = terms.get(key, 0) + rng.randint(1, p - 1)
    return DiffOp(p, n, terms)
