"""Prime field arithmetic and binomial coefficients modulo p.

Binomials are evaluated digit by digit in base p (Lucas' theorem), so the
cost is O(log_p m) and no large factorials are ever formed.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

PRIME_LIMIT = 2**31


class FieldError(ValueError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@lru_cache(maxsize=None)
def _checked_prime(p: int) -> int:
    if not isinstance(p, int) or isinstance(p, bool):
        raise FieldError(f"prime must be an int, got {p!r}")
    if not 2 <= p < PRIME_LIMIT:
        raise FieldError(f"prime must lie in [2, 2^31), got {p}")
    if not is_prime(p):
        raise FieldError(f"{p} is not prime")
    return p


class Prime(int):
    """A verified prime 2 <= p < 2^31.

    Subclasses ``int`` so it can be used anywhere an integer modulus is
    expected.
    """

    def __new__(cls, p: int) -> "Prime":
        return super().__new__(cls, _checked_prime(int(p)))

    def __repr__(self) -> str:
        return f"Prime({int(self)})"


def check_prime(p: int) -> int:
    return _checked_prime(int(p))


class Scalar:
    """An element of F_p.  Immutable; operations across primes raise."""

    __slots__ = ("_value", "_p")

    def __init__(self, value: int, p: int):
        p = check_prime(p)
        object.__setattr__(self, "_p", p)
        object.__setattr__(self, "_value", int(value) % p)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @property
    def value(self) -> int:
        return self._value

    @property
    def p(self) -> int:
        return self._p

    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other._p != self._p:
                raise FieldError(f"mixed primes {self._p} and {other._p}")
            return other
        if isinstance(other, int):
            return Scalar(other, self._p)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(self._value + other._value, self._p)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(self._value - other._value, self._p)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(other._value - self._value, self._p)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(self._value * other._value, self._p)

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar(-self._value, self._p)

    def inverse(self) -> "Scalar":
        if self._value == 0:
            raise ZeroDivisionError("zero has no inverse in F_p")
        return Scalar(pow(self._value, -1, self._p), self._p)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return Scalar(pow(self._value, e, self._p), self._p)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self._p == other._p and self._value == other._value
        if isinstance(other, int):
            return self._value == other % self._p
        return NotImplemented

    def __hash__(self):
        return hash((self._value, self._p))

    def __bool__(self):
        return self._value != 0

    def __int__(self):
        return self._value

    def __index__(self):
        return self._value

    def __repr__(self):
        return f"Scalar({self._value}, p={self._p})"

    def __str__(self):
        return str(self._value)


def digits(m: int, p: int) -> list[int]:
    """Base-p digits of m, least significant first (empty for m == 0)."""
    out = []
    while m:
        m, r = divmod(m, p)
        out.append(r)
    return out


@lru_cache(maxsize=None)
def _small_binom_table(p: int) -> tuple[tuple[int, ...], ...]:
    rows = [[1]]
    for m in range(1, p):
        prev = rows[-1]
        rows.append([1] + [(prev[j - 1] + prev[j]) % p for j in range(1, m)] + [1])
    return tuple(tuple(r) for r in rows)


@lru_cache(maxsize=1 << 20)
def binom_int(m: int, k: int, p: int) -> int:
    """C(m, k) mod p as a plain int in [0, p)."""
    if k < 0 or m < 0 or k > m:
        return 0
    table = _small_binom_table(p)
    result = 1
    while k:
        m, mt = divmod(m, p)
        k, kt = divmod(k, p)
        if kt > mt:
            return 0
        result = result * table[mt][kt] % p
    return result


def binom_mod_p(m: int, k: int, p: int) -> Scalar:
    if m < 0 or k < 0:
        raise FieldError("binomial arguments must be non-negative")
    p = check_prime(p)
    return Scalar(binom_int(m, k, p), p)


def multi_binom_int(alpha: Sequence[int], beta: Sequence[int], p: int) -> int:
    if len(alpha) != len(beta):
        raise FieldError(f"multi-index lengths differ: {len(alpha)} != {len(beta)}")
    result = 1
    for a, b in zip(alpha, beta):
        result = result * binom_int(a, b, p) % p
        if not result:
            return 0
    return result


def multi_binom(alpha: Sequence[int], beta: Sequence[int], p: int) -> Scalar:
    """prod_i C(alpha_i, beta_i) mod p."""
    p = check_prime(p)
    return Scalar(multi_binom_int(alpha, beta, p), p)


@lru_cache(maxsize=None)
def inv_factorial_int(d: int, p: int) -> int:
    if not 0 <= d < p:
        raise FieldError(f"digit {d} outside [0, {p})")
    f = 1
    for j in range(2, d + 1):
        f = f * j % p
    return pow(f, -1, p)


def inv_digit_factorial(d: int, p: int) -> Scalar:
    """Inverse of d! in F_p for a base-p digit d (always invertible)."""
    p = check_prime(p)
    return Scalar(inv_factorial_int(d, p), p)
