"""Exact arithmetic in Q(sqrt 2), enough to evaluate polynomials in alpha = sqrt2 - 1."""
from __future__ import annotations

from fractions import Fraction
from functools import total_ordering
from math import sqrt


@total_ordering
class QSqrt2:
    """The number ``p + q*sqrt(2)`` with rational ``p`` and ``q``."""

    __slots__ = ("p", "q")

    def __init__(self, p=0, q=0):
        self.p = Fraction(p)
        self.q = Fraction(q)

    @classmethod
    def coerce(cls, x) -> "QSqrt2":
        if isinstance(x, QSqrt2):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        raise TypeError(f"cannot represent {x!r} exactly in Q(sqrt 2)")

    def __add__(self, other):
        o = self.coerce(other)
        return QSqrt2(self.p + o.p, self.q + o.q)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt2(-self.p, -self.q)

    def __sub__(self, other):
        return self + (-self.coerce(other))

    def __rsub__(self, other):
        return self.coerce(other) - self

    def __mul__(self, other):
        o = self.coerce(other)
        return QSqrt2(self.p * o.p + 2 * self.q * o.q, self.p * o.q + self.q * o.p)

    __rmul__ = __mul__

    def conjugate(self) -> "QSqrt2":
        return QSqrt2(self.p, -self.q)

    def norm(self) -> Fraction:
        return self.p * self.p - 2 * self.q * self.q

    def __truediv__(self, other):
        o = self.coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 2)")
        num = self * o.conjugate()
        return QSqrt2(num.p / n, num.q / n)

    def __rtruediv__(self, other):
        return self.coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return QSqrt2(1) / (self ** (-k))
        out, base = QSqrt2(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sign(self) -> int:
        p, q = self.p, self.q
        if p >= 0 and q >= 0:
            return 0 if (p == 0 and q == 0) else 1
        if p <= 0 and q <= 0:
            return -1
        # opposite signs: compare p^2 with 2 q^2
        d = p * p - 2 * q * q
        return (1 if p > 0 else -1) if d > 0 else (-1 if p > 0 else 1)

    def __eq__(self, other):
        try:
            o = self.coerce(other)
        except TypeError:
            return NotImplemented
        return self.p == o.p and self.q == o.q

    def __lt__(self, other):
        return (self - self.coerce(other)).sign() < 0

    def __hash__(self):
        return hash((self.p, self.q))

    def __float__(self):
        return float(self.p) + float(self.q) * sqrt(2.0)

    def __repr__(self):
        return f"QSqrt2({self.p}, {self.q})"


ALPHA_EXACT = QSqrt2(-1, 1)
SQRT2_EXACT = QSqrt2(0, 1)


def eval_alpha_poly(coeffs, shift: int = 0) -> QSqrt2:
    """Exact value of ``sum_k coeffs[k] * alpha**(k + shift)``."""
    acc = QSqrt2(0)
    power = ALPHA_EXACT**shift
    for c in coeffs:
        if c:
            acc = acc + int(c) * power
        power = power * ALPHA_EXACT
    return acc
