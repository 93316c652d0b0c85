"""Exact coefficient domains: Q, Q(sqrt d) and F_p.

Rationals are plain :class:`fractions.Fraction` values; the helpers here only
add the checked operations and number-theoretic utilities the rest of the
package needs.  All element types are immutable.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Fraction
RationalLike = Union[int, Fraction]

_RATIONAL_OPS = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": operator.truediv,
}


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def rational_arith(x: RationalLike, y: RationalLike, op: str) -> Fraction:
    """Apply ``op`` (one of add, sub, mul, div) to two rationals."""
    try:
        fn = _RATIONAL_OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    x, y = as_rational(x), as_rational(y)
    if op == "div" and y == 0:
        raise ZeroDivisionError("rational division by zero")
    return fn(x, y)


def format_rational(x: RationalLike) -> str:
    x = as_rational(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# --- integers ---------------------------------------------------------------

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def odd_primes_up_to(bound: int) -> list[int]:
    return [p for p in range(3, bound + 1) if is_prime(p)]


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization of ``|n|`` (n != 0)."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor zero")
    out: dict[int, int] = {}
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n: int) -> list[int]:
    """Positive divisors of ``|n|``, sorted."""
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorize(n).values())


def rational_sqrt(x: RationalLike) -> Fraction | None:
    """Exact square root of a rational, or None if it is not a square."""
    x = as_rational(x)
    if x < 0:
        return None
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


# --- Q(sqrt d) -------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticField:
    """The field Q(sqrt d) for a squarefree integer d != 0, 1."""

    d: int

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d in (0, 1) or not is_squarefree(self.d):
            raise ValueError(f"d must be a squarefree integer other than 0, 1; got {self.d!r}")

    def __call__(self, a: RationalLike = 0, b: RationalLike = 0) -> "QuadraticFieldElement":
        return QuadraticFieldElement(as_rational(a), as_rational(b), self.d)

    @property
    def gen(self) -> "QuadraticFieldElement":
        return self(0, 1)

    def coerce(self, x) -> "QuadraticFieldElement":
        if isinstance(x, QuadraticFieldElement):
            if x.d != self.d:
                raise ValueError(f"element of Q(sqrt {x.d}) is not in Q(sqrt {self.d})")
            return x
        return self(as_rational(x), 0)

    def sqrt(self, x) -> "QuadraticFieldElement | None":
        """A square root of ``x`` inside this field, or None."""
        x = self.coerce(x)
        a, b, d = x.a, x.b, self.d
        if b == 0:
            r = rational_sqrt(a)
            if r is not None:
                return self(r, 0)
            r = rational_sqrt(a / d)
            return None if r is None else self(0, r)
        # (s + t*sqrt d)^2 = a + b*sqrt d  =>  4 s^4 - 4 a s^2 + d b^2 = 0
        n = rational_sqrt(a * a - d * b * b)
        if n is None:
            return None
        for s2 in ((a + n) / 2, (a - n) / 2):
            s = rational_sqrt(s2)
            if s:
                root = self(s, b / (2 * s))
                if root * root == x:
                    return root
        return None

    def __str__(self):
        return "Q(i)" if self.d == -1 else f"Q(sqrt({self.d}))"


@dataclass(frozen=True)
class QuadraticFieldElement:
    """a + b*sqrt(d) with rational a, b."""

    a: Fraction
    b: Fraction
    d: int

    def __post_init__(self):
        object.__setattr__(self, "a", as_rational(self.a))
        object.__setattr__(self, "b", as_rational(self.b))

    def _lift(self, other) -> "QuadraticFieldElement | None":
        if isinstance(other, QuadraticFieldElement):
            if other.d != self.d:
                raise ValueError(f"mismatched quadratic fields: d={self.d} and d={other.d}")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticFieldElement(Fraction(other), Fraction(0), self.d)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QuadraticFieldElement(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticFieldElement(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QuadraticFieldElement(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QuadraticFieldElement(
            self.a * o.a + self.d * self.b * o.b, self.a * o.b + self.b * o.a, self.d
        )

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticFieldElement":
        return QuadraticFieldElement(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self) -> "QuadraticFieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        return QuadraticFieldElement(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadraticFieldElement(Fraction(1), Fraction(0), self.d)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, QuadraticFieldElement):
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __str__(self):
        if self.b == 0:
            return format_rational(self.a)
        gen = "i" if self.d == -1 else f"sqrt({self.d})"
        if self.b == 1:
            im = gen
        elif self.b == -1:
            im = "-" + gen
        else:
            im = f"{format_rational(self.b)}*{gen}"
        if self.a == 0:
            return im
        sep = "" if im.startswith("-") else "+"
        return f"{format_rational(self.a)}{sep}{im}"

    __repr__ = __str__


def qf_arith(x: QuadraticFieldElement, y: QuadraticFieldElement, op: str) -> QuadraticFieldElement:
    if op not in _RATIONAL_OPS:
        raise ValueError(f"unknown operation {op!r}")
    if isinstance(x, QuadraticFieldElement) and isinstance(y, QuadraticFieldElement) and x.d != y.d:
        raise ValueError(f"mismatched quadratic fields: d={x.d} and d={y.d}")
    if op == "div" and not y:
        raise ZeroDivisionError("division by zero in quadratic field")
    return _RATIONAL_OPS[op](x, y)


def qf_norm(x: QuadraticFieldElement) -> Fraction:
    return x.norm()


# --- F_p --------------------------------------------------------------------

@dataclass(frozen=True)
class PrimeFieldElement:
    residue: int
    p: int

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise ValueError(f"modulus must be an odd prime, got {self.p}")
        object.__setattr__(self, "residue", self.residue % self.p)

    def _lift(self, other):
        if isinstance(other, PrimeFieldElement):
            if other.p != self.p:
                raise ValueError(f"mismatched moduli {self.p} and {other.p}")
            return other.residue
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction):
            return other.numerator * pow(other.denominator, -1, self.p)
        return None

    def _wrap(self, r: int) -> "PrimeFieldElement":
        return PrimeFieldElement(r, self.p)

    def __add__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else self._wrap(self.residue + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else self._wrap(self.residue - o)

    def __rsub__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else self._wrap(o - self.residue)

    def __mul__(self, other):
        o = self._lift(other)
        return NotImplemented if o is None else self._wrap(self.residue * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.residue)

    def inverse(self) -> "PrimeFieldElement":
        if self.residue == 0:
            raise ZeroDivisionError(f"division by zero mod {self.p}")
        return self._wrap(pow(self.residue, -1, self.p))

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * self._wrap(o).inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self._wrap(o) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return self._wrap(pow(self.residue, n, self.p))

    def __eq__(self, other):
        if isinstance(other, PrimeFieldElement):
            return self.p == other.p and self.residue == other.residue
        if isinstance(other, int):
            return (self.residue - other) % self.p == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.residue, self.p))

    def __bool__(self):
        return self.residue != 0

    def __int__(self):
        return self.residue

    def __repr__(self):
        return f"{self.residue} mod {self.p}"


def ff_arith(x: PrimeFieldElement, y: PrimeFieldElement, op: str) -> PrimeFieldElement:
    if op not in _RATIONAL_OPS:
        raise ValueError(f"unknown operation {op!r}")
    return _RATIONAL_OPS[op](x, y)


def ff_is_square(x: PrimeFieldElement) -> bool:
    """Euler's criterion."""
    return pow(x.residue, (x.p - 1) // 2, x.p) in (0, 1)


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1
