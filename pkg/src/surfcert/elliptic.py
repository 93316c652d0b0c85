"""Short Weierstrass curves y^2 z = x^3 + a x z^2 + b z^3 over Q and Q(sqrt d).

Torsion over Q comes from Lutz-Nagell enumeration.  Torsion over Q(sqrt d)
is bounded by point counts at split primes and then found with the 2- and
3-division polynomials; anything needing a higher division polynomial is
reported as :class:`TorsionBoundError` instead of being guessed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from .exact_arith import (
    PrimeFieldElement,
    QuadraticField,
    QuadraticFieldElement,
    as_rational,
    divisors,
    factorize,
    ff_is_square,
    is_prime,
    legendre,
    rational_sqrt,
)
from .poly import MultiPoly, UniPoly, quad_field_roots, rational_roots

MAX_TORSION_ORDER = 12

RANK_ZERO_ASSUMPTION = "rank-zero: E(Q) and its quadratic twist have rank 0, so torsion is the full Mordell-Weil group"


class CurveError(ValueError):
    pass


class TorsionBoundError(CurveError):
    pass


@dataclass(frozen=True)
class WeierstrassCurve:
    a: Fraction
    b: Fraction
    d: int | None = None  # None: over Q; otherwise over Q(sqrt d)

    def __post_init__(self):
        object.__setattr__(self, "a", as_rational(self.a))
        object.__setattr__(self, "b", as_rational(self.b))
        if self.d is not None:
            QuadraticField(self.d)
        if discriminant(self) == 0:
            raise CurveError(f"singular curve y^2 = x^3 + {self.a}x + {self.b}")

    @property
    def field(self) -> QuadraticField | None:
        return QuadraticField(self.d) if self.d is not None else None

    def field_name(self) -> str:
        return "Q" if self.d is None else str(self.field)

    def base_change(self, d: int | None) -> "WeierstrassCurve":
        return WeierstrassCurve(self.a, self.b, d)

    def coerce(self, x):
        if self.d is None:
            if isinstance(x, QuadraticFieldElement):
                if x.b != 0:
                    raise CurveError(f"{x} is not rational")
                return x.a
            return as_rational(x)
        return self.field.coerce(x)

    def rhs(self, x):
        return x * x * x + self.a * x + self.b

    def contains(self, x, y, z=1) -> bool:
        return y * y * z == x * x * x + self.a * x * z * z + self.b * z * z * z

    def identity(self) -> "ECPoint":
        return ECPoint(self, 0, 1, 0)

    def point(self, x, y, z=1) -> "ECPoint":
        return ECPoint(self, x, y, z)

    def homogeneous_equation(self, variables=("w0", "w1", "w2")) -> MultiPoly:
        """y^2 z - (x^3 + a x z^2 + b z^3) in the given coordinate names."""
        x, y, z = MultiPoly.gens(variables)
        return y**2 * z - (x**3 + x * z**2 * self.a + z**3 * self.b)

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def __str__(self):
        return f"y^2 = x^3 + ({self.a})x + ({self.b}) over {self.field_name()}"


def discriminant(curve: WeierstrassCurve) -> Fraction:
    return -16 * (4 * curve.a**3 + 27 * curve.b**2)


class ECPoint:
    """Projective point normalised to z in {0, 1}; the identity is (0 : 1 : 0)."""

    __slots__ = ("curve", "x", "y", "z")

    def __init__(self, curve: WeierstrassCurve, x, y, z=1):
        x, y, z = curve.coerce(x), curve.coerce(y), curve.coerce(z)
        if z == 0:
            if x != 0 or y == 0:
                raise CurveError(f"({x} : {y} : 0) is not on {curve}")
            x, y = curve.coerce(0), curve.coerce(1)
        elif z != 1:
            x, y, z = x / z, y / z, curve.coerce(1)
        if not curve.contains(x, y, z):
            raise CurveError(f"({x} : {y} : {z}) is not on {curve}")
        self.curve, self.x, self.y, self.z = curve, x, y, z

    def is_identity(self) -> bool:
        return self.z == 0

    def coords(self) -> tuple:
        return (self.x, self.y, self.z)

    def __eq__(self, other):
        if not isinstance(other, ECPoint):
            return NotImplemented
        return (self.curve.a, self.curve.b) == (other.curve.a, other.curve.b) and self.coords() == other.coords()

    def __hash__(self):
        return hash(self.coords())

    def __neg__(self):
        return negate(self)

    def __add__(self, other):
        return add_points(self, other)

    def __sub__(self, other):
        return add_points(self, negate(other))

    def __rmul__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        return scalar_mul(n, self)

    def __repr__(self):
        return f"({self.x} : {self.y} : {self.z})"


def negate(P: ECPoint) -> ECPoint:
    if P.is_identity():
        return P
    return ECPoint(P.curve, P.x, -P.y)


def add_points(P: ECPoint, Q: ECPoint) -> ECPoint:
    if (P.curve.a, P.curve.b) != (Q.curve.a, Q.curve.b):
        raise CurveError("points lie on different curves")
    E = P.curve if P.curve.d is not None else Q.curve
    if P.is_identity():
        return ECPoint(E, Q.x, Q.y, Q.z)
    if Q.is_identity():
        return ECPoint(E, P.x, P.y, P.z)
    if P.x == Q.x:
        if P.y + Q.y == 0:
            return E.identity()
        slope = (3 * P.x * P.x + E.a) / (2 * P.y)
    else:
        slope = (Q.y - P.y) / (Q.x - P.x)
    x3 = slope * slope - P.x - Q.x
    y3 = slope * (P.x - x3) - P.y
    return ECPoint(E, x3, y3)


def scalar_mul(n: int, P: ECPoint) -> ECPoint:
    if n < 0:
        return scalar_mul(-n, negate(P))
    result = P.curve.identity()
    base = P
    while n:
        if n & 1:
            result = add_points(result, base)
        base = add_points(base, base)
        n >>= 1
    return result


def order(P: ECPoint, ceiling: int = MAX_TORSION_ORDER) -> int | None:
    """Order of P if it is at most ``ceiling``, else None."""
    Q = P
    for n in range(1, ceiling + 1):
        if Q.is_identity():
            return n
        Q = add_points(Q, P)
    return None


def quadratic_twist(curve: WeierstrassCurve, d: int) -> WeierstrassCurve:
    """Twist by d: (a, b) -> (a d^2, b d^3)."""
    if d == 0:
        raise CurveError("twist parameter must be nonzero")
    return WeierstrassCurve(curve.a * d * d, curve.b * d**3, curve.d)


# --- torsion ------------------------------------------------------------------

@dataclass
class TorsionReport:
    curve: WeierstrassCurve
    points: list[ECPoint]
    methods: list[str]
    assumptions: list[str] = field(default_factory=list)
    witness: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = set(self.points)
        for P in self.points:
            if negate(P) not in pts:
                raise CurveError(f"torsion set not closed under negation at {P}")
            for Q in self.points:
                if add_points(P, Q) not in pts:
                    raise CurveError(f"torsion set not closed under addition at {P} + {Q}")
        self.points = sorted(pts, key=_point_key)

    @property
    def order(self) -> int:
        return len(self.points)


def _point_key(P: ECPoint):
    def k(c):
        if isinstance(c, QuadraticFieldElement):
            return (c.a, c.b)
        return (Fraction(c), Fraction(0))
    return (int(P.z != 0), k(P.x), k(P.y))


def _closure(points: list[ECPoint]) -> list[ECPoint]:
    group = {P.curve.identity() for P in points} | set(points)
    changed = True
    while changed:
        changed = False
        for P in list(group):
            for Q in list(group):
                R = add_points(P, Q)
                if R not in group:
                    group.add(R)
                    changed = True
        if len(group) > MAX_TORSION_ORDER:
            raise TorsionBoundError(f"generated subgroup exceeds order {MAX_TORSION_ORDER}")
    return list(group)


def lutz_nagell_torsion(curve: WeierstrassCurve) -> TorsionReport:
    """Rational torsion of a curve with integer a, b.

    Candidates are integral points with y = 0 or y^2 | disc; each survivor is
    kept only if its order is at most 12.
    """
    if not curve.is_integral():
        raise CurveError("Lutz-Nagell needs integer coefficients")
    E = curve.base_change(None)
    a, b = int(E.a), int(E.b)
    disc = int(discriminant(E))
    candidates = [0] + [y for y in divisors(disc) if disc % (y * y) == 0]
    found = [E.identity()]
    checked = 0
    for y in candidates:
        cubic = UniPoly([b - y * y, a, 0, 1], "x")
        for x in rational_roots(cubic):
            if x.denominator != 1:
                continue
            for yy in {y, -y}:
                checked += 1
                P = E.point(x, yy)
                if order(P) is not None:
                    found.append(P)
    return TorsionReport(
        E,
        found,
        ["lutz-nagell"],
        witness={"y_candidates": len(candidates), "integral_points_tested": checked},
    )


def reduce_and_count(curve: WeierstrassCurve, p: int) -> int:
    """#E(F_p) by enumeration over x."""
    if p < 3 or not is_prime(p):
        raise CurveError(f"{p} is not an odd prime")
    if any(c.denominator % p == 0 for c in (curve.a, curve.b)) or discriminant(curve).numerator % p == 0:
        raise CurveError(f"{curve} has bad reduction at {p}")
    a = PrimeFieldElement(curve.a.numerator, p) / curve.a.denominator
    b = PrimeFieldElement(curve.b.numerator, p) / curve.b.denominator
    count = 1
    for x in range(p):
        fx = PrimeFieldElement(x**3, p) + a * x + b
        if not fx:
            count += 1
        elif ff_is_square(fx):
            count += 2
    return count


def torsion_bound_gcd(curve: WeierstrassCurve, primes) -> int:
    primes = list(primes)
    if not primes:
        raise CurveError("need at least one prime")
    return reduce(math.gcd, (reduce_and_count(curve, p) for p in primes))


def good_primes(curve: WeierstrassCurve, bound: int, split_in: int | None = None) -> list[int]:
    """Odd primes <= bound of good reduction; optionally only those where d is a nonzero square."""
    out = []
    disc = discriminant(curve)
    for p in range(3, bound + 1):
        if not is_prime(p) or disc.numerator % p == 0:
            continue
        if any(c.denominator % p == 0 for c in (curve.a, curve.b)):
            continue
        if split_in is not None and legendre(split_in, p) != 1:
            continue
        out.append(p)
    return out


def division_polynomial(curve: WeierstrassCurve, ell: int) -> UniPoly:
    """x-coordinate part of the ell-division polynomial, ell in {2, 3}."""
    a, b = curve.a, curve.b
    if ell == 2:
        return UniPoly([b, a, 0, 1], "x")
    if ell == 3:
        return UniPoly([-a * a, 12 * b, 6 * a, 0, 3], "x")
    raise TorsionBoundError(f"division polynomial for ell = {ell} not implemented")


def _ell_torsion_points(curve: WeierstrassCurve, ell: int) -> tuple[list[ECPoint], dict]:
    K = curve.field
    psi = division_polynomial(curve, ell)
    xs = quad_field_roots(psi, K.d) if K is not None else rational_roots(psi)
    pts, rejected = [], []
    for x in sorted(xs, key=str):
        y = K.sqrt(curve.rhs(K.coerce(x))) if K is not None else rational_sqrt(curve.rhs(x))
        if y is None:
            rejected.append(str(x))
            continue
        for yy in {y, -y}:
            P = curve.point(x, yy)
            if scalar_mul(ell, P).is_identity():
                pts.append(P)
    return pts, {
        "division_polynomial": psi.to_text(),
        "x_roots": sorted(str(x) for x in xs),
        "x_rejected_no_y": rejected,
    }


def torsion_over_quadratic_field(curve: WeierstrassCurve, d: int, primes=None, prime_bound: int = 60) -> TorsionReport:
    """Full torsion subgroup of E(Q(sqrt d)).

    The order bound is gcd #E(F_p) over split primes p (residue field F_p);
    the subgroup itself is built from division-polynomial roots.  The report
    always carries the rank-zero assumption: nothing here proves that the
    torsion exhausts E(Q(sqrt d)).
    """
    K = QuadraticField(d)
    E = curve.base_change(None)
    if primes is None:
        primes = good_primes(E, prime_bound, split_in=d)
    primes = list(primes)
    for p in primes:
        if legendre(d, p) != 1:
            raise CurveError(f"{p} does not split in {K}")
    counts = {p: reduce_and_count(E, p) for p in primes}
    bound = reduce(math.gcd, counts.values())
    ells = factorize(bound) if bound > 1 else {}
    big = [ell for ell in ells if ell > 3]
    if big:
        raise TorsionBoundError(f"order bound {bound} has prime factors {big}: bound too weak, add primes")
    EK = curve.base_change(d)
    gens = []
    per_ell = {}
    for ell, e in sorted(ells.items()):
        pts, info = _ell_torsion_points(EK, ell)
        per_ell[ell] = info | {"points": [repr(P) for P in pts]}
        if pts and e > 1:
            raise TorsionBoundError(
                f"{ell}-torsion is nontrivial and {ell}^2 divides the bound {bound}: bound too weak, add primes"
            )
        gens.extend(pts)
    group = _closure([EK.identity()] + gens)
    if bound % len(group):
        raise CurveError(f"found subgroup of order {len(group)} not dividing bound {bound}")
    return TorsionReport(
        EK,
        group,
        ["reduction-bound", "division-poly"],
        assumptions=[RANK_ZERO_ASSUMPTION],
        witness={
            "split_primes": primes,
            "point_counts": {str(p): n for p, n in counts.items()},
            "order_bound": bound,
            "division_polynomials": {str(k): v for k, v in per_ell.items()},
        },
    )
