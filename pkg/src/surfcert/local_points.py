"""Local solvability certificates and the two-component approximation witness.

Points over Q_p are never materialised.  A smooth point mod p (some partial
derivative a unit) is recorded together with the partial derivative values;
Hensel's lemma then guarantees a p-adic lift, and the record can be re-checked
from its serialised form alone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .exact_arith import odd_primes_up_to
from .pencil import X_VARS, GeometryError, conic_matrix
from .poly import MultiPoly, parse_poly

REAL = "real"
Place = Union[int, str]


class LocalPointError(ValueError):
    pass


def place_label(v: Place) -> str:
    return REAL if v == REAL else f"p={v}"


def _check_place(v: Place) -> Place:
    if v == REAL:
        return v
    if isinstance(v, int) and v > 2 and all(v % q for q in range(2, int(v**0.5) + 1)):
        return v
    raise LocalPointError(f"unsupported place {v!r}: use an odd prime or {REAL!r}")


def _mod(c, p: int) -> int:
    c = Fraction(c)
    if c.denominator % p == 0:
        raise LocalPointError(f"coefficient {c} is not p-integral at p={p}")
    return c.numerator * pow(c.denominator, -1, p) % p


class _ModPForm:
    """Integer reduction of a rational polynomial, for fast repeated evaluation."""

    def __init__(self, f: MultiPoly, p: int):
        self.p = p
        self.variables = f.variables
        self.terms = [(e, _mod(c, p)) for e, c in f.terms.items()]
        self.terms = [(e, c) for e, c in self.terms if c]

    def __call__(self, point: Sequence[int]) -> int:
        p = self.p
        total = 0
        for e, c in self.terms:
            t = c
            for x, k in zip(point, e):
                if k:
                    t = t * pow(x, k, p) % p
            total += t
        return total % p


def _projective_points(p: int, n: int = 3):
    """Normalised representatives of P^{n-1}(F_p): last nonzero entry equals 1."""
    for pos in reversed(range(n)):
        for head in itertools.product(range(p), repeat=pos):
            yield tuple(head) + (1,) + (0,) * (n - pos - 1)


def _require_plane_form(f: MultiPoly) -> MultiPoly:
    if len(f.used_variables()) > 3 or not f.is_homogeneous():
        raise LocalPointError(f"{f.to_text()} is not a homogeneous form in three variables")
    if len(f.variables) != 3:
        used = [v for v in f.variables if v in f.used_variables()]
        extra = [v for v in X_VARS if v not in used]
        f = f.with_variables(tuple(used + extra)[:3])
    return f


def count_plane_curve_mod_p(f: MultiPoly, p: int) -> int:
    """Number of F_p-points of the plane curve f = 0, by enumeration."""
    if p < 3 or p % 2 == 0:
        raise LocalPointError("p must be an odd prime")
    f = _require_plane_form(f)
    red = _ModPForm(f, p)
    return sum(1 for P in _projective_points(p) if red(P) == 0)


@dataclass
class LocalPointCertificate:
    place: Place
    curve: str
    equation: str
    point: tuple
    partials: tuple
    valid: bool
    reason: str
    variables: tuple = X_VARS

    def to_dict(self) -> dict:
        return {
            "place": place_label(self.place),
            "curve": self.curve,
            "equation": self.equation,
            "variables": list(self.variables),
            "point": [str(c) for c in self.point] if self.point is not None else None,
            "partials": [str(c) for c in self.partials],
            "valid": self.valid,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LocalPointCertificate":
        label = data["place"]
        place = REAL if label == REAL else int(label.removeprefix("p="))
        point = None if data["point"] is None else tuple(Fraction(c) for c in data["point"])
        return cls(
            place,
            data["curve"],
            data["equation"],
            point,
            tuple(Fraction(c) for c in data["partials"]),
            data["valid"],
            data["reason"],
            tuple(data["variables"]),
        )


def hensel_lift_certify(f: MultiPoly, p: int, point: Sequence[int], curve: str = "") -> LocalPointCertificate:
    """Certify a Q_p-point from a smooth point of f mod p.

    A point that is singular mod p gives an invalid certificate rather than an
    error; a point that is not on the curve mod p is an input error.
    """
    f = _require_plane_form(f)
    pt = tuple(int(c) % p for c in point)
    if not any(pt):
        raise LocalPointError("the zero vector is not a projective point")
    if _ModPForm(f, p)(pt) != 0:
        raise LocalPointError(f"{pt} does not lie on {f.to_text()} mod {p}")
    partials = tuple(_ModPForm(f.diff(v), p)(pt) for v in f.variables)
    valid = any(partials)
    reason = "unit partial derivative" if valid else "all partial derivatives vanish mod p"
    return LocalPointCertificate(p, curve or f.to_text(), f.to_text(), pt, partials, valid, reason, f.variables)


def verify_local_certificate(cert: LocalPointCertificate | dict) -> bool:
    """Re-check a serialised certificate without access to its builder."""
    if isinstance(cert, dict):
        cert = LocalPointCertificate.from_dict(cert)
    if not cert.valid:
        return False
    f = parse_poly(cert.equation, cert.variables)
    assign = dict(zip(cert.variables, cert.point))
    if cert.place == REAL:
        return f.evaluate(assign) == 0 and any(f.diff(v).evaluate(assign) != 0 for v in cert.variables)
    p = cert.place
    pt = tuple(int(c) for c in cert.point)
    if _ModPForm(f, p)(pt) != 0:
        return False
    return any(_ModPForm(f.diff(v), p)(pt) for v in cert.variables)


def _diagonalize(M: list[list]) -> list:
    """Diagonal entries of a congruent diagonal form (symmetric elimination over Q)."""
    A = [[Fraction(x) for x in row] for row in M]
    n = len(A)
    diag = []
    active = list(range(n))
    while active:
        piv = next((i for i in active if A[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i < j and A[i][j] != 0), None)
            if pair is None:
                diag.extend(0 for _ in active)
                break
            i, j = pair
            # e_i -> e_i + e_j makes the (i, i) entry 2 A[i][j] != 0
            for k in range(n):
                A[i][k] += A[j][k]
            for k in range(n):
                A[k][i] += A[k][j]
            piv = i
        d = A[piv][piv]
        diag.append(d)
        rest = [k for k in active if k != piv]
        for r in rest:
            m = A[r][piv] / d
            for c in rest:
                A[r][c] -= m * A[piv][c]
        for r in rest:
            A[r][piv] = A[piv][r] = Fraction(0)
        active = rest
    return diag


def real_solvability_conic(q: MultiPoly) -> tuple[bool, dict]:
    """Does q = 0 have a nontrivial real point?  Witness is the signature."""
    try:
        M = conic_matrix(q, q.variables if len(q.variables) == 3 else X_VARS)
    except GeometryError as exc:
        raise LocalPointError(f"unsupported form: {exc}") from None
    if any(isinstance(x, MultiPoly) for row in M for x in row):
        raise LocalPointError("coefficients must be rational")
    diag = _diagonalize(M)
    signs = tuple("+" if d > 0 else "-" if d < 0 else "0" for d in diag)
    solvable = "0" in signs or ("+" in signs and "-" in signs)
    return solvable, {"diagonal": [str(d) for d in diag], "signature": "".join(signs)}


def _find_smooth_point(f: MultiPoly, p: int):
    red = _ModPForm(f, p)
    grads = [_ModPForm(f.diff(v), p) for v in f.variables]
    for P in _projective_points(p):
        if red(P) == 0 and any(g(P) for g in grads):
            return P
    return None


@dataclass
class SweepResult:
    curve: str
    bound: int
    certificates: list[LocalPointCertificate]
    missing: list[int] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "curve": self.curve,
            "bound": self.bound,
            "certified_primes": [c.place for c in self.certificates if c.valid],
            "missing_primes": self.missing,
            "certificates": [c.to_dict() for c in self.certificates],
        }


def everywhere_local_sweep(f: MultiPoly, bound: int = 50, curve: str = "") -> SweepResult:
    """A smooth mod-p point, with Hensel certificate, for each odd p <= bound.

    Primes where no smooth point exists, or where the coefficients are not
    p-integral, are listed in ``missing``.
    """
    if bound < 3:
        raise LocalPointError("sweep bound must be at least 3")
    f = _require_plane_form(f)
    name = curve or f.to_text()
    certs, missing = [], []
    for p in odd_primes_up_to(bound):
        try:
            P = _find_smooth_point(f, p)
        except LocalPointError:
            P = None
        if P is None:
            missing.append(p)
            continue
        certs.append(hensel_lift_certify(f, p, P, name))
    return SweepResult(name, bound, certs, missing)


# --- the two-component witness on x0^2 - x1^2 ----------------------------------

def _cross(a: Sequence, b: Sequence) -> tuple:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _normalize(v: Sequence) -> tuple:
    v = [Fraction(x) for x in v]
    k = max(i for i, x in enumerate(v) if x != 0)
    return tuple(x / v[k] for x in v)


@dataclass
class WAWitness:
    v1: Place
    v2: Place
    P1: tuple
    P2: tuple
    component1: tuple  # coefficients of a linear form
    component2: tuple
    labels: tuple
    singular_point: tuple
    local_certificates: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "places": [place_label(self.v1), place_label(self.v2)],
            "P1": [str(c) for c in self.P1],
            "P2": [str(c) for c in self.P2],
            "components": [[str(c) for c in self.component1], [str(c) for c in self.component2]],
            "labels": list(self.labels),
            "singular_point": [str(c) for c in self.singular_point],
            "local_certificates": [c.to_dict() for c in self.local_certificates],
        }


def wa_witness_build(v1: Place, v2: Place) -> WAWitness:
    """Witness that rational points of x0^2 = x1^2 cannot meet two local conditions.

    The condition at v1 asks for a point near P1 on the line x0 = x1, the one at
    v2 for a point near P2 on x0 = -x1.  A rational point off the common point
    (0:0:1) lies on only one of the lines, so it cannot satisfy both.
    """
    v1, v2 = _check_place(v1), _check_place(v2)
    if v1 == v2:
        raise LocalPointError("the two places must be distinct")
    l1, l2 = (1, -1, 0), (1, 1, 0)
    meet = _normalize(_cross(l1, l2))
    P1, P2 = (1, 1, 0), (1, -1, 0)
    C0 = parse_poly("x0^2 - x1^2", X_VARS)
    certs = []
    for v, P in ((v1, P1), (v2, P2)):
        if v == REAL:
            partials = tuple(C0.diff(x).evaluate(dict(zip(X_VARS, P))) for x in X_VARS)
            certs.append(LocalPointCertificate(REAL, "C0", C0.to_text(), P, partials, any(partials), "real smooth point"))
        else:
            certs.append(hensel_lift_certify(C0, v, P, "C0"))
    return WAWitness(v1, v2, P1, P2, l1, l2, ("x0 = x1", "x0 = -x1"), meet, certs)


def verify_wa_witness(data: WAWitness | dict) -> dict:
    """Re-derive the structural assertions from exact coordinates alone."""
    if isinstance(data, WAWitness):
        data = data.to_dict()
    P1 = tuple(Fraction(c) for c in data["P1"])
    P2 = tuple(Fraction(c) for c in data["P2"])
    l1, l2 = (tuple(Fraction(c) for c in comp) for comp in data["components"])
    S = tuple(Fraction(c) for c in data["singular_point"])
    meet = _cross(l1, l2)
    distinct = any(meet)
    checks = {
        "distinct_components": distinct,
        "unique_intersection": distinct and _normalize(meet) == _normalize(S) and _dot(l1, S) == 0 and _dot(l2, S) == 0,
        "P1_single_component": _dot(l1, P1) == 0 and _dot(l2, P1) != 0,
        "P2_single_component": _dot(l2, P2) == 0 and _dot(l1, P2) != 0,
        "avoids_singular_point": any(P1) and any(P2) and _normalize(P1) != _normalize(S) and _normalize(P2) != _normalize(S),
        "local_certificates": all(verify_local_certificate(c) for c in data.get("local_certificates", [])),
    }
    checks["passed"] = all(checks.values())
    return checks
