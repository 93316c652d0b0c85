"""Conic pencils, a covering E -> P^1, and the fibred surface they define.

The surface lives in P^2 x P^2 with coordinates (w0:w1:w2) x (x0:x1:x2) and is
cut out by  N(w) F(x) + D(w) G(x) = 0  together with the curve equation, where
gamma = (N : D) and u0 F + u1 G is the pencil.  Smoothness is certified along
the fibration: a transversal pencil has a smooth total space, and pulling it
back along a map that is unramified over the singular members keeps it smooth.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .elliptic import WeierstrassCurve, discriminant
from .exact_arith import QuadraticFieldElement, format_rational
from .poly import (
    DegenerateEliminationError,
    MultiPoly,
    PolynomialError,
    UniPoly,
    eliminate_with_trace,
    jacobian_determinant,
    poly_gcd,
    rational_roots,
    resultant,
    root_multiplicity,
)

X_VARS = ("x0", "x1", "x2")
W_VARS = ("w0", "w1", "w2")
U_VARS = ("u0", "u1")


class GeometryError(ValueError):
    pass


class BaseLocusError(GeometryError):
    pass


def _fmt(c) -> str:
    if isinstance(c, (int, Fraction)):
        return format_rational(c)
    return str(c)


# --- points of P^1 -------------------------------------------------------------

def p1_point(u0, u1) -> tuple:
    """Normalise (u0 : u1) to (c : 1) or (1 : 0)."""
    if u1 == 0:
        if u0 == 0:
            raise GeometryError("(0 : 0) is not a point of P^1")
        return (1, 0)
    c = u0 / u1 if not isinstance(u0, int) or not isinstance(u1, int) else Fraction(u0, u1)
    if isinstance(c, Fraction) and c.denominator == 1:
        c = c.numerator
    if isinstance(c, QuadraticFieldElement) and c.b == 0:
        c = c.a if c.a.denominator != 1 else c.a.numerator
    return (c, 1)


def format_p1(P: tuple) -> str:
    return f"({_fmt(P[0])}:{_fmt(P[1])})"


INFINITY = (1, 0)


# --- common zeros in P^2 --------------------------------------------------------

@dataclass
class CommonZeroResult:
    """Outcome of deciding whether polynomials share a zero in P^2.

    ``has_zero`` is None when elimination could neither rule a zero out nor
    exhibit one with rational coordinates.
    """

    has_zero: bool | None
    witnesses: list[tuple] = field(default_factory=list)
    charts: list[dict] = field(default_factory=list)
    note: str = ""

    def summary(self) -> dict:
        return {
            "has_common_zero": self.has_zero,
            "witnesses": [[_fmt(c) for c in w] for w in self.witnesses],
            "charts": self.charts,
            "note": self.note,
        }


def _rational_points_on_line(polys: Sequence[MultiPoly], var: str) -> tuple[UniPoly, list]:
    g = UniPoly([], var)
    for f in polys:
        g = poly_gcd(g, UniPoly.from_multi(f.drop_unused(), var))
    if g.is_zero():
        return g, [0]
    if g.degree() == 0:
        return g, []
    return g, sorted(rational_roots(g))


def common_projective_zeros(system: Sequence[MultiPoly], variables: Sequence[str]) -> CommonZeroResult:
    """Decide whether homogeneous ``system`` in three variables has a common zero.

    P^2 is covered by {v2 = 1}, {v2 = 0, v1 = 1} and the point (1:0:0).  The
    affine chart is settled by elimination: a constant eliminant rules out
    common zeros there, otherwise rational zeros are searched for.
    """
    v0, v1, v2 = variables
    system = [f.with_variables(variables) for f in system if not f.is_zero()]
    witnesses: list[tuple] = []
    charts: list[dict] = []
    undecided = []

    aff = [f.subs({v2: 1}).with_variables((v0, v1)) for f in system]
    nonzero = [f for f in aff if not f.is_zero()]
    if any(f.is_constant() for f in nonzero):
        charts.append({"chart": f"{v2}=1", "eliminant": "1", "reason": "nonzero constant"})
    elif len(nonzero) <= 1:
        # a single nonconstant equation (or none) always has affine zeros
        charts.append({"chart": f"{v2}=1", "reason": "fewer than two independent equations"})
        if nonzero:
            witnesses.append(("curve " + nonzero[0].to_text(), "", 1))
        else:
            witnesses.append((0, 0, 1))
    else:
        try:
            g, stages = eliminate_with_trace(nonzero, [v1], keep=v0)
        except DegenerateEliminationError as exc:
            charts.append({"chart": f"{v2}=1", "eliminant": None, "reason": str(exc)})
            undecided.append(f"{v2}=1: {exc}")
        else:
            charts.append({"chart": f"{v2}=1", "eliminant": g.to_text(), "stages": [s.summary() for s in stages]})
            found_here = 0
            for r in sorted(rational_roots(g)) if g.degree() > 0 else []:
                _, ys = _rational_points_on_line([f.subs({v0: r}) for f in nonzero], v1)
                for y in ys:
                    witnesses.append((r, y, 1))
                    found_here += 1
            if g.degree() > 0 and found_here == 0:
                undecided.append(f"{v2}=1: eliminant {g.to_text()} has no rational common zero")

    line = [f.subs({v2: 0, v1: 1}) for f in system]
    g, xs = _rational_points_on_line(line, v0)
    charts.append({"chart": f"{v2}=0,{v1}=1", "gcd": g.to_text() if not g.is_zero() else "0"})
    witnesses.extend((r, 1, 0) for r in xs)
    if g.degree() > 0 and not xs:
        witnesses.append(("root of " + g.to_text(), 1, 0))

    if all(f.evaluate({v0: 1, v1: 0, v2: 0}) == 0 for f in system):
        witnesses.append((1, 0, 0))
    charts.append({"chart": "(1:0:0)", "vanishes": (1, 0, 0) in witnesses})

    if witnesses:
        return CommonZeroResult(True, witnesses, charts)
    if undecided:
        return CommonZeroResult(None, [], charts, "; ".join(undecided))
    return CommonZeroResult(False, [], charts)


# --- conics and pencils -----------------------------------------------------------

def conic_matrix(q: MultiPoly, xvars: Sequence[str] = X_VARS) -> list[list]:
    """Symmetric M with q = x^T M x.

    Entries are rationals when q only involves ``xvars``; otherwise they are
    polynomials in the remaining variables (e.g. u0, u1 for a pencil member).
    """
    xvars = tuple(xvars)
    others = tuple(v for v in q.variables if v not in xvars)
    q = q.with_variables(xvars + others)
    if q.is_zero() or not q.is_homogeneous_in(xvars) or q.degree_in(xvars) != 2:
        raise GeometryError(f"{q.to_text()} is not a quadratic form in {xvars}")
    M = [[MultiPoly.constant(0, others) for _ in range(3)] for _ in range(3)]
    for e, c in q.terms.items():
        xe, oe = e[:3], e[3:]
        coeff = MultiPoly(others, {oe: c})
        idx = [i for i in range(3) for _ in range(xe[i])]
        i, j = idx
        if i == j:
            M[i][i] = M[i][i] + coeff
        else:
            half = coeff / 2
            M[i][j] = M[i][j] + half
            M[j][i] = M[j][i] + half
    if not others:
        return [[m.constant_value() for m in row] for row in M]
    return M


def det3(M) -> object:
    return (
        M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
        - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
        + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])
    )


@dataclass
class ConicPencil:
    """The pencil u0 F + u1 G of plane conics."""

    F: MultiPoly
    G: MultiPoly

    def __post_init__(self):
        self.F = self.F.with_variables(X_VARS)
        self.G = self.G.with_variables(X_VARS)
        for name, q in (("F", self.F), ("G", self.G)):
            if q.is_zero() or not q.is_homogeneous() or q.total_degree() != 2:
                raise GeometryError(f"{name} = {q.to_text()} is not a nonzero quadratic form")
        if _proportional(self.F, self.G):
            raise GeometryError("pencil degenerate: F and G are proportional")

    def member(self) -> MultiPoly:
        """s' = u0 F + u1 G over (u0, u1, x0, x1, x2)."""
        vs = U_VARS + X_VARS
        u0, u1 = MultiPoly.gens(vs)[:2]
        return u0 * self.F.with_variables(vs) + u1 * self.G.with_variables(vs)


def _proportional(f: MultiPoly, g: MultiPoly) -> bool:
    f, g = f._align(g)
    if f.is_zero() or g.is_zero():
        return True
    e = f.leading_exponent()
    if e not in g.terms:
        return False
    return f * g.terms[e] == g * f.terms[e]


@dataclass
class CriticalLocus:
    determinant: MultiPoly
    points: list[tuple]  # (P^1 point, multiplicity)
    irrational_factor: UniPoly | None

    def point_set(self) -> set[tuple]:
        return {P for P, _ in self.points}

    def summary(self) -> dict:
        return {
            "determinant": self.determinant.to_text(),
            "points": [{"point": format_p1(P), "multiplicity": m} for P, m in self.points],
            "irrational_factor": self.irrational_factor.to_text() if self.irrational_factor else None,
        }


def binary_form_roots(h: MultiPoly, u0: str = "u0", u1: str = "u1") -> tuple[list[tuple], UniPoly | None]:
    """Rational zeros (with multiplicity) of a binary form, plus the leftover factor."""
    h = h.with_variables((u0, u1))
    if h.is_zero():
        raise GeometryError("binary form vanishes identically")
    n = h.total_degree()
    f = UniPoly.from_multi(h.subs({u1: 1}), u0)
    pts = []
    at_inf = n - f.degree()
    if at_inf:
        pts.append((INFINITY, at_inf))
    rest = f
    for r in sorted(rational_roots(f)) if f.degree() > 0 else []:
        m = root_multiplicity(f, r)
        pts.append((p1_point(r, 1), m))
        rest = rest // (UniPoly([-r, 1], u0) ** m)
    leftover = rest.monic() if rest.degree() > 0 else None
    return pts, leftover


def critical_locus(pencil: ConicPencil) -> CriticalLocus:
    """Parameters (u0:u1) whose pencil member is a singular conic."""
    det = det3(conic_matrix(pencil.member()))
    if det.is_zero():
        raise GeometryError("degenerate pencil: every member is singular")
    pts, leftover = binary_form_roots(det)
    pts.sort(key=lambda pm: (pm[0][1], pm[0][0]))
    return CriticalLocus(det.with_variables(U_VARS), pts, leftover)


def gradient_minors(F: MultiPoly, G: MultiPoly, xvars: Sequence[str] = X_VARS) -> list[MultiPoly]:
    gF = [F.diff(v) for v in xvars]
    gG = [G.diff(v) for v in xvars]
    return [gF[i] * gG[j] - gF[j] * gG[i] for i, j in ((0, 1), (0, 2), (1, 2))]


def transversality_check(pencil: ConicPencil) -> tuple[bool, dict]:
    """F = G = 0 meet transversally iff F, G and the gradient minors share no zero."""
    minors = gradient_minors(pencil.F, pencil.G)
    res = common_projective_zeros([pencil.F, pencil.G] + minors, X_VARS)
    witness = {
        "minors": [m.to_text() for m in minors],
        "elimination": res.summary(),
    }
    return res.has_zero is False, witness


def total_space_smoothness(pencil: ConicPencil, transversal: tuple[bool, dict] | None = None) -> tuple[bool, dict]:
    """Smoothness of X' = {u0 F + u1 G = 0} in P^1 x P^2.

    A singular point needs dS/du0 = F = 0, dS/du1 = G = 0 and
    u0 grad F + u1 grad G = 0 with (u0, u1) != 0, i.e. dependent gradients at
    a point of F = G = 0.  Transversality excludes exactly that.
    """
    ok, tw = transversal if transversal is not None else transversality_check(pencil)
    chain = [
        "singular point of X' => F(x) = G(x) = 0 (u-partials)",
        "singular point of X' => u0*grad F(x) + u1*grad G(x) = 0 with (u0,u1) != 0",
        "=> grad F(x), grad G(x) linearly dependent at a point of F = G = 0",
        "transversality: no such x" if ok else "transversality not certified: chain breaks",
    ]
    return ok, {"criterion": "pencil total space smooth via transversality", "implications": chain, "transversal": ok}


# --- maps to P^1 -----------------------------------------------------------------

@dataclass
class MapToP1:
    """gamma = (numerator : denominator) restricted to the curve {equation = 0}."""

    numerator: MultiPoly
    denominator: MultiPoly
    curve_equation: MultiPoly
    variables: tuple = W_VARS

    def __post_init__(self):
        self.variables = tuple(self.variables)
        self.numerator = self.numerator.with_variables(self.variables)
        self.denominator = self.denominator.with_variables(self.variables)
        self.curve_equation = self.curve_equation.with_variables(self.variables)
        N, D = self.numerator, self.denominator
        if N.is_zero() and D.is_zero():
            raise GeometryError("both forms of the map are zero")
        for f in (N, D, self.curve_equation):
            if not f.is_homogeneous():
                raise GeometryError(f"{f.to_text()} is not homogeneous")
        if not N.is_zero() and not D.is_zero() and N.total_degree() != D.total_degree():
            raise GeometryError("numerator and denominator have different degrees")

    @classmethod
    def on_curve(cls, numerator: MultiPoly, denominator: MultiPoly, curve: WeierstrassCurve) -> "MapToP1":
        return cls(numerator, denominator, curve.homogeneous_equation(W_VARS))

    def post_compose_scale(self, lam) -> "MapToP1":
        """(u0 : u1) -> (lam u0 : u1) applied after gamma."""
        return MapToP1(self.numerator * lam, self.denominator, self.curve_equation, self.variables)

    def fiber_form(self, c: tuple) -> MultiPoly:
        """c1 N - c0 D, whose zeros on the curve form the fibre over (c0 : c1)."""
        return self.numerator * c[1] - self.denominator * c[0]


def _exact(c):
    if isinstance(c, QuadraticFieldElement):
        return c
    if isinstance(c, float):
        raise GeometryError("floating-point coordinates are not supported")
    return Fraction(c)


def _coords(P) -> tuple:
    if hasattr(P, "coords"):
        return P.coords()
    return tuple(_exact(c) for c in P)


def gamma_evaluate(gamma: MapToP1, P) -> tuple:
    pt = dict(zip(gamma.variables, _coords(P)))
    if gamma.curve_equation.evaluate(pt) != 0:
        raise GeometryError(f"{_coords(P)} is not on the curve")
    n, d = gamma.numerator.evaluate(pt), gamma.denominator.evaluate(pt)
    if n == 0 and d == 0:
        raise BaseLocusError(f"{tuple(_fmt(c) for c in _coords(P))} is a base point of the map")
    return p1_point(n, d)


def base_locus_disjoint_check(gamma: MapToP1) -> tuple[bool, dict]:
    """True iff numerator, denominator and curve have no common projective zero."""
    if _proportional(gamma.numerator, gamma.denominator):
        return False, {"reason": "proportional forms: map is constant or undefined"}
    res = common_projective_zeros([gamma.numerator, gamma.denominator, gamma.curve_equation], gamma.variables)
    return res.has_zero is False, {"elimination": res.summary()}


def curve_points_at_infinity(curve_eq: MultiPoly, variables: Sequence[str] = W_VARS) -> tuple[list[tuple], UniPoly | None]:
    """Points with last coordinate 0 (rational ones), plus any leftover factor."""
    v0, v1, v2 = variables
    h = curve_eq.with_variables(variables).subs({v2: 0})
    if h.is_zero():
        raise GeometryError("curve contains the line at infinity")
    pts, leftover = binary_form_roots(h, v0, v1)
    return [(P[0], P[1], 0) for P, _ in pts], leftover


def _series_mul(f: list, g: list, n: int) -> list:
    out = [0] * n
    for i, a in enumerate(f[:n]):
        if a == 0:
            continue
        for j, b in enumerate(g[: n - i]):
            out[i + j] = out[i + j] + a * b
    return out


def _series_eval(f: MultiPoly, series: dict, n: int) -> list:
    """f evaluated at truncated power series (lists of coefficients) for its variables."""
    powers = {v: [[1] + [0] * (n - 1)] for v in series}
    out = [0] * n
    for e, c in f.terms.items():
        term = [c] + [0] * (n - 1)
        for v, k in zip(f.variables, e):
            if not k:
                continue
            pw = powers[v]
            while len(pw) <= k:
                pw.append(_series_mul(pw[-1], series[v], n))
            term = _series_mul(term, pw[k], n)
        out = [x + y for x, y in zip(out, term)]
    return out


def _order(f: list) -> int | None:
    return next((i for i, c in enumerate(f) if c != 0), None)


def local_expansion(gamma: MapToP1, P, precision: int = 40) -> dict:
    """Value and ramification index of gamma at a smooth curve point P.

    Works also at base points of the defining forms: a local parameter t is
    chosen among the affine coordinates, the other coordinate is expanded as
    a power series in t, and the orders of vanishing of N and D are compared.
    """
    coords = _coords(P)
    k = next(i for i in (2, 1, 0) if coords[i] != 0)
    scale = coords[k]
    chart = {gamma.variables[k]: 1}
    a, b = [v for i, v in enumerate(gamma.variables) if i != k]
    base = {v: coords[i] / scale for i, v in enumerate(gamma.variables) if i != k}
    C = gamma.curve_equation.subs(chart)
    if C.evaluate(base) != 0:
        raise GeometryError(f"{coords} is not on the curve")
    if C.diff(b).evaluate(base) == 0:
        a, b = b, a
    Cb = _exact(C.diff(b).evaluate(base))
    if Cb == 0:
        raise GeometryError(f"{coords} is a singular point of the curve")
    n = precision
    sa = [base[a], 1] + [0] * (n - 2)
    sb = [base[b]] + [0] * (n - 1)
    for i in range(1, n):
        # C(sa, sb) vanishes below t^i; fix the t^i coefficient linearly
        val = _series_eval(C, {a: sa, b: sb}, i + 1)[i]
        sb[i] = -val / Cb
    Ns = _series_eval(gamma.numerator.subs(chart), {a: sa, b: sb}, n)
    Ds = _series_eval(gamma.denominator.subs(chart), {a: sa, b: sb}, n)
    on, od = _order(Ns), _order(Ds)
    if on is None and od is None:
        raise GeometryError(f"map vanishes to order >= {n} at {coords}: increase precision")
    low = min(o for o in (on, od) if o is not None)
    value = p1_point(Ns[low], Ds[low])
    fib = [value[1] * x - value[0] * y for x, y in zip(Ns, Ds)]
    m = _order(fib)
    if m is None:
        raise GeometryError(f"ramification index at {coords} exceeds precision {n}")
    return {
        "value": value,
        "ramification_index": m - low,
        "base_order": low,
        "parameter": a,
    }


def gamma_extend(gamma: MapToP1, P) -> tuple:
    """gamma at P, resolving base points of the defining forms."""
    try:
        return gamma_evaluate(gamma, P)
    except BaseLocusError:
        return local_expansion(gamma, P)["value"]


def is_ramified_at(gamma: MapToP1, P) -> bool:
    """Jacobian criterion: curve and fibre curve meet non-transversally at P."""
    coords = _coords(P)
    try:
        c = gamma_evaluate(gamma, coords)
    except BaseLocusError:
        return local_expansion(gamma, coords)["ramification_index"] > 1
    k = next(i for i in (2, 1, 0) if coords[i] != 0)
    scale = coords[k]
    local = {v: coords[i] / scale for i, v in enumerate(gamma.variables) if i != k}
    chart = {gamma.variables[k]: 1}
    a, b = [v for i, v in enumerate(gamma.variables) if i != k]
    J = jacobian_determinant(gamma.curve_equation.subs(chart), gamma.fiber_form(c).subs(chart), a, b)
    return J.evaluate(local) == 0


def gamma_degree(gamma: MapToP1, seed: int = 0, max_draws: int = 8) -> tuple[int, dict]:
    """Degree of gamma as the size (with multiplicity) of a generic fibre.

    For seeded random t the fibre {curve = 0, N - t D = 0} is projected to the
    w0-line in the chart w2 = 1; two draws must agree.
    """
    v0, v1, v2 = gamma.variables
    C = gamma.curve_equation.subs({v2: 1})
    inf_pts, _ = curve_points_at_infinity(gamma.curve_equation, gamma.variables)
    inf_values = []
    for P in inf_pts:
        try:
            inf_values.append(gamma_extend(gamma, P))
        except GeometryError:
            pass
    rng = random.Random(seed)
    draws = []
    for _ in range(max_draws):
        t = Fraction(rng.randint(-40, 40), rng.randint(1, 12))
        if p1_point(t, 1) in inf_values or any(t == s for s, _ in draws):
            continue
        fib = (gamma.numerator - gamma.denominator * t).subs({v2: 1})
        r = resultant(C, fib, v1)
        deg = UniPoly.from_multi(r.drop_unused(), v0).degree() if not r.is_zero() else -1
        draws.append((t, deg))
        if len(draws) >= 2 and draws[-1][1] == draws[-2][1] and deg > 0:
            return deg, {
                "seed": seed,
                "parameters": [format_rational(t) for t, _ in draws],
                "fibre_degrees": [d for _, d in draws],
            }
    raise GeometryError(f"fibre degrees never agreed across draws: {draws}")


@dataclass
class BranchLocus:
    """Branch values of gamma.

    ``polynomial`` (monic, squarefree, in u0) gives the finite values (u0 : 1)
    coming from ramification points in the chart w2 = 1; ``extra_points`` are
    branch values coming from curve points with w2 = 0 or lying over infinity.
    """

    polynomial: UniPoly
    extra_points: list[tuple]
    infinity_undecided: bool
    jacobian: MultiPoly
    degree: int
    ramification_budget: int
    trace: list[dict]
    unresolved: list[str] = field(default_factory=list)

    def contains(self, P: tuple) -> bool | None:
        if P in self.extra_points:
            return True
        if P == INFINITY:
            return None if self.infinity_undecided else False
        return self.polynomial(P[0]) == 0

    def summary(self) -> dict:
        return {
            "polynomial": self.polynomial.to_text(),
            "polynomial_degree": self.polynomial.degree(),
            "extra_branch_values": [format_p1(P) for P in self.extra_points],
            "infinity_undecided": self.infinity_undecided,
            "jacobian_minor": self.jacobian.to_text(),
            "map_degree": self.degree,
            "riemann_hurwitz_total": self.ramification_budget,
            "unresolved": self.unresolved,
            "elimination": self.trace,
        }


def curve_genus(curve_eq: MultiPoly) -> int:
    n = curve_eq.total_degree()
    return (n - 1) * (n - 2) // 2


def branch_locus(gamma: MapToP1, order: Sequence[str] | None = None, seed: int = 0) -> BranchLocus:
    """Branch values of gamma via the Jacobian criterion and elimination.

    In the chart w2 = 1 a branch value (u0 : 1) needs a point where the curve,
    the fibre N - u0 D and their Jacobian determinant vanish together.
    Infinity and the points with w2 = 0 are examined separately.  The count
    of finite branch values is compared with the Riemann-Hurwitz total
    2g - 2 + 2 deg, which bounds the number of distinct branch values.
    """
    v0, v1, v2 = gamma.variables
    vs = (v0, v1, "u0")
    C = gamma.curve_equation.subs({v2: 1}).with_variables(vs)
    u0 = MultiPoly.var("u0", vs)
    fib = (gamma.numerator.with_variables(vs + (v2,)) - u0 * gamma.denominator.with_variables(vs + (v2,))).subs({v2: 1})
    J = jacobian_determinant(C, fib, v0, v1)
    order = tuple(order) if order is not None else (v1, v0)
    poly, stages = eliminate_with_trace([C, fib, J], order, keep="u0")

    extra: list[tuple] = []
    D_aff = gamma.denominator.subs({v2: 1}).with_variables((v0, v1))
    C2 = gamma.curve_equation.subs({v2: 1}).with_variables((v0, v1))
    J_inf = jacobian_determinant(C2, D_aff, v0, v1)
    infinity_undecided = False
    try:
        g_inf, _ = eliminate_with_trace([C2, D_aff, J_inf], [v1], keep=v0)
        if g_inf.degree() > 0:
            hit = False
            for r in rational_roots(g_inf):
                sub = [f.subs({v0: r}) for f in (C2, D_aff, J_inf)]
                _, ys = _rational_points_on_line(sub, v1)
                hit = hit or bool(ys)
            if hit:
                extra.append(INFINITY)
            else:
                infinity_undecided = True
    except DegenerateEliminationError:
        infinity_undecided = True

    unresolved = []
    inf_pts, leftover = curve_points_at_infinity(gamma.curve_equation, gamma.variables)
    for P in inf_pts:
        try:
            ramified = is_ramified_at(gamma, P)
        except GeometryError as exc:
            unresolved.append(f"{tuple(_fmt(c) for c in P)}: {exc}")
            continue
        if ramified:
            c = gamma_extend(gamma, P)
            if c not in extra:
                extra.append(c)
    if leftover is not None:
        raise GeometryError(f"curve has irrational points at infinity ({leftover.to_text()})")

    deg, _ = gamma_degree(gamma, seed=seed)
    budget = 2 * curve_genus(gamma.curve_equation) - 2 + 2 * deg
    if INFINITY in extra:
        infinity_undecided = False
    return BranchLocus(poly, extra, infinity_undecided, J, deg, budget, [s.summary() for s in stages], unresolved)


def etale_over_R_check(branch: BranchLocus | UniPoly, R: Sequence[tuple]) -> tuple[bool, dict]:
    """True iff no point of R is a branch value."""
    if isinstance(branch, UniPoly):
        poly, extra, inf_undecided, unresolved = branch, [], False, []
    else:
        poly, extra, inf_undecided = branch.polynomial, branch.extra_points, branch.infinity_undecided
        unresolved = branch.unresolved
    values = {}
    ok = not (unresolved and R)
    for P in R:
        if P == INFINITY:
            hit = INFINITY in extra or inf_undecided
            values[format_p1(P)] = "branch value" if INFINITY in extra else ("undecided" if inf_undecided else "not a branch value")
        else:
            v = poly(P[0])
            hit = v == 0 or P in extra
            values[format_p1(P)] = _fmt(v)
        ok = ok and not hit
    return ok, {
        "branch_polynomial_values": values,
        "extra_branch_values": [format_p1(P) for P in extra],
        "unresolved": unresolved,
    }


# --- the surface ---------------------------------------------------------------

SURFACE_VARS = W_VARS + X_VARS


@dataclass
class SurfaceModel:
    equation1: MultiPoly
    equation2: MultiPoly
    # unexpanded pieces (N, F, D, G) of equation1 and (lhs, rhs) of equation2, for display
    factors: tuple | None = None
    curve_sides: tuple | None = None

    def __post_init__(self):
        self.equation1 = self.equation1.with_variables(SURFACE_VARS)
        self.equation2 = self.equation2.with_variables(SURFACE_VARS)

    def display(self) -> tuple[str, str]:
        """The two equations in factored TeX-style form."""
        if self.factors:
            N, F, D, G = (p.drop_unused() for p in self.factors)
            first = f"({N.to_latex()})({F.to_latex()})+({D.to_latex()})({G.to_latex()})=0"
        else:
            first = f"{self.equation1.drop_unused().to_latex()}=0"
        if self.curve_sides:
            lhs, rhs = (p.drop_unused() for p in self.curve_sides)
            second = f"{lhs.to_latex()}={rhs.to_latex()}"
        else:
            second = f"{self.equation2.drop_unused().to_latex()}=0"
        return first, second

    def bidegrees(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return bidegree(self.equation1), bidegree(self.equation2)

    def summary(self) -> dict:
        return {
            "equation1": self.equation1.to_text(),
            "equation2": self.equation2.to_text(),
            "display": list(self.display()),
            "bidegrees": [list(b) for b in self.bidegrees()],
        }


def bidegree(f: MultiPoly, first=W_VARS, second=X_VARS) -> tuple[int, int]:
    if not (f.is_homogeneous_in(first) and f.is_homogeneous_in(second)):
        raise GeometryError(f"{f.to_text()} is not bihomogeneous")
    return max(f.degree_in(first), 0), max(f.degree_in(second), 0)


def assemble_surface(curve: WeierstrassCurve | MultiPoly, pencil: ConicPencil, gamma: MapToP1) -> SurfaceModel:
    """Pull the pencil back along (gamma, id): N F + D G = 0 and the curve."""
    sides = None
    if isinstance(curve, WeierstrassCurve):
        eq2 = curve.homogeneous_equation(W_VARS)
        w0, w1, w2 = MultiPoly.gens(W_VARS)
        sides = (w1**2 * w2, w0**3 + curve.a * w0 * w2**2 + curve.b * w2**3)
    else:
        eq2 = curve
    N = gamma.numerator.with_variables(SURFACE_VARS)
    D = gamma.denominator.with_variables(SURFACE_VARS)
    F = pencil.F.with_variables(SURFACE_VARS)
    G = pencil.G.with_variables(SURFACE_VARS)
    return SurfaceModel(N * F + D * G, eq2, (N, F, D, G), sides)


def fiber_equation(X: SurfaceModel, w) -> MultiPoly:
    """Equation 1 restricted to the fibre over the curve point w."""
    return X.equation1.subs(dict(zip(W_VARS, _coords(w)))).with_variables(X_VARS)


def scalar_multiple(p: MultiPoly, q: MultiPoly):
    """Nonzero c with p = c q, or None."""
    p, q = p._align(q)
    if p.is_zero() or q.is_zero():
        return None
    e = q.leading_exponent()
    if e not in p.terms:
        return None
    c = p.terms[e] / q.terms[e] if not isinstance(p.terms[e], int) or not isinstance(q.terms[e], int) else Fraction(p.terms[e], q.terms[e])
    return c if p == q * c else None


def surface_point_check(X: SurfaceModel, w, x) -> bool:
    pt = dict(zip(W_VARS, _coords(w))) | dict(zip(X_VARS, _coords(x)))
    return X.equation1.evaluate(pt) == 0 and X.equation2.evaluate(pt) == 0


# --- certificate --------------------------------------------------------------

@dataclass
class SubCheck:
    name: str
    passed: bool
    witness: dict


@dataclass
class SmoothnessCertificate:
    checks: list[SubCheck]
    criterion: str = "smoothness via fibration criterion"

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed_stage(self) -> str | None:
        return next((c.name for c in self.checks if not c.passed), None)

    def summary(self) -> dict:
        return {
            "criterion": self.criterion,
            "passed": self.passed,
            "failed_stage": self.failed_stage,
            "checks": [{"name": c.name, "passed": c.passed, "witness": c.witness} for c in self.checks],
        }


def full_smoothness_certificate(
    curve: WeierstrassCurve, pencil: ConicPencil, gamma: MapToP1, R: Sequence[tuple] | None = None, seed: int = 0
) -> SmoothnessCertificate:
    checks: list[SubCheck] = []
    disc = discriminant(curve)
    checks.append(SubCheck("curve_smooth", disc != 0, {"discriminant": _fmt(disc)}))

    ok, w = base_locus_disjoint_check(gamma)
    checks.append(SubCheck("base_locus_disjoint", ok, w))

    trans = transversality_check(pencil)
    checks.append(SubCheck("transversality", trans[0], trans[1]))

    ok, w = total_space_smoothness(pencil, trans)
    checks.append(SubCheck("total_space_smooth", ok, w))

    try:
        crit = critical_locus(pencil)
        crit_pts = [P for P, _ in crit.points]
        ok = crit.irrational_factor is None or R is not None
        checks.append(SubCheck("critical_locus", ok, crit.summary()))
    except GeometryError as exc:
        crit_pts = None
        checks.append(SubCheck("critical_locus", False, {"error": str(exc)}))
    if R is None:
        R = crit_pts

    branch = None
    try:
        branch = branch_locus(gamma, seed=seed)
        finite = branch.polynomial.degree()
        ok = finite <= branch.ramification_budget
        w = branch.summary() | {"within_riemann_hurwitz": ok}
        checks.append(SubCheck("branch_locus", ok, w))
    except (GeometryError, PolynomialError) as exc:
        checks.append(SubCheck("branch_locus", False, {"error": str(exc)}))

    if branch is None or R is None:
        checks.append(SubCheck("etale_over_R", False, {"error": "branch locus or critical locus unavailable"}))
    else:
        ok, w = etale_over_R_check(branch, R)
        checks.append(SubCheck("etale_over_R", ok, w | {"R": [format_p1(P) for P in R]}))
    return SmoothnessCertificate(checks)
