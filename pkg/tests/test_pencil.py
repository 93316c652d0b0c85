from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from surfcert.elliptic import WeierstrassCurve, add_points, scalar_mul
from surfcert.exact_arith import QuadraticField
from surfcert.pencil import (
    INFINITY,
    SURFACE_VARS,
    W_VARS,
    X_VARS,
    BaseLocusError,
    ConicPencil,
    GeometryError,
    MapToP1,
    assemble_surface,
    base_locus_disjoint_check,
    branch_locus,
    conic_matrix,
    critical_locus,
    etale_over_R_check,
    fiber_equation,
    full_smoothness_certificate,
    gamma_degree,
    gamma_evaluate,
    gamma_extend,
    gradient_minors,
    is_ramified_at,
    local_expansion,
    scalar_multiple,
    surface_point_check,
    total_space_smoothness,
    transversality_check,
)
from surfcert.poly import MultiPoly, UniPoly, parse_poly, poly_gcd

i = QuadraticField(-1).gen
R_EXPECTED = {(0, 1), (1, 1), (-1, 1)}


def X(text):
    return parse_poly(text, X_VARS)


def W(text):
    return parse_poly(text, W_VARS)


def x_map(E):
    return MapToP1.on_curve(W("w0"), W("w2"), E)


# --- conics and the pencil -------------------------------------------------------

def test_conic_matrix_examples(pencil):
    assert conic_matrix(X("x0^2 + x1^2 - x2^2")) == [[1, 0, 0], [0, 1, 0], [0, 0, -1]]
    assert conic_matrix(X("x0^2 - x1^2")) == [[1, 0, 0], [0, -1, 0], [0, 0, 0]]
    M = conic_matrix(X("2*x0*x1 + x1*x2"))
    assert M[0][1] == M[1][0] == 1 and M[1][2] == M[2][1] == Fraction(1, 2)
    u = conic_matrix(pencil.member())
    U = ("u0", "u1")
    assert [u[k][k] for k in range(3)] == [parse_poly(t, U) for t in ("u0 + u1", "u0 - u1", "-u0")]
    with pytest.raises(GeometryError):
        conic_matrix(X("x0^3"))


def test_pencil_validation():
    with pytest.raises(GeometryError):
        ConicPencil(X("x0^2 - x1^2"), X("2*x0^2 - 2*x1^2"))
    with pytest.raises(GeometryError):
        ConicPencil(X("x0"), X("x1^2"))


def test_critical_locus_of_the_pencil(pencil):
    crit = critical_locus(pencil)
    assert crit.point_set() == R_EXPECTED
    assert all(m == 1 for _, m in crit.points)
    assert INFINITY not in crit.point_set()
    assert crit.irrational_factor is None


def test_critical_locus_double_point():
    crit = critical_locus(ConicPencil(X("x0^2 + x1^2 + x2^2"), X("x0^2")))
    assert dict(crit.points) == {(0, 1): 2, (-1, 1): 1}


def test_critical_locus_irrational_factor():
    # det = u0 (u0^2 - u1^2/2): one rational point and a quadratic factor left over
    crit = critical_locus(ConicPencil(X("x0^2 + x1^2 + x2^2"), X("x0*x1 + x1*x2")))
    assert crit.point_set() == {(0, 1)}
    assert crit.irrational_factor == UniPoly.from_descending([1, 0, Fraction(-1, 2)], "u0")


def test_gradient_minors_and_transversality(pencil):
    minors = gradient_minors(pencil.F, pencil.G)
    assert minors == [X("-8*x0*x1"), X("4*x0*x2"), X("-4*x1*x2")]
    ok, witness = transversality_check(pencil)
    assert ok and witness["minors"] == ["-8*x0*x1", "4*x0*x2", "-4*x1*x2"]
    assert transversality_check(ConicPencil(X("x0^2 - x2^2"), X("x1^2 - x2^2")))[0]
    assert not transversality_check(ConicPencil(X("x0^2"), X("x0*x1")))[0]
    assert not transversality_check(ConicPencil(X("x0^2 + x1^2 - x2^2"), X("x0^2")))[0]


def test_total_space_smoothness(pencil):
    assert total_space_smoothness(pencil)[0]
    assert not total_space_smoothness(ConicPencil(X("x0^2"), X("x0*x1")))[0]


@st.composite
def diagonal_pencils(draw):
    coeffs = st.integers(-3, 3)
    F = [draw(coeffs) for _ in range(3)]
    G = [draw(coeffs) for _ in range(3)]
    f = X(" + ".join(f"({c})*{v}^2" for v, c in zip(X_VARS, F)))
    g = X(" + ".join(f"({c})*{v}^2" for v, c in zip(X_VARS, G)))
    try:
        return ConicPencil(f, g)
    except GeometryError:
        return None


@given(diagonal_pencils())
def test_transversal_implies_smooth_total_space(pc):
    if pc is None:
        return
    if transversality_check(pc)[0]:
        assert total_space_smoothness(pc)[0]


# --- the covering ----------------------------------------------------------------

def test_gamma_evaluations(E, gamma):
    assert gamma_evaluate(gamma, E.identity()) == (1, 0)
    EK = E.base_change(-1)
    assert gamma_evaluate(gamma, EK.point(0, 4 * i)) == (0, 1)
    assert gamma_evaluate(gamma, EK.point(0, -4 * i)) == (0, 1)
    with pytest.raises(GeometryError):
        gamma_evaluate(gamma, (0, 4, 1))


def test_gamma_rejects_base_point(E):
    xm = x_map(E)
    with pytest.raises(BaseLocusError):
        gamma_evaluate(xm, (0, 1, 0))
    assert gamma_extend(xm, (0, 1, 0)) == (1, 0)


def test_map_validation(E):
    with pytest.raises(GeometryError):
        MapToP1.on_curve(W("w0"), W("w1^2"), E)
    with pytest.raises(GeometryError):
        MapToP1.on_curve(MultiPoly.constant(0, W_VARS), MultiPoly.constant(0, W_VARS), E)


def test_base_locus_examples(E, gamma):
    assert base_locus_disjoint_check(gamma)[0]
    assert base_locus_disjoint_check(MapToP1.on_curve(W("w0"), W("w1"), E))[0]
    ok, w = base_locus_disjoint_check(MapToP1.on_curve(W("w0"), W("w0"), E))
    assert not ok and "proportional" in w["reason"]
    # the x-map's forms both vanish at O
    assert not base_locus_disjoint_check(x_map(E))[0]


def _gaussian_points(E):
    EK = E.base_change(-1)
    P = EK.point(0, 4 * i)
    pts = [EK.identity(), P, scalar_mul(2, P)]
    Et = WeierstrassCurve(0, 16)
    Q = Et.point(0, 4)
    # (x, y) on y^2 = x^3 + 16 gives (-x, i y) on y^2 = x^3 - 16
    for T in (Q, add_points(Q, Q)):
        if not T.is_identity():
            pts.append(EK.point(-T.x, i * T.y))
    return pts


def _conj(c):
    return c.conjugate() if hasattr(c, "conjugate") else c


def test_gamma_commutes_with_conjugation(E, gamma):
    for P in _gaussian_points(E):
        val = gamma_evaluate(gamma, P)
        conj_P = tuple(_conj(c) for c in P.coords())
        assert gamma_evaluate(gamma, conj_P) == tuple(_conj(c) for c in val)


@given(st.integers(-30, 30), st.integers(1, 6))
def test_gamma_commutes_with_conjugation_on_affine_points(num, den):
    # points (x, y) with x rational and y in Q(i): y^2 = x^3 - 16 must be a square in Q(i)
    E = WeierstrassCurve(0, -16)
    gamma = MapToP1.on_curve(W("w0*w2 + w1^2 + 16*w2^2"), W("w0*w1 + w1*w2"), E)
    K = QuadraticField(-1)
    x = Fraction(num, den)
    y = K.sqrt(K.coerce(x**3 - 16))
    if y is None:
        return
    P = (K.coerce(x), y, K.coerce(1))
    Pc = tuple(c.conjugate() for c in P)
    try:
        val = gamma_evaluate(gamma, P)
    except BaseLocusError:
        return
    assert gamma_evaluate(gamma, Pc) == tuple(_conj(c) for c in val)


def test_gamma_degree_examples(E, gamma):
    assert gamma_degree(gamma, seed=0)[0] == 6
    assert gamma_degree(gamma, seed=1)[0] == 6
    assert gamma_degree(x_map(E))[0] == 2
    assert gamma_degree(MapToP1.on_curve(W("w1"), W("w2"), E))[0] == 3


@pytest.mark.parametrize("lam", [2, 3])
def test_gamma_degree_invariant_under_scaling(gamma, lam):
    assert gamma_degree(gamma.post_compose_scale(lam))[0] == gamma_degree(gamma)[0]


def test_local_expansion_at_base_points(E):
    at_O = local_expansion(x_map(E), (0, 1, 0))
    assert at_O["value"] == (1, 0) and at_O["ramification_index"] == 2
    y_map = MapToP1.on_curve(W("w2"), W("w1"), E)
    e = local_expansion(y_map, (0, 1, 0))
    assert e["value"] == (0, 1) and e["ramification_index"] == 3


def test_ramification_of_x_map(E):
    xm = x_map(E)
    # O is a ramification point of the x-map; points with y != 0 are not
    assert is_ramified_at(xm, (0, 1, 0))
    assert not is_ramified_at(xm, E.base_change(-1).point(0, 4 * i))
    # on y^2 = x^3 - x the 2-torsion point (0, 0) ramifies, (2, sqrt 6) does not
    E2 = WeierstrassCurve(-1, 0)
    assert is_ramified_at(x_map(E2), (0, 0, 1))
    K6 = QuadraticField(6)
    assert not is_ramified_at(x_map(E2), (K6.coerce(2), K6.gen, K6.coerce(1)))


def test_branch_locus_of_gamma(gamma, branch_expected):
    br = branch_locus(gamma)
    assert br.polynomial == branch_expected
    assert br.polynomial.lc == 1
    assert poly_gcd(br.polynomial, br.polynomial.derivative()).degree() == 0
    assert br.degree == 6
    assert br.polynomial.degree() <= br.ramification_budget
    assert br.polynomial.coeffs[0] == Fraction(-4112, 132651)
    assert br.contains(INFINITY) is False
    assert not br.unresolved


def test_branch_locus_order_independent(gamma):
    assert branch_locus(gamma, order=("w1", "w0")).polynomial == branch_locus(gamma, order=("w0", "w1")).polynomial


def test_branch_locus_of_x_map(E):
    br = branch_locus(x_map(E))
    assert br.polynomial == UniPoly.from_descending([1, 0, 0, -16], "u0")
    assert INFINITY in br.extra_points


def test_branch_values_avoid_critical_locus(pencil, gamma):
    br = branch_locus(gamma)
    for P in critical_locus(pencil).point_set():
        assert br.polynomial(P[0]) != 0
    ok, w = etale_over_R_check(br, sorted(R_EXPECTED))
    assert ok


def test_branch_polynomial_has_no_real_root_in_R_by_sympy(branch_expected):
    u = sp.Symbol("u0")
    p = sp.Poly([sp.Rational(c.numerator, c.denominator) for c in branch_expected.descending()], u)
    assert all(p.eval(r) != 0 for r in (0, 1, -1))


def test_etale_examples(branch_expected):
    q = UniPoly.from_descending([1, 0, 7], "u0")
    bad = q * UniPoly.from_descending([1, -1], "u0")
    assert not etale_over_R_check(bad, [(1, 1)])[0]
    assert etale_over_R_check(bad, [])[0]
    assert etale_over_R_check(branch_expected, sorted(R_EXPECTED))[0]


# --- the surface -------------------------------------------------------------------

def test_surface_display(E, pencil, gamma):
    S = assemble_surface(E, pencil, gamma)
    assert S.display() == (
        "(w_0w_2+w_1^2+16w_2^2)(x_0^2+x_1^2-x_2^2)+(w_0w_1+w_1w_2)(x_0^2-x_1^2)=0",
        "w_1^2w_2=w_0^3-16w_2^3",
    )
    assert S.bidegrees() == ((2, 2), (3, 0))


def test_surface_equation_matches_sympy_expansion(E, pencil, gamma):
    S = assemble_surface(E, pencil, gamma)
    w0, w1, w2, x0, x1, x2 = sp.symbols("w0 w1 w2 x0 x1 x2")
    expected = sp.expand(
        (w0 * w2 + w1**2 + 16 * w2**2) * (x0**2 + x1**2 - x2**2) + (w0 * w1 + w1 * w2) * (x0**2 - x1**2)
    )
    got = sp.sympify(S.equation1.to_text().replace("^", "**"))
    assert sp.expand(got - expected) == 0


def test_assemble_identity_map_recovers_pencil(pencil):
    # on the line w2 = 0 the map (w0 : w1) is the identity of P^1, so the pullback is u0 F + u1 G
    ident = MapToP1(W("w0"), W("w1"), W("w2"))
    S = assemble_surface(W("w2"), pencil, ident)
    expected = parse_poly("w0*(x0^2 + x1^2 - x2^2) + w1*(x0^2 - x1^2)", SURFACE_VARS)
    assert S.equation1 == expected


def test_surface_points(E, pencil, gamma):
    S = assemble_surface(E, pencil, gamma)
    assert surface_point_check(S, (0, 1, 0), (3, 4, 5))
    assert surface_point_check(S, (0, 4 * i, 1), (1, 1, 0))
    assert not surface_point_check(S, (0, 1, 0), (1, 0, 0))


def test_fiber_identities(E, pencil, gamma):
    S = assemble_surface(E, pencil, gamma)
    assert scalar_multiple(fiber_equation(S, (0, 1, 0)), pencil.F) is not None
    for y in (4 * i, -4 * i):
        assert scalar_multiple(fiber_equation(S, (0, y, 1)), pencil.G) is not None


@given(st.integers(-20, 20), st.integers(1, 5))
def test_fibers_are_pencil_members(num, den):
    E = WeierstrassCurve(0, -16)
    K = QuadraticField(-1)
    x = Fraction(num, den)
    y = K.sqrt(K.coerce(x**3 - 16))
    if y is None:
        return
    pencil = ConicPencil(X("x0^2 + x1^2 - x2^2"), X("x0^2 - x1^2"))
    gamma = MapToP1.on_curve(W("w0*w2 + w1^2 + 16*w2^2"), W("w0*w1 + w1*w2"), E)
    S = assemble_surface(E, pencil, gamma)
    P = (K.coerce(x), y, K.coerce(1))
    c = gamma_evaluate(gamma, P)
    fib = fiber_equation(S, P)
    member = pencil.F * c[0] + pencil.G * c[1]
    assert scalar_multiple(fib, member) is not None


# --- certificate ------------------------------------------------------------------

def test_certificate_passes(E, pencil, gamma):
    cert = full_smoothness_certificate(E, pencil, gamma)
    assert cert.passed and cert.failed_stage is None
    assert [c.name for c in cert.checks] == [
        "curve_smooth", "base_locus_disjoint", "transversality", "total_space_smooth",
        "critical_locus", "branch_locus", "etale_over_R",
    ]


def test_certificate_status_is_conjunction(E, pencil, gamma):
    cert = full_smoothness_certificate(E, pencil, gamma)
    cert.checks[3].passed = False
    assert not cert.passed and cert.failed_stage == "total_space_smooth"


def test_x_map_with_swapped_pencil_fails_etale(E, pencil):
    swapped = ConicPencil(pencil.G, pencil.F)
    assert critical_locus(swapped).point_set() == {(1, 0), (1, 1), (-1, 1)}
    cert = full_smoothness_certificate(E, swapped, x_map(E))
    by_name = {c.name: c.passed for c in cert.checks}
    assert by_name["etale_over_R"] is False
    assert by_name["transversality"] and by_name["total_space_smooth"] and by_name["branch_locus"]


def test_x_map_with_original_pencil(E, pencil):
    # branch values of the x-map are infinity and the cube roots of 16, none in {0, 1, -1}
    cert = full_smoothness_certificate(E, pencil, x_map(E))
    by_name = {c.name: c.passed for c in cert.checks}
    assert cert.failed_stage == "base_locus_disjoint"
    assert by_name["etale_over_R"]


def test_tangent_pencil_fails_transversality(E, gamma):
    cert = full_smoothness_certificate(E, ConicPencil(X("x0^2 + x1^2 - x2^2"), X("x0^2")), gamma)
    by_name = {c.name: c.passed for c in cert.checks}
    assert not by_name["transversality"] and not by_name["total_space_smooth"]
    assert cert.failed_stage == "transversality"
