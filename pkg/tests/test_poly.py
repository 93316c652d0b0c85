from fractions import Fraction

import pytest
import sympy as sp
from sympy.polys.subresultants_qq_zz import sylvester
from hypothesis import given, settings
from hypothesis import strategies as st

from surfcert.exact_arith import QuadraticField
from surfcert.poly import (
    DegenerateEliminationError,
    MultiPoly,
    PolynomialError,
    PolynomialSyntaxError,
    UniPoly,
    eliminate,
    eliminate_to_polys,
    eliminate_with_trace,
    factor_degrees_mod_p,
    irreducibility_certificate,
    jacobian_determinant,
    parse_poly,
    poly_gcd,
    quad_field_roots,
    rational_roots,
    resultant,
    resultant_uni,
    squarefree_part,
)

small_ints = st.integers(-6, 6)


def uni(coeffs_desc, var="x"):
    return UniPoly.from_descending(coeffs_desc, var)


def to_sympy(f: MultiPoly):
    syms = {v: sp.Symbol(v) for v in f.variables}
    return sp.sympify(f.to_text().replace("^", "**"), locals=syms)


@st.composite
def int_unipolys(draw, min_deg=1, max_deg=4):
    deg = draw(st.integers(min_deg, max_deg))
    coeffs = draw(st.lists(small_ints, min_size=deg, max_size=deg))
    lead = draw(small_ints.filter(lambda c: c != 0))
    return UniPoly(coeffs + [lead], "x")


@st.composite
def multipolys(draw, variables=("x", "y", "z"), max_terms=5, max_exp=3):
    n = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(0, max_exp)) for _ in variables)
        terms[e] = Fraction(draw(st.integers(-9, 9)), draw(st.integers(1, 4)))
    return MultiPoly(variables, terms)


# --- evaluation, calculus, homogenisation --------------------------------------

def test_eval_examples():
    W = ("w0", "w1", "w2")
    E = parse_poly("w1^2*w2 - w0^3 + 16*w2^3", W)
    assert E.evaluate({"w0": 0, "w1": 1, "w2": 0}) == 0
    C = parse_poly("x0^2 + x1^2 - x2^2", ("x0", "x1", "x2"))
    assert C.evaluate({"x0": 3, "x1": 4, "x2": 5}) == 0
    f = parse_poly("x*y + 3*x - 7/2", ("x", "y"))
    assert f.evaluate({"x": 0, "y": 0}) == Fraction(-7, 2)


def test_eval_missing_variable():
    f = parse_poly("x*y", ("x", "y"))
    with pytest.raises(PolynomialError):
        f.evaluate({"x": 1})


def test_eval_over_gaussian_integers():
    i = QuadraticField(-1).gen
    E = parse_poly("w1^2*w2 - w0^3 + 16*w2^3", ("w0", "w1", "w2"))
    assert E.evaluate({"w0": 0, "w1": 4 * i, "w2": 1}) == 0


def test_partial_derivative_examples():
    X = ("x0", "x1", "x2")
    assert parse_poly("x0^2 + x1^2 - x2^2", X).diff("x0") == parse_poly("2*x0", X)
    f = parse_poly("w1^2 - w0^3 + 16", ("w0", "w1"))
    assert f.diff("w1") == parse_poly("2*w1", ("w0", "w1"))
    g = parse_poly("x0^2", X)
    assert g.diff("x2").is_zero()
    with pytest.raises(PolynomialError):
        g.diff("t")


@given(multipolys(), multipolys(), st.sampled_from(["x", "y", "z"]))
def test_leibniz_rule(f, g, v):
    assert (f * g).diff(v) == f.diff(v) * g + f * g.diff(v)


def test_homogenize_examples():
    W = ("w0", "w1", "w2")
    E = parse_poly("w1^2*w2 - w0^3 + 16*w2^3", W)
    assert E.dehomogenize("w2") == parse_poly("w1^2 - w0^3 + 16", ("w0", "w1"))
    X2 = ("x0", "x1")
    q = parse_poly("x0^2 - x1^2", X2)
    assert q.homogenize("x2", 2).drop_unused() == q.drop_unused()
    with pytest.raises(PolynomialError):
        q.homogenize("x2", 1)


@given(multipolys(variables=("x", "y"), max_exp=3))
def test_homogenize_roundtrip(f):
    d = f.total_degree()
    if d < 0:
        return
    h = f.homogenize("z", d)
    assert h.is_homogeneous()
    assert h.dehomogenize("z") == f


# --- resultants ---------------------------------------------------------------------

def test_resultant_examples():
    a, b = MultiPoly.gens(("a", "b"))
    x = MultiPoly.var("x", ("x", "a", "b"))
    r = resultant(x - a.with_variables(("x", "a", "b")), x - b.with_variables(("x", "a", "b")), "x")
    assert r == (a - b).with_variables(r.variables) or r == (b - a).with_variables(r.variables)
    assert resultant_uni(uni([1, 0, 1]), uni([1, -1])) == 2
    assert resultant_uni(UniPoly.from_roots([1, 2], "x"), UniPoly.from_roots([2, 3], "x")) == 0


def test_resultant_zero_input():
    with pytest.raises(PolynomialError):
        resultant_uni(UniPoly([], "x"), uni([1, 1]))


@given(int_unipolys(), int_unipolys())
def test_resultant_matches_sympy(f, g):
    # sympy's resultant() can disagree in sign with the Sylvester determinant,
    # so the oracle builds the Sylvester matrix explicitly
    x = sp.Symbol("x")
    expected = sylvester(to_sympy(f.to_multi()), to_sympy(g.to_multi()), x).det()
    assert Fraction(str(expected)) == resultant_uni(f, g)
    assert abs(Fraction(str(sp.resultant(to_sympy(f.to_multi()), to_sympy(g.to_multi()), x)))) == abs(resultant_uni(f, g))


@given(int_unipolys(), int_unipolys(max_deg=3), int_unipolys(max_deg=3))
def test_resultant_multiplicative(f, g, h):
    assert resultant_uni(f, g * h) == resultant_uni(f, g) * resultant_uni(f, h)


@st.composite
def root_pairs(draw):
    """Polynomials built from small integer roots, sharing a root about half the time."""
    rf = draw(st.lists(st.integers(-4, 4), min_size=1, max_size=3))
    rg = draw(st.lists(st.integers(-4, 4), min_size=1, max_size=3))
    if draw(st.booleans()):
        rg[0] = rf[0]
    extra_f = draw(st.sampled_from([uni([1]), uni([1, 0, 1]), uni([2, 0, 3])]))
    extra_g = draw(st.sampled_from([uni([1]), uni([1, 0, 2]), uni([1, 1, 1])]))
    return UniPoly.from_roots(rf, "x") * extra_f, UniPoly.from_roots(rg, "x") * extra_g


@given(root_pairs())
def test_common_root_criterion(pair):
    f, g = pair
    assert (resultant_uni(f, g) == 0) == (poly_gcd(f, g).degree() >= 1)


@given(int_unipolys(max_deg=3), int_unipolys(max_deg=3))
def test_multivariate_resultant_specialises(f, g):
    # a parameter that is set to zero afterwards must not change the answer
    vs = ("x", "t")
    t = MultiPoly.var("t", vs)
    F = f.to_multi().with_variables(vs) + t * t
    G = g.to_multi().with_variables(vs)
    R = resultant(F, G, "x")
    assert R.subs({"t": 0}).constant_value() == resultant_uni(f, g)


# --- gcd, squarefree, roots ---------------------------------------------------------

def test_squarefree_example():
    f = UniPoly.from_roots([1, 1, -2], "x")
    assert squarefree_part(f) == UniPoly.from_roots([1, -2], "x")


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6))
def test_squarefree_part_has_constant_gcd(roots):
    f = UniPoly.from_roots(roots, "x") * uni([1, 0, 3])
    s = squarefree_part(f)
    assert poly_gcd(s, s.derivative()).degree() == 0
    assert s.lc == 1
    assert s.degree() == len(set(roots)) + 2


def test_rational_roots_examples():
    assert rational_roots(uni([3, 0, 0, -192, 0])) == {0, 4}
    assert rational_roots(uni([6, -5, 1])) == {Fraction(1, 2), Fraction(1, 3)}
    with pytest.raises(PolynomialError):
        rational_roots(UniPoly([], "x"))


@given(st.lists(st.builds(Fraction, st.integers(-30, 30), st.integers(1, 6)), min_size=1, max_size=4))
def test_rational_roots_recovers_roots(roots):
    f = UniPoly.from_roots(roots, "x") * uni([1, 0, 5])
    assert rational_roots(f) == set(roots)


def test_quad_field_roots_examples():
    assert quad_field_roots(uni([1, 0, 0, -16]), -1) == set()
    K = QuadraticField(-1)
    assert quad_field_roots(uni([1, 0, 0, 0, 4]), -1) == {K(1, 1), K(1, -1), K(-1, 1), K(-1, -1)}
    assert quad_field_roots(uni([1, 0, 1]) * uni([1, -3]), -1) == {K(0, 1), K(0, -1), K(3)}
    assert quad_field_roots(uni([1, 0, -48]), 3) == {QuadraticField(3)(0, 4), QuadraticField(3)(0, -4)}


# --- elimination ---------------------------------------------------------------------

def _branch_system():
    vs = ("w0", "w1", "u0")
    C = parse_poly("w1^2 - w0^3 + 16", vs)
    fib = parse_poly("w0 + w1^2 + 16 - u0*w1*(w0 + 1)", vs)
    return C, fib, jacobian_determinant(C, fib, "w0", "w1")


def test_jacobian_minor_is_printed_condition_up_to_sign():
    _, _, J = _branch_system()
    printed = parse_poly("3*(2*w1 - w0*u0 - u0)*w0^2 + 2*w1*(1 - w1*u0)", J.variables)
    assert J == -printed


def test_branch_eliminant_matches_sympy_oracle(branch_expected):
    C, fib, J = _branch_system()
    ours = eliminate([C, fib, J], ["w1", "w0"])
    w0, w1, u0 = sp.symbols("w0 w1 u0")
    sC, sF, sJ = (to_sympy(p) for p in (C, fib, J))
    r1, r2, r3 = (sp.resultant(a, b, w1) for a, b in ((sC, sF), (sC, sJ), (sF, sJ)))
    oracle = sp.Poly(sp.gcd(sp.resultant(r1, r2, w0), sp.resultant(r1, r3, w0)), u0).monic()
    assert [Fraction(str(c)) for c in oracle.all_coeffs()] == ours.descending()
    assert ours == branch_expected


def test_elimination_order_independent(branch_expected):
    C, fib, J = _branch_system()
    assert eliminate([C, fib, J], ["w1", "w0"]) == eliminate([C, fib, J], ["w0", "w1"]) == branch_expected


def test_eliminate_diagonal():
    x, y, t = MultiPoly.gens(("x", "y", "t"))
    (out,), _ = eliminate_to_polys([x - t, y - t], ["t"])
    assert out in (x - y, y - x)


def test_eliminate_degenerate_system():
    x, y = MultiPoly.gens(("x", "y"))
    with pytest.raises(DegenerateEliminationError):
        eliminate([(x - y) * (x + 1), (x - y) * (y + 2)], ["x"])


def test_eliminate_trace_records_stages():
    C, fib, J = _branch_system()
    _, stages = eliminate_with_trace([C, fib, J], ["w1", "w0"])
    assert [s.var for s in stages] == ["w1", "w0"]


@st.composite
def systems_with_solution(draw):
    pt = tuple(Fraction(draw(st.integers(-3, 3)), draw(st.integers(1, 2))) for _ in range(3))
    vs = ("x", "y", "z")
    polys = []
    for _ in range(3):
        f = draw(multipolys(variables=vs, max_terms=3, max_exp=2))
        f = f - MultiPoly.constant(f.evaluate(dict(zip(vs, pt))), vs)
        polys.append(f)
    return polys, pt


@settings(max_examples=40)
@given(systems_with_solution())
def test_eliminant_vanishes_on_projected_solutions(sample):
    polys, pt = sample
    try:
        out = eliminate(polys, ["x", "y"], keep="z")
    except (DegenerateEliminationError, PolynomialError):
        return
    assert out(pt[2]) == 0


# --- irreducibility -----------------------------------------------------------------

def test_factor_degrees_match_sympy(branch_expected):
    u = sp.Symbol("u0")
    model = to_sympy(branch_expected.integer_model().to_multi())
    for p in (5, 7, 11, 13, 29, 31):
        factors = sp.Poly(model, u, modulus=p).factor_list()[1]
        expected = sorted(f.degree() for f, m in factors for _ in range(m))
        assert factor_degrees_mod_p(branch_expected, p) == expected
    assert factor_degrees_mod_p(branch_expected, 17) is None  # 17 divides the leading coefficient


def test_irreducibility_certificate(branch_expected):
    ok, witness = irreducibility_certificate(branch_expected, [5, 7, 11, 13, 19, 23, 29, 31])
    assert ok is True and witness["decisive_prime"] == 29
    reducible = UniPoly.from_roots([1, 2], "x") * uni([1, 0, 1])
    ok, witness = irreducibility_certificate(reducible, [5, 7, 11, 13])
    assert ok is None and witness["possible_factor_degrees"]


# --- text forms -----------------------------------------------------------------------

def test_parse_and_canonical_text(branch_expected):
    text = branch_expected.to_text()
    assert text.startswith("u0^12 + 60627/4913*u0^10")
    assert text.endswith("- 4112/132651")
    assert UniPoly.from_multi(parse_poly(text, ("u0",)), "u0") == branch_expected


def test_latex_form():
    f = parse_poly("w0*w2 + w1^2 + 16*w2^2", ("w0", "w1", "w2"))
    assert f.to_latex() == "w_0w_2+w_1^2+16w_2^2"


def test_parse_errors_have_position():
    with pytest.raises(PolynomialSyntaxError) as info:
        parse_poly("x0^2 + + ", ("x0",))
    assert "column" in str(info.value) or "x0" in str(info.value)
    with pytest.raises(PolynomialError):
        parse_poly("x0 + t", ("x0",))
    with pytest.raises(PolynomialError):
        parse_poly("", ("x0",))


@given(multipolys())
def test_dict_roundtrip(f):
    assert MultiPoly.from_dict(f.to_dict()) == f
