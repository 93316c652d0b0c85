"""Ordered certification run over a :class:`PipelineConfig`.

Every stage produces one record.  A stage that raises is recorded as a
failure; stages that need its output are recorded as failures too, while
independent stages still run.
"""

from __future__ import annotations

import time
from fractions import Fraction
from typing import Callable

from .config import PipelineConfig
from .elliptic import (
    RANK_ZERO_ASSUMPTION,
    discriminant,
    lutz_nagell_torsion,
    quadratic_twist,
    torsion_over_quadratic_field,
)
from .exact_arith import QuadraticField, QuadraticFieldElement, odd_primes_up_to
from .local_points import (
    everywhere_local_sweep,
    hensel_lift_certify,
    verify_local_certificate,
    verify_wa_witness,
    wa_witness_build,
)
from .pencil import (
    INFINITY,
    U_VARS,
    W_VARS,
    X_VARS,
    _proportional,
    assemble_surface,
    base_locus_disjoint_check,
    branch_locus,
    conic_matrix,
    critical_locus,
    det3,
    etale_over_R_check,
    fiber_equation,
    format_p1,
    gamma_degree,
    gamma_extend,
    p1_point,
    scalar_multiple,
    surface_point_check,
    total_space_smoothness,
    transversality_check,
)
from .poly import UniPoly, irreducibility_certificate, parse_poly, quad_field_roots, rational_roots
from .report import PLUMBING, CheckRecord, VerificationReport

ZERO = (0, 1)


class _Missing(Exception):
    pass


def _is_rational_point(P) -> bool:
    return not any(isinstance(c, QuadraticFieldElement) and c.b != 0 for c in P)


def _point_text(P) -> str:
    return "(" + ":".join(str(c) for c in P.coords()) + ")"


class _Run:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.ctx: dict = {}
        self.report = VerificationReport(config.name)

    def need(self, *keys):
        missing = [k for k in keys if k not in self.ctx]
        if missing:
            raise _Missing(", ".join(missing))
        return [self.ctx[k] for k in keys] if len(keys) > 1 else self.ctx[keys[0]]

    def stage(self, name: str, anchor: str, fn: Callable[[], tuple[bool, dict]], status_ok: str = "pass"):
        t0 = time.perf_counter()
        try:
            ok, witness = fn()
            status = status_ok if ok else "fail"
        except _Missing as exc:
            status, witness = "fail", {"error": f"not run: depends on unavailable {exc}"}
        except Exception as exc:  # any stage error becomes a failed record
            status, witness = "fail", {"error": f"{type(exc).__name__}: {exc}"}
        self.report.records.append(CheckRecord(name, status, anchor, witness, time.perf_counter() - t0))


def run_pipeline(config: PipelineConfig) -> VerificationReport:
    run = _Run(config)
    cfg, ctx = config, run.ctx

    # --- the elliptic curve ---------------------------------------------------
    def curve_valid():
        E = cfg.curve()
        disc = discriminant(E)
        ctx["E"] = E
        return disc != 0, {"a": E.a, "b": E.b, "discriminant": disc}

    run.stage("curve_validity", "E: w1^2 w2 = w0^3 - 16 w2^3 is an elliptic curve (nonzero discriminant)", curve_valid)

    def torsion_K():
        rep = lutz_nagell_torsion(run.need("E"))
        ctx["EK"] = rep.points
        return True, {"points": [_point_text(P) for P in rep.points], "methods": rep.methods} | rep.witness

    run.stage("torsion_E_K", "E(K) = {(0:1:0)}", torsion_K)

    def twist():
        E = run.need("E")
        T = quadratic_twist(E, cfg.d)
        rep = lutz_nagell_torsion(T)
        L = QuadraticField(cfg.d)
        EL = E.base_change(cfg.d)
        s = L.gen
        # (x, y) on the twist -> (x/d, y/(d sqrt d)) on E over Q(sqrt d)
        images = [EL.identity() if P.is_identity() else EL.point(P.x / cfg.d, P.y / (s * cfg.d)) for P in rep.points]
        ctx["twist_images"] = images
        return True, {
            "twist": {"a": T.a, "b": T.b},
            "twist_torsion": [_point_text(P) for P in rep.points],
            "images_on_E": [_point_text(P) for P in images],
        }

    run.stage("twist", "the quadratic twist by d contributes the points of E(L) outside E(K)", twist)

    def torsion_L():
        E = run.need("E")
        rep = torsion_over_quadratic_field(E, cfg.d, prime_bound=max(cfg.prime_bound, 60))
        ctx["EL"] = rep.points
        EL_set = set(rep.points)
        # E(K) and the twist images must sit inside E(L)
        EK = [rep.curve.point(*P.coords()) for P in ctx.get("EK", [])]
        contained = all(P in EL_set for P in EK + ctx.get("twist_images", []))
        return contained, {
            "points": [_point_text(P) for P in rep.points],
            "order": rep.order,
            "methods": rep.methods,
            "assumptions": rep.assumptions,
            "contains_E_K_and_twist_images": contained,
        } | rep.witness

    run.stage("torsion_E_L", "E(L) = {(0:+-4i:1), (0:1:0)}", torsion_L)

    run.stage(
        "analytic_rank_zero",
        "E and its quadratic twist have analytic rank 0",
        lambda: (True, {"statement": RANK_ZERO_ASSUMPTION, "verified": False}),
        status_ok="assumption",
    )

    def cross_check():
        EK, EL = run.need("EK", "EL")
        E = run.need("E")
        out, ok = {}, True
        for label, claims, computed, field_d in (("E(K)", cfg.claims_EK, EK, None), ("E(L)", cfg.claims_EL, EL, cfg.d)):
            if claims is None:
                out[label] = "no claim given"
                continue
            curve = E.base_change(field_d)
            parsed, problems = [], []
            for P in claims:
                try:
                    parsed.append(curve.point(*P))
                except (ValueError, ArithmeticError) as exc:
                    problems.append(f"{tuple(str(c) for c in P)}: {exc}")
            match = not problems and set(parsed) == set(computed)
            ok = ok and match
            out[label] = {
                "claimed": [tuple(str(c) for c in P) for P in claims],
                "computed": [_point_text(P) for P in computed],
                "rejected_claims": problems,
                "match": match,
            }
        return ok, out

    run.stage("point_set_cross_check", "claimed E(K) and E(L) agree with the computed groups", cross_check)

    # --- the map gamma -----------------------------------------------------------
    def gamma_def():
        gamma = cfg.gamma()
        ctx["gamma"] = gamma
        ok, w = base_locus_disjoint_check(gamma)
        return ok, w

    run.stage("base_locus_disjoint", "gamma is a morphism: its two forms have no common zero on E", gamma_def)

    def evaluations():
        gamma = ctx.get("gamma") or cfg.gamma()
        EL = run.need("EL")
        values, ok = {}, True
        for P in EL:
            v = gamma_extend(gamma, P.coords())
            want = INFINITY if _is_rational_point(P.coords()) else ZERO
            values[_point_text(P)] = {"value": format_p1(v), "expected": format_p1(want)}
            ok = ok and v == want
        return ok, {"values": values}

    run.stage("gamma_evaluations", "gamma maps E(K) to (1:0) and (0:+-4i:1) to (0:1)", evaluations)

    def degree():
        gamma = ctx.get("gamma") or cfg.gamma()
        d1, w1 = gamma_degree(gamma, seed=cfg.seed)
        d2, w2 = gamma_degree(gamma, seed=cfg.seed + 1)
        ctx["degree"] = d1
        ok = d1 == d2 and (cfg.expect_degree is None or d1 == cfg.expect_degree)
        return ok, {"degree": d1, "expected": cfg.expect_degree, "draws": [w1, w2]}

    run.stage("gamma_degree", "gamma is dominant of degree 6", degree)

    # --- the pencil ------------------------------------------------------------------
    def crit():
        pencil = cfg.pencil()
        ctx["pencil"] = pencil
        loc = critical_locus(pencil)
        pts = [P for P, _ in loc.points]
        ok = loc.irrational_factor is None and all(m == 1 for _, m in loc.points)
        if cfg.R is not None:
            given = {p1_point(*P) for P in cfg.R}
            ok = ok and given == set(pts)
        ctx["R"] = [p1_point(*P) for P in cfg.R] if cfg.R is not None else pts
        return ok, loc.summary() | {"R_override": [format_p1(p1_point(*P)) for P in cfg.R] if cfg.R else None}

    run.stage("critical_locus", "R = {(0:1), (+-1:1)}", crit)

    def transversal():
        res = transversality_check(run.need("pencil"))
        ctx["transversal"] = res
        return res

    run.stage("transversality", "C_inf and C_0 meet transversally", transversal)

    def x_prime():
        return total_space_smoothness(run.need("pencil"), ctx.get("transversal"))

    run.stage("total_space_smooth", "X' = {s' = 0} in P^1 x P^2 is smooth", x_prime)

    # --- branch locus ------------------------------------------------------------
    def branch():
        gamma = run.need("gamma")
        b = branch_locus(gamma, seed=cfg.seed)
        ctx["branch"] = b
        ok = b.polynomial.degree() <= b.ramification_budget and not b.unresolved
        return ok, b.summary() | {"within_riemann_hurwitz": b.polynomial.degree() <= b.ramification_budget}

    run.stage("branch_locus", "branch locus of gamma is the degree 12 polynomial in u0, away from infinity", branch)

    if cfg.expect_branch is not None or cfg.expect_jacobian_minor is not None:

        def compare():
            b = run.need("branch")
            out, ok = {}, True
            if cfg.expect_branch is not None:
                want = UniPoly.from_multi(parse_poly(cfg.expect_branch, ("u0",)), "u0")
                same = b.polynomial.coeffs == want.coeffs
                ok = ok and same
                out["branch_polynomial"] = {"computed": b.polynomial, "expected": want, "equal": same}
            if cfg.expect_jacobian_minor is not None:
                vs = (W_VARS[0], W_VARS[1], U_VARS[0])
                want = parse_poly(cfg.expect_jacobian_minor, vs)
                J = b.jacobian.with_variables(vs)
                sign = 1 if J == want else -1 if J == -want else 0
                ok = ok and sign != 0
                out["jacobian_minor"] = {"computed": J, "expected": want, "equal_up_to_sign": sign != 0, "sign": sign}
            return ok, out

        run.stage("branch_vs_expected", "branch polynomial and Jacobian condition as displayed for the instance", compare)

        def arithmetic():
            b = run.need("branch")
            f = b.polynomial
            rat = rational_roots(f)
            quad = quad_field_roots(f, cfg.d)
            cert, w = irreducibility_certificate(f, odd_primes_up_to(max(cfg.prime_bound, 50)))
            ok = not rat and not quad and cert is True and f.degree() == 12
            return ok, {
                "rational_roots": sorted(rat),
                "roots_in_L": sorted(quad, key=str),
                "irreducible": cert,
                "degree_of_branch_values": f.degree() if cert else None,
            } | w

        run.stage("branch_arithmetic", "each branch value u0 has [Q(u0):Q] = 12", arithmetic)

    def etale():
        b, R = run.need("branch", "R")
        ok, w = etale_over_R_check(b, R)
        return ok, w | {"R": [format_p1(P) for P in R]}

    run.stage("etale_over_R", "R does not meet the branch locus of gamma", etale)

    # --- the surface ----------------------------------------------------------------
    def surface():
        E, pencil, gamma = run.need("E", "pencil", "gamma")
        X = assemble_surface(E, pencil, gamma)
        ctx["X"] = X
        bideg = X.bidegrees()
        display = X.display()
        ok = bideg[0][1] == 2 and bideg[1] == (3, 0)
        w = X.summary()
        if cfg.expect_surface is not None:
            same = tuple(display) == tuple(cfg.expect_surface)
            ok = ok and same
            w |= {"expected_display": list(cfg.expect_surface), "display_matches": same}
        return ok, w

    run.stage("surface_assembly", "X is cut out by the two displayed equations in P^2 x P^2", surface)

    def fibers():
        X, EL, pencil = run.need("X", "EL", "pencil")
        out, ok = {}, True
        for P in EL:
            fib = fiber_equation(X, P.coords())
            rational = _is_rational_point(P.coords())
            target = pencil.F if rational else pencil.G
            c = scalar_multiple(fib, target)
            ok = ok and c is not None
            out[_point_text(P)] = {"fibre": fib, "multiple_of": "F" if rational else "G", "scalar": c}
        return ok, out

    run.stage("fiber_identities", "fibres over E(K) are C_inf and over E(L) minus E(K) are C_0", fibers)

    def smooth():
        names = ("curve_validity", "base_locus_disjoint", "transversality", "total_space_smooth", "etale_over_R")
        status = {n: run.report.record(n).status for n in names}
        return all(s == "pass" for s in status.values()), {
            "criterion": "smoothness via fibration criterion",
            "links": status,
        }

    run.stage("surface_smooth", "X is smooth", smooth)

    def rational_point():
        X = run.need("X")
        out, ok, has_rational = [], True, False
        for w, x in cfg.surface_points:
            on = surface_point_check(X, w, x)
            rat = _is_rational_point(w) and _is_rational_point(x)
            has_rational = has_rational or (on and rat)
            ok = ok and on
            out.append({"w": [str(c) for c in w], "x": [str(c) for c in x], "on_X": on, "rational": rat})
        return ok and has_rational, {"points": out, "has_K_rational_point": has_rational}

    run.stage("rational_point_on_X", "X has a K-rational point", rational_point)

    # --- local points ----------------------------------------------------------------
    def sweeps():
        E, pencil = run.need("E", "pencil")
        out, ok = {}, True
        bad_E = {p for p in odd_primes_up_to(cfg.prime_bound) if discriminant(E).numerator % p == 0}
        for label, f, exempt in (
            ("C_inf", pencil.F, _conic_bad_primes(pencil.F, cfg.prime_bound)),
            ("C_0", pencil.G, _conic_bad_primes(pencil.G, cfg.prime_bound)),
            ("E", E.homogeneous_equation(X_VARS), bad_E),
        ):
            res = everywhere_local_sweep(f, cfg.prime_bound, label)
            good = all(verify_local_certificate(c.to_dict()) for c in res.certificates)
            covered = set(res.missing) <= exempt
            ok = ok and good and covered
            out[label] = {
                "certified_primes": [c.place for c in res.certificates],
                "missing_primes": res.missing,
                "exempt_bad_primes": sorted(exempt),
                "certificates_recheck": good,
                "points": {str(c.place): [str(x) for x in c.point] for c in res.certificates},
            }
        return ok, out

    run.stage("local_sweeps", PLUMBING, sweeps)

    def wa():
        pencil = run.need("pencil")
        C0 = parse_poly("x0^2 - x1^2", X_VARS)
        if not _proportional(pencil.G, C0):
            return False, {"error": "the two-component witness needs C_0 = {x0^2 - x1^2 = 0}"}
        witness = wa_witness_build(*cfg.wa_places)
        serial = witness.to_dict()
        checks = verify_wa_witness(serial)
        singular_fails, smooth_ok = [], []
        for p in odd_primes_up_to(cfg.prime_bound):
            singular_fails.append(not hensel_lift_certify(C0, p, (0, 0, 1)).valid)
            smooth_ok.append(all(hensel_lift_certify(C0, p, P).valid for P in ((1, 1, 0), (1, -1, 0))))
        hensel = {"singular_point_never_lifts_by_hensel": all(singular_fails), "P1_P2_certify_at_all_p": all(smooth_ok)}
        ok = checks["passed"] and all(hensel.values())
        return ok, {"witness": serial, "reverification": checks, "hensel": hensel}

    run.stage("wa_witness", "two-component open set on C_0: no rational point meets both local conditions", wa)
    return run.report


def _conic_bad_primes(q, bound: int) -> set[int]:
    """Primes dividing 2 det(q); a singular conic gets no exemption."""
    det = Fraction(det3(conic_matrix(q)))
    if det == 0:
        return set()
    return {p for p in odd_primes_up_to(bound) if (det.numerator * det.denominator) % p == 0}

