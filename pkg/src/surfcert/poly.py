"""Sparse multivariate and dense univariate polynomials over exact fields.

Coefficients are ints, Fractions, or :class:`QuadraticFieldElement` values.
Integral Fractions are stored as ints so that integer-coefficient work
(resultants, pseudo-remainders) stays on the fast path.

Elimination is done with Sylvester resultants rather than Groebner bases:
every pair of equations containing the variable being removed contributes a
resultant, and at the end the gcd of all surviving univariate resultants is
taken.  A common solution of the system makes every pairwise resultant vanish,
so the gcd keeps every genuine root while discarding most of the extraneous
factors that single resultant chains pick up.
"""

from __future__ import annotations

import ast
import itertools
import math
import re
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence

from .exact_arith import (
    QuadraticField,
    QuadraticFieldElement,
    divisors,
    format_rational,
)


class PolynomialError(ValueError):
    pass


class DegenerateEliminationError(PolynomialError):
    """Every resultant at some elimination stage vanished identically."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"degenerate elimination at stage {stage}: {message}")
        self.stage = stage


# --- coefficient helpers ----------------------------------------------------

def _clean(c):
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    if isinstance(c, QuadraticFieldElement) and c.b == 0:
        return _clean(c.a)
    return c


def _div(a, b):
    if type(a) is int and type(b) is int:
        q, r = divmod(a, b)
        return q if r == 0 else Fraction(a, b)
    return _clean(a / b)


def _is_rational(c) -> bool:
    return isinstance(c, (int, Fraction))


def _fmt_coeff(c) -> str:
    if _is_rational(c):
        return format_rational(c)
    return f"({c})"


# --- multivariate -----------------------------------------------------------

class MultiPoly:
    """Polynomial as a map from exponent vectors to nonzero coefficients.

    ``variables`` fixes the meaning of each exponent slot.  Binary operations
    between polynomials over different variable lists work over the union,
    keeping the left operand's order first.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, object] | None = None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise PolynomialError(f"repeated variable in {variables}")
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != len(variables):
                raise PolynomialError(f"exponent vector {exps} does not match variables {variables}")
            c = _clean(c)
            if c:
                clean[exps] = c
        self.variables = variables
        self.terms = clean

    @classmethod
    def _raw(cls, variables: tuple, terms: dict) -> "MultiPoly":
        obj = cls.__new__(cls)
        obj.variables = variables
        obj.terms = terms
        return obj

    @classmethod
    def constant(cls, c, variables: Sequence[str] = ()) -> "MultiPoly":
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, name: str, variables: Sequence[str] | None = None) -> "MultiPoly":
        variables = tuple(variables) if variables is not None else (name,)
        if name not in variables:
            raise PolynomialError(f"{name!r} is not among {variables}")
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls._raw(variables, {exps: 1})

    @classmethod
    def gens(cls, variables: Sequence[str]) -> tuple["MultiPoly", ...]:
        return tuple(cls.var(v, variables) for v in variables)

    # -- structure

    def with_variables(self, variables: Sequence[str]) -> "MultiPoly":
        """Re-express over ``variables`` (must contain every variable in use)."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        index = {v: i for i, v in enumerate(variables)}
        for v in self.used_variables():
            if v not in index:
                raise PolynomialError(f"variable {v!r} in use but missing from {variables}")
        terms = {}
        for exps, c in self.terms.items():
            new = [0] * len(variables)
            for v, e in zip(self.variables, exps):
                if e:
                    new[index[v]] = e
            terms[tuple(new)] = c
        return MultiPoly._raw(variables, terms)

    def used_variables(self) -> tuple[str, ...]:
        used = [False] * len(self.variables)
        for exps in self.terms:
            for i, e in enumerate(exps):
                if e:
                    used[i] = True
        return tuple(v for v, u in zip(self.variables, used) if u)

    def drop_unused(self) -> "MultiPoly":
        return self.with_variables(self.used_variables())

    def _align(self, other: "MultiPoly") -> tuple["MultiPoly", "MultiPoly"]:
        if self.variables == other.variables:
            return self, other
        merged = self.variables + tuple(v for v in other.variables if v not in self.variables)
        return self.with_variables(merged), other.with_variables(merged)

    def _coerce(self, other) -> "MultiPoly | None":
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, (int, Fraction, QuadraticFieldElement)):
            return MultiPoly.constant(other, self.variables)
        return None

    # -- predicates

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self):
        """Value of a constant polynomial (0 for the zero polynomial)."""
        if not self.is_constant():
            raise PolynomialError("polynomial is not constant")
        return next(iter(self.terms.values()), 0)

    def constant_term(self):
        return self.terms.get((0,) * len(self.variables), 0)

    def has_rational_coefficients(self) -> bool:
        return all(_is_rational(c) for c in self.terms.values())

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree(self, var: str) -> int:
        if var not in self.variables:
            return 0 if self.terms else -1
        i = self.variables.index(var)
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def degree_in(self, group: Iterable[str]) -> int:
        """Total degree counting only the variables in ``group``."""
        idx = [i for i, v in enumerate(self.variables) if v in set(group)]
        if not self.terms:
            return -1
        return max(sum(e[i] for i in idx) for e in self.terms)

    def is_homogeneous_in(self, group: Iterable[str]) -> bool:
        idx = [i for i, v in enumerate(self.variables) if v in set(group)]
        return len({sum(e[i] for i in idx) for e in self.terms}) <= 1

    # -- arithmetic

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._align(other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            s = _clean(terms.get(e, 0) + c)
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return MultiPoly._raw(a.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QuadraticFieldElement)):
            if not other:
                return MultiPoly._raw(self.variables, {})
            return MultiPoly._raw(
                self.variables, {e: _clean(c * other) for e, c in self.terms.items()}
            )
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = self._align(other)
        terms: dict = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return MultiPoly(a.variables, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = MultiPoly.constant(1, self.variables)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, QuadraticFieldElement)):
            if not other:
                raise ZeroDivisionError("polynomial division by zero scalar")
            return MultiPoly._raw(self.variables, {e: _div(c, other) for e, c in self.terms.items()})
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadraticFieldElement)):
            other = MultiPoly.constant(other, self.variables)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = self._align(other)
        return a.terms == b.terms

    __hash__ = None

    def divexact(self, other: "MultiPoly") -> "MultiPoly":
        """Quotient ``self / other``; raises if the division leaves a remainder."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        a, b = self._align(other)
        lead = max(b.terms)
        lead_c = b.terms[lead]
        rem = dict(a.terms)
        quot = {}
        while rem:
            e = max(rem)
            qe = tuple(x - y for x, y in zip(e, lead))
            if qe and min(qe) < 0:
                raise PolynomialError("division is not exact")
            qc = _div(rem[e], lead_c)
            quot[qe] = qc
            for e2, c2 in b.terms.items():
                k = tuple(x + y for x, y in zip(qe, e2))
                s = _clean(rem.get(k, 0) - qc * c2)
                if s:
                    rem[k] = s
                else:
                    rem.pop(k, None)
        return MultiPoly._raw(a.variables, quot)

    # -- calculus and substitution

    def diff(self, var: str) -> "MultiPoly":
        if var not in self.variables:
            raise PolynomialError(f"unknown variable {var!r}; polynomial is in {self.variables}")
        i = self.variables.index(var)
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                terms[ne] = _clean(c * e[i])
        return MultiPoly._raw(self.variables, terms)

    def evaluate(self, point: Mapping[str, object]):
        """Value at a full assignment of the variables in use."""
        missing = [v for v in self.used_variables() if v not in point]
        if missing:
            raise PolynomialError(f"no value assigned to {', '.join(missing)}")
        vals = [point.get(v, 0) for v in self.variables]
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(vals, e):
                if k:
                    term = term * x**k
            total = total + term
        return _clean(total) if not isinstance(total, MultiPoly) else total

    def subs(self, assignment: Mapping[str, object]) -> "MultiPoly":
        """Substitute scalars or polynomials; substituted variables are removed."""
        keep = tuple(v for v in self.variables if v not in assignment)
        keep_idx = [i for i, v in enumerate(self.variables) if v not in assignment]
        sub_idx = [(i, assignment[v]) for i, v in enumerate(self.variables) if v in assignment]
        poly_values = any(isinstance(val, MultiPoly) for _, val in sub_idx)
        if not poly_values:
            terms: dict = {}
            for e, c in self.terms.items():
                val = c
                for i, x in sub_idx:
                    if e[i]:
                        val = val * x ** e[i]
                ne = tuple(e[i] for i in keep_idx)
                terms[ne] = terms.get(ne, 0) + val
            return MultiPoly(keep, terms)
        result = MultiPoly.constant(0, keep)
        for e, c in self.terms.items():
            mono = MultiPoly(keep, {tuple(e[i] for i in keep_idx): c})
            for i, x in sub_idx:
                if e[i]:
                    mono = mono * x ** e[i]
            result = result + mono
        return result

    def homogenize(self, new_var: str, degree: int | None = None) -> "MultiPoly":
        d = self.total_degree()
        if degree is None:
            degree = d
        if degree < d:
            raise PolynomialError(f"cannot homogenize a degree-{d} polynomial to degree {degree}")
        if new_var in self.variables:
            raise PolynomialError(f"{new_var!r} is already a variable")
        variables = self.variables + (new_var,)
        return MultiPoly._raw(
            variables, {e + (degree - sum(e),): c for e, c in self.terms.items()}
        )

    def dehomogenize(self, var: str) -> "MultiPoly":
        if var not in self.variables:
            raise PolynomialError(f"unknown variable {var!r}")
        return self.subs({var: 1})

    def coefficients_in(self, var: str) -> list["MultiPoly"]:
        """Coefficients (ascending powers of ``var``) as polynomials in the rest."""
        i = self.variables.index(var)
        rest = self.variables[:i] + self.variables[i + 1:]
        n = self.degree(var)
        buckets: list[dict] = [{} for _ in range(max(n, 0) + 1)]
        for e, c in self.terms.items():
            buckets[e[i]][e[:i] + e[i + 1:]] = c
        return [MultiPoly._raw(rest, b) for b in buckets]

    # -- normalisation

    def content(self) -> Fraction:
        """Positive rational content (gcd of numerators over lcm of denominators)."""
        if not self.has_rational_coefficients():
            raise PolynomialError("content is defined for rational coefficients only")
        if not self.terms:
            return Fraction(0)
        nums = [Fraction(c).numerator for c in self.terms.values()]
        dens = [Fraction(c).denominator for c in self.terms.values()]
        return Fraction(reduce(math.gcd, nums), reduce(lambda x, y: x * y // math.gcd(x, y), dens))

    def leading_exponent(self) -> tuple:
        """Largest exponent in graded-lex order."""
        return max(self.terms, key=lambda e: (sum(e), e))

    def primitive(self) -> "MultiPoly":
        """Integer primitive part with positive leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if self.terms[self.leading_exponent()] < 0:
            c = -c
        return self / c

    # -- text forms

    def sorted_terms(self) -> list[tuple[tuple, object]]:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def to_text(self) -> str:
        """Canonical human-readable form, terms in graded-lex order."""
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k
            )
            neg = _is_rational(c) and c < 0
            mag = -c if neg else c
            if not mono:
                body = _fmt_coeff(mag)
            elif _is_rational(mag) and mag == 1:
                body = mono
            else:
                body = f"{_fmt_coeff(mag)}*{mono}"
            parts.append(("-" if neg else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def to_latex(self) -> str:
        """Compact TeX-style form: w_0w_2+w_1^2+16w_2^2 (juxtaposition, no spaces)."""
        if not self.terms:
            return "0"
        out = ""
        for e, c in self.sorted_terms():
            mono = "".join(
                _tex_var(v) if k == 1 else f"{_tex_var(v)}^{k}" for v, k in zip(self.variables, e) if k
            )
            neg = _is_rational(c) and c < 0
            mag = -c if neg else c
            if not mono:
                body = _fmt_coeff(mag)
            elif _is_rational(mag) and mag == 1:
                body = mono
            else:
                body = _fmt_coeff(mag) + mono
            out += ("-" if neg else ("+" if out else "")) + body
        return out

    def to_dict(self) -> dict:
        """Serialisable form: sorted exponent vectors with [num, den] coefficients."""
        if not self.has_rational_coefficients():
            raise PolynomialError("only rational polynomials serialise")
        terms = []
        for e, c in sorted(self.terms.items()):
            c = Fraction(c)
            terms.append([list(e), [c.numerator, c.denominator]])
        return {"variables": list(self.variables), "terms": terms}

    @classmethod
    def from_dict(cls, data: Mapping) -> "MultiPoly":
        variables = tuple(data["variables"])
        terms = {}
        for e, (num, den) in data["terms"]:
            terms[tuple(e)] = Fraction(num, den)
        return cls(variables, terms)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MultiPoly({self.to_text()!r}, variables={self.variables})"


def jacobian_determinant(f: MultiPoly, g: MultiPoly, u: str, v: str) -> MultiPoly:
    """det [[df/du, df/dv], [dg/du, dg/dv]]."""
    f, g = f._align(g)
    return f.diff(u) * g.diff(v) - f.diff(v) * g.diff(u)


# --- univariate -------------------------------------------------------------

class UniPoly:
    """Dense univariate polynomial; ``coeffs[k]`` multiplies ``var**k``."""

    __slots__ = ("var", "coeffs")

    def __init__(self, coeffs: Sequence, var: str = "x"):
        cs = [_clean(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.var = var
        self.coeffs = tuple(cs)

    @classmethod
    def from_descending(cls, coeffs: Sequence, var: str = "x") -> "UniPoly":
        return cls(list(reversed(list(coeffs))), var)

    @classmethod
    def from_roots(cls, roots: Iterable, var: str = "x") -> "UniPoly":
        out = cls([1], var)
        for r in roots:
            out = out * cls([-r, 1], var)
        return out

    @classmethod
    def from_multi(cls, f: MultiPoly, var: str | None = None) -> "UniPoly":
        used = f.used_variables()
        if var is None:
            if len(used) > 1:
                raise PolynomialError(f"polynomial in {used} is not univariate")
            var = used[0] if used else (f.variables[0] if f.variables else "x")
        elif any(v != var for v in used):
            raise PolynomialError(f"polynomial in {used} is not univariate in {var}")
        if not f.terms:
            return cls([], var)
        if var not in f.variables:
            return cls([f.constant_value()], var)
        i = f.variables.index(var)
        cs = [0] * (f.degree(var) + 1)
        for e, c in f.terms.items():
            cs[e[i]] = c
        return cls(cs, var)

    def to_multi(self, variables: Sequence[str] | None = None) -> MultiPoly:
        variables = tuple(variables) if variables is not None else (self.var,)
        i = variables.index(self.var)
        n = len(variables)
        return MultiPoly(
            variables,
            {tuple(k if j == i else 0 for j in range(n)): c for k, c in enumerate(self.coeffs)},
        )

    # -- basics

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    @property
    def lc(self):
        if not self.coeffs:
            raise PolynomialError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def descending(self) -> list:
        return list(reversed(self.coeffs))

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == UniPoly([other]).coeffs
        return NotImplemented

    __hash__ = None

    def _same(self, other: "UniPoly"):
        if isinstance(other, UniPoly) and other.var != self.var and other.degree() > 0 and self.degree() > 0:
            raise PolynomialError(f"variables differ: {self.var} vs {other.var}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly([other], self.var)
        self._same(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return UniPoly([x + y for x, y in zip(a, b)], self.var)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QuadraticFieldElement)):
            return UniPoly([c * other for c in self.coeffs], self.var)
        self._same(other)
        if not self.coeffs or not other.coeffs:
            return UniPoly([], self.var)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = UniPoly([1], self.var)
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return _clean(acc)

    def derivative(self) -> "UniPoly":
        return UniPoly([k * c for k, c in enumerate(self.coeffs)][1:], self.var)

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return UniPoly([], self.var), self
        quot = [0] * (dq + 1)
        lc = other.lc
        for k in range(dq, -1, -1):
            q = _div(rem[k + len(other.coeffs) - 1], lc)
            quot[k] = q
            if q:
                for j, c in enumerate(other.coeffs):
                    rem[k + j] -= q * c
        return UniPoly(quot, self.var), UniPoly(rem[: len(other.coeffs) - 1], self.var)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        lc = self.lc
        return UniPoly([_div(c, lc) for c in self.coeffs], self.var)

    def integer_model(self) -> "UniPoly":
        """Primitive integer-coefficient multiple with positive leading coefficient."""
        if self.is_zero():
            return self
        return UniPoly.from_multi(self.to_multi().primitive(), self.var)

    def to_text(self) -> str:
        return self.to_multi().to_text()

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"UniPoly({self.to_text()!r})"


def _tex_var(v: str) -> str:
    m = re.fullmatch(r"([A-Za-z]+)(\d+)", v)
    return f"{m.group(1)}_{m.group(2)}" if m else v


def _prem_int(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of integer coefficient lists (ascending)."""
    a = list(a)
    db = len(b) - 1
    lc = b[-1]
    while len(a) - 1 >= db and a:
        k = len(a) - 1 - db
        top = a[-1]
        a = [lc * c for c in a]
        for j, c in enumerate(b):
            a[k + j] -= top * c
        while a and a[-1] == 0:
            a.pop()
    return a


def _primitive_int(a: list[int]) -> list[int]:
    g = reduce(math.gcd, a, 0)
    if g == 0:
        return a
    if a[-1] < 0:
        g = -g
    return [c // g for c in a]


def poly_gcd(f: UniPoly, g: UniPoly) -> UniPoly:
    """Monic gcd over Q (primitive PRS on integer models)."""
    if f.is_zero():
        return g.monic()
    if g.is_zero():
        return f.monic()
    if not all(_is_rational(c) for c in f.coeffs + g.coeffs):
        a, b = f, g
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()
    a = list(f.integer_model().coeffs)
    b = list(g.integer_model().coeffs)
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _prem_int(a, b)
        a, b = b, (_primitive_int(r) if r else [])
    return UniPoly(a, f.var).monic()


def squarefree_part(f: UniPoly) -> UniPoly:
    """f / gcd(f, f'), made monic."""
    if f.is_zero():
        raise PolynomialError("squarefree part of the zero polynomial")
    if f.degree() <= 0:
        return UniPoly([1], f.var)
    return (f // poly_gcd(f, f.derivative())).monic()


def rational_roots(f: UniPoly) -> set[Fraction]:
    """All roots of f in Q, by the rational root theorem on its integer model."""
    if f.is_zero():
        raise PolynomialError("rational roots of the zero polynomial")
    model = list(squarefree_part(f).integer_model().coeffs) if f.degree() > 0 else []
    roots: set[Fraction] = set()
    if not model:
        return roots
    if model[0] == 0:
        roots.add(Fraction(0))
        while model and model[0] == 0:
            model.pop(0)
    if len(model) <= 1:
        return roots
    n = len(model) - 1
    at_one, at_minus_one = sum(model), sum(c * (-1) ** k for k, c in enumerate(model))
    for q in divisors(model[-1]):
        qpow = [q**j for j in range(n + 1)]
        for p in divisors(model[0]):
            if math.gcd(p, q) != 1:
                continue
            for s in (p, -p):
                # cheap necessary conditions: (q - s) | f(1) and (q + s) | f(-1), scaled
                if q != s and at_one % (q - s):
                    continue
                if q != -s and at_minus_one % (q + s):
                    continue
                acc = model[n]
                for k in range(n - 1, -1, -1):
                    acc = acc * s + model[k] * qpow[n - k]
                if acc == 0:
                    roots.add(Fraction(s, q))
    return roots


def root_multiplicity(f: UniPoly, r) -> int:
    if f.is_zero():
        raise PolynomialError("multiplicity in the zero polynomial")
    lin = UniPoly([-r, 1], f.var)
    m = 0
    while f.degree() >= 1:
        q, rem = f.divmod(lin)
        if not rem.is_zero():
            break
        f, m = q, m + 1
    return m


# --- irreducibility via factor degrees mod p ---------------------------------------

def _fp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_divmod(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    a = list(a)
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        c = a[-1] * inv % p
        q[k] = c
        for j, bj in enumerate(b):
            a[k + j] = (a[k + j] - c * bj) % p
        _fp_trim(a)
    return q, a


def _fp_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    while b:
        a, b = b, _fp_divmod(a, b, p)[1]
    return a


def _fp_mulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _fp_divmod(_fp_trim(out), m, p)[1]


def _fp_powmod(a: list[int], e: int, m: list[int], p: int) -> list[int]:
    result, base = [1], _fp_divmod(a, m, p)[1]
    while e:
        if e & 1:
            result = _fp_mulmod(result, base, m, p)
        base = _fp_mulmod(base, base, m, p)
        e >>= 1
    return result


def factor_degrees_mod_p(f: UniPoly, p: int) -> list[int] | None:
    """Degrees of the irreducible factors of f mod p (distinct-degree factorisation).

    Returns None when p divides the leading coefficient or f mod p is not
    squarefree, since the pattern then says nothing about factors over Q.
    """
    g = [c % p for c in (int(c) for c in f.integer_model().coeffs)]
    if not _fp_trim(list(g)) or g[-1] == 0 or len(g) < 2:
        return None
    dg = _fp_trim([(i * c) % p for i, c in enumerate(g)][1:])
    if not dg or len(_fp_gcd(g, dg, p)) > 1:
        return None
    degrees = []
    rest, h, k = g, [0, 1], 0
    while len(rest) - 1 >= 2 * (k + 1):
        k += 1
        h = _fp_powmod(h, p, rest, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        common = _fp_gcd(rest, _fp_trim(diff), p)
        if len(common) > 1:
            degrees.extend([k] * ((len(common) - 1) // k))
            rest = _fp_divmod(rest, common, p)[0]
            h = _fp_divmod(h, rest, p)[1] if len(rest) > 1 else h
    if len(rest) > 1:
        degrees.append(len(rest) - 1)
    return sorted(degrees)


def _subset_sums(parts: list[int]) -> set[int]:
    sums = {0}
    for d in parts:
        sums |= {s + d for s in sums}
    return sums


def irreducibility_certificate(f: UniPoly, primes: Iterable[int]) -> tuple[bool | None, dict]:
    """Try to prove f irreducible over Q from factor-degree patterns mod p.

    A factor over Q of degree k forces k to be a sum of mod-p factor degrees
    for every usable p; if no 0 < k < deg f survives, f is irreducible.
    """
    n = f.degree()
    if n <= 1:
        return True, {"reason": "degree at most one"}
    possible = set(range(1, n))
    patterns = {}
    for p in primes:
        degs = factor_degrees_mod_p(f, p)
        if degs is None:
            continue
        patterns[p] = degs
        possible &= _subset_sums(degs)
        if not possible:
            return True, {"patterns": {str(q): v for q, v in patterns.items()}, "decisive_prime": p}
    return None, {"patterns": {str(q): v for q, v in patterns.items()}, "possible_factor_degrees": sorted(possible)}


def _may_have_quadratic_factor(f: UniPoly, bound: int = 100) -> bool:
    """False when factor degrees mod small primes exclude a quadratic factor over Q."""
    g = squarefree_part(f)
    if g.degree() < 2:
        return False
    possible = {2}
    for p in range(3, bound, 2):
        if any(p % q == 0 for q in range(3, int(p**0.5) + 1, 2)):
            continue
        degs = factor_degrees_mod_p(g, p)
        if degs is not None:
            possible &= _subset_sums(degs)
            if not possible:
                return False
    return True


def quad_field_roots(f: UniPoly, d: int) -> set[QuadraticFieldElement]:
    """All roots of a rational polynomial lying in Q(sqrt d).

    Writing x = a + b*sqrt(d) splits f(x) = A(a, b) + B(a, b)*sqrt(d).  Roots
    with b != 0 are common zeros of A and B/b; a is found among the rational
    roots of their resultant in b, then b among the rational roots of the gcd.
    """
    K = QuadraticField(d)
    if f.is_zero():
        raise PolynomialError("roots of the zero polynomial")
    roots = {K(r) for r in rational_roots(f)} if f.degree() > 0 else set()
    if f.degree() < 2 or not _may_have_quadratic_factor(f):
        return roots
    a_, b_ = MultiPoly.gens(("a", "b"))
    A = MultiPoly.constant(0, ("a", "b"))
    B = MultiPoly.constant(0, ("a", "b"))
    pa, pb = MultiPoly.constant(1, ("a", "b")), MultiPoly.constant(0, ("a", "b"))
    for c in f.coeffs:
        A, B = A + pa * c, B + pb * c
        pa, pb = a_ * pa + b_ * pb * d, a_ * pb + b_ * pa
    B_red = B.divexact(b_)
    res = resultant(A, B_red, "b")
    if res.is_zero():
        raise PolynomialError("norm-form resultant vanished; cannot search Q(sqrt d) roots")
    for a in rational_roots(UniPoly.from_multi(res, "a")):
        g = poly_gcd(
            UniPoly.from_multi(A.subs({"a": a}), "b"), UniPoly.from_multi(B_red.subs({"a": a}), "b")
        )
        if g.degree() < 1:
            continue
        for b in rational_roots(g):
            if b != 0:
                z = K(a, b)
                if f(z) == 0:
                    roots.add(z)
    return roots


# --- resultants -------------------------------------------------------------

def sylvester_matrix(f: MultiPoly, g: MultiPoly, var: str) -> list[list[MultiPoly]]:
    f, g = f._align(g)
    fc = list(reversed(f.coefficients_in(var)))
    gc = list(reversed(g.coefficients_in(var)))
    m, n = len(fc) - 1, len(gc) - 1
    zero = MultiPoly.constant(0, fc[0].variables)
    rows = []
    for i in range(n):
        rows.append([zero] * i + fc + [zero] * (n - 1 - i))
    for i in range(m):
        rows.append([zero] * i + gc + [zero] * (m - 1 - i))
    return rows


def _bareiss_det(mat: list[list[MultiPoly]]) -> MultiPoly:
    """Fraction-free determinant; every division is exact."""
    n = len(mat)
    if n == 0:
        raise PolynomialError("empty matrix")
    m = [list(row) for row in mat]
    sign = 1
    prev = None
    for k in range(n - 1):
        if m[k][k].is_zero():
            for r in range(k + 1, n):
                if not m[r][k].is_zero():
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return m[k][k] * 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            for j in range(k + 1, n):
                val = m[i][j] * pivot - mik * m[k][j]
                m[i][j] = val if prev is None else val.divexact(prev)
            m[i][k] = m[i][k] * 0
        prev = pivot
    det = m[n - 1][n - 1]
    return det if sign == 1 else -det


def resultant(f: MultiPoly, g: MultiPoly, var: str) -> MultiPoly:
    """Res_var(f, g) as a polynomial in the remaining variables."""
    if f.is_zero() or g.is_zero():
        raise PolynomialError("resultant with the zero polynomial")
    f, g = f._align(g)
    if var not in f.variables:
        f = f.with_variables(f.variables + (var,))
        g = g.with_variables(f.variables)
    m, n = f.degree(var), g.degree(var)
    rest = tuple(v for v in f.variables if v != var)
    if m == 0 and n == 0:
        return MultiPoly.constant(1, rest)
    if n == 0:
        return g.with_variables(f.variables).subs({var: 0}) ** m
    if m == 0:
        return f.subs({var: 0}) ** n
    return _bareiss_det(sylvester_matrix(f, g, var))


def _field_det(mat: list[list]) -> object:
    n = len(mat)
    m = [list(row) for row in mat]
    det = 1
    for k in range(n):
        piv = next((r for r in range(k, n) if m[r][k]), None)
        if piv is None:
            return 0
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            det = -det
        det = det * m[k][k]
        for i in range(k + 1, n):
            if m[i][k]:
                factor = _div(m[i][k], m[k][k])
                for j in range(k, n):
                    m[i][j] = m[i][j] - factor * m[k][j]
    return _clean(det)


def resultant_uni(f: UniPoly, g: UniPoly):
    """Determinant of the Sylvester matrix of two univariate polynomials."""
    if f.is_zero() or g.is_zero():
        raise PolynomialError("resultant with the zero polynomial")
    m, n = f.degree(), g.degree()
    if m == 0 and n == 0:
        return 1
    if n == 0:
        return _clean(g.lc ** m)
    if m == 0:
        return _clean(f.lc ** n)
    fc, gc = f.descending(), g.descending()
    rows = [[0] * i + fc + [0] * (n - 1 - i) for i in range(n)]
    rows += [[0] * i + gc + [0] * (m - 1 - i) for i in range(m)]
    return _field_det(rows)


# --- elimination ------------------------------------------------------------

class EliminationStage:
    __slots__ = ("var", "inputs", "passed_through", "resultants", "zero_pairs")

    def __init__(self, var, inputs, passed_through, resultants, zero_pairs):
        self.var = var
        self.inputs = inputs
        self.passed_through = passed_through
        self.resultants = resultants
        self.zero_pairs = zero_pairs

    def summary(self) -> dict:
        return {
            "variable": self.var,
            "equations_in": self.inputs,
            "passed_through": self.passed_through,
            "resultant_degrees": self.resultants,
            "vanishing_pairs": [list(p) for p in self.zero_pairs],
        }


def _reduce_stage_poly(f: MultiPoly) -> MultiPoly:
    f = f.drop_unused()
    if not f.has_rational_coefficients():
        return f
    f = f.primitive()
    if len(f.variables) == 1:
        f = squarefree_part(UniPoly.from_multi(f)).integer_model().to_multi()
    return f


def eliminate_to_polys(
    system: Sequence[MultiPoly], drop_vars: Sequence[str]
) -> tuple[list[MultiPoly], list[EliminationStage]]:
    """Pairwise resultant elimination of ``drop_vars``, keeping all survivors.

    Useful when more than one variable remains: the returned polynomials
    generate (up to extraneous factors) the projection of the solution set.
    """
    if len(system) < 2:
        raise PolynomialError("elimination needs at least two equations")
    polys = [_reduce_stage_poly(f) for f in system if not f.is_zero()]
    stages: list[EliminationStage] = []
    for var in drop_vars:
        involved = [f for f in polys if var in f.used_variables()]
        others = [f for f in polys if var not in f.used_variables()]
        results, zero_pairs, degs = [], [], []
        for (i, f), (j, g) in itertools.combinations(enumerate(involved), 2):
            r = resultant(f, g, var)
            if r.is_zero():
                zero_pairs.append((i, j))
                continue
            r = _reduce_stage_poly(r)
            degs.append(r.total_degree())
            results.append(r)
        if len(involved) >= 2 and not results:
            raise DegenerateEliminationError(
                var, f"all {len(zero_pairs)} resultants vanish identically (shared component)"
            )
        stages.append(EliminationStage(var, len(involved) + len(others), len(others), degs, zero_pairs))
        polys = others + results
    return polys, stages


def eliminate_with_trace(
    system: Sequence[MultiPoly], drop_vars: Sequence[str], keep: str | None = None
) -> tuple[UniPoly, list[EliminationStage]]:
    """Eliminate ``drop_vars`` in order; return the monic eliminant and the stage log.

    Polynomials that do not involve the current variable pass through; every
    pair that does contributes its resultant (pairs whose resultant vanishes
    identically are recorded).  A stage where every pair vanishes raises
    :class:`DegenerateEliminationError`.  The result is the monic squarefree
    gcd of the final univariate polynomials; the constant 1 means the system
    has no common solution.
    """
    polys, stages = eliminate_to_polys(system, drop_vars)
    remaining = sorted({v for f in polys for v in f.used_variables()})
    if keep is None:
        if len(remaining) != 1:
            raise PolynomialError(f"expected exactly one remaining variable, found {remaining}")
        keep = remaining[0]
    elif any(v != keep for v in remaining):
        raise PolynomialError(f"variables {remaining} remain after elimination, expected only {keep}")
    g = UniPoly([], keep)
    for f in polys:
        g = poly_gcd(g, UniPoly.from_multi(f, keep))
        if g.degree() == 0:
            break
    if g.is_zero():
        raise DegenerateEliminationError("final", "every remaining polynomial is zero")
    out = squarefree_part(g) if g.degree() > 0 else UniPoly([1], keep)
    return out, stages


def eliminate(system: Sequence[MultiPoly], drop_vars: Sequence[str], keep: str | None = None) -> UniPoly:
    return eliminate_with_trace(system, drop_vars, keep)[0]


# --- parsing ----------------------------------------------------------------

class PolynomialSyntaxError(PolynomialError):
    def __init__(self, message: str, text: str, col: int | None = None):
        where = f" at column {col + 1}" if col is not None else ""
        super().__init__(f"{message}{where} in {text!r}")
        self.col = col


def parse_poly(text: str, variables: Sequence[str]) -> MultiPoly:
    """Parse ``2*x0^2 - x1*x2 + 1/3`` style text; ``lhs = rhs`` means lhs - rhs.

    Products must be written with ``*``; ``^`` and ``**`` both mean powers.
    """
    variables = tuple(variables)
    if text.count("=") > 1:
        raise PolynomialSyntaxError("more than one '='", text)
    if "=" in text:
        lhs, rhs = text.split("=")
        return parse_poly(lhs, variables) - parse_poly(rhs, variables)
    src = text.replace("^", "**").strip()
    if not src:
        raise PolynomialSyntaxError("empty polynomial", text)
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise PolynomialSyntaxError("syntax error", text, (exc.offset or 1) - 1) from None

    def walk(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return MultiPoly.constant(node.value, variables)
        if isinstance(node, ast.Name):
            if node.id not in variables:
                raise PolynomialSyntaxError(f"unknown variable {node.id!r}", text, node.col_offset)
            return MultiPoly.var(node.id, variables)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = walk(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                base = walk(node.left)
                exp = walk(node.right)
                if not exp.is_constant() or not isinstance(exp.constant_value(), int) or exp.constant_value() < 0:
                    raise PolynomialSyntaxError("exponent must be a nonnegative integer", text, node.right.col_offset)
                return base ** exp.constant_value()
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if not right.is_constant() or not right.constant_value():
                    raise PolynomialSyntaxError("can only divide by a nonzero constant", text, node.right.col_offset)
                return left / Fraction(right.constant_value())
        raise PolynomialSyntaxError(
            f"unsupported syntax {type(node).__name__}", text, getattr(node, "col_offset", None)
        )

    return walk(tree.body)
