"""Pipeline configuration: a flat ``key = value`` text format.

Lines are ``key = value``; ``#`` starts a comment.  Polynomials use the
canonical text form of :mod:`surfcert.poly`.  Point lists are written as
``(x : y : z); (x : y : z)`` and coordinates may use ``i`` and ``sqrt(n)``.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field, fields
from fractions import Fraction

from .exact_arith import QuadraticField, QuadraticFieldElement, factorize, format_rational
from .pencil import U_VARS, W_VARS, X_VARS, ConicPencil, GeometryError, MapToP1, _proportional
from .poly import PolynomialError, parse_poly
from .elliptic import CurveError, WeierstrassCurve


class ConfigError(ValueError):
    """Semantic error naming the offending field."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class ConfigSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


# --- coordinates ---------------------------------------------------------------

def _sqrt_int(n: int):
    if n == 0:
        return Fraction(0)
    sign = -1 if n < 0 else 1
    square, rest = 1, sign
    for p, e in factorize(abs(n)).items():
        square *= p ** (e // 2)
        rest *= p ** (e % 2)
    if rest == 1:
        return Fraction(square)
    return QuadraticField(rest)(0, square)


def parse_coordinate(text: str):
    """Exact value of a coordinate such as ``-4*i``, ``4*sqrt(3)`` or ``1/2``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse coordinate {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Fraction(node.value)
        if isinstance(node, ast.Name) and node.id == "i":
            return QuadraticField(-1).gen
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            x, y = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return x + y
            if isinstance(node.op, ast.Sub):
                return x - y
            if isinstance(node.op, ast.Mult):
                return x * y
            return x / y
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id == "sqrt"
            and len(node.args) == 1
            and not node.keywords
        ):
            n = ev(node.args[0])
            if not isinstance(n, Fraction) or n.denominator != 1:
                raise ValueError("sqrt takes an integer")
            return _sqrt_int(n.numerator)
        raise ValueError(f"unsupported expression in coordinate {text!r}")

    value = ev(tree.body)
    if isinstance(value, QuadraticFieldElement) and value.b == 0:
        return value.a
    return value


def format_coordinate(c) -> str:
    if isinstance(c, QuadraticFieldElement):
        if c.d == -1:
            root = "i"
        else:
            root = f"sqrt({c.d})"
        parts = []
        if c.a:
            parts.append(format_rational(c.a))
        coeff = "" if c.b == 1 else "-" if c.b == -1 else f"{format_rational(c.b)}*"
        term = f"{coeff}{root}"
        if parts and not term.startswith("-"):
            term = "+" + term
        return "".join(parts) + term
    return format_rational(c)


def parse_point_list(text: str, arity: int) -> list[tuple]:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if not (chunk.startswith("(") and chunk.endswith(")")):
            raise ValueError(f"point {chunk!r} must be written (a : b{' : c' if arity == 3 else ''})")
        coords = [parse_coordinate(c) for c in chunk[1:-1].split(":")]
        if len(coords) != arity:
            raise ValueError(f"point {chunk!r} needs {arity} coordinates")
        if all(c == 0 for c in coords):
            raise ValueError(f"point {chunk!r} has all coordinates zero")
        pts.append(tuple(coords))
    return pts


def format_point_list(points) -> str:
    return "; ".join("(" + " : ".join(format_coordinate(c) for c in P) + ")" for P in points)


# --- the configuration ---------------------------------------------------------

@dataclass
class PipelineConfig:
    name: str
    a: Fraction
    b: Fraction
    d: int
    F: str
    G: str
    gamma_numerator: str
    gamma_denominator: str
    R: list | None = None
    prime_bound: int = 50
    seed: int = 0
    claims_EK: list | None = None
    claims_EL: list | None = None
    surface_points: list = field(default_factory=list)
    wa_places: tuple = (5, 13)
    expect_branch: str | None = None
    expect_jacobian_minor: str | None = None
    expect_degree: int | None = None
    expect_surface: tuple | None = None

    # domain objects
    def curve(self) -> WeierstrassCurve:
        return WeierstrassCurve(self.a, self.b)

    def pencil(self) -> ConicPencil:
        return ConicPencil(parse_poly(self.F, X_VARS), parse_poly(self.G, X_VARS))

    def gamma(self) -> MapToP1:
        return MapToP1.on_curve(
            parse_poly(self.gamma_numerator, W_VARS), parse_poly(self.gamma_denominator, W_VARS), self.curve()
        )

    def replace(self, **changes) -> "PipelineConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(changes)
        return PipelineConfig(**data)

    def to_text(self) -> str:
        lines = [
            f"name = {self.name}",
            f"curve.a = {format_rational(self.a)}",
            f"curve.b = {format_rational(self.b)}",
            f"field.d = {self.d}",
            f"pencil.F = {self.F}",
            f"pencil.G = {self.G}",
            f"gamma.numerator = {self.gamma_numerator}",
            f"gamma.denominator = {self.gamma_denominator}",
            f"prime_bound = {self.prime_bound}",
            f"seed = {self.seed}",
            f"wa.places = {', '.join(str(v) for v in self.wa_places)}",
        ]
        if self.R is not None:
            lines.append(f"R = {format_point_list(self.R)}")
        if self.claims_EK is not None:
            lines.append(f"claims.EK = {format_point_list(self.claims_EK)}")
        if self.claims_EL is not None:
            lines.append(f"claims.EL = {format_point_list(self.claims_EL)}")
        for w, x in self.surface_points:
            lines.append(f"surface.point = {format_point_list([w])} x {format_point_list([x])}")
        if self.expect_branch is not None:
            lines.append(f"expect.branch = {self.expect_branch}")
        if self.expect_jacobian_minor is not None:
            lines.append(f"expect.jacobian_minor = {self.expect_jacobian_minor}")
        if self.expect_degree is not None:
            lines.append(f"expect.degree = {self.expect_degree}")
        if self.expect_surface is not None:
            lines.append(f"expect.surface1 = {self.expect_surface[0]}")
            lines.append(f"expect.surface2 = {self.expect_surface[1]}")
        return "\n".join(lines) + "\n"


_SINGLE_KEYS = {
    "name", "curve.a", "curve.b", "field.d", "pencil.F", "pencil.G", "gamma.numerator",
    "gamma.denominator", "R", "prime_bound", "seed", "claims.EK", "claims.EL", "wa.places",
    "expect.branch", "expect.jacobian_minor", "expect.degree", "expect.surface1", "expect.surface2",
}
_REPEATABLE_KEYS = {"surface.point"}


def _lex(text: str) -> list[tuple[str, str, int]]:
    entries, seen = [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise ConfigSyntaxError("expected 'key = value'", lineno, col)
        key_part, value = line.split("=", 1)
        key = key_part.strip()
        if not key or any(ch.isspace() for ch in key):
            raise ConfigSyntaxError(f"malformed key {key_part.strip()!r}", lineno, len(key_part) - len(key_part.lstrip()) + 1)
        if key not in _SINGLE_KEYS and key not in _REPEATABLE_KEYS:
            raise ConfigSyntaxError(f"unknown key {key!r}", lineno, line.index(key) + 1)
        if key in _SINGLE_KEYS and key in seen:
            raise ConfigSyntaxError(f"duplicate key {key!r} (first on line {seen[key]})", lineno, line.index(key) + 1)
        seen[key] = lineno
        if not value.strip():
            raise ConfigSyntaxError(f"empty value for {key!r}", lineno, len(line) + 1)
        entries.append((key, value.strip(), lineno))
    return entries


def _rational(key: str, value: str) -> Fraction:
    try:
        return Fraction(value)
    except ValueError:
        raise ConfigError(key, f"{value!r} is not a rational number") from None


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(key, f"{value!r} is not an integer") from None


def parse_config(text: str) -> PipelineConfig:
    """Parse and validate a configuration; errors carry a position or field name."""
    entries = _lex(text)
    kv = {k: v for k, v, _ in entries if k in _SINGLE_KEYS}
    if "curve.a" not in kv and "curve.b" not in kv:
        raise ConfigError("curve", "missing curve")
    for key in ("curve.a", "curve.b", "field.d", "pencil.F", "pencil.G", "gamma.numerator", "gamma.denominator"):
        if key not in kv:
            raise ConfigError(key, "missing required field")
    a, b = _rational("curve.a", kv["curve.a"]), _rational("curve.b", kv["curve.b"])
    try:
        WeierstrassCurve(a, b)
    except CurveError as exc:
        raise ConfigError("curve", str(exc)) from None
    d = _int("field.d", kv["field.d"])
    try:
        QuadraticField(d)
    except ValueError as exc:
        raise ConfigError("field.d", str(exc)) from None

    polys = {}
    for key, variables in (
        ("pencil.F", X_VARS), ("pencil.G", X_VARS), ("gamma.numerator", W_VARS), ("gamma.denominator", W_VARS),
    ):
        try:
            polys[key] = parse_poly(kv[key], variables)
        except PolynomialError as exc:
            raise ConfigError(key, str(exc)) from None
    F, G = polys["pencil.F"], polys["pencil.G"]
    if F.is_zero() or G.is_zero() or _proportional(F, G):
        raise ConfigError("pencil", "pencil degenerate")
    try:
        ConicPencil(F, G)
    except GeometryError as exc:
        raise ConfigError("pencil", str(exc)) from None
    try:
        MapToP1.on_curve(polys["gamma.numerator"], polys["gamma.denominator"], WeierstrassCurve(a, b))
    except GeometryError as exc:
        raise ConfigError("gamma", str(exc)) from None

    def points(key, arity):
        if key not in kv:
            return None
        try:
            return parse_point_list(kv[key], arity)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None

    surface_points = []
    for key, value, _ in entries:
        if key != "surface.point":
            continue
        try:
            w_text, x_text = value.split(" x ")
            (w,) = parse_point_list(w_text, 3)
            (x,) = parse_point_list(x_text, 3)
        except ValueError as exc:
            raise ConfigError(key, f"expected '(w0 : w1 : w2) x (x0 : x1 : x2)': {exc}") from None
        surface_points.append((w, x))

    places = (5, 13)
    if "wa.places" in kv:
        parts = [p.strip() for p in kv["wa.places"].split(",")]
        if len(parts) != 2:
            raise ConfigError("wa.places", "need exactly two places")
        places = tuple(p if p == "real" else _int("wa.places", p) for p in parts)

    expect_branch = kv.get("expect.branch")
    if expect_branch is not None:
        try:
            parse_poly(expect_branch, ("u0",))
        except PolynomialError as exc:
            raise ConfigError("expect.branch", str(exc)) from None
    expect_minor = kv.get("expect.jacobian_minor")
    if expect_minor is not None:
        try:
            parse_poly(expect_minor, (W_VARS[0], W_VARS[1], U_VARS[0]))
        except PolynomialError as exc:
            raise ConfigError("expect.jacobian_minor", str(exc)) from None
    surface = None
    if "expect.surface1" in kv or "expect.surface2" in kv:
        if not ("expect.surface1" in kv and "expect.surface2" in kv):
            raise ConfigError("expect.surface", "give both surface1 and surface2")
        surface = (kv["expect.surface1"], kv["expect.surface2"])

    bound = _int("prime_bound", kv.get("prime_bound", "50"))
    if bound < 3:
        raise ConfigError("prime_bound", "must be at least 3")
    return PipelineConfig(
        name=kv.get("name", "unnamed"),
        a=a,
        b=b,
        d=d,
        F=F.to_text(),
        G=G.to_text(),
        gamma_numerator=polys["gamma.numerator"].to_text(),
        gamma_denominator=polys["gamma.denominator"].to_text(),
        R=points("R", 2),
        prime_bound=bound,
        seed=_int("seed", kv.get("seed", "0")),
        claims_EK=points("claims.EK", 3),
        claims_EL=points("claims.EL", 3),
        surface_points=surface_points,
        wa_places=places,
        expect_branch=expect_branch,
        expect_jacobian_minor=expect_minor,
        expect_degree=_int("expect.degree", kv["expect.degree"]) if "expect.degree" in kv else None,
        expect_surface=surface,
    )


WU_EXAMPLE = """\
# y^2 = x^3 - 16 over Q, the pencil spanned by two conics meeting transversally,
# and a degree 6 map E -> P^1 sending E(Q) to infinity and (0 : +-4i : 1) to 0.
name = wu-example
curve.a = 0
curve.b = -16
field.d = -1
pencil.F = x0^2 + x1^2 - x2^2
pencil.G = x0^2 - x1^2
gamma.numerator = w0*w2 + w1^2 + 16*w2^2
gamma.denominator = w0*w1 + w1*w2
prime_bound = 50
seed = 0
claims.EK = (0 : 1 : 0)
claims.EL = (0 : 4*i : 1); (0 : -4*i : 1); (0 : 1 : 0)
surface.point = (0 : 1 : 0) x (3 : 4 : 5)
surface.point = (0 : 4*i : 1) x (1 : 1 : 0)
surface.point = (0 : -4*i : 1) x (1 : -1 : 0)
wa.places = 5, 13
expect.degree = 6
expect.jacobian_minor = 3*(2*w1 - w0*u0 - u0)*w0^2 + 2*w1*(1 - w1*u0)
expect.branch = u0^12 + 60627/4913*u0^10 + 159828/4913*u0^8 - 3505917/19652*u0^6 - 42057961/58956*u0^4 + 76076/14739*u0^2 - 4112/132651
expect.surface1 = (w_0w_2+w_1^2+16w_2^2)(x_0^2+x_1^2-x_2^2)+(w_0w_1+w_1w_2)(x_0^2-x_1^2)=0
expect.surface2 = w_1^2w_2=w_0^3-16w_2^3
"""

BUILTINS = {"wu-example": WU_EXAMPLE}


def builtin_config(name: str) -> PipelineConfig:
    if name not in BUILTINS:
        raise ConfigError("builtin", f"unknown built-in {name!r}; available: {', '.join(sorted(BUILTINS))}")
    return parse_config(BUILTINS[name])
