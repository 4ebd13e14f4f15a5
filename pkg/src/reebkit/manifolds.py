"""Reeb numbers of closed manifolds given as product / connected-sum
expressions.

The Reeb number of a closed manifold is the largest k such that the
manifold admits a function whose quotient graph has first Betti number k;
for the families below it is determined by simple structure rules, so the
calculator works symbolically and reports which rule fired at each node.

Expression grammar (whitespace free or not, case sensitive)::

    expr    := product ("#" product)*
    product := atom ("x" atom)*
    atom    := "S" "(" n ")"      n-sphere, n >= 2
             | "RP" "(" n ")"     real projective n-space, n >= 2
             | "Sig" "(" g ")"    orientable surface of genus g >= 0
             | "N" "(" g ")"      nonorientable surface of genus g >= 1
             | "S1xS" "(" m ")"   circle times m-sphere, m >= 1
             | "S1xRP" "(" m ")"  circle times projective m-space, m >= 1
             | "(" expr ")"

"x" binds tighter than "#".  The circle factors only occur inside the two
fused atom names: a bare 1-dimensional factor has no Reeb number of its
own, while these bundles-over-nothing have well-known values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import DimensionMismatch, UnsupportedExpression

__all__ = [
    "CircleTimesProjective",
    "CircleTimesSphere",
    "ConnectedSum",
    "ManifoldExpr",
    "NonOrientableSurface",
    "OrientableSurface",
    "Product",
    "ProjectiveSpace",
    "ReebNumber",
    "Sphere",
    "parse_manifold",
    "reeb_number",
]


@dataclass(frozen=True)
class Sphere:
    n: int

    def __str__(self) -> str:
        return f"S({self.n})"


@dataclass(frozen=True)
class ProjectiveSpace:
    n: int

    def __str__(self) -> str:
        return f"RP({self.n})"


@dataclass(frozen=True)
class OrientableSurface:
    genus: int

    def __str__(self) -> str:
        return f"Sig({self.genus})"


@dataclass(frozen=True)
class NonOrientableSurface:
    genus: int

    def __str__(self) -> str:
        return f"N({self.genus})"


@dataclass(frozen=True)
class CircleTimesSphere:
    m: int

    def __str__(self) -> str:
        return f"S1xS({self.m})"


@dataclass(frozen=True)
class CircleTimesProjective:
    m: int

    def __str__(self) -> str:
        return f"S1xRP({self.m})"


@dataclass(frozen=True)
class Product:
    left: "ManifoldExpr"
    right: "ManifoldExpr"

    def __str__(self) -> str:
        return f"({self.left} x {self.right})"


@dataclass(frozen=True)
class ConnectedSum:
    left: "ManifoldExpr"
    right: "ManifoldExpr"

    def __str__(self) -> str:
        return f"({self.left} # {self.right})"


ManifoldExpr = Union[
    Sphere, ProjectiveSpace, OrientableSurface, NonOrientableSurface,
    CircleTimesSphere, CircleTimesProjective, Product, ConnectedSum,
]


@dataclass(frozen=True)
class ReebNumber:
    value: int
    derivation: tuple[str, ...]


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(S1xRP|S1xS|Sig|RP|S|N|\d+|[()#x])")

_ATOMS = {
    "S": (Sphere, 2, "S(n) needs n >= 2"),
    "RP": (ProjectiveSpace, 2, "RP(n) needs n >= 2"),
    "Sig": (OrientableSurface, 0, "Sig(g) needs g >= 0"),
    "N": (NonOrientableSurface, 1, "N(g) needs g >= 1"),
    "S1xS": (CircleTimesSphere, 1, "S1xS(m) needs m >= 1"),
    "S1xRP": (CircleTimesProjective, 1, "S1xRP(m) needs m >= 1"),
}


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise UnsupportedExpression(
                f"cannot read manifold expression at position {pos}: "
                f"{text[pos:pos + 12]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise UnsupportedExpression(
                f"expected {expected or 'a token'}, found {tok!r}")
        self.i += 1
        return tok

    def expr(self) -> ManifoldExpr:
        node = self.product()
        while self.peek() == "#":
            self.take()
            node = ConnectedSum(node, self.product())
        return node

    def product(self) -> ManifoldExpr:
        node = self.atom()
        while self.peek() == "x":
            self.take()
            node = Product(node, self.atom())
        return node

    def atom(self) -> ManifoldExpr:
        tok = self.peek()
        if tok == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if tok in _ATOMS:
            self.take()
            cls, low, msg = _ATOMS[tok]
            self.take("(")
            num = self.take()
            if not num.isdigit():
                raise UnsupportedExpression(f"expected a number, found {num!r}")
            self.take(")")
            value = int(num)
            if value < low:
                raise UnsupportedExpression(msg)
            return cls(value)
        raise UnsupportedExpression(f"unexpected token {tok!r}")


def parse_manifold(text: str) -> ManifoldExpr:
    p = _Parser(_tokenize(text))
    node = p.expr()
    if p.peek() is not None:
        raise UnsupportedExpression(f"trailing input from {p.peek()!r}")
    return node


# -- evaluation --------------------------------------------------------------


def dimension(expr: ManifoldExpr) -> int:
    if isinstance(expr, (Sphere, ProjectiveSpace)):
        return expr.n
    if isinstance(expr, (OrientableSurface, NonOrientableSurface)):
        return 2
    if isinstance(expr, (CircleTimesSphere, CircleTimesProjective)):
        return expr.m + 1
    if isinstance(expr, Product):
        return dimension(expr.left) + dimension(expr.right)
    if isinstance(expr, ConnectedSum):
        d1, d2 = dimension(expr.left), dimension(expr.right)
        if d1 != d2:
            raise DimensionMismatch(
                f"connected sum of a {d1}-manifold with a {d2}-manifold")
        return d1
    raise UnsupportedExpression(f"unknown node {expr!r}")


def _as_surface(expr: ManifoldExpr) -> tuple[str, int] | None:
    """Surface normal form ('or', genus) or ('non', genus), or None."""
    if isinstance(expr, OrientableSurface):
        return ("or", expr.genus)
    if isinstance(expr, NonOrientableSurface):
        return ("non", expr.genus)
    if isinstance(expr, Sphere) and expr.n == 2:
        return ("or", 0)
    if isinstance(expr, ProjectiveSpace) and expr.n == 2:
        return ("non", 1)
    if isinstance(expr, CircleTimesSphere) and expr.m == 1:
        return ("or", 1)
    if isinstance(expr, CircleTimesProjective) and expr.m == 1:
        return ("or", 1)  # the projective line is a circle, so this is a torus
    if isinstance(expr, ConnectedSum):
        sa, sb = _as_surface(expr.left), _as_surface(expr.right)
        if sa is None or sb is None:
            return None
        return _surface_sum(sa, sb)
    return None


def _surface_sum(a: tuple[str, int], b: tuple[str, int]) -> tuple[str, int]:
    """Genus bookkeeping for connected sums of closed surfaces: an
    orientable handle counts double once any cross-cap is present."""
    if a[0] == "or" and b[0] == "or":
        return ("or", a[1] + b[1])
    ga = 2 * a[1] if a[0] == "or" else a[1]
    gb = 2 * b[1] if b[0] == "or" else b[1]
    return ("non", ga + gb)


def _eval(expr: ManifoldExpr, normalize_surfaces: bool,
          steps: list[str]) -> int:
    if isinstance(expr, Sphere):
        steps.append(f"R({expr}) = 0 [sphere]")
        return 0
    if isinstance(expr, ProjectiveSpace):
        steps.append(f"R({expr}) = 0 [projective-space]")
        return 0
    if isinstance(expr, OrientableSurface):
        steps.append(f"R({expr}) = {expr.genus} [orientable-surface]")
        return expr.genus
    if isinstance(expr, NonOrientableSurface):
        steps.append(f"R({expr}) = {expr.genus // 2} [nonorientable-surface]")
        return expr.genus // 2
    if isinstance(expr, CircleTimesSphere):
        steps.append(f"R({expr}) = 1 [circle-times-sphere]")
        return 1
    if isinstance(expr, CircleTimesProjective):
        steps.append(f"R({expr}) = 1 [circle-times-projective]")
        return 1
    if isinstance(expr, Product):
        a = _eval(expr.left, normalize_surfaces, steps)
        b = _eval(expr.right, normalize_surfaces, steps)
        value = max(a, b)
        steps.append(f"R({expr}) = max({a}, {b}) = {value} [product-max]")
        return value
    if isinstance(expr, ConnectedSum):
        dim = dimension(expr)
        if dim >= 3:
            a = _eval(expr.left, normalize_surfaces, steps)
            b = _eval(expr.right, normalize_surfaces, steps)
            steps.append(
                f"R({expr}) = {a} + {b} = {a + b} [connected-sum-additive]")
            return a + b
        sa, sb = _as_surface(expr.left), _as_surface(expr.right)
        if sa is None or sb is None:
            raise UnsupportedExpression(
                f"cannot evaluate the 2-dimensional sum {expr}: an operand "
                "is not a recognizable closed surface")
        if not normalize_surfaces and ("non" in (sa[0], sb[0])):
            raise UnsupportedExpression(
                f"{expr} mixes nonorientable surfaces; pass "
                "normalize_surfaces=True to allow genus bookkeeping")
        kind, genus = _surface_sum(sa, sb)
        merged: ManifoldExpr = (OrientableSurface(genus) if kind == "or"
                                else NonOrientableSurface(genus))
        steps.append(f"{expr} ~ {merged} [surface-sum]")
        return _eval(merged, normalize_surfaces, steps)
    raise UnsupportedExpression(f"unknown node {expr!r}")


def reeb_number(expr: ManifoldExpr | str, *,
                normalize_surfaces: bool = True) -> ReebNumber:
    """Evaluate the Reeb number of an expression (or its source text),
    with a per-node account of the rules applied."""
    node = parse_manifold(expr) if isinstance(expr, str) else expr
    dimension(node)  # surface all DimensionMismatch complaints up front
    steps: list[str] = []
    value = _eval(node, normalize_surfaces, steps)
    return ReebNumber(value, tuple(steps))
