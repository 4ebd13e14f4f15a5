"""Parser and evaluator checks for the manifold Reeb-number calculator.

Frozen values come from the closed-form rules: spheres and projective
spaces give 0, an orientable surface gives its genus, a nonorientable
surface gives half its genus rounded down, circle-times bundles give 1,
products take the max, and higher-dimensional connected sums add.
"""

import pytest
from hypothesis import given, strategies as st

from reebkit.errors import DimensionMismatch, UnsupportedExpression
from reebkit.manifolds import (
    CircleTimesProjective,
    CircleTimesSphere,
    ConnectedSum,
    NonOrientableSurface,
    OrientableSurface,
    Product,
    ProjectiveSpace,
    Sphere,
    dimension,
    parse_manifold,
    reeb_number,
)


def val(text, **kw):
    return reeb_number(text, **kw).value


class TestParser:
    def test_atoms(self):
        assert parse_manifold("S(4)") == Sphere(4)
        assert parse_manifold("RP(3)") == ProjectiveSpace(3)
        assert parse_manifold("Sig(0)") == OrientableSurface(0)
        assert parse_manifold("N(7)") == NonOrientableSurface(7)
        assert parse_manifold("S1xS(2)") == CircleTimesSphere(2)
        assert parse_manifold("S1xRP(5)") == CircleTimesProjective(5)

    def test_fused_atom_names_win_over_the_product_operator(self):
        # "S1xS" is one token, not a product of "S1" with "S".
        expr = parse_manifold("S1xS(2)xS(3)")
        assert expr == Product(CircleTimesSphere(2), Sphere(3))

    def test_product_binds_tighter_than_sum(self):
        expr = parse_manifold("Sig(1)xS(2)#S1xS(3)")
        assert expr == ConnectedSum(
            Product(OrientableSurface(1), Sphere(2)), CircleTimesSphere(3))

    def test_sums_associate_left(self):
        expr = parse_manifold("Sig(1)#Sig(2)#Sig(3)")
        assert expr == ConnectedSum(
            ConnectedSum(OrientableSurface(1), OrientableSurface(2)),
            OrientableSurface(3))

    def test_parens_and_whitespace(self):
        expr = parse_manifold(" ( S(2) # S(2) ) x Sig(3) ")
        assert isinstance(expr, Product)
        assert isinstance(expr.left, ConnectedSum)

    @pytest.mark.parametrize("bad", [
        "", "S", "S(1)", "RP(1)", "Sig(-1)", "N(0)", "S1xS(0)", "S1xRP(0)",
        "S(2))", "(S(2)", "S(2)#", "xS(2)", "S(two)", "Q(3)", "S1", "SigxS",
    ])
    def test_rejects_malformed_input(self, bad):
        with pytest.raises(UnsupportedExpression):
            parse_manifold(bad)

    def test_str_round_trips(self):
        for expr in [
            Sphere(6),
            Product(CircleTimesProjective(2), NonOrientableSurface(3)),
            ConnectedSum(Product(Sphere(2), Sphere(2)),
                         Product(OrientableSurface(1), Sphere(2))),
        ]:
            assert parse_manifold(str(expr)) == expr


class TestAtomValues:
    @pytest.mark.parametrize("n", range(2, 12))
    def test_spheres_and_projective_spaces_vanish(self, n):
        assert val(f"S({n})") == 0
        assert val(f"RP({n})") == 0

    @pytest.mark.parametrize("g", range(0, 51))
    def test_orientable_surface_equals_genus(self, g):
        assert val(f"Sig({g})") == g

    @pytest.mark.parametrize("g", range(1, 51))
    def test_nonorientable_surface_is_half_genus(self, g):
        assert val(f"N({g})") == g // 2

    def test_projective_plane_and_klein_bottle(self):
        assert val("RP(2)") == 0
        assert val("N(1)") == 0
        assert val("N(2)") == 1

    @pytest.mark.parametrize("m", range(1, 9))
    def test_circle_bundles_give_one(self, m):
        assert val(f"S1xS({m})") == 1
        assert val(f"S1xRP({m})") == 1


class TestConnectedSums:
    @pytest.mark.parametrize("n", [3, 4, 7])
    @pytest.mark.parametrize("g", range(1, 11))
    def test_sum_of_circle_sphere_bundles(self, n, g):
        text = "#".join([f"S1xS({n - 1})"] * g)
        assert val(text) == g

    def test_high_dimensional_sums_add(self):
        assert val("S1xRP(3)#S1xS(3)#RP(4)") == 2

    def test_sphere_summands_are_neutral(self):
        assert val("S(5)#S(5)") == 0
        assert val("S1xS(4)#S(5)") == 1

    def test_mismatched_dimensions_are_refused(self):
        with pytest.raises(DimensionMismatch):
            reeb_number("S(2)#S(3)")
        with pytest.raises(DimensionMismatch):
            reeb_number("Sig(1)xS(2)#S1xS(2)")

    def test_surface_sums_normalize(self):
        assert val("Sig(1)#Sig(2)") == 3
        # Two cross-caps make a Klein bottle, not two vanishing halves.
        assert val("N(1)#N(1)") == 1
        assert val("RP(2)#RP(2)") == 1
        # A handle counts as two cross-caps once the sum is nonorientable.
        assert val("Sig(3)#N(1)") == 3
        assert val("N(5)#Sig(2)") == 4
        assert val("S(2)#Sig(4)") == 4
        assert val("S1xS(1)#Sig(1)") == 2  # the bundle over a point is a torus
        assert val("S1xRP(1)#N(2)") == 2

    def test_chained_surface_sums_fold(self):
        assert val("Sig(1)#Sig(1)#Sig(1)") == 3
        assert val("RP(2)#RP(2)#RP(2)") == 1  # Dyck's surface, genus 3

    def test_orientable_sums_work_without_normalization(self):
        assert val("Sig(2)#Sig(3)", normalize_surfaces=False) == 5
        assert val("N(4)", normalize_surfaces=False) == 2

    def test_mixed_surface_sums_need_normalization(self):
        with pytest.raises(UnsupportedExpression):
            reeb_number("RP(2)#RP(2)", normalize_surfaces=False)
        with pytest.raises(UnsupportedExpression):
            reeb_number("Sig(1)#N(3)", normalize_surfaces=False)


# Pairs of (expression, Reeb number) for the product table.
KNOWN = [
    ("S(2)", 0),
    ("S(5)", 0),
    ("RP(3)", 0),
    ("Sig(0)", 0),
    ("Sig(4)", 4),
    ("N(7)", 3),
    ("S1xS(2)", 1),
    ("S1xRP(3)", 1),
    ("Sig(2)#Sig(3)", 5),
    ("S1xS(3)#S1xS(3)", 2),
]


class TestProducts:
    @pytest.mark.parametrize("a,ra", KNOWN)
    @pytest.mark.parametrize("b,rb", KNOWN[::2])
    def test_product_takes_the_max(self, a, ra, b, rb):
        assert val(f"({a})x({b})") == max(ra, rb)

    def test_max_rule_sample_table(self):
        table = [
            ("S(2)xS(2)", 0),
            ("S(2)xSig(3)", 3),
            ("Sig(3)xS(2)", 3),
            ("Sig(2)xSig(5)", 5),
            ("N(9)xRP(4)", 4),
            ("S1xS(2)xS(7)", 1),
            ("S1xRP(2)xN(6)", 3),
            ("RP(3)xRP(3)", 0),
            ("Sig(1)xN(1)", 1),
            ("(Sig(2)#Sig(2))xS(3)", 4),
        ]
        for text, expected in table:
            assert val(text) == expected, text

    @given(st.lists(st.sampled_from(KNOWN), min_size=1, max_size=6),
           st.randoms(use_true_random=False))
    def test_any_product_tree_takes_the_overall_max(self, leaves, rng):
        exprs = [f"({t})" for t, _ in leaves]
        while len(exprs) > 1:
            i = rng.randrange(len(exprs) - 1)
            exprs[i:i + 2] = [f"({exprs[i]}x{exprs[i + 1]})"]
        assert val(exprs[0]) == max(r for _, r in leaves)


class TestDerivations:
    def test_rules_are_named(self):
        res = reeb_number("S1xS(3)#RP(4)")
        assert res.value == 1
        assert any("[circle-times-sphere]" in s for s in res.derivation)
        assert any("[projective-space]" in s for s in res.derivation)
        assert "[connected-sum-additive]" in res.derivation[-1]

    def test_surface_folding_is_reported(self):
        res = reeb_number("Sig(1)#N(1)")
        assert res.value == 1
        assert any("[surface-sum]" in s for s in res.derivation)
        assert "N(3)" in " ".join(res.derivation)

    def test_root_rule_comes_last(self):
        res = reeb_number("Sig(2)xS(4)")
        assert res.derivation[-1].endswith("[product-max]")


class TestDimension:
    @pytest.mark.parametrize("text,dim", [
        ("S(6)", 6),
        ("N(3)", 2),
        ("S1xS(1)", 2),
        ("S1xRP(4)", 5),
        ("Sig(1)xS(3)", 5),
        ("S1xS(2)#S1xRP(2)", 3),
    ])
    def test_dimensions(self, text, dim):
        assert dimension(parse_manifold(text)) == dim
