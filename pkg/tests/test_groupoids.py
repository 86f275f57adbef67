import unittest
from fractions import Fraction
from math import factorial

from app.errors import GroupoidError, SquareError, StructureError, UnknownClassError
from app.groupoids import (
    FiniteGroupoid,
    GroupoidMap,
    IsoClass,
    Square,
    fiber_cardinality,
    fiber_cardinality_graded,
    format_rational,
    homotopy_cardinality,
    is_monomorphism,
    is_pullback_at_cardinality,
    monomorphism_witness,
    product_groupoid,
    product_map,
    pullback_witness,
)


def sets_groupoid(n_max):
    """Finite sets of size 0..n_max: one class each, |Aut| = n!."""
    return FiniteGroupoid(tuple(IsoClass(f"S{n}", factorial(n), n) for n in range(n_max + 1)))


class TestFormatting(unittest.TestCase):
    """Test exact rational serialisation"""

    def test_integers_and_fractions(self):
        """Integers print bare, other rationals as p/q in lowest terms"""
        self.assertEqual(format_rational(4), "4")
        self.assertEqual(format_rational(Fraction(-2, 1)), "-2")
        self.assertEqual(format_rational(Fraction(3, 6)), "1/2")
        self.assertEqual(format_rational(Fraction(-4, 6)), "-2/3")


class TestFiniteGroupoid(unittest.TestCase):
    """Test groupoid construction and cardinality"""

    def test_classes_are_sorted(self):
        """Classes iterate in key order whatever the input order"""
        g = FiniteGroupoid((IsoClass("b", 1), IsoClass("a", 2)))
        self.assertEqual(g.keys(), ["a", "b"])
        self.assertIn("a", g)
        self.assertEqual(g["a"].aut_order, 2)

    def test_duplicate_keys_rejected(self):
        """Two classes with one key are an error"""
        with self.assertRaises(StructureError):
            FiniteGroupoid((IsoClass("a", 1), IsoClass("a", 2)))

    def test_unknown_key(self):
        """Lookup of a missing key raises UnknownClassError, also a KeyError"""
        g = sets_groupoid(2)
        with self.assertRaises(UnknownClassError):
            g["S9"]
        with self.assertRaises(KeyError):
            g["S9"]

    def test_aut_order_must_be_positive(self):
        """An automorphism group has at least one element"""
        with self.assertRaises(StructureError):
            IsoClass("x", 0)

    def test_homotopy_cardinality_of_sets(self):
        """The groupoid of finite sets up to 5 has cardinality sum of 1/n!"""
        expected = sum(Fraction(1, factorial(n)) for n in range(6))
        self.assertEqual(homotopy_cardinality(sets_groupoid(5)), expected)
        self.assertEqual(homotopy_cardinality(FiniteGroupoid()), 0)

    def test_truncate(self):
        """truncate keeps the classes up to the size bound"""
        self.assertEqual(sets_groupoid(5).truncate(2).keys(), ["S0", "S1", "S2"])

    def test_from_objects_keeps_first_representative(self):
        """from_objects classifies objects and keeps one representative per class"""
        objects = ["ab", "ba", "c"]
        g, reps = FiniteGroupoid.from_objects(objects, lambda s: IsoClass(f"S{len(s)}", factorial(len(s)), len(s)))
        self.assertEqual(g.keys(), ["S1", "S2"])
        self.assertEqual(reps["S2"], "ab")


class TestFibers(unittest.TestCase):
    """Test homotopy fibers of groupoid maps"""

    def setUp(self):
        # point -> S2: the fiber over S2 is the two-element set
        self.point = FiniteGroupoid((IsoClass("pt", 1),))
        self.s2 = FiniteGroupoid((IsoClass("S2", 2, 2),))
        self.pick = GroupoidMap(self.point, self.s2, {"pt": "S2"}, {"pt": 1}, "pick")

    def test_fiber_cardinality(self):
        """|Aut(z)| times the sum of 1/|Aut(x)| over the fiber"""
        self.assertEqual(fiber_cardinality(self.pick, "S2"), 2)

    def test_empty_fiber(self):
        """A class outside the image has fiber cardinality 0"""
        g = FiniteGroupoid((IsoClass("S2", 2, 2), IsoClass("S3", 6, 3)))
        f = GroupoidMap(self.point, g, {"pt": "S2"}, None, "pick")
        self.assertEqual(fiber_cardinality(f, "S3"), 0)

    def test_graded_fiber(self):
        """Graded fibers split the count by excess size"""
        sets = sets_groupoid(3)
        to_point = GroupoidMap(sets, FiniteGroupoid((IsoClass("S0", 1, 0),)), {k: "S0" for k in sets.keys()})
        graded = fiber_cardinality_graded(to_point, "S0")
        self.assertEqual(graded, {0: 1, 1: 1, 2: Fraction(1, 2), 3: Fraction(1, 6)})

    def test_strict_map_rejects_outside_image(self):
        """A strict map may not send a class outside its codomain"""
        with self.assertRaises(UnknownClassError):
            GroupoidMap(self.point, self.s2, {"pt": "S5"}, None, "bad")

    def test_undefined_map_rejected(self):
        """Every domain class needs an image"""
        with self.assertRaises(StructureError):
            GroupoidMap(self.point, self.s2, {}, None, "bad")

    def test_compose(self):
        """Composite of faithful maps is faithful and composes on classes"""
        ident = GroupoidMap.identity(self.s2)
        composite = ident.compose(self.pick)
        self.assertEqual(composite.image("pt"), "S2")
        self.assertTrue(composite.faithful)


class TestSquares(unittest.TestCase):
    """Test the cardinality-level pullback check"""

    def setUp(self):
        self.sets = sets_groupoid(3)
        self.ident = GroupoidMap.identity(self.sets)

    def test_identity_square_is_pullback(self):
        """A square of identities is a pullback"""
        square = Square(self.ident, self.ident, self.ident, self.ident, "id")
        self.assertIsNone(pullback_witness(square))
        self.assertTrue(is_pullback_at_cardinality(square))

    def test_non_commuting_square_raises(self):
        """Non-commuting squares are an error, not a False answer"""
        shift = GroupoidMap(self.sets, self.sets, {"S0": "S1", "S1": "S2", "S2": "S3", "S3": "S3"}, None, "shift")
        square = Square(self.ident, self.ident, shift, self.ident, "bad")
        with self.assertRaises(SquareError):
            pullback_witness(square)

    def test_witness_reports_both_fibers(self):
        """A failing square names the base class and both fiber values"""
        point = FiniteGroupoid((IsoClass("S0", 1, 0),))
        collapse = GroupoidMap(self.sets, point, {k: "S0" for k in self.sets.keys()}, None, "collapse")
        point_id = GroupoidMap.identity(point)

        # pulling collapse back along itself is fine
        self.assertIsNone(pullback_witness(Square(collapse, self.ident, point_id, collapse, "ok")))

        # a single point over the whole sets groupoid is not
        left = GroupoidMap(point, self.sets, {"S0": "S0"}, {"S0": 1}, "left")
        witness = pullback_witness(Square(point_id, left, point_id, collapse, "bad"))
        self.assertEqual(witness["base"], "S0")
        self.assertEqual(witness["top"], "1")
        self.assertEqual(witness["bottom"], "8/3")
        self.assertEqual(witness["bottom"], format_rational(homotopy_cardinality(self.sets)))


class TestMonomorphisms(unittest.TestCase):
    """Test monomorphism witnesses"""

    def test_identity_is_mono(self):
        """Identities are monomorphisms"""
        self.assertTrue(is_monomorphism(GroupoidMap.identity(sets_groupoid(2))))

    def test_two_classes_in_one_fiber(self):
        """Two classes over one base break injectivity"""
        domain = FiniteGroupoid((IsoClass("a", 1), IsoClass("b", 1)))
        target = FiniteGroupoid((IsoClass("z", 1),))
        f = GroupoidMap(domain, target, {"a": "z", "b": "z"}, {"a": 1, "b": 1}, "glue")
        witness = monomorphism_witness(f)
        self.assertEqual(witness["base"], "z")

    def test_automorphisms_must_match(self):
        """A rigid object over an object with symmetries is not a mono fiber"""
        f = GroupoidMap(FiniteGroupoid((IsoClass("pt", 1),)), FiniteGroupoid((IsoClass("S2", 2, 2),)), {"pt": "S2"}, {"pt": 1})
        self.assertFalse(is_monomorphism(f))

    def test_needs_automorphism_data(self):
        """Maps without automorphism images cannot be tested"""
        f = GroupoidMap(sets_groupoid(1), sets_groupoid(1), {"S0": "S0", "S1": "S1"}, None)
        with self.assertRaises(GroupoidError):
            monomorphism_witness(f)


class TestProducts(unittest.TestCase):
    """Test product groupoids and maps"""

    def test_product_groupoid(self):
        """Classes pair up and automorphism orders multiply"""
        p = product_groupoid(sets_groupoid(1), sets_groupoid(2))
        self.assertEqual(len(p), 6)
        self.assertEqual(p["(S1,S2)"].aut_order, 2)
        self.assertEqual(p["(S1,S2)"].size, 3)

    def test_product_map(self):
        """product_map acts factor by factor"""
        ident = GroupoidMap.identity(sets_groupoid(1))
        pm = product_map(ident, ident)
        self.assertEqual(pm.image("(S0,S1)"), "(S0,S1)")
        self.assertTrue(pm.faithful)


if __name__ == "__main__":
    unittest.main()
