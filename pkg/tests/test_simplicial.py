import unittest

from app.errors import BoundError, StructureError
from app.simplicial import (
    MAX_DEGREE,
    DecalageInstance,
    check_culf,
    check_decomposition_space,
    check_segal,
    check_simplicial_identities,
    complete_report,
    culf_report,
    drop_layering,
    forests_to_posets,
    instance_C,
    instance_forests,
    instance_I,
    posets_to_sets,
)


class TestGroupoids(unittest.TestCase):
    """Test the degree-wise groupoids of the layered instances"""

    def setUp(self):
        self.C = instance_C()
        self.I = instance_I()

    def test_degree_zero_is_a_point(self):
        """Only the empty structure has a 0-layering"""
        self.assertEqual(self.C.groupoid(0, 3).keys(), ["C0::"])
        self.assertEqual(len(self.I.groupoid(0, 3)), 1)

    def test_degree_one_is_the_corpus(self):
        """Degree 1 holds one class per poset"""
        self.assertEqual(len(self.C.groupoid(1, 3)), 1 + 1 + 2 + 5)
        self.assertEqual(self.I.groupoid(1, 3).keys(), ["S0", "S1", "S2", "S3"])

    def test_degree_two_of_sets(self):
        """2-layered sets of size up to 2 are the pairs of layer sizes"""
        keys = self.I.groupoid(2, 2).keys()
        self.assertEqual(keys, ["I2:0.0", "I2:0.1", "I2:0.2", "I2:1.0", "I2:1.1", "I2:2.0"])

    def test_degree_guard(self):
        """Degrees beyond the limit raise BoundError"""
        with self.assertRaises(BoundError):
            self.C.groupoid(MAX_DEGREE + 1, 1)

    def test_face_out_of_range(self):
        with self.assertRaises(StructureError):
            self.C.face_map(1, 2, 2)
        with self.assertRaises(StructureError):
            self.C.face_map(0, 0, 2)

    def test_inner_faces_are_faithful(self):
        """Joining layers keeps elements, deleting an outer one does not"""
        self.assertTrue(self.C.face_map(2, 1, 2).faithful)
        self.assertFalse(self.C.face_map(2, 0, 2).faithful)


class TestDecompositionSpace(unittest.TestCase):
    """Test the decomposition-space squares"""

    def test_posets(self):
        """Layered posets up to size 4 form a decomposition space in degrees up to 3"""
        report = check_decomposition_space(instance_C(), 4, 3)
        self.assertTrue(report.ok, report.failures())
        self.assertIn("dbot-d/n=1/i=1", [s.id for s in report.squares])

    def test_sets(self):
        report = check_decomposition_space(instance_I(), 4, 3)
        self.assertTrue(report.ok, report.failures())

    def test_forests(self):
        report = check_decomposition_space(instance_forests(), 4, 3)
        self.assertTrue(report.ok, report.failures())

    def test_dropped_layering_breaks_squares(self):
        """Removing the split discrete pair is detected"""
        pruned = drop_layering(instance_C(), 2, "C2:1.1:")
        self.assertNotIn("C2:1.1:", pruned.groupoid(2, 2))
        self.assertFalse(check_decomposition_space(pruned, 2, 3).ok)


class TestSegal(unittest.TestCase):
    """Test the Segal squares"""

    def test_sets_are_segal(self):
        """Layered finite sets satisfy the Segal condition"""
        self.assertTrue(check_segal(instance_I(), 4, 3).ok)

    def test_posets_are_not_segal(self):
        """A single point has two extensions in the top face fiber, one in the bottom"""
        report = check_segal(instance_C(), 2, 2)
        self.assertFalse(report.ok)
        entry = report.find("segal/n=1")
        self.assertFalse(entry.passed)
        self.assertEqual(entry.witness["base"], "P1:")

    def test_expected_failure_is_ok(self):
        """An entry that fails as expected leaves the report ok"""
        report = check_segal(instance_C(), 2, 2, expected=False)
        self.assertTrue(report.ok)

    def test_decalage_is_segal(self):
        """Both decalages of a decomposition space are Segal"""
        for side in ("lower", "upper"):
            with self.subTest(side=side):
                self.assertTrue(check_segal(DecalageInstance(instance_C(), side), 3, 2).ok)

    def test_bad_decalage_side(self):
        with self.assertRaises(StructureError):
            DecalageInstance(instance_C(), "sideways")


class TestCompleteness(unittest.TestCase):
    """Test the completeness check"""

    def test_posets_are_complete(self):
        self.assertTrue(complete_report(instance_C(), 4).ok)

    def test_duplicated_unit_is_detected(self):
        """A second copy of every degenerate class breaks s0-mono"""
        report = complete_report(instance_C(), 2, duplicate_unit=True)
        self.assertFalse(report.ok)
        self.assertIsNotNone(report.find("s0-mono").witness)


class TestCulf(unittest.TestCase):
    """Test culf maps between instances"""

    def test_decalage_maps_are_culf(self):
        """The map deleting the extra bottom (or top) layer is culf"""
        for side in ("lower", "upper"):
            with self.subTest(side=side):
                g = DecalageInstance(instance_C(), side).decalage_map()
                self.assertTrue(check_culf(g, 2, 2))

    def test_forests_to_posets_is_culf(self):
        report = culf_report(forests_to_posets(instance_forests(), instance_C()), 3, 2)
        self.assertTrue(report.ok, report.failures())

    def test_posets_to_sets_is_not_culf(self):
        """Forgetting the order changes the number of splittings of a chain"""
        report = culf_report(posets_to_sets(instance_C(), instance_I()), 2, 2)
        self.assertFalse(report.ok)
        self.assertFalse(report.find("d/k=2/i=1").passed)


class TestSimplicialIdentities(unittest.TestCase):
    """Test the pointwise simplicial identities"""

    def test_posets(self):
        report = check_simplicial_identities(instance_C(), 2, 2)
        self.assertTrue(report.ok, report.failures())

    def test_forests(self):
        self.assertTrue(check_simplicial_identities(instance_forests(), 2, 2).ok)


if __name__ == "__main__":
    unittest.main()
