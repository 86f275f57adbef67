import unittest
from collections import Counter
from itertools import product
from math import factorial

from app.errors import BoundError, StructureError
from app.forests import RootedForest, enumerate_forests, forest_cuts, forest_to_poset, isolated_roots
from app.posets import Layering, chain_poset, discrete_poset


class TestRootedForest(unittest.TestCase):
    """Test parent-array forests"""

    def test_invalid_parent_arrays(self):
        """Cycles, self-parents and out-of-range parents are rejected"""
        for parent in [(1, 0), (0,), (5,)]:
            with self.subTest(parent=parent):
                with self.assertRaises(StructureError):
                    RootedForest(parent)

    def test_roots_are_minimal(self):
        """The underlying order puts ancestors below descendants"""
        f = RootedForest((None, 0, 1))
        self.assertEqual(f.lower_sets[2], frozenset({0, 1}))
        self.assertEqual(forest_to_poset(f).canonical_form(), chain_poset(3).canonical_form())
        self.assertEqual(forest_to_poset(isolated_roots(3)).canonical_form(), discrete_poset(3).canonical_form())

    def test_keys_and_automorphisms(self):
        """Identical siblings and identical trees contribute factorials"""
        self.assertEqual(RootedForest((None, 0)).canonical_form().key, "F(())")
        two_roots = isolated_roots(2).canonical_form()
        self.assertEqual(two_roots.key, "F()()")
        self.assertEqual(two_roots.aut_order, 2)
        cherry = RootedForest((None, 0, 0)).canonical_form()
        self.assertEqual(cherry.key, "F(()())")
        self.assertEqual(cherry.aut_order, 2)

    def test_relabelling_invariance(self):
        """Key ignores node labels"""
        a = RootedForest((None, 0, 0, 1))
        b = RootedForest((2, 2, None, 0))
        self.assertEqual(a.canonical_form(), b.canonical_form())

    def test_layered_keys(self):
        """Layered forests record the layer of every node"""
        f = RootedForest((None, 0))
        key = Layering(f, 2, (1, 2)).canonical_form().key
        self.assertEqual(key, "R2:1(2())")

    def test_to_json(self):
        self.assertEqual(RootedForest((None, 0)).to_json(), {"parent": [None, 0]})


class TestEnumeration(unittest.TestCase):
    """Test forest enumeration"""

    def test_counts(self):
        """Rooted forests on n nodes number 1, 1, 2, 4, 9, 20, 48"""
        counts = Counter(f.n for f in enumerate_forests(6))
        self.assertEqual([counts[n] for n in range(7)], [1, 1, 2, 4, 9, 20, 48])

    def test_labelled_counts(self):
        """Summing n!/|Aut| over the classes gives (n+1)^(n-1) labelled forests"""
        totals = Counter()
        for f in enumerate_forests(6):
            totals[f.n] += factorial(f.n) // f.canonical_form().aut_order
        self.assertEqual([totals[n] for n in range(7)], [(n + 1) ** (n - 1) if n else 1 for n in range(7)])

    def test_matches_exhaustive_search(self):
        """Classes of all valid parent arrays on up to four nodes are the enumerated ones"""
        for n in range(5):
            with self.subTest(n=n):
                keys = set()
                valid = 0
                for parent in product([None, *range(n)], repeat=n):
                    try:
                        forest = RootedForest(parent)
                    except StructureError:
                        continue
                    valid += 1
                    keys.add(forest.canonical_form().key)
                self.assertEqual(valid, (n + 1) ** (n - 1) if n else 1)
                self.assertEqual(keys, {f.canonical_form().key for f in enumerate_forests(n) if f.n == n})

    def test_bound(self):
        with self.assertRaises(BoundError):
            enumerate_forests(99)


class TestCuts(unittest.TestCase):
    """Test admissible cuts of forests"""

    def test_edge_has_three_cuts(self):
        """A root with one child has the two trivial cuts and the middle one"""
        cuts = forest_cuts(RootedForest((None, 0)))
        self.assertEqual(len(cuts), 3)
        pairs = {(c.canonical_form().key, r.canonical_form().key) for c, r in cuts}
        self.assertIn(("F()", "F()"), pairs)
        self.assertIn(("F(())", "F"), pairs)
        self.assertIn(("F", "F(())"), pairs)

    def test_cherry(self):
        """A cherry has five cuts; the two single-leaf cuts agree up to iso"""
        cuts = forest_cuts(RootedForest((None, 0, 0)))
        self.assertEqual(len(cuts), 5)
        pairs = Counter((c.canonical_form().key, r.canonical_form().key) for c, r in cuts)
        self.assertEqual(pairs[("F()", "F(())")], 2)
        self.assertEqual(pairs[("F()()", "F()")], 1)

    def test_root_part_is_ancestor_closed(self):
        """Every root part is down-closed in the ancestor order"""
        f = RootedForest((None, 0, 1, None))
        for crown, root_part in forest_cuts(f):
            self.assertEqual(crown.n + root_part.n, f.n)


if __name__ == "__main__":
    unittest.main()
