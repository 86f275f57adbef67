import random
import unittest
from collections import Counter
from itertools import permutations
from math import comb, factorial

from sympy.functions.combinatorial.numbers import stirling

from app.errors import BoundError, StructureError
from app.posets import (
    FiniteSetObj,
    Layering,
    Poset,
    chain_poset,
    discrete_part_of_layer,
    discrete_poset,
    disjoint_union,
    down_closed_subsets,
    enumerate_posets,
    isolated_points,
    layerings,
    nonempty_layerings_count,
    ordinal_sum,
    restrict,
    weak_compositions,
)


def labelled_posets(n):
    """Every strict order on 0..n-1, found by testing all relation sets"""
    pairs = list(permutations(range(n), 2))
    found = []
    for mask in range(1 << len(pairs)):
        rel = {pairs[b] for b in range(len(pairs)) if mask >> b & 1}
        if any((j, i) in rel for i, j in rel):
            continue
        if any((i, k) not in rel for i, j in rel for j2, k in rel if j == j2):
            continue
        found.append(Poset(n, frozenset(rel)))
    return found


def relabelled(p, perm):
    return Poset(p.n, frozenset((perm[i], perm[j]) for i, j in p.relations))


class TestPosetConstruction(unittest.TestCase):
    """Test poset validation and cover input"""

    def test_from_covers_takes_closure(self):
        """Covers 0<1<2 generate the chain on three elements"""
        p = Poset.from_covers(3, [[0, 1], [1, 2]])
        self.assertIn((0, 2), p.relations)
        self.assertEqual(p.canonical_form(), chain_poset(3).canonical_form())
        self.assertEqual(p.covers(), [(0, 1), (1, 2)])

    def test_cycle_is_rejected(self):
        """A cycle in the covers breaks antisymmetry"""
        with self.assertRaises(StructureError) as ctx:
            Poset.from_covers(3, [[0, 1], [1, 2], [2, 0]])
        self.assertIn("cycle", str(ctx.exception))

    def test_loop_and_range(self):
        """Loops and out-of-range endpoints carry the offending cover"""
        with self.assertRaises(StructureError) as ctx:
            Poset.from_covers(2, [[0, 1], [1, 1]])
        self.assertEqual(ctx.exception.position, "covers[1]")
        with self.assertRaises(StructureError):
            Poset.from_covers(2, [[0, 5]])

    def test_non_transitive_relation(self):
        """Direct construction checks transitivity"""
        with self.assertRaises(StructureError):
            Poset(3, frozenset({(0, 1), (1, 2)}))

    def test_to_json(self):
        """JSON output lists the covers, not the whole order"""
        self.assertEqual(chain_poset(3).to_json(), {"n": 3, "covers": [[0, 1], [1, 2]]})


class TestCanonicalForms(unittest.TestCase):
    """Test canonical keys and automorphism orders"""

    def test_small_keys(self):
        """Keys for the two posets on two elements"""
        self.assertEqual(chain_poset(2).canonical_form().key, "P2:0<1")
        self.assertEqual(discrete_poset(2).canonical_form().key, "P2:")
        self.assertEqual(discrete_poset(2).canonical_form().aut_order, 2)
        self.assertEqual(Poset(0).canonical_form().key, "P0:")

    def test_relabelling_invariance(self):
        """Isomorphic posets given with different labels share a key"""
        # V shape: one element below two
        a = Poset.from_covers(3, [[0, 1], [0, 2]])
        b = Poset.from_covers(3, [[2, 0], [2, 1]])
        self.assertEqual(a.canonical_form(), b.canonical_form())
        self.assertEqual(a.canonical_form().aut_order, 2)

    def test_random_relabelling(self):
        """Shuffled labels keep the key and the automorphism order, layered or not"""
        rng = random.Random(20)
        for p in enumerate_posets(6):
            perm = list(range(p.n))
            for _ in range(3):
                rng.shuffle(perm)
                with self.subTest(poset=p.canonical_form().key, perm=tuple(perm)):
                    q = relabelled(p, perm)
                    self.assertEqual(q.canonical_form(), p.canonical_form())
                    for layered in layerings(p, 2)[:4]:
                        layer_of = [0] * p.n
                        for x in range(p.n):
                            layer_of[perm[x]] = layered.layer_of[x]
                        moved = Layering(q, 2, tuple(layer_of))
                        self.assertEqual(moved.canonical_form(), layered.canonical_form())

    def test_discrete_automorphisms(self):
        """The discrete poset on n points has n! automorphisms"""
        for n in range(5):
            with self.subTest(n=n):
                self.assertEqual(discrete_poset(n).canonical_form().aut_order, factorial(n))

    def test_operations(self):
        """Ordinal sum of points is a chain, disjoint union keeps points isolated"""
        point = discrete_poset(1)
        self.assertEqual(ordinal_sum(point, point).canonical_form(), chain_poset(2).canonical_form())
        p = disjoint_union(chain_poset(2), point)
        self.assertEqual(isolated_points(p), frozenset({2}))


class TestEnumeration(unittest.TestCase):
    """Test exhaustive poset enumeration"""

    def test_counts(self):
        """Unlabelled posets number 1, 1, 2, 5, 16, 63, 318"""
        counts = Counter(p.n for p in enumerate_posets(6))
        self.assertEqual([counts[n] for n in range(7)], [1, 1, 2, 5, 16, 63, 318])

    def test_labelled_counts(self):
        """Summing n!/|Aut| over the classes gives the labelled posets 1, 1, 3, 19, 219, 4231, 130023"""
        totals = Counter()
        for p in enumerate_posets(6):
            totals[p.n] += factorial(p.n) // p.canonical_form().aut_order
        self.assertEqual([totals[n] for n in range(7)], [1, 1, 3, 19, 219, 4231, 130023])

    def test_matches_exhaustive_search(self):
        """Classes of all strict orders on up to four labels are the enumerated ones"""
        enumerated = Counter()
        for p in enumerate_posets(4):
            enumerated[p.n] += 1
        for n in range(5):
            with self.subTest(n=n):
                found = labelled_posets(n)
                self.assertEqual(len(found), [1, 1, 3, 19, 219][n])
                keys = {q.canonical_form().key for q in found}
                self.assertEqual(keys, {p.canonical_form().key for p in enumerate_posets(n) if p.n == n})
                self.assertEqual(len(keys), enumerated[n])

    def test_keys_are_distinct(self):
        """Enumeration returns one poset per class"""
        keys = [p.canonical_form().key for p in enumerate_posets(4)]
        self.assertEqual(len(keys), len(set(keys)))

    def test_bounds(self):
        """Sizes outside the supported range raise BoundError"""
        with self.assertRaises(BoundError):
            enumerate_posets(-1)
        with self.assertRaises(BoundError):
            enumerate_posets(8)


class TestLayerings(unittest.TestCase):
    """Test layerings, their faces and degeneracies"""

    def test_layering_counts(self):
        """A set has depth^n layerings, a chain has multiset-many"""
        for n in range(4):
            for depth in range(1, 4):
                with self.subTest(n=n, depth=depth):
                    self.assertEqual(len(layerings(FiniteSetObj(n), depth)), depth ** n)
                    self.assertEqual(len(layerings(chain_poset(n), depth)), comb(n + depth - 1, n))

    def test_depth_zero(self):
        """Only the empty structure has a 0-layering"""
        self.assertEqual(len(layerings(Poset(0), 0)), 1)
        self.assertEqual(layerings(Poset(1), 0), [])

    def test_nonempty_counts_match_surjections(self):
        """Nonempty layerings of a set are ordered set partitions"""
        for n in range(5):
            for depth in range(5):
                with self.subTest(n=n, depth=depth):
                    expected = factorial(depth) * int(stirling(n, depth))
                    self.assertEqual(nonempty_layerings_count(FiniteSetObj(n), depth), expected)

    def test_two_layerings_are_down_closed_subsets(self):
        """A 2-layering is fixed by its bottom layer, which is down-closed"""
        for p in enumerate_posets(5):
            with self.subTest(poset=p.canonical_form().key):
                self.assertEqual(len(layerings(p, 2)), len(down_closed_subsets(p)))

    def test_nonempty_counts_match_layerings(self):
        """Counted nonempty layerings agree with filtering all layerings"""
        structures = [FiniteSetObj(4), discrete_poset(3), disjoint_union(chain_poset(2), discrete_poset(2))]
        for x in structures:
            for depth in range(5):
                with self.subTest(n=x.n, relations=len(x.relations), depth=depth):
                    nondegenerate = [l for l in layerings(x, depth) if l.is_nondegenerate()]
                    self.assertEqual(nonempty_layerings_count(x, depth), len(nondegenerate))

    def test_nonempty_counts_for_large_sets(self):
        """Sets beyond the enumerated sizes still count quickly"""
        self.assertEqual(nonempty_layerings_count(FiniteSetObj(20), 2), 2 ** 20 - 2)
        self.assertEqual(nonempty_layerings_count(FiniteSetObj(20), 21), 0)

    def test_nonempty_counts_for_chains(self):
        """Nonempty layerings of a chain are compositions"""
        self.assertEqual(nonempty_layerings_count(chain_poset(3), 2), 2)
        self.assertEqual(nonempty_layerings_count(chain_poset(3), 3), 1)
        self.assertEqual(nonempty_layerings_count(chain_poset(3), 4), 0)

    def test_monotonicity_enforced(self):
        """An element may not sit in a higher layer than something above it"""
        with self.assertRaises(StructureError):
            Layering(chain_poset(2), 2, (2, 1))

    def test_faces(self):
        """Outer faces delete layers, inner faces join them"""
        layered = Layering.from_sizes((1, 2))
        self.assertEqual(layered.canonical_form().key, "I2:1.2")
        self.assertEqual(layered.face(0).canonical_form().key, "S2")
        self.assertEqual(layered.face(2).canonical_form().key, "S1")
        self.assertEqual(layered.face(1).canonical_form().key, "S3")

    def test_degeneracy_inserts_empty_layer(self):
        """s_1 puts an empty layer above the first one, s_0 below it"""
        self.assertEqual(Layering.from_sizes((1, 2)).degeneracy(0).layer_sizes(), (0, 1, 2))
        layered = Layering.from_sizes((1, 2)).degeneracy(1)
        self.assertEqual(layered.layer_sizes(), (1, 0, 2))
        self.assertFalse(layered.is_nondegenerate())
        self.assertEqual(layered.canonical_form().key, "I3:1.0.2")
        self.assertEqual(layered.canonical_form().aut_order, 2)

    def test_face_out_of_range(self):
        """Faces beyond the depth are rejected"""
        with self.assertRaises(StructureError):
            Layering.from_sizes((1,)).face(3)

    def test_discrete_part_of_layer(self):
        """Only elements isolated in the whole poset count as discrete"""
        p = disjoint_union(chain_poset(2), discrete_poset(1))
        layered = Layering(p, 2, (1, 2, 2))
        self.assertEqual(discrete_part_of_layer(layered, 2), frozenset({2}))
        self.assertEqual(discrete_part_of_layer(layered, 1), frozenset())


class TestHelpers(unittest.TestCase):
    """Test the small combinatorial helpers"""

    def test_down_closed_subsets(self):
        """A chain has its initial segments, a discrete poset every subset"""
        self.assertEqual(down_closed_subsets(chain_poset(2)), [frozenset(), frozenset({0}), frozenset({0, 1})])
        self.assertEqual(len(down_closed_subsets(discrete_poset(3))), 8)

    def test_restrict_undoes_disjoint_union(self):
        """Restricting a disjoint union to either block gives that block back"""
        small = enumerate_posets(3)
        for a in small:
            for b in small:
                with self.subTest(a=a.canonical_form().key, b=b.canonical_form().key):
                    u = disjoint_union(a, b)
                    self.assertEqual(restrict(u, range(a.n)), a)
                    self.assertEqual(restrict(u, range(a.n, a.n + b.n)), b)
                    shifted = frozenset(x + a.n for x in isolated_points(b))
                    self.assertEqual(isolated_points(u), isolated_points(a) | shifted)

    def test_weak_compositions(self):
        """Weak compositions of n into k parts number C(n+k-1, k-1)"""
        self.assertEqual(len(list(weak_compositions(4, 3))), comb(6, 2))
        self.assertEqual(list(weak_compositions(0, 0)), [()])
        self.assertEqual(list(weak_compositions(1, 0)), [])


if __name__ == "__main__":
    unittest.main()
