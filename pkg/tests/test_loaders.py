import json
import os
import tempfile
import unittest

from app.errors import InputError, StructureError
from app.forests import RootedForest
from app.loaders import (
    forest_from_json,
    load_signature,
    load_structure,
    poset_from_json,
    pforest_from_json,
    ptree_from_json,
    read_json,
    set_from_json,
)
from app.posets import chain_poset
from app.ptrees import PForest

MIXED = {
    "colors": ["a", "b"],
    "ops": [
        {"name": "f", "out": "a", "in": ["a", "b"]},
        {"name": "g", "out": "b", "in": ["a"]},
    ],
}


class TestReadJson(unittest.TestCase):
    """Test inline and file JSON input"""

    def test_inline(self):
        self.assertEqual(read_json('{"n": 2}'), {"n": 2})
        self.assertEqual(read_json("[1, 2]"), [1, 2])

    def test_file(self):
        """Paths are read from disk"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "poset.json")
            with open(path, "w") as f:
                json.dump({"n": 1}, f)
            self.assertEqual(read_json(path), {"n": 1})

    def test_missing_file(self):
        with self.assertRaises(InputError):
            read_json("does-not-exist.json")

    def test_malformed_reports_position(self):
        """The error message carries line and column"""
        with self.assertRaises(InputError) as ctx:
            read_json('{"n": 2,\n "covers": [}')
        self.assertIn("line 2", str(ctx.exception))


class TestStructures(unittest.TestCase):
    """Test conversion of JSON documents into structures"""

    def test_poset(self):
        p = poset_from_json({"n": 3, "covers": [[0, 1], [1, 2]]})
        self.assertEqual(p.canonical_form(), chain_poset(3).canonical_form())

    def test_poset_shape_errors(self):
        """Malformed shapes are InputError; cycles stay StructureError"""
        for data in ({"covers": []}, {"n": -1}, {"n": 2, "covers": [[0]]}, [1, 2], {"n": True}):
            with self.subTest(data=data):
                with self.assertRaises(InputError):
                    poset_from_json(data)
        with self.assertRaises(StructureError):
            poset_from_json({"n": 2, "covers": [[0, 1], [1, 0]]})

    def test_set(self):
        self.assertEqual(set_from_json({"n": 4}).n, 4)

    def test_forest(self):
        self.assertEqual(forest_from_json({"parent": [None, 0, 0]}), RootedForest((None, 0, 0)))
        with self.assertRaises(InputError):
            forest_from_json({"parent": ["x"]})
        with self.assertRaises(StructureError):
            forest_from_json({"parent": [1, 0]})


class TestPTrees(unittest.TestCase):
    """Test P-tree input"""

    def setUp(self):
        self.sig = load_signature("mixed", {"mixed": MIXED})

    def test_bare_edges_take_parent_colour(self):
        """A bare "edge" leaf gets the colour its slot expects"""
        tree = ptree_from_json({"op": "f", "children": ["edge", "edge"]}, self.sig)
        self.assertEqual([c.color for c in tree.children], ["a", "b"])

    def test_explicit_edge(self):
        tree = ptree_from_json({"edge": "b"}, self.sig)
        self.assertTrue(tree.is_edge)

    def test_root_edge_needs_colour(self):
        with self.assertRaises(InputError):
            ptree_from_json("edge", self.sig)

    def test_wrong_colour_is_structure_error(self):
        """Colour clashes name the offending node path"""
        with self.assertRaises(StructureError) as ctx:
            ptree_from_json({"op": "f", "children": ["edge", {"edge": "a"}]}, self.sig)
        self.assertEqual(ctx.exception.position, "root.children[1]")

    def test_forest_list(self):
        """A JSON list is a forest"""
        forest = pforest_from_json([{"edge": "a"}, {"op": "g", "children": ["edge"]}], self.sig)
        self.assertIsInstance(forest, PForest)
        self.assertEqual(len(forest.trees), 2)
        self.assertEqual(forest.n, 1)

    def test_inline_signature(self):
        sig = load_signature(json.dumps(MIXED))
        self.assertEqual(sig.colors, ("a", "b"))


class TestLoadStructure(unittest.TestCase):
    """Test the dispatch used by the command line"""

    def test_dispatch(self):
        self.assertEqual(load_structure("sets", '{"n": 2}').n, 2)
        self.assertEqual(load_structure("forests", '{"parent": [null]}').n, 1)

    def test_ptrees_need_signature(self):
        with self.assertRaises(InputError):
            load_structure("ptrees", '{"edge": "a"}')

    def test_unknown_instance(self):
        with self.assertRaises(InputError):
            load_structure("graphs", '{"n": 1}')


if __name__ == "__main__":
    unittest.main()
