"""
Input Loading for the Command Line

Structures arrive as JSON, either in a file or inline on the command
line. This module turns them into the package's objects and reports
malformed input as InputError, keeping structural problems (cycles,
colour mismatches) as the StructureError the constructors raise.

Accepted shapes:
- poset: {"n": 3, "covers": [[0, 1], [1, 2]]}, covers meaning "strictly below"
- set: {"n": 4}
- forest: {"parent": [null, 0, 0]}
- signature: {"colors": [...], "ops": [{"name": ..., "out": ..., "in": [...]}]}
- ptree: {"op": "m", "children": ["edge", {"edge": "a"}]}; a bare "edge"
  leaf takes the colour its parent expects, and a forest is a JSON list
"""

import json
import logging
import os
from typing import Any, Mapping, Optional

from app.errors import InputError
from app.forests import RootedForest
from app.posets import FiniteSetObj, Poset
from app.ptrees import PForest, PTree, Signature

logger = logging.getLogger(__name__)


def read_json(source: str) -> Any:
    """
    Parse inline JSON, or the contents of the file source names.

    Args:
        source (str): A path, or text starting with "{" or "["

    Raises:
        InputError: If the file is missing or the text is not JSON
    """
    text = source.strip()
    if not text.startswith(("{", "[", '"')):
        if not os.path.exists(source):
            raise InputError(f"no such input file: {source}")
        with open(source, "r") as f:
            text = f.read()
        logger.debug("read %d bytes from %s", len(text), source)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from None


def _object(data: Any, what: str) -> Mapping[str, Any]:
    if not isinstance(data, dict):
        raise InputError(f"{what} must be a JSON object")
    return data


def _count(data: Mapping[str, Any], what: str) -> int:
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise InputError(f"{what} needs a non-negative integer 'n'")
    return n


def poset_from_json(data: Any) -> Poset:
    """Poset from {"n", "covers"}; the transitive closure of covers is taken."""
    data = _object(data, "poset")
    n = _count(data, "poset")
    covers = data.get("covers", [])
    if not isinstance(covers, list):
        raise InputError("'covers' must be a list of pairs")
    for pos, pair in enumerate(covers):
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, int) for v in pair)):
            raise InputError(f"covers[{pos}] must be a pair of integers")
    return Poset.from_covers(n, covers)


def set_from_json(data: Any) -> FiniteSetObj:
    data = _object(data, "set")
    return FiniteSetObj(_count(data, "set"))


def forest_from_json(data: Any) -> RootedForest:
    """Rooted forest from {"parent": [...]}, null marking roots."""
    data = _object(data, "forest")
    parent = data.get("parent")
    if not isinstance(parent, list):
        raise InputError("forest needs a 'parent' list")
    for pos, p in enumerate(parent):
        if p is not None and (not isinstance(p, int) or isinstance(p, bool)):
            raise InputError(f"parent[{pos}] must be an integer or null")
    return RootedForest(tuple(parent))


def signature_from_json(data: Any) -> Signature:
    data = _object(data, "signature")
    if not isinstance(data.get("colors"), list) or not isinstance(data.get("ops", []), list):
        raise InputError("signature needs a 'colors' list and an 'ops' list")
    return Signature.from_json(data)


def load_signature(source: str, named: Optional[Mapping[str, Any]] = None) -> Signature:
    """
    A signature by configured name, or from a path / inline JSON.

    Args:
        source (str): Name under "signatures" in config.yaml, path or JSON text
        named (Mapping, optional): The configured signatures
    """
    if named and source in named:
        return signature_from_json(named[source])
    return signature_from_json(read_json(source))


def _ptree(data: Any, signature: Signature, color: Optional[str], path: str) -> PTree:
    if data == "edge":
        if color is None:
            raise InputError(f"a bare 'edge' needs a parent to fix its colour ({path})")
        return PTree(color)
    if not isinstance(data, dict):
        raise InputError(f"tree nodes must be objects or \"edge\" ({path})")
    if "edge" in data:
        return PTree(data["edge"])
    if "op" not in data:
        raise InputError(f"tree node needs 'op' or 'edge' ({path})")
    op = signature.op(data["op"])
    children = data.get("children", [])
    if not isinstance(children, list):
        raise InputError(f"'children' must be a list ({path})")
    slots = list(op.inputs) + [None] * max(0, len(children) - op.arity)
    return PTree(op.out, op.name, tuple(
        _ptree(child, signature, slots[pos], f"{path}.children[{pos}]") for pos, child in enumerate(children)
    ))


def ptree_from_json(data: Any, signature: Signature) -> PTree:
    """
    One validated P-tree.

    Raises:
        InputError: On a malformed shape
        StructureError: On colour or arity mismatches, with the node path
    """
    tree = _ptree(data, signature, None, "root")
    tree.validate(signature)
    return tree


def pforest_from_json(data: Any, signature: Signature) -> PForest:
    """A P-forest from one tree or a list of trees."""
    if isinstance(data, list):
        trees = []
        for pos, entry in enumerate(data):
            tree = _ptree(entry, signature, None, f"[{pos}]")
            tree.validate(signature, f"[{pos}]")
            trees.append(tree)
        return PForest(tuple(trees))
    return PForest.of(ptree_from_json(data, signature))


def load_structure(instance: str, source: str, signature: Optional[Signature] = None) -> Any:
    """
    Read the structure a CLI verb works on.

    Args:
        instance (str): posets, sets, forests or ptrees
        source (str): Path or inline JSON
        signature (Signature, optional): Required for ptrees

    Raises:
        InputError: On unreadable input or an unknown instance
    """
    data = read_json(source)
    if instance == "posets":
        return poset_from_json(data)
    if instance == "sets":
        return set_from_json(data)
    if instance == "forests":
        return forest_from_json(data)
    if instance == "ptrees":
        if signature is None:
            raise InputError("ptrees input needs --signature")
        return pforest_from_json(data, signature)
    raise InputError(f"unknown instance {instance!r}")
