"""
Decomposition-Space Möbius Toolkit - Main Entry Point

This script is the command line over the app package:
1. Loads configuration from config/.env and config/config.yaml
2. Reads a structure (poset, set, forest or P-tree) as JSON when a verb needs one
3. Computes Möbius values, coproducts and nondegenerate counts, or
4. Runs a verification suite and exits 1 if any entry misses its expectation
5. Prints the result as JSON, CSV or a pretty table on stdout

Usage:
    python main.py mu posets '{"n": 2, "covers": [[0, 1]]}'
    python main.py coproduct sets '{"n": 3}'
    python main.py enumerate forests --max-size 5 --format pretty
    python main.py verify rota --max-size 6
    python main.py verify segal --instance sets --mutate drop-layering
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import yaml
from dotenv import load_dotenv

from app.bicomodule import (
    DROPPED_CLASS,
    DROPPED_STABLE_CLASS,
    BoxProduct,
    check_abacus_axioms,
    check_bicomodule_configuration,
    check_fibrations,
    check_mobius_bicomodule,
    check_modified_bisimplicial,
    rota_report,
    rota_table,
)
from app.coalgebra import coproduct, mobius_by_inversion, mobius_closed_form, phi_vector, verify_coalgebra_laws, verify_mobius
from app.errors import BoundError, DecompMobiusError, InputError
from app.groupoids import format_rational
from app.loaders import load_signature, load_structure
from app.posets import POSET_ENUMERATION_LIMIT
from app.render import FORMATS, Table, render, report_table
from app.reports import Report, combine
from app.simplicial import (
    DecalageInstance,
    LayeredInstance,
    check_decomposition_space,
    check_segal,
    complete_report,
    culf_report,
    drop_layering,
    forests_to_posets,
    instance_C,
    instance_forests,
    instance_I,
    instance_ptrees,
    posets_to_sets,
)

logger = logging.getLogger("main")

# Load environment variables from config/.env file
load_dotenv("config/.env")

INSTANCES = ("posets", "sets", "forests", "ptrees")
TARGETS = (
    "coalgebra", "mobius", "decomposition-space", "segal", "complete", "culf",
    "abacus", "bisimplicial", "fibrations", "bicomodule", "mobius-bicomodule", "rota",
)
# mutation -> targets it applies to
MUTATIONS = {
    "drop-layering": ("decomposition-space", "segal"),
    "duplicate-unit": ("complete",),
    "drop-cut": ("coalgebra",),
    "ordinal-sum": ("abacus", "bisimplicial", "mobius-bicomodule"),
    "drop-class": ("fibrations", "bicomodule"),
    "unmodified-top": ("bisimplicial", "mobius-bicomodule"),
    "layer-discrete": ("mobius-bicomodule",),
    "wrong-sign": ("rota", "mobius"),
    "forget-culf": ("culf",),
}
# targets on the sets-and-posets bicomodule; they ignore --instance
BOX_TARGETS = ("abacus", "bisimplicial", "fibrations", "bicomodule", "mobius-bicomodule")
# Largest degree the CLI accepts
DEGREE_LIMIT = 3
# Segal holds for layered sets only; posets, forests and P-trees fail it
SEGAL_INSTANCES = ("sets",)

DEFAULTS = {
    "max_size": 4,
    "max_degree": 3,
    "box_degree": 2,
    "max_input_size": 12,
    "threads": 0,
    "format": "json",
    "log_level": "WARNING",
    "signatures": {},
}


def load_config():
    """
    Load configuration from environment variables and config.yaml

    The YAML file gives defaults, environment variables override it, and
    command-line flags override both.

    Returns:
        dict: max_size, max_degree, box_degree, max_input_size, threads,
              format, log_level and the named signatures from config.yaml
    """
    settings = dict(DEFAULTS)

    config_path = os.getenv("DECOMP_MOBIUS_CONFIG", "config/config.yaml")
    if os.path.exists(config_path):
        with open(config_path, "r") as f:
            y = yaml.safe_load(f) or {}
            for key in ("max_size", "max_degree", "box_degree", "max_input_size", "threads", "format", "log_level"):
                if y.get(key) is not None:
                    settings[key] = y[key]
            settings["signatures"] = dict(y.get("signatures") or {})

    env = {
        "max_size": os.getenv("DECOMP_MOBIUS_MAX_SIZE"),
        "max_degree": os.getenv("DECOMP_MOBIUS_MAX_DEGREE"),
        "box_degree": os.getenv("DECOMP_MOBIUS_BOX_DEGREE"),
        "max_input_size": os.getenv("DECOMP_MOBIUS_MAX_INPUT_SIZE"),
        "threads": os.getenv("DECOMP_MOBIUS_THREADS"),
        "format": os.getenv("DECOMP_MOBIUS_FORMAT"),
        "log_level": os.getenv("DECOMP_MOBIUS_LOG_LEVEL"),
    }
    for key, value in env.items():
        if value:
            settings[key] = value

    for key in ("max_size", "max_degree", "box_degree", "max_input_size", "threads"):
        try:
            settings[key] = int(settings[key])
        except (TypeError, ValueError):
            raise InputError(f"configuration value {key} must be an integer, got {settings[key]!r}")
    return settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Incidence coalgebras and Möbius functions of decomposition spaces.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, help="Output format (default from config)")
    common.add_argument("--signature", help="P-tree signature: configured name, path or inline JSON")
    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--max-size", type=int, help="Largest structure size enumerated")
    bounds.add_argument("--max-degree", type=int, help="Largest simplicial degree used")
    bounds.add_argument("--threads", type=int, help="Worker threads for corpus loops")

    verbs = parser.add_subparsers(dest="verb", required=True)
    for verb, text in (("mu", "Möbius value of one structure"), ("coproduct", "Coproduct of one structure")):
        p = verbs.add_parser(verb, parents=[common], help=text)
        p.add_argument("instance", choices=INSTANCES)
        p.add_argument("input", help="Path to a JSON file, or inline JSON")
    p = verbs.add_parser("phi", parents=[common], help="Nondegenerate counts Φ_0..Φ_k of one structure")
    p.add_argument("instance", choices=INSTANCES)
    p.add_argument("input", help="Path to a JSON file, or inline JSON")
    p.add_argument("--max-degree", type=int, help="Largest k")
    p = verbs.add_parser("enumerate", parents=[common, bounds], help="Isomorphism classes up to a size")
    p.add_argument("instance", choices=INSTANCES)
    p = verbs.add_parser("verify", parents=[common, bounds], help="Run a verification suite")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("--instance", choices=INSTANCES, default="posets")
    p.add_argument("--mutate", choices=sorted(MUTATIONS), help="Negative control")
    return parser


def _setting(cmd: argparse.Namespace, cfg: Dict[str, Any], key: str) -> Any:
    value = getattr(cmd, key, None)
    return cfg[key] if value is None else value


def _check_bounds(instance: str, size: Optional[int], degree: Optional[int], input_limit: Optional[int] = None) -> None:
    if size is not None:
        if size < 0:
            raise BoundError(f"--max-size must be non-negative, got {size}")
        if instance == "posets" and size > POSET_ENUMERATION_LIMIT:
            raise BoundError(f"posets are enumerated up to {POSET_ENUMERATION_LIMIT} elements, got {size}")
        if input_limit is not None and size > input_limit:
            raise BoundError(f"{instance} are limited to max_input_size={input_limit} elements, got {size}")
    if degree is not None and not 0 <= degree <= DEGREE_LIMIT:
        raise BoundError(f"--max-degree must lie in 0..{DEGREE_LIMIT}, got {degree}")


def make_instance(name: str, signature_source: Optional[str], cfg: Dict[str, Any]) -> LayeredInstance:
    if name == "posets":
        return instance_C()
    if name == "sets":
        return instance_I()
    if name == "forests":
        return instance_forests()
    if signature_source is None:
        raise InputError("the ptrees instance needs --signature")
    return instance_ptrees(load_signature(signature_source, cfg["signatures"]))


def _structure(cmd: argparse.Namespace, X: LayeredInstance, cfg: Dict[str, Any]) -> Any:
    signature = getattr(X, "signature", None)
    structure = load_structure(cmd.instance, cmd.input, signature)
    _check_bounds(cmd.instance, structure.n, None, cfg["max_input_size"])
    return structure


def _mu(cmd: argparse.Namespace, cfg: Dict[str, Any]) -> Table:
    X = make_instance(cmd.instance, cmd.signature, cfg)
    a = X.lift(_structure(cmd, X, cfg))
    row = {
        "class": X.canon(a).key,
        "mu": format_rational(mobius_by_inversion(X, a)),
        "closed_form": format_rational(mobius_closed_form(X, a)),
    }
    return Table(row, ["class", "mu", "closed_form"], [row])


def _coproduct(cmd: argparse.Namespace, cfg: Dict[str, Any]) -> Table:
    X = make_instance(cmd.instance, cmd.signature, cfg)
    rows = coproduct(X, X.lift(_structure(cmd, X, cfg))).to_list()
    return Table(rows, ["left", "right", "coeff"], rows)


def _phi(cmd: argparse.Namespace, cfg: Dict[str, Any]) -> Table:
    X = make_instance(cmd.instance, cmd.signature, cfg)
    a = X.lift(_structure(cmd, X, cfg))
    degree = _setting(cmd, cfg, "max_degree")
    if degree < 0:
        raise BoundError(f"--max-degree must be non-negative, got {degree}")
    values = [format_rational(v) for v in phi_vector(X, a, degree)]
    rows = [{"degree": k, "phi": v} for k, v in enumerate(values)]
    return Table({"class": X.canon(a).key, "phi": values}, ["degree", "phi"], rows)


def _enumerate(cmd: argparse.Namespace, cfg: Dict[str, Any]) -> Table:
    size = _setting(cmd, cfg, "max_size")
    _check_bounds(cmd.instance, size, None, cfg["max_input_size"])
    X = make_instance(cmd.instance, cmd.signature, cfg)
    classes = sorted(X.groupoid(1, size), key=lambda c: (c.size, c.key))
    counts: Dict[str, int] = {str(n): 0 for n in range(size + 1)}
    rows: List[Dict[str, Any]] = []
    for c in classes:
        counts[str(c.size)] += 1
        rows.append({"size": c.size, "class": c.key, "aut_order": c.aut_order})
    document = {
        "instance": X.name,
        "max_size": size,
        "counts": counts,
        "classes": [{"class": r["class"], "size": r["size"], "aut_order": r["aut_order"]} for r in rows],
    }
    rows += [{"size": n, "class": "*", "count": count} for n, count in counts.items()]
    return Table(document, ["size", "class", "aut_order", "count"], rows)


def _segal_target(X: LayeredInstance, name: str, size: int, degree: int) -> Report:
    """Segal for X itself (expected only for sets) and for both decalages (always)."""
    reports = [check_segal(X, size, degree, expected=name in SEGAL_INSTANCES)]
    for side in ("lower", "upper"):
        dec = check_segal(DecalageInstance(X, side), size, max(degree - 1, 1))
        dec.check = f"segal-dec-{side}"
        reports.append(dec)
    return combine(X.name, "segal", reports)


def _culf_target(X: LayeredInstance, name: str, size: int, degree: int, forget: bool) -> Report:
    maps = [DecalageInstance(X, side).decalage_map() for side in ("lower", "upper")]
    if name == "forests":
        maps.append(forests_to_posets(X, instance_C()))
    if forget:
        maps.append(posets_to_sets(instance_C(), instance_I()))
    reports = []
    for g in maps:
        r = culf_report(g, size, degree)
        r.check = g.name
        reports.append(r)
    return combine(X.name, "culf", reports)


def _box(mutation: Optional[str], target: str) -> BoxProduct:
    bidegree, key = DROPPED_STABLE_CLASS if target == "bicomodule" else DROPPED_CLASS
    return BoxProduct(
        ordinal_sum=mutation == "ordinal-sum",
        unmodified_top=mutation == "unmodified-top",
        layer_discrete=mutation == "layer-discrete",
        dropped={bidegree: [key]} if mutation == "drop-class" else None,
    )


def _pruned(X: LayeredInstance, mutation: Optional[str], size: int):
    """With drop-layering, remove the first nondegenerate two-element class of degree 2."""
    if mutation != "drop-layering":
        return X
    keys = sorted(k for k, x in X.representatives(2, size).items() if x.size == 2 and x.is_nondegenerate())
    if not keys:
        raise BoundError("drop-layering needs --max-size of at least 2")
    return drop_layering(X, 2, keys[0])


def _verify(cmd: argparse.Namespace, cfg: Dict[str, Any]) -> Table:
    target, name, mutation = cmd.target, cmd.instance, cmd.mutate
    size = _setting(cmd, cfg, "max_size")
    degree = _setting(cmd, cfg, "max_degree")
    threads = _setting(cmd, cfg, "threads")
    if mutation and target not in MUTATIONS[mutation]:
        raise InputError(f"mutation {mutation!r} applies to {', '.join(MUTATIONS[mutation])}, not {target!r}")
    if name == "ptrees" and target not in ("coalgebra", "mobius"):
        raise InputError("P-trees support the coalgebra and mobius targets only (their faces leave the corpus)")
    if target in BOX_TARGETS:
        degree = cmd.max_degree if cmd.max_degree is not None else cfg["box_degree"]
    _check_bounds("posets" if target == "rota" or target in BOX_TARGETS else name, size, degree, cfg["max_input_size"])
    logger.info("verify %s on %s, size <= %d, degree <= %d%s", target, name, size, degree,
                f", mutation {mutation}" if mutation else "")

    if target == "rota":
        results = rota_table(size, threads, wrong_sign=mutation == "wrong-sign")
        report = rota_report(results)
        rows = [{
            "class": r.poset,
            "lhs": format_rational(r.lhs),
            "rhs": format_rational(r.rhs),
            "closed_form": format_rational(r.closed_form),
            "equal": r.equal,
        } for r in results]
        return Table({**report.to_dict(), "rows": rows}, ["class", "lhs", "rhs", "closed_form", "equal"], rows)

    if target in BOX_TARGETS:
        box = _box(mutation, target)
        check = {
            "abacus": check_abacus_axioms,
            "bisimplicial": check_modified_bisimplicial,
            "fibrations": check_fibrations,
            "bicomodule": check_bicomodule_configuration,
            "mobius-bicomodule": check_mobius_bicomodule,
        }[target]
        return report_table(check(box, size, degree, degree))

    X = make_instance(name, cmd.signature, cfg)
    if target == "coalgebra":
        report = verify_coalgebra_laws(X, size, drop_cut=mutation == "drop-cut")
    elif target == "mobius":
        report = verify_mobius(X, size, threads, wrong_sign=mutation == "wrong-sign")
    elif target == "decomposition-space":
        report = check_decomposition_space(_pruned(X, mutation, size), size, degree)
    elif target == "segal":
        report = _segal_target(_pruned(X, mutation, size), name, size, degree)
    elif target == "complete":
        report = complete_report(X, size, duplicate_unit=mutation == "duplicate-unit")
    else:
        report = _culf_target(X, name, size, degree, forget=mutation == "forget-culf")
    return report_table(report)


def run(cmd: argparse.Namespace, cfg: Optional[Dict[str, Any]] = None) -> int:
    """
    Execute one parsed command and print its result.

    Args:
        cmd (argparse.Namespace): Parsed arguments
        cfg (dict, optional): Settings from load_config()

    Returns:
        int: 0 on success, 1 when a verification entry misses its
             expectation, 2 on bad input or bounds
    """
    cfg = cfg or load_config()
    try:
        fmt = _setting(cmd, cfg, "format")
        handler = {"mu": _mu, "coproduct": _coproduct, "phi": _phi, "enumerate": _enumerate, "verify": _verify}[cmd.verb]
        table = handler(cmd, cfg)
        sys.stdout.write(render(table, fmt))
    except DecompMobiusError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if cmd.verb == "verify":
        ok = table.document.get("ok", True) if isinstance(table.document, dict) else True
        return 0 if ok else 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    cmd = parser.parse_args(argv)
    try:
        cfg = load_config()
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, str(cfg["log_level"]).upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    return run(cmd, cfg)


if __name__ == "__main__":
    sys.exit(main())
