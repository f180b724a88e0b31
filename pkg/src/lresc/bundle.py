"""Code recipes and self-checking JSON bundles.

A recipe is a small JSON object::

    {"base": "hadamard(2)", "c": 2, "rebalance": false, "decompose": false,
     "hgp": "self", "tanner_transform": false}

``base`` names a classical code (``rep(c)``, ``hadamard(k)``, ``code_523``,
``code_624``, ``random_ldpc(n,m,w,seed)``) or gives ``{"H": [[...]]}``; ``hgp``
is ``null`` (classical bundle), ``"self"`` or a nested recipe for the second
factor.  A bundle stores the serialized code next to the SHA-256 of its
canonical JSON payload.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path
from typing import Any

import numpy as np

from . import classical as cl
from . import hgp as hg

FORMAT = "lresc-bundle/1"

__all__ = [
    "RecipeError",
    "BundleError",
    "parse_base",
    "build_classical",
    "build_from_recipe",
    "code_to_dict",
    "code_from_dict",
    "canonical_json",
    "content_hash",
    "code_fingerprint",
    "write_bundle",
    "read_bundle",
]


class RecipeError(ValueError):
    """The recipe does not describe a constructible code."""


class BundleError(ValueError):
    """The bundle is malformed or its hash does not match its payload."""


_BASE = re.compile(r"^\s*([a-z_0-9]+)\s*(?:\(([^)]*)\))?\s*$")


def parse_base(base) -> cl.ClassicalCode:
    if isinstance(base, dict):
        if "H" not in base:
            raise RecipeError("explicit base needs an 'H' matrix")
        return cl.from_parity_checks(np.array(base["H"], dtype=np.uint8), base.get("G"), base.get("name", ""))
    match = _BASE.match(str(base))
    if not match:
        raise RecipeError(f"cannot parse base code {base!r}")
    name, args = match.group(1), match.group(2)
    try:
        nums = [int(a) for a in args.split(",")] if args else []
    except ValueError as exc:
        raise RecipeError(f"bad arguments in {base!r}") from exc
    makers = {
        "rep": (cl.repetition, 1),
        "repetition": (cl.repetition, 1),
        "hadamard": (cl.hadamard_family, 1),
        "simplex": (cl.hadamard_family, 1),
        "code_523": (cl.code_523, 0),
        "code_624": (cl.code_624, 0),
        "random_ldpc": (cl.random_ldpc, 4),
    }
    if name not in makers:
        raise RecipeError(f"unknown base code {name!r}")
    fn, arity = makers[name]
    if len(nums) != arity:
        raise RecipeError(f"{name} takes {arity} integer argument(s)")
    try:
        return fn(*nums)
    except ValueError as exc:
        raise RecipeError(str(exc)) from exc


def build_classical(recipe: dict) -> cl.ClassicalCode:
    code = parse_base(recipe.get("base"))
    if recipe.get("decompose"):
        code = cl.decompose_checks(code, int(recipe.get("max_check_weight", 3)))
    c = int(recipe.get("c", 1))
    if c < 1:
        raise RecipeError("c must be >= 1")
    spec = cl.ConcatSpec(code, c)
    if recipe.get("rebalance"):
        spec = cl.rebalance_attachments(spec)
    code = cl.concatenate(spec)
    if "threshold" in recipe:
        code = cl.with_threshold(code, float(recipe["threshold"]))
    return code


def build_from_recipe(recipe: dict):
    """ClassicalCode (no ``hgp`` stage) or CssCode described by the recipe."""
    if not isinstance(recipe, dict) or "base" not in recipe:
        raise RecipeError("recipe must be an object with a 'base' entry")
    first = build_classical(recipe)
    stage = recipe.get("hgp")
    if stage is None:
        if recipe.get("tanner_transform"):
            raise RecipeError("tanner_transform needs an hgp stage")
        return first
    second = first if stage == "self" else build_classical(stage)
    code = hg.hgp(first, second, name=recipe.get("name", ""))
    if recipe.get("tanner_transform"):
        code = hg.quantum_tanner_transform(code)
    return code


# ---------------------------------------------------------------- serialization


def _array(a) -> list | None:
    return None if a is None else np.asarray(a).tolist()


def code_to_dict(code) -> dict[str, Any]:
    if isinstance(code, cl.ClassicalCode):
        return {"type": "classical", "code": code.to_dict()}
    meta = {k: v for k, v in code.meta.items() if k != "K" and isinstance(v, (bool, int, float, str))}
    return {
        "type": "css",
        "name": code.name,
        "kind": code.kind,
        "n_qubits": code.n_qubits,
        "HX": cl.to_alist(code.HX),
        "HZ": cl.to_alist(code.HZ),
        "qubit_coords": _array(code.qubit_coords),
        "xcheck_coords": _array(code.xcheck_coords),
        "zcheck_coords": _array(code.zcheck_coords),
        "sublattice": _array(code.sublattice),
        "logicals": None if code.logicals is None else [_array(code.logicals[0]), _array(code.logicals[1])],
        "parents": None if code.parents is None else [p.to_dict() for p in code.parents],
        "meta": meta,
    }


def _matrix(rows, n: int) -> np.ndarray:
    return np.array(rows, dtype=np.uint8).reshape(-1, n)


def code_from_dict(d: dict[str, Any]):
    if d.get("type") == "classical":
        return cl.ClassicalCode.from_dict(d["code"])
    if d.get("type") != "css":
        raise BundleError(f"unknown code type {d.get('type')!r}")
    n = int(d["n_qubits"])
    HX, HZ = cl.from_alist(d["HX"]), cl.from_alist(d["HZ"])
    coords = lambda key: None if d.get(key) is None else np.array(d[key], dtype=float).reshape(-1, 2)  # noqa: E731
    logicals = None
    if d.get("logicals") is not None:
        logicals = (_matrix(d["logicals"][0], n), _matrix(d["logicals"][1], n))
    parents = None
    if d.get("parents") is not None:
        parents = tuple(cl.ClassicalCode.from_dict(p) for p in d["parents"])
    meta = dict(d.get("meta", {}))
    meta.pop("K", None)  # recomputed from the matrices, never trusted
    return hg.CssCode(
        HX.reshape(-1, n),
        HZ.reshape(-1, n),
        qubit_coords=coords("qubit_coords"),
        xcheck_coords=coords("xcheck_coords"),
        zcheck_coords=coords("zcheck_coords"),
        sublattice=None if d.get("sublattice") is None else np.array(d["sublattice"], dtype=np.uint8),
        logicals=logicals,
        parents=parents,
        kind=d.get("kind", "custom"),
        name=d.get("name", ""),
        meta=meta,
    )


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def content_hash(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


def code_fingerprint(code) -> str:
    """Hash of the check matrices alone (stable across metadata changes)."""
    h = hashlib.sha256()
    mats = [code.H] if isinstance(code, cl.ClassicalCode) else [code.HX, code.HZ]
    for M in mats:
        M = np.ascontiguousarray(M, dtype=np.uint8)
        h.update(np.array(M.shape, dtype=np.int64).tobytes())
        h.update(np.packbits(M, axis=-1).tobytes())
    return h.hexdigest()


def write_bundle(path, code, recipe: dict | None = None) -> str:
    payload = {"code": code_to_dict(code), "recipe": recipe}
    digest = content_hash(payload)
    Path(path).write_text(json.dumps({"format": FORMAT, "sha256": digest, "payload": payload}, sort_keys=True, indent=1))
    return digest


def read_bundle(path, verify_hash: bool = True):
    """(code, recipe, hash_ok).  Raises BundleError on a mismatch when ``verify_hash``."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleError(f"cannot read bundle: {exc}") from exc
    if doc.get("format") != FORMAT or "payload" not in doc:
        raise BundleError("not a code bundle")
    ok = content_hash(doc["payload"]) == doc.get("sha256")
    if verify_hash and not ok:
        raise BundleError("bundle hash does not match its payload")
    try:
        code = code_from_dict(doc["payload"]["code"])
    except (KeyError, ValueError) as exc:
        raise BundleError(f"malformed code payload: {exc}") from exc
    return code, doc["payload"].get("recipe"), ok
