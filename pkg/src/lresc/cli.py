"""Command-line front end: ``lresc build | verify | simulate``.

Exit status: 0 success, 1 verification failure, 2 usage error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bundle as bd
from . import classical as cl
from . import gates as gt
from . import gf2
from . import hgp as hg
from . import logicals as lg
from . import sim

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

__all__ = ["main", "build_parser", "cnot_pairs"]


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- build


def _recipe_from_args(args) -> dict:
    if args.recipe:
        try:
            return json.loads(Path(args.recipe).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read recipe: {exc}") from exc
    if not args.base:
        raise UsageError("give --recipe FILE or --base CODE")
    recipe = {"base": args.base, "c": args.c, "rebalance": args.rebalance, "decompose": args.decompose}
    if args.hgp:
        recipe["hgp"] = "self" if args.hgp == "self" else {"base": args.hgp, "c": args.c}
    if args.tanner_transform:
        recipe["tanner_transform"] = True
    if args.name:
        recipe["name"] = args.name
    return recipe


def _describe_code(code, witness_budget: int) -> tuple[list[str], dict]:
    if isinstance(code, cl.ClassicalCode):
        d = cl.min_distance(code)
        lr = len(code.long_range_edges)
        info = {"n": code.n, "k": code.k, "d": None if d == math.inf else d, "edges": len(code.edges), "long_range_edges": lr}
        return [f"[n, k, d] = [{code.n}, {code.k}, {info['d']}]", f"edges: {len(code.edges)} total, {lr} long-range"], info
    N, K, D = hg.css_parameters(code)
    lines = [f"N = {N}, K = {K}"]
    info: dict = {"N": N, "K": K, "D_formula": D}
    if K and code.logicals is not None:
        wx = lg.logical_weight_search(code, "X", budget=witness_budget).weight
        wz = lg.logical_weight_search(code, "Z", budget=witness_budget).weight
        info["D_upper"] = min(wx, wz)
        lower = D if D is not None else None
        lines.append(f"D: formula {D if D is not None else 'n/a'}, witness <= {info['D_upper']} (X {wx}, Z {wz})"
                     + (f", bounds [{lower}, {info['D_upper']}]" if lower is not None else ""))
    if code.has_coords and code.xcheck_coords is not None:
        census = hg.edge_census(code)
        info.update({"edges": census.total_edges, "long_range_edges": census.long_range_edges})
        lines.append(f"edges: {census.total_edges} total, {census.long_range_edges} long-range (threshold {census.threshold:g})")
    return lines, info


def cmd_build(args) -> int:
    recipe = _recipe_from_args(args)
    try:
        code = bd.build_from_recipe(recipe)
    except (bd.RecipeError, ValueError, hg.ProvenanceError) as exc:
        raise UsageError(f"invalid recipe: {exc}") from exc
    lines, info = _describe_code(code, args.witness_budget)
    digest = bd.write_bundle(args.out, code, recipe)
    for line in lines:
        print(line)
    print(f"bundle {args.out} sha256 {digest}")
    need = recipe.get("require_distance")
    if need is not None:
        got = info.get("D_formula", info.get("d"))
        if got is None or got < need:
            print(f"requested distance {need} not met (got {got})")
            return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------- verify


def cnot_pairs(AX: np.ndarray, AZ: np.ndarray) -> list[tuple[int, int]] | None:
    """Name a logical action as commuting CNOTs (1-indexed), or None."""
    K = AX.shape[0]
    pairs = [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(AX ^ np.eye(K, dtype=np.uint8)))]
    ax, az = gt.cnot_action(K, pairs)
    return pairs if np.array_equal(ax, AX) and np.array_equal(az, AZ) else None


def _check_orthogonality(code) -> tuple[bool, str]:
    if isinstance(code, cl.ClassicalCode):
        ok = not gf2.matmul(code.H, code.generator.T).any()
        return ok, "H G^T = 0" if ok else "H G^T != 0"
    bad = gf2.matmul(code.HZ, code.HX.T)
    n_bad = int(bad.sum())
    return n_bad == 0, "HZ HX^T = 0" if n_bad == 0 else f"{n_bad} anticommuting check pairs"


def _check_logicals(code) -> tuple[bool, str]:
    if isinstance(code, cl.ClassicalCode):
        ok = code.generator.shape[0] == code.k and gf2.rank(code.generator) == code.k
        return ok, f"generator rank {gf2.rank(code.generator)} vs k = {code.k}"
    if code.logicals is None:
        return False, "no logical basis stored"
    problems = [p for p in hg.validate(code) if "logical" in p]
    GX, GZ = code.logicals
    if not problems and not np.array_equal(gf2.matmul(GX, GZ.T), np.eye(code.K, dtype=np.uint8)):
        problems.append("pairing matrix is not the identity")
    return not problems, "; ".join(problems[:3]) or f"K = {code.K}, pairing = identity"


def _check_tunneling(code) -> tuple[bool, str]:
    if isinstance(code, cl.ClassicalCode) or code.kind != "hgp" or code.parents is None:
        return True, "n/a (not an HGP code)"
    c1, c2 = code.parents
    if c1.concat is None or c2.concat is None:
        return True, "n/a (parents not concatenated)"
    ran = failed = 0
    for sector, axis, across in (("Z", "horizontal", c2), ("X", "vertical", c1)):
        for idx in range(across.concat.outer.n):
            rep = lg.tunneling_check(code, sector, axis, idx)
            ran += 1
            failed += not rep.ok
    return failed == 0, f"{ran} line checks, {failed} failed"


def _check_distance(code, w: int) -> tuple[bool, str]:
    if isinstance(code, cl.ClassicalCode):
        d = cl.min_distance(code)
        return d > w, f"d = {d}"
    try:
        for sector in ("X", "Z"):
            lg.distance_lower_bound_exhaustive(code, sector, w)
    except AssertionError as exc:
        return False, str(exc)
    return True, f"no logical of weight <= {w} in either sector"


def _check_gadget(code, path: str) -> tuple[bool, str]:
    spec = json.loads(Path(path).read_text())
    if isinstance(code, cl.ClassicalCode) or code.parents is None:
        return False, "gadgets need an HGP bundle with parent codes"
    axis = spec.get("axis", "columns")
    parent = code.parents[1] if axis == "columns" else code.parents[0]
    outer = parent.concat.outer if parent.concat is not None else parent
    c = parent.concat.c if parent.concat is not None else 1
    n = outer.n
    if "swap" in spec:
        i, j = spec["swap"]
        U = gt.permutation_matrix(n, i - 1, j - 1)
        gadget = gt.verify_codespace_transform(outer, U)
    elif "permutation" in spec:
        U = np.eye(n, dtype=np.uint8)[np.argsort(spec["permutation"])]
        gadget = gt.verify_codespace_transform(outer, U)
    elif "logical_cnot" in spec:
        gadget = gt.logical_cnot_gadget(outer, *spec["logical_cnot"])
    else:
        raise UsageError("gadget file needs 'swap', 'permutation' or 'logical_cnot'")
    lifted = gt.lift_to_concat(gadget, c, parent.concat)
    cg = gt.lift_to_hgp(lifted, code, axis, spec.get("target_sector"))
    AX, AZ = gt.extract_logical_action(cg, code)
    pairs = cnot_pairs(AX, AZ)
    preserved = cg.transcript["HX_preserved"] and cg.transcript["HZ_preserved"]
    name = " * ".join(f"CNOT{a}->{b}" for a, b in pairs) if pairs else f"A_X = {AX.tolist()}"
    if pairs == []:
        name = "identity"
    return preserved, f"{len(cg.physical_circuit)} physical gates; logical action {name}"


def cmd_verify(args) -> int:
    try:
        code, _, hash_ok = bd.read_bundle(args.bundle, verify_hash=False)
    except bd.BundleError as exc:
        print(f"bundle: FAIL ({exc})")
        return EXIT_FAIL
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    known = {"orthogonality", "logicals", "tunneling", "distance"}
    if set(checks) - known:
        raise UsageError(f"unknown checks {sorted(set(checks) - known)}")
    results = [("hash", hash_ok, "payload matches sha256" if hash_ok else "payload does not match sha256")]
    for name in checks:
        if name == "orthogonality":
            results.append((name, *_check_orthogonality(code)))
        elif name == "logicals":
            results.append((name, *_check_logicals(code)))
        elif name == "tunneling":
            results.append((name, *_check_tunneling(code)))
        elif name == "distance":
            results.append((f"distance<={args.distance_max}", *_check_distance(code, args.distance_max)))
    if args.gadget:
        try:
            results.append(("gadget", *_check_gadget(code, args.gadget)))
        except gt.GadgetRejected as exc:
            results.append(("gadget", False, f"rejected: {exc}"))
    for name, ok, detail in results:
        print(f"{name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAIL


# ---------------------------------------------------------------- simulate


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_simulate(args) -> int:
    config: dict = {}
    if args.config:
        config = json.loads(Path(args.config).read_text())
    if args.noise:
        config["noise"] = args.noise
    if args.p_grid:
        config["p_grid"] = _float_list(args.p_grid)
    for key in ("trials", "cycles", "seed", "degree_mode"):
        if getattr(args, key) is not None:
            config[key] = getattr(args, key)
    if args.decoder:
        config.setdefault("decoder", {})["variant"] = args.decoder
    windows = _int_list(args.window) if args.window else [int(config.get("decoder", {}).get("window", config.get("window", 1)))]
    if "p_grid" not in config:
        raise UsageError("a p grid is required (--p-grid or config file)")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    for path in args.bundle:
        try:
            code, _, hash_ok = bd.read_bundle(path)
        except bd.BundleError as exc:
            print(f"{path}: {exc}")
            return EXIT_FAIL
        for w in windows:
            cfg = json.loads(json.dumps(config))
            cfg.setdefault("decoder", {})["window"] = w
            try:
                exp = sim.experiment_from_config(code, cfg, code_ref=Path(path).stem)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"invalid experiment: {exc}") from exc
            report = sim.run(exp, workers=args.threads)
            print(f"{exp.code_name} w={w}: " + sim.report_summary(report))
            reports.append(report)
    csv_text = "".join(r.to_csv(header=i == 0) for i, r in enumerate(reports))
    (out_dir / "simulate.csv").write_text(csv_text)
    (out_dir / "simulate.json").write_text(json.dumps([r.to_dict() for r in reports], indent=1, sort_keys=True))
    print(f"wrote {out_dir / 'simulate.csv'} ({len(reports)} blocks)")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lresc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a code and write a bundle")
    b.add_argument("--recipe", help="JSON recipe file")
    b.add_argument("--base", help="base code, e.g. 'hadamard(2)' or 'rep(5)'")
    b.add_argument("--c", type=int, default=1, help="repetition length of each segment")
    b.add_argument("--rebalance", action="store_true")
    b.add_argument("--decompose", action="store_true")
    b.add_argument("--hgp", help="'self' or a second base code")
    b.add_argument("--tanner-transform", action="store_true")
    b.add_argument("--name", default="")
    b.add_argument("--witness-budget", type=int, default=64)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run verification checks on a bundle")
    v.add_argument("--bundle", required=True)
    v.add_argument("--checks", default="orthogonality,logicals,tunneling")
    v.add_argument("--distance-max", type=int, default=3)
    v.add_argument("--gadget", help="JSON gadget file")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="Monte Carlo logical failure rates")
    s.add_argument("--bundle", action="append", required=True)
    s.add_argument("--config", help="JSON experiment config")
    s.add_argument("--noise", choices=["code_capacity", "weighted_phenomenological"])
    s.add_argument("--p-grid")
    s.add_argument("--trials", type=int)
    s.add_argument("--cycles", type=int)
    s.add_argument("--window", help="window size or comma-separated list")
    s.add_argument("--seed", type=int)
    s.add_argument("--decoder", choices=["bp_osd", "mwpm"])
    s.add_argument("--degree-mode", dest="degree_mode", choices=["total", "per_sector"])
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except cl.BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
