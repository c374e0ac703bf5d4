"""Command-line entry point ``wsi``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import dijkstra

from . import __version__
from .comparison import CurvatureBound, closed_form_profile, profile_to_json, solve_profile
from .constants import sobolev_constants
from .errors import WSIError
from .experiments import SCENARIOS, run_all
from .functionals import isoperimetric_sides, sobolev_sides
from .geometry import ImmersedMesh, build_primitive, parse_ambient, read_off


def _dump(payload: str, out: str | None) -> None:
    if out in (None, "-"):
        print(payload)
    else:
        Path(out).write_text(payload + "\n")


def _load_mesh(spec: str) -> ImmersedMesh:
    """An OFF path, or ``kind[:key=val,...]`` naming a built-in primitive."""
    if Path(spec).is_file():
        return read_off(spec)
    kind, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, _, val = item.partition("=")
        params[key.strip()] = float(val) if "." in val or "e" in val.lower() else int(val)
    return build_primitive(kind, **params)


def boundary_bump(mesh: ImmersedMesh) -> np.ndarray:
    """Edge-graph distance to the boundary, scaled to max 1 (constant 1 on closed meshes)."""
    if mesh.is_closed:
        return np.ones(mesh.n_vertices)
    w = mesh.adjacency.copy().tocoo()
    w.data = np.linalg.norm(mesh.vertices[w.row] - mesh.vertices[w.col], axis=1)
    d = dijkstra(w.tocsr(), directed=False, indices=mesh.boundary_vertices, min_only=True)
    d[~np.isfinite(d)] = 0.0
    top = d.max()
    return d / top if top > 0 else d


def _default_profile(ambient, curvature: str | None, mesh: ImmersedMesh):
    if curvature is not None:
        K = CurvatureBound.parse(curvature)
    elif ambient.is_sphere:
        K = CurvatureBound.constant(ambient.b**2)
    else:
        K = CurvatureBound.zero()
    if K.kind == "zero":
        span = np.ptp(mesh.vertices, axis=0).max()
        return closed_form_profile(K, max(10.0, 10.0 * float(span)))
    return closed_form_profile(K, math.pi / (2 * K.b))


def _cmd_constants(args) -> int:
    c = sobolev_constants(args.m, args.kappa, args.ratio)
    out = {"m": c.m, "omega_m": c.omega_m, "kappa": c.kappa, "S": c.S, "kappa_star": c.kappa_star, "S0": c.S0}
    if args.json:
        print(json.dumps(out, indent=2, sort_keys=True))
    else:
        for k, v in out.items():
            print(f"{k:>10} = {v!r}")
    return 0


def _cmd_profile(args) -> int:
    K = CurvatureBound.parse(args.curvature)
    prof = solve_profile(K, args.r_max, args.step)
    if args.json:
        _dump(profile_to_json(prof), args.json)
    else:
        print(f"r0 = {prof.r0!r}\ns0 = {prof.s0!r}\ncapped = {prof.is_capped}\nr0/s0 = {prof.ratio!r}")
    return 0


def _cmd_verify(args) -> int:
    mesh = _load_mesh(args.mesh)
    if mesh.dim == 3 and args.ambient.lower().startswith("sphere"):
        mesh = mesh.embed(4)
    amb = parse_ambient(args.ambient, args.density)
    prof = _default_profile(amb, args.curvature, mesh)
    if args.kind == "sobolev":
        rep = sobolev_sides(mesh, amb, boundary_bump(mesh), args.p, prof, args.kappa)
    else:
        rep = isoperimetric_sides(mesh, amb, prof, args.kappa)
    d = rep.to_dict()
    d["holds"] = rep.holds
    if args.json:
        _dump(json.dumps(d, indent=2, sort_keys=True), args.json)
    else:
        print(f"{rep.kind}: lhs = {rep.lhs:.6g}  rhs = {rep.rhs:.6g}  ratio = {rep.ratio:.6g}")
        print(f"admissible = {rep.hypotheses.admissible}  (J = {rep.hypotheses.j_bar:.6g}, s0 = {rep.hypotheses.s0:.6g})")
        for w in rep.warnings:
            print(f"warning: {w}")
    return 0 if rep.holds else 1


def _cmd_scenario(args) -> int:
    fn = SCENARIOS[args.name]
    kwargs = {}
    for key in ("subdiv", "L", "n", "b", "shape", "extent", "centers"):
        val = getattr(args, key)
        if val is not None:
            kwargs[key] = val
    allowed = set(fn.__wrapped__.__code__.co_varnames[: fn.__wrapped__.__code__.co_argcount])
    bad = sorted(set(kwargs) - allowed)
    if bad:
        print(f"error: scenario {args.name} does not take {', '.join(bad)}", file=sys.stderr)
        return 2
    rep = fn(**kwargs)
    if args.json:
        _dump(rep.to_json(), args.json)
    if args.csv:
        rows = ["name,value,reference,tol,relation,pass"]
        rows += [f"{c.name},{c.value!r},{c.reference!r},{c.tol!r},{c.relation},{c.passed}" for c in rep.checks]
        _dump("\n".join(rows), args.csv)
    if not (args.json or args.csv):
        for c in rep.checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value:.6g} ({c.relation} {c.reference:.6g}, tol {c.tol:.3g})")
        for w in rep.warnings:
            print(f"warning: {w}")
        for n in rep.notes:
            print(f"note: {n}")
    return 0 if rep.passed else 1


def _cmd_run(args) -> int:
    suite = run_all(Path(args.config))
    if args.json:
        _dump(suite.to_json(), args.json)
    else:
        for rep in suite.reports:
            print(f"{'PASS' if rep.passed else 'FAIL'}  {rep.scenario}  ({rep.runtime_ms:.0f} ms)")
            for c in rep.checks:
                if not c.passed:
                    print(f"      failed {c.name}: {c.value:.6g} vs {c.reference:.6g}")
    return suite.exit_code


def _kappa(text: str):
    return text if text == "auto" else float(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wsi", description="Weighted Sobolev and isoperimetric inequality toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="Sobolev constants for dimension m")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--kappa", type=_kappa, default="auto")
    p.add_argument("--ratio", type=float, default=1.0, help="r0/s0 of the comparison profile")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_constants)

    p = sub.add_parser("profile", help="solve the comparison profile")
    p.add_argument("--curvature", default="zero", help="zero | const:B2")
    p.add_argument("--r-max", type=float, default=10.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--json", metavar="OUT", nargs="?", const="-")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("verify", help="evaluate both sides of an inequality on a mesh")
    p.add_argument("kind", choices=["sobolev", "isoper"])
    p.add_argument("--mesh", required=True, help="OFF file or primitive, e.g. disc:rho=1,n_r=32")
    p.add_argument("--ambient", default="euclid3", help="euclid3 | sphere3:b")
    p.add_argument("--density", default="zero", choices=["zero", "gaussian2", "gaussian4"])
    p.add_argument("--curvature", default=None, help="override the curvature bound")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--kappa", type=_kappa, default="auto")
    p.add_argument("--json", metavar="OUT", nargs="?", const="-")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("scenario", help="run one scenario")
    p.add_argument("name", choices=sorted(SCENARIOS))
    p.add_argument("--subdiv", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--b", type=float)
    p.add_argument("--shape", choices=["plane", "cylinder"])
    p.add_argument("--extent", type=float)
    p.add_argument("--centers", type=int)
    p.add_argument("--json", metavar="OUT", nargs="?", const="-")
    p.add_argument("--csv", metavar="OUT", nargs="?", const="-")
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("run", help="run the scenarios listed in a config file")
    p.add_argument("config")
    p.add_argument("--json", metavar="OUT", nargs="?", const="-")
    p.set_defaults(func=_cmd_run)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (WSIError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
