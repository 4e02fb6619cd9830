"""Command line interface: ``idtlab <subcommand> mesh.off [options]``."""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .curvature import curvature_field, flow, minimal_solve
from .errors import IDTError, NotConverged, ValidationError
from .idt import (
    DELAUNAY_EPS,
    extract_tessellation,
    flip_to_delaunay,
    harmonic_index,
    intrinsic_edges,
    min_angle_slack,
)
from .laplace import SOLVER_TOL, assemble, dirichlet_energy, solve_dirichlet, solve_neumann
from .surface import from_embedding

logger = logging.getLogger("idtlab")


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def _non_negative(text):
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("mesh", help="input mesh (.off or .obj)")
    common.add_argument("--format", choices=("off", "obj"), help="override format detection")
    common.add_argument("--eps-w", type=_positive(float), default=DELAUNAY_EPS,
                        help="flip an edge when its cotan sum is below -eps-w (default %(default)g)")
    common.add_argument("--max-flips", type=_positive(int), default=None,
                        help="flip budget (default 100 * number of edges)")
    common.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    common.add_argument("--use-input-triangulation", action="store_true",
                        help="skip flipping and use the mesh's own triangles (comparison mode)")

    parser = argparse.ArgumentParser(prog="idtlab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("delaunay", parents=[common], help="flip log and intrinsic edge list")
    sub.add_parser("weights", parents=[common], help="cotan edge weights")

    p = sub.add_parser("energy", parents=[common], help="Dirichlet energy of a vertex field")
    p.add_argument("--field", help="JSON list of vertex values; defaults to the vertex positions")

    p = sub.add_parser("solve", parents=[common], help="Dirichlet or Neumann problem")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--dirichlet", action="store_true")
    kind.add_argument("--neumann", action="store_true")
    p.add_argument("--boundary", required=True, help="JSON map {vertex: value}")
    p.add_argument("--tol", type=_positive(float), default=SOLVER_TOL)

    p = sub.add_parser("tessellation", parents=[common], help="Delaunay tessellation cells")
    p.add_argument("--merge-eps", type=_positive(float), default=None)

    sub.add_parser("curvature", parents=[common], help="mean curvature vector and density")

    p = sub.add_parser("minimal", parents=[common], help="minimal surface with fixed boundary")
    p.add_argument("--fixed", help="JSON list of extra fixed vertices (boundary is always fixed)")
    p.add_argument("--tol", type=_positive(float), default=None,
                   help="displacement tolerance (default 1e-8 * bounding box diagonal)")
    p.add_argument("--max-iter", type=_positive(int), default=200)
    p.add_argument("--log", help="write the iteration log JSON here")

    p = sub.add_parser("flow", parents=[common], help="explicit mean curvature flow")
    p.add_argument("--steps", type=_positive(int), required=True)
    p.add_argument("--dt", type=_non_negative, required=True)
    p.add_argument("--integrated", action="store_true", help="move by H instead of the density H / A")
    p.add_argument("--no-guard", action="store_true", help="allow steps above the stability bound")

    p = sub.add_parser("verify", help="run the built-in property checks")
    p.add_argument("--scale", type=_positive(float), default=0.1,
                   help="fraction of the full random instance counts (default %(default)g)")
    p.add_argument("--output", "-o", default=None)
    return parser


def _surface(args, mesh):
    s = from_embedding(mesh)
    log = []
    if not args.use_input_triangulation:
        log = flip_to_delaunay(s, eps=args.eps_w, max_flips=args.max_flips)
    return s, log


def _graph(args, mesh):
    s, log = _surface(args, mesh)
    return s, log, assemble(s, eps=args.eps_w, check=not args.use_input_triangulation)


def cmd_delaunay(args, mesh):
    s, log = _surface(args, mesh)
    return io.report("delaunay", {
        "flips": len(log),
        "harmonic_index": harmonic_index(s),
        "min_angle_slack": min_angle_slack(s),
        "flip_log": [r.to_dict() for r in log],
        "edges": intrinsic_edges(s),
    })


def cmd_weights(args, mesh):
    _, log, w = _graph(args, mesh)
    return io.report("weights", {"flips": len(log), "weights": w.to_json()})


def cmd_energy(args, mesh):
    _, _, w = _graph(args, mesh)
    f = mesh.positions if args.field is None else np.array(json.loads(Path(args.field).read_text()), dtype=float)
    if len(f) != mesh.n_vertices:
        raise ValidationError(f"field has {len(f)} values for {mesh.n_vertices} vertices")
    return io.report("energy", {"energy": dirichlet_energy(w, f)})


def cmd_solve(args, mesh):
    _, _, w = _graph(args, mesh)
    verts, vals = io.load_boundary_values(args.boundary)
    if len(verts) and (verts.min() < 0 or verts.max() >= mesh.n_vertices):
        raise ValidationError("boundary vertex index out of range")
    if args.dirichlet:
        f = solve_dirichlet(w, verts, vals, tol=args.tol)
    else:
        f = solve_neumann(w, verts, vals, tol=args.tol)
    return io.report("solve", {"problem": "dirichlet" if args.dirichlet else "neumann", "field": f})


def cmd_tessellation(args, mesh):
    s, _ = _surface(args, mesh)
    cells = extract_tessellation(s, merge_eps=args.merge_eps)
    return io.report("tessellation", {"n_cells": len(cells.cells), **cells.to_dict()})


def cmd_curvature(args, mesh):
    field_ = curvature_field(mesh, eps=args.eps_w)
    return io.report("curvature", field_.to_dict())


def cmd_minimal(args, mesh):
    fixed = mesh.boundary_vertices()
    if args.fixed:
        extra = np.array(json.loads(Path(args.fixed).read_text()), dtype=np.int64)
        fixed = np.union1d(fixed, extra)
    try:
        result = minimal_solve(mesh, fixed, tol=args.tol, max_iter=args.max_iter, eps=args.eps_w)
    except NotConverged as exc:
        _write_minimal(args, exc.result)
        raise
    return _write_minimal(args, result)


def _write_minimal(args, result):
    summary = io.report("minimal", {
        "converged": result.converged,
        "iterations": result.iterations,
        "residual": result.residual,
        "log": result.log,
    })
    if args.log:
        io.write_text(args.log, io.dumps(summary) + "\n")
    # with --output the mesh goes to the file and the summary to stdout
    if args.output:
        io.save_off(result.mesh, args.output)
        sys.stdout.write(io.dumps(summary) + "\n")
    else:
        sys.stdout.write(io.format_off(result.mesh))


def cmd_flow(args, mesh):
    meshes, flips = flow(mesh, args.dt, args.steps, integrated=args.integrated, guard=not args.no_guard,
                         eps=args.eps_w)
    files = []
    if args.output:
        stem = Path(args.output)
        for k, m in enumerate(meshes):
            path = stem.with_name(f"{stem.stem}_{k:04d}.off")
            io.save_off(m, path)
            files.append(str(path))
    return io.report("flow", {"steps": args.steps, "dt": args.dt, "flips": flips, "snapshots": files,
                              "area": [m.area() for m in meshes]})


def cmd_verify(args):
    from .verify import run_all

    checks = run_all(scale=args.scale)
    for c in checks:
        print(c.line(), file=sys.stderr)
    rep = io.report("verify", {"passed": all(c.passed for c in checks),
                               "checks": [c.to_dict() for c in checks]})
    return rep, all(c.passed for c in checks)


COMMANDS = {
    "delaunay": cmd_delaunay,
    "weights": cmd_weights,
    "energy": cmd_energy,
    "solve": cmd_solve,
    "tessellation": cmd_tessellation,
    "curvature": cmd_curvature,
    "minimal": cmd_minimal,
}


def _thread_limit():
    n = os.environ.get("IDTLAB_THREADS")
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(n))


def _emit(rep, output):
    text = io.dumps(rep) + "\n"
    if not io.write_text(output, text):
        sys.stdout.write(text)


def _error(exc, code):
    body = {"schema_version": io.SCHEMA_VERSION, "error": type(exc).__name__, "message": str(exc),
            "exit_code": code}
    for attr in ("line", "column"):
        if getattr(exc, attr, None) is not None:
            body[attr] = getattr(exc, attr)
    sys.stderr.write(json.dumps(body) + "\n")
    return code


def run_cli(argv=None):
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        with _thread_limit():
            if args.command == "verify":
                rep, ok = cmd_verify(args)
                _emit(rep, args.output)
                return 0 if ok else 3
            mesh = io.load_mesh(args.mesh, args.format)
            if args.command == "flow":
                # --output names the snapshot files, so the report goes to stdout
                sys.stdout.write(io.dumps(cmd_flow(args, mesh)) + "\n")
                return 0
            rep = COMMANDS[args.command](args, mesh)
            if rep is not None:
                _emit(rep, args.output)
            return 0
    except IDTError as exc:
        return _error(exc, exc.exit_code)
    except (OSError, ValueError) as exc:
        return _error(exc, 2)


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
