"""Property checks shared by the acceptance tests and the ``verify`` subcommand.

Each check returns a :class:`Check` holding a pass flag, the measured
quantities and the wall time. The ``scale`` argument shrinks the random
instance counts for quick runs; ``scale=1`` is the full suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import shapes
from .curvature import mean_curvature_vector, minimal_solve, voronoi_area
from .errors import NotConverged
from .idt import (
    extract_tessellation,
    flip_to_delaunay,
    harmonic_index,
)
from .laplace import assemble, check_harmonic_hull, solve_dirichlet
from .oracle import (
    QuadConfig,
    delta_energy_sum,
    incircle,
    orient2d,
    planar_delaunay,
    planar_harmonic_index,
    quad_energies,
    rippa_difference,
)
from .surface import from_embedding

WEIGHT_TOL = 1e-12


@dataclass
class Check:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name} ({self.seconds:.2f} s)"

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "seconds": self.seconds, "details": self.details}


def _timed(name, fn, *args, **kwargs):
    t0 = time.perf_counter()
    passed, details = fn(*args, **kwargs)
    return Check(name, bool(passed), details, time.perf_counter() - t0)


def _count(n, scale):
    return max(1, int(round(n * scale)))


# --------------------------------------------------------------------------


def _cube():
    t0 = time.perf_counter()
    mesh = shapes.cube()
    s = from_embedding(mesh)
    log = flip_to_delaunay(s)
    w = s.cotan_weights()
    pairs = s.edge_pairs()
    d = np.linalg.norm(mesh.positions[pairs[:, 0]] - mesh.positions[pairs[:, 1]], axis=1)
    diag = np.isclose(d, math.sqrt(2))
    cells = extract_tessellation(s)
    elapsed = time.perf_counter() - t0
    diag_err = float(np.abs(w[diag]).max())
    edge_err = float(np.abs(w[~diag] - 1.0).max())
    details = {
        "flips": len(log),
        "diagonals": int(diag.sum()),
        "max_diagonal_weight": diag_err,
        "max_edge_weight_error": edge_err,
        "cell_sizes": cells.sizes(),
        "seconds": elapsed,
    }
    ok = (len(log) == 0 and diag.sum() == 6 and diag_err <= WEIGHT_TOL and edge_err <= WEIGHT_TOL
          and sorted(cells.sizes()) == [4] * 6 and elapsed < 0.1)
    return ok, details


def check_cube():
    return _timed("1 cube: 0 flips, diagonal weights 0, edge weights 1, 6 quad cells", _cube)


def _kite():
    s = from_embedding(shapes.kite())
    ac = next(e for e in range(s.n_edges) if set(s.endpoints(e)) == {0, 2})
    w_before = float(s.cotan_weights()[ac])
    h_before = harmonic_index(s)
    log = flip_to_delaunay(s)
    w_after = float(s.cotan_weights()[ac])
    h_after = harmonic_index(s)
    new_len = log[0].new_length if log else float("nan")
    details = {
        "flips": len(log),
        "new_length": new_len,
        "weight_before": w_before,
        "weight_after": w_after,
        "new_endpoints": sorted(log[0].new_endpoints) if log else None,
        "harmonic_index": [h_before, h_after],
    }
    ok = (len(log) == 1 and sorted(log[0].new_endpoints) == [1, 3]
          and abs(new_len - math.sqrt(5)) <= 1e-12
          and abs(w_before + 0.25) <= 1e-12 and abs(w_after - 0.25) <= 1e-12
          and h_after < h_before)
    return ok, details


def check_kite():
    return _timed("2 kite: one flip to sqrt(5), weight -0.25 -> +0.25, harmonic index drops", _kite)


def _oracle(n_instances, seed):
    rng = np.random.default_rng(seed)
    mismatches, slow, worst, ties = [], 0, 0.0, 0
    for k in range(n_instances):
        n = int(rng.integers(4, 41))
        pts = shapes.random_points(rng, n)
        t0 = time.perf_counter()
        s = from_embedding(shapes.EmbeddedMesh(pts, shapes.sweep_triangulation(pts)))
        flip_to_delaunay(s)
        edges = {tuple(sorted(map(int, p))) for p in s.edge_pairs()}
        dt = time.perf_counter() - t0
        ref = planar_delaunay(pts)
        ties += ref.has_ties
        if not ref.accepts(edges):
            mismatches.append(k)
        worst = max(worst, dt)
        slow += dt >= 1.0
    details = {"instances": n_instances, "mismatches": mismatches, "instances_with_ties": ties,
               "slowest_seconds": worst}
    return not mismatches and slow == 0, details


def check_oracle(scale=1.0, seed=3):
    return _timed("3 oracle: flipped edge sets equal the incircle Delaunay edge sets", _oracle,
                  _count(100, scale), seed)


def _random_surface(rng):
    """A non-Delaunay surface: planar, cone-metric or convex polyhedral."""
    kind = int(rng.integers(3))
    if kind == 0:
        return from_embedding(shapes.random_planar_mesh(rng, int(rng.integers(5, 41))))
    if kind == 1:
        while True:
            s = from_embedding(shapes.random_planar_mesh(rng, int(rng.integers(8, 41))))
            flip_to_delaunay(s)
            try:
                s = shapes.perturb_lengths(s, rng, 0.1)
            except ValueError:
                continue
            shapes.random_flips(s, rng, s.n_edges // 3)
            return s
    s = from_embedding(shapes.random_convex_polytope(rng, int(rng.integers(6, 41))))
    flip_to_delaunay(s)
    shapes.random_flips(s, rng, s.n_edges // 3)
    return s


def _monotone(n_flips, seed):
    rng = np.random.default_rng(seed)
    flips = increases = surfaces = refl = 0
    over_budget = 0
    while flips < n_flips:
        s = _random_surface(rng)
        surfaces += 1
        prev = [harmonic_index(s)]

        def watch(s_, rec):
            nonlocal increases
            h = harmonic_index(s_)
            if not h < prev[0]:
                increases += 1
            prev[0] = h

        try:
            log = flip_to_delaunay(s, on_flip=watch)
        except Exception:  # noqa: BLE001 - any failure counts against the check
            over_budget += 1
            continue
        flips += len(log)
        refl += len(flip_to_delaunay(s)) > 0
    details = {"flips": flips, "surfaces": surfaces, "non_decreasing_flips": increases,
               "budget_failures": over_budget, "second_runs_with_flips": refl}
    return increases == 0 and over_budget == 0 and refl == 0, details


def check_monotone(scale=1.0, seed=4):
    return _timed("4 monotone: harmonic index drops on every flip, termination, idempotence",
                  _monotone, _count(1000, scale), seed)


def random_convex_quad(rng):
    """Four points in counterclockwise convex position."""
    while True:
        ang = np.sort(rng.uniform(0.0, 2 * math.pi, 4))
        rad = rng.uniform(0.5, 1.5, 4)
        P = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        try:
            QuadConfig.from_points(P, np.zeros(4))
        except Exception:  # noqa: BLE001 - resample non-convex quads
            continue
        if orient2d(P[0], P[1], P[2]) < 0:
            P = P[::-1].copy()
        return P


def _rippa(n_quads, seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    sign_fail = 0
    delaunay_24 = 0
    for _ in range(n_quads):
        P = random_convex_quad(rng)
        f = rng.normal(size=4)
        q = QuadConfig.from_points(P, f)
        e1, e2 = quad_energies(P, f)
        r = rippa_difference(q)
        err = abs(r - (e1 - e2)) / (1.0 + max(abs(e1), abs(e2)))
        worst = max(worst, err)
        if incircle(P[0], P[1], P[3], P[2]) <= 0:
            delaunay_24 += 1
            if r < -1e-9 * (1.0 + max(abs(e1), abs(e2))):
                sign_fail += 1
    details = {"quads": n_quads, "max_scaled_error": worst, "delaunay_24": delaunay_24,
               "sign_failures": sign_fail}
    return worst <= 1e-9 and sign_fail == 0, details


def check_rippa(scale=1.0, seed=5):
    return _timed("5 rippa: closed form equals brute-force energy difference, sign law", _rippa,
                  _count(1000, scale), seed)


def _musin(n_instances, seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        pts = shapes.random_points(rng, int(rng.integers(4, 31)))
        tris = shapes.sweep_triangulation(pts)
        lhs = delta_energy_sum(pts, tris)
        rhs = planar_harmonic_index(pts, tris) / 8.0
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst <= 1e-9, {"instances": n_instances, "max_relative_error": worst}


def check_musin(scale=1.0, seed=6):
    return _timed("6 musin: hat-function energies sum to harmonic index / 8", _musin,
                  _count(100, scale), seed)


def _linear(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    cases = 0
    for nx, ny, flip in ((4, 4, False), (7, 5, True), (10, 10, False), (3, 12, True)):
        mesh = shapes.grid(nx, ny, spacing=float(rng.uniform(0.2, 2.0)), flip_diagonal=flip)
        s = from_embedding(mesh)
        flip_to_delaunay(s)
        w = assemble(s)
        bnd = np.flatnonzero(s.boundary_vertex_mask())
        a, b, c = rng.normal(size=3)
        exact = a * mesh.positions[:, 0] + b * mesh.positions[:, 1] + c
        f = solve_dirichlet(w, bnd, exact[bnd])
        worst = max(worst, float(np.abs(f - exact).max()))
        violations += len(check_harmonic_hull(w, f))
        g = solve_dirichlet(w, bnd, rng.normal(size=len(bnd)))
        violations += len(check_harmonic_hull(w, g))
        cases += 2
    for _ in range(4):
        s = from_embedding(shapes.random_planar_mesh(rng, 30))
        flip_to_delaunay(s)
        w = assemble(s)
        bnd = np.flatnonzero(s.boundary_vertex_mask())
        g = solve_dirichlet(w, bnd, rng.normal(size=len(bnd)))
        violations += len(check_harmonic_hull(w, g))
        cases += 1
    details = {"max_linear_error": worst, "hull_violations": violations, "fields": cases}
    return worst <= 1e-9 and violations == 0, details


def check_linear(seed=7):
    return _timed("7 linear precision and maximum principle", _linear, seed)


def _weight_sign(n_instances, seed):
    rng = np.random.default_rng(seed)
    no_negative, negative_after = [], []
    for k in range(n_instances):
        s = _random_surface(rng)
        if not (s.cotan_weights()[~s.boundary_edge_mask()] < -WEIGHT_TOL).any():
            flip_to_delaunay(s)
            shapes.random_flips(s, rng, max(1, s.n_edges // 4))
        interior = ~s.boundary_edge_mask()
        before = s.cotan_weights()[interior]
        if not (before < 0).any():
            no_negative.append(k)
        flip_to_delaunay(s)
        after = s.cotan_weights()[interior]
        if (after < -WEIGHT_TOL).any():
            negative_after.append(k)
    details = {"instances": n_instances, "without_negative_weight": no_negative,
               "negative_after_flipping": negative_after}
    return not no_negative and not negative_after, details


def check_weight_sign(scale=1.0, seed=8):
    return _timed("8 weight sign: negative weight before flipping, none after", _weight_sign,
                  _count(100, scale), seed)


def _curvature(seed):
    rng = np.random.default_rng(seed)
    g = shapes.grid(6, 5, spacing=0.7)
    H = mean_curvature_vector(g)
    interior = np.ones(g.n_vertices, dtype=bool)
    interior[g.boundary_vertices()] = False
    flat = float(np.abs(H[interior]).max())
    cube = shapes.cube()
    corner = mean_curvature_vector(cube)[0]
    corner_err = float(np.abs(corner - np.array([-1.0, -1.0, -1.0])).max())
    worst_area, min_area = 0.0, math.inf
    meshes = [g, cube] + [shapes.random_convex_polytope(rng, int(n)) for n in rng.integers(8, 60, 5)]
    for mesh in meshes:
        s = from_embedding(mesh)
        flip_to_delaunay(s)
        A = voronoi_area(s)
        min_area = min(min_area, float(A.min()))
        worst_area = max(worst_area, abs(math.fsum(A) - s.total_area()) / s.total_area())
    details = {"flat_interior_H": flat, "cube_corner_H": corner.tolist(), "corner_error": corner_err,
               "min_voronoi_area": min_area, "max_area_sum_error": worst_area}
    ok = flat <= 1e-12 and corner_err <= 1e-12 and min_area > 0 and worst_area <= 1e-9
    return ok, details


def check_curvature(seed=9):
    return _timed("9 curvature: flat H = 0, cube corner H = (-1,-1,-1), Voronoi areas", _curvature, seed)


def _minimal(max_iter):
    t0 = time.perf_counter()
    mesh, fixed = shapes.catenoid_rings()
    free = mesh.n_vertices - len(fixed)
    try:
        result = minimal_solve(mesh, fixed, max_iter=max_iter)
    except NotConverged as exc:
        result = exc.result
    elapsed = time.perf_counter() - t0
    energies = [r["energy"] for r in result.log]
    monotone = all(b <= a * (1 + 1e-12) for a, b in zip(energies, energies[1:]))
    s = from_embedding(result.mesh)
    flip_to_delaunay(s)
    w = assemble(s)
    interior = np.setdiff1d(np.arange(mesh.n_vertices), fixed)
    hull = check_harmonic_hull(w, result.mesh.positions, interior)
    details = {
        "free_vertices": free,
        "iterations": result.iterations,
        "converged": result.converged,
        "final_max_disp": result.log[-1]["max_disp"],
        "tolerance": 1e-8 * mesh.bbox_diagonal(),
        "energy_non_increasing": monotone,
        "hull_violations": len(hull),
        "residual": result.residual,
        "seconds": elapsed,
    }
    ok = result.converged and result.iterations <= 200 and monotone and not hull and elapsed < 30
    return ok, details


def check_minimal(max_iter=200):
    return _timed("10 minimal surface between two 12-gons", _minimal, max_iter)


def run_all(scale=1.0):
    """All ten checks in order."""
    return [
        check_cube(),
        check_kite(),
        check_oracle(scale),
        check_monotone(scale),
        check_rippa(scale),
        check_musin(scale),
        check_linear(),
        check_weight_sign(scale),
        check_curvature(),
        check_minimal(),
    ]
