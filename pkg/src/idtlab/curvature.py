"""Discrete mean curvature, Voronoi areas, minimal surfaces and mean curvature flow.

Every operator here is built on the intrinsic Delaunay triangulation of the
mesh's carrier, not on the mesh's own triangles.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCollapse, DegenerateFace, NotConverged, NotDelaunay, ValidationError, ZeroVoronoiArea
from .idt import DELAUNAY_EPS, flip_to_delaunay, min_angle_slack
from .laplace import apply_laplace, assemble, dirichlet_energy, solve_dirichlet
from .surface import EmbeddedMesh, from_embedding

logger = logging.getLogger(__name__)


def _idt(mesh, eps=DELAUNAY_EPS):
    try:
        s = from_embedding(mesh)
    except DegenerateFace as exc:
        raise DegenerateCollapse(str(exc)) from exc
    log = flip_to_delaunay(s, eps=eps)
    return s, log


def mean_curvature_vector(mesh, eps=DELAUNAY_EPS, use_input_triangulation=False):
    """Integrated mean curvature vector H = L x at every vertex, shape (n, 3).

    For a convex body it points outward.
    """
    if use_input_triangulation:
        w = assemble(from_embedding(mesh), check=False)
    else:
        s, _ = _idt(mesh, eps)
        w = assemble(s, eps=eps)
    return apply_laplace(w, mesh.positions)


def voronoi_area(s, eps=DELAUNAY_EPS):
    """Area of the intrinsic circumcentric dual cell of every vertex.

    Each edge contributes l^2 (cot a + cot b) / 8 to both endpoints. Cells
    of boundary vertices can come out negative when a boundary triangle is
    obtuse opposite its boundary edge; interior cells are positive.
    """
    cots = s.opposite_cots()
    interior = ~s.boundary_edge_mask()
    w = s.cotan_weights()
    if (interior & (w < -eps)).any():
        raise NotDelaunay("voronoi_area needs a Delaunay triangulation")
    L = s.length[s.edge]
    contrib = L * L * cots / 8.0
    nxt = np.arange(s.n_halfedges)
    nxt = nxt - nxt % 3 + (nxt + 1) % 3
    area = np.zeros(s.n_vertices)
    np.add.at(area, s.origin, contrib)
    np.add.at(area, s.origin[nxt], contrib)
    return area


@dataclass
class CurvatureField:
    H: np.ndarray
    density: np.ndarray
    area: np.ndarray

    def to_dict(self):
        return {
            "H": self.H.tolist(),
            "density": self.density.tolist(),
            "voronoi_area": self.area.tolist(),
        }


def curvature_field(mesh, eps=DELAUNAY_EPS, area_tol=1e-14):
    """Mean curvature vector, Voronoi areas and density in one pass."""
    s, _ = _idt(mesh, eps)
    w = assemble(s, eps=eps)
    H = apply_laplace(w, mesh.positions)
    A = voronoi_area(s, eps)
    small = A <= area_tol * max(s.total_area(), np.finfo(float).tiny)
    if small.any():
        raise ZeroVoronoiArea(f"vertex {int(np.flatnonzero(small)[0])} has Voronoi area {A[small][0]:.3g}")
    return CurvatureField(H, H / A[:, None], A)


def mean_curvature_density(mesh, eps=DELAUNAY_EPS):
    """H / A(cell) per vertex, in units of 1 / length."""
    return curvature_field(mesh, eps).density


@dataclass
class MinimalityReport:
    wide: bool
    narrow: bool | None
    max_interior_H: float
    flips: int
    min_angle_slack: float

    @property
    def minimal(self):
        return self.wide if self.narrow is None else self.narrow

    def __bool__(self):
        return bool(self.minimal)

    def to_dict(self):
        return {
            "minimal": bool(self.minimal),
            "wide": self.wide,
            "narrow": self.narrow,
            "max_interior_H": self.max_interior_H,
            "flips": self.flips,
            "min_angle_slack": self.min_angle_slack,
        }


def is_minimal(mesh, eps=1e-8, narrow=False, angle_eps=1e-9):
    """Test whether the mean curvature vanishes at all interior vertices.

    With ``narrow`` the mesh's own triangulation must in addition already be
    intrinsically Delaunay, with every interior edge strictly so
    (opposite angles summing to less than ``pi - angle_eps``).
    """
    raw = from_embedding(mesh)
    slack = min_angle_slack(raw)
    s = raw.copy()
    log = flip_to_delaunay(s)
    H = apply_laplace(assemble(s), mesh.positions)
    interior = ~s.boundary_vertex_mask()
    hmax = float(np.linalg.norm(H[interior], axis=1).max()) if interior.any() else 0.0
    wide = bool(hmax <= eps)
    strict = None
    if narrow:
        strict = bool(wide and not log and slack > angle_eps)
    return MinimalityReport(wide, strict, hmax, len(log), float(slack))


@dataclass
class MinimalResult:
    mesh: EmbeddedMesh
    log: list = field(default_factory=list)
    converged: bool = True
    residual: float = 0.0

    @property
    def iterations(self):
        return len(self.log)


def minimal_solve(mesh, fixed, targets=None, tol=None, max_iter=200, eps=DELAUNAY_EPS):
    """Discrete minimal surface spanning fixed vertices.

    Each iteration computes the intrinsic Delaunay triangulation of the current
    carrier, then replaces the free vertex positions by the harmonic
    extension of the fixed positions (the Dirichlet energy minimiser for
    those weights). The mesh keeps its combinatorics throughout.

    Parameters
    ----------
    mesh : EmbeddedMesh
    fixed : array_like of int
        Constrained vertices; must include every boundary vertex.
    targets : array_like, shape (len(fixed), 3), optional
        Positions for the fixed vertices; defaults to their current positions.
    tol : float, optional
        Stop once no vertex moves more than this. Defaults to
        ``1e-8 * bbox diagonal``.
    max_iter : int

    Returns
    -------
    MinimalResult
        ``log`` holds one dict per iteration with keys ``iter``, ``energy``,
        ``max_disp`` and ``flips``; ``energy`` is the minimised Dirichlet
        energy of that iteration. ``residual`` is the largest interior
        ``|H|`` of the final mesh.

    Raises
    ------
    NotConverged
        With the partial :class:`MinimalResult` attached as ``result``.
    """
    fixed = np.unique(np.asarray(fixed, dtype=np.int64).reshape(-1))
    if len(fixed) == 0:
        raise ValidationError("minimal_solve needs fixed vertices")
    missing = np.setdiff1d(mesh.boundary_vertices(), fixed)
    if len(missing):
        raise ValidationError(f"boundary vertices {missing.tolist()[:5]} are not fixed")
    X = mesh.positions.copy()
    if targets is not None:
        X[fixed] = np.asarray(targets, dtype=float).reshape(len(fixed), 3)
    free = np.setdiff1d(np.arange(mesh.n_vertices), fixed)
    if len(free) == 0:
        return MinimalResult(mesh.with_positions(X), [], True, 0.0)
    if tol is None:
        tol = 1e-8 * mesh.with_positions(X).bbox_diagonal()

    log = []
    current = mesh.with_positions(X)
    for it in range(1, max_iter + 1):
        s, flips = _idt(current, eps)
        w = assemble(s, eps=eps)
        Y = solve_dirichlet(w, fixed, X[fixed])
        disp = float(np.linalg.norm(Y - X, axis=1).max())
        log.append({"iter": it, "energy": dirichlet_energy(w, Y), "max_disp": disp, "flips": len(flips)})
        X = Y
        current = mesh.with_positions(X)
        if disp < tol:
            break
    res = _interior_residual(current, free, eps)
    result = MinimalResult(current, log, log[-1]["max_disp"] < tol, res)
    if not result.converged:
        raise NotConverged(f"no convergence after {max_iter} iterations", result)
    return result


def _interior_residual(mesh, free, eps):
    s, _ = _idt(mesh, eps)
    H = apply_laplace(assemble(s, eps=eps), mesh.positions)
    return float(np.linalg.norm(H[free], axis=1).max())


def max_stable_dt(mesh, eps=DELAUNAY_EPS):
    """Upper bound 0.25 * min cell area / max weighted degree for explicit steps."""
    s, _ = _idt(mesh, eps)
    w = assemble(s, eps=eps)
    deg = np.zeros(s.n_vertices)
    np.add.at(deg, w.edges[:, 0], np.maximum(w.weights, 0))
    np.add.at(deg, w.edges[:, 1], np.maximum(w.weights, 0))
    A = voronoi_area(s, eps)
    return 0.25 * float(A.min()) / float(deg.max())


def mcf_step(mesh, dt, fixed=None, integrated=False, guard=True, eps=DELAUNAY_EPS):
    """One explicit Euler step of mean curvature flow.

    Free vertices move by ``-dt * H / A`` (or ``-dt * H`` with
    ``integrated``), so convex bodies shrink. By default the boundary
    vertices stay fixed.

    Returns
    -------
    mesh : EmbeddedMesh
    flips : int
        Flips needed to make the new carrier intrinsically Delaunay.
    """
    if dt < 0:
        raise ValidationError("dt must be non-negative")
    if dt == 0:
        return mesh.with_positions(mesh.positions), 0
    if fixed is None:
        fixed = mesh.boundary_vertices()
    fixed = np.asarray(fixed, dtype=np.int64)
    field_ = curvature_field(mesh, eps)
    if guard:
        bound = max_stable_dt(mesh, eps)
        if dt > bound:
            raise ValidationError(f"dt={dt:.3g} exceeds the stability bound {bound:.3g}")
    velocity = field_.H if integrated else field_.density
    X = mesh.positions - dt * velocity
    X[fixed] = mesh.positions[fixed]
    out = mesh.with_positions(X)
    _, log = _idt(out, eps)
    return out, len(log)


def flow(mesh, dt, steps, **kwargs):
    """Run ``steps`` flow steps; returns the list of meshes (including the start)."""
    meshes = [mesh]
    flips = []
    for _ in range(steps):
        m, n = mcf_step(meshes[-1], dt, **kwargs)
        meshes.append(m)
        flips.append(n)
    return meshes, flips


def interior_vertices(mesh):
    mask = np.ones(mesh.n_vertices, dtype=bool)
    mask[mesh.boundary_vertices()] = False
    return np.flatnonzero(mask)
