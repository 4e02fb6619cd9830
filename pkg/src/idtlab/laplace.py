"""Cotan Laplace-Beltrami operator on an intrinsic Delaunay triangulation.

Sign convention: ``(L f)_i = sum_j w_ij (f_i - f_j)``, so ``L`` is positive
semi-definite (the negative of the analysts' Laplacian).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.sparse import csgraph
from scipy.sparse import linalg as splinalg

from .errors import IncompatibleData, NotDelaunay, SolverFailure, ValidationError
from .idt import DELAUNAY_EPS, flip_to_delaunay

logger = logging.getLogger(__name__)

#: Systems larger than this are solved with conjugate gradients.
DIRECT_SOLVE_LIMIT = 10_000
SOLVER_TOL = 1e-10
NEUMANN_TOL = 1e-9


def edge_weight(s, e):
    """Cotan weight of edge ``e`` of any triangulation (Delaunay or not)."""
    h = int(s.edge_half[e])
    t = int(s.twin[h])
    w = 0.5 * s.opposite_cot(h)
    if t >= 0:
        w += 0.5 * s.opposite_cot(t)
    return w


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric edge weights over a triangulation's edge set.

    Attributes
    ----------
    n_vertices : int
    edges : ndarray of int, shape (E, 2)
    weights : ndarray of float, shape (E,)
    boundary : ndarray of bool, shape (n_vertices,)
        Vertices on the surface boundary.
    """

    n_vertices: int
    edges: np.ndarray
    weights: np.ndarray
    boundary: np.ndarray

    @property
    def interior(self):
        return ~self.boundary

    def matrix(self):
        """Sparse symmetric Laplacian (CSR)."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        w = self.weights
        n = self.n_vertices
        off = sparse.coo_matrix((np.concatenate([-w, -w]), (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n))
        deg = np.zeros(n)
        np.add.at(deg, i, w)
        np.add.at(deg, j, w)
        return (off + sparse.diags(deg)).tocsr()

    def neighbors(self):
        """Per vertex, a list of (neighbor, weight) pairs; loops are skipped."""
        out = [[] for _ in range(self.n_vertices)]
        for (i, j), w in zip(self.edges.tolist(), self.weights.tolist()):
            if i == j:
                continue
            out[i].append((j, w))
            out[j].append((i, w))
        return out

    def to_json(self):
        return [{"i": int(i), "j": int(j), "weight": float(w)}
                for (i, j), w in zip(self.edges, self.weights)]


def assemble(s, eps=DELAUNAY_EPS, check=True):
    """Weighted graph of a surface.

    The caller is expected to pass an intrinsic Delaunay triangulation; with
    ``check`` a weight below ``-eps`` raises NotDelaunay. Pass ``check=False``
    to assemble on an arbitrary triangulation for comparison.
    """
    w = s.cotan_weights()
    if check:
        interior = ~s.boundary_edge_mask()
        bad = np.flatnonzero(interior & (w < -eps))
        if len(bad):
            raise NotDelaunay(f"edge {int(bad[0])} has weight {w[bad[0]]:.3g}; run flip_to_delaunay first")
    return WeightedGraph(s.n_vertices, s.edge_pairs(), w, s.boundary_vertex_mask())


def delaunay_graph(s, eps=DELAUNAY_EPS, max_flips=None):
    """Flip a copy of ``s`` to Delaunay and assemble it. Returns (graph, idt, flip log)."""
    idt = s.copy()
    log = flip_to_delaunay(idt, eps=eps, max_flips=max_flips)
    return assemble(idt, eps=eps), idt, log


def apply_laplace(w, f):
    f = np.asarray(f, dtype=float)
    return w.matrix() @ f


def dirichlet_energy(w, f):
    """1/2 sum over edges of w_ij |f_i - f_j|^2 (summed over components)."""
    f = np.asarray(f, dtype=float)
    d = f[w.edges[:, 0]] - f[w.edges[:, 1]]
    if d.ndim > 1:
        d = (d * d).sum(axis=1)
    else:
        d = d * d
    return 0.5 * float(np.dot(w.weights, d))


def _solve_spd(A, b, tol):
    n = A.shape[0]
    cols = [b] if b.ndim == 1 else [b[:, k] for k in range(b.shape[1])]
    if n <= DIRECT_SOLVE_LIMIT:
        try:
            solve = splinalg.factorized(A.tocsc())
        except RuntimeError as exc:
            raise SolverFailure(f"factorization failed: {exc}") from exc
        sols = [solve(col) for col in cols]
    else:
        sols = []
        for col in cols:
            sol, info = splinalg.cg(A, col, rtol=tol, maxiter=10 * n)
            if info != 0:
                raise SolverFailure(f"conjugate gradients did not converge (info={info})")
            sols.append(sol)
    x = sols[0] if b.ndim == 1 else np.column_stack(sols)
    if not np.all(np.isfinite(x)):
        raise SolverFailure("singular system")
    bnorm = np.linalg.norm(b)
    if bnorm > 0:
        res = np.linalg.norm(A @ x - b) / bnorm
        if res > tol:
            raise SolverFailure(f"relative residual {res:.3g} exceeds {tol:.3g}")
    return x


def solve_dirichlet(w, boundary, g, tol=SOLVER_TOL):
    """Harmonic extension of boundary data.

    Parameters
    ----------
    w : WeightedGraph
    boundary : array_like of int
        Constrained vertices.
    g : array_like, shape (len(boundary),) or (len(boundary), k)
        Values at the constrained vertices.

    Returns
    -------
    ndarray
        Field equal to ``g`` on ``boundary`` with ``L f = 0`` elsewhere.
    """
    boundary = np.asarray(boundary, dtype=np.int64).reshape(-1)
    g = np.asarray(g, dtype=float)
    if len(boundary) == 0:
        raise ValidationError("Dirichlet problem needs at least one constrained vertex")
    if len(g) != len(boundary):
        raise ValidationError("boundary values do not match boundary vertices")
    if not np.all(np.isfinite(g)):
        raise ValidationError("boundary values must be finite")
    f = np.zeros((w.n_vertices,) + g.shape[1:])
    f[boundary] = g
    mask = np.ones(w.n_vertices, dtype=bool)
    mask[boundary] = False
    free = np.flatnonzero(mask)
    if len(free) == 0:
        logger.debug("no free vertices; returning the boundary data")
        return f
    L = w.matrix()
    A = L[free][:, free]
    rhs = -(L[free][:, boundary] @ g)
    f[free] = _solve_spd(A, rhs, tol)
    return f


def solve_neumann(w, boundary, g, tol=SOLVER_TOL, compat_tol=NEUMANN_TOL):
    """Solve ``L f = g`` on ``boundary`` and ``L f = 0`` elsewhere.

    The solution is fixed to mean zero on every connected component.
    """
    boundary = np.asarray(boundary, dtype=np.int64).reshape(-1)
    g = np.asarray(g, dtype=float).reshape(-1)
    if len(g) != len(boundary):
        raise ValidationError("boundary values do not match boundary vertices")
    b = np.zeros(w.n_vertices)
    np.add.at(b, boundary, g)
    L = w.matrix()
    adj = sparse.coo_matrix((np.abs(w.weights) > 0, (w.edges[:, 0], w.edges[:, 1])), shape=L.shape)
    n_comp, labels = csgraph.connected_components(adj, directed=False)
    f = np.zeros(w.n_vertices)
    for c in range(n_comp):
        idx = np.flatnonzero(labels == c)
        total = float(b[idx].sum())
        if abs(total) > compat_tol * float(np.abs(b[idx]).sum()):
            raise IncompatibleData(f"Neumann data sums to {total:.3g}, expected 0")
        if len(idx) == 1:
            continue
        rest = idx[1:]
        A = L[rest][:, rest]
        x = np.zeros(len(idx))
        if np.any(b[rest] != 0):
            x[1:] = _solve_spd(A, b[rest], tol)
        f[idx] = x - x.mean()
    return f


def hull_violations(w, f, vertices, tol=1e-9):
    """Vertices whose value lies outside the convex hull of their neighbours' values.

    Scalar fields use the neighbour min/max interval. Vector fields first try
    the weighted neighbour mean; if that misses, feasibility of a convex
    combination is decided by a small linear program.
    """
    f = np.asarray(f, dtype=float)
    nbrs = w.neighbors()
    scale = max(float(np.abs(f).max()) if f.size else 0.0, 1.0)
    out = []
    for v in np.asarray(vertices, dtype=np.int64).reshape(-1):
        v = int(v)
        js = [j for j, _ in nbrs[v]]
        if not js:
            out.append(v)
            continue
        vals = f[js]
        if f.ndim == 1:
            if not (vals.min() - tol * scale <= f[v] <= vals.max() + tol * scale):
                out.append(v)
            continue
        ws = np.array([max(x, 0.0) for _, x in nbrs[v]])
        if ws.sum() > 0 and np.linalg.norm(ws @ vals / ws.sum() - f[v]) <= tol * scale:
            continue
        k = len(js)
        A_eq = np.vstack([vals.T, np.ones((1, k))])
        b_eq = np.concatenate([f[v], [1.0]])
        res = linprog(np.zeros(k), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * k, method="highs")
        if res.status != 0 or np.abs(A_eq @ res.x - b_eq).max() > tol * scale:
            out.append(v)
    return out


def check_harmonic_hull(w, f, interior=None, tol=1e-9):
    """Convex hull check at interior vertices (default: all non-boundary vertices)."""
    if interior is None:
        interior = np.flatnonzero(w.interior)
    return hull_violations(w, f, interior, tol=tol)
