"""Independent reference computations used to cross-check the flip algorithm.

Nothing in here touches the halfedge structure or the cotan weights: PL
energies come from explicit gradients, and the planar Delaunay reference is a
brute-force empty-circle search with exact predicates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateFace, ValidationError


class CollinearInput(ValidationError):
    pass


# --------------------------------------------------------------------------
# exact predicates
# --------------------------------------------------------------------------

_ORIENT_ERR = 3.3306690738754716e-16
_INCIRCLE_ERR = 1.1102230246251577e-15


def orient2d(a, b, c):
    """Sign of twice the signed area of (a, b, c): +1 counter-clockwise, -1 clockwise, 0 collinear.

    A floating-point filter decides the easy cases; the rest are evaluated in
    exact rational arithmetic.
    """
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    bound = _ORIENT_ERR * (abs((b[0] - a[0]) * (c[1] - a[1])) + abs((b[1] - a[1]) * (c[0] - a[0])))
    if abs(det) > bound:
        return 1 if det > 0 else -1
    ax, ay, bx, by, cx, cy = (Fraction(float(v)) for v in (a[0], a[1], b[0], b[1], c[0], c[1]))
    d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (d > 0) - (d < 0)


def incircle(a, b, c, d):
    """Positive if ``d`` lies inside the circle through counter-clockwise ``a, b, c``.

    Zero for cocircular points, negative outside.
    """
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy)
           + clift * (adx * bdy - bdx * ady))
    perm = ((abs(bdx * cdy) + abs(cdx * bdy)) * alift + (abs(cdx * ady) + abs(adx * cdy)) * blift
            + (abs(adx * bdy) + abs(bdx * ady)) * clift)
    if abs(det) > _INCIRCLE_ERR * perm:
        return 1 if det > 0 else -1
    q = [Fraction(float(v)) for v in (a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1])]
    adx, ady = q[0] - q[6], q[1] - q[7]
    bdx, bdy = q[2] - q[6], q[3] - q[7]
    cdx, cdy = q[4] - q[6], q[5] - q[7]
    det = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
           + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
           + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return (det > 0) - (det < 0)


def _segments_cross(p, q, r, s):
    # proper crossing of open segments pq and rs
    return (orient2d(p, q, r) * orient2d(p, q, s) < 0) and (orient2d(r, s, p) * orient2d(r, s, q) < 0)


# --------------------------------------------------------------------------
# planar Delaunay reference
# --------------------------------------------------------------------------


@dataclass
class PlanarDelaunay:
    """Result of :func:`planar_delaunay`.

    ``edges`` is a Delaunay triangulation's edge set (pairs ``(i, j)`` with
    ``i < j``). ``ties`` lists edges that belong to some but not every
    Delaunay triangulation (cocircular configurations); ``candidates`` holds
    every edge of every Delaunay triangle.
    """

    edges: set
    triangles: list
    ties: set = field(default_factory=set)
    candidates: set = field(default_factory=set)

    @property
    def has_ties(self):
        return bool(self.ties)

    def accepts(self, edges):
        """True if ``edges`` is the edge set of a Delaunay triangulation of these points."""
        edges = {tuple(sorted(e)) for e in edges}
        required = self.candidates - self.ties
        return required <= edges <= self.candidates and len(edges) == len(self.edges)


def planar_delaunay(points):
    """Delaunay triangulation of planar points by exhaustive empty-circle search.

    Every point triple whose circumcircle contains no other point strictly
    inside is a Delaunay triangle. Candidate edges crossed by another
    candidate come from cocircular groups; they are flagged as ties and a
    non-crossing subset is chosen greedily.
    """
    P = np.asarray(points, dtype=float)[:, :2]
    n = len(P)
    if n < 3:
        raise CollinearInput("need at least three points")
    if all(orient2d(P[0], P[1], P[k]) == 0 for k in range(2, n)):
        raise CollinearInput("all points are collinear")

    # incircle values of every triple against every point at once; entries
    # inside the floating-point error bound are re-decided exactly
    T = np.array(list(itertools.combinations(range(n), 3)), dtype=np.int64)
    a, b, c = P[T[:, 0]], P[T[:, 1]], P[T[:, 2]]
    det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    bound = _ORIENT_ERR * (np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]))
                           + np.abs((b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])))
    signs = np.sign(det).astype(np.int64)
    for k in np.flatnonzero(np.abs(det) <= bound):
        signs[k] = orient2d(*P[T[k]])
    keep = signs != 0
    T, signs = T[keep], signs[keep]
    cw = signs < 0
    T[cw, 1], T[cw, 2] = T[cw, 2], T[cw, 1].copy()

    A, B, C = P[T[:, 0]][:, None, :], P[T[:, 1]][:, None, :], P[T[:, 2]][:, None, :]
    D = P[None, :, :]
    adx, ady = A[..., 0] - D[..., 0], A[..., 1] - D[..., 1]
    bdx, bdy = B[..., 0] - D[..., 0], B[..., 1] - D[..., 1]
    cdx, cdy = C[..., 0] - D[..., 0], C[..., 1] - D[..., 1]
    al, bl, cl = adx * adx + ady * ady, bdx * bdx + bdy * bdy, cdx * cdx + cdy * cdy
    det = al * (bdx * cdy - cdx * bdy) + bl * (cdx * ady - adx * cdy) + cl * (adx * bdy - bdx * ady)
    perm = ((np.abs(bdx * cdy) + np.abs(cdx * bdy)) * al + (np.abs(cdx * ady) + np.abs(adx * cdy)) * bl
            + (np.abs(adx * bdy) + np.abs(bdx * ady)) * cl)
    own = np.zeros(det.shape, dtype=bool)
    rows = np.arange(len(T))
    for k in range(3):
        own[rows, T[:, k]] = True
    inside = (det > _INCIRCLE_ERR * perm) & ~own
    unsure = (np.abs(det) <= _INCIRCLE_ERR * perm) & ~own
    empty = ~inside.any(axis=1)
    triangles = []
    for k in np.flatnonzero(empty):
        i, j, l = (int(x) for x in T[k])
        if any(incircle(P[i], P[j], P[l], P[m]) > 0 for m in np.flatnonzero(unsure[k])):
            continue
        triangles.append((i, j, l))

    candidates = set()
    for t in triangles:
        for u, v in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            candidates.add((min(u, v), max(u, v)))
    cand = sorted(candidates)
    ties = set()
    for e, f in itertools.combinations(cand, 2):
        if len({*e, *f}) == 4 and _segments_cross(P[e[0]], P[e[1]], P[f[0]], P[f[1]]):
            ties.add(e)
            ties.add(f)
    chosen = set(candidates - ties)
    for e in sorted(ties):
        if not any(len({*e, *f}) == 4 and _segments_cross(P[e[0]], P[e[1]], P[f[0]], P[f[1]]) for f in chosen):
            chosen.add(e)
    return PlanarDelaunay(chosen, triangles, ties, candidates)


# --------------------------------------------------------------------------
# PL Dirichlet energy by explicit gradients
# --------------------------------------------------------------------------


def layout_triangle(a, b, c):
    """Planar coordinates of a triangle with sides ``a = |p1 p2|, b = |p2 p0|, c = |p0 p1|``."""
    x = (c * c + b * b - a * a) / (2.0 * c)
    y2 = b * b - x * x
    if y2 <= 0:
        raise DegenerateFace(f"lengths ({a}, {b}, {c}) do not form a triangle")
    return np.array([[0.0, 0.0], [c, 0.0], [x, math.sqrt(y2)]])


def pl_energy(triangle, values):
    """Dirichlet energy 1/2 |grad f|^2 * area of the linear interpolant on one triangle.

    ``triangle`` is either a (3, 2) / (3, 3) array of vertex coordinates or the
    side lengths ``(a, b, c)`` with ``a`` opposite vertex 0, ``b`` opposite
    vertex 1 and ``c`` opposite vertex 2.
    """
    t = np.asarray(triangle, dtype=float)
    if t.ndim == 1:
        P = layout_triangle(*t)
    else:
        P = t
        if P.shape[1] == 3:
            e1, e2 = P[1] - P[0], P[2] - P[0]
            u = e1 / np.linalg.norm(e1)
            n = np.cross(e1, e2)
            v = np.cross(n, u)
            nv = np.linalg.norm(v)
            if nv == 0:
                raise DegenerateFace("collinear triangle")
            v = v / nv
            P = np.array([[0.0, 0.0], [e1 @ u, e1 @ v], [e2 @ u, e2 @ v]])
    f = np.asarray(values, dtype=float)
    M = np.array([P[1] - P[0], P[2] - P[0]])
    area = 0.5 * abs(np.linalg.det(M))
    if area <= 0:
        raise DegenerateFace("triangle has no area")
    grad = np.linalg.solve(M, np.array([f[1] - f[0], f[2] - f[0]]))
    return 0.5 * float(grad @ grad) * area


def pl_energy_mesh(points, triangles, values):
    """Sum of :func:`pl_energy` over a planar triangle list."""
    P = np.asarray(points, dtype=float)
    f = np.asarray(values, dtype=float)
    return math.fsum(pl_energy(P[list(t)], f[list(t)]) for t in triangles)


def delta_energy_sum(points, triangles):
    """Sum over vertices x of the energy of the hat function at x."""
    n = len(points)
    total = []
    for x in range(n):
        delta = np.zeros(n)
        delta[x] = 1.0
        total.append(pl_energy_mesh(points, [t for t in triangles if x in t], delta))
    return math.fsum(total)


def planar_harmonic_index(points, triangles):
    """Sum of (a^2 + b^2 + c^2) / area from coordinates (shoelace area)."""
    P = np.asarray(points, dtype=float)
    total = []
    for t in triangles:
        p0, p1, p2 = P[list(t)][:, :2]
        area = 0.5 * abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]))
        s2 = sum(float(np.sum((u - v) ** 2)) for u, v in ((p0, p1), (p1, p2), (p2, p0)))
        total.append(s2 / area)
    return math.fsum(total)


# --------------------------------------------------------------------------
# Rippa's quad comparison
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadConfig:
    """Convex quad x1..x4 cut by its diagonals at x0.

    ``r`` are the distances x0-x_i, ``theta`` the diagonal intersection
    angle, ``f1`` / ``f2`` the values at x0 of the interpolants on the
    triangulations with diagonal x1x3 and x2x4.
    """

    r: tuple
    theta: float
    f1: float
    f2: float
    values: tuple
    points: tuple = ()

    @classmethod
    def from_points(cls, points, values):
        P = np.asarray(points, dtype=float)[:, :2]
        f = tuple(float(v) for v in values)
        d13 = P[2] - P[0]
        d24 = P[3] - P[1]
        den = d13[0] * d24[1] - d13[1] * d24[0]
        if den == 0:
            raise ValidationError("diagonals are parallel")
        w = P[1] - P[0]
        s = (w[0] * d24[1] - w[1] * d24[0]) / den
        t = (w[0] * d13[1] - w[1] * d13[0]) / den
        if not (0 < s < 1 and 0 < t < 1):
            raise ValidationError("quad is not strictly convex")
        x0 = P[0] + s * d13
        r = tuple(float(np.linalg.norm(P[k] - x0)) for k in range(4))
        cos = float(d13 @ d24) / (np.linalg.norm(d13) * np.linalg.norm(d24))
        theta = math.acos(max(-1.0, min(1.0, cos)))
        r1, r2, r3, r4 = r
        f1 = (f[0] * r3 + f[2] * r1) / (r1 + r3)
        f2 = (f[1] * r4 + f[3] * r2) / (r2 + r4)
        return cls(r, theta, f1, f2, f, tuple(map(tuple, P)))


def rippa_difference(q):
    """E(f on x1x3 triangulation) - E(f on x2x4 triangulation) in closed form.

    With E = 1/2 * integral |grad f|^2 the prefactor is (f1 - f2)^2 / (4 sin theta);
    the often quoted 1 / (2 sin theta) belongs to the energy without the 1/2.
    """
    r1, r2, r3, r4 = q.r
    return ((q.f1 - q.f2) ** 2 / (4.0 * math.sin(q.theta))
            * (r1 + r3) * (r2 + r4) / (r1 * r2 * r3 * r4) * (r1 * r3 - r2 * r4))


def quad_energies(points, values):
    """Brute-force PL energies of both triangulations of a convex quad."""
    P = np.asarray(points, dtype=float)
    f = np.asarray(values, dtype=float)
    e1 = pl_energy(P[[0, 1, 2]], f[[0, 1, 2]]) + pl_energy(P[[0, 2, 3]], f[[0, 2, 3]])
    e2 = pl_energy(P[[0, 1, 3]], f[[0, 1, 3]]) + pl_energy(P[[1, 2, 3]], f[[1, 2, 3]])
    return e1, e2
