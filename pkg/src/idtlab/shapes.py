"""Small test meshes and random instance generators."""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import ConvexHull

from .idt import flip_edge, is_flippable
from .oracle import orient2d
from .surface import EmbeddedMesh, PiecewiseFlatSurface, is_degenerate, satisfies_triangle_inequality

#: Kite vertices A, B, C, D; the diagonal AC is not Delaunay.
KITE = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 1.0]])


def unit_square():
    """Unit square split along the diagonal from vertex 0 to vertex 2."""
    pos = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    return EmbeddedMesh(pos, [[0, 1, 2], [0, 2, 3]])


def kite():
    return EmbeddedMesh(KITE, [[0, 1, 2], [0, 2, 3]])


def cube():
    """Unit cube [0, 1]^3, each square face split by one diagonal, outward oriented."""
    pos = np.array([[x, y, z] for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)])

    def vid(x, y, z):
        return 4 * x + 2 * y + z

    quads = [
        (vid(0, 0, 0), vid(0, 1, 0), vid(1, 1, 0), vid(1, 0, 0)),  # z = 0
        (vid(0, 0, 1), vid(1, 0, 1), vid(1, 1, 1), vid(0, 1, 1)),  # z = 1
        (vid(0, 0, 0), vid(1, 0, 0), vid(1, 0, 1), vid(0, 0, 1)),  # y = 0
        (vid(0, 1, 0), vid(0, 1, 1), vid(1, 1, 1), vid(1, 1, 0)),  # y = 1
        (vid(0, 0, 0), vid(0, 0, 1), vid(0, 1, 1), vid(0, 1, 0)),  # x = 0
        (vid(1, 0, 0), vid(1, 1, 0), vid(1, 1, 1), vid(1, 0, 1)),  # x = 1
    ]
    faces = []
    for a, b, c, d in quads:
        faces += [(a, b, c), (a, c, d)]
    return EmbeddedMesh(pos, faces)


def hex_fan(radius=1.0):
    """Six equilateral triangles around a hub at the origin (vertex 0)."""
    pos = [[0.0, 0.0]] + [[radius * math.cos(k * math.pi / 3), radius * math.sin(k * math.pi / 3)] for k in range(6)]
    faces = [(0, 1 + k, 1 + (k + 1) % 6) for k in range(6)]
    return EmbeddedMesh(pos, faces)


def grid(nx, ny, spacing=1.0, flip_diagonal=False):
    """Planar (nx+1) x (ny+1) vertex grid of squares split by diagonals.

    Vertex ``(i, j)`` has index ``j * (nx + 1) + i`` and position
    ``(i * spacing, j * spacing, 0)``.
    """
    xs, ys = np.meshgrid(np.arange(nx + 1) * spacing, np.arange(ny + 1) * spacing)
    pos = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(xs.size)])
    faces = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            b, c, d = a + 1, a + nx + 2, a + nx + 1
            if flip_diagonal:
                faces += [(a, b, d), (b, c, d)]
            else:
                faces += [(a, b, c), (a, c, d)]
    return EmbeddedMesh(pos, faces)


def triangular_lattice(nx, ny, spacing=1.0):
    """Planar patch of equilateral triangles (strictly Delaunay in the interior)."""
    h = spacing * math.sqrt(3) / 2
    pos = []
    for j in range(ny + 1):
        for i in range(nx + 1):
            pos.append([i * spacing + (0.5 * spacing if j % 2 else 0.0), j * h, 0.0])
    faces = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            b = a + 1
            c = a + nx + 1
            d = c + 1
            if j % 2 == 0:
                faces += [(a, b, c), (b, d, c)]
            else:
                faces += [(a, d, c), (a, b, d)]
    return EmbeddedMesh(pos, faces)


def catenoid_rings(n_sides=12, n_rings=17, radius=1.0, height=0.4):
    """Two regular polygons at ``z = +-height`` joined by a cylinder of free rings.

    Rings are aligned. Quad diagonals alternate around each band and are
    mirrored in the upper half, so the mesh has the dihedral symmetry of the
    boundary and the reflection ``z -> -z``. Boundary vertices are the first
    and last ``n_sides`` indices.

    Returns
    -------
    mesh : EmbeddedMesh
    fixed : ndarray of int
    """
    levels = n_rings + 2
    pos = []
    for r in range(levels):
        z = -height + 2 * height * r / (levels - 1)
        for k in range(n_sides):
            t = 2 * math.pi * k / n_sides
            pos.append([radius * math.cos(t), radius * math.sin(t), z])
    faces = []
    for r in range(levels - 1):
        upper = r >= (levels - 1) / 2
        for k in range(n_sides):
            a = r * n_sides + k
            b = r * n_sides + (k + 1) % n_sides
            c = (r + 1) * n_sides + k
            d = (r + 1) * n_sides + (k + 1) % n_sides
            if (k % 2 == 0) != upper:
                faces += [(a, b, d), (a, d, c)]
            else:
                faces += [(a, b, c), (b, d, c)]
    fixed = np.concatenate([np.arange(n_sides), np.arange((levels - 1) * n_sides, levels * n_sides)])
    return EmbeddedMesh(pos, faces), fixed


def self_glued_triangle(side=1.0, base=1.0):
    """One isosceles triangle whose two equal sides are glued to each other.

    The result is a cone with apex at vertex 1 and a loop boundary at vertex
    0; the glued edge has the same face on both sides.
    """
    # halfedges: 0: v0->v1, 1: v1->v0 (glued to 0), 2: v0->v0 (boundary loop)
    return PiecewiseFlatSurface(origin=[0, 1, 0], twin=[1, 0, -1], edge=[0, 0, 1], length=[side, base], n_vertices=2)


# --------------------------------------------------------------------------
# random instances
# --------------------------------------------------------------------------


def sweep_triangulation(points):
    """Triangulate the convex hull of generic planar points by a left-to-right sweep.

    Each new point is joined to every hull edge it sees. The result is a
    valid, typically far from Delaunay, triangulation.
    """
    P = np.asarray(points, dtype=float)[:, :2]
    order = np.lexsort((P[:, 1], P[:, 0]))
    i0, i1 = int(order[0]), int(order[1])
    k = 2
    while orient2d(P[i0], P[i1], P[order[k]]) == 0:
        k += 1
    i2 = int(order[k])
    if orient2d(P[i0], P[i1], P[i2]) < 0:
        i1, i2 = i2, i1
    faces = [(i0, i1, i2)]
    hull = [i0, i1, i2]
    rest = [int(v) for v in order[2:] if v != order[k]]
    for p in rest:
        m = len(hull)
        vis = [orient2d(P[hull[q]], P[hull[(q + 1) % m]], P[p]) < 0 for q in range(m)]
        if not any(vis):
            raise ValueError("point inside hull; sweep order broken")
        start = next(q for q in range(m) if vis[q] and not vis[q - 1])
        rot = hull[start:] + hull[:start]
        n_vis = 0
        while vis[(start + n_vis) % m]:
            faces.append((rot[n_vis], p, rot[(n_vis + 1) % m]))
            n_vis += 1
        hull = [rot[0], p] + rot[n_vis:]
    return np.array(faces, dtype=np.int64)


def random_points(rng, n, box=1.0):
    return rng.uniform(0.0, box, size=(n, 2))


def random_planar_mesh(rng, n):
    """Random points in the unit square with their sweep triangulation."""
    pts = random_points(rng, n)
    return EmbeddedMesh(pts, sweep_triangulation(pts))


def random_convex_polytope(rng, n):
    """Closed triangulated convex polyhedron on ``n`` random points of the unit sphere."""
    x = rng.normal(size=(n, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    hull = ConvexHull(x)
    return EmbeddedMesh(x, hull.simplices)


def perturb_lengths(s, rng, scale=0.1, tries=100):
    """Copy of ``s`` with edge lengths scaled by independent factors in [1 - scale, 1 + scale].

    Interior vertices generally become cone points. Retries until every face
    is a proper triangle.
    """
    for _ in range(tries):
        out = s.copy()
        out.length = s.length * (1.0 + scale * rng.uniform(-1.0, 1.0, size=s.n_edges))
        ok = True
        for f in range(out.n_faces):
            lens = out.face_lengths(f)
            if not satisfies_triangle_inequality(*lens) or is_degenerate(*lens, tol=1e-6):
                ok = False
                break
        if ok:
            return out
    raise ValueError("could not perturb lengths into a valid metric")


def random_flips(s, rng, n):
    """Apply up to ``n`` random flips to flippable interior edges, in place."""
    interior = s.interior_edges()
    done = 0
    for _ in range(20 * n):
        if done >= n or not len(interior):
            break
        e = int(rng.choice(interior))
        if is_flippable(s, e):
            lens_ok = True
            flip_edge(s, e)
            for f in range(s.n_faces):
                if is_degenerate(*s.face_lengths(f), tol=1e-6):
                    lens_ok = False
                    break
            if not lens_ok:
                flip_edge(s, e)
                continue
            done += 1
    return done
