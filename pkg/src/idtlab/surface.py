"""Piecewise flat surfaces stored as halfedge delta-complexes.

Halfedges are the primitive. Face ``f`` owns halfedges ``3f, 3f+1, 3f+2`` in
cyclic order, so ``next`` is implicit; ``origin``, ``twin`` and ``edge`` are
explicit arrays. This encoding represents non-regular triangulations (an edge
glued to the same face twice, loops, multi-edges), which intrinsic edge flips
produce routinely.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateFace, NonManifoldInput, ValidationError

#: A face is degenerate when its area is below this factor times (max length)^2.
DEGENERACY_TOL = 1e-14
#: Absolute tolerance used to classify vertices as cone points.
ANGLE_TOL = 1e-9


# --------------------------------------------------------------------------
# single-triangle geometry
# --------------------------------------------------------------------------


def heron_area(a, b, c):
    """Area of a triangle from its side lengths.

    Uses Kahan's ordering of Heron's formula, which stays accurate for
    needle-shaped triangles. Returns 0.0 when the lengths violate the
    triangle inequality.
    """
    a, b, c = sorted((float(a), float(b), float(c)), reverse=True)
    p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    if p <= 0.0:
        return 0.0
    return 0.25 * math.sqrt(p)


def triangle_angle(a, b, c):
    """Angle opposite side ``a`` in a triangle with sides ``a, b, c``.

    Half-angle form of the law of cosines, evaluated with ``atan2`` so that
    angles near 0 and near pi keep full relative accuracy.
    """
    x = (a - b + c) * (a + b - c)
    y = (a + b + c) * (b + c - a)
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return math.pi
    return 2.0 * math.atan2(math.sqrt(x), math.sqrt(y))


def triangle_cot(a, b, c):
    """Cotangent of the angle opposite ``a``: (b^2 + c^2 - a^2) / 4A."""
    area = heron_area(a, b, c)
    if area <= 0.0:
        raise DegenerateFace(f"triangle with sides ({a}, {b}, {c}) has no area")
    return (b * b + c * c - a * a) / (4.0 * area)


def satisfies_triangle_inequality(a, b, c):
    return a < b + c and b < c + a and c < a + b


def is_degenerate(a, b, c, tol=DEGENERACY_TOL):
    m = max(a, b, c)
    return heron_area(a, b, c) < tol * m * m


# --------------------------------------------------------------------------
# embedded meshes
# --------------------------------------------------------------------------


@dataclass
class EmbeddedMesh:
    """Vertex positions in 3-space plus a triangle list.

    2D positions are padded with ``z = 0``.
    """

    positions: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] not in (2, 3):
            raise ValidationError("positions must have shape (n, 2) or (n, 3)")
        if pos.shape[1] == 2:
            pos = np.column_stack([pos, np.zeros(len(pos))])
        faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if faces.size and (faces.min() < 0 or faces.max() >= len(pos)):
            raise ValidationError("face index out of range")
        self.positions = pos
        self.faces = faces

    @property
    def n_vertices(self):
        return len(self.positions)

    @property
    def n_faces(self):
        return len(self.faces)

    def with_positions(self, positions):
        return EmbeddedMesh(np.array(positions, dtype=float), self.faces.copy())

    def face_areas(self):
        p = self.positions
        e1 = p[self.faces[:, 1]] - p[self.faces[:, 0]]
        e2 = p[self.faces[:, 2]] - p[self.faces[:, 0]]
        return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)

    def area(self):
        return float(self.face_areas().sum())

    def bbox_diagonal(self):
        if not len(self.positions):
            return 0.0
        return float(np.linalg.norm(self.positions.max(0) - self.positions.min(0)))

    def edge_face_counts(self):
        counts = defaultdict(int)
        for f in self.faces:
            for k in range(3):
                i, j = int(f[k]), int(f[(k + 1) % 3])
                counts[(min(i, j), max(i, j))] += 1
        return counts

    def boundary_vertices(self):
        out = set()
        for (i, j), n in self.edge_face_counts().items():
            if n == 1:
                out.update((i, j))
        return np.array(sorted(out), dtype=np.int64)

    def check(self):
        """Raise if the mesh violates the embedded-mesh invariants."""
        for n, f in enumerate(self.faces):
            if len(set(f.tolist())) != 3:
                raise DegenerateFace(f"face {n} repeats a vertex: {f.tolist()}")
        for (i, j), n in self.edge_face_counts().items():
            if n > 2:
                raise NonManifoldInput(f"edge ({i}, {j}) is shared by {n} faces")
        _orient_faces(self.faces)
        areas = self.face_areas()
        for n, f in enumerate(self.faces):
            m = max(np.linalg.norm(self.positions[f[k]] - self.positions[f[(k + 1) % 3]]) for k in range(3))
            if areas[n] < DEGENERACY_TOL * m * m:
                raise DegenerateFace(f"face {n} has area {areas[n]:.3g}")


def _orient_faces(faces):
    """Return a copy of ``faces`` with coherent orientation per component.

    Raises NonManifoldInput for non-orientable input.
    """
    faces = np.array(faces, dtype=np.int64).reshape(-1, 3)
    edge_faces = defaultdict(list)
    for n, f in enumerate(faces):
        for k in range(3):
            i, j = int(f[k]), int(f[(k + 1) % 3])
            edge_faces[(min(i, j), max(i, j))].append(n)

    def directed(f, i, j):
        # True when the face traverses i -> j
        for k in range(3):
            if f[k] == i and f[(k + 1) % 3] == j:
                return True
        return False

    seen = np.zeros(len(faces), dtype=bool)
    for start in range(len(faces)):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        while queue:
            n = queue.popleft()
            f = faces[n]
            for k in range(3):
                i, j = int(f[k]), int(f[(k + 1) % 3])
                for m in edge_faces[(min(i, j), max(i, j))]:
                    if m == n:
                        continue
                    consistent = directed(faces[m], j, i)
                    if not seen[m]:
                        if not consistent:
                            faces[m] = faces[m][::-1]
                        seen[m] = True
                        queue.append(m)
                    elif not consistent:
                        raise NonManifoldInput("mesh is not orientable")
    return faces


# --------------------------------------------------------------------------
# the delta-complex
# --------------------------------------------------------------------------


class Corner(NamedTuple):
    """Corner of ``face`` at its ``index``-th vertex (the origin of halfedge 3*face+index)."""

    face: int
    index: int

    @property
    def halfedge(self):
        return 3 * self.face + self.index


def next_he(h):
    return h - h % 3 + (h + 1) % 3


def prev_he(h):
    return h - h % 3 + (h + 2) % 3


class PiecewiseFlatSurface:
    """Triangulated surface with an intrinsic metric given by edge lengths.

    Parameters
    ----------
    origin : array_like of int, shape (3F,)
        Origin vertex of each halfedge.
    twin : array_like of int, shape (3F,)
        Opposite halfedge, or -1 on the boundary.
    edge : array_like of int, shape (3F,)
        Edge id of each halfedge.
    length : array_like of float, shape (E,)
        Intrinsic edge lengths.
    n_vertices : int, optional
        Defaults to ``max(origin) + 1``.
    """

    def __init__(self, origin, twin, edge, length, n_vertices=None):
        self.origin = np.array(origin, dtype=np.int64)
        self.twin = np.array(twin, dtype=np.int64)
        self.edge = np.array(edge, dtype=np.int64)
        self.length = np.array(length, dtype=float)
        if not (len(self.origin) == len(self.twin) == len(self.edge)) or len(self.origin) % 3:
            raise ValidationError("halfedge arrays must have equal length divisible by 3")
        self.n_vertices = int(n_vertices if n_vertices is not None else self.origin.max() + 1)
        self.edge_half = np.full(len(self.length), -1, dtype=np.int64)
        for h in range(len(self.edge) - 1, -1, -1):
            self.edge_half[self.edge[h]] = h
        if (self.edge_half < 0).any():
            raise ValidationError("edge without halfedge")
        for h, t in enumerate(self.twin):
            if t >= 0 and (self.twin[t] != h or self.edge[t] != self.edge[h]):
                raise ValidationError(f"inconsistent twin at halfedge {h}")
        # -1 for input edges, otherwise the ordinal of the flip that created it
        self.edge_origin = np.full(len(self.length), -1, dtype=np.int64)
        self.flip_count = 0

    # -- construction ------------------------------------------------------

    @classmethod
    def from_faces(cls, faces, lengths, n_vertices=None):
        """Build a regular triangulation from oriented vertex triples.

        ``lengths`` maps unordered vertex pairs ``(i, j)`` to edge lengths, or
        is a callable ``lengths(i, j)``.
        """
        faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        origin = faces.reshape(-1).copy()
        twin = np.full(len(origin), -1, dtype=np.int64)
        edge = np.full(len(origin), -1, dtype=np.int64)
        directed = {}
        for h in range(len(origin)):
            i, j = int(origin[h]), int(origin[next_he(h)])
            if (i, j) in directed:
                raise NonManifoldInput(f"directed edge ({i}, {j}) appears twice")
            directed[(i, j)] = h
        edge_len = []
        for h in range(len(origin)):
            if edge[h] >= 0:
                continue
            i, j = int(origin[h]), int(origin[next_he(h)])
            e = len(edge_len)
            edge[h] = e
            t = directed.get((j, i))
            if t is not None:
                twin[h], twin[t] = t, h
                edge[t] = e
            key = (min(i, j), max(i, j))
            edge_len.append(float(lengths(*key) if callable(lengths) else lengths[key]))
        return cls(origin, twin, edge, edge_len, n_vertices)

    def copy(self):
        s = PiecewiseFlatSurface.__new__(PiecewiseFlatSurface)
        s.origin = self.origin.copy()
        s.twin = self.twin.copy()
        s.edge = self.edge.copy()
        s.length = self.length.copy()
        s.n_vertices = self.n_vertices
        s.edge_half = self.edge_half.copy()
        s.edge_origin = self.edge_origin.copy()
        s.flip_count = self.flip_count
        return s

    # -- combinatorics ------------------------------------------------------

    @property
    def n_faces(self):
        return len(self.origin) // 3

    @property
    def n_edges(self):
        return len(self.length)

    @property
    def n_halfedges(self):
        return len(self.origin)

    def tip(self, h):
        return int(self.origin[next_he(h)])

    def endpoints(self, e):
        h = int(self.edge_half[e])
        return int(self.origin[h]), self.tip(h)

    def edge_pairs(self):
        """(E, 2) array of edge endpoints."""
        h = self.edge_half
        nxt = h - h % 3 + (h + 1) % 3
        return np.column_stack([self.origin[h], self.origin[nxt]])

    def is_boundary_edge(self, e):
        return self.twin[self.edge_half[e]] < 0

    def boundary_edge_mask(self):
        return self.twin[self.edge_half] < 0

    def interior_edges(self):
        return np.flatnonzero(~self.boundary_edge_mask())

    def boundary_vertex_mask(self):
        mask = np.zeros(self.n_vertices, dtype=bool)
        b = np.flatnonzero(self.twin < 0)
        nxt = b - b % 3 + (b + 1) % 3
        mask[self.origin[b]] = True
        mask[self.origin[nxt]] = True
        return mask

    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    def vertex_fans(self, v):
        """Outgoing halfedges at ``v`` grouped into fans (one fan for a manifold vertex)."""
        outgoing = set(np.flatnonzero(self.origin == v).tolist())
        fans = []
        while outgoing:
            h = outgoing.pop()
            # rotate clockwise to the start of the fan (or all the way round)
            start = h
            while True:
                t = self.twin[h]
                if t < 0:
                    break
                h = next_he(int(t))
                if h == start:
                    break
            fan = [h]
            outgoing.discard(h)
            g = h
            while True:
                t = self.twin[prev_he(g)]
                if t < 0:
                    break
                g = int(t)
                if g == fan[0]:
                    break
                fan.append(g)
                outgoing.discard(g)
            fans.append(fan)
        return fans

    def face_components(self):
        """Label faces by connected component (adjacency through interior edges)."""
        labels = np.full(self.n_faces, -1, dtype=np.int64)
        n = 0
        for f in range(self.n_faces):
            if labels[f] >= 0:
                continue
            labels[f] = n
            stack = [f]
            while stack:
                g = stack.pop()
                for h in range(3 * g, 3 * g + 3):
                    t = self.twin[h]
                    if t >= 0 and labels[t // 3] < 0:
                        labels[t // 3] = n
                        stack.append(int(t // 3))
            n += 1
        return labels

    # -- geometry -----------------------------------------------------------

    def halfedge_length(self, h):
        return float(self.length[self.edge[h]])

    def face_lengths(self, f):
        return tuple(float(x) for x in self.length[self.edge[3 * f:3 * f + 3]])

    def face_area(self, f):
        return heron_area(*self.face_lengths(f))

    def face_areas(self):
        return np.array([self.face_area(f) for f in range(self.n_faces)])

    def total_area(self):
        return float(math.fsum(self.face_areas()))

    def corner_angle(self, corner):
        """Angle at a corner, given as a :class:`Corner` or a halfedge index.

        The corner at the origin of halfedge ``h`` faces ``next(h)``.
        """
        h = corner.halfedge if isinstance(corner, Corner) else int(corner)
        a = self.halfedge_length(next_he(h))
        b = self.halfedge_length(h)
        c = self.halfedge_length(prev_he(h))
        return triangle_angle(a, b, c)

    def opposite_angle(self, h):
        """Angle opposite halfedge ``h`` within its face."""
        return self.corner_angle(prev_he(h))

    def opposite_cot(self, h):
        a = self.halfedge_length(h)
        b = self.halfedge_length(next_he(h))
        c = self.halfedge_length(prev_he(h))
        return triangle_cot(a, b, c)

    def corner_angles(self):
        """Angle at the origin of every halfedge."""
        L = self.length[self.edge].reshape(-1, 3)
        a = np.roll(L, -1, axis=1)  # opposite: next halfedge
        b = L
        c = np.roll(L, 1, axis=1)
        x = (a - b + c) * (a + b - c)
        y = (a + b + c) * (b + c - a)
        with np.errstate(invalid="ignore"):
            ang = 2.0 * np.arctan2(np.sqrt(np.maximum(x, 0.0)), np.sqrt(np.maximum(y, 0.0)))
        return ang.reshape(-1)

    def opposite_cots(self):
        """Cotangent of the angle opposite every halfedge.

        Raises DegenerateFace if any face has no area.
        """
        L = self.length[self.edge].reshape(-1, 3)
        areas = np.array([heron_area(*row) for row in L])
        if (areas <= 0).any():
            f = int(np.flatnonzero(areas <= 0)[0])
            raise DegenerateFace(f"face {f} has lengths {L[f].tolist()}")
        a = L
        b = np.roll(L, -1, axis=1)
        c = np.roll(L, 1, axis=1)
        return ((b * b + c * c - a * a) / (4.0 * areas[:, None])).reshape(-1)

    def cotan_weights(self):
        """Per-edge weight: (cot a + cot b) / 2, or cot a / 2 on the boundary."""
        w = np.zeros(self.n_edges)
        np.add.at(w, self.edge, 0.5 * self.opposite_cots())
        return w

    def cone_angle(self, v):
        """Total angle at ``v``: 2*pi at flat interior points."""
        hs = np.flatnonzero(self.origin == v)
        return float(math.fsum(self.corner_angle(int(h)) for h in hs))

    def cone_angles(self):
        out = np.zeros(self.n_vertices)
        np.add.at(out, self.origin, self.corner_angles())
        return out

    def cone_points(self, tol=ANGLE_TOL):
        """Interior vertices whose cone angle differs from 2*pi."""
        ang = self.cone_angles()
        interior = ~self.boundary_vertex_mask()
        return np.flatnonzero(interior & (np.abs(ang - 2 * math.pi) > tol))

    def __repr__(self):
        return (f"PiecewiseFlatSurface(V={self.n_vertices}, E={self.n_edges}, "
                f"F={self.n_faces}, chi={self.euler_characteristic()})")


def from_embedding(mesh):
    """Intrinsic surface of an embedded triangle mesh.

    Edge lengths are Euclidean endpoint distances. Faces are re-oriented
    coherently if needed.
    """
    if not isinstance(mesh, EmbeddedMesh):
        mesh = EmbeddedMesh(*mesh)
    mesh.check()
    faces = _orient_faces(mesh.faces)
    p = mesh.positions

    def dist(i, j):
        d = p[i] - p[j]
        return math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])

    s = PiecewiseFlatSurface.from_faces(faces, dist, n_vertices=mesh.n_vertices)
    for f in range(s.n_faces):
        if is_degenerate(*s.face_lengths(f)):
            raise DegenerateFace(f"face {f} is degenerate")
    return s


@dataclass
class ValidationReport:
    triangle_violations: list = field(default_factory=list)
    degenerate_faces: list = field(default_factory=list)
    nonmanifold_vertices: list = field(default_factory=list)
    n_components: int = 0
    total_area: float = 0.0
    cone_points: list = field(default_factory=list)
    euler_characteristic: int = 0
    warnings: list = field(default_factory=list)

    @property
    def ok(self):
        return not (self.triangle_violations or self.degenerate_faces or self.nonmanifold_vertices)

    def to_dict(self):
        return {
            "ok": self.ok,
            "triangle_violations": self.triangle_violations,
            "degenerate_faces": self.degenerate_faces,
            "nonmanifold_vertices": self.nonmanifold_vertices,
            "n_components": self.n_components,
            "total_area": self.total_area,
            "cone_points": self.cone_points,
            "euler_characteristic": self.euler_characteristic,
            "warnings": self.warnings,
        }


def validate(s, angle_tol=ANGLE_TOL):
    """Report-only consistency check of a surface."""
    rep = ValidationReport(euler_characteristic=s.euler_characteristic())
    for f in range(s.n_faces):
        lens = s.face_lengths(f)
        if not satisfies_triangle_inequality(*lens):
            rep.triangle_violations.append({"face": f, "lengths": list(lens)})
        elif is_degenerate(*lens):
            rep.degenerate_faces.append(f)
    used = np.zeros(s.n_vertices, dtype=bool)
    used[s.origin] = True
    for v in range(s.n_vertices):
        if used[v] and len(s.vertex_fans(v)) > 1:
            rep.nonmanifold_vertices.append(v)
    if (~used).any():
        rep.warnings.append(f"{int((~used).sum())} isolated vertices")
    rep.n_components = int(s.face_components().max() + 1) if s.n_faces else 0
    if rep.n_components > 1:
        rep.warnings.append(f"surface is disconnected ({rep.n_components} components)")
    if not rep.triangle_violations:
        rep.total_area = s.total_area()
        ang = s.cone_angles()
        interior = ~s.boundary_vertex_mask() & used
        rep.cone_points = np.flatnonzero(interior & (np.abs(ang - 2 * math.pi) > angle_tol)).tolist()
    return rep
