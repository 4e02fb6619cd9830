"""Intrinsic Delaunay triangulations by edge flipping."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BoundaryEdge, DegenerateFace, FlipBudgetExceeded, NotDelaunay, NotFlippable
from .surface import heron_area, next_he, prev_he

#: Edges are flipped when cot(a) + cot(b) < -DELAUNAY_EPS.
DELAUNAY_EPS = 1e-12


@dataclass
class FlipRecord:
    edge: int
    old_endpoints: tuple
    new_endpoints: tuple
    old_length: float
    new_length: float
    ordinal: int

    def to_dict(self):
        d = asdict(self)
        d["old_endpoints"] = list(self.old_endpoints)
        d["new_endpoints"] = list(self.new_endpoints)
        return d


def _interior_halfedge(s, e):
    h = int(s.edge_half[e])
    if s.twin[h] < 0:
        raise BoundaryEdge(f"edge {e} lies on the boundary")
    return h, int(s.twin[h])


def opposite_angle_sum(s, e):
    """Sum of the two angles opposite interior edge ``e``."""
    h, t = _interior_halfedge(s, e)
    return s.opposite_angle(h) + s.opposite_angle(t)


def cot_sum(s, e):
    """cot(a) + cot(b) for the angles opposite interior edge ``e``."""
    h, t = _interior_halfedge(s, e)
    return s.opposite_cot(h) + s.opposite_cot(t)


def is_locally_delaunay(s, e, eps=0.0):
    """True iff the angles opposite ``e`` sum to at most pi + eps."""
    return opposite_angle_sum(s, e) <= math.pi + eps


def is_flippable(s, e):
    """Whether the two triangles at ``e`` are distinct and form a strictly convex quad."""
    h, t = _interior_halfedge(s, e)
    if h // 3 == t // 3:
        return False
    at_u = s.corner_angle(h) + s.corner_angle(next_he(t))
    at_v = s.corner_angle(next_he(h)) + s.corner_angle(t)
    return at_u < math.pi and at_v < math.pi


def _apex(base, d_origin, d_tip, area):
    # apex of a triangle over the segment (0,0)-(base,0), above the axis
    x = (base * base + d_origin * d_origin - d_tip * d_tip) / (2.0 * base)
    return x, 2.0 * area / base


def flipped_length(s, e):
    """Length of the other diagonal of the quad around ``e``, by planar layout."""
    h, t = _interior_halfedge(s, e)
    base = s.halfedge_length(h)
    # face of h: u -> v -> w; apex w placed above the axis
    la = s.face_lengths(h // 3)
    wx, wy = _apex(base, s.halfedge_length(prev_he(h)), s.halfedge_length(next_he(h)), heron_area(*la))
    # face of t: v -> u -> x; apex x placed below the axis
    lb = s.face_lengths(t // 3)
    xx, xy = _apex(base, s.halfedge_length(next_he(t)), s.halfedge_length(prev_he(t)), heron_area(*lb))
    return math.hypot(wx - xx, wy + xy)


def flip_edge(s, e, check=True):
    """Replace interior edge ``e`` by the other diagonal of its quad, in place.

    The edge keeps its id. Returns a :class:`FlipRecord`.
    """
    if check and not is_flippable(s, e):
        raise NotFlippable(f"edge {e} cannot be flipped")
    h, t = _interior_halfedge(s, e)
    hn, hp = next_he(h), prev_he(h)
    tn, tp = next_he(t), prev_he(t)
    u, v = int(s.origin[h]), int(s.origin[hn])
    w, x = int(s.origin[hp]), int(s.origin[tp])
    old_len = float(s.length[e])
    new_len = flipped_length(s, e)

    # old slot -> new slot for the four quad sides
    moved = {tp: hn, hn: hp, hp: tn, tn: tp}
    old = {k: (int(s.origin[k]), int(s.edge[k]), int(s.twin[k])) for k in moved}
    for src, dst in moved.items():
        o, ed, tw = old[src]
        s.origin[dst] = o
        s.edge[dst] = ed
        s.twin[dst] = moved.get(tw, tw)
    s.origin[h], s.origin[t] = w, x
    s.twin[h], s.twin[t] = t, h
    for dst in moved.values():
        tw = int(s.twin[dst])
        if tw >= 0 and tw not in (h, hn, hp, t, tn, tp):
            s.twin[tw] = dst
        s.edge_half[s.edge[dst]] = dst
    s.edge_half[e] = h
    s.length[e] = new_len

    rec = FlipRecord(int(e), (u, v), (w, x), old_len, new_len, s.flip_count)
    s.edge_origin[e] = s.flip_count
    s.flip_count += 1
    return rec


def flip_to_delaunay(s, eps=DELAUNAY_EPS, max_flips=None, on_flip=None):
    """Flip non-Delaunay edges until every interior edge is locally Delaunay.

    Edges are processed from a FIFO queue seeded with all interior edges in
    id order; after a flip the four sides of the quad are re-queued.

    Parameters
    ----------
    s : PiecewiseFlatSurface
        Modified in place.
    eps : float
        An edge is flipped when ``cot a + cot b < -eps``.
    max_flips : int, optional
        Defaults to ``100 * s.n_edges``.
    on_flip : callable, optional
        Called as ``on_flip(s, record)`` after every flip.

    Returns
    -------
    list of FlipRecord
    """
    if max_flips is None:
        max_flips = 100 * s.n_edges
    interior = ~s.boundary_edge_mask()
    queue = deque(int(e) for e in np.flatnonzero(interior))
    queued = interior.copy()
    log = []
    while queue:
        e = queue.popleft()
        queued[e] = False
        h = int(s.edge_half[e])
        t = int(s.twin[h])
        if s.opposite_cot(h) + s.opposite_cot(t) >= -eps:
            continue
        if len(log) >= max_flips:
            raise FlipBudgetExceeded(f"exceeded {max_flips} flips")
        log.append(flip_edge(s, e, check=False))
        if on_flip is not None:
            on_flip(s, log[-1])
        for g in (next_he(h), prev_he(h), next_he(t), prev_he(t)):
            f = int(s.edge[g])
            if interior[f] and not queued[f]:
                queued[f] = True
                queue.append(f)
    return log


def is_delaunay(s, eps=DELAUNAY_EPS):
    return all(cot_sum(s, e) >= -eps for e in s.interior_edges())


def min_angle_slack(s):
    """min over interior edges of (pi - opposite angle sum); +inf without interior edges."""
    ang = s.corner_angles()
    slack = math.inf
    for e in s.interior_edges():
        h = int(s.edge_half[e])
        t = int(s.twin[h])
        slack = min(slack, math.pi - ang[prev_he(h)] - ang[prev_he(t)])
    return slack


def harmonic_index(s):
    """Sum over faces of (a^2 + b^2 + c^2) / area."""
    total = []
    for f in range(s.n_faces):
        a, b, c = s.face_lengths(f)
        area = heron_area(a, b, c)
        if area <= 0.0:
            raise DegenerateFace(f"face {f} is degenerate")
        total.append((a * a + b * b + c * c) / area)
    return math.fsum(total)


def harmonic_index_cot(s):
    """The same quantity as :func:`harmonic_index`, via 4 * sum of corner cotangents."""
    return 4.0 * math.fsum(s.opposite_cots())


def squared_circumradii(s):
    """Sum of squared circumradii (diagnostic only): R = abc / 4A."""
    total = []
    for f in range(s.n_faces):
        a, b, c = s.face_lengths(f)
        area = heron_area(a, b, c)
        total.append((a * b * c / (4.0 * area)) ** 2)
    return math.fsum(total)


def intrinsic_edges(s):
    """Edge list as dicts ``{i, j, length, origin}``; origin is "input" or a flip ordinal."""
    pairs = s.edge_pairs()
    out = []
    for e in range(s.n_edges):
        o = int(s.edge_origin[e])
        out.append({
            "edge": e,
            "i": int(pairs[e, 0]),
            "j": int(pairs[e, 1]),
            "length": float(s.length[e]),
            "origin": "input" if o < 0 else o,
        })
    return out


@dataclass
class TessellationCells:
    """Polygonal cells of a Delaunay tessellation.

    ``cells[k]`` is a cyclic list of ``(vertex, edge)`` pairs: each vertex is
    followed by the edge leaving it along the cell boundary. ``face_cell[f]``
    is the cell owning triangle ``f``.
    """

    cells: list
    face_cell: np.ndarray
    merged_edges: list

    def sizes(self):
        return [len(c) for c in self.cells]

    def to_dict(self):
        return {
            "cells": [[[int(v), int(e)] for v, e in c] for c in self.cells],
            "face_cell": self.face_cell.tolist(),
            "merged_edges": [int(e) for e in self.merged_edges],
        }


def default_merge_eps(weights):
    mean = float(np.mean(np.abs(weights))) if len(weights) else 0.0
    return 1e-10 * mean if mean > 0 else 1e-12


def extract_tessellation(s, merge_eps=None):
    """Merge triangles across interior edges of (near-)zero cotan weight."""
    w = s.cotan_weights()
    if merge_eps is None:
        merge_eps = default_merge_eps(w)
    interior = ~s.boundary_edge_mask()
    bad = np.flatnonzero(interior & (w < -merge_eps))
    if len(bad):
        raise NotDelaunay(f"edge {int(bad[0])} has negative weight {w[bad[0]]:.3g}")
    merged = interior & (np.abs(w) <= merge_eps)

    parent = list(range(s.n_faces))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in np.flatnonzero(merged):
        h = int(s.edge_half[e])
        a, b = find(h // 3), find(int(s.twin[h]) // 3)
        if a != b:
            parent[max(a, b)] = min(a, b)

    roots = [find(f) for f in range(s.n_faces)]
    label = {}
    face_cell = np.array([label.setdefault(r, len(label)) for r in roots], dtype=np.int64)

    cells = [[] for _ in label]
    visited = np.zeros(s.n_halfedges, dtype=bool)
    for h0 in range(s.n_halfedges):
        if visited[h0] or merged[s.edge[h0]]:
            continue
        cycle = []
        h = h0
        while not visited[h]:
            visited[h] = True
            cycle.append((int(s.origin[h]), int(s.edge[h])))
            n = next_he(h)
            while merged[s.edge[n]]:
                n = next_he(int(s.twin[n]))
            h = n
        cells[face_cell[h0 // 3]].extend(cycle)
    return TessellationCells(cells, face_cell, [int(e) for e in np.flatnonzero(merged)])
