import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idtlab import shapes
from idtlab.errors import DegenerateFace, NonManifoldInput, ValidationError
from idtlab.surface import (
    Corner,
    EmbeddedMesh,
    PiecewiseFlatSurface,
    from_embedding,
    heron_area,
    triangle_angle,
    validate,
)


def _pair_lengths(s):
    return {tuple(sorted(map(int, p))): float(l) for p, l in zip(s.edge_pairs(), s.length)}


def test_unit_square_edges():
    s = from_embedding(shapes.unit_square())
    assert s.n_edges == 5
    assert sorted(s.length) == pytest.approx([1, 1, 1, 1, math.sqrt(2)], abs=0)


def test_cube_edges():
    s = from_embedding(shapes.cube())
    assert s.n_edges == 18
    assert np.sum(s.length == 1.0) == 12
    assert np.sum(s.length == math.sqrt(2)) == 6


def test_repeated_vertex_is_degenerate():
    mesh = EmbeddedMesh([[0, 0], [1, 0], [0, 1]], [[1, 1, 2]])
    with pytest.raises(DegenerateFace):
        from_embedding(mesh)


def test_collinear_face_is_degenerate():
    mesh = EmbeddedMesh([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]])
    with pytest.raises(DegenerateFace):
        from_embedding(mesh)


def test_edge_with_three_faces_rejected():
    pos = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]]
    mesh = EmbeddedMesh(pos, [[0, 1, 2], [1, 0, 3], [0, 1, 4]])
    with pytest.raises(NonManifoldInput):
        from_embedding(mesh)


def test_face_index_out_of_range():
    with pytest.raises(ValidationError):
        EmbeddedMesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 3]])


def test_inconsistent_orientation_is_repaired():
    pos = [[0, 0], [1, 0], [1, 1], [0, 1]]
    s = from_embedding(EmbeddedMesh(pos, [[0, 1, 2], [0, 3, 2]]))
    assert s.n_edges == 5
    assert np.sum(s.twin >= 0) == 2


def test_corner_angles_examples():
    eq = PiecewiseFlatSurface.from_faces([[0, 1, 2]], lambda i, j: 1.0)
    for k in range(3):
        assert eq.corner_angle(Corner(0, k)) == pytest.approx(math.pi / 3, abs=1e-15)
    assert triangle_angle(math.sqrt(2), 1.0, 1.0) == pytest.approx(math.pi / 2, abs=1e-15)


def test_kite_corner_at_b():
    # triangle A, B, C of the kite; corner index 1 is B
    s = from_embedding(EmbeddedMesh(shapes.KITE[:3], [[0, 1, 2]]))
    assert sorted(s.face_lengths(0)) == pytest.approx([2, 2, 2 * math.sqrt(2)])
    assert s.corner_angle(Corner(0, 1)) == pytest.approx(math.pi / 2, abs=1e-14)


def test_cone_angles():
    fan = from_embedding(shapes.hex_fan())
    assert fan.cone_angle(0) == pytest.approx(2 * math.pi, abs=1e-12)
    cube = from_embedding(shapes.cube())
    assert cube.cone_angles() == pytest.approx(np.full(8, 1.5 * math.pi), abs=1e-12)
    sq = from_embedding(shapes.unit_square())
    assert sq.cone_angle(1) == pytest.approx(math.pi / 2, abs=1e-15)
    assert sq.cone_angle(0) == pytest.approx(math.pi / 2, abs=1e-15)


def test_validate_cube():
    rep = validate(from_embedding(shapes.cube()))
    assert rep.ok
    assert rep.total_area == pytest.approx(6.0, rel=1e-14)
    assert len(rep.cone_points) == 8
    assert rep.euler_characteristic == 2
    assert rep.n_components == 1


def test_validate_triangle_inequality_violation():
    s = PiecewiseFlatSurface.from_faces([[0, 1, 2]], {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 3.0})
    rep = validate(s)
    assert not rep.ok
    assert rep.triangle_violations[0]["face"] == 0


def test_validate_two_triangles_warns():
    pos = [[0, 0], [1, 0], [0, 1], [5, 0], [6, 0], [5, 1]]
    rep = validate(from_embedding(EmbeddedMesh(pos, [[0, 1, 2], [3, 4, 5]])))
    assert rep.n_components == 2
    assert any("disconnected" in w for w in rep.warnings)


def test_self_glued_triangle():
    s = shapes.self_glued_triangle(side=1.0, base=0.5)
    apex = triangle_angle(0.5, 1.0, 1.0)
    assert s.n_edges == 2
    assert s.euler_characteristic() == 1
    assert s.boundary_vertex_mask().tolist() == [True, False]
    assert s.cone_angle(1) == pytest.approx(apex, abs=1e-15)
    assert s.cone_angle(0) == pytest.approx(math.pi - apex, abs=1e-15)
    assert validate(s).cone_points == [1]


def test_euler_characteristic():
    assert from_embedding(shapes.cube()).euler_characteristic() == 2
    assert from_embedding(shapes.grid(3, 2)).euler_characteristic() == 1
    mesh, _ = shapes.catenoid_rings(n_sides=8, n_rings=3)
    assert from_embedding(mesh).euler_characteristic() == 0


def test_lengths_are_exact_distances():
    rng = np.random.default_rng(0)
    mesh = shapes.random_convex_polytope(rng, 30)
    s = from_embedding(mesh)
    p = mesh.positions
    for (i, j), length in _pair_lengths(s).items():
        d = p[i] - p[j]
        assert length == math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])


def test_intrinsic_area_matches_embedding():
    rng = np.random.default_rng(1)
    for _ in range(5):
        mesh = shapes.random_convex_polytope(rng, 25)
        assert from_embedding(mesh).total_area() == pytest.approx(mesh.area(), rel=1e-12)


sides = st.floats(min_value=0.05, max_value=20.0)


@given(sides, sides, sides)
@settings(max_examples=300)
def test_angles_sum_to_pi(a, b, c):
    if not (a < b + c and b < a + c and c < a + b) or heron_area(a, b, c) < 1e-6 * max(a, b, c) ** 2:
        return
    total = triangle_angle(a, b, c) + triangle_angle(b, c, a) + triangle_angle(c, a, b)
    assert total == pytest.approx(math.pi, rel=1e-9)


@given(sides, sides, sides)
@settings(max_examples=200)
def test_heron_is_symmetric(a, b, c):
    assert heron_area(a, b, c) == pytest.approx(heron_area(c, a, b), rel=1e-12, abs=1e-300)
