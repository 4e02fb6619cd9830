import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idtlab import shapes
from idtlab.errors import IncompatibleData, NotDelaunay, ValidationError
from idtlab.idt import flip_edge, flip_to_delaunay
from idtlab.laplace import (
    apply_laplace,
    assemble,
    check_harmonic_hull,
    delaunay_graph,
    dirichlet_energy,
    edge_weight,
    solve_dirichlet,
    solve_neumann,
)
from idtlab.oracle import pl_energy_mesh
from idtlab.surface import EmbeddedMesh, PiecewiseFlatSurface, from_embedding


def _edge(s, i, j):
    return next(e for e in range(s.n_edges) if set(map(int, s.endpoints(e))) == {i, j})


def _graph(mesh):
    return delaunay_graph(from_embedding(mesh))[0]


def test_edge_weight_examples():
    sq = from_embedding(shapes.unit_square())
    assert edge_weight(sq, _edge(sq, 0, 2)) == pytest.approx(0.0, abs=1e-15)
    assert edge_weight(sq, _edge(sq, 0, 1)) == pytest.approx(0.5, abs=1e-15)
    kite = from_embedding(shapes.kite())
    e = _edge(kite, 0, 2)
    assert edge_weight(kite, e) == pytest.approx(-0.25, abs=1e-12)
    flip_edge(kite, e)
    assert edge_weight(kite, e) == pytest.approx(0.25, abs=1e-12)


def test_assemble_examples():
    w = _graph(shapes.cube())
    lengths = np.linalg.norm(shapes.cube().positions[w.edges[:, 0]] - shapes.cube().positions[w.edges[:, 1]], axis=1)
    assert w.weights[lengths < 1.2] == pytest.approx(np.ones(12), abs=1e-12)
    assert w.weights[lengths > 1.2] == pytest.approx(np.zeros(6), abs=1e-12)
    fan = _graph(shapes.hex_fan())
    hub = (fan.edges == 0).any(axis=1)
    assert fan.weights[hub] == pytest.approx(np.full(6, 1 / math.sqrt(3)), abs=1e-12)


def test_assemble_rejects_non_delaunay():
    kite = from_embedding(shapes.kite())
    with pytest.raises(NotDelaunay):
        assemble(kite)
    assert assemble(kite, check=False).weights.min() == pytest.approx(-0.25)


def test_apply_laplace_examples():
    sq = _graph(shapes.unit_square())
    assert apply_laplace(sq, np.full(4, 3.7)) == pytest.approx(np.zeros(4), abs=1e-15)
    assert apply_laplace(sq, [1.0, 0, 0, 0])[0] == pytest.approx(1.0, abs=1e-15)
    cube = _graph(shapes.cube())
    assert apply_laplace(cube, shapes.cube().positions)[0] == pytest.approx([-1, -1, -1], abs=1e-12)


def test_dirichlet_energy_examples():
    eq = assemble(PiecewiseFlatSurface.from_faces([[0, 1, 2]], lambda i, j: 1.0))
    assert dirichlet_energy(eq, [1.0, 0, 0]) == pytest.approx(math.sqrt(3) / 6, rel=1e-14)
    assert dirichlet_energy(eq, [2.0, 2.0, 2.0]) == 0.0
    sq = from_embedding(shapes.unit_square())
    f = [1.0, 0, 0, 0]
    e1 = dirichlet_energy(assemble(sq), f)
    flip_edge(sq, _edge(sq, 0, 2))
    e2 = dirichlet_energy(assemble(sq), f)
    assert e1 == pytest.approx(0.5, abs=1e-15)
    assert e2 == pytest.approx(0.5, abs=1e-15)


def test_energy_equals_pl_energy():
    rng = np.random.default_rng(0)
    mesh = shapes.random_planar_mesh(rng, 20)
    s = from_embedding(mesh)
    f = rng.normal(size=mesh.n_vertices)
    direct = pl_energy_mesh(mesh.positions, mesh.faces, f)
    assert dirichlet_energy(assemble(s, check=False), f) == pytest.approx(direct, rel=1e-10)


def test_dirichlet_linear_on_grid():
    mesh = shapes.grid(3, 3)
    w = _graph(mesh)
    bnd = mesh.boundary_vertices()
    assert len(bnd) == 12
    x = mesh.positions[:, 0]
    f = solve_dirichlet(w, bnd, x[bnd])
    assert f == pytest.approx(x, abs=1e-9)
    assert check_harmonic_hull(w, f) == []


def test_dirichlet_constant():
    mesh = shapes.grid(4, 2)
    bnd = mesh.boundary_vertices()
    f = solve_dirichlet(_graph(mesh), bnd, np.full(len(bnd), 2.5))
    assert f == pytest.approx(np.full(mesh.n_vertices, 2.5), abs=1e-12)


def test_dirichlet_cube_antipodal():
    # by symmetry the neighbours of the 0-corner share a value a, the others b;
    # a = 2b / 3 and b = (1 + 2a) / 3 give a = 2/5, b = 3/5
    w = _graph(shapes.cube())
    f = solve_dirichlet(w, [0, 7], [0.0, 1.0])
    assert f[[1, 2, 4]] == pytest.approx([0.4] * 3, abs=1e-12)
    assert f[[3, 5, 6]] == pytest.approx([0.6] * 3, abs=1e-12)
    assert np.all((f[1:7] > 0) & (f[1:7] < 1))


def test_dirichlet_no_free_vertices_returns_data():
    w = _graph(shapes.unit_square())
    assert solve_dirichlet(w, [0, 1, 2, 3], [1.0, 2, 3, 4]).tolist() == [1, 2, 3, 4]


def test_dirichlet_input_errors():
    w = _graph(shapes.unit_square())
    with pytest.raises(ValidationError):
        solve_dirichlet(w, [], [])
    with pytest.raises(ValidationError):
        solve_dirichlet(w, [0, 1], [1.0])
    with pytest.raises(ValidationError):
        solve_dirichlet(w, [0], [math.nan])


def test_dirichlet_vector_data():
    mesh = shapes.grid(3, 3)
    w = _graph(mesh)
    bnd = mesh.boundary_vertices()
    f = solve_dirichlet(w, bnd, mesh.positions[bnd])
    assert f == pytest.approx(mesh.positions, abs=1e-12)


def test_neumann_examples():
    w = _graph(shapes.cube())
    assert solve_neumann(w, [0, 7], [0.0, 0.0]) == pytest.approx(np.zeros(8), abs=1e-15)
    f = solve_neumann(w, [0, 7], [1.0, -1.0])
    lap = apply_laplace(w, f)
    assert lap[[0, 7]] == pytest.approx([1.0, -1.0], abs=1e-10)
    assert lap[1:7] == pytest.approx(np.zeros(6), abs=1e-10)
    assert f.mean() == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(IncompatibleData):
        solve_neumann(w, [0], [1.0])


def test_hull_spike():
    mesh = shapes.grid(2, 2)
    w = _graph(mesh)
    f = np.zeros(mesh.n_vertices)
    f[4] = 1.0
    assert check_harmonic_hull(w, f) == [4]


def test_hull_vector_field():
    mesh = shapes.grid(2, 2)
    w = _graph(mesh)
    X = mesh.positions.copy()
    assert check_harmonic_hull(w, X) == []
    X[4, 2] = 0.3
    assert check_harmonic_hull(w, X) == [4]


def test_triangulation_independence():
    rng = np.random.default_rng(5)
    a = from_embedding(shapes.unit_square())
    b = a.copy()
    flip_edge(b, _edge(b, 0, 2))
    wa, wb = assemble(a), assemble(b)
    for _ in range(10):
        f = rng.normal(size=4)
        assert apply_laplace(wa, f) == pytest.approx(apply_laplace(wb, f), abs=1e-12)


def test_weights_nonnegative_after_flipping():
    rng = np.random.default_rng(6)
    for _ in range(20):
        s = from_embedding(shapes.random_planar_mesh(rng, 25))
        flip_to_delaunay(s)
        shapes.random_flips(s, rng, 5)
        assert s.cotan_weights()[~s.boundary_edge_mask()].min() < 0
        flip_to_delaunay(s)
        assert s.cotan_weights()[~s.boundary_edge_mask()].min() >= -1e-12


def test_rippa_consistency_on_kite():
    rng = np.random.default_rng(7)
    s = from_embedding(shapes.kite())
    before = assemble(s, check=False)
    flip_to_delaunay(s)
    after = assemble(s)
    for _ in range(50):
        f = rng.normal(size=4)
        assert dirichlet_energy(after, f) <= dirichlet_energy(before, f) + 1e-12


def test_disconnected_neumann():
    pos = [[0, 0], [1, 0], [0, 1], [5, 0], [6, 0], [5, 1]]
    w = _graph(EmbeddedMesh(pos, [[0, 1, 2], [3, 4, 5]]))
    f = solve_neumann(w, [0, 1, 3, 4], [1.0, -1.0, 2.0, -2.0])
    assert f[:3].mean() == pytest.approx(0, abs=1e-14)
    assert f[3:].mean() == pytest.approx(0, abs=1e-14)
    assert apply_laplace(w, f) == pytest.approx([1, -1, 0, 2, -2, 0], abs=1e-10)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_symmetry_and_positivity(seed):
    rng = np.random.default_rng(seed)
    w = _graph(shapes.random_convex_polytope(rng, 15))
    f, h = rng.normal(size=(2, w.n_vertices))
    lhs, rhs = apply_laplace(w, f) @ h, f @ apply_laplace(w, h)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
    assert dirichlet_energy(w, f) >= 0
    assert apply_laplace(w, np.ones(w.n_vertices)) == pytest.approx(np.zeros(w.n_vertices), abs=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_dirichlet_solution_minimizes_energy(seed):
    rng = np.random.default_rng(seed)
    mesh = shapes.random_planar_mesh(rng, 20)
    w = _graph(mesh)
    bnd = np.flatnonzero(w.boundary)
    f = solve_dirichlet(w, bnd, rng.normal(size=len(bnd)))
    free = np.flatnonzero(w.interior)
    if not len(free):
        return
    delta = np.zeros_like(f)
    delta[free] = rng.normal(size=len(free)) * 1e-3
    assert dirichlet_energy(w, f + delta) > dirichlet_energy(w, f)
    assert check_harmonic_hull(w, f) == []
