import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idtlab import io, shapes
from idtlab.errors import NonTriangleFace, ParseError, ValidationError
from idtlab.surface import EmbeddedMesh

SQUARE_OFF = """OFF
# unit square
4 2 0
0 0 0
1 0 0
1 1 0
0 1 0
3 0 1 2
3 0 2 3
"""


def test_off_unit_square():
    mesh = io.parse_mesh(SQUARE_OFF, "off")
    assert mesh.n_vertices == 4 and mesh.n_faces == 2
    assert mesh.faces.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_obj_with_slashes_and_negative_indices():
    text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nvn 0 0 1\nf 1/1/1 2//1 3\nv 0 1 0\nf -4 -2 -1\n"
    mesh = io.parse_mesh(text, "obj")
    assert mesh.faces.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_obj_quad_rejected():
    with pytest.raises(NonTriangleFace):
        io.parse_mesh("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n", "obj")


def test_off_polygon_rejected():
    text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"
    with pytest.raises(NonTriangleFace):
        io.parse_mesh(text, "off")


def test_truncated_off_reports_position():
    text = SQUARE_OFF.rsplit("\n", 2)[0] + "\n3 0 2\n"
    with pytest.raises(ParseError) as info:
        io.parse_mesh(text, "off")
    assert info.value.line is not None


def test_bad_token_reports_line_and_column():
    text = SQUARE_OFF.replace("1 1 0", "1 x 0")
    with pytest.raises(ParseError) as info:
        io.parse_mesh(text, "off")
    assert (info.value.line, info.value.column) == (6, 3)


def test_off_index_out_of_range():
    with pytest.raises(ParseError):
        io.parse_mesh(SQUARE_OFF.replace("3 0 2 3", "3 0 2 7"), "off")


def test_format_detection(tmp_path):
    assert io.detect_format("a/b.OFF") == "off"
    with pytest.raises(ValidationError):
        io.detect_format("mesh.ply")
    path = tmp_path / "sq.off"
    path.write_text(SQUARE_OFF)
    assert io.load_mesh(path).n_faces == 2


def test_round_trip_cube(tmp_path):
    mesh = shapes.cube()
    path = tmp_path / "deep" / "cube.off"
    io.save_off(mesh, path)
    back = io.load_mesh(path)
    assert np.array_equal(back.positions, mesh.positions)
    assert np.array_equal(back.faces, mesh.faces)


coord = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6)


@given(st.lists(coord, min_size=9, max_size=9))
@settings(max_examples=200)
def test_round_trip_is_bit_identical(xs):
    pos = np.array(xs).reshape(3, 3)
    # any values; parsing does not check geometry
    mesh = EmbeddedMesh(pos, [[0, 1, 2]])
    pos2, faces2 = io._read_off(io.format_off(mesh))
    assert np.array_equal(np.array(pos2), pos)
    assert np.array_equal(np.asarray(pos2).view(np.int64), pos.view(np.int64))


def test_report_is_deterministic():
    rep = io.report("x", {"b": np.float64(1.5), "a": np.arange(3), "ok": np.bool_(True)})
    text = io.dumps(rep)
    assert list(json.loads(text)) == ["schema_version", "kind", "b", "a", "ok"]
    assert text == io.dumps(io.report("x", {"b": 1.5, "a": [0, 1, 2], "ok": True}))
    with pytest.raises(ValueError):
        io.dumps({"v": float("nan")})


def test_boundary_values(tmp_path):
    path = tmp_path / "b.json"
    path.write_text('{"3": 1.0, "0": 2.5}')
    verts, vals = io.load_boundary_values(path)
    assert verts.tolist() == [0, 3] and vals.tolist() == [2.5, 1.0]
    path.write_text('{"1": [0, 1, 2]}')
    assert io.load_boundary_values(path)[1].shape == (1, 3)
    path.write_text("{oops")
    with pytest.raises(ParseError):
        io.load_boundary_values(path)
    path.write_text("[1, 2]")
    with pytest.raises(ValidationError):
        io.load_boundary_values(path)
