"""Reading and writing meshes (OFF, OBJ) and JSON reports."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import NonTriangleFace, ParseError, ValidationError
from .surface import EmbeddedMesh

SCHEMA_VERSION = 1


class _Tokens:
    """Whitespace tokens of a text file with their 1-based line and column."""

    def __init__(self, text, comment="#"):
        self.items = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            cut = line.find(comment)
            if cut >= 0:
                line = line[:cut]
            col = 0
            for tok in line.split():
                col = line.index(tok, col)
                self.items.append((tok, lineno, col + 1))
                col += len(tok)
        self.pos = 0
        self.last_line = max(1, text.count("\n") + 1)

    def next(self, what):
        if self.pos >= len(self.items):
            raise ParseError(f"unexpected end of file, expected {what}", self.last_line, 1)
        tok = self.items[self.pos]
        self.pos += 1
        return tok

    def int(self, what):
        tok, line, col = self.next(what)
        try:
            return int(tok), line, col
        except ValueError:
            raise ParseError(f"expected integer {what}, got {tok!r}", line, col) from None

    def float(self, what):
        tok, line, col = self.next(what)
        try:
            x = float(tok)
        except ValueError:
            raise ParseError(f"expected number {what}, got {tok!r}", line, col) from None
        if not np.isfinite(x):
            raise ParseError(f"non-finite coordinate {tok!r}", line, col)
        return x


def _read_off(text):
    tk = _Tokens(text)
    head, line, col = tk.next("OFF header")
    if head != "OFF":
        raise ParseError(f"expected 'OFF', got {head!r}", line, col)
    nv, line, col = tk.int("vertex count")
    nf, _, _ = tk.int("face count")
    tk.int("edge count")
    if nv < 0 or nf < 0:
        raise ParseError("negative element count", line, col)
    pos = np.array([[tk.float("coordinate") for _ in range(3)] for _ in range(nv)]).reshape(nv, 3)
    faces = []
    for _ in range(nf):
        k, line, col = tk.int("face size")
        if k != 3:
            raise NonTriangleFace(f"face with {k} vertices at line {line}")
        face = []
        for _ in range(3):
            v, line, col = tk.int("vertex index")
            if not 0 <= v < nv:
                raise ParseError(f"vertex index {v} out of range", line, col)
            face.append(v)
        faces.append(face)
    if tk.pos < len(tk.items):
        _, line, col = tk.items[tk.pos]
        raise ParseError("trailing data after last face", line, col)
    return pos, faces


def _read_obj(text):
    pos, faces = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            if len(parts) < 4:
                raise ParseError("vertex needs three coordinates", lineno, 1)
            try:
                pos.append([float(x) for x in parts[1:4]])
            except ValueError:
                raise ParseError(f"bad coordinate in {line.strip()!r}", lineno, 1) from None
        elif parts[0] == "f":
            if len(parts) != 4:
                raise NonTriangleFace(f"face with {len(parts) - 1} vertices at line {lineno}")
            face = []
            for tok in parts[1:]:
                col = raw.index(tok) + 1
                try:
                    v = int(tok.split("/")[0])
                except ValueError:
                    raise ParseError(f"bad vertex index {tok!r}", lineno, col) from None
                v = v - 1 if v > 0 else len(pos) + v
                if not 0 <= v < len(pos):
                    raise ParseError(f"vertex index {tok!r} out of range", lineno, col)
                face.append(v)
            faces.append(face)
    if not np.all(np.isfinite(pos)):
        raise ParseError("non-finite coordinate", 1, 1)
    return np.array(pos, dtype=float).reshape(-1, 3), faces


def detect_format(path):
    ext = Path(path).suffix.lower()
    if ext in (".off", ".obj"):
        return ext[1:]
    raise ValidationError(f"cannot infer mesh format from {str(path)!r}; use .off or .obj")


def parse_mesh(text, fmt):
    """Parse OFF or OBJ text into a checked :class:`EmbeddedMesh`."""
    if fmt == "off":
        pos, faces = _read_off(text)
    elif fmt == "obj":
        pos, faces = _read_obj(text)
    else:
        raise ValidationError(f"unknown format {fmt!r}")
    if not faces:
        raise ValidationError("mesh has no faces")
    mesh = EmbeddedMesh(pos, faces)
    mesh.check()
    return mesh


def load_mesh(path, format=None):
    """Read a triangle mesh; the format defaults to the file extension."""
    fmt = format or detect_format(path)
    return parse_mesh(Path(path).read_text(), fmt)


def format_off(mesh):
    """OFF text with 17 significant digits, so reading it back is exact."""
    lines = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} 0"]
    lines += [" ".join(f"{x:.17g}" for x in p) for p in mesh.positions]
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.faces]
    return "\n".join(lines) + "\n"


def save_off(mesh, path):
    write_text(path, format_off(mesh))


def to_builtin(obj):
    """Recursively convert numpy containers and scalars to plain Python."""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_builtin(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def report(kind, payload):
    """Versioned JSON-ready report; keys keep insertion order."""
    out = {"schema_version": SCHEMA_VERSION, "kind": kind}
    out.update(to_builtin(payload))
    return out


def dumps(obj):
    return json.dumps(obj, indent=2, allow_nan=False)


def load_boundary_values(path):
    """Read a JSON map ``{vertex_index: value}``; values may be numbers or 3-lists.

    Returns
    -------
    vertices : ndarray of int
    values : ndarray
        Shape (k,) or (k, d).
    """
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ValidationError("boundary file must be a JSON object {vertex: value}")
    try:
        items = sorted((int(k), v) for k, v in data.items())
    except ValueError:
        raise ValidationError("boundary keys must be vertex indices") from None
    verts = np.array([k for k, _ in items], dtype=np.int64)
    vals = np.array([v for _, v in items], dtype=float)
    return verts, vals


def write_text(path, text):
    if path is None or path == "-":
        return False
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    Path(path).write_text(text)
    return True
