"""ASCII OFF reading and writing.

Vertex lines may carry any fixed number of coordinates (3 for R^3, 4 for
surfaces in S^3 stored in R^4); all faces must be triangles.
"""

from __future__ import annotations

import os

import numpy as np

from .mesh import ImmersedMesh

__all__ = ["read_off", "write_off", "parse_off", "format_off"]


def _tokens(text: str):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line


def parse_off(text: str) -> ImmersedMesh:
    try:
        return _parse(_tokens(text))
    except StopIteration:
        raise ValueError("OFF data ends early") from None
    except (IndexError, TypeError) as exc:
        raise ValueError(f"malformed OFF data: {exc}") from None


def _parse(lines) -> ImmersedMesh:
    header = next(lines, None)
    if header is None or not header.upper().startswith("OFF"):
        raise ValueError("missing OFF header")
    rest = header[3:].split()
    counts = rest if rest else next(lines).split()
    nv, nf = int(counts[0]), int(counts[1])
    verts = []
    for _ in range(nv):
        verts.append([float(x) for x in next(lines).split()])
    if len({len(v) for v in verts}) > 1:
        raise ValueError("vertex lines have inconsistent coordinate counts")
    faces = []
    for _ in range(nf):
        parts = next(lines).split()
        if int(parts[0]) != 3:
            raise ValueError("only triangle faces are supported")
        faces.append([int(p) for p in parts[1:4]])
    return ImmersedMesh(np.array(verts), np.array(faces, dtype=np.int64).reshape(-1, 3))


def format_off(mesh: ImmersedMesh) -> str:
    out = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {len(mesh.edges)}"]
    out += [" ".join(repr(float(c)) for c in v) for v in mesh.vertices]
    out += [f"3 {a} {b} {c}" for a, b, c in mesh.faces]
    return "\n".join(out) + "\n"


def read_off(path: str | os.PathLike) -> ImmersedMesh:
    with open(path, "r", encoding="ascii") as fh:
        return parse_off(fh.read())


def write_off(mesh: ImmersedMesh, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_off(mesh))
