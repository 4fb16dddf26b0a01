"""Triangulations of the unit disk and the boundary frame."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

MESH_HEADER = "STIRMESH v1"
MIN_ANGLE_DEG = 20.0
BOUNDARY_TOL = 1e-10


class MeshError(ValueError):
    pass


def polar_angle(x, y):
    """Polar angle in [0, 2pi): arccos(x/r) for y >= 0, 2pi - arccos(x/r) otherwise.

    The origin maps to 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    c = np.clip(np.divide(x, r, out=np.ones_like(r), where=r > 0), -1.0, 1.0)
    w = np.arccos(c)
    w = np.where(y >= 0.0, w, 2.0 * np.pi - w)
    return np.where(w >= 2.0 * np.pi, w - 2.0 * np.pi, w)


def boundary_frame(point) -> tuple[float, np.ndarray, np.ndarray]:
    """Return ``(omega, tau, n)`` at a point of the unit circle.

    ``tau`` is the counter-clockwise unit tangent, ``n`` the outward normal.
    """
    x, y = float(point[0]), float(point[1])
    r = np.hypot(x, y)
    if abs(r - 1.0) > BOUNDARY_TOL:
        raise MeshError(f"point ({x}, {y}) is off the unit circle (r={r})")
    w = float(polar_angle(x, y))
    return w, np.array([-np.sin(w), np.cos(w)]), np.array([np.cos(w), np.sin(w)])


def frame_from_angle(omega):
    """Vectorised tangent and normal for angles ``omega``."""
    omega = np.asarray(omega, dtype=float)
    tau = np.stack([-np.sin(omega), np.cos(omega)], axis=-1)
    nrm = np.stack([np.cos(omega), np.sin(omega)], axis=-1)
    return tau, nrm


@dataclass(eq=False)
class TriMesh:
    """Immutable triangulation of a polygonal approximation of the unit disk.

    Local edge ``k`` of a triangle is the edge opposite its local vertex ``k``.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    h: float
    edges: np.ndarray = field(init=False)
    tri_edges: np.ndarray = field(init=False)
    edge_tris: np.ndarray = field(init=False)
    adjacency: np.ndarray = field(init=False)
    edge_midpoints: np.ndarray = field(init=False)
    boundary_vertices: np.ndarray = field(init=False)
    boundary_edges: np.ndarray = field(init=False)
    boundary_omega: np.ndarray = field(init=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        tri = np.ascontiguousarray(self.triangles, dtype=np.int64)
        a = self.vertices[tri]
        signed = ((a[:, 1, 0] - a[:, 0, 0]) * (a[:, 2, 1] - a[:, 0, 1])
                  - (a[:, 2, 0] - a[:, 0, 0]) * (a[:, 1, 1] - a[:, 0, 1]))
        flip = signed < 0
        tri[flip] = tri[flip][:, [0, 2, 1]]
        self.triangles = tri
        self._build_topology()
        for name in ("vertices", "triangles", "edges", "tri_edges", "edge_tris",
                     "adjacency", "edge_midpoints", "boundary_vertices",
                     "boundary_edges", "boundary_omega"):
            getattr(self, name).setflags(write=False)

    def _build_topology(self):
        tri = self.triangles
        nt = len(tri)
        local = np.stack([tri[:, [1, 2]], tri[:, [2, 0]], tri[:, [0, 1]]], axis=1)
        keys = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse, counts = np.unique(keys, axis=0, return_inverse=True,
                                           return_counts=True)
        inverse = inverse.reshape(-1)
        if np.any(counts > 2):
            raise MeshError("non-manifold edge")
        self.edges = edges
        self.tri_edges = inverse.reshape(nt, 3)
        edge_tris = -np.ones((len(edges), 2), dtype=np.int64)
        owner = np.repeat(np.arange(nt), 3)
        order = np.argsort(inverse, kind="stable")
        first = np.ones(len(order), dtype=bool)
        first[1:] = inverse[order][1:] != inverse[order][:-1]
        edge_tris[inverse[order][first], 0] = owner[order][first]
        edge_tris[inverse[order][~first], 1] = owner[order][~first]
        self.edge_tris = edge_tris
        adj = -np.ones((nt, 3), dtype=np.int64)
        for k in range(3):
            e = self.tri_edges[:, k]
            t0, t1 = edge_tris[e, 0], edge_tris[e, 1]
            adj[:, k] = np.where(t0 == np.arange(nt), t1, t0)
        self.adjacency = adj

        mid = 0.5 * (self.vertices[edges[:, 0]] + self.vertices[edges[:, 1]])
        bnd = np.flatnonzero(edge_tris[:, 1] < 0)
        # boundary loop ordered counter-clockwise by polar angle of the midpoint
        bw = polar_angle(mid[bnd, 0], mid[bnd, 1])
        bnd = bnd[np.argsort(bw)]
        mid[bnd] /= np.hypot(mid[bnd, 0], mid[bnd, 1])[:, None]
        self.edge_midpoints = mid
        self.boundary_edges = bnd
        bv = np.unique(edges[bnd])
        w = polar_angle(self.vertices[bv, 0], self.vertices[bv, 1])
        order = np.argsort(w)
        self.boundary_vertices = bv[order]
        self.boundary_omega = w[order]

    # geometry -------------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def areas(self) -> np.ndarray:
        a = self.vertices[self.triangles]
        return 0.5 * ((a[:, 1, 0] - a[:, 0, 0]) * (a[:, 2, 1] - a[:, 0, 1])
                      - (a[:, 2, 0] - a[:, 0, 0]) * (a[:, 1, 1] - a[:, 0, 1]))

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def min_angle(self) -> float:
        a = self.vertices[self.triangles]
        out = np.inf
        for i in range(3):
            u = a[:, (i + 1) % 3] - a[:, i]
            v = a[:, (i + 2) % 3] - a[:, i]
            c = np.sum(u * v, 1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            out = min(out, float(np.degrees(np.arccos(np.clip(c, -1, 1))).min()))
        return out

    @property
    def is_boundary_edge(self) -> np.ndarray:
        return self.edge_tris[:, 1] < 0

    @property
    def interior_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_tris[:, 1] >= 0)

    @property
    def mesh_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        h.update(np.ascontiguousarray(self.triangles).tobytes())
        return h.hexdigest()[:16]

    def validate(self) -> None:
        """Check the structural invariants; raise ``MeshError`` on violation."""
        r = np.hypot(*self.vertices[self.boundary_vertices].T)
        if np.max(np.abs(r - 1.0)) > 1e-12:
            raise MeshError("boundary vertex off the unit circle")
        rm = np.hypot(*self.edge_midpoints[self.boundary_edges].T)
        if np.max(np.abs(rm - 1.0)) > 1e-12:
            raise MeshError("boundary midpoint off the unit circle")
        if np.any(self.areas() <= 0):
            raise MeshError("non-positive triangle area")
        interior = np.setdiff1d(np.arange(self.n_vertices), self.boundary_vertices)
        if np.any(np.hypot(*self.vertices[interior].T) >= 1.0):
            raise MeshError("interior vertex outside the open disk")
        be = self.edges[self.boundary_edges]
        if len(be) != len(self.boundary_vertices):
            raise MeshError("boundary edges do not form a single loop")
        deg = np.bincount(be.ravel(), minlength=self.n_vertices)
        if np.any(deg[self.boundary_vertices] != 2):
            raise MeshError("boundary edges do not form a single loop")
        if self.min_angle() < MIN_ANGLE_DEG:
            raise MeshError(f"mesh quality gate failed: min angle {self.min_angle():.2f} deg")


def build_disk_mesh(h: float) -> TriMesh:
    """Concentric-ring triangulation of the unit disk with target size ``h``.

    Ring ``j`` sits at radius ``j/n`` (``n = ceil(1/h)``) and carries ``6j``
    equispaced nodes; connectivity is the Delaunay triangulation.
    """
    if not (0.0 < h < 1.0):
        raise MeshError(f"mesh size must satisfy 0 < h < 1, got {h}")
    n = int(np.ceil(1.0 / h - 1e-12))
    pts = [np.zeros((1, 2))]
    for j in range(1, n + 1):
        m = 6 * j
        a = 2.0 * np.pi * np.arange(m) / m
        r = 1.0 if j == n else j / n
        pts.append(np.column_stack([r * np.cos(a), r * np.sin(a)]))
    P = np.vstack(pts)
    tri = Delaunay(P).simplices
    mesh = TriMesh(P, tri, float(h))
    mesh.validate()
    return mesh


def write_mesh(mesh: TriMesh, path) -> None:
    lines = [MESH_HEADER, f"h {mesh.h!r}", f"vertices {mesh.n_vertices}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines.append(f"triangles {mesh.n_triangles}")
    lines += [f"{a} {b} {c}" for a, b, c in mesh.triangles.tolist()]
    lines.append(f"boundary {len(mesh.boundary_vertices)}")
    lines += [str(i) for i in mesh.boundary_vertices.tolist()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_mesh(path) -> TriMesh:
    it = iter(Path(path).read_text(encoding="ascii").splitlines())
    if next(it).strip() != MESH_HEADER:
        raise MeshError(f"{path}: not a {MESH_HEADER} file")
    h = float(next(it).split()[1])
    nv = int(next(it).split()[1])
    V = np.array([[float(t) for t in next(it).split()] for _ in range(nv)])
    nt = int(next(it).split()[1])
    T = np.array([[int(t) for t in next(it).split()] for _ in range(nt)], dtype=np.int64)
    nb = int(next(it).split()[1])
    loop = np.array([int(next(it)) for _ in range(nb)], dtype=np.int64)
    mesh = TriMesh(V, T, h)
    if not np.array_equal(loop, mesh.boundary_vertices):
        raise MeshError(f"{path}: boundary loop does not match triangulation")
    return mesh
