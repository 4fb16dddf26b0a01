"""Continuous P1/P2 Lagrange machinery on affine triangles.

Local P2 node ``3 + k`` is the midpoint of local edge ``k`` (opposite vertex
``k``). Global P2 numbering: vertices first, then one node per mesh edge.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .mesh import TriMesh, polar_angle
from .quadrature import QuadratureRule, quadrature

_EDGE_VERTS = ((1, 2), (2, 0), (0, 1))


def p2_basis(xi: np.ndarray):
    """Values ``(nq, 6)`` and reference gradients ``(nq, 6, 2)`` of P2 shape functions."""
    xi = np.atleast_2d(xi)
    s, t = xi[:, 0], xi[:, 1]
    lam = np.stack([1.0 - s - t, s, t], axis=1)
    dlam = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    N = np.empty((len(xi), 6))
    dN = np.empty((len(xi), 6, 2))
    for i in range(3):
        N[:, i] = lam[:, i] * (2.0 * lam[:, i] - 1.0)
        dN[:, i, :] = (4.0 * lam[:, i] - 1.0)[:, None] * dlam[i]
    for k, (a, b) in enumerate(_EDGE_VERTS):
        N[:, 3 + k] = 4.0 * lam[:, a] * lam[:, b]
        dN[:, 3 + k, :] = 4.0 * (lam[:, b, None] * dlam[a] + lam[:, a, None] * dlam[b])
    return N, dN


def p1_basis(xi: np.ndarray):
    xi = np.atleast_2d(xi)
    s, t = xi[:, 0], xi[:, 1]
    N = np.stack([1.0 - s - t, s, t], axis=1)
    dN = np.broadcast_to(np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]), (len(xi), 3, 2))
    return N, np.array(dN)


def _coo(rows, cols, vals, shape):
    return sp.coo_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=shape).tocsr()


@dataclass(eq=False)
class FEGeometry:
    """Per-triangle affine maps and P2 node numbering for one mesh."""

    mesh: TriMesh

    @cached_property
    def jacobians(self) -> np.ndarray:
        a = self.mesh.vertices[self.mesh.triangles]
        J = np.empty((self.mesh.n_triangles, 2, 2))
        J[:, :, 0] = a[:, 1] - a[:, 0]
        J[:, :, 1] = a[:, 2] - a[:, 0]
        return J

    @cached_property
    def det(self) -> np.ndarray:
        J = self.jacobians
        return J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]

    @cached_property
    def inv_jacobians(self) -> np.ndarray:
        return np.linalg.inv(self.jacobians)

    @property
    def n_p2(self) -> int:
        return self.mesh.n_vertices + self.mesh.n_edges

    @cached_property
    def tri_p2(self) -> np.ndarray:
        m = self.mesh
        return np.hstack([m.triangles, m.n_vertices + m.tri_edges])

    @cached_property
    def p2_coords(self) -> np.ndarray:
        """Affine node positions (boundary midpoints stay on their chord)."""
        m = self.mesh
        mid = 0.5 * (m.vertices[m.edges[:, 0]] + m.vertices[m.edges[:, 1]])
        return np.vstack([m.vertices, mid])

    @cached_property
    def boundary_p2(self) -> np.ndarray:
        """Boundary P2 nodes in counter-clockwise order."""
        m = self.mesh
        return np.unique(np.concatenate([m.boundary_vertices,
                                         m.n_vertices + m.boundary_edges]))

    @cached_property
    def boundary_p2_omega(self) -> np.ndarray:
        """Polar angle carried by each boundary P2 node (midpoints: snapped)."""
        m = self.mesh
        pts = np.vstack([m.vertices, m.edge_midpoints])[self.boundary_p2]
        return polar_angle(pts[:, 0], pts[:, 1])

    def physical_points(self, xi: np.ndarray) -> np.ndarray:
        """Map reference points ``(nq, 2)`` into every triangle: ``(nt, nq, 2)``."""
        x0 = self.mesh.vertices[self.mesh.triangles[:, 0]]
        return x0[:, None, :] + np.einsum("kab,qb->kqa", self.jacobians, xi)

    def physical_gradients(self, dN: np.ndarray) -> np.ndarray:
        """``(nt, nq, nb, 2)`` physical gradients from reference gradients."""
        return np.einsum("qia,kab->kqib", dN, self.inv_jacobians)

    # assembly --------------------------------------------------------------
    def p2_matrices(self, rule: QuadratureRule | None = None):
        """Scalar P2 mass and gradient-gradient blocks ``(M, Kxx, Kxy, Kyx, Kyy)``.

        ``Kab[i, j] = int d_a phi_i d_b phi_j``.
        """
        rule = rule or quadrature("triangle", 4)
        N, dN = p2_basis(rule.points)
        G = self.physical_gradients(dN)
        wd = rule.weights[None, :] * np.abs(self.det)[:, None]
        rows = np.repeat(self.tri_p2[:, :, None], 6, axis=2)
        cols = np.repeat(self.tri_p2[:, None, :], 6, axis=1)
        shape = (self.n_p2, self.n_p2)
        Mloc = np.einsum("kq,qi,qj->kij", wd, N, N)
        out = [_coo(rows, cols, Mloc, shape)]
        for a in range(2):
            for b in range(2):
                Kloc = np.einsum("kq,kqi,kqj->kij", wd, G[..., a], G[..., b])
                out.append(_coo(rows, cols, Kloc, shape))
        return tuple(out)

    def p1_matrices(self):
        """P1 mass and stiffness matrices on the vertex set."""
        rule = quadrature("triangle", 2)
        N, dN = p1_basis(rule.points)
        G = self.physical_gradients(dN)
        wd = rule.weights[None, :] * np.abs(self.det)[:, None]
        tri = self.mesh.triangles
        rows = np.repeat(tri[:, :, None], 3, axis=2)
        cols = np.repeat(tri[:, None, :], 3, axis=1)
        shape = (self.mesh.n_vertices,) * 2
        Mloc = np.einsum("kq,qi,qj->kij", wd, N, N)
        Kloc = np.einsum("kq,kqid,kqjd->kij", wd, G, G)
        return _coo(rows, cols, Mloc, shape), _coo(rows, cols, Kloc, shape)

    def divergence_blocks(self):
        """``Bx[i, j] = int psi_i d_x phi_j`` with P1 ``psi`` and P2 ``phi``."""
        rule = quadrature("triangle", 3)
        N1, _ = p1_basis(rule.points)
        _, dN2 = p2_basis(rule.points)
        G = self.physical_gradients(dN2)
        wd = rule.weights[None, :] * np.abs(self.det)[:, None]
        rows = np.repeat(self.mesh.triangles[:, :, None], 6, axis=2)
        cols = np.repeat(self.tri_p2[:, None, :], 3, axis=1)
        shape = (self.mesh.n_vertices, self.n_p2)
        return tuple(_coo(rows, cols, np.einsum("kq,qi,kqj->kij", wd, N1, G[..., a]), shape)
                     for a in range(2))

    # boundary --------------------------------------------------------------
    def boundary_edge_quadrature(self, rule: QuadratureRule | None = None):
        """Quadrature data on the polygonal boundary.

        Returns ``(nodes, N, omega, wds)``: P2 node triples ``(a, b, mid)`` per
        boundary edge, 1-D P2 shape values at the rule points, the polar angle
        of every quadrature point and the chord-scaled weights.
        """
        rule = rule or quadrature("segment", 5)
        m = self.mesh
        be = m.boundary_edges
        a, b = m.edges[be, 0], m.edges[be, 1]
        nodes = np.column_stack([a, b, m.n_vertices + be])
        s = rule.points
        N = np.column_stack([(1 - s) * (1 - 2 * s), s * (2 * s - 1), 4 * s * (1 - s)])
        xa, xb = m.vertices[a], m.vertices[b]
        pts = xa[:, None, :] + s[None, :, None] * (xb - xa)[:, None, :]
        omega = polar_angle(pts[..., 0], pts[..., 1])
        length = np.hypot(*(xb - xa).T)
        return nodes, N, omega, rule.weights[None, :] * length[:, None]

    # sampling --------------------------------------------------------------
    def locate_reference(self, tri: np.ndarray, pts: np.ndarray) -> np.ndarray:
        x0 = self.mesh.vertices[self.mesh.triangles[tri, 0]]
        return np.einsum("kab,kb->ka", self.inv_jacobians[tri], pts - x0)

    def p2_sampler(self, tri: np.ndarray, xi: np.ndarray) -> sp.csr_matrix:
        """Sparse operator evaluating P2 nodal values at points ``xi`` of triangles ``tri``."""
        N, _ = p2_basis(xi)
        rows = np.repeat(np.arange(len(tri)), 6)
        return sp.csr_matrix((N.ravel(), (rows, self.tri_p2[tri].ravel())),
                             shape=(len(tri), self.n_p2))

    def p1_sampler(self, tri: np.ndarray, xi: np.ndarray) -> sp.csr_matrix:
        N, _ = p1_basis(xi)
        rows = np.repeat(np.arange(len(tri)), 3)
        return sp.csr_matrix((N.ravel(), (rows, self.mesh.triangles[tri].ravel())),
                             shape=(len(tri), self.mesh.n_vertices))
