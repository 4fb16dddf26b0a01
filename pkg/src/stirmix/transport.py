"""Upwind discontinuous Galerkin transport of a passive scalar.

Fields are stored per triangle in the centered monomial basis
``(x - x0)**i * (y - y0)**j`` (``i + j <= M``) about the triangle centroid,
ordered by total degree and then by ``j``. Time stepping is SSP-RK3 with a
CFL-limited step; the velocity is sampled at quadrature points of each stored
Stokes snapshot and interpolated linearly in time between snapshots.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import _accel, _kernels
from .fem import FEGeometry
from .mesh import TriMesh
from .quadrature import (QuadratureRule, quadrature, segment_rule_for_dg,
                         triangle_rule_for_dg)

log = logging.getLogger(__name__)

DG_HEADER = b"STIRDG v1"
CFL_CONSTANTS = {0: 1.256, 1: 0.409, 2: 0.209, 3: 0.130, 4: 0.089}
CFL_SAFETY = 0.9


class TransportError(RuntimeError):
    pass


def n_basis(M: int) -> int:
    return (M + 1) * (M + 2) // 2


def exponents(M: int) -> np.ndarray:
    """``(M_t, 2)`` array of ``(i, j)`` in storage order."""
    return np.array([(d - j, j) for d in range(M + 1) for j in range(d + 1)], dtype=int)


def basis_index(i: int, j: int, M: int | None = None) -> int:
    """One-based position of ``(x - x0)**i (y - y0)**j`` in the local basis."""
    if i < 0 or j < 0 or (M is not None and i + j > M):
        raise ValueError(f"invalid exponent pair ({i}, {j}) for degree {M}")
    d = i + j
    return d * (d + 1) // 2 + j + 1


def _monomials(dx: np.ndarray, dy: np.ndarray, M: int):
    """Values and gradients of the local basis at offsets ``dx, dy``."""
    ex = exponents(M)
    shape = dx.shape
    val = np.empty(shape + (len(ex),))
    grad = np.empty(shape + (len(ex), 2))
    for s, (i, j) in enumerate(ex):
        xi = dx ** i
        yj = dy ** j
        val[..., s] = xi * yj
        grad[..., s, 0] = i * dx ** max(i - 1, 0) * yj if i else 0.0
        grad[..., s, 1] = j * xi * dy ** max(j - 1, 0) if j else 0.0
    return val, grad


def mass_matrix(vertices: np.ndarray, M: int, rule: QuadratureRule) -> np.ndarray:
    """Local mass matrix of the monomial basis on the triangle ``vertices`` (3x2).

    Raises if the rule has fewer points than basis functions (the matrix
    would be singular) or if the result is not positive definite.
    """
    nb = n_basis(M)
    if rule.n_points < nb:
        raise ValueError(f"{rule.n_points}-point rule cannot give an invertible "
                         f"mass matrix for {nb} basis functions")
    if np.any(rule.weights <= 0):
        raise ValueError("quadrature weights must be positive")
    v = np.asarray(vertices, dtype=float)
    J = np.column_stack([v[1] - v[0], v[2] - v[0]])
    det = abs(np.linalg.det(J))
    pts = v[0] + rule.points @ J.T
    c = v.mean(axis=0)
    val, _ = _monomials(pts[:, 0] - c[0], pts[:, 1] - c[1], M)
    A = np.einsum("q,qi,qj->ij", rule.weights * det, val, val)
    np.linalg.cholesky(A)
    return A


def cfl_timestep(vmax: float, h: float, M: int, cap: float | None = None) -> float:
    """``0.9 * C(M) * h / vmax`` capped at ``cap`` (required when ``vmax`` is 0)."""
    if M not in CFL_CONSTANTS:
        raise ValueError(f"no CFL constant for degree {M}")
    if vmax < 0 or h <= 0:
        raise ValueError("vmax must be >= 0 and h > 0")
    dt = math.inf if vmax == 0 else CFL_SAFETY * CFL_CONSTANTS[M] * h / vmax
    if cap is not None:
        dt = min(dt, cap)
    if not math.isfinite(dt):
        raise ValueError("zero velocity needs a step cap")
    return dt


class DGSpace:
    """Geometry tables of the degree-``M`` broken polynomial space on a mesh."""

    def __init__(self, mesh: TriMesh, M: int):
        if M not in CFL_CONSTANTS:
            raise ValueError(f"DG degree must be in 0..4, got {M}")
        self.mesh = mesh
        self.M = M
        self.nb = n_basis(M)
        self.geo = FEGeometry(mesh)
        self.rule = triangle_rule_for_dg(M)
        self.edge_rule = segment_rule_for_dg(M)
        if self.rule.n_points < self.nb:
            raise ValueError("volume rule too small for the DG basis")
        self.centroids = mesh.centroids()
        # per-element scale keeps the local mass matrices well conditioned
        self.scale = np.sqrt(np.abs(self.geo.det))
        X = self.geo.physical_points(self.rule.points)
        self.Phi, self.GPhi = self._eval(np.arange(mesh.n_triangles)[:, None], X)
        self.wq = self.rule.weights[None, :] * np.abs(self.geo.det)[:, None]
        self.quad_points = X
        self._build_edges()

    def _eval(self, tri: np.ndarray, X: np.ndarray):
        c = self.centroids[tri]
        return _monomials(X[..., 0] - c[..., 0], X[..., 1] - c[..., 1], self.M)

    def _build_edges(self):
        m = self.mesh
        inner = m.interior_edges
        eL = m.edge_tris[inner, 0].copy()
        eR = m.edge_tris[inner, 1].copy()
        a = m.vertices[m.edges[inner, 0]]
        b = m.vertices[m.edges[inner, 1]]
        d = b - a
        length = np.hypot(d[:, 0], d[:, 1])
        n = np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]
        mid = 0.5 * (a + b)
        flip = np.sum((mid - self.centroids[eL]) * n, axis=1) < 0
        n[flip] *= -1.0
        s = self.edge_rule.points
        X = a[:, None, :] + s[None, :, None] * d[:, None, :]
        self.edge_ids = inner
        self.eL, self.eR = eL, eR
        self.edge_normals = n
        self.edge_points = X
        self.we = self.edge_rule.weights[None, :] * length[:, None]
        self.PhiL, _ = self._eval(eL[:, None], X)
        self.PhiR, _ = self._eval(eR[:, None], X)
        # boundary chords, outward normals
        bnd = m.boundary_edges
        eB = m.edge_tris[bnd, 0].copy()
        a = m.vertices[m.edges[bnd, 0]]
        d = m.vertices[m.edges[bnd, 1]] - a
        length = np.hypot(d[:, 0], d[:, 1])
        n = np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]
        n[np.sum((a - self.centroids[eB]) * n, axis=1) < 0] *= -1.0
        XB = a[:, None, :] + s[None, :, None] * d[:, None, :]
        self.eB = eB
        self.boundary_normals = n
        self.boundary_points = XB
        self.wb = self.edge_rule.weights[None, :] * length[:, None]
        self.PhiB, _ = self._eval(eB[:, None], XB)

    @cached_property
    def mass(self) -> np.ndarray:
        """``(nK, nb, nb)`` local mass matrices."""
        return np.einsum("kq,kqi,kqj->kij", self.wq, self.Phi, self.Phi)

    @cached_property
    def _scaled_mass(self):
        ex = exponents(self.M).sum(axis=1)
        S = self.scale[:, None] ** (-ex[None, :].astype(float))
        return self.mass * S[:, :, None] * S[:, None, :], S

    @cached_property
    def mass_inv(self) -> np.ndarray:
        Ms, S = self._scaled_mass
        return np.ascontiguousarray(np.linalg.inv(Ms) * S[:, :, None] * S[:, None, :])

    def solve_mass(self, rhs: np.ndarray) -> np.ndarray:
        """Apply the inverse local mass matrices, solving the scaled systems directly."""
        Ms, S = self._scaled_mass
        return S * np.linalg.solve(Ms, (S * rhs)[..., None])[..., 0]

    @cached_property
    def cfl_length(self) -> float:
        """Smallest inscribed-circle diameter; the length used in the CFL bound."""
        m = self.mesh
        perim = m.edge_lengths()[m.tri_edges].sum(axis=1)
        return float(np.min(4.0 * np.abs(m.areas()) / perim))

    @cached_property
    def lower(self) -> "DGSpace":
        """The degree ``M - 1`` space on the same mesh."""
        return DGSpace(self.mesh, self.M - 1)

    # fields ------------------------------------------------------------------
    def zeros(self) -> "DGField":
        return DGField(self, np.zeros((self.mesh.n_triangles, self.nb)))

    @cached_property
    def _proj_tables(self):
        rule = quadrature("triangle", max(8, 2 * self.M))
        X = self.geo.physical_points(rule.points)
        Phi, _ = self._eval(np.arange(self.mesh.n_triangles)[:, None], X)
        wq = rule.weights[None, :] * np.abs(self.geo.det)[:, None]
        return X, Phi, wq

    def project(self, f) -> "DGField":
        """Element-wise L2 projection of ``f(x, y)`` (16-point rule)."""
        X, Phi, wq = self._proj_tables
        vals = np.broadcast_to(np.asarray(f(X[..., 0], X[..., 1]), dtype=float), wq.shape)
        rhs = np.einsum("kq,kqi->ki", wq * vals, Phi)
        return DGField(self, self.solve_mass(rhs))

    def project_values(self, vals: np.ndarray) -> "DGField":
        """Project values given at the element quadrature points ``(nK, nq)``."""
        rhs = np.einsum("kq,kqi->ki", self.wq * vals, self.Phi)
        return DGField(self, self.solve_mass(rhs))

    def l2_error(self, field: "DGField", f) -> float:
        """``||field - f||_{L2}`` on the polygonal domain (16-point rule)."""
        X, Phi, wq = self._proj_tables
        e = np.einsum("kqi,ki->kq", Phi, field.coef) - f(X[..., 0], X[..., 1])
        return float(np.sqrt(np.sum(wq * e * e)))

    def max_error(self, field: "DGField", f) -> float:
        """Max deviation over element vertices and quadrature points."""
        m = self.mesh
        X = np.concatenate([m.vertices[m.triangles], self._proj_tables[0]], axis=1)
        val, _ = self._eval(np.arange(m.n_triangles)[:, None], X)
        e = np.einsum("kqi,ki->kq", val, field.coef) - f(X[..., 0], X[..., 1])
        return float(np.max(np.abs(e)))


@dataclass(eq=False)
class DGField:
    space: DGSpace
    coef: np.ndarray  # (nK, nb)

    def __post_init__(self):
        self.coef = np.asarray(self.coef, dtype=float)
        if self.coef.shape != (self.space.mesh.n_triangles, self.space.nb):
            raise ValueError(f"coefficient array has shape {self.coef.shape}")

    @property
    def M(self) -> int:
        return self.space.M

    def at_quadrature(self) -> np.ndarray:
        return np.einsum("kqi,ki->kq", self.space.Phi, self.coef)

    def gradient_at_quadrature(self) -> np.ndarray:
        """``(nK, nq, 2)`` exact element-wise gradient at volume points."""
        return np.einsum("kqid,ki->kqd", self.space.GPhi, self.coef)

    def integral(self) -> float:
        return float(np.sum(self.space.wq * self.at_quadrature()))

    def l2_norm(self) -> float:
        return float(np.sqrt(max(np.einsum("ki,kij,kj->", self.coef, self.space.mass,
                                           self.coef), 0.0)))

    def inner(self, other: "DGField") -> float:
        return float(np.einsum("ki,kij,kj->", self.coef, self.space.mass, other.coef))

    def evaluate(self, tri: np.ndarray, pts: np.ndarray) -> np.ndarray:
        """Values at physical points ``pts`` known to lie in triangles ``tri``."""
        tri = np.asarray(tri)
        val, _ = self.space._eval(tri, np.asarray(pts, dtype=float))
        return np.einsum("...i,...i->...", val, self.coef[tri])

    def cell_averages(self) -> np.ndarray:
        return np.sum(self.space.wq * self.at_quadrature(), axis=1) / np.sum(self.space.wq, axis=1)

    def __add__(self, other):
        return DGField(self.space, self.coef + other.coef)

    def __sub__(self, other):
        return DGField(self.space, self.coef - other.coef)

    def __mul__(self, a: float):
        return DGField(self.space, a * self.coef)

    __rmul__ = __mul__


def gradient(field: DGField) -> tuple[DGField, DGField]:
    """Exact derivative fields ``(d/dx, d/dy)`` in the degree ``M - 1`` space."""
    M = field.M
    if M < 1:
        raise ValueError("piecewise constants have no element gradient")
    lower = field.space.lower
    ex_hi = exponents(M)
    gx = np.zeros((field.coef.shape[0], lower.nb))
    gy = np.zeros_like(gx)
    for s, (i, j) in enumerate(ex_hi):
        if i:
            gx[:, basis_index(i - 1, j) - 1] += i * field.coef[:, s]
        if j:
            gy[:, basis_index(i, j - 1) - 1] += j * field.coef[:, s]
    return DGField(lower, gx), DGField(lower, gy)


# velocity sampling ------------------------------------------------------------

@dataclass(eq=False)
class DGVelocity:
    """Velocity snapshots sampled at the DG quadrature points.

    ``vol[n, K, q, :]`` are Cartesian components at volume points, ``vn[n, e, q]``
    the normal component on interior edges, ``vb[n, e, q]`` the outward normal
    component on boundary chords and ``div[n, K, q]`` the pointwise divergence
    (only used by the non-conservative variant).
    """

    times: np.ndarray
    vol: np.ndarray
    vn: np.ndarray
    vb: np.ndarray
    div: np.ndarray | None = None

    def __post_init__(self):
        d = np.diff(self.times)
        if len(d) and (np.any(d <= 0) or np.max(np.abs(d - d[0])) > 1e-12):
            raise ValueError("snapshot times must be strictly increasing and uniform")
        self.vol = np.ascontiguousarray(self.vol)
        self.vn = np.ascontiguousarray(self.vn)
        self.vb = np.ascontiguousarray(self.vb)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @cached_property
    def vmax(self) -> np.ndarray:
        a = np.sqrt(np.max(np.sum(self.vol ** 2, axis=-1), axis=(1, 2)))
        b = np.max(np.abs(self.vn), axis=(1, 2)) if self.vn.size else np.zeros(len(self.times))
        return np.maximum(a, b)

    def reversed(self) -> "DGVelocity":
        """Velocity ``-v(T - s)`` on ``s in [0, T - t0]`` for backward transport."""
        T = self.times[-1]
        div = None if self.div is None else -self.div[::-1]
        return DGVelocity(T - self.times[::-1], -self.vol[::-1], -self.vn[::-1],
                          -self.vb[::-1], div)


class VelocitySampler:
    """Linear maps from Taylor-Hood velocity DOFs to DG quadrature samples."""

    def __init__(self, dgspace: DGSpace, thspace):
        self.dg = dgspace
        self.th = thspace
        geo = thspace.geo
        nK, nq = dgspace.wq.shape
        tri = np.repeat(np.arange(nK), nq)
        X = dgspace.quad_points.reshape(-1, 2)
        xi = geo.locate_reference(tri, X)
        self.Ex, self.Ey = thspace.sampler(tri, xi)
        ne, nqe = dgspace.we.shape
        etri = np.repeat(dgspace.eL, nqe)
        EX = dgspace.edge_points.reshape(-1, 2)
        exi = geo.locate_reference(etri, EX)
        Fx, Fy = thspace.sampler(etri, exi)
        nrm = np.repeat(dgspace.edge_normals, nqe, axis=0)
        self.En = (sp.diags(nrm[:, 0]) @ Fx + sp.diags(nrm[:, 1]) @ Fy).tocsr()
        nb_, nqb = dgspace.wb.shape
        btri = np.repeat(dgspace.eB, nqb)
        BX = dgspace.boundary_points.reshape(-1, 2)
        Bx, By = thspace.sampler(btri, geo.locate_reference(btri, BX))
        bn = np.repeat(dgspace.boundary_normals, nqb, axis=0)
        self.Eb = (sp.diags(bn[:, 0]) @ Bx + sp.diags(bn[:, 1]) @ By).tocsr()
        self._bshape = (nb_, nqb)
        self._shape = (nK, nq)
        self._eshape = (ne, nqe)
        # pointwise divergence of the P2 field at the volume points
        from .fem import p2_basis
        _, dN = p2_basis(dgspace.rule.points)
        G = geo.physical_gradients(dN)  # (nK, nq, 6, 2)
        cols = geo.tri_p2[:, None, :].repeat(nq, axis=1)
        n2 = thspace.n_p2
        rows = np.arange(nK * nq).reshape(nK, nq)[:, :, None].repeat(6, axis=2)
        Dx = sp.csr_matrix((G[..., 0].ravel(), (rows.ravel(), cols.ravel())), shape=(nK * nq, n2))
        Dy = sp.csr_matrix((G[..., 1].ravel(), (rows.ravel(), cols.ravel())), shape=(nK * nq, n2))
        self.Ediv = (sp.hstack([Dx, Dy]) @ thspace.T).tocsr()

    def sample(self, traj, with_div: bool = False) -> DGVelocity:
        V = traj.velocity.T
        n = V.shape[1]
        vol = np.stack([(self.Ex @ V).T, (self.Ey @ V).T], axis=-1).reshape(n, *self._shape, 2)
        vn = (self.En @ V).T.reshape(n, *self._eshape)
        vb = (self.Eb @ V).T.reshape(n, *self._bshape)
        div = (self.Ediv @ V).T.reshape(n, *self._shape) if with_div else None
        return DGVelocity(np.array(traj.times, dtype=float), vol, vn, vb, div)

    def volume_adjoint(self, w: np.ndarray) -> np.ndarray:
        """Transpose of the volume sampling: ``(nK, nq, 2)`` weights -> DOF vector."""
        return self.Ex.T @ w[..., 0].ravel() + self.Ey.T @ w[..., 1].ravel()


def sample_analytic(dgspace: DGSpace, fn, times) -> DGVelocity:
    """Sample ``fn(x, y, t) -> (vx, vy)`` directly at the DG quadrature points."""
    times = np.asarray(times, dtype=float)
    X = dgspace.quad_points
    vol, vn, vb = [], [], []

    def normal(P, n, t):
        ex, ey = fn(P[..., 0], P[..., 1], t)
        return ex * n[:, None, 0] + ey * n[:, None, 1]

    for t in times:
        vx, vy = fn(X[..., 0], X[..., 1], t)
        vol.append(np.stack(np.broadcast_arrays(vx, vy), axis=-1))
        vn.append(normal(dgspace.edge_points, dgspace.edge_normals, t))
        vb.append(normal(dgspace.boundary_points, dgspace.boundary_normals, t))
    return DGVelocity(times, np.array(vol, dtype=float), np.array(vn, dtype=float),
                      np.array(vb, dtype=float))


# time stepping ------------------------------------------------------------------

@dataclass(eq=False)
class DGTrajectory:
    space: DGSpace
    times: np.ndarray
    coef: np.ndarray  # (n_out, nK, nb)
    substeps: int = 0

    def __len__(self):
        return len(self.times)

    def field(self, i: int) -> DGField:
        return DGField(self.space, self.coef[i])

    @property
    def final(self) -> DGField:
        return self.field(-1)


def _kernel():
    return _kernels.rk3_numba if _accel.USE_NUMBA else _kernels.rk3_numpy


def _geometry_args(space: DGSpace):
    return (space.Phi, space.GPhi, space.wq, space.PhiL, space.PhiR, space.we,
            space.eL, space.eR, space.PhiB, space.wb, space.eB, space.mass_inv)


BOUNDARY_MODES = {"zero": 0, "interior": 1, "outflow": 2, "skew": 3}


def _advance(space: DGSpace, vel: DGVelocity, coef: np.ndarray, i0: int, i1: int,
             advective: bool, step_norms: list | None, cfl_h: float | None, bmode: int):
    """Advance over snapshot intervals ``[i0, i1)`` and yield after each one."""
    rk3 = _kernel()
    geo = _geometry_args(space)
    h = cfl_h if cfl_h is not None else space.cfl_length
    zeros = np.zeros(space.wq.shape)
    total = 0
    for i in range(i0, i1):
        dT = float(vel.times[i + 1] - vel.times[i])
        vm = max(vel.vmax[i], vel.vmax[i + 1])
        nsub = max(1, math.ceil(dT / cfl_timestep(vm, h, space.M, cap=dT) - 1e-9))
        dt = dT / nsub
        if advective:
            if vel.div is None:
                raise TransportError("non-conservative form needs sampled divergence")
            d0, d1 = vel.div[i], vel.div[i + 1]
        else:
            d0 = d1 = zeros
        args = (vel.vol[i], vel.vol[i + 1], vel.vn[i], vel.vn[i + 1], d0, d1, advective,
                vel.vb[i], vel.vb[i + 1], bmode)
        if step_norms is None:
            coef = rk3(coef, dt, nsub, 0.0, 1.0 / nsub, *args, *geo)
        else:
            for n in range(nsub):
                coef = rk3(coef, dt, 1, n / nsub, 1.0 / nsub, *args, *geo)
                step_norms.append(float(np.sqrt(np.einsum("ki,kij,kj->", coef, space.mass, coef))))
        if not np.all(np.isfinite(coef)):
            raise TransportError(f"non-finite DG coefficients at t={vel.times[i + 1]:g}")
        total += nsub
        yield i + 1, coef, total


def evolve(field0: DGField, vel: DGVelocity, t0: float | None = None, t1: float | None = None,
           direction: str = "forward", advective: bool = False, step_norms: list | None = None,
           cfl_h: float | None = None, boundary: str = "zero") -> DGTrajectory:
    """Transport ``field0`` through the snapshot times of ``vel`` in ``[t0, t1]``.

    ``forward`` solves ``theta_t + v . grad theta = 0`` from ``t0`` to ``t1``.
    ``backward`` treats ``field0`` as data at ``t1`` and solves the adjoint
    equation ``-rho_t - v . grad rho = 0`` down to ``t0``; the result is
    indexed by the original (increasing) times.

    The default discretisation is the conservative weak form, which preserves
    the total integral exactly; ``advective=True`` adds the ``theta div v``
    source so the scheme matches the non-conservative equation when the
    discrete velocity is only weakly solenoidal.
    """
    if boundary not in BOUNDARY_MODES:
        raise ValueError(f"boundary must be one of {sorted(BOUNDARY_MODES)}")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    times = vel.times
    t0 = float(times[0]) if t0 is None else float(t0)
    t1 = float(times[-1]) if t1 is None else float(t1)
    tol = 1e-9 * max(1.0, abs(times[-1]))
    if t0 < times[0] - tol or t1 > times[-1] + tol or t1 < t0:
        raise TransportError(f"velocity covers [{times[0]}, {times[-1]}], requested [{t0}, {t1}]")
    i0 = int(np.argmin(np.abs(times - t0)))
    i1 = int(np.argmin(np.abs(times - t1)))
    if abs(times[i0] - t0) > tol or abs(times[i1] - t1) > tol:
        raise TransportError("t0 and t1 must coincide with velocity snapshot times")
    space = field0.space
    coef = np.ascontiguousarray(field0.coef, dtype=float)
    if direction == "forward":
        v, j0, j1 = vel, i0, i1
    else:
        v = vel.reversed()
        n = len(times) - 1
        j0, j1 = n - i1, n - i0
    out = np.empty((j1 - j0 + 1,) + coef.shape)
    out[0] = coef
    total = 0
    for j, c, total in _advance(space, v, coef, j0, j1, advective, step_norms, cfl_h,
                                  BOUNDARY_MODES[boundary]):
        out[j - j0] = c
        coef = c
    if direction == "forward":
        return DGTrajectory(space, times[i0:i1 + 1].copy(), out, total)
    return DGTrajectory(space, times[i0:i1 + 1].copy(), out[::-1].copy(), total)


# file I/O ------------------------------------------------------------------------

def write_field(path, field: DGField, t: float) -> None:
    header = "\n".join([DG_HEADER.decode(), field.space.mesh.mesh_hash, str(field.M),
                        repr(float(t)), str(field.coef.shape[0])]) + "\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(field.coef.astype("<f8").tobytes())


def read_field(path, space: DGSpace) -> tuple[DGField, float]:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 5)
    if len(parts) < 6 or parts[0] != DG_HEADER:
        raise ValueError(f"{path}: not a STIRDG v1 file")
    mh, M, t, nK = parts[1].decode(), int(parts[2]), float(parts[3]), int(parts[4])
    if mh != space.mesh.mesh_hash or M != space.M or nK != space.mesh.n_triangles:
        raise ValueError(f"{path}: field does not match the mesh/degree")
    coef = np.frombuffer(parts[5], dtype="<f8")
    if coef.size != nK * space.nb:
        raise ValueError(f"{path}: payload size mismatch")
    return DGField(space, coef.reshape(nK, space.nb).astype(float)), t
