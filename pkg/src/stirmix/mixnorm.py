"""Dual-Sobolev mix-norm, terminal adjoint datum and total cost."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem import p1_basis
from .transport import DGField, DGSpace, DGTrajectory


@dataclass(eq=False)
class CGScalarField:
    """Continuous piecewise-linear field given by its vertex values."""

    mesh: object
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_vertices,):
            raise ValueError("one value per mesh vertex expected")


@dataclass(frozen=True)
class CostBreakdown:
    mix_part: float
    penalty_part: float
    mix_norm: float
    g_norm: float

    @property
    def total(self) -> float:
        return self.mix_part + self.penalty_part


class HelmholtzSolver:
    """Factorised P1 system for ``(-Laplace + I) eta = theta`` with zero Neumann data.

    ``theta`` is a DG field; its load against the P1 hat functions is computed
    with the DG element quadrature, so no smoothing happens before the solve.
    """

    def __init__(self, dgspace: DGSpace):
        self.dg = dgspace
        geo = dgspace.geo
        M1, K1 = geo.p1_matrices()
        self.H = (K1 + M1).tocsc()
        self._lu = spla.splu(self.H)
        N1, _ = p1_basis(dgspace.rule.points)
        self._N1 = N1
        nK, nq = dgspace.wq.shape
        nb = dgspace.nb
        # R[i, (K, j)] = sum_q w psi_j(x_q) N_i(x_q)
        vals = np.einsum("kq,kqj,qi->kij", dgspace.wq, dgspace.Phi, N1)
        rows = np.repeat(dgspace.mesh.triangles[:, :, None], nb, axis=2)
        cols = np.arange(nK * nb).reshape(nK, 1, nb).repeat(3, axis=1)
        self.R = sp.csr_matrix((vals.ravel(), (rows.ravel(), cols.ravel())),
                               shape=(dgspace.mesh.n_vertices, nK * nb))

    def solve(self, theta: DGField) -> CGScalarField:
        rhs = self.R @ theta.coef.ravel()
        eta = self._lu.solve(rhs)
        res = np.linalg.norm(self.H @ eta - rhs)
        if res > 1e-10 * max(np.linalg.norm(rhs), 1e-300) + 1e-300:
            raise RuntimeError(f"Helmholtz solve residual {res:.3e}")
        return CGScalarField(self.dg.mesh, eta)

    def to_dg(self, eta: CGScalarField) -> DGField:
        """L2 projection of a P1 field into the DG space (exact for ``M >= 1``)."""
        vals = np.einsum("qi,kqi->kq", self._N1, eta.values[self.dg.mesh.triangles][:, None, :]
                         .repeat(len(self._N1), axis=1))
        return self.dg.project_values(vals)

    def terminal_adjoint(self, theta: DGField) -> DGField:
        """``Lambda^-2 theta`` projected into the DG space."""
        return self.to_dg(self.solve(theta))


def helmholtz_solver(dgspace: DGSpace) -> HelmholtzSolver:
    s = getattr(dgspace, "_helmholtz", None)
    if s is None:
        s = HelmholtzSolver(dgspace)
        dgspace._helmholtz = s
    return s


def helmholtz_neumann(theta: DGField) -> CGScalarField:
    return helmholtz_solver(theta.space).solve(theta)


def mix_inner(theta: DGField) -> float:
    """``int rho(T) theta(T)`` with ``rho(T)`` projected into the DG space."""
    rho = helmholtz_solver(theta.space).terminal_adjoint(theta)
    return rho.inner(theta)


def mix_norm(theta: DGField) -> float:
    v = mix_inner(theta)
    if v < -1e-12:
        raise RuntimeError(f"negative mix inner product {v:.3e}")
    return float(np.sqrt(max(v, 0.0)))


def cost(theta_T: DGField, gamma: float, g_norm: float) -> CostBreakdown:
    """``0.5 * ||theta_T||^2_{(H^1)'} + 0.5 * gamma * ||g||^2``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    mn = mix_norm(theta_T)
    return CostBreakdown(0.5 * mn * mn, 0.5 * gamma * g_norm * g_norm, mn, g_norm)


def trapezoid_mean(values, times) -> float:
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    span = times[-1] - times[0]
    if span <= 0:
        return float(values[0])
    return float(np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(times)) / span)


def duality_invariance(theta: DGTrajectory, rho: DGTrajectory) -> tuple[float, np.ndarray]:
    """``max_t |I(t) - mean(I)|`` with ``I(t) = int rho theta``; also returns ``I``."""
    if len(theta.times) != len(rho.times) or np.max(np.abs(theta.times - rho.times)) > 1e-12:
        raise ValueError("theta and rho trajectories use different time grids")
    mass = theta.space.mass
    I = np.einsum("nki,kij,nkj->n", rho.coef, mass, theta.coef)
    return float(np.max(np.abs(I - trapezoid_mean(I, theta.times)))), I
