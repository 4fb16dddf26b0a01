"""Finite-dimensional tangential boundary controls and cost gradients.

A control is ``g = sum_ij alpha_ij mode_i(omega) chi_j(t) tau`` where the
spatial modes are ``cos(m omega)``, ``sin(m omega)`` or the constant 1 and
``chi_j`` is the indicator of the ``j``-th of ``N`` uniform time segments.
Coefficients are flattened as ``mode_index * N + segment``.

Descriptor grammar::

    basis   := modes "|N=" int "|T=" float
    modes   := mode ("," mode)*
    mode    := "cos" int | "sin" int | "const"
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .quadrature import quadrature

_MODE_RE = re.compile(r"^(cos|sin)([1-9][0-9]*)$")


@dataclass(frozen=True)
class Mode:
    kind: str  # "cos", "sin" or "const"
    m: int = 0

    def __post_init__(self):
        if self.kind not in ("cos", "sin", "const"):
            raise ValueError(f"unknown mode kind {self.kind!r}")
        if self.kind == "const" and self.m != 0:
            raise ValueError("constant mode has no wave number")
        if self.kind != "const" and self.m < 1:
            raise ValueError("trigonometric modes need m >= 1")

    @classmethod
    def parse(cls, text: str) -> "Mode":
        text = text.strip()
        if text == "const":
            return cls("const")
        mt = _MODE_RE.match(text)
        if not mt:
            raise ValueError(f"bad mode {text!r}; expected cos<m>, sin<m> or const")
        return cls(mt.group(1), int(mt.group(2)))

    @property
    def name(self) -> str:
        return "const" if self.kind == "const" else f"{self.kind}{self.m}"

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.kind == "cos":
            return np.cos(self.m * omega)
        if self.kind == "sin":
            return np.sin(self.m * omega)
        return np.ones_like(omega)

    @property
    def circle_norm_sq(self) -> float:
        """``int_0^{2 pi} mode(omega)^2 d omega`` on the unit circle."""
        return 2.0 * math.pi if self.kind == "const" else math.pi


@dataclass(frozen=True)
class BasisMember:
    """One basis function ``mode(omega) chi_segment(t) tau``."""

    mode: Mode
    segment: int
    N: int
    T: float

    @property
    def interval(self) -> tuple[float, float]:
        ds = self.T / self.N
        return self.segment * ds, (self.segment + 1) * ds

    @property
    def descriptor(self) -> str:
        return f"{self.mode.name}@{self.segment}/{self.N}|T={self.T!r}"

    def active(self, t: float) -> bool:
        """Segments are ``(a, b]``; the first one also contains ``t = 0``."""
        a, b = self.interval
        tol = 1e-12 * max(1.0, self.T)
        if self.segment == 0 and t <= b + tol:
            return t >= -tol
        return a + tol < t <= b + tol

    def forcing(self, omega, t: float):
        return self.mode(omega) if self.active(t) else np.zeros_like(np.asarray(omega, float))


@dataclass(frozen=True)
class ControlBasis:
    modes: tuple
    N: int
    T: float

    def __post_init__(self):
        if not self.modes:
            raise ValueError("a control basis needs at least one mode")
        if len(set(self.modes)) != len(self.modes):
            raise ValueError("duplicate modes in basis")
        if self.N < 1 or not (self.T > 0):
            raise ValueError("need N >= 1 and T > 0")

    @classmethod
    def parse(cls, text: str) -> "ControlBasis":
        parts = [p.strip() for p in text.split("|")]
        if len(parts) != 3 or not parts[1].startswith("N=") or not parts[2].startswith("T="):
            raise ValueError(f"bad basis descriptor {text!r}; expected modes|N=<int>|T=<float>")
        modes = tuple(Mode.parse(m) for m in parts[0].split(","))
        try:
            N = int(parts[1][2:])
            T = float(parts[2][2:])
        except ValueError as exc:
            raise ValueError(f"bad basis descriptor {text!r}") from exc
        return cls(modes, N, T)

    @property
    def descriptor(self) -> str:
        return f"{','.join(m.name for m in self.modes)}|N={self.N}|T={self.T!r}"

    @property
    def dim(self) -> int:
        return len(self.modes) * self.N

    @property
    def ds(self) -> float:
        return self.T / self.N

    @cached_property
    def members(self) -> tuple:
        return tuple(BasisMember(m, j, self.N, self.T) for m in self.modes for j in range(self.N))

    def index(self, mode_idx: int, segment: int) -> int:
        return mode_idx * self.N + segment

    def forcing(self, alpha) -> Callable:
        """Tangential forcing ``g(omega, t)`` for coefficients ``alpha``."""
        A = np.asarray(alpha, dtype=float).reshape(len(self.modes), self.N)
        members = self.members

        def g(omega, t):
            omega = np.asarray(omega, dtype=float)
            out = np.zeros_like(omega)
            for k, mem in enumerate(members):
                c = A.flat[k]
                if c != 0.0 and mem.active(t):
                    out = out + c * mem.mode(omega)
            return out

        return g


def check_alpha(alpha, basis: ControlBasis) -> np.ndarray:
    a = np.asarray(alpha, dtype=float).ravel()
    if a.shape != (basis.dim,):
        raise ValueError(f"control vector has length {a.size}, basis dimension is {basis.dim}")
    return a


# Gram matrix and norms ----------------------------------------------------------

def gram_matrix(basis: ControlBasis) -> np.ndarray:
    """Analytic ``G_ij = int_0^T <g_i, g_j>_Gamma dt`` (diagonal for this family)."""
    d = np.array([mem.mode.circle_norm_sq * basis.ds for mem in basis.members])
    return np.diag(d)


def gram_quadrature(basis: ControlBasis, boundary_omega: np.ndarray, npts: int = 16) -> np.ndarray:
    """Gram matrix by Gauss quadrature on the circle arcs between boundary nodes.

    ``boundary_omega`` are the (sorted) polar angles of the mesh boundary
    vertices; time overlaps of segments are exact.
    """
    rule = quadrature("segment", 2 * npts - 1)
    w = np.sort(np.asarray(boundary_omega, dtype=float))
    ends = np.append(w, w[0] + 2 * math.pi)
    a, b = ends[:-1], ends[1:]
    om = (a[:, None] + rule.points[None, :] * (b - a)[:, None]).ravel()
    wt = (rule.weights[None, :] * (b - a)[:, None]).ravel()
    vals = np.array([m(om) for m in basis.modes])
    S = np.einsum("q,iq,jq->ij", wt, vals, vals)
    nm, N = len(basis.modes), basis.N
    G = np.zeros((basis.dim, basis.dim))
    for i in range(nm):
        for j in range(nm):
            for s in range(N):
                G[i * N + s, j * N + s] = S[i, j] * basis.ds
    return G


def g_norm(alpha, G: np.ndarray) -> float:
    a = np.asarray(alpha, dtype=float)
    if a.shape != (G.shape[0],):
        raise ValueError("dimension mismatch between alpha and Gram matrix")
    return float(math.sqrt(max(a @ G @ a, 0.0)))


def mode_norms(alpha, basis: ControlBasis) -> dict:
    """Scaled per-mode norms ``sqrt(sum_j alpha_ij^2 ds)``."""
    A = check_alpha(alpha, basis).reshape(len(basis.modes), basis.N)
    return {m.name: float(np.sqrt(np.sum(A[i] ** 2) * basis.ds)) for i, m in enumerate(basis.modes)}


def grad_norm_sq(b, G: np.ndarray) -> float:
    b = np.asarray(b, dtype=float)
    if b.shape != (G.shape[0],):
        raise ValueError("dimension mismatch between b and Gram matrix")
    return float(max(b @ G @ b, 0.0))


# gradients ----------------------------------------------------------------------

def solve_gram(G: np.ndarray, xi: np.ndarray) -> np.ndarray:
    L = np.linalg.cholesky(G)
    return np.linalg.solve(L.T, np.linalg.solve(L, xi))


def vf_coefficients(theta, rho, basis_velocity: np.ndarray, sampler) -> np.ndarray:
    """``int_0^T (theta grad rho, v_j) dt`` for each basis velocity ``j``.

    ``theta``/``rho`` are DG trajectories on the Stokes snapshot times,
    ``basis_velocity[j, n, :]`` the Taylor-Hood DOFs of ``v_j`` at snapshot
    ``n``; the time integral uses the trapezoid rule.
    """
    times = theta.times
    n = len(times)
    if basis_velocity.shape[1] != n or len(rho.times) != n:
        raise ValueError("trajectory and basis velocity cadences differ")
    dt = np.diff(times)
    wt = np.zeros(n)
    wt[:-1] += 0.5 * dt
    wt[1:] += 0.5 * dt
    space = theta.space
    out = np.zeros(basis_velocity.shape[0])
    for k in range(n):
        if wt[k] == 0.0:
            continue
        tq = np.einsum("kqi,ki->kq", space.Phi, theta.coef[k])
        gr = np.einsum("kqid,ki->kqd", space.GPhi, rho.coef[k])
        w = (space.wq * tq)[..., None] * gr
        dof = sampler.volume_adjoint(w)
        out += wt[k] * (basis_velocity[:, k, :] @ dof)
    return out


def gradient_vf(alpha, G: np.ndarray, gamma: float, theta, rho, basis_velocity, sampler):
    """Return ``(b, xi)`` with ``G b = xi``, ``xi_j = gamma (G alpha)_j + int (theta grad rho, v_j)``."""
    alpha = np.asarray(alpha, dtype=float)
    xi = gamma * (G @ alpha) + vf_coefficients(theta, rho, basis_velocity, sampler)
    return solve_gram(G, xi), xi


def gradient_ad(alpha, G: np.ndarray, cost_oracle: Callable, delta: float = 1e-4,
                j0: float | None = None, central: bool = False):
    """Finite-difference gradient coefficients.

    Forward differences need ``dim + 1`` oracle calls (``dim`` if ``j0`` is
    given); central differences need ``2 dim``. Returns ``(b, calls)``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    alpha = np.asarray(alpha, dtype=float)
    calls = 0
    if not central and j0 is None:
        j0 = cost_oracle(alpha)
        calls += 1
    xi = np.empty_like(alpha)
    for i in range(alpha.size):
        e = np.zeros_like(alpha)
        e[i] = delta
        if central:
            xi[i] = (cost_oracle(alpha + e) - cost_oracle(alpha - e)) / (2 * delta)
            calls += 2
        else:
            xi[i] = (cost_oracle(alpha + e) - j0) / delta
            calls += 1
    return solve_gram(G, xi), calls
