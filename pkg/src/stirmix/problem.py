"""One mixing problem on a fixed mesh: cost and gradient as functions of alpha."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .control import (ControlBasis, check_alpha, g_norm, gradient_ad, gradient_vf,
                      gram_matrix, grad_norm_sq)
from .mesh import TriMesh, build_disk_mesh
from .mixnorm import CostBreakdown, cost, helmholtz_solver
from .stokes import StokesConfig, TaylorHoodSpace, precompute_basis
from .transport import DGField, DGSpace, DGTrajectory, VelocitySampler, evolve

log = logging.getLogger(__name__)

INITIAL_CONDITIONS = {
    "tanh": lambda x, y: np.tanh(y / 0.1),
    "sin": lambda x, y: np.sin(2 * np.pi * y),
    "step": lambda x, y: np.sign(y),
}


def initial_condition(name: str):
    """Named initial scalar or a numpy expression in ``x`` and ``y``."""
    if name in INITIAL_CONDITIONS:
        return INITIAL_CONDITIONS[name]
    allowed = {k: getattr(np, k) for k in ("sin", "cos", "tan", "tanh", "exp", "log", "sqrt",
                                           "sign", "abs", "pi", "arctan2", "hypot")}

    def f(x, y):
        return np.asarray(eval(name, {"__builtins__": {}}, {**allowed, "x": x, "y": y}), float)

    try:
        f(np.zeros(2), np.zeros(2))
    except Exception as exc:
        raise ValueError(f"invalid initial-condition expression {name!r}: {exc}") from exc
    return f


@dataclass
class Evaluation:
    alpha: np.ndarray
    cost: CostBreakdown
    theta: DGTrajectory | None = None


@dataclass
class Counters:
    forward: int = 0
    backward: int = 0
    seconds: dict = field(default_factory=dict)

    def tick(self, key: str, dt: float):
        self.seconds[key] = self.seconds.get(key, 0.0) + dt


class MixingProblem:
    """Cost ``J(alpha)`` and its gradient for a fixed mesh, basis and initial scalar.

    Basis velocities are solved once (optionally through the disk cache) and
    composed linearly for every ``alpha``. ``boundary`` and ``advective``
    select the DG wall flux and volume form (see :func:`stirmix.transport.evolve`).
    """

    def __init__(self, mesh: TriMesh | float, basis: ControlBasis, theta0, gamma: float,
                 M: int = 2, stokes: StokesConfig | None = None, cache_dir=None,
                 boundary: str = "zero", advective: bool = False):
        self.mesh = build_disk_mesh(mesh) if isinstance(mesh, (int, float)) else mesh
        self.basis = basis
        self.gamma = float(gamma)
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        self.stokes = stokes or StokesConfig()
        self.th = TaylorHoodSpace(self.mesh)
        self.dg = DGSpace(self.mesh, M)
        self.sampler = VelocitySampler(self.dg, self.th)
        self.helmholtz = helmholtz_solver(self.dg)
        self.G = gram_matrix(basis)
        self.boundary = boundary
        self.advective = bool(advective)
        self.theta0 = theta0 if isinstance(theta0, DGField) else self.dg.project(theta0)
        self.counters = Counters()
        t = time.perf_counter()
        trajs = precompute_basis(self.th, basis.members, basis.T, self.stokes, cache_dir)
        self.counters.tick("stokes", time.perf_counter() - t)
        self.times = trajs[0].times
        self.basis_velocity = np.stack([tr.velocity for tr in trajs])  # (dim, n, ndof)

    # building blocks -------------------------------------------------------------
    def velocity_dofs(self, alpha) -> np.ndarray:
        return np.tensordot(check_alpha(alpha, self.basis), self.basis_velocity, axes=1)

    def dg_velocity(self, alpha):
        from .stokes import VelocityTrajectory
        V = self.velocity_dofs(alpha)
        traj = VelocityTrajectory(self.th, self.times, V, np.zeros((len(self.times), 0)))
        return self.sampler.sample(traj, with_div=self.advective)

    def forward(self, alpha, vel=None) -> DGTrajectory:
        t = time.perf_counter()
        vel = vel if vel is not None else self.dg_velocity(alpha)
        out = evolve(self.theta0, vel, boundary=self.boundary, advective=self.advective)
        self.counters.forward += 1
        self.counters.tick("forward", time.perf_counter() - t)
        return out

    def backward(self, rho_T: DGField, vel) -> DGTrajectory:
        t = time.perf_counter()
        out = evolve(rho_T, vel, direction="backward", boundary=self.boundary,
                     advective=self.advective)
        self.counters.backward += 1
        self.counters.tick("backward", time.perf_counter() - t)
        return out

    def cost_of(self, alpha, theta_T: DGField) -> CostBreakdown:
        return cost(theta_T, self.gamma, g_norm(check_alpha(alpha, self.basis), self.G))

    # public API ------------------------------------------------------------------
    def evaluate(self, alpha, keep_trajectory: bool = False) -> Evaluation:
        alpha = check_alpha(alpha, self.basis).copy()
        theta = self.forward(alpha)
        c = self.cost_of(alpha, theta.final)
        return Evaluation(alpha, c, theta if keep_trajectory else None)

    def J(self, alpha) -> float:
        return self.evaluate(alpha).cost.total

    def gradient(self, alpha, method: str = "VF", delta: float = 1e-4,
                 evaluation: Evaluation | None = None):
        """Return ``(b, |grad J|^2, evaluation at alpha)``."""
        alpha = check_alpha(alpha, self.basis).copy()
        method = method.upper()
        if method == "VF":
            vel = self.dg_velocity(alpha)
            if evaluation is None or evaluation.theta is None:
                theta = self.forward(alpha, vel)
                evaluation = Evaluation(alpha, self.cost_of(alpha, theta.final), theta)
            theta = evaluation.theta
            rho_T = self.helmholtz.terminal_adjoint(theta.final)
            rho = self.backward(rho_T, vel)
            t = time.perf_counter()
            b, _ = gradient_vf(alpha, self.G, self.gamma, theta, rho, self.basis_velocity,
                               self.sampler)
            self.counters.tick("vf_integral", time.perf_counter() - t)
        elif method == "AD":
            if evaluation is None:
                evaluation = self.evaluate(alpha)
            b, _ = gradient_ad(alpha, self.G, self.J, delta, j0=evaluation.cost.total)
        else:
            raise ValueError(f"unknown gradient method {method!r}")
        return b, grad_norm_sq(b, self.G), evaluation
