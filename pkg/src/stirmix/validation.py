"""Reference scenarios used by the ``validate`` command and the test-suite."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .control import ControlBasis
from .mesh import build_disk_mesh
from .mixnorm import duality_invariance
from .problem import MixingProblem, initial_condition
from .stokes import (StokesConfig, TaylorHoodSpace, convergence_test_manufactured,
                     energy_balance_residual, solve_stokes)
from .transport import DGSpace, evolve, sample_analytic


def fitted_slope(hs, errs) -> float:
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


@dataclass
class RotationResult:
    h: float
    l2: float
    max: float
    steps: int


def rotation_test(h: float, M: int = 2, T: float = 1.0, n_frames: int = 101,
                  boundary: str = "zero") -> RotationResult:
    """Clockwise solid-body rotation of ``cos(3x + 4y)`` up to time ``T``."""
    space = DGSpace(build_disk_mesh(h), M)

    def f0(x, y):
        return np.cos(3 * x + 4 * y)

    vel = sample_analytic(space, lambda x, y, t: (y, -x), np.linspace(0.0, T, n_frames))
    tr = evolve(space.project(f0), vel, boundary=boundary)
    c, s = math.cos(T), math.sin(T)

    def exact(x, y):
        return f0(c * x - s * y, s * x + c * y)

    return RotationResult(h, space.l2_error(tr.final, exact), space.max_error(tr.final, exact),
                          tr.substeps)


def duality_problem(h: float, gamma: float = 1e-6, **kw) -> MixingProblem:
    return MixingProblem(h, ControlBasis.parse("cos2,sin2|N=2|T=1"), initial_condition("sin"),
                         gamma, **kw)


DUALITY_ALPHA = np.array([10.0, 0.0, 0.0, 20.0])  # cos2 on the first half, sin2 on the second


def duality_test(h: float, **kw) -> tuple[float, np.ndarray, np.ndarray]:
    """Max deviation of ``int rho theta`` from its time mean, plus the series."""
    P = duality_problem(h, **kw)
    vel = P.dg_velocity(DUALITY_ALPHA)
    theta = P.forward(DUALITY_ALPHA, vel)
    rho = P.backward(P.helmholtz.terminal_adjoint(theta.final), vel)
    dev, I = duality_invariance(theta, rho)
    return dev, theta.times, I


def energy_test(h: float = 0.1, dts=(0.01, 0.005), T: float = 1.0) -> list:
    space = TaylorHoodSpace(build_disk_mesh(h))

    def g(w, t):
        return np.cos(w)

    return [energy_balance_residual(solve_stokes(space, g, T, config=StokesConfig(dt=dt)), g)
            for dt in dts]


def gradient_benchmark_problem(h: float, gamma: float = 1e-3, **kw) -> MixingProblem:
    return MixingProblem(h, ControlBasis.parse("cos1|N=1|T=1"), initial_condition("tanh"),
                         gamma, **kw)


def gradient_check(h: float, alpha: float = 1.0, delta: float = 1e-4) -> dict:
    P = gradient_benchmark_problem(h)
    t = time.perf_counter()
    b_vf, _, ev = P.gradient([alpha], "VF")
    t_vf = time.perf_counter() - t
    t = time.perf_counter()
    b_ad, _, _ = P.gradient([alpha], "AD", delta, evaluation=ev)
    t_ad = time.perf_counter() - t
    return {"h": h, "vf": float(b_vf[0]), "ad": float(b_ad[0]),
            "gap": abs(b_vf[0] - b_ad[0]) / abs(b_ad[0]), "cost": ev.cost.total,
            "seconds_vf": t_vf, "seconds_ad": t_ad}


def manufactured(h_list=(0.1, 0.05), end_of_step: bool = True):
    return convergence_test_manufactured(h_list, end_of_step=end_of_step)
