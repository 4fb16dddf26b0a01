import numpy as np
import pytest
import scipy.linalg as sla

from stirmix.mesh import build_disk_mesh
from stirmix.mixnorm import (cost, duality_invariance, helmholtz_neumann, helmholtz_solver,
                             mix_norm, trapezoid_mean)
from stirmix.transport import DGField, DGSpace, DGTrajectory, evolve, sample_analytic


def rho_star(x, y):
    return np.cos(np.pi * (x * x + y * y))


def theta_star(x, y):
    r2 = x * x + y * y
    return (1 + 4 * np.pi ** 2 * r2) * np.cos(np.pi * r2) + 4 * np.pi * np.sin(np.pi * r2)


def test_constant_maps_to_constant(dg01):
    eta = helmholtz_neumann(dg01.project(lambda x, y: 2.5 + 0 * x))
    assert np.allclose(eta.values, 2.5, atol=1e-12)


def test_mix_norm_of_constant(dg01):
    area = dg01.mesh.areas().sum()
    assert mix_norm(dg01.project(lambda x, y: 3.0 + 0 * x)) == pytest.approx(3.0 * np.sqrt(area),
                                                                             rel=1e-12)


def test_manufactured_neumann_convergence():
    errs = []
    for h in (0.1, 0.05):
        dg = DGSpace(build_disk_mesh(h), 2)
        rho = helmholtz_solver(dg).terminal_adjoint(dg.project(theta_star))
        errs.append(dg.l2_error(rho, rho_star))
    assert np.log(errs[0] / errs[1]) / np.log(2) >= 1.8


def test_integral_identity(dg01):
    th = dg01.project(lambda x, y: np.sin(2 * np.pi * y) + 0.3 * x)
    eta = helmholtz_solver(dg01).terminal_adjoint(th)
    assert eta.integral() == pytest.approx(th.integral(), abs=1e-10)


def test_linearity(dg01, rng):
    shape = dg01.zeros().coef.shape
    a, b = 1.7, -0.4
    t1, t2 = DGField(dg01, rng.standard_normal(shape)), DGField(dg01, rng.standard_normal(shape))
    e1, e2 = helmholtz_neumann(t1).values, helmholtz_neumann(t2).values
    e12 = helmholtz_neumann(a * t1 + b * t2).values
    assert np.max(np.abs(e12 - (a * e1 + b * e2))) <= 1e-12 * np.max(np.abs(e12))


def test_mix_norm_bounded_by_l2(dg01, rng):
    for _ in range(5):
        th = DGField(dg01, rng.standard_normal(dg01.zeros().coef.shape))
        assert mix_norm(th) <= th.l2_norm() + 1e-10


def test_helmholtz_dominates_mass(dg01):
    hs = helmholtz_solver(dg01)
    M1, _ = dg01.geo.p1_matrices()
    lam = sla.eigh(hs.H.toarray(), M1.toarray(), eigvals_only=True)
    assert lam.min() >= 1 - 1e-10


def test_cost_parts():
    dg = DGSpace(build_disk_mesh(0.2), 1)
    th = dg.project(lambda x, y: np.sin(2 * np.pi * y))
    c = cost(th, 1e-3, 2.0)
    assert c.penalty_part == pytest.approx(0.5e-3 * 4.0)
    assert c.total == pytest.approx(0.5 * mix_norm(th) ** 2 + 2e-3)
    with pytest.raises(ValueError):
        cost(th, 0.0, 1.0)


def test_zero_velocity_keeps_mix_norm_and_duality(dg01):
    th0 = dg01.project(lambda x, y: np.sin(2 * np.pi * y))
    vel = sample_analytic(dg01, lambda x, y, t: (0 * x, 0 * y), np.linspace(0, 1, 11))
    tr = evolve(th0, vel)
    assert abs(mix_norm(tr.final) - mix_norm(th0)) < 1e-10
    rho = evolve(helmholtz_solver(dg01).terminal_adjoint(tr.final), vel, direction="backward")
    dev, I = duality_invariance(tr, rho)
    assert dev < 1e-13 * abs(I[0])


def test_trapezoid_mean():
    t = np.linspace(0, 2, 21)
    assert trapezoid_mean(3 * t, t) == pytest.approx(3.0)
    assert trapezoid_mean([5.0], [0.0]) == 5.0


def test_duality_rejects_mismatched_grids(dg01):
    a = DGTrajectory(dg01, np.array([0.0, 1.0]), np.zeros((2,) + dg01.zeros().coef.shape))
    b = DGTrajectory(dg01, np.array([0.0, 0.5]), np.zeros((2,) + dg01.zeros().coef.shape))
    with pytest.raises(ValueError):
        duality_invariance(a, b)
