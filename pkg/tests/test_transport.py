import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stirmix import _kernels
from stirmix.quadrature import quadrature
from stirmix.stokes import solve_stokes
from stirmix.transport import (DGField, DGSpace, TransportError, VelocitySampler, basis_index,
                               cfl_timestep, evolve, exponents, gradient, mass_matrix, n_basis,
                               read_field, sample_analytic, write_field, _geometry_args)

TRI = np.array([[0.1, 0.2], [0.6, 0.25], [0.3, 0.7]])


@pytest.mark.parametrize("ij,s", [((0, 0), 1), ((1, 0), 2), ((0, 1), 3), ((0, 2), 6), ((2, 0), 4)])
def test_basis_index_examples(ij, s):
    assert basis_index(*ij) == s


@given(st.integers(0, 6))
def test_basis_index_bijective(M):
    idx = [basis_index(i, j, M) for i, j in exponents(M)]
    assert idx == list(range(1, n_basis(M) + 1))


def test_basis_index_rejects_out_of_range():
    with pytest.raises(ValueError):
        basis_index(2, 1, 2)
    with pytest.raises(ValueError):
        basis_index(-1, 0)


def test_mass_matrix_spd_and_constant():
    A = mass_matrix(TRI, 2, quadrature("triangle", 5))
    assert A.shape == (6, 6)
    np.linalg.cholesky(A)
    area = 0.5 * abs(np.linalg.det(np.column_stack([TRI[1] - TRI[0], TRI[2] - TRI[0]])))
    assert mass_matrix(TRI, 0, quadrature("triangle", 1))[0, 0] == pytest.approx(area)


def test_mass_matrix_rejects_small_rule():
    with pytest.raises(ValueError):
        mass_matrix(TRI, 2, quadrature("triangle", 2))  # 3 points < 6


@pytest.mark.parametrize("vmax,h,M,expected", [(1.0, 0.1, 2, 0.01881), (2.0, 0.1, 0, 0.05652)])
def test_cfl_examples(vmax, h, M, expected):
    assert cfl_timestep(vmax, h, M) == pytest.approx(expected, rel=1e-12)


def test_cfl_zero_velocity_uses_cap():
    assert cfl_timestep(0.0, 0.1, 2, cap=0.01) == 0.01
    with pytest.raises(ValueError):
        cfl_timestep(0.0, 0.1, 2)
    with pytest.raises(ValueError):
        cfl_timestep(1.0, 0.1, 7)


def test_projection_reproduces_polynomials(dg01):
    f = lambda x, y: 1 + 2 * x - y + 0.5 * x * x - 3 * x * y + y * y
    p = dg01.project(f)
    assert dg01.max_error(p, f) < 1e-12
    one = dg01.project(lambda x, y: np.ones_like(x))
    # monomial coefficients are compared in element-size units
    deg = exponents(2).sum(axis=1)
    scaled = one.coef * dg01.scale[:, None] ** deg[None, :]
    assert np.allclose(scaled[:, 0], 1.0, atol=1e-13)
    assert np.max(np.abs(scaled[:, 1:])) < 1e-12


def test_projection_integral_tanh(dg01):
    from stirmix.quadrature import quadrature as q
    f = lambda x, y: np.tanh(y / 0.1)
    p = dg01.project(f)
    rule = q("triangle", 8)
    V = dg01.mesh.vertices[dg01.mesh.triangles]
    J = np.stack([V[:, 1] - V[:, 0], V[:, 2] - V[:, 0]], axis=-1)
    X = V[:, None, 0, :] + np.einsum("kdj,qj->kqd", J, rule.points)
    ref = np.sum(np.abs(np.linalg.det(J))[:, None] * rule.weights * f(X[..., 0], X[..., 1]))
    assert abs(p.integral() - ref) < 1e-6


def test_gradient_exact(dg01):
    p = dg01.project(lambda x, y: x * x + y * y)
    gx, gy = gradient(p)
    lo = dg01.lower
    assert lo.max_error(gx, lambda x, y: 2 * x) < 1e-12
    assert lo.max_error(gy, lambda x, y: 2 * y) < 1e-12


def test_gradient_finite_difference_probe(dg01, rng):
    f = DGField(dg01, rng.standard_normal(dg01.zeros().coef.shape))
    gx, gy = gradient(f)
    tri = np.arange(0, dg01.mesh.n_triangles, 37)
    pts = dg01.mesh.centroids()[tri]
    eps = 1e-6
    fdx = (f.evaluate(tri, pts + [eps, 0]) - f.evaluate(tri, pts - [eps, 0])) / (2 * eps)
    fdy = (f.evaluate(tri, pts + [0, eps]) - f.evaluate(tri, pts - [0, eps])) / (2 * eps)
    assert np.allclose(gx.evaluate(tri, pts), fdx, atol=1e-6)
    assert np.allclose(gy.evaluate(tri, pts), fdy, atol=1e-6)


def test_gradient_of_constant_space_rejected(mesh01):
    with pytest.raises(ValueError):
        gradient(DGSpace(mesh01, 0).zeros())


def test_zero_velocity_is_identity(dg01):
    f0 = dg01.project(lambda x, y: np.sin(3 * x) * y)
    vel = sample_analytic(dg01, lambda x, y, t: (0 * x, 0 * y), np.linspace(0, 0.5, 6))
    tr = evolve(f0, vel)
    assert np.max(np.abs(tr.final.coef - f0.coef)) <= 4 * np.finfo(float).eps * np.max(np.abs(f0.coef))


def test_rotation_matches_exact_solution(dg01):
    f0 = lambda x, y: np.cos(3 * x + 4 * y)
    vel = sample_analytic(dg01, lambda x, y, t: (y, -x), np.linspace(0, 0.5, 51))
    tr = evolve(dg01.project(f0), vel)
    c, s = np.cos(0.5), np.sin(0.5)
    err = dg01.l2_error(tr.final, lambda x, y: f0(c * x - s * y, s * x + c * y))
    assert err < 1.5e-2


def test_forward_backward_round_trip(dg01):
    f0 = dg01.project(lambda x, y: np.cos(3 * x + 4 * y))
    vel = sample_analytic(dg01, lambda x, y, t: (y, -x), np.linspace(0, 0.5, 51))
    fwd = evolve(f0, vel)
    back = evolve(fwd.final, vel, direction="backward")
    c, s = np.cos(0.5), np.sin(0.5)
    one_way = dg01.l2_error(fwd.final, lambda x, y: np.cos(3 * (c * x - s * y) + 4 * (s * x + c * y)))
    assert (back.field(0) - f0).l2_norm() <= 2 * one_way


def test_stokes_velocity_conserves_mass(mesh01, th01, dg01):
    tr = solve_stokes(th01, lambda w, t: np.cos(w), 0.3)
    vel = VelocitySampler(dg01, th01).sample(tr)
    f0 = dg01.project(lambda x, y: 1.0 + np.tanh(y / 0.1))
    out = evolve(f0, vel)
    assert abs(out.final.integral() - f0.integral()) <= 1e-12 * abs(f0.integral())


def test_l2_dissipative_with_skew_wall_flux(dg01):
    f0 = dg01.project(lambda x, y: np.cos(3 * x + 4 * y))
    vel = sample_analytic(dg01, lambda x, y, t: (y, -x), np.linspace(0, 0.3, 31))
    norms = [f0.l2_norm()]
    evolve(f0, vel, step_norms=norms, boundary="skew")
    assert np.max(np.diff(norms)) <= 1e-8


def test_requested_window_must_be_covered(dg01):
    vel = sample_analytic(dg01, lambda x, y, t: (y, -x), np.linspace(0, 0.1, 11))
    with pytest.raises(TransportError):
        evolve(dg01.zeros(), vel, t1=0.5)
    with pytest.raises(TransportError):
        evolve(dg01.zeros(), vel, t1=0.055)


def test_field_file_roundtrip(tmp_path, dg01, rng):
    f = DGField(dg01, rng.standard_normal(dg01.zeros().coef.shape))
    write_field(tmp_path / "f.stdg", f, 0.25)
    g, t = read_field(tmp_path / "f.stdg", dg01)
    assert t == 0.25 and np.array_equal(g.coef, f.coef)
    with pytest.raises(ValueError):
        read_field(tmp_path / "f.stdg", DGSpace(dg01.mesh, 1))


def test_numba_and_numpy_kernels_agree(dg01):
    f0 = dg01.project(lambda x, y: np.cos(3 * x + 4 * y)).coef
    vel = sample_analytic(dg01, lambda x, y, t: (y + 0.2 * t, -x), np.array([0.0, 0.1]))
    z = np.zeros(dg01.wq.shape)
    for bmode in range(4):
        args = (vel.vol[0], vel.vol[1], vel.vn[0], vel.vn[1], z, z, False, vel.vb[0], vel.vb[1],
                bmode)
        a = _kernels.rk3_numba(f0, 0.01, 5, 0.0, 0.2, *args, *_geometry_args(dg01))
        b = _kernels.rk3_numpy(f0, 0.01, 5, 0.0, 0.2, *args, *_geometry_args(dg01))
        assert np.max(np.abs(a - b)) < 1e-12
