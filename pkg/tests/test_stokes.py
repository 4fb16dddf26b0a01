import numpy as np
import pytest

from stirmix.control import ControlBasis
from stirmix.stokes import (StokesConfig, StokesError, StokesSolver, combine, energy_terms,
                            kinetic_energy, precompute_basis, read_velocity_cache, solve_stokes,
                            write_velocity_cache)


def cos1(w, t):
    return np.cos(w)


def sin2(w, t):
    return np.sin(2 * w)


@pytest.fixture(scope="module")
def traj_cos(th02):
    return solve_stokes(th02, cos1, 0.3)


def test_zero_forcing_stays_at_rest(th02):
    tr = solve_stokes(th02, None, 0.1)
    assert np.max(np.abs(tr.velocity)) == 0.0


def test_weak_divergence_every_snapshot(th02, traj_cos):
    B = th02.divergence
    for v in traj_cos.velocity:
        assert np.max(np.abs(B @ v)) <= 1e-10


def test_boundary_normal_velocity_zero_at_nodes(th02, traj_cos):
    nod = th02.nodal(traj_cos.velocity[-1])
    vn = np.sum(nod[th02.boundary_nodes] * th02.boundary_normal, axis=1)
    assert np.max(np.abs(vn)) < 1e-14


def test_linearity(th02, rng):
    a, b = rng.uniform(-10, 10, size=2)
    v1 = solve_stokes(th02, cos1, 0.2).velocity
    v2 = solve_stokes(th02, sin2, 0.2).velocity
    v12 = solve_stokes(th02, lambda w, t: a * cos1(w, t) + b * sin2(w, t), 0.2).velocity
    ref = a * v1 + b * v2
    assert np.linalg.norm(v12 - ref) <= 1e-8 * np.linalg.norm(ref)


def test_combine_matches_superposition(th02, traj_cos):
    tr2 = solve_stokes(th02, sin2, 0.3)
    c = combine([traj_cos, tr2], [2.0, -1.0])
    assert np.allclose(c.velocity, 2 * traj_cos.velocity - tr2.velocity)
    assert np.allclose((traj_cos + tr2).velocity, traj_cos.velocity + tr2.velocity)


def test_energy_positive_and_balanced(th02, traj_cos):
    e = energy_terms(traj_cos, cos1, 0.5)
    assert e["work"] > 0 and e["viscous"] > 0 and e["friction"] > 0
    assert kinetic_energy(th02, traj_cos.velocity[-1]) == pytest.approx(e["kinetic"])
    lhs, rhs = e["work"], e["kinetic"] + e["viscous"] + e["friction"]
    assert abs(lhs - rhs) / lhs < 0.02


def test_trajectory_interpolation(traj_cos):
    s = traj_cos.at(0.105)
    mid = 0.5 * (traj_cos.velocity[10] + traj_cos.velocity[11])
    assert np.allclose(s.velocity, mid)
    with pytest.raises(ValueError):
        traj_cos.at(5.0)


def test_cache_roundtrip(tmp_path, th02, traj_cos):
    p = tmp_path / "v.stirvel"
    write_velocity_cache(p, traj_cos, th02.mesh.mesh_hash, "cos1", 0.5)
    tr, mh, desc, dt, k = read_velocity_cache(p, th02)
    assert (mh, desc, k) == (th02.mesh.mesh_hash, "cos1", 0.5)
    assert np.array_equal(tr.velocity, traj_cos.velocity)
    assert np.array_equal(tr.pressure, traj_cos.pressure)


def test_precompute_uses_and_repairs_cache(tmp_path, th02):
    basis = ControlBasis.parse("cos1|N=2|T=0.2")
    first = precompute_basis(th02, basis.members, basis.T, cache_dir=tmp_path)
    files = sorted(tmp_path.iterdir())
    assert len(files) == 2
    files[0].write_bytes(b"STIRVEL v1\ncorrupt")
    again = precompute_basis(th02, basis.members, basis.T, cache_dir=tmp_path)
    for a, b in zip(first, again):
        assert np.array_equal(a.velocity, b.velocity)


def test_time_segments_switch_forcing(th02):
    basis = ControlBasis.parse("cos1|N=2|T=0.2")
    early, late = precompute_basis(th02, basis.members, basis.T)
    n_half = 10
    assert np.max(np.abs(late.velocity[: n_half + 1])) == 0.0
    assert np.max(np.abs(early.velocity[n_half])) > 0.0


def test_uzawa_failure_raises(th02):
    solver = StokesSolver(th02, StokesConfig(eps_uzawa=1e-30, uzawa_max=1))
    with pytest.raises(StokesError):
        solver.solve(cos1, 0.02)


def test_invalid_config():
    with pytest.raises(ValueError):
        StokesConfig(dt=0.0)
