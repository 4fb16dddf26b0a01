"""Time the RK3 DG kernel with the numba and pure-numpy backends.

Usage: python3 benchmarks/bench_kernels.py [--h 0.1 0.05] [--steps 20] [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from stirmix import _kernels
from stirmix.mesh import build_disk_mesh
from stirmix.transport import DGSpace, _geometry_args, sample_analytic


def _case(h: float, M: int):
    space = DGSpace(build_disk_mesh(h), M)
    vel = sample_analytic(space, lambda x, y, t: (y, -x), np.array([0.0, 1.0]))
    theta = space.project(lambda x, y: np.cos(3 * x + 4 * y)).coef
    zeros = np.zeros(space.wq.shape)
    args = (vel.vol[0], vel.vol[1], vel.vn[0], vel.vn[1], zeros, zeros, False,
            vel.vb[0], vel.vb[1], 0)
    return space, theta, args, _geometry_args(space)


def _time(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--h", type=float, nargs="+", default=[0.1, 0.05])
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--repeat", type=int, default=3)
    a = p.parse_args(argv)
    print(f"{'h':>6} {'triangles':>9} {'numba [s]':>10} {'numpy [s]':>10} {'speed-up':>9} {'max diff':>9}")
    for h in a.h:
        space, theta, args, geo = _case(h, a.M)
        dt = 0.5 * space.cfl_length / 1.0 / (2 * a.M + 1)
        # compile outside the timed region
        _kernels.rk3_numba(theta, dt, 1, 0.0, 0.0, *args, *geo)
        r_nb = _kernels.rk3_numba(theta, dt, a.steps, 0.0, 0.0, *args, *geo)
        r_np = _kernels.rk3_numpy(theta, dt, a.steps, 0.0, 0.0, *args, *geo)
        t_nb = _time(lambda: _kernels.rk3_numba(theta, dt, a.steps, 0.0, 0.0, *args, *geo), a.repeat)
        t_np = _time(lambda: _kernels.rk3_numpy(theta, dt, a.steps, 0.0, 0.0, *args, *geo), a.repeat)
        print(f"{h:6.3f} {space.mesh.n_triangles:9d} {t_nb:10.4f} {t_np:10.4f} "
              f"{t_np / t_nb:9.1f} {np.max(np.abs(r_nb - r_np)):9.1e}")


if __name__ == "__main__":
    main()
