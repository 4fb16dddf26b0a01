"""SSP-RK3 upwind DG kernels for scalar transport.

Both backends advance coefficients ``theta[K, i]`` over ``nsteps`` steps
of size ``dt``, with the velocity linearly interpolated between two snapshots
(fractions ``a0 + n * da`` at step starts). Arrays:

* ``Phi[K, q, i]``, ``GPhi[K, q, i, 2]`` volume basis values and gradients,
  ``wq[K, q]`` volume weights;
* ``PhiL/PhiR[e, q, i]`` edge traces from the left/right element,
  ``we[e, q]`` edge weights, ``eL/eR`` element indices;
* ``vol[K, q, 2]`` velocity, ``vn[e, q]`` normal velocity (left to right),
  ``dv[K, q]`` divergence used by the non-conservative source;
* ``PhiB[e, q, i]``, ``wb``, ``eB``, ``vb`` the same for boundary chords.
  ``bmode`` 0 drops the boundary flux, 1 uses the interior trace in both
  directions, 2 lets material leave but not enter, 3 takes half the
  interior-trace flux (no boundary contribution to the L2 energy).
"""
from __future__ import annotations

import numpy as np

from ._accel import njit


@njit
def _rhs_numba(theta, vol, vn, dv, use_div, vb, bmode, Phi, GPhi, wq, PhiL, PhiR, we, eL, eR,
               PhiB, wb, eB, Minv, out):
    nK, nq, nb = Phi.shape
    nE, nqe = we.shape
    R = np.zeros((nK, nb))
    for K in range(nK):
        for q in range(nq):
            tq = 0.0
            for i in range(nb):
                tq += Phi[K, q, i] * theta[K, i]
            c = wq[K, q] * tq
            vx = vol[K, q, 0]
            vy = vol[K, q, 1]
            for i in range(nb):
                R[K, i] += c * (vx * GPhi[K, q, i, 0] + vy * GPhi[K, q, i, 1])
            if use_div:
                s = c * dv[K, q]
                for i in range(nb):
                    R[K, i] += s * Phi[K, q, i]
    for e in range(nE):
        L = eL[e]
        Rr = eR[e]
        for q in range(nqe):
            u = vn[e, q]
            up = 0.0
            if u > 0.0:
                for i in range(nb):
                    up += PhiL[e, q, i] * theta[L, i]
            else:
                for i in range(nb):
                    up += PhiR[e, q, i] * theta[Rr, i]
            f = we[e, q] * u * up
            for i in range(nb):
                R[L, i] -= f * PhiL[e, q, i]
                R[Rr, i] += f * PhiR[e, q, i]
    if bmode > 0:
        nB, nqb = wb.shape
        for e in range(nB):
            K = eB[e]
            for q in range(nqb):
                u = vb[e, q]
                if bmode == 2 and u <= 0.0:
                    continue
                if bmode == 3:
                    u = 0.5 * u
                up = 0.0
                for i in range(nb):
                    up += PhiB[e, q, i] * theta[K, i]
                f = wb[e, q] * u * up
                for i in range(nb):
                    R[K, i] -= f * PhiB[e, q, i]
    for K in range(nK):
        for i in range(nb):
            s = 0.0
            for j in range(nb):
                s += Minv[K, i, j] * R[K, j]
            out[K, i] = s


@njit
def rk3_numba(theta, dt, nsteps, a0, da, vol0, vol1, vn0, vn1, dv0, dv1, use_div,
              vb0, vb1, bmode, Phi, GPhi, wq, PhiL, PhiR, we, eL, eR, PhiB, wb, eB, Minv):
    u = theta.copy()
    k = np.empty_like(u)
    u1 = np.empty_like(u)
    u2 = np.empty_like(u)
    for n in range(nsteps):
        a = a0 + n * da
        for st in range(3):
            s = a if st == 0 else (a + da if st == 1 else a + 0.5 * da)
            vol = (1.0 - s) * vol0 + s * vol1
            vn = (1.0 - s) * vn0 + s * vn1
            dv = (1.0 - s) * dv0 + s * dv1
            vb = (1.0 - s) * vb0 + s * vb1
            if st == 0:
                _rhs_numba(u, vol, vn, dv, use_div, vb, bmode, Phi, GPhi, wq, PhiL, PhiR, we, eL, eR,
                           PhiB, wb, eB, Minv, k)
                u1[:, :] = u + dt * k
            elif st == 1:
                _rhs_numba(u1, vol, vn, dv, use_div, vb, bmode, Phi, GPhi, wq, PhiL, PhiR, we, eL, eR,
                           PhiB, wb, eB, Minv, k)
                u2[:, :] = 0.75 * u + 0.25 * (u1 + dt * k)
            else:
                _rhs_numba(u2, vol, vn, dv, use_div, vb, bmode, Phi, GPhi, wq, PhiL, PhiR, we, eL, eR,
                           PhiB, wb, eB, Minv, k)
                u[:, :] = u / 3.0 + (2.0 / 3.0) * (u2 + dt * k)
    return u


def _rhs_numpy(theta, vol, vn, dv, use_div, vb, bmode, Phi, GPhi, wq, PhiL, PhiR, we, eL, eR,
               PhiB, wb, eB, Minv):
    nK = theta.shape[0]
    tq = np.einsum("kqi,ki->kq", Phi, theta) * wq
    R = np.einsum("kq,kqid,kqd->ki", tq, GPhi, vol)
    if use_div:
        R += np.einsum("kq,kqi->ki", tq * dv, Phi)
    tl = np.einsum("eqi,ei->eq", PhiL, theta[eL])
    tr = np.einsum("eqi,ei->eq", PhiR, theta[eR])
    f = we * vn * np.where(vn > 0.0, tl, tr)
    fl = np.einsum("eq,eqi->ei", f, PhiL)
    fr = np.einsum("eq,eqi->ei", f, PhiR)
    nb = theta.shape[1]
    for i in range(nb):
        R[:, i] -= np.bincount(eL, weights=fl[:, i], minlength=nK)
        R[:, i] += np.bincount(eR, weights=fr[:, i], minlength=nK)
    if bmode > 0:
        tb = np.einsum("eqi,ei->eq", PhiB, theta[eB])
        u = {1: vb, 2: np.maximum(vb, 0.0), 3: 0.5 * vb}[bmode]
        fb = np.einsum("eq,eqi->ei", wb * u * tb, PhiB)
        for i in range(nb):
            R[:, i] -= np.bincount(eB, weights=fb[:, i], minlength=nK)
    return np.einsum("kij,kj->ki", Minv, R)


def rk3_numpy(theta, dt, nsteps, a0, da, vol0, vol1, vn0, vn1, dv0, dv1, use_div,
              vb0, vb1, bmode, Phi, GPhi, wq, PhiL, PhiR, we, eL, eR, PhiB, wb, eB, Minv):
    geo = (Phi, GPhi, wq, PhiL, PhiR, we, eL, eR, PhiB, wb, eB, Minv)
    u = theta.copy()

    def L(w, s):
        return _rhs_numpy(w, (1 - s) * vol0 + s * vol1, (1 - s) * vn0 + s * vn1,
                          (1 - s) * dv0 + s * dv1, use_div, (1 - s) * vb0 + s * vb1, bmode, *geo)

    for n in range(nsteps):
        a = a0 + n * da
        u1 = u + dt * L(u, a)
        u2 = 0.75 * u + 0.25 * (u1 + dt * L(u1, a + da))
        u = u / 3.0 + (2.0 / 3.0) * (u2 + dt * L(u2, a + 0.5 * da))
    return u
