import math
from types import SimpleNamespace

import numpy as np
import pytest

from stirmix.mixnorm import CostBreakdown
from stirmix.optimizer import (STOP_ERR3, STOP_MAXITER, OptimizerConfig, backtrack,
                               convergence_rate, load_checkpoint, run_basic, run_relay,
                               save_checkpoint, verify_checkpoint)


class Quadratic:
    """J(a) = 0.5 (a - c)^T H (a - c) + offset, with G = I."""

    def __init__(self, c, H, offset=0.1, tag="q"):
        self.c, self.H, self.offset = np.asarray(c, float), np.asarray(H, float), offset
        self.G = np.eye(len(self.c))
        self.mesh = SimpleNamespace(mesh_hash="m-" + tag, h=0.1)
        self.basis = SimpleNamespace(descriptor="quad|N=1|T=1")
        self.calls = 0

    def evaluate(self, a, keep_trajectory=False):
        self.calls += 1
        a = np.asarray(a, float)
        d = a - self.c
        J = 0.5 * d @ self.H @ d + self.offset
        return SimpleNamespace(alpha=a, cost=CostBreakdown(J, 0.0, math.sqrt(2 * J), 0.0))

    def gradient(self, a, method="VF", delta=1e-4, evaluation=None):
        a = np.asarray(a, float)
        ev = evaluation or self.evaluate(a)
        b = self.H @ (a - self.c)
        return b, float(b @ b), ev


def test_armijo_closed_form():
    cfg = OptimizerConfig(gamma=1.0, mu=0.3)
    J = lambda a: 0.5 * float(a @ a)
    beta, new, ev, count, e1, e2, ok = backtrack(np.array([1.0]), np.array([1.0]), 0.5, 1.0, 1.0,
                                                 J, np.eye(1), cfg)
    assert (beta, count, ok) == (1.0, 1, True)
    assert new.tolist() == [0.0]


def test_backtrack_cap_when_never_descending():
    cfg = OptimizerConfig(gamma=1.0, back_max=10, eps0=1e-30)
    beta, new, ev, count, e1, e2, ok = backtrack(np.array([1.0]), np.array([1.0]), 0.5, 1.0, 1.0,
                                                 lambda a: 10.0, np.eye(1), cfg)
    assert count == 10 and not ok


def test_run_basic_properties():
    P = Quadratic([3.0, -1.0], [[2.0, 0.3], [0.3, 1.0]])
    cfg = OptimizerConfig(gamma=1.0, eps_b0=4.0)
    st = run_basic(P, [0.0, 0.0], cfg)
    J = st.costs
    assert np.all(np.diff(J) < 0)
    for prev, rec in zip(st.records, st.records[1:]):
        assert rec.eps_b == 2.0 * rec.beta
    assert st.stop_reasons
    assert np.allclose(st.alpha, P.c, atol=1e-2)


def test_stops_immediately_on_zero_gradient():
    P = Quadratic([1.0], [[1.0]])
    st = run_basic(P, [1.0], OptimizerConfig(gamma=1.0))
    assert st.iterations == 0 and st.stop_reasons == [STOP_ERR3]


def test_grad_max_cap():
    P = Quadratic([50.0], [[1e-3]])
    st = run_basic(P, [0.0], OptimizerConfig(gamma=1.0, grad_max=3, eps_b0=1.0))
    assert st.iterations == 3 and STOP_MAXITER in st.stop_reasons


def test_checkpoint_resume_bitwise(tmp_path):
    cfg = OptimizerConfig(gamma=1.0, eps_b0=2.0, grad_max=12)
    H = [[3.0, 0.2], [0.2, 0.5]]
    full = run_basic(Quadratic([2.0, 5.0], H), [0.0, 0.0], cfg)
    ck = tmp_path / "run.ckpt"
    run_basic(Quadratic([2.0, 5.0], H), [0.0, 0.0], cfg, checkpoint=ck, max_new_iterations=4)
    state, body = load_checkpoint(ck)
    assert state.iterations == 4
    P = Quadratic([2.0, 5.0], H)
    verify_checkpoint(body, P, cfg)
    resumed = run_basic(P, None, cfg, checkpoint=ck, state=state)
    assert [r.alpha for r in resumed.records] == [r.alpha for r in full.records]
    assert resumed.stop_reasons == full.stop_reasons


def test_checkpoint_rejects_other_config(tmp_path):
    P = Quadratic([1.0], [[1.0]])
    cfg = OptimizerConfig(gamma=1.0)
    ck = tmp_path / "c.ckpt"
    run_basic(P, [0.0], cfg, checkpoint=ck, max_new_iterations=1)
    _, body = load_checkpoint(ck)
    with pytest.raises(ValueError):
        verify_checkpoint(body, P, OptimizerConfig(gamma=2.0))
    with pytest.raises(ValueError):
        verify_checkpoint(body, Quadratic([1.0], [[1.0]], tag="other"), cfg)
    (tmp_path / "bad.ckpt").write_text("nope\n{}")
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "bad.ckpt")


def test_relay_single_stage_equals_basic():
    cfg = OptimizerConfig(gamma=1.0, eps_b0=2.0)
    a = run_basic(Quadratic([2.0], [[1.5]]), [0.0], cfg)
    (b,) = run_relay(lambda h: Quadratic([2.0], [[1.5]]), [0.1], [0.0], cfg)
    assert [r.alpha for r in a.records] == [r.alpha for r in b.records]


def test_relay_seeds_next_stage():
    cfg = OptimizerConfig(gamma=1.0, eps_b0=2.0)
    targets = {0.1: [2.0], 0.05: [2.1]}
    states = run_relay(lambda h: Quadratic(targets[h], [[1.0]]), [0.1, 0.05], [0.0], cfg)
    assert states[1].records[0].alpha == list(states[0].alpha)
    with pytest.raises(ValueError):
        run_relay(lambda h: None, [0.05, 0.1], [0.0], cfg)


def test_convergence_rate_examples():
    q = 0.5
    r, mean, _ = convergence_rate(1.0 + 3.0 * q ** np.arange(8), J_star=1.0)
    assert np.allclose(r, 1.0) and mean == pytest.approx(1.0)
    r2, _, _ = convergence_rate(1.0 + 0.9 ** (2.0 ** np.arange(5)), J_star=1.0)
    assert np.allclose(r2, 2.0)
    with pytest.raises(ValueError):
        convergence_rate([1.0, 2.0])


def test_invalid_config():
    with pytest.raises(ValueError):
        OptimizerConfig(gamma=0.0)
    with pytest.raises(ValueError):
        OptimizerConfig(gamma=1.0, method="XY")
