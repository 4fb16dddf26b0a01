"""Gradient descent with Armijo backtracking, step doubling and mesh relay."""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .control import g_norm, grad_norm_sq

log = logging.getLogger(__name__)

CKPT_HEADER = "STIRCKPT v1"
STOP_ERR3 = "err3"
STOP_MAXITER = "max_iterations"
STOP_RELCHANGE = "relative_change"


@dataclass(frozen=True)
class OptimizerConfig:
    gamma: float
    eps0: float = 1e-5
    mu: float = 0.3
    back_max: int = 10
    grad_max: int = 200
    eps_b0: float = 1e3
    method: str = "VF"
    delta: float = 1e-4

    def __post_init__(self):
        if not (self.gamma > 0 and 0 < self.mu < 1 and self.eps0 > 0 and self.eps_b0 > 0):
            raise ValueError(f"invalid optimizer configuration {self}")
        if self.method.upper() not in ("VF", "AD"):
            raise ValueError("method must be VF or AD")
        if self.back_max < 1 or self.grad_max < 0:
            raise ValueError("iteration caps must be positive")

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(asdict(self), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class IterationRecord:
    n: int
    alpha: list
    J: float
    mix_part: float
    penalty_part: float
    mix_norm: float
    g_norm: float
    b: list
    grad_sq: float
    beta: float | None = None
    backtracks: int = 0
    eps_b: float | None = None
    err1: float = 1e10
    err2: float = 1e10
    err3: float = 1e10
    armijo: bool = True


@dataclass
class OptimizerState:
    records: list = field(default_factory=list)
    stop_reasons: list = field(default_factory=list)
    eps_b: float = 0.0
    err1: float = 1e10
    err2: float = 1e10
    seconds: dict = field(default_factory=dict)
    stage: int = 0

    @property
    def alpha(self) -> np.ndarray:
        return np.array(self.records[-1].alpha)

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.J for r in self.records])

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    @property
    def total_backtracks(self) -> int:
        return sum(r.backtracks for r in self.records)


def backtrack(alpha, b, J0: float, grad_sq: float, eps_b: float, cost_oracle: Callable,
              G: np.ndarray, config: OptimizerConfig):
    """Inner loop of the listing.

    Starts from ``beta = 2 eps_b`` and halves before each trial; stops when
    the sufficient-descent test holds, after ``back_max`` trials, or when both
    relative changes drop below ``eps0``. Returns
    ``(beta, alpha_new, evaluation, count, err1, err2, armijo_ok)``.
    """
    alpha = np.asarray(alpha, dtype=float)
    b = np.asarray(b, dtype=float)
    gn = g_norm(alpha, G)
    beta = 2.0 * eps_b
    jcost = 1e10
    err1 = err2 = 1e10
    count = 0
    new_alpha, ev = alpha, None
    while (count < config.back_max and jcost >= J0 - beta * config.mu * grad_sq
           and (err1 > config.eps0 or err2 > config.eps0)):
        beta = beta / 2.0
        new_alpha = alpha - beta * b
        ev = cost_oracle(new_alpha)
        jcost = ev.cost.total if hasattr(ev, "cost") else float(ev)
        step = g_norm(new_alpha - alpha, G)
        err1 = step / gn if gn > 0 else step
        err2 = abs(jcost - J0) / J0 if J0 != 0 else abs(jcost - J0)
        count += 1
    ok = bool(jcost < J0 - beta * config.mu * grad_sq)
    return beta, new_alpha, ev, count, err1, err2, ok


def _record(n, alpha, ev, b, grad_sq) -> IterationRecord:
    c = ev.cost
    return IterationRecord(n=n, alpha=[float(a) for a in alpha], J=float(c.total),
                           mix_part=float(c.mix_part), penalty_part=float(c.penalty_part),
                           mix_norm=float(c.mix_norm), g_norm=float(c.g_norm),
                           b=[float(x) for x in b], grad_sq=float(grad_sq))


def _stop_reasons(state: OptimizerState, n: int, config: OptimizerConfig) -> list:
    r = state.records[-1]
    out = []
    if r.err3 <= config.eps0:
        out.append(STOP_ERR3)
    if n >= config.grad_max:
        out.append(STOP_MAXITER)
    if state.err1 <= config.eps0 and state.err2 <= config.eps0:
        out.append(STOP_RELCHANGE)
    return out


def run_basic(problem, alpha0, config: OptimizerConfig, checkpoint: str | os.PathLike | None = None,
              state: OptimizerState | None = None, callback: Callable | None = None,
              max_new_iterations: int | None = None, run_info: dict | None = None) -> OptimizerState:
    """Gradient descent on ``problem`` (a :class:`~stirmix.problem.MixingProblem`).

    Pass ``state`` (from :func:`load_checkpoint`) to continue an interrupted
    run. ``max_new_iterations`` stops early without a stop reason, which is
    how checkpoint/restart is exercised. ``run_info`` is stored verbatim in
    the checkpoint so a front end can rebuild the problem on resume.
    """
    method = config.method.upper()
    keep = method == "VF"
    t0 = time.perf_counter()

    def oracle(a):
        return problem.evaluate(a, keep_trajectory=keep)

    if state is None:
        state = OptimizerState(eps_b=config.eps_b0)
        ev = oracle(np.asarray(alpha0, dtype=float))
        b, gsq, ev = problem.gradient(ev.alpha, method, config.delta, evaluation=ev)
        rec = _record(0, ev.alpha, ev, b, gsq)
        rec.err3 = math.sqrt(gsq) / (1.0 + rec.J)
        rec.eps_b = config.eps_b0
        state.records.append(rec)
        if checkpoint:
            save_checkpoint(checkpoint, state, problem, config, run_info)
    n = state.iterations
    fresh = 0
    while True:
        reasons = _stop_reasons(state, n, config)
        if reasons:
            state.stop_reasons = reasons
            break
        if max_new_iterations is not None and fresh >= max_new_iterations:
            break
        cur = state.records[-1]
        alpha = np.array(cur.alpha)
        beta, new_alpha, ev, count, err1, err2, ok = backtrack(
            alpha, np.array(cur.b), cur.J, cur.grad_sq, state.eps_b, oracle, problem.G, config)
        if not ok:
            log.warning("iteration %d: sufficient descent not reached after %d trials", n + 1, count)
        b, gsq, ev = problem.gradient(new_alpha, method, config.delta, evaluation=ev)
        rec = _record(n + 1, new_alpha, ev, b, gsq)
        rec.beta, rec.backtracks, rec.armijo = float(beta), count, ok
        rec.err1, rec.err2 = float(err1), float(err2)
        rec.err3 = math.sqrt(gsq) / (1.0 + rec.J)
        state.err1, state.err2 = err1, err2
        state.eps_b = 2.0 * beta
        rec.eps_b = state.eps_b
        state.records.append(rec)
        n += 1
        fresh += 1
        log.info("iter %d J=%.6e beta=%.3e back=%d err3=%.2e", n, rec.J, beta, count, rec.err3)
        if checkpoint:
            save_checkpoint(checkpoint, state, problem, config, run_info)
        if callback:
            callback(state)
    state.seconds["total"] = state.seconds.get("total", 0.0) + time.perf_counter() - t0
    if checkpoint:
        save_checkpoint(checkpoint, state, problem, config, run_info)
    return state


def run_relay(make_problem: Callable, hs, alpha0, config: OptimizerConfig,
              checkpoint_dir=None, run_info: dict | None = None) -> list:
    """Run :func:`run_basic` on each mesh size in turn, seeding with the previous optimum.

    ``make_problem(h)`` builds the problem for mesh size ``h``. Returns one
    state per stage; the first record of each later stage is the coarse
    optimum re-evaluated on the finer mesh, so its cost may jump.
    """
    hs = list(hs)
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("relay mesh sizes must decrease")
    states = []
    alpha = np.asarray(alpha0, dtype=float)
    for k, h in enumerate(hs):
        problem = make_problem(h)
        ck = None if checkpoint_dir is None else Path(checkpoint_dir) / f"stage{k}.ckpt"
        info = None if run_info is None else {**run_info, "h": h, "relay_stage": k}
        st = run_basic(problem, alpha, config, checkpoint=ck, run_info=info)
        st.stage = k
        if states:
            log.info("relay h=%g: cost %.6e -> %.6e at transition", h, states[-1].records[-1].J,
                     st.records[0].J)
        states.append(st)
        alpha = st.alpha
    return states


def convergence_rate(J, J_star: float | None = None):
    """``r_k = ln|e_{k+2}/e_{k+1}| / ln|e_{k+1}/e_k|`` with ``e_k = J_k - J*``.

    ``J*`` defaults to the last entry, which is then excluded. Steps with a
    zero error or a zero denominator are skipped. Returns ``(rates, mean, skipped)``.
    """
    J = np.asarray(J, dtype=float)
    if J_star is None:
        J_star = J[-1]
        J = J[:-1]
    if len(J) < 3:
        raise ValueError("need at least three costs")
    e = np.abs(J - J_star)
    rates, skipped = [], []
    for k in range(len(e) - 2):
        with np.errstate(divide="ignore", invalid="ignore"):
            num = np.log(e[k + 2] / e[k + 1])
            den = np.log(e[k + 1] / e[k])
        if not (np.isfinite(num) and np.isfinite(den)) or den == 0:
            skipped.append(k)
            continue
        rates.append(float(num / den))
    mean = float(np.mean(rates)) if rates else float("nan")
    return np.array(rates), mean, skipped


# checkpoints --------------------------------------------------------------------

def save_checkpoint(path, state: OptimizerState, problem, config: OptimizerConfig,
                    run_info: dict | None = None) -> None:
    body = {
        "config": asdict(config),
        "config_hash": config.digest(),
        "mesh_hash": problem.mesh.mesh_hash,
        "mesh_h": problem.mesh.h,
        "basis": problem.basis.descriptor,
        "eps_b": state.eps_b,
        "err1": state.err1,
        "err2": state.err2,
        "stop_reasons": state.stop_reasons,
        "records": [asdict(r) for r in state.records],
        "run": run_info or {},
    }
    tmp = Path(str(path) + ".tmp")
    # repr-exact floats keep resumed runs bitwise identical
    tmp.write_text(CKPT_HEADER + "\n" + json.dumps(body, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def load_checkpoint(path) -> tuple[OptimizerState, dict]:
    text = Path(path).read_text(encoding="utf-8")
    head, _, rest = text.partition("\n")
    if head != CKPT_HEADER:
        raise ValueError(f"{path}: not a {CKPT_HEADER} file")
    body = json.loads(rest)
    st = OptimizerState(records=[IterationRecord(**r) for r in body["records"]],
                        stop_reasons=list(body["stop_reasons"]), eps_b=body["eps_b"],
                        err1=body["err1"], err2=body["err2"],
                        seconds={"total": 0.0})
    return st, body


def verify_checkpoint(body: dict, problem, config: OptimizerConfig) -> None:
    if body["config_hash"] != config.digest():
        raise ValueError("checkpoint was written with a different optimizer configuration")
    if body["mesh_hash"] != problem.mesh.mesh_hash or body["basis"] != problem.basis.descriptor:
        raise ValueError("checkpoint belongs to a different mesh or basis")
