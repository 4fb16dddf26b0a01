"""Command-line front end.

Every command reads an optional flat ``key = value`` file (``--config``) and
accepts the same keys as ``--key`` flags, which take precedence. Exit codes:
0 success, 1 validation failure, 2 configuration error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .control import ControlBasis, mode_norms
from .export import write_csv, write_field_vtk, write_vtk
from .mesh import build_disk_mesh, write_mesh
from .mixnorm import mix_norm
from .optimizer import OptimizerConfig, load_checkpoint, run_basic, run_relay, verify_checkpoint
from .problem import MixingProblem, initial_condition
from .stokes import StokesConfig, StokesError, TaylorHoodSpace, kinetic_energy, precompute_basis
from .transport import BOUNDARY_MODES, TransportError, write_field

log = logging.getLogger("stirmix")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
COMMANDS = ("mesh", "basis-vel", "forward", "scan", "optimize", "relay", "validate", "resume")
SUITES = ("stokes", "dg", "duality", "energy", "gradcheck")


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_int(text: str):
    return None if text.strip().lower() in ("", "none") else int(text)


def _opt_str(text: str):
    return None if text.strip().lower() in ("", "none") else text.strip()


# key -> (parser, default, help)
KEYS = {
    "h": (float, 0.1, "mesh size"),
    "hs": (_floats, [0.1, 0.05], "decreasing mesh sizes for relay"),
    "T": (float, None, "final time (may also be given inside the basis descriptor)"),
    "dt": (float, 0.01, "Stokes time step"),
    "M": (int, 2, "DG polynomial degree"),
    "k": (float, 0.5, "slip friction coefficient"),
    "gamma": (float, 1e-3, "control penalty weight"),
    "basis": (str, "cos1|N=1", "control basis, modes|N=<int>[|T=<float>]"),
    "alpha0": (_floats, [1.0], "control coefficients (comma separated)"),
    "theta0": (str, "tanh", "initial scalar: tanh, sin, step or an expression in x, y"),
    "method": (str, "VF", "gradient method, VF or AD"),
    "eps0": (float, 1e-5, "stopping tolerance"),
    "mu": (float, 0.3, "sufficient-descent constant"),
    "back_max": (int, 10, "maximum backtracking trials"),
    "grad_max": (int, 200, "maximum gradient iterations"),
    "eps_b0": (float, 1e3, "initial step size"),
    "delta": (float, 1e-4, "finite-difference increment for AD"),
    "max_new_iterations": (_opt_int, None, "pause an optimisation after this many iterations"),
    "out": (str, "stirmix_out", "output directory"),
    "checkpoint": (_opt_str, None, "checkpoint path (default <out>/optimize.ckpt)"),
    "cache_dir": (_opt_str, None, "basis-velocity cache directory"),
    "snapshots": (_floats, [], "times at which forward writes field snapshots"),
    "alpha_range": (str, "0:10", "scan range a:b (inclusive)"),
    "stride": (float, 1.0, "scan stride"),
    "boundary": (str, "zero", "DG wall flux: " + ", ".join(BOUNDARY_MODES)),
    "vtk_vertex": (_bool, True, "also write per-vertex values in VTK snapshots"),
    "eps_uzawa": (float, 1e-10, "Uzawa tolerance"),
    "uzawa_max": (int, 500, "maximum Uzawa iterations"),
}


@dataclass
class RunConfig:
    command: str
    h: float = 0.1
    hs: list = field(default_factory=lambda: [0.1, 0.05])
    T: float | None = None
    dt: float = 0.01
    M: int = 2
    k: float = 0.5
    gamma: float = 1e-3
    basis: str = "cos1|N=1"
    alpha0: list = field(default_factory=lambda: [1.0])
    theta0: str = "tanh"
    method: str = "VF"
    eps0: float = 1e-5
    mu: float = 0.3
    back_max: int = 10
    grad_max: int = 200
    eps_b0: float = 1e3
    delta: float = 1e-4
    max_new_iterations: int | None = None
    out: str = "stirmix_out"
    checkpoint: str | None = None
    cache_dir: str | None = None
    snapshots: list = field(default_factory=list)
    alpha_range: str = "0:10"
    stride: float = 1.0
    boundary: str = "zero"
    vtk_vertex: bool = True
    eps_uzawa: float = 1e-10
    uzawa_max: int = 500

    # derived, filled by validate()
    def validate(self) -> "RunConfig":
        try:
            self.control_basis = self._basis()
            self.theta0_fn = initial_condition(self.theta0)
            self.stokes = StokesConfig(k=self.k, dt=self.dt, eps_uzawa=self.eps_uzawa,
                                       uzawa_max=self.uzawa_max)
            self.optimizer = OptimizerConfig(gamma=self.gamma, eps0=self.eps0, mu=self.mu,
                                             back_max=self.back_max, grad_max=self.grad_max,
                                             eps_b0=self.eps_b0, method=self.method.upper(),
                                             delta=self.delta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not 0 < self.h < 1:
            raise ConfigError("h must lie in (0, 1)")
        if not self.hs or any(not 0 < h < 1 for h in self.hs):
            raise ConfigError("hs must be mesh sizes in (0, 1)")
        if self.M < 0:
            raise ConfigError("M must be non-negative")
        if self.boundary not in BOUNDARY_MODES:
            raise ConfigError(f"boundary must be one of {sorted(BOUNDARY_MODES)}")
        if self.stride <= 0:
            raise ConfigError("stride must be positive")
        if len(self.alpha0) != self.control_basis.dim:
            raise ConfigError(f"alpha0 has {len(self.alpha0)} entries, basis dimension is "
                              f"{self.control_basis.dim}")
        return self

    def _basis(self) -> ControlBasis:
        text = self.basis
        if "T=" not in text:
            text = f"{text}|T={1.0 if self.T is None else self.T!r}"
        b = ControlBasis.parse(text)
        if self.T is not None and abs(b.T - self.T) > 1e-12:
            raise ValueError(f"T={self.T} conflicts with the basis descriptor ({b.T})")
        return b

    def to_dict(self) -> dict:
        return asdict(self)

    def make_problem(self, h: float | None = None) -> MixingProblem:
        return MixingProblem(self.h if h is None else h, self.control_basis, self.theta0_fn,
                             self.gamma, M=self.M, stokes=self.stokes, cache_dir=self.cache_dir,
                             boundary=self.boundary)


def parse_config_file(path) -> dict:
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{path}:{n}: duplicate key {key!r}")
        out[key] = value
    return out


def build_config(command: str, file_values: dict, overrides: dict) -> RunConfig:
    raw = {**file_values, **{k: v for k, v in overrides.items() if v is not None}}
    kw = {}
    for key, text in raw.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        parser = KEYS[key][0]
        try:
            kw[key] = parser(text) if isinstance(text, str) else text
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from exc
    return RunConfig(command=command, **kw).validate()


def config_from_dict(d: dict) -> RunConfig:
    d = dict(d)
    command = d.pop("command")
    unknown = set(d) - set(KEYS)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    return RunConfig(command=command, **d).validate()


# output directory lock -----------------------------------------------------------

class OutputLock:
    """Exclusive marker file so two processes never write one output directory."""

    NAME = ".stirmix.lock"

    def __init__(self, out_dir):
        self.path = Path(out_dir) / self.NAME

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        for _ in range(2):
            try:
                fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                if self._stale():
                    self.path.unlink(missing_ok=True)
                    continue
                raise ConfigError(f"output directory {self.path.parent} is locked by another run")
            with os.fdopen(fd, "w") as fh:
                fh.write(str(os.getpid()))
            return self
        raise ConfigError(f"could not lock {self.path.parent}")

    def _stale(self) -> bool:
        try:
            pid = int(self.path.read_text().strip())
        except (OSError, ValueError):
            return True
        if pid == os.getpid():
            return False
        try:
            os.kill(pid, 0)
        except ProcessLookupError:
            return True
        except PermissionError:
            return False
        return False

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)
        return False


# commands --------------------------------------------------------------------

def _meta(cfg: RunConfig, **extra) -> dict:
    return {"h": cfg.h, "basis": cfg.control_basis.descriptor, "backend": _accel.backend_name(),
            **extra}


def cmd_mesh(cfg: RunConfig, out: Path) -> int:
    mesh = build_disk_mesh(cfg.h)
    write_mesh(mesh, out / "mesh.txt")
    write_vtk(out / "mesh.vtk", mesh, {"area": mesh.areas()}, title=f"disk mesh h={cfg.h}")
    print(f"h={cfg.h} vertices={mesh.n_vertices} triangles={mesh.n_triangles} "
          f"edges={mesh.n_edges} min_angle={mesh.min_angle():.2f} hash={mesh.mesh_hash}")
    return EXIT_OK


def cmd_basis_vel(cfg: RunConfig, out: Path) -> int:
    cache = cfg.cache_dir or str(out / "velcache")
    th = TaylorHoodSpace(build_disk_mesh(cfg.h))
    basis = cfg.control_basis
    trajs = precompute_basis(th, basis.members, basis.T, cfg.stokes, cache)
    rows = []
    for mem, tr in zip(basis.members, trajs):
        ke = [kinetic_energy(th, v) for v in tr.velocity]
        speed = float(np.max(np.hypot(*th.nodal(tr.velocity[-1]).T)))
        rows.append([mem.descriptor, float(max(ke)), ke[-1], speed, int(np.max(tr.uzawa_iterations))])
    write_csv(out / "basis_velocity.csv",
              ["member", "max_kinetic_energy", "final_kinetic_energy", "final_max_speed",
               "max_uzawa_iterations"], rows, "basis-vel", **_meta(cfg, cache=cache))
    print(f"{len(trajs)} basis velocities cached in {cache}")
    return EXIT_OK


def _snapshot_index(times: np.ndarray, t: float) -> int:
    i = int(np.argmin(np.abs(times - t)))
    if abs(times[i] - t) > 1e-9 * max(1.0, abs(t)):
        raise ConfigError(f"snapshot time {t} is not a multiple of dt within [0, T]")
    return i


def cmd_forward(cfg: RunConfig, out: Path) -> int:
    P = cfg.make_problem()
    alpha = np.array(cfg.alpha0)
    idx = [_snapshot_index(P.times, t) for t in cfg.snapshots]
    theta = P.forward(alpha)
    rows = []
    for i, t in enumerate(theta.times):
        f = theta.field(i)
        rows.append([float(t), mix_norm(f), f.l2_norm(), f.integral()])
    write_csv(out / "mixnorm_vs_time.csv", ["t", "mix_norm", "l2_norm", "mass"], rows,
              "forward", **_meta(cfg, theta0=cfg.theta0))
    V = P.velocity_dofs(alpha)
    ke_rows = [[float(t), kinetic_energy(P.th, v), float(np.max(np.hypot(*P.th.nodal(v).T)))]
               for t, v in zip(P.times, V)]
    write_csv(out / "kinetic_energy.csv", ["t", "kinetic_energy", "max_speed"], ke_rows,
              "forward", **_meta(cfg))
    for i in idx:
        f, t = theta.field(i), float(theta.times[i])
        stem = f"theta_t{t:.4f}"
        write_field(out / (stem + ".stdg"), f, t)
        write_field_vtk(out / (stem + ".vtk"), f, vertex=cfg.vtk_vertex, title=f"theta t={t}")
    c = P.cost_of(alpha, theta.final)
    print(f"J={c.total:.8e} mix_norm(T)={c.mix_norm:.6e} |g|={c.g_norm:.6e} "
          f"dg_substeps={theta.substeps}")
    return EXIT_OK


def scan_values(spec: str, stride: float) -> np.ndarray:
    try:
        a, b = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ConfigError(f"alpha_range must be a:b, got {spec!r}") from exc
    if b < a:
        return np.zeros(0)
    n = int(math.floor((b - a) / stride + 1e-9))
    return a + stride * np.arange(n + 1)


def cmd_scan(cfg: RunConfig, out: Path) -> int:
    if cfg.control_basis.dim != 1:
        raise ConfigError("scan needs a single-function basis")
    values = scan_values(cfg.alpha_range, cfg.stride)
    rows = []
    if len(values):
        P = cfg.make_problem()
        for a in values:
            c = P.evaluate([a]).cost
            rows.append([float(a), c.total, c.mix_part, c.penalty_part, c.mix_norm, c.g_norm])
            log.info("alpha=%g J=%.6e", a, c.total)
    write_csv(out / "scan.csv", ["alpha1", "J", "mix_part", "penalty_part", "mix_norm", "g_norm"],
              rows, "scan", **_meta(cfg, gamma=cfg.gamma))
    if rows:
        best = min(rows, key=lambda r: r[1])
        print(f"{len(rows)} points; smallest J={best[1]:.8e} at alpha1={best[0]:g}")
    else:
        print("empty scan range")
    return EXIT_OK


def _history_rows(states) -> tuple[list, list]:
    dim = len(states[0].records[0].alpha)
    header = (["stage", "n", "J", "mix_part", "penalty_part", "grad_sq", "beta", "backtracks",
               "eps_b", "err1", "err2", "err3", "armijo"]
              + [f"alpha{i + 1}" for i in range(dim)] + [f"b{i + 1}" for i in range(dim)])
    rows = []
    for st in states:
        for r in st.records:
            rows.append([st.stage, r.n, r.J, r.mix_part, r.penalty_part, r.grad_sq,
                         "" if r.beta is None else r.beta, r.backtracks, r.eps_b, r.err1, r.err2,
                         r.err3, int(r.armijo)] + list(r.alpha) + list(r.b))
    return header, rows


def _report(cfg: RunConfig, states, out: Path, name: str) -> None:
    header, rows = _history_rows(states)
    write_csv(out / name, header, rows, cfg.command, **_meta(cfg, gamma=cfg.gamma,
                                                             method=cfg.optimizer.method))
    st = states[-1]
    alpha = st.alpha
    norms = mode_norms(alpha, cfg.control_basis)
    print(f"J: {states[0].records[0].J:.8e} -> {st.records[-1].J:.8e}; "
          f"iterations={sum(s.iterations for s in states)} "
          f"stop={','.join(st.stop_reasons) or 'paused'}")
    print("alpha = " + ", ".join(f"{a:.6f}" for a in alpha))
    print("mode norms: " + ", ".join(f"{k}={v:.6f}" for k, v in norms.items()))


def cmd_optimize(cfg: RunConfig, out: Path) -> int:
    P = cfg.make_problem()
    ck = Path(cfg.checkpoint) if cfg.checkpoint else out / "optimize.ckpt"
    st = run_basic(P, cfg.alpha0, cfg.optimizer, checkpoint=ck,
                   max_new_iterations=cfg.max_new_iterations, run_info=cfg.to_dict())
    _report(cfg, [st], out, "history.csv")
    return EXIT_OK


def cmd_relay(cfg: RunConfig, out: Path) -> int:
    states = run_relay(cfg.make_problem, cfg.hs, cfg.alpha0, cfg.optimizer, checkpoint_dir=out,
                       run_info=cfg.to_dict())
    _report(cfg, states, out, "relay_history.csv")
    return EXIT_OK


def cmd_resume(checkpoint: Path, out: Path | None) -> int:
    try:
        state, body = load_checkpoint(checkpoint)
        run = body.get("run") or {}
        if "command" not in run:
            raise ConfigError(f"{checkpoint} carries no run configuration")
        stage = run.pop("relay_stage", None)
        cfg = config_from_dict(run)
    except (ValueError, KeyError, OSError) as exc:
        raise ConfigError(f"cannot resume from {checkpoint}: {exc}") from exc
    out = out or Path(cfg.out)
    with OutputLock(out):
        P = cfg.make_problem(body["mesh_h"])
        try:
            verify_checkpoint(body, P, cfg.optimizer)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        info = cfg.to_dict()
        if cfg.command == "optimize":
            if not state.stop_reasons:
                state = run_basic(P, None, cfg.optimizer, checkpoint=checkpoint, state=state,
                                  max_new_iterations=cfg.max_new_iterations, run_info=info)
            _report(cfg, [state], out, "history.csv")
            return EXIT_OK
        if cfg.command != "relay" or stage is None:
            raise ConfigError(f"cannot resume a {cfg.command!r} run")
        state.stage = stage
        if not state.stop_reasons:
            state = run_basic(P, None, cfg.optimizer, checkpoint=checkpoint, state=state,
                              run_info={**info, "h": body["mesh_h"], "relay_stage": stage})
            state.stage = stage
        states = []
        for k in range(stage):
            prev, _ = load_checkpoint(out / f"stage{k}.ckpt")
            prev.stage = k
            states.append(prev)
        states.append(state)
        for k in range(stage + 1, len(cfg.hs)):
            h = cfg.hs[k]
            st = run_basic(cfg.make_problem(h), states[-1].alpha, cfg.optimizer,
                           checkpoint=out / f"stage{k}.ckpt",
                           run_info={**info, "h": h, "relay_stage": k})
            st.stage = k
            states.append(st)
        _report(cfg, states, out, "relay_history.csv")
        return EXIT_OK


# validation suites -------------------------------------------------------------

@dataclass
class Check:
    name: str
    value: float
    lo: float
    hi: float

    @property
    def ok(self) -> bool:
        return bool(self.lo <= self.value <= self.hi)


def _within(name, value, ref, factor) -> Check:
    lo, hi = sorted((ref / factor, ref * factor))
    return Check(name, value, lo, hi)


def run_suite(suite: str) -> list:
    from . import validation as V

    checks = []
    if suite == "stokes":
        r = V.manufactured((0.1, 0.05))
        for row, h1, pl2 in zip(r.rows, (3.1e-2, 7.2e-3), (1.6e-2, 3.6e-3)):
            checks.append(_within(f"velocity H1 error h={row.h}", row.v_h1, h1, 2.0))
            checks.append(_within(f"pressure L2 error h={row.h}", row.p_l2, pl2, 2.0))
        checks.append(Check("velocity H1 rate", r.fitted_slope("v_h1"), 1.8, math.inf))
        checks.append(Check("pressure L2 rate", r.fitted_slope("p_l2"), 1.8, math.inf))
        bad = V.manufactured((0.1, 0.05), end_of_step=False)
        checks.append(Check("no end-of-step velocity: max error h=0.1", bad.rows[0].v_max,
                            1e2, math.inf))
    elif suite == "dg":
        res = [V.rotation_test(h) for h in (0.1, 0.05)]
        for r, ref in zip(res, (1.8e-2, 5.1e-3)):
            checks.append(_within(f"rotation L2 error h={r.h}", r.l2, ref, 2.0))
        checks.append(Check("rotation L2 slope", V.fitted_slope([r.h for r in res],
                                                                 [r.l2 for r in res]), 1.5, math.inf))
    elif suite == "duality":
        devs = [V.duality_test(h)[0] for h in (0.1, 0.05)]
        for h, d, ref in zip((0.1, 0.05), devs, (1.05e-4, 3.15e-5)):
            checks.append(_within(f"duality deviation h={h}", d, ref, 3.0))
        checks.append(Check("duality slope", V.fitted_slope([0.1, 0.05], devs), 1.5, math.inf))
    elif suite == "energy":
        r = V.energy_test(0.1, (0.01, 0.005))
        checks.append(Check("energy residual dt=0.01", r[0], 0.0, 0.05))
        checks.append(Check("energy residual halves dt (ratio)", r[1] / r[0], 0.0, 1.0 - 1e-12))
    elif suite == "gradcheck":
        g = [V.gradient_check(h) for h in (0.1, 0.05)]
        checks.append(_within("AD gradient h=0.1", g[0]["ad"], -7.82319e-3, 1.05))
        checks.append(_within("VF gradient h=0.1", g[0]["vf"], -8.86205e-3, 1.05))
        checks.append(_within("VF/AD gap h=0.1", g[0]["gap"], 0.132, 1.5))
        checks.append(_within("VF/AD gap h=0.05", g[1]["gap"], 0.074, 1.5))
        checks.append(Check("gap shrinks (ratio)", g[1]["gap"] / g[0]["gap"], 0.0, 1.0 - 1e-12))
    else:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    return checks


def cmd_validate(cfg: RunConfig, out: Path, suite: str) -> int:
    t0 = time.perf_counter()
    checks = run_suite(suite)
    for c in checks:
        print(f"{'PASS' if c.ok else 'FAIL'}  {c.name}: {c.value:.6g}  (accept [{c.lo:.4g}, {c.hi:.4g}])")
    write_csv(out / f"validate_{suite}.csv", ["check", "value", "low", "high", "pass"],
              [[c.name, c.value, c.lo, c.hi, int(c.ok)] for c in checks], "validate",
              suite=suite, seconds=f"{time.perf_counter() - t0:.1f}")
    return EXIT_OK if all(c.ok for c in checks) else EXIT_VALIDATION


# argument parsing ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    for key, (_, default, text) in KEYS.items():
        common.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None,
                            metavar="VALUE", help=f"{text} (default: {default})")
    p = argparse.ArgumentParser(prog="stirmix", description="Optimal boundary stirring on the disk.")
    p.add_argument("--version", action="version", version=f"stirmix {__version__}")
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {"mesh": "build and export the disk mesh",
             "basis-vel": "precompute basis velocities into the cache",
             "forward": "transport theta0 under a fixed control",
             "scan": "tabulate J over a range of alpha1",
             "optimize": "gradient descent on one mesh",
             "relay": "gradient descent over a sequence of meshes",
             "validate": "run a reference suite and compare against stored values"}
    for name in COMMANDS[:-1]:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "validate":
            sp.add_argument("suite", choices=SUITES)
    rp = sub.add_parser("resume", help="continue an optimize or relay run from its checkpoint")
    rp.add_argument("checkpoint")
    rp.add_argument("--out", default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "resume":
            return cmd_resume(Path(args.checkpoint), Path(args.out) if args.out else None)
        file_values = parse_config_file(args.config) if args.config else {}
        overrides = {k: getattr(args, k) for k in KEYS}
        cfg = build_config(args.command, file_values, overrides)
        out = Path(cfg.out)
        with OutputLock(out):
            if args.command == "validate":
                return cmd_validate(cfg, out, args.suite)
            handler = {"mesh": cmd_mesh, "basis-vel": cmd_basis_vel, "forward": cmd_forward,
                       "scan": cmd_scan, "optimize": cmd_optimize, "relay": cmd_relay}
            return handler[args.command](cfg, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StokesError, TransportError, RuntimeError, np.linalg.LinAlgError, OSError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
