"""Fixed-step time integration: implicit midpoint (solved by JFNK) and the
explicit Bogacki-Shampine third-order scheme."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigurationError, SolverError
from .krylov import jfnk_solve
from .vlasov import SpectralState


class Method(str, Enum):
    IMPLICIT_MIDPOINT = "implicit_midpoint"
    RK3_BOGACKI_SHAMPINE = "rk3"


@dataclass
class StepperConfig:
    dt: float
    method: Method = Method.IMPLICIT_MIDPOINT
    newton_rel_tol: float = 1e-8
    newton_abs_tol: float = 1e-14
    krylov_rel_tol: float = 1e-5
    krylov_restart: int = 30
    max_newton: int = 50

    def __post_init__(self):
        self.method = Method(self.method)
        if not (math.isfinite(self.dt) and self.dt != 0):
            raise ConfigurationError(f"dt must be a nonzero finite number, got {self.dt!r}")
        for name in ("newton_rel_tol", "newton_abs_tol", "krylov_rel_tol"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")


@dataclass
class StepStats:
    steps: int = 0
    newton_iterations: int = 0
    krylov_iterations: int = 0
    rhs_evaluations: int = 0

    def as_dict(self):
        return dict(self.__dict__)


def _rhs_callable(system):
    return system.evaluate if hasattr(system, "evaluate") else system


def _flat(state):
    return state.flatten() if isinstance(state, SpectralState) else np.asarray(state, dtype=float)


def _restore(template, flat):
    return template.like(flat) if isinstance(template, SpectralState) else flat.reshape(np.shape(template))


def step_implicit_midpoint(state, t, cfg, system, stats=None, dt=None):
    """One implicit midpoint step.

    Solves ``y1 = y0 + dt f((y0 + y1) / 2)`` for ``y1`` with JFNK, starting
    from ``y0``. ``system`` is either a callable on flat vectors or an object
    with an ``evaluate`` method.
    """
    f = _rhs_callable(system)
    h = cfg.dt if dt is None else dt
    y0 = _flat(state)
    count = [0]

    def residual(y1):
        count[0] += 1
        return y1 - y0 - h * f(0.5 * (y0 + y1))

    try:
        y1, rep = jfnk_solve(residual, y0, cfg.newton_rel_tol, cfg.newton_abs_tol, cfg.krylov_rel_tol,
                             max_newton=cfg.max_newton, restart=cfg.krylov_restart)
    except SolverError as exc:
        exc.context.update({"time": t, "dt": h})
        raise
    if stats is not None:
        stats.steps += 1
        stats.newton_iterations += rep.iterations
        stats.krylov_iterations += rep.linear_iterations
        stats.rhs_evaluations += count[0]
    return _restore(state, y1)


def step_rk3(state, t, cfg, system, stats=None, dt=None):
    """One Bogacki-Shampine third-order step (the embedded second-order
    estimate is not used)."""
    f = _rhs_callable(system)
    h = cfg.dt if dt is None else dt
    y = _flat(state)
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.75 * h * k2)
    if stats is not None:
        stats.steps += 1
        stats.rhs_evaluations += 3
    return _restore(state, y + h * (2 / 9 * k1 + 1 / 3 * k2 + 4 / 9 * k3))


STEPPERS = {
    Method.IMPLICIT_MIDPOINT: step_implicit_midpoint,
    Method.RK3_BOGACKI_SHAMPINE: step_rk3,
}


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    stats: StepStats = field(default_factory=StepStats)
    final_state: object = None
    final_time: float = 0.0


def step_plan(t0, t_final, dt, snapshot_times=()):
    """Number of steps, signed step size and the step index of each snapshot.

    The step count is ``round(span / dt)`` when that hits ``t_final`` to
    1e-9 relative; otherwise it is rounded up and the step shrunk to fit.
    Snapshot times must fall on a step.
    """
    span = t_final - t0
    if span == 0:
        n, h = 0, abs(dt)
    else:
        n = int(round(abs(span) / abs(dt)))
        if n == 0 or abs(n * abs(dt) - abs(span)) > 1e-9 * abs(span):
            n = max(1, math.ceil(abs(span) / abs(dt)))
        h = math.copysign(abs(span) / n, span)
    snaps = {}
    for ts in snapshot_times:
        if n == 0:
            idx = 0
            ok = abs(ts - t0) <= 1e-12 * max(1.0, abs(t0))
        else:
            idx = int(round((ts - t0) / h))
            ok = 0 <= idx <= n and abs(t0 + idx * h - ts) <= 1e-9 * max(1.0, abs(span))
        if not ok:
            raise ConfigurationError(f"snapshot time {ts} is not on the step grid")
        snaps[idx] = ts
    return n, h, snaps


def run(system, state, t0, t_final, cfg, cadence=1, snapshot_times=(), diagnostics=None,
        on_record=None):
    """Fixed-step loop from ``t0`` to ``t_final``.

    ``diagnostics(state, t)`` is called at ``t0``, every ``cadence`` steps and
    at ``t_final``; results are collected in ``Trajectory.records`` and
    passed to ``on_record`` as they are produced. States at the requested
    snapshot times are stored as copies. On a step failure the partial
    trajectory is attached to the raised :class:`SolverError`.
    """
    if cadence < 1:
        raise ConfigurationError("cadence must be >= 1")
    stepper = STEPPERS[cfg.method]
    n, h, snaps = step_plan(t0, t_final, cfg.dt, snapshot_times)
    traj = Trajectory()

    def record(st, tt):
        if diagnostics is None:
            return
        rec = diagnostics(st, tt)
        traj.records.append(rec)
        if on_record is not None:
            on_record(rec)

    record(state, t0)
    if 0 in snaps:
        traj.snapshots[snaps[0]] = state.copy() if hasattr(state, "copy") else np.copy(state)
    t = t0
    for i in range(1, n + 1):
        try:
            state = stepper(state, t, cfg, system, traj.stats, dt=h)
        except SolverError as exc:
            traj.final_state, traj.final_time = state, t
            exc.trajectory = traj
            raise
        t = t0 + i * h
        if i % cadence == 0 or i == n:
            record(state, t)
        if i in snaps:
            traj.snapshots[snaps[i]] = state.copy() if hasattr(state, "copy") else np.copy(state)
    traj.final_state, traj.final_time = state, t
    return traj
