"""Benchmark set-ups: initial conditions, default parameters and reference values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .diagnostics import compute_record, fit_exponential_rate, oscillation_period
from .errors import ConfigurationError
from .grid import GridConfig
from .hermite import HermiteParams
from .integrators import Method, StepperConfig, run
from .vlasov import Formulation, SpeciesConfig, SpectralState, VlasovPoissonSystem, reconstruct_grid

SQRT2 = math.sqrt(2.0)
ION_MASS = 1836.0


class Scenario(str, Enum):
    MANUFACTURED = "manufactured"
    LINEAR_LANDAU = "linear_landau"
    NONLINEAR_LANDAU = "nonlinear_landau"
    TWO_STREAM = "two_stream"
    BUMP_ON_TAIL = "bump_on_tail"
    ION_ACOUSTIC = "ion_acoustic"


@dataclass(frozen=True)
class BeamConfig:
    """One species (or one beam of a species) and its Maxwellian parameters.

    ``alpha_sw`` is the basis scale used by the SW formulation and
    ``alpha_swsr`` the one used by the square-root formulation.
    """

    name: str
    n0: float = 1.0
    u: float = 0.0
    alpha_sw: float = 1.0
    alpha_swsr: float = SQRT2
    charge: float = -1.0
    mass: float = 1.0
    static: bool = False

    def alpha(self, formulation):
        return self.alpha_sw if Formulation(formulation) is Formulation.SW else self.alpha_swsr


def _electron(**kw):
    return BeamConfig(**{"name": "electron", **kw})


_STATIC_IONS = BeamConfig(name="ion", charge=1.0, mass=ION_MASS, static=True)

# Per-scenario defaults (length, wavenumber, amplitude, final time, beams)
TABLE2 = {
    Scenario.LINEAR_LANDAU: dict(length=2 * math.pi, k=1.0, epsilon=0.01, t_final=10.0,
                                 beams=(_electron(), _STATIC_IONS)),
    Scenario.NONLINEAR_LANDAU: dict(length=4 * math.pi, k=0.5, epsilon=0.5, t_final=10.0,
                                    beams=(_electron(), _STATIC_IONS)),
    Scenario.TWO_STREAM: dict(length=2 * math.pi, k=1.0, epsilon=1e-3, t_final=45.0,
                              beams=(_electron(name="beam1", n0=0.5, u=-1.0, alpha_sw=0.5 / SQRT2, alpha_swsr=0.5),
                                     _electron(name="beam2", n0=0.5, u=1.0, alpha_sw=0.5 / SQRT2, alpha_swsr=0.5),
                                     _STATIC_IONS)),
    Scenario.BUMP_ON_TAIL: dict(length=20 * math.pi, k=0.3, epsilon=0.03, t_final=20.0,
                                beams=(_electron(name="bulk", n0=0.9, u=0.0, alpha_sw=1.0, alpha_swsr=SQRT2),
                                       _electron(name="bump", n0=0.1, u=4.5, alpha_sw=0.5, alpha_swsr=1 / SQRT2),
                                       _STATIC_IONS)),
    Scenario.ION_ACOUSTIC: dict(length=10.0, k=2 * math.pi / 10.0, epsilon=0.01, t_final=600.0,
                                beams=(_electron(),
                                       BeamConfig(name="ion", charge=1.0, mass=ION_MASS,
                                                  alpha_sw=1 / 135, alpha_swsr=SQRT2 / 135))),
    Scenario.MANUFACTURED: dict(length=2 * math.pi, k=1.0, epsilon=0.0, t_final=1.0,
                                beams=(BeamConfig(name="neutral", u=1.0, alpha_sw=SQRT2, alpha_swsr=2.0,
                                                  charge=0.0),)),
}

_GRID_DEFAULTS = {
    Scenario.ION_ACOUSTIC: dict(nv=51, nx=51),
    Scenario.MANUFACTURED: dict(dt=1e-3),
}


@dataclass(frozen=True)
class ScenarioConfig:
    name: Scenario
    formulation: Formulation = Formulation.SW
    length: float = 2 * math.pi
    k: float = 1.0
    epsilon: float = 0.01
    t_final: float = 10.0
    beams: tuple = ()
    nv: int = 100
    nx: int = 100
    order: int = 2
    dt: float = 1e-2
    method: Method = Method.IMPLICIT_MIDPOINT
    newton_rel_tol: float = 1e-8
    newton_abs_tol: float = 1e-14
    krylov_rel_tol: float = 1e-5
    krylov_restart: int = 30
    poisson_method: str = "spectral"
    cadence: int = 1
    snapshot_times: tuple = ()
    snapshot_nv: int = 256

    def __post_init__(self):
        object.__setattr__(self, "name", Scenario(self.name))
        object.__setattr__(self, "formulation", Formulation(self.formulation))
        object.__setattr__(self, "method", Method(self.method))
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be >= 0")
        if not self.beams:
            raise ConfigurationError("at least one species is required")
        if int(self.nv) != self.nv or self.nv < 1:
            raise ConfigurationError("nv must be an integer >= 1")
        if self.poisson_method not in ("spectral", "krylov"):
            raise ConfigurationError("poisson_method must be 'spectral' or 'krylov'")
        if self.cadence < 1:
            raise ConfigurationError("cadence must be >= 1")
        if self.snapshot_nv < 2:
            raise ConfigurationError("snapshot_nv must be >= 2")
        dyn = [b for b in self.beams if not b.static]
        if not dyn:
            raise ConfigurationError("at least one dynamic species is required")
        if any(b.n0 <= 0 or b.alpha_sw <= 0 or b.alpha_swsr <= 0 for b in dyn):
            raise ConfigurationError("beam densities and velocity scales must be positive")
        names = [b.name for b in self.beams]
        if len(set(names)) != len(names):
            raise ConfigurationError("species names must be unique")
        if self.name is Scenario.MANUFACTURED and len(dyn) != 1:
            raise ConfigurationError("the manufactured solution has exactly one species")
        if not (self.dt > 0 and self.t_final >= 0):
            raise ConfigurationError("dt must be positive and t_final non-negative")
        self.grid()

    @property
    def field_enabled(self):
        return self.name is not Scenario.MANUFACTURED

    def grid(self):
        return GridConfig(self.length, self.nx, self.order)

    def species(self):
        out = []
        for b in self.beams:
            nv = 1 if b.static else self.nv
            out.append(SpeciesConfig(b.name, b.charge, b.mass,
                                     HermiteParams(b.u, b.alpha(self.formulation), nv), b.static))
        return out

    def stepper(self):
        return StepperConfig(dt=self.dt, method=self.method, newton_rel_tol=self.newton_rel_tol,
                             newton_abs_tol=self.newton_abs_tol, krylov_rel_tol=self.krylov_rel_tol,
                             krylov_restart=self.krylov_restart)

    def system(self):
        return VlasovPoissonSystem(self.species(), self.grid(), self.formulation,
                                   field_enabled=self.field_enabled, poisson_method=self.poisson_method)


def default_config(name, **overrides):
    """Scenario defaults with keyword overrides applied."""
    name = Scenario(name)
    base = dict(name=name, **TABLE2[name], **_GRID_DEFAULTS.get(name, {}))
    base.update(overrides)
    return ScenarioConfig(**base)


def build_initial_state(cfg):
    """Initial coefficients, grid and species list for ``cfg``.

    Only C_0 is nonzero. Its profile is chosen so the reconstruction equals
    the scenario's perturbed Maxwellian in either formulation.
    """
    grid = cfg.grid()
    species = cfg.species()
    x = grid.x
    blocks = []
    for b, sp in zip(cfg.beams, species):
        if b.static:
            continue
        c = np.zeros((sp.n_modes, grid.n_points))
        if cfg.name is Scenario.MANUFACTURED:
            base = 2.0 - np.cos(x)
            c[0] = base ** 2 if cfg.formulation is Formulation.SW else math.pi ** 0.125 * base
        else:
            density = b.n0 * (1.0 + cfg.epsilon * np.cos(cfg.k * x))
            a = sp.alpha
            if cfg.formulation is Formulation.SW:
                c[0] = density * math.pi ** -0.25 / (SQRT2 * a)
            else:
                c[0] = np.sqrt(density / a)
        blocks.append(c)
    return SpectralState(blocks, cfg.formulation), grid, species


def manufactured_reference(x, v, t):
    """Exact free-streaming solution ``f0(x - v t, v)``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return math.pi ** -0.25 * (2.0 - np.cos(x - v * t)) ** 2 * np.exp(-((v - 1.0) / 2.0) ** 2)


def manufactured_error(state, system, t, n_v=1000, v_range=(-5.0, 5.0)):
    """L2 error over the (x, v) box against :func:`manufactured_reference`."""
    v = np.linspace(v_range[0], v_range[1], n_v)
    f = reconstruct_grid(state, system.species, 0, v)
    ref = manufactured_reference(system.grid.x[:, None], v[None, :], t)
    dv = v[1] - v[0]
    return float(math.sqrt(system.grid.dx * dv * np.sum((f - ref) ** 2)))


REFERENCE_RATES = {
    Scenario.LINEAR_LANDAU: ("damping_rate", -0.851),
    Scenario.TWO_STREAM: ("growth_rate", 0.185),
    Scenario.ION_ACOUSTIC: ("period", 375.0),
}


def dispersion_reference(scenario):
    """Reference damping rate, growth rate or period of a scenario."""
    try:
        return REFERENCE_RATES[Scenario(scenario)][1]
    except (KeyError, ValueError):
        raise ConfigurationError(f"no reference rate for scenario {scenario!r}") from None


def simulate(cfg, on_record=None, t_final=None):
    """Build and run a scenario; returns ``(trajectory, system)``."""
    state, _, _ = build_initial_state(cfg)
    system = cfg.system()
    t_end = cfg.t_final if t_final is None else t_final
    snaps = tuple(cfg.snapshot_times) or (t_end,)
    traj = run(system, state, 0.0, t_end, cfg.stepper(), cadence=cfg.cadence, snapshot_times=snaps,
               diagnostics=lambda st, t: compute_record(system, st, t), on_record=on_record)
    return traj, system


def with_overrides(cfg, **kw):
    return replace(cfg, **kw)


# Fit windows: Landau damping from the peaks of |E_1| on [0, 5], two-stream
# growth from |E_1| on [10, 30], ion-acoustic period from the ion density
# harmonic projected on its initial phase over the whole run
RATE_WINDOWS = {
    Scenario.LINEAR_LANDAU: (0.0, 5.0),
    Scenario.TWO_STREAM: (10.0, 30.0),
    Scenario.ION_ACOUSTIC: None,
}


def measure_rate(cfg, records):
    """Fitted ``(quantity, value)`` for scenarios that have a reference rate."""
    name = Scenario(cfg.name)
    if name not in REFERENCE_RATES:
        raise ConfigurationError(f"no reference rate for scenario {name.value!r}")
    quantity = REFERENCE_RATES[name][0]
    t = np.array([r.time for r in records])
    window = RATE_WINDOWS[name]
    if name is Scenario.ION_ACOUSTIC:
        dynamic = [b for b in cfg.beams if not b.static]
        ion = next(i for i, b in enumerate(dynamic) if b.charge > 0)
        h = np.array([r.density_harmonic[ion] for r in records])
        phase = h[0] / abs(h[0]) if abs(h[0]) > 0 else 1.0
        return quantity, oscillation_period(t, (h * np.conj(phase)).real, window)
    amp = np.array([r.field_amplitude for r in records])
    return quantity, fit_exponential_rate(t, amp, window, peaks=name is Scenario.LINEAR_LANDAU)


@dataclass(frozen=True)
class ConvergenceRow:
    nx: int
    dx: float
    l2_error: float
    order: float        # observed order against the previous row, nan for the first


def manufactured_convergence(cfg, nx_values, on_row=None):
    """Final-time L2 error of the manufactured solution for each N_x.

    Returns the rows and the least-squares log-log slope of error versus dx.
    """
    if Scenario(cfg.name) is not Scenario.MANUFACTURED:
        raise ConfigurationError("convergence studies need the manufactured scenario")
    nx_values = [int(n) for n in nx_values]
    if len(nx_values) < 2:
        raise ConfigurationError("convergence needs at least two nx values")
    rows = []
    for nx in nx_values:
        c = replace(cfg, nx=nx)
        state, grid, _ = build_initial_state(c)
        system = c.system()
        traj = run(system, state, 0.0, c.t_final, c.stepper())
        err = manufactured_error(traj.final_state, system, traj.final_time)
        order = math.nan
        if rows:
            prev = rows[-1]
            order = math.log(prev.l2_error / err) / math.log(prev.dx / grid.dx)
        rows.append(ConvergenceRow(nx, grid.dx, err, order))
        if on_row is not None:
            on_row(rows[-1])
    dx = np.log([r.dx for r in rows])
    err = np.log([r.l2_error for r in rows])
    slope = float(np.polyfit(dx, err, 1)[0])
    return rows, slope
