import math

import numpy as np
import pytest

from hermite_vp.errors import ConfigurationError
from hermite_vp.scenarios import (BeamConfig, Scenario, ScenarioConfig, build_initial_state, default_config,
                                  dispersion_reference, manufactured_error, manufactured_reference, measure_rate,
                                  with_overrides)
from hermite_vp.vlasov import Formulation, charge_density, reconstruct_grid

R2 = math.sqrt(2)

# independent transcription of the parameter table:
# (length, k, epsilon, t_final, [(n0, u, alpha_sw, alpha_swsr), ...])
PARAMETER_TABLE = {
    "linear_landau": (2 * math.pi, 1.0, 0.01, 10.0, [(1.0, 0.0, 1.0, R2)]),
    "nonlinear_landau": (4 * math.pi, 0.5, 0.5, 10.0, [(1.0, 0.0, 1.0, R2)]),
    "two_stream": (2 * math.pi, 1.0, 1e-3, 45.0, [(0.5, -1.0, 0.5 / R2, 0.5), (0.5, 1.0, 0.5 / R2, 0.5)]),
    "bump_on_tail": (20 * math.pi, 0.3, 0.03, 20.0, [(0.9, 0.0, 1.0, R2), (0.1, 4.5, 0.5, 1 / R2)]),
}


@pytest.mark.parametrize("name", sorted(PARAMETER_TABLE))
def test_defaults_reproduce_table(name):
    cfg = default_config(name)
    length, k, eps, tf, beams = PARAMETER_TABLE[name]
    assert (cfg.length, cfg.k, cfg.epsilon, cfg.t_final) == pytest.approx((length, k, eps, tf))
    dyn = [b for b in cfg.beams if not b.static]
    assert [(b.n0, b.u, b.alpha_sw, b.alpha_swsr) for b in dyn] == [pytest.approx(x) for x in beams]
    assert all(b.charge == -1.0 and b.mass == 1.0 for b in dyn)
    (ion,) = [b for b in cfg.beams if b.static]
    assert ion.charge == 1.0 and ion.mass == 1836.0
    assert sum(b.n0 for b in dyn) == pytest.approx(1.0)
    assert (cfg.nx, cfg.dt, cfg.order) == (100, 1e-2, 2)


def test_alpha_ratio():
    for name in PARAMETER_TABLE:
        for b in default_config(name).beams:
            if not b.static:
                assert b.alpha_swsr == pytest.approx(R2 * b.alpha_sw)


def test_ion_acoustic_defaults():
    cfg = default_config("ion_acoustic")
    e, i = cfg.beams
    assert not e.static and not i.static
    assert e.alpha_sw == 1.0 and i.alpha_sw == pytest.approx(1 / 135) and i.mass == 1836.0
    assert (cfg.nv, cfg.nx) == (51, 51)
    assert cfg.k == pytest.approx(2 * math.pi / cfg.length)


def test_manufactured_initial_coefficients():
    for form, expected in (("sw", lambda x: (2 - np.cos(x)) ** 2), ("sw_sqrt", lambda x: math.pi ** 0.125 * (2 - np.cos(x)))):
        cfg = default_config("manufactured", formulation=form, nv=4, nx=16)
        state, grid, species = build_initial_state(cfg)
        np.testing.assert_allclose(state.blocks[0][0], expected(grid.x))
        np.testing.assert_array_equal(state.blocks[0][1:], 0)
        sp = species[0]
        assert sp.u == 1.0 and sp.alpha == (R2 if form == "sw" else 2.0)
        assert not cfg.field_enabled


def test_manufactured_reconstruction_equals_reference():
    for form in ("sw", "sw_sqrt"):
        cfg = default_config("manufactured", formulation=form, nv=4, nx=16)
        state, grid, species = build_initial_state(cfg)
        v = np.linspace(-5, 5, 41)
        f = reconstruct_grid(state, species, 0, v)
        np.testing.assert_allclose(f, manufactured_reference(grid.x[:, None], v[None, :], 0.0), atol=1e-13)


def test_manufactured_reference_examples():
    x = np.linspace(0, 2 * math.pi, 7)
    f0 = math.pi ** -0.25 * (2 - np.cos(x)) ** 2 * math.exp(-0.25)
    np.testing.assert_allclose(manufactured_reference(x, 0.0, 3.7), f0)
    assert manufactured_reference(math.pi, 1.0, math.pi) == pytest.approx(math.pi ** -0.25)


@pytest.mark.parametrize("name", ["linear_landau", "nonlinear_landau", "two_stream", "bump_on_tail", "ion_acoustic"])
def test_initial_states_neutral_and_consistent(name):
    recon = {}
    for form in Formulation:
        cfg = default_config(name, formulation=form, nv=8, nx=32)
        state, grid, species = build_initial_state(cfg)
        system = cfg.system()
        rho = charge_density(state, species, system.moments)
        assert abs(rho.mean()) <= 1e-12
        assert all(np.count_nonzero(b[1:]) == 0 for b in state.blocks)
        dyn = [b for b in cfg.beams if not b.static]
        recon[form] = []
        for i, b in enumerate(dyn):
            v = np.linspace(b.u - 4 * b.alpha_sw, b.u + 4 * b.alpha_sw, 33)
            recon[form].append(reconstruct_grid(state, species, i, v))
    for a, b in zip(recon[Formulation.SW], recon[Formulation.SW_SQRT]):
        np.testing.assert_allclose(a, b, atol=1e-12 * np.abs(a).max())


def test_initial_density_matches_maxwellian():
    cfg = default_config("linear_landau", nv=4, nx=16)
    state, grid, species = build_initial_state(cfg)
    v = np.linspace(-3, 3, 13)
    f = reconstruct_grid(state, species, 0, v)
    expected = (1 + 0.01 * np.cos(grid.x))[:, None] / math.sqrt(2 * math.pi) * np.exp(-v * v / 2)[None, :]
    np.testing.assert_allclose(f, expected, atol=1e-14)


def test_zero_epsilon_gives_zero_field():
    cfg = default_config("linear_landau", epsilon=0.0, nv=6, nx=16)
    state, grid, species = build_initial_state(cfg)
    np.testing.assert_allclose(state.blocks[0][0], state.blocks[0][0][0])
    assert np.abs(cfg.system().field(state)).max() <= 1e-15


def test_dispersion_reference():
    assert dispersion_reference("linear_landau") == -0.851
    assert dispersion_reference(Scenario.TWO_STREAM) == 0.185
    assert dispersion_reference("ion_acoustic") == 375.0
    with pytest.raises(ConfigurationError):
        dispersion_reference("bump_on_tail")
    with pytest.raises(ConfigurationError):
        dispersion_reference("nonsense")


def test_config_validation():
    with pytest.raises(ConfigurationError):
        default_config("linear_landau", epsilon=-0.1)
    with pytest.raises(ConfigurationError):
        default_config("linear_landau", nx=2)
    with pytest.raises(ConfigurationError):
        default_config("linear_landau", beams=(BeamConfig(name="ion", static=True),))
    with pytest.raises(ConfigurationError):
        default_config("linear_landau", beams=(BeamConfig(name="a"), BeamConfig(name="a")))
    with pytest.raises(ValueError):
        default_config("unknown")
    cfg = with_overrides(default_config("two_stream"), nv=11)
    assert cfg.nv == 11 and isinstance(cfg, ScenarioConfig)


def test_manufactured_short_run_error_small():
    cfg = default_config("manufactured", nv=40, nx=64, t_final=0.1, dt=1e-2)
    state, grid, _ = build_initial_state(cfg)
    system = cfg.system()
    from hermite_vp.integrators import run
    traj = run(system, state, 0.0, cfg.t_final, cfg.stepper())
    err = manufactured_error(traj.final_state, system, traj.final_time)
    assert err < 5e-3
    assert manufactured_error(state, system, 0.0) < 1e-12


def test_measure_rate_requires_reference():
    with pytest.raises(ConfigurationError):
        measure_rate(default_config("bump_on_tail"), [])
