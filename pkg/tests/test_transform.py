import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hermite_vp.diagnostics import particle_number
from hermite_vp.errors import DomainError
from hermite_vp.hermite import HermiteParams, basis_table, moment_tables, triple_product
from hermite_vp.scenarios import build_initial_state, default_config
from hermite_vp.transform import swsr_to_sw, transform_state, triple_product_table
from hermite_vp.vlasov import Formulation, SpectralState


def test_zero_input():
    np.testing.assert_array_equal(swsr_to_sw(np.zeros(5)), np.zeros(9))
    assert swsr_to_sw(np.zeros(5), truncate=True).shape == (5,)


def test_single_mode():
    c = 1.7
    out = swsr_to_sw(np.array([c, 0, 0, 0]))
    for m in range(7):
        assert out[m] == pytest.approx(c * c * triple_product(0, 0, m), abs=1e-15)
    assert out[0] == pytest.approx(c * c * math.pi ** -0.25 * math.sqrt(2 / 3))
    assert out[1] == 0.0


def test_triangle_table_matches_full_sum(rng):
    a = rng.standard_normal(7)
    M = triple_product_table(7)
    np.testing.assert_allclose(swsr_to_sw(a), np.einsum("n,k,nkm->m", a, a, M), atol=1e-14)
    np.testing.assert_array_equal(M, M.transpose(1, 0, 2))


def test_trailing_axes_mapped_independently(rng):
    a = rng.standard_normal((5, 3, 2))
    out = swsr_to_sw(a)
    assert out.shape == (9, 3, 2)
    np.testing.assert_allclose(out[:, 1, 0], swsr_to_sw(a[:, 1, 0]), atol=1e-15)


def test_rejects_non_finite():
    with pytest.raises(DomainError):
        swsr_to_sw(np.array([1.0, np.nan]))
    with pytest.raises(DomainError):
        swsr_to_sw(np.ones(3), n_out=0)


def test_pointwise_reconstruction_extended_output(rng):
    a = rng.standard_normal(8)
    v = np.linspace(-6, 6, 601)
    f_sqrt = (a @ basis_table(8, v)) ** 2
    f_sw = swsr_to_sw(a) @ basis_table(15, v)
    err = float(np.abs(f_sqrt - f_sw).max())
    assert err <= 1e-9, f"max pointwise error with 2N_v - 1 modes: {err:.3e}"


def test_pointwise_reconstruction_with_enough_modes(rng):
    # the series in m is infinite but converges geometrically
    a = rng.standard_normal(8)
    v = np.linspace(-6, 6, 601)
    f_sqrt = (a @ basis_table(8, v)) ** 2
    f_sw = swsr_to_sw(a, n_out=140) @ basis_table(140, v)
    assert np.abs(f_sqrt - f_sw).max() <= 1e-9


def test_truncation_ordering(rng):
    a = rng.standard_normal(6) * 0.5 ** np.arange(6)
    v = np.linspace(-8, 8, 1601)
    f = (a @ basis_table(6, v)) ** 2
    errors = []
    for n_out in range(6, 12):
        g = swsr_to_sw(a, n_out=n_out) @ basis_table(n_out, v)
        errors.append(np.sqrt(np.sum((f - g) ** 2) * (v[1] - v[0])))
    assert all(e1 <= e0 * (1 + 1e-12) for e0, e1 in zip(errors, errors[1:]))
    assert errors[-1] < errors[0]


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 9), st.integers(0, 2 ** 31))
def test_projection_is_exact_inner_product(nv, seed):
    # c_m is the L2 projection of the squared sum onto psi_m
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(nv)
    x, w = np.polynomial.hermite.hermgauss(200)
    y = x / math.sqrt(1.5)
    B = basis_table(2 * nv - 1, y) * np.exp(y * y / 2)
    W = w / math.sqrt(1.5)
    g = a @ B[:nv]
    proj = (B * (W * g * g)) .sum(axis=1)
    np.testing.assert_allclose(swsr_to_sw(a), proj, atol=1e-10 * max(1, float(a @ a)))


def test_transform_state_examples():
    cfg = default_config("nonlinear_landau", formulation="sw_sqrt", nv=20, nx=16)
    state, grid, species = build_initial_state(cfg)
    zero = SpectralState([np.zeros_like(state.blocks[0])], Formulation.SW_SQRT)
    out, _ = transform_state(zero, species)
    np.testing.assert_array_equal(out.blocks[0], 0)
    uni = SpectralState([np.tile(np.linspace(1, 0, 20)[:, None], (1, 16))], Formulation.SW_SQRT)
    out, _ = transform_state(uni, species)
    np.testing.assert_array_equal(out.blocks[0], np.repeat(out.blocks[0][:, :1], 16, axis=1))
    with pytest.raises(DomainError):
        transform_state(SpectralState(state.blocks, Formulation.SW), species)


def test_transform_state_preserves_particle_number():
    cfg = default_config("nonlinear_landau", formulation="sw_sqrt")
    state, grid, species = build_initial_state(cfg)
    mom = [moment_tables(s.hermite) for s in species if not s.static_background]
    n_sqrt = particle_number(state, species, mom, grid)[0]
    sw_state, sw_species = transform_state(state, species)
    assert sw_state.formulation is Formulation.SW
    assert sw_state.blocks[0].shape[0] == 2 * species[0].n_modes - 1
    sw_mom = [moment_tables(s.hermite) for s in sw_species if not s.static_background]
    n_sw = particle_number(sw_state, sw_species, sw_mom, grid)[0]
    assert abs(n_sw - n_sqrt) <= 1e-9 * abs(n_sqrt)
