import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hermite_vp.errors import ConfigurationError, DomainError
from hermite_vp.grid import (STENCILS, GridConfig, apply_derivative, build_derivative, project_range,
                             solve_singular, trapezoid)

ORDERS = sorted(STENCILS)


def test_grid_config_invariants():
    g = GridConfig(2 * math.pi, 10, 4)
    assert g.dx * g.n_points == pytest.approx(g.length)
    assert g.x[0] == 0.0 and g.x[-1] == pytest.approx(g.length - g.dx)


@pytest.mark.parametrize("kwargs", [dict(length=0.0, n_points=8), dict(length=1.0, n_points=3),
                                    dict(length=1.0, n_points=8, order=3), dict(length=1.0, n_points=8, order=8)])
def test_grid_config_rejects(kwargs):
    with pytest.raises(ConfigurationError):
        GridConfig(**kwargs)


def test_order_message():
    with pytest.raises(ConfigurationError, match="order must be one of 2,4,6,8"):
        GridConfig(1.0, 16, 3)


def test_first_row_p2():
    op = build_derivative(GridConfig(5.0, 5, 2))
    np.testing.assert_allclose(op.first_row(), [0, 0.5, 0, 0, -0.5])


@pytest.mark.parametrize("order", ORDERS)
def test_first_row_matches_stencil(order):
    n = 20
    op = build_derivative(GridConfig(n * 0.5, n, order))
    row = op.first_row()
    for o, c in enumerate(STENCILS[order], start=1):
        assert row[o] == pytest.approx(c / 0.5)
        assert row[-o] == pytest.approx(-c / 0.5)
    np.testing.assert_allclose(op.dense()[0], row)


@pytest.mark.parametrize("order", ORDERS)
def test_constant_in_kernel(order):
    op = build_derivative(GridConfig(3.0, 17, order))
    np.testing.assert_array_equal(op.apply(np.full(17, 2.5)), 0.0)


def test_sine_eigenmode_p2():
    g = GridConfig(3.0, 24, 2)
    op = build_derivative(g)
    k = 2 * math.pi / g.length
    out = op.apply(np.sin(k * g.x))
    expected = k * np.cos(k * g.x) * math.sin(k * g.dx) / (k * g.dx)
    np.testing.assert_allclose(out, expected, atol=1e-13)
    np.testing.assert_allclose(out, op.dense() @ np.sin(k * g.x), atol=1e-13)


def test_apply_errors_and_trivial():
    g = GridConfig(1.0, 8, 2)
    op = build_derivative(g)
    np.testing.assert_array_equal(apply_derivative(op, np.zeros(8)), 0.0)
    with pytest.raises(DomainError):
        op.apply(np.zeros(7))


def test_impulse_p2():
    g = GridConfig(2.0, 10, 2)
    op = build_derivative(g)
    e = np.zeros(10)
    e[0] = 1.0
    out = op.apply(e)
    assert out[-1] == pytest.approx(1 / (2 * g.dx))
    assert out[1] == pytest.approx(-1 / (2 * g.dx))
    assert np.count_nonzero(out) == 2


def test_apply_along_last_axis(rng):
    op = build_derivative(GridConfig(1.0, 12, 6))
    X = rng.standard_normal((5, 12))
    np.testing.assert_allclose(op.apply(X), X @ op.dense().T, atol=1e-12)


@pytest.mark.parametrize("order", ORDERS)
def test_antisymmetry_many_vectors(order, rng):
    op = build_derivative(GridConfig(2 * math.pi, 64, order))
    X = rng.standard_normal((1000, 64))
    quad = np.einsum("ij,ij->i", X, op.apply(X))
    assert np.all(np.abs(quad) <= 1e-12 * np.einsum("ij,ij->i", X, X))
    D = op.dense()
    np.testing.assert_array_equal(D, -D.T)


@pytest.mark.parametrize("order", ORDERS)
def test_order_of_accuracy(order):
    errs = []
    for n in (32, 64, 128):
        g = GridConfig(2 * math.pi, n, order)
        op = build_derivative(g)
        f = np.exp(np.sin(g.x))
        df = np.cos(g.x) * f
        errs.append(np.abs(op.apply(f) - df).max())
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    # the finest level of the 8th-order stencil reaches round-off
    check = ratios if order < 8 else ratios[:1]
    for r in check:
        assert abs(r / 2 ** order - 1) <= 0.15


def test_trapezoid_examples():
    for n in (4, 7, 32):
        g = GridConfig(2 * math.pi, n, 2)
        assert trapezoid(np.ones(n), g) == pytest.approx(2 * math.pi)
        assert abs(trapezoid(np.cos(g.x), g)) < 1e-14
        if n > 4:
            assert trapezoid(np.cos(g.x) ** 2, g) == pytest.approx(math.pi)
    with pytest.raises(DomainError):
        trapezoid(np.ones(5), GridConfig(1.0, 6, 2))


@pytest.mark.parametrize("method", ["krylov", "spectral"])
def test_solve_singular_examples(method):
    g = GridConfig(2 * math.pi, 33, 2)
    op = build_derivative(g)
    np.testing.assert_array_equal(solve_singular(op, np.zeros(33), method=method), 0.0)
    k = 2 * math.pi / g.length
    x = solve_singular(op, np.sin(k * g.x), method=method)
    expected = -(g.dx / math.sin(k * g.dx)) * np.cos(k * g.x)
    np.testing.assert_allclose(x, expected, atol=1e-12)
    ref = np.linalg.lstsq(op.dense(), np.sin(k * g.x), rcond=None)[0]
    np.testing.assert_allclose(x, ref, atol=1e-12)
    b = np.cos(3 * g.x) + 0.3 * np.sin(g.x)
    np.testing.assert_allclose(solve_singular(op, b + 4.0, method=method), solve_singular(op, b, method=method),
                               atol=1e-14)


@pytest.mark.parametrize("n,order", [(15, 2), (16, 2), (16, 4), (20, 8), (41, 6)])
def test_solve_singular_matches_lstsq(n, order, rng):
    op = build_derivative(GridConfig(3.0, n, order))
    b = rng.standard_normal(n)
    ref = np.linalg.lstsq(op.dense(), b, rcond=None)[0]
    for method in ("krylov", "spectral"):
        x = solve_singular(op, b, method=method)
        np.testing.assert_allclose(x, ref, atol=1e-11 * np.abs(ref).max())
        assert abs(x.mean()) <= 1e-13 * np.abs(x).max()
        np.testing.assert_allclose(op.apply(x), project_range(op, b), atol=1e-11 * np.abs(b).max())


@pytest.mark.parametrize("order", ORDERS)
def test_alternating_null_vector(order):
    n = 24
    op = build_derivative(GridConfig(1.0, n, order))
    alt = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    assert np.abs(op.apply(alt)).max() < 1e-12
    assert op.null_mask().sum() == 2
    x = solve_singular(op, alt + np.sin(2 * math.pi * np.arange(n) / n))
    assert abs(x @ alt) < 1e-12


def test_solve_singular_rejects():
    op = build_derivative(GridConfig(1.0, 8, 2))
    with pytest.raises(DomainError):
        solve_singular(op, np.zeros(9))
    with pytest.raises(ConfigurationError):
        solve_singular(op, np.ones(8), method="lu")


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(ORDERS), st.integers(10, 40), st.data())
def test_property_pseudoinverse_reproduces_rhs(order, n, data):
    b = data.draw(arrays(np.float64, n, elements=st.floats(-10, 10)))
    op = build_derivative(GridConfig(2.0, n, order))
    x = solve_singular(op, b, method="spectral")
    scale = max(1.0, np.abs(b).max())
    np.testing.assert_allclose(op.apply(x), project_range(op, b), atol=1e-10 * scale)
