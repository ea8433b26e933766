"""Fast invariant checks behind ``hermite-vp verify``.

Each check is small enough to finish in well under a second or two and
returns a :class:`CheckResult`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier_space import assemble_operator
from .grid import STENCILS, GridConfig, build_derivative, solve_singular
from .hermite import HermiteParams, basis_table, moment_tables, triple_product
from .integrators import Method, StepperConfig, run, step_implicit_midpoint
from .scenarios import build_initial_state, default_config
from .vlasov import (Formulation, SpeciesConfig, SpectralState, VlasovPoissonSystem, advection_rhs,
                     dense_advection_operator, reconstruct_grid)
from .diagnostics import particle_number


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rng():
    return np.random.default_rng(20240607)


def _species(nv, u=0.3, alpha=1.1, charge=-1.0, mass=1.0):
    return SpeciesConfig("e", charge, mass, HermiteParams(u, alpha, nv))


def check_derivative_antisymmetry():
    rng = _rng()
    worst = 0.0
    for order in STENCILS:
        for n in (11, 12, 32):
            op = build_derivative(GridConfig(2 * math.pi, n, order))
            x = rng.standard_normal(n)
            worst = max(worst, abs(x @ op.apply(x)) / (np.linalg.norm(x) * np.linalg.norm(op.apply(x))))
    return worst <= 1e-14, f"max relative <x, Dx> = {worst:.2e}"


def check_rhs_antisymmetry():
    rng = _rng()
    worst = 0.0
    for form in Formulation:
        sp = _species(7)
        op = build_derivative(GridConfig(2 * math.pi, 16, 4))
        st = SpectralState([rng.standard_normal((7, 16))], form)
        E = rng.standard_normal(16)
        r = advection_rhs(st, E, [sp], op).flatten()
        psi = st.flatten()
        worst = max(worst, abs(psi @ r) / (np.linalg.norm(psi) * np.linalg.norm(r)))
    return worst <= 1e-14, f"max relative <psi, A psi> = {worst:.2e}"


def check_dense_oracle():
    rng = _rng()
    worst = 0.0
    for nv, nx in ((1, 5), (4, 9), (6, 12)):
        sp = _species(nv)
        op = build_derivative(GridConfig(3.0, nx, 2))
        st = SpectralState([rng.standard_normal((nv, nx))])
        E = rng.standard_normal(nx)
        A = dense_advection_operator(sp, E, op)
        worst = max(worst, float(np.abs(A @ st.flatten() - advection_rhs(st, E, [sp], op).flatten()).max()))
    return worst <= 1e-12, f"max |A_dense psi - rhs(psi)| = {worst:.2e}"


def check_triple_products():
    x, w = np.polynomial.hermite.hermgauss(60)
    # psi_n psi_k psi_m = exp(-3 xi^2 / 2) * polynomial; rescale to the
    # Gauss-Hermite weight
    y = x / math.sqrt(1.5)
    B = basis_table(11, y) * np.exp(y * y / 2)
    W = w / math.sqrt(1.5)
    worst = 0.0
    for n in range(11):
        for k in range(n, 11):
            for m in range(k, 11):
                q = float(np.sum(W * B[n] * B[k] * B[m]))
                worst = max(worst, abs(q - triple_product(n, k, m)))
    return worst <= 1e-8, f"max |M - quadrature| over indices <= 10 = {worst:.2e}"


def check_moments():
    x, w = np.polynomial.hermite.hermgauss(80)
    p = HermiteParams(0.4, 0.8, 12)
    B = basis_table(12, x * math.sqrt(2)) * np.exp(x * x)
    W = w * math.sqrt(2)
    v = p.u + p.alpha * x * math.sqrt(2)
    tab = moment_tables(p)
    err = max(float(np.abs(B @ W - tab.I).max()), float(np.abs(B @ (W * v) - tab.I1).max()),
              float(np.abs(B @ (W * v * v) - tab.I2).max()))
    return err <= 1e-12, f"max moment table error = {err:.2e}"


def check_pseudoinverse():
    rng = _rng()
    worst = 0.0
    for n, order in ((15, 2), (16, 2), (16, 8), (33, 6)):
        op = build_derivative(GridConfig(2 * math.pi, n, order))
        b = rng.standard_normal(n)
        ref = np.linalg.lstsq(op.dense(), b, rcond=None)[0]
        for method in ("krylov", "spectral"):
            x = solve_singular(op, b, method=method)
            worst = max(worst, float(np.abs(x - ref).max() / np.abs(ref).max()))
    return worst <= 1e-10, f"max relative deviation from dense lstsq = {worst:.2e}"


def check_sqrt_nonnegative():
    rng = _rng()
    sp = _species(9)
    st = SpectralState([rng.standard_normal((9, 8))], Formulation.SW_SQRT)
    f = reconstruct_grid(st, [sp], 0, np.linspace(-8, 8, 401))
    return bool(f.min() >= 0.0), f"min reconstruction = {f.min():.3e}"


def check_fourier_skew():
    rng = _rng()
    n = 5
    E = rng.standard_normal(2 * n + 1) + 1j * rng.standard_normal(2 * n + 1)
    E = 0.5 * (E + np.conj(E[::-1]))     # coefficients of a real field
    E[n] = 0.0
    A = assemble_operator(E, _species(6), 2 * math.pi, n)
    err = float(np.abs(A + A.conj().T).max())
    return err <= 1e-12, f"max |A + A^H| = {err:.2e}"


def check_midpoint_invariant():
    rng = _rng()
    B = rng.standard_normal((20, 20))
    A = B - B.T
    y0 = rng.standard_normal(20)
    cfg = StepperConfig(dt=0.1, method=Method.IMPLICIT_MIDPOINT, newton_rel_tol=1e-13, newton_abs_tol=1e-15,
                        krylov_rel_tol=1e-13)
    y = y0
    for _ in range(50):
        y = step_implicit_midpoint(y, 0.0, cfg, lambda z: A @ z)
    drift = abs(y @ y - y0 @ y0) / (y0 @ y0)
    return drift <= 1e-12, f"relative change of |y|^2 after 50 steps = {drift:.2e}"


def check_sqrt_particle_number():
    cfg = default_config("linear_landau", formulation="sw_sqrt", nv=20, nx=32, t_final=0.1, dt=0.01)
    state, grid, species = build_initial_state(cfg)
    system = cfg.system()
    traj = run(system, state, 0.0, cfg.t_final, cfg.stepper())
    n0 = particle_number(state, species, system.moments, grid)[0]
    n1 = particle_number(traj.final_state, species, system.moments, grid)[0]
    rel = abs(n1 - n0) / abs(n0)
    return rel <= 1e-10, f"relative change of N over 10 steps = {rel:.2e}"


CHECKS = (
    ("derivative anti-symmetry", check_derivative_antisymmetry),
    ("right-hand side anti-symmetry", check_rhs_antisymmetry),
    ("dense operator oracle", check_dense_oracle),
    ("triple products vs quadrature", check_triple_products),
    ("moment tables vs quadrature", check_moments),
    ("pseudoinverse vs dense least squares", check_pseudoinverse),
    ("square-root reconstruction non-negative", check_sqrt_nonnegative),
    ("Fourier operator skew-Hermitian", check_fourier_skew),
    ("midpoint preserves quadratic invariant", check_midpoint_invariant),
    ("square-root particle number", check_sqrt_particle_number),
)


def run_checks():
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
