"""Invariants, analytic drift rates and signal fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grid import solve_singular
from .vlasov import Formulation, _check_consistent, _ladder, flux


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    particle_number: tuple          # per dynamic species
    momentum: tuple                 # per dynamic species, mass weighted
    kinetic_energy: tuple           # per dynamic species
    potential_energy: float
    dN_dt: tuple                    # per dynamic species
    dP_dt: float
    dE_dt: float
    field_amplitude: float
    enstrophy: tuple                # per dynamic species
    density_harmonic: tuple = ()    # complex first harmonic of each species density

    @property
    def total_momentum(self):
        return float(sum(self.momentum))

    @property
    def total_kinetic(self):
        return float(sum(self.kinetic_energy))

    @property
    def total_energy(self):
        return self.total_kinetic + self.potential_energy


def _sq(state):
    return state.formulation is Formulation.SW_SQRT


def species_density(state, species, moments):
    """Number density n_s(x) of each dynamic species, shape (S, N_x)."""
    dyn = _check_consistent(state, species)
    out = []
    for s, b, mom in zip(dyn, state.blocks, moments):
        out.append(s.alpha * (np.sum(b * b, axis=0) if _sq(state) else mom.I @ b))
    return np.array(out)


def particle_number(state, species, moments, grid):
    """Particle number of each dynamic species."""
    dyn = _check_consistent(state, species)
    out = []
    for s, b, mom in zip(dyn, state.blocks, moments):
        if _sq(state):
            out.append(grid.dx * s.alpha * float(np.sum(b * b)))
        else:
            out.append(grid.dx * s.alpha * float(mom.I @ b.sum(axis=1)))
    return np.array(out)


def momentum_per_species(state, species, moments, grid):
    dyn = _check_consistent(state, species)
    out = []
    for s, b, mom in zip(dyn, state.blocks, moments):
        if _sq(state):
            nv = s.n_modes
            cross = sum(math.sqrt(n / 2) * float(b[n - 1] @ b[n]) for n in range(1, nv))
            val = s.mass * s.alpha * (s.u * float(np.sum(b * b)) + 2 * s.alpha * cross)
        else:
            val = s.mass * s.alpha * float(mom.I1 @ b.sum(axis=1))
        out.append(grid.dx * val)
    return np.array(out)


def total_momentum(state, species, moments, grid):
    return float(momentum_per_species(state, species, moments, grid).sum())


def kinetic_per_species(state, species, moments, grid):
    dyn = _check_consistent(state, species)
    out = []
    for s, b, mom in zip(dyn, state.blocks, moments):
        if _sq(state):
            nv, u, a = s.n_modes, s.u, s.alpha
            norms = np.einsum("nj,nj->n", b, b)
            n = np.arange(nv)
            val = float(np.sum(0.5 * (u * u + a * a * n + a * a / 2) * norms))
            val += sum(2 * u * a * math.sqrt(k / 2) * float(b[k] @ b[k - 1]) for k in range(1, nv))
            val += sum(a * a / 2 * math.sqrt(k * (k - 1)) * float(b[k] @ b[k - 2]) for k in range(2, nv))
            out.append(grid.dx * s.mass * a * val)
        else:
            out.append(0.5 * grid.dx * s.alpha * s.mass * float(mom.I2 @ b.sum(axis=1)))
    return np.array(out)


def energies(state, E, species, moments, grid):
    """Total kinetic and potential energy."""
    kin = float(kinetic_per_species(state, species, moments, grid).sum())
    E = np.asarray(E, dtype=float)
    return kin, 0.5 * grid.dx * float(E @ E)


def enstrophy(state, grid):
    return np.array([grid.dx * float(np.sum(b * b)) for b in state.blocks])


def analytic_drifts(state, E, species, moments, grid, op, pinv_method="krylov"):
    """Closed-form time derivatives of N (per species), P and E_tot caused by
    the truncation closure.

    Returns ``(dN_dt array, dP_dt, dE_dt)``.
    """
    dyn = _check_consistent(state, species)
    E = np.asarray(E, dtype=float)
    dx = grid.dx
    dN = np.zeros(len(dyn))
    dP = 0.0
    dE = 0.0
    if not _sq(state):
        pinv_rhs = np.zeros(grid.n_points)
        for i, (s, b, mom) in enumerate(zip(dyn, state.blocks, moments)):
            nv, q, m, u, a = s.n_modes, s.charge, s.mass, s.u, s.alpha
            last = E @ b[nv - 1]
            if nv % 2:
                dP -= dx * nv * mom.I[nv - 1] * a * q * last
                dE -= dx * nv * mom.I[nv - 1] * u * a * q * last
            else:
                c = math.sqrt((nv - 1) / 2) * mom.I[nv - 2]
                dN[i] = -dx * (q / m) * c * last
                dP -= dx * c * u * q * last
                dE -= 0.5 * dx * c * q * ((2 * nv - 1) * a * a + u * u) * last
                pinv_rhs += (q * q / m) * c * E * b[nv - 1]
        if np.any(pinv_rhs):
            dE -= dx * float(E @ solve_singular(op, pinv_rhs, method=pinv_method))
        return dN, float(dP), float(dE)

    pinv_rhs = np.zeros(grid.n_points)
    for s, b in zip(dyn, state.blocks):
        nv, q, m, u, a = s.n_modes, s.charge, s.mass, s.u, s.alpha
        c_last = b[nv - 1]
        dP -= dx * nv * q * a * float(E @ (c_last * c_last))
        if nv >= 2:
            c_prev = b[nv - 2]
            dE -= dx * (nv / 2) * math.sqrt((nv - 1) / 2) * a * a * (
                m * a * a * float(c_last @ op.apply(c_prev)) + q * float(E @ (c_prev * c_last)))
        dE -= dx * nv * q * u * a * float(E @ (c_last * c_last))
        Q = flux(b, s)
        dE += dx * q * a * float(E @ np.sum(b * Q, axis=0))
        pinv_rhs += q * a * np.sum(b * op.apply(Q), axis=0)
    if np.any(pinv_rhs):
        dE -= 2 * dx * float(E @ solve_singular(op, pinv_rhs, method=pinv_method))
    return dN, float(dP), float(dE)


def first_harmonic(values, grid=None):
    """Complex fundamental harmonic ``(2/N) sum_j values_j exp(-2 pi i j / N)``."""
    values = np.asarray(values, dtype=float)
    return 2.0 * np.fft.rfft(values)[1] / values.size


def field_first_harmonic(E, grid=None):
    """Magnitude of the fundamental spatial harmonic of ``E``."""
    return float(abs(first_harmonic(E, grid)))


def _window_mask(times, window):
    if window is None:
        return np.ones(times.shape, dtype=bool)
    lo, hi = window
    span = max(abs(hi - lo), 1.0)
    return (times >= lo - 1e-9 * span) & (times <= hi + 1e-9 * span)


def envelope_peaks(times, amplitudes):
    """Interior local maxima, refined by a parabola through log-amplitudes."""
    t = np.asarray(times, dtype=float)
    a = np.asarray(amplitudes, dtype=float)
    if t.size < 3:
        return t[:0], a[:0]
    mid = (a[1:-1] >= a[:-2]) & (a[1:-1] > a[2:])
    idx = np.nonzero(mid)[0] + 1
    pt, pa = [], []
    for i in idx:
        y0, y1, y2 = np.log(a[i - 1:i + 2])
        h = 0.5 * (t[i + 1] - t[i - 1])
        curv = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / curv if curv < 0 else 0.0
        shift = min(max(shift, -1.0), 1.0)
        pt.append(t[i] + shift * h)
        pa.append(math.exp(y1 - 0.25 * (y0 - y2) * shift))
    return np.array(pt), np.array(pa)


def fit_exponential_rate(times, amplitudes, window=None, peaks=False):
    """Least-squares slope of ``log(amplitude)`` against time.

    With ``peaks=True`` the fit uses the local maxima of the signal (the
    envelope of an oscillation), found on the whole series and then
    restricted to ``window``.
    """
    t = np.asarray(times, dtype=float)
    a = np.asarray(amplitudes, dtype=float)
    if t.shape != a.shape:
        raise DomainError("times and amplitudes must have the same shape")
    if peaks:
        t, a = envelope_peaks(t, a)
    mask = _window_mask(t, window)
    t, a = t[mask], a[mask]
    if t.size < 3:
        raise DomainError(f"need at least 3 points in the fit window, got {t.size}")
    if np.any(a <= 0):
        raise DomainError("amplitudes must be positive inside the fit window")
    slope, _ = np.polyfit(t, np.log(a), 1)
    return float(slope)


def oscillation_period(times, signal, window=None):
    """Mean period of a signed oscillation from its mean-crossings.

    Crossing times are located by linear interpolation; consecutive
    crossings are half a period apart.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(signal, dtype=float)
    mask = _window_mask(t, window)
    t, y = t[mask], y[mask] - y[mask].mean()
    s = np.sign(y)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    if idx.size < 2:
        raise DomainError("need at least two crossings to measure a period")
    tc = t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])
    return float(2.0 * np.mean(np.diff(tc)))


def numerical_drift(times, values, order=2):
    """Centered-difference time derivative of a sampled series.

    ``order=2`` uses ``np.gradient`` (one-sided second order at the ends).
    ``order=4`` applies the five-point stencil on a uniform sampling and
    falls back to the second-order values at the two outermost points on
    each side.
    """
    t = np.asarray(times, dtype=float)
    q = np.asarray(values, dtype=float)
    out = np.gradient(q, t, edge_order=2)
    if order == 2:
        return out
    if order != 4:
        raise DomainError(f"order must be 2 or 4, got {order!r}")
    if len(t) < 5:
        return out
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise DomainError("the fourth-order stencil needs uniform sampling")
    out[2:-2] = (q[:-4] - 8 * q[1:-3] + 8 * q[3:-1] - q[4:]) / (12 * h[0])
    return out


def compute_record(system, state, t, E=None):
    """Full diagnostics record of ``state`` for a :class:`VlasovPoissonSystem`."""
    if E is None:
        E = system.field(state)
    sp, mom, grid = system.species, system.moments, system.grid
    N = particle_number(state, sp, mom, grid)
    P = momentum_per_species(state, sp, mom, grid)
    K = kinetic_per_species(state, sp, mom, grid)
    pot = 0.5 * grid.dx * float(E @ E)
    dN, dP, dE = analytic_drifts(state, E, sp, mom, grid, system.op, pinv_method=system.poisson_method)
    return DiagnosticsRecord(
        time=float(t),
        particle_number=tuple(float(x) for x in N),
        momentum=tuple(float(x) for x in P),
        kinetic_energy=tuple(float(x) for x in K),
        potential_energy=pot,
        dN_dt=tuple(float(x) for x in dN),
        dP_dt=dP,
        dE_dt=dE,
        field_amplitude=field_first_harmonic(E, grid),
        enstrophy=tuple(float(x) for x in enstrophy(state, grid)),
        density_harmonic=tuple(complex(first_harmonic(n)) for n in species_density(state, sp, mom)),
    )
