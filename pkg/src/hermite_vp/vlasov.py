"""Semi-discrete Vlasov-Poisson system in Hermite coefficients.

Each dynamic species carries a block of shape ``(N_v, N_x)``: row n holds the
coefficient C_n at every grid point, so ``block.ravel()`` is the mode-major
state vector. Both formulations share one advection right-hand side and
differ only in how the charge density is formed from the coefficients.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigurationError, DomainError
from .grid import build_derivative, solve_singular
from .hermite import HermiteParams, basis_table, moment_tables

THREADS_ENV = "HERMITE_VP_THREADS"
NEUTRALITY_TOL = 1e-10


class Formulation(str, Enum):
    SW = "sw"
    SW_SQRT = "sw_sqrt"


@dataclass(frozen=True)
class SpeciesConfig:
    """Charge, mass and Hermite parameters of one plasma species."""

    name: str
    charge: float
    mass: float
    hermite: HermiteParams
    static_background: bool = False

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigurationError(f"species {self.name!r}: mass must be positive")

    @property
    def n_modes(self):
        return self.hermite.n_modes

    @property
    def u(self):
        return self.hermite.u

    @property
    def alpha(self):
        return self.hermite.alpha


def dynamic_species(species):
    return [s for s in species if not s.static_background]


@dataclass
class SpectralState:
    """Coefficient blocks of the dynamic species, one ``(N_v, N_x)`` array each."""

    blocks: list
    formulation: Formulation = Formulation.SW

    def __post_init__(self):
        self.formulation = Formulation(self.formulation)
        self.blocks = [np.asarray(b, dtype=float) for b in self.blocks]
        if not self.blocks:
            raise DomainError("a state needs at least one dynamic species")
        nx = {b.shape[1] for b in self.blocks if b.ndim == 2}
        if any(b.ndim != 2 for b in self.blocks) or len(nx) != 1:
            raise DomainError("state blocks must be 2-D arrays sharing the grid size")

    @property
    def n_x(self):
        return self.blocks[0].shape[1]

    def psi(self, s):
        """Mode-major state vector of species ``s``."""
        return self.blocks[s].ravel()

    def flatten(self):
        return np.concatenate([b.ravel() for b in self.blocks])

    def like(self, flat):
        """A state with this layout holding the values of ``flat``."""
        out, pos = [], 0
        for b in self.blocks:
            out.append(np.asarray(flat[pos:pos + b.size]).reshape(b.shape))
            pos += b.size
        return SpectralState(out, self.formulation)

    def copy(self):
        return SpectralState([b.copy() for b in self.blocks], self.formulation)


def _check_consistent(state, species):
    dyn = dynamic_species(species)
    if len(dyn) != len(state.blocks):
        raise DomainError(f"{len(state.blocks)} state blocks for {len(dyn)} dynamic species")
    for s, b in zip(dyn, state.blocks):
        if b.shape[0] != s.n_modes:
            raise DomainError(f"species {s.name!r} expects {s.n_modes} modes, block has {b.shape[0]}")
    return dyn


def charge_density(state, species, moments=None):
    """Charge density at the grid points.

    SW uses the zeroth moments of the coefficients, SW_SQRT the sum of their
    squares. If any species is a static background the grid mean is removed,
    which is the uniform neutralizing density.
    """
    dyn = _check_consistent(state, species)
    if moments is None:
        moments = [moment_tables(s.hermite) for s in dyn]
    rho = np.zeros(state.n_x)
    for s, block, mom in zip(dyn, state.blocks, moments):
        if state.formulation is Formulation.SW:
            rho += s.charge * s.alpha * (mom.I @ block)
        else:
            rho += s.charge * s.alpha * np.einsum("nj,nj->j", block, block)
    if any(s.static_background for s in species):
        rho -= rho.mean()
    return rho


def solve_poisson(rho, op, tol=1e-15, method="krylov"):
    """Field E with ``D E = rho`` and zero mean."""
    rho = np.asarray(rho, dtype=float)
    mean = rho.mean()
    if abs(mean) > NEUTRALITY_TOL:
        raise DomainError(f"charge density is not neutral (mean {mean:.3e})")
    return solve_singular(op, rho, tol=tol, method=method)


def _ladder(block):
    """Return (sqrt(n/2) C_{n-1}, sqrt((n+1)/2) C_{n+1}) with truncation closure."""
    nv = block.shape[0]
    root = np.sqrt(np.arange(nv + 1) / 2.0)[:, None]
    lower = np.zeros_like(block)
    upper = np.zeros_like(block)
    lower[1:] = root[1:nv] * block[:-1]
    upper[:-1] = root[1:nv] * block[1:]
    return lower, upper


def flux(block, sp):
    """Q_n = alpha sqrt(n/2) C_{n-1} + alpha sqrt((n+1)/2) C_{n+1} + u C_n."""
    lower, upper = _ladder(block)
    return sp.alpha * (lower + upper) + sp.u * block


def species_rhs(block, E, sp, op, field_enabled=True):
    lower, upper = _ladder(block)
    out = -op.apply(sp.alpha * (lower + upper) + sp.u * block)
    if field_enabled:
        out += (sp.charge / (sp.mass * sp.alpha)) * E[None, :] * (lower - upper)
    return out


def advection_rhs(state, E, species, op, field_enabled=True):
    """Time derivative of every coefficient block at fixed field ``E``."""
    dyn = _check_consistent(state, species)
    E = np.asarray(E, dtype=float)
    if E.shape != (state.n_x,):
        raise DomainError(f"field has shape {E.shape}, expected ({state.n_x},)")
    blocks = [species_rhs(b, E, s, op, field_enabled) for s, b in zip(dyn, state.blocks)]
    return SpectralState(blocks, state.formulation)


def ladder_matrices(n_modes):
    """Dense mode-space matrices (sum, difference) of the two ladder terms.

    ``(S @ C)_n = sqrt(n/2) C_{n-1} + sqrt((n+1)/2) C_{n+1}``, and ``L`` the
    same with the upper term negated.
    """
    off = np.sqrt(np.arange(1, n_modes) / 2.0)
    lower = np.diag(off, -1)
    upper = np.diag(off, 1)
    return lower + upper, lower - upper


def dense_advection_operator(sp, E, op, field_enabled=True):
    """Dense matrix of one species' right-hand side at fixed field ``E``,
    acting on the mode-major vector ``block.ravel()``. Meant for small sizes."""
    S, L = ladder_matrices(sp.n_modes)
    Q = sp.alpha * S + sp.u * np.eye(sp.n_modes)
    A = -np.kron(Q, op.dense())
    if field_enabled:
        A += (sp.charge / (sp.mass * sp.alpha)) * np.kron(L, np.diag(np.asarray(E, dtype=float)))
    return A


def reconstruct_distribution(state, species, species_index, x_index, v_samples):
    """Distribution function of one species at grid point ``x_index``."""
    dyn = _check_consistent(state, species)
    if not 0 <= species_index < len(dyn):
        raise DomainError(f"species index {species_index} out of range")
    if not -state.n_x <= x_index < state.n_x:
        raise DomainError(f"grid index {x_index} out of range")
    sp = dyn[species_index]
    psi = basis_table(sp.n_modes, sp.hermite.xi(_finite(v_samples)))
    g = state.blocks[species_index][:, x_index] @ psi
    return g * g if state.formulation is Formulation.SW_SQRT else g


def reconstruct_grid(state, species, species_index, v_samples):
    """Distribution of one species on every grid point, shape ``(N_x, len(v))``."""
    dyn = _check_consistent(state, species)
    sp = dyn[species_index]
    psi = basis_table(sp.n_modes, sp.hermite.xi(_finite(v_samples)))
    g = state.blocks[species_index].T @ psi
    return g * g if state.formulation is Formulation.SW_SQRT else g


def _finite(v):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if not np.all(np.isfinite(v)):
        raise DomainError("velocity samples must be finite")
    return v


def thread_count():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


@dataclass
class VlasovPoissonSystem:
    """Everything needed to evaluate d(state)/dt from the state alone.

    ``poisson_method`` picks the pseudoinverse realization: ``"spectral"``
    (circulant eigen-division, the default) or ``"krylov"`` (GMRES).
    """

    species: list
    grid: object
    formulation: Formulation = Formulation.SW
    field_enabled: bool = True
    poisson_method: str = "spectral"
    poisson_tol: float = 1e-15
    threads: int = field(default_factory=thread_count)

    def __post_init__(self):
        self.formulation = Formulation(self.formulation)
        self.dynamic = dynamic_species(self.species)
        if not self.dynamic:
            raise ConfigurationError("at least one dynamic species is required")
        self.op = build_derivative(self.grid)
        self.moments = [moment_tables(s.hermite) for s in self.dynamic]
        self._shapes = [(s.n_modes, self.grid.n_points) for s in self.dynamic]
        self._pool = ThreadPoolExecutor(self.threads) if self.threads > 1 and len(self.dynamic) > 1 else None

    @property
    def size(self):
        return sum(a * b for a, b in self._shapes)

    def unpack(self, flat):
        out, pos = [], 0
        for shape in self._shapes:
            n = shape[0] * shape[1]
            out.append(flat[pos:pos + n].reshape(shape))
            pos += n
        return SpectralState(out, self.formulation)

    def pack(self, state):
        return state.flatten()

    def field(self, state):
        if not self.field_enabled:
            return np.zeros(self.grid.n_points)
        rho = charge_density(state, self.species, self.moments)
        # Newton probe states and midpoint averages need not be exactly
        # neutral; the pseudoinverse discards the mean either way
        rho = rho - rho.mean()
        return solve_poisson(rho, self.op, self.poisson_tol, self.poisson_method)

    def rhs(self, state):
        E = self.field(state)
        args = list(zip(state.blocks, self.dynamic))
        if self._pool is not None:
            blocks = list(self._pool.map(
                lambda a: species_rhs(a[0], E, a[1], self.op, self.field_enabled), args))
        else:
            blocks = [species_rhs(b, E, s, self.op, self.field_enabled) for b, s in args]
        return SpectralState(blocks, self.formulation)

    def evaluate(self, flat):
        """Flat-vector right-hand side, the form the integrators use."""
        return self.rhs(self.unpack(np.asarray(flat, dtype=float))).flatten()

    __call__ = evaluate
