"""Fourier-in-space variant of the Hermite system, kept as a cross-check of the
finite-difference path.

Coefficients are stored for wavenumbers k = -N ... N at column k + N, with the
convention f(x) = sum_k f_k exp(2 pi i k x / l).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .vlasov import Formulation, _ladder, dynamic_species

NEUTRALITY_TOL = 1e-10


@dataclass
class FourierState:
    blocks: list            # complex arrays of shape (N_v, 2N + 1)
    formulation: Formulation = Formulation.SW

    def __post_init__(self):
        self.formulation = Formulation(self.formulation)
        self.blocks = [np.asarray(b, dtype=complex) for b in self.blocks]
        widths = {b.shape[-1] for b in self.blocks}
        if len(widths) != 1 or next(iter(widths)) % 2 == 0:
            raise DomainError("Fourier blocks must share an odd width 2N+1")

    @property
    def n_modes(self):
        return (self.blocks[0].shape[-1] - 1) // 2

    def is_real(self, tol=1e-12):
        """True when every block satisfies C_{n,-k} = conj(C_{n,k})."""
        return all(np.allclose(b[:, ::-1], np.conj(b), atol=tol, rtol=0) for b in self.blocks)


def wavenumbers(n_modes):
    return np.arange(-n_modes, n_modes + 1)


def wavenumber_operator(length, n_modes):
    """Diagonal of the spectral derivative, ``2 pi i k / l`` for ``|k| <= n_modes``."""
    if not length > 0:
        raise DomainError("length must be positive")
    return 2j * np.pi * wavenumbers(n_modes) / length


def toeplitz_matrix(E_hat):
    """Matrix T with T[k, j] = E_{k-j}, modes outside ``|k| <= N`` taken as zero."""
    E_hat = np.asarray(E_hat, dtype=complex)
    size = E_hat.size
    n = (size - 1) // 2
    diff = np.arange(size)[:, None] - np.arange(size)[None, :]
    T = np.zeros((size, size), dtype=complex)
    ok = np.abs(diff) <= n
    T[ok] = E_hat[diff[ok] + n]
    return T


def convolve(E_hat, C_hat):
    """Truncated convolution ``[E * C]_k = sum_j E_{k-j} C_j`` for ``|k| <= N``.

    ``C_hat`` may be 2-D, in which case every row is convolved.
    """
    E_hat = np.asarray(E_hat, dtype=complex)
    C_hat = np.asarray(C_hat, dtype=complex)
    if C_hat.shape[-1] != E_hat.size:
        raise DomainError("E_hat and C_hat must span the same wavenumbers")
    size = E_hat.size
    n = (size - 1) // 2
    out = np.zeros(C_hat.shape, dtype=complex)
    for k in range(size):
        for j in range(max(0, k - n), min(size, k + n + 1)):
            out[..., k] += E_hat[k - j + n] * C_hat[..., j]
    return out


def grid_to_fourier(values, n_modes):
    """Coefficients ``|k| <= n_modes`` of samples on a uniform periodic grid."""
    values = np.asarray(values, dtype=float)
    nx = values.shape[-1]
    if nx < 2 * n_modes + 1:
        raise DomainError("grid too coarse for the requested number of modes")
    full = np.fft.fft(values, axis=-1) / nx
    idx = wavenumbers(n_modes) % nx
    return full[..., idx]


def fourier_to_grid(coeffs, n_points):
    coeffs = np.asarray(coeffs, dtype=complex)
    n = (coeffs.shape[-1] - 1) // 2
    x_frac = np.arange(n_points) / n_points
    phase = np.exp(2j * np.pi * np.outer(wavenumbers(n), x_frac))
    return np.real(coeffs @ phase)


def fourier_rhs(state, E_hat, species, length):
    """Time derivative of the Fourier coefficients at fixed field ``E_hat``."""
    dyn = dynamic_species(species)
    if len(dyn) != len(state.blocks):
        raise DomainError("state blocks do not match the dynamic species")
    D = wavenumber_operator(length, state.n_modes)
    T = toeplitz_matrix(E_hat)
    blocks = []
    for s, b in zip(dyn, state.blocks):
        if b.shape[0] != s.n_modes:
            raise DomainError(f"species {s.name!r} expects {s.n_modes} modes")
        lower, upper = _ladder(b)
        Q = s.alpha * (lower + upper) + s.u * b
        out = -D[None, :] * Q + (s.charge / (s.mass * s.alpha)) * (lower - upper) @ T.T
        blocks.append(out)
    return FourierState(blocks, state.formulation)


def fourier_charge(state, species, moments):
    dyn = dynamic_species(species)
    width = 2 * state.n_modes + 1
    rho = np.zeros(width, dtype=complex)
    for s, b, mom in zip(dyn, state.blocks, moments):
        if state.formulation is Formulation.SW:
            rho += s.charge * s.alpha * (mom.I @ b)
        else:
            for row in b:
                rho += s.charge * s.alpha * convolve(row, row)
    if any(s.static_background for s in species):
        rho[state.n_modes] = 0.0
    return rho


def fourier_poisson(state, species, moments, length, neutralize=False):
    """Field coefficients ``E_k = l rho_k / (2 pi i k)`` with ``E_0 = 0``.

    ``neutralize`` drops the mean charge instead of rejecting it, as the time
    integrators need for their non-physical trial states.
    """
    rho = fourier_charge(state, species, moments)
    n = state.n_modes
    if neutralize:
        rho[n] = 0.0
    if abs(rho[n]) > NEUTRALITY_TOL:
        raise DomainError(f"mean charge {abs(rho[n]):.3e} is not zero")
    D = wavenumber_operator(length, n)
    E = np.zeros_like(rho)
    nz = np.arange(rho.size) != n
    E[nz] = rho[nz] / D[nz]
    return E


def assemble_operator(E_hat, species, length, n_modes):
    """Dense advection operator of one species in the Fourier basis."""
    D = np.diag(wavenumber_operator(length, n_modes))
    T = toeplitz_matrix(E_hat)
    nv, w = species.n_modes, 2 * n_modes + 1
    a, u, g = species.alpha, species.u, species.charge / (species.mass * species.alpha)
    A = np.zeros((nv * w, nv * w), dtype=complex)
    for n in range(nv):
        blk = slice(n * w, (n + 1) * w)
        A[blk, blk] = -u * D
        if n + 1 < nv:
            c = np.sqrt((n + 1) / 2)
            A[blk, (n + 1) * w:(n + 2) * w] = -a * c * D - g * c * T
        if n >= 1:
            c = np.sqrt(n / 2)
            A[blk, (n - 1) * w:n * w] = -a * c * D + g * c * T
    return A


def _inner(f_hat, g_hat, length):
    # integral over the period of f*g for real fields
    return float(np.real(length * np.sum(f_hat * np.conj(g_hat))))


def energy_product_terms(state, E_hat, species, length):
    """The two flux terms of the square-root energy drift, evaluated spectrally.

    They cancel identically because spectral differentiation obeys the
    product rule on the truncated space.
    """
    dyn = dynamic_species(species)
    n = state.n_modes
    D = wavenumber_operator(length, n)
    flux_sum = np.zeros(2 * n + 1, dtype=complex)
    grad_sum = np.zeros(2 * n + 1, dtype=complex)
    for s, b in zip(dyn, state.blocks):
        lower, upper = _ladder(b)
        Q = s.alpha * (lower + upper) + s.u * b
        for Cn, Qn in zip(b, Q):
            flux_sum += s.charge * s.alpha * convolve(Cn, Qn)
            grad_sum += s.charge * s.alpha * convolve(Cn, D * Qn)
    inv = np.zeros_like(grad_sum)
    nz = np.arange(grad_sum.size) != n
    inv[nz] = grad_sum[nz] / D[nz]
    return _inner(flux_sum, E_hat, length), -2.0 * _inner(inv, E_hat, length)


class FourierSystem:
    """Right-hand side on real-packed vectors ``[Re(C), Im(C)]`` so the real
    integrators can drive the Fourier path."""

    def __init__(self, species, length, n_modes, formulation=Formulation.SW):
        from .hermite import moment_tables

        self.species = list(species)
        self.dynamic = dynamic_species(self.species)
        self.length = float(length)
        self.n_modes = int(n_modes)
        self.formulation = Formulation(formulation)
        self.moments = [moment_tables(s.hermite) for s in self.dynamic]
        self._shapes = [(s.n_modes, 2 * self.n_modes + 1) for s in self.dynamic]

    def pack(self, state):
        z = np.concatenate([b.ravel() for b in state.blocks])
        return np.concatenate([z.real, z.imag])

    def unpack(self, flat):
        half = flat.size // 2
        z = flat[:half] + 1j * flat[half:]
        out, pos = [], 0
        for shape in self._shapes:
            size = shape[0] * shape[1]
            out.append(z[pos:pos + size].reshape(shape))
            pos += size
        return FourierState(out, self.formulation)

    def field(self, state):
        return fourier_poisson(state, self.species, self.moments, self.length, neutralize=True)

    def evaluate(self, flat):
        st = self.unpack(np.asarray(flat, dtype=float))
        return self.pack(fourier_rhs(st, self.field(st), self.species, self.length))
