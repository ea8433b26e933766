"""Periodic grid, anti-symmetric central-difference operators and the
projected solve used in place of the pseudoinverse of the derivative."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, SolverError

# one-sided half of each stencil: coefficients of x_{j+1}, x_{j+2}, ...;
# the x_{j-o} coefficients are the negatives
STENCILS = {
    2: (1 / 2,),
    4: (2 / 3, -1 / 12),
    6: (3 / 4, -3 / 20, 1 / 60),
    8: (4 / 5, -1 / 5, 4 / 105, -1 / 280),
}


@dataclass(frozen=True)
class GridConfig:
    """Uniform periodic grid on ``[0, length)`` with ``n_points`` nodes."""

    length: float
    n_points: int
    order: int = 2

    def __post_init__(self):
        if not (np.isfinite(self.length) and self.length > 0):
            raise ConfigurationError(f"length must be positive, got {self.length!r}")
        if int(self.n_points) != self.n_points or self.n_points < 4:
            raise ConfigurationError(f"n_points must be an integer >= 4, got {self.n_points!r}")
        if self.order not in STENCILS:
            raise ConfigurationError("order must be one of 2,4,6,8")
        if self.n_points <= self.order:
            raise ConfigurationError(f"n_points ({self.n_points}) must exceed order ({self.order})")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self):
        return self.length / self.n_points

    @property
    def x(self):
        return np.arange(self.n_points) * self.dx


@dataclass(frozen=True)
class DerivativeOperator:
    """Circulant central difference ``(Dx)_j = sum_o c_o (x_{j+o} - x_{j-o})``.

    ``coefficients`` are the one-sided stencil weights already divided by dx.
    """

    grid: GridConfig
    coefficients: tuple
    _symbol: np.ndarray = field(repr=False, compare=False)

    @property
    def half_width(self):
        return len(self.coefficients)

    def first_row(self):
        """Dense first row ``[d_0, ..., d_{N-1}]`` (for inspection and oracles)."""
        row = np.zeros(self.grid.n_points)
        for o, c in enumerate(self.coefficients, start=1):
            row[o] += c
            row[-o] -= c
        return row

    def dense(self):
        """Dense matrix, only meant for small oracle checks."""
        row = self.first_row()
        n = self.grid.n_points
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        return row[idx]

    def apply(self, x):
        """Apply along the last axis of ``x``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.grid.n_points:
            raise DomainError(f"field length {x.shape[-1]} does not match grid size {self.grid.n_points}")
        h = self.half_width
        n = self.grid.n_points
        padded = np.concatenate((x[..., n - h:], x, x[..., :h]), axis=-1)
        out = np.zeros_like(x)
        for o, c in enumerate(self.coefficients, start=1):
            out += c * (padded[..., h + o:h + o + n] - padded[..., h - o:h - o + n])
        return out

    __call__ = apply

    @property
    def symbol(self):
        """Eigenvalues on the rfft modes (purely imaginary)."""
        return self._symbol

    def null_mask(self):
        """rfft modes spanning the null space (the mean, plus Nyquist for even N)."""
        s = np.abs(self._symbol)
        return s <= 1e-12 * s.max()


def build_derivative(grid):
    """Central-difference derivative of order ``grid.order`` on ``grid``."""
    if grid.order not in STENCILS:
        raise ConfigurationError("order must be one of 2,4,6,8")
    coeffs = tuple(c / grid.dx for c in STENCILS[grid.order])
    n = grid.n_points
    theta = 2 * np.pi * np.arange(n // 2 + 1) / n
    symbol = 2j * sum(c * np.sin(o * theta) for o, c in enumerate(coeffs, start=1))
    # sin(o*pi) is only zero up to round-off
    symbol[np.abs(symbol) < 1e-13 * np.abs(symbol).max()] = 0.0
    return DerivativeOperator(grid=grid, coefficients=coeffs, _symbol=symbol)


def apply_derivative(op, field):
    return op.apply(field)


def trapezoid(field, grid):
    """Periodic trapezoid rule, ``dx * sum(field)``."""
    field = np.asarray(field, dtype=float)
    if field.shape[-1] != grid.n_points:
        raise DomainError(f"field length {field.shape[-1]} does not match grid size {grid.n_points}")
    return grid.dx * field.sum(axis=-1)


def project_range(op, rhs):
    """Remove the components of ``rhs`` lying in the null space of ``op``.

    Always the mean; for even N also the alternating (checkerboard) mode,
    which every central stencil annihilates.
    """
    rhs = np.asarray(rhs, dtype=float)
    out = rhs - rhs.mean(axis=-1, keepdims=True)
    n = op.grid.n_points
    if n % 2 == 0:
        alt = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        out = out - (out @ alt / n)[..., None] * alt
    return out


def solve_singular(op, rhs, tol=1e-15, method="krylov", max_iters=None):
    """Minimum-norm least-squares solution of ``D x = rhs``.

    ``method="krylov"`` runs GMRES on the projected right-hand side starting
    from zero, so every iterate stays in the range of D (zero mean and, for
    even N, orthogonal to the checkerboard mode). ``method="spectral"``
    divides by the circulant eigenvalues directly; it returns the same
    vector to round-off and is what the time steppers use by default.
    """
    from .krylov import gmres

    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[-1] != op.grid.n_points:
        raise DomainError(f"rhs length {rhs.shape[-1]} does not match grid size {op.grid.n_points}")
    b = project_range(op, rhs)
    if method == "spectral":
        bh = np.fft.rfft(b, axis=-1)
        sym = op.symbol
        inv = np.zeros_like(sym)
        nz = sym != 0
        inv[nz] = 1.0 / sym[nz]
        return np.fft.irfft(bh * inv, n=op.grid.n_points, axis=-1)
    if method != "krylov":
        raise ConfigurationError(f"unknown pseudoinverse method {method!r}")
    if b.ndim != 1:
        return np.stack([solve_singular(op, row, tol, method, max_iters) for row in b])
    n = op.grid.n_points
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n)
    cap = max_iters or 10 * n
    # the system is consistent after projection; target a residual relative
    # to ||b|| (an absolute 1e-15 is below round-off for O(1) data)
    x, report = gmres(op.apply, b, np.zeros(n), rel_tol=tol, abs_tol=tol * bnorm,
                      restart=n, max_iters=cap)
    resid = np.linalg.norm(op.apply(x) - b)
    floor = 64 * np.finfo(float).eps * (np.abs(np.asarray(op.coefficients)).sum() * 2
                                        * np.linalg.norm(x) + bnorm)
    if resid > max(tol * bnorm, floor):
        raise SolverError("pseudoinverse solve did not converge", resid,
                          {"iterations": report.iterations})
    return project_range(op, x)
