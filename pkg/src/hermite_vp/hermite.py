"""Symmetrically-weighted Hermite basis functions and their moment integrals.

The basis is

    psi_n(xi) = (sqrt(pi) 2^n n!)^(-1/2) H_n(xi) exp(-xi^2 / 2),  xi = (v - u) / alpha.

Values are produced by the normalized three-term recurrence with a running
exponent, so neither the Hermite polynomial nor the Gaussian is ever formed on
its own. This keeps every value finite for large mode numbers and large |xi|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError

_LOG_PI = math.log(math.pi)
_RESCALE = 2.0 ** 600
_LOG_RESCALE = math.log(_RESCALE)


@dataclass(frozen=True)
class HermiteParams:
    """Velocity shift ``u``, scale ``alpha`` and mode count of one expansion."""

    u: float = 0.0
    alpha: float = 1.0
    n_modes: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.u)):
            raise DomainError(f"u must be finite, got {self.u!r}")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be a positive finite number, got {self.alpha!r}")
        if isinstance(self.n_modes, bool) or int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise DomainError(f"n_modes must be an integer >= 1, got {self.n_modes!r}")
        object.__setattr__(self, "n_modes", int(self.n_modes))
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "alpha", float(self.alpha))

    def xi(self, v):
        return (np.asarray(v, dtype=float) - self.u) / self.alpha


def basis_table(n_modes, xi):
    """Return ``psi_n(xi)`` for ``n < n_modes`` as an array of shape ``(n_modes, *xi.shape)``.

    The recurrence is run on rescaled values; whenever they grow past 2**600
    the pair is divided down and the factor is moved into a log-scale
    accumulator. Each output is ``sign * exp(log|value| + log_scale)``.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.empty((n_modes,) + xi.shape)
    log_scale = -0.5 * xi * xi - 0.25 * _LOG_PI
    prev = np.zeros_like(xi)
    cur = np.ones_like(xi)
    out[0] = np.exp(log_scale)
    with np.errstate(divide="ignore"):
        for n in range(n_modes - 1):
            nxt = xi * math.sqrt(2.0 / (n + 1)) * cur - math.sqrt(n / (n + 1)) * prev
            prev, cur = cur, nxt
            big = np.abs(cur) > _RESCALE
            if big.any():
                cur = np.where(big, cur / _RESCALE, cur)
                prev = np.where(big, prev / _RESCALE, prev)
                log_scale = np.where(big, log_scale + _LOG_RESCALE, log_scale)
            out[n + 1] = np.sign(cur) * np.exp(np.log(np.abs(cur)) + log_scale)
    return out


def _check_v(v):
    arr = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("velocity samples must be finite")
    return arr


def eval_basis(n, v, params):
    """Evaluate ``psi_n((v - u) / alpha)``.

    :param n: int, mode index with ``0 <= n < params.n_modes``
    :param v: float or array of velocities
    :param params: HermiteParams
    :return: float (or array matching ``v``)
    """
    if isinstance(n, bool) or int(n) != n or not 0 <= n < params.n_modes:
        raise DomainError(f"mode index {n!r} outside [0, {params.n_modes})")
    v = _check_v(v)
    val = basis_table(int(n) + 1, params.xi(v))[int(n)]
    return float(val) if val.ndim == 0 else val


def eval_basis_row(v, params):
    """All ``n_modes`` basis values at ``v`` from one recurrence pass.

    A scalar ``v`` gives a vector of length ``n_modes``; an array of shape
    ``S`` gives shape ``(n_modes, *S)``.
    """
    v = _check_v(v)
    return basis_table(params.n_modes, params.xi(v))


@dataclass(frozen=True)
class MomentTables:
    """Velocity moments of each basis function.

    ``I[n]`` is the integral of psi_n over xi, ``I1[n]`` the integral of
    v psi_n and ``I2[n]`` the integral of v^2 psi_n (both over xi).
    """

    I: np.ndarray
    I1: np.ndarray
    I2: np.ndarray


def _zeroth_moments(count):
    out = np.zeros(count)
    out[0] = math.sqrt(2.0) * math.pi ** 0.25
    for n in range(2, count, 2):
        out[n] = math.sqrt((n - 1) / n) * out[n - 2]
    return out


def moment_tables(params):
    """Build the I, I1 and I2 tables for ``params``.

    The zeroth-moment recursion is carried two indices past ``n_modes - 1`` so
    the first and second moments of the last modes are complete; negative
    indices count as zero.
    """
    nv = params.n_modes
    u, a = params.u, params.alpha
    ext = _zeroth_moments(nv + 3)

    def I(n):
        return ext[n] if n >= 0 else 0.0

    i1 = np.zeros(nv)
    i2 = np.zeros(nv)
    for n in range(nv):
        if n % 2:
            i1[n] = a * (math.sqrt((n + 1) / 2) * I(n + 1) + math.sqrt(n / 2) * I(n - 1))
            i2[n] = 2.0 * u * i1[n]
        else:
            i1[n] = u * I(n)
            i2[n] = a * a * (
                math.sqrt((n + 1) * (n + 2) / 4) * I(n + 2)
                + ((2 * n + 1) / 2 + (u / a) ** 2) * I(n)
                + math.sqrt(n * (n - 1) / 4) * I(n - 2)
            )
    tables = MomentTables(I=ext[:nv].copy(), I1=i1, I2=i2)
    for arr in (tables.I, tables.I1, tables.I2):
        arr.setflags(write=False)
    return tables


# Triple products. With lambda = sqrt(2/3) the substitution xi = lambda*y turns
# the integral of psi_n psi_k psi_m into a Gaussian integral of products of
# H_j(lambda*y). Linearizing H_n H_k, rescaling each H_j(lambda*y) into
# H_i(y), and using orthogonality leaves a finite signed sum whose terms are
# all rational. The sum is accumulated exactly; only the final normalization
# is done in log space.

@lru_cache(maxsize=None)
def _pair_integral(a, m):
    # integral of H_a(lambda y) H_m(lambda y) exp(-y^2) dy divided by
    # sqrt(pi) a! m! (-1/3)^((a+m)/2)
    if (a - m) % 2:
        return Fraction(0)
    total = Fraction(0)
    for j in range(a % 2, min(a, m) + 1, 2):
        total += Fraction((-4) ** j, math.factorial(j) * math.factorial((a - j) // 2)
                          * math.factorial((m - j) // 2))
    return total


@lru_cache(maxsize=None)
def _triple_sum(n, k, m):
    total = Fraction(0)
    for r in range(min(n, k) + 1):
        a = n + k - 2 * r
        coeff = 2 ** r * math.factorial(r) * math.comb(k, r) * math.comb(n, r)
        term = coeff * math.factorial(a) * math.factorial(m) * _pair_integral(a, m)
        total += term * Fraction(-1, 3) ** ((a + m) // 2)
    return total


def _log_abs_fraction(x):
    return math.log(abs(x.numerator)) - math.log(x.denominator)


def triple_product(n, k, m):
    """Integral of ``psi_n psi_k psi_m`` over the real line.

    The value is symmetric in its three indices and vanishes when
    ``n + k + m`` is odd. Unlike the weighted Hermite triple product there is
    no triangle rule: ``psi_n psi_k`` carries the Gaussian ``exp(-xi^2)``, so
    it overlaps every ``psi_m`` of matching parity.
    """
    for idx in (n, k, m):
        if isinstance(idx, bool) or int(idx) != idx or idx < 0:
            raise DomainError(f"triple product indices must be non-negative integers, got {(n, k, m)}")
    n, k, m = sorted((int(n), int(k), int(m)))
    if (n + k + m) % 2:
        return 0.0
    s = _triple_sum(n, k, m)
    if s == 0:
        return 0.0
    log_norm = 0.5 * ((n + k + m) * math.log(2.0) + math.lgamma(n + 1) + math.lgamma(k + 1)
                      + math.lgamma(m + 1))
    log_val = _log_abs_fraction(s) - log_norm + 0.5 * math.log(2.0 / 3.0) - 0.25 * _LOG_PI
    return math.copysign(math.exp(log_val), s.numerator)
