"""Map from square-root coefficients to SW coefficients on the same basis.

If sqrt(f) = sum_n a_n psi_n then the SW coefficients of f are
c_m = sum_{n,k} a_n a_k M_{n,k,m}, with M the triple product of basis
functions. psi_n psi_k decays like exp(-xi^2), faster than any single psi_m,
so the series in m does not terminate. Its coefficients fall off
geometrically; ``n_out`` sets how many are kept.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DomainError
from .hermite import HermiteParams, triple_product
from .vlasov import Formulation, SpectralState, SpeciesConfig, _check_consistent


@lru_cache(maxsize=32)
def _packed_table(active, n_out):
    # rows: pairs (n, k) with n <= k drawn from the active modes
    pairs = [(n, k) for i, n in enumerate(active) for k in active[i:]]
    table = np.zeros((len(pairs), n_out))
    for p, (n, k) in enumerate(pairs):
        for m in range((n + k) % 2, n_out, 2):
            table[p, m] = triple_product(n, k, m)
    idx_n = np.array([n for n, _ in pairs], dtype=int)
    idx_k = np.array([k for _, k in pairs], dtype=int)
    weight = np.where(idx_n == idx_k, 1.0, 2.0)
    table.setflags(write=False)
    return idx_n, idx_k, weight, table


def triple_product_table(n_modes, n_out=None):
    """Dense ``M[n, k, m]`` for ``n, k < n_modes`` and ``m < n_out``."""
    n_out = 2 * n_modes - 1 if n_out is None else n_out
    idx_n, idx_k, _, packed = _packed_table(tuple(range(n_modes)), n_out)
    M = np.zeros((n_modes, n_modes, n_out))
    M[idx_n, idx_k] = packed
    M[idx_k, idx_n] = packed
    return M


def swsr_to_sw(coeffs, truncate=False, n_out=None):
    """SW coefficients of the square of a square-root expansion.

    ``coeffs`` has the mode index first; any trailing axes (for example grid
    points) are mapped independently. The output has ``2 N_v - 1`` modes,
    ``N_v`` with ``truncate=True``, or ``n_out`` when given.
    """
    a = np.asarray(coeffs, dtype=float)
    if a.ndim == 0 or a.shape[0] < 1:
        raise DomainError("coefficients need a leading mode axis")
    if not np.all(np.isfinite(a)):
        raise DomainError("coefficients must be finite")
    nv = a.shape[0]
    if n_out is None:
        n_out = nv if truncate else 2 * nv - 1
    elif int(n_out) != n_out or n_out < 1:
        raise DomainError("n_out must be a positive integer")
    n_out = int(n_out)
    flat = a.reshape(nv, -1)
    active = tuple(int(i) for i in np.nonzero(np.any(flat != 0, axis=1))[0])
    out = np.zeros((n_out, flat.shape[1]))
    if active:
        idx_n, idx_k, weight, table = _packed_table(active, n_out)
        prod = weight[:, None] * flat[idx_n] * flat[idx_k]
        out = table.T @ prod
    return out.reshape((n_out,) + a.shape[1:])


def transform_state(state, species, truncate=False, n_out=None):
    """Map a square-root state to an SW state on the same basis.

    Returns ``(state, species)`` where the species carry the new mode count.
    """
    if state.formulation is not Formulation.SW_SQRT:
        raise DomainError("transform_state expects a square-root state")
    dyn = _check_consistent(state, species)
    blocks = [swsr_to_sw(b, truncate=truncate, n_out=n_out) for b in state.blocks]
    new_species = []
    it = iter(blocks)
    for s in species:
        if s.static_background:
            new_species.append(s)
            continue
        nv = next(it).shape[0]
        new_species.append(SpeciesConfig(s.name, s.charge, s.mass,
                                         HermiteParams(s.u, s.alpha, nv), s.static_background))
    assert len(dyn) == len(blocks)
    return SpectralState(blocks, Formulation.SW), new_species
