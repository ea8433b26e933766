"""Matrix-free restarted GMRES and a Jacobian-free Newton-Krylov driver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError

_SQRT_EPS = np.sqrt(np.finfo(float).eps)


@dataclass(frozen=True)
class LinearOperatorHandle:
    """A linear map given only by its action on vectors."""

    dimension: int
    apply: object

    def __call__(self, x):
        return self.apply(x)


@dataclass
class SolveReport:
    iterations: int
    residual_norm: float
    converged: bool
    # inner (linear) iterations summed over a Newton solve; equals
    # ``iterations`` for a plain GMRES call
    linear_iterations: int = 0
    history: list = field(default_factory=list)


def _as_callable(op):
    return op.apply if isinstance(op, LinearOperatorHandle) else op


def gmres(op, rhs, x0=None, rel_tol=1e-5, abs_tol=1e-14, restart=30, max_iters=None):
    """Solve ``op(x) = rhs`` by restarted GMRES.

    Arnoldi uses modified Gram-Schmidt; the small least-squares problem is
    updated with Givens rotations so the residual estimate is available at
    every inner iteration. Convergence means
    ``||op(x) - rhs|| <= max(rel_tol * ||rhs||, abs_tol)``, checked on the
    true residual at the end of each cycle.

    Returns ``(x, SolveReport)``; a non-converged report is returned rather
    than raised so the caller can decide.
    """
    apply = _as_callable(op)
    b = np.asarray(rhs, dtype=float).ravel()
    n = b.size
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float).ravel()
    if max_iters is None:
        max_iters = max(10 * n, restart)
    restart = max(1, min(int(restart), n))
    bnorm = np.linalg.norm(b)
    target = max(rel_tol * bnorm, abs_tol)

    r = b - apply(x) if x.any() else b.copy()
    beta = np.linalg.norm(r)
    history = [beta]
    if beta <= target:
        return x, SolveReport(0, beta, True, 0, history)

    total = 0
    V = np.empty((restart + 1, n))
    H = np.zeros((restart + 1, restart))
    cs = np.zeros(restart)
    sn = np.zeros(restart)
    while total < max_iters:
        V[0] = r / beta
        g = np.zeros(restart + 1)
        g[0] = beta
        j_done = 0
        for j in range(restart):
            # copy: the operator may hand back its argument or a view of it
            w = np.array(apply(V[j]), dtype=float).ravel()
            for i in range(j + 1):
                H[i, j] = np.dot(w, V[i])
                w -= H[i, j] * V[i]
            hnext = np.linalg.norm(w)
            H[j + 1, j] = hnext
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            denom = np.hypot(H[j, j], H[j + 1, j])
            if denom == 0.0:
                cs[j], sn[j] = 1.0, 0.0
            else:
                cs[j], sn[j] = H[j, j] / denom, H[j + 1, j] / denom
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            total += 1
            j_done = j + 1
            history.append(abs(g[j + 1]))
            breakdown = hnext <= 1e-14 * max(denom, 1e-300)
            if abs(g[j + 1]) <= target or breakdown or total >= max_iters:
                break
            V[j + 1] = w / hnext
        y = np.linalg.solve(np.triu(H[:j_done, :j_done]), g[:j_done]) if j_done else np.zeros(0)
        x = x + y @ V[:j_done]
        r = b - apply(x)
        new_beta = np.linalg.norm(r)
        if new_beta <= target:
            return x, SolveReport(total, new_beta, True, total, history)
        if new_beta >= beta * (1 - 1e-12):
            # no progress over a full cycle
            return x, SolveReport(total, new_beta, False, total, history)
        beta = new_beta
    return x, SolveReport(total, beta, False, total, history)


def jfnk_solve(residual, x0, newton_rel_tol=1e-8, newton_abs_tol=1e-14, krylov_rel_tol=1e-5,
               max_newton=50, restart=30, krylov_max_iters=None):
    """Find a root of ``residual`` by Newton's method with matrix-free GMRES.

    Jacobian-vector products use forward differences with
    ``eps = sqrt(machine eps) * (1 + ||x||) / ||v||``. Steps are taken in full.
    Stops when ``||residual(x)|| <= max(newton_rel_tol * ||residual(x0)||,
    newton_abs_tol)`` and raises :class:`SolverError` after ``max_newton``
    iterations.
    """
    x0_arr = np.asarray(x0, dtype=float)
    shape = x0_arr.shape
    x = x0_arr.ravel().copy()

    def F(z):
        return np.asarray(residual(z.reshape(shape)), dtype=float).ravel()

    r = F(x)
    rnorm = np.linalg.norm(r)
    target = max(newton_rel_tol * rnorm, newton_abs_tol)
    history = [rnorm]
    linear = 0
    if krylov_max_iters is None:
        krylov_max_iters = 20 * restart
    it = 0
    while rnorm > target:
        if it >= max_newton:
            raise SolverError("Newton iteration cap reached", rnorm, {"newton_iterations": it})
        fx = r
        xnorm = np.linalg.norm(x)

        def jv(v, x=x, fx=fx, xnorm=xnorm):
            vnorm = np.linalg.norm(v)
            if vnorm == 0.0:
                return np.zeros_like(v)
            eps = _SQRT_EPS * (1.0 + xnorm) / vnorm
            return (F(x + eps * v) - fx) / eps

        # no point solving the correction far below what the outer loop needs
        step, rep = gmres(jv, -fx, None, rel_tol=krylov_rel_tol, abs_tol=0.1 * target,
                          restart=restart, max_iters=krylov_max_iters)
        linear += rep.iterations
        x = x + step
        r = F(x)
        rnorm = np.linalg.norm(r)
        history.append(rnorm)
        it += 1
        if not np.isfinite(rnorm):
            raise SolverError("Newton iteration diverged", rnorm, {"newton_iterations": it})
    return x.reshape(shape), SolveReport(it, rnorm, True, linear, history)
