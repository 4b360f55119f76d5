"""Restarted GMRES and companions for the coupled interface system.

The workhorse is `gmres`, a standard restarted GMRES with modified
Gram-Schmidt Arnoldi and Givens-rotation least squares.  `solve_coupled`
wires it to a Schur operator under one of three preconditioners:

  * fft       solve (I - A_c^{-1} S) p = A_c^{-1} f'  (transformed system)
  * identity  solve (A_c - S) p = f'
  * jacobi    diagonally scale (A_c - S) by its probed diagonal

`fixed_point` is the plain iteration p <- A_c^{-1}(S p + f'), kept for
comparison runs; it may diverge and says so instead of raising.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ValidationError
from .geometry import GridField

PRECONDITIONERS = ("identity", "jacobi", "fft")

_BREAKDOWN = 1e-14
_DIVERGENCE_FACTOR = 1e6
_JACOBI_GUARD = 4096


@dataclass(frozen=True)
class GmresConfig:
    m: int = 80
    tol: float = 1e-10
    max_restarts: int = 200
    preconditioner: str = "fft"

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("restart length m must be >= 1")
        if not self.tol > 0:
            raise ValidationError("tolerance must be positive")
        if self.max_restarts < 1:
            raise ValidationError("max_restarts must be >= 1")
        if self.preconditioner not in PRECONDITIONERS:
            raise ValidationError(
                f"unknown preconditioner {self.preconditioner!r}; "
                f"expected one of {PRECONDITIONERS}")


@dataclass(frozen=True)
class SolveReport:
    converged: bool
    iterations: int
    residual_history: np.ndarray
    wall_time: float
    true_residual: float = field(default=float("nan"))


def gmres(operator, rhs: np.ndarray, x0: np.ndarray | None = None,
          cfg: GmresConfig | None = None):
    """Restarted GMRES; returns (solution, SolveReport).

    `operator` is any callable mapping a length-N vector to a length-N
    vector.  Residuals in the report are 2-norms relative to the initial
    residual.  Raises ConvergenceError (report attached) if max_restarts
    cycles do not reach tol.
    """
    if cfg is None:
        cfg = GmresConfig()
    rhs = np.asarray(rhs, dtype=float)
    N = rhs.size
    x = np.zeros(N) if x0 is None else np.asarray(x0, dtype=float).copy()
    start = time.perf_counter()

    r = rhs - operator(x) if x.any() else rhs.copy()
    r0_norm = np.linalg.norm(r)
    if r0_norm == 0.0:
        report = SolveReport(converged=True, iterations=0,
                             residual_history=np.zeros(1),
                             wall_time=time.perf_counter() - start)
        return x, report

    history = [1.0]
    total_iters = 0
    m = min(cfg.m, N)

    for _ in range(cfg.max_restarts):
        beta = np.linalg.norm(r)
        if beta / r0_norm <= cfg.tol:
            break
        V = np.empty((m + 1, N))
        H = np.zeros((m + 1, m))
        V[0] = r / beta
        g = np.zeros(m + 1)
        g[0] = beta
        cs = np.zeros(m)
        sn = np.zeros(m)
        k_used = 0
        breakdown = False

        for k in range(m):
            # copy: the operator may hand back its input (e.g. identity)
            w = np.array(operator(V[k]), dtype=float)
            w_norm = np.linalg.norm(w)
            for i in range(k + 1):
                H[i, k] = V[i] @ w
                w -= H[i, k] * V[i]
            h_next = np.linalg.norm(w)
            H[k + 1, k] = h_next

            # apply accumulated Givens rotations to the new column
            for i in range(k):
                t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
                H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
                H[i, k] = t
            rho = np.hypot(H[k, k], H[k + 1, k])
            cs[k] = H[k, k] / rho if rho else 1.0
            sn[k] = H[k + 1, k] / rho if rho else 0.0
            H[k, k] = rho
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]

            total_iters += 1
            k_used = k + 1
            history.append(abs(g[k + 1]) / r0_norm)

            if h_next <= _BREAKDOWN * w_norm or h_next == 0.0:
                breakdown = True
                break
            V[k + 1] = w / h_next
            if history[-1] <= cfg.tol:
                break

        # solve the triangular system and update x
        y = np.zeros(k_used)
        for i in range(k_used - 1, -1, -1):
            y[i] = (g[i] - H[i, i + 1:k_used] @ y[i + 1:k_used]) / H[i, i]
        x = x + V[:k_used].T @ y

        r = rhs - operator(x)
        rel = np.linalg.norm(r) / r0_norm
        if rel <= cfg.tol or (breakdown and history[-1] <= cfg.tol):
            history[-1] = rel
            report = SolveReport(converged=True, iterations=total_iters,
                                 residual_history=np.asarray(history),
                                 wall_time=time.perf_counter() - start,
                                 true_residual=np.linalg.norm(r))
            return x, report
        if breakdown:
            # stalled with a nonzero residual: no further progress possible
            break

    report = SolveReport(converged=False, iterations=total_iters,
                         residual_history=np.asarray(history),
                         wall_time=time.perf_counter() - start,
                         true_residual=np.linalg.norm(rhs - operator(x)))
    err = ConvergenceError(
        f"GMRES did not reach tol={cfg.tol} in {total_iters} iterations "
        f"(relative residual {report.residual_history[-1]:.3e})",
        report=report)
    err.solution = x
    raise err


def solve_coupled(op, f_prime: GridField, cfg: GmresConfig | None = None):
    """Solve the coupled-subdomain system; returns (GridField, SolveReport)."""
    if cfg is None:
        cfg = GmresConfig()
    if f_prime.subdomain_id != op.coupled_id:
        raise ValidationError("right-hand side is not on the coupled subdomain")
    f = np.asarray(f_prime.values, dtype=float)

    if cfg.preconditioner == "fft":
        operator = op.preconditioned
        rhs = op.center_solve(f)
    elif cfg.preconditioner == "identity":
        operator = op.unpreconditioned
        rhs = f
    else:  # jacobi
        d = jacobi_diagonal(op)
        operator = lambda v: op.unpreconditioned(v) / d
        rhs = f / d

    x, report = gmres(operator, rhs, cfg=cfg)
    # log the untransformed residual as well
    true_res = np.linalg.norm(op.unpreconditioned(x) - f)
    report = SolveReport(converged=report.converged,
                         iterations=report.iterations,
                         residual_history=report.residual_history,
                         wall_time=report.wall_time,
                         true_residual=true_res)
    return GridField(op.coupled_id, x), report


def fixed_point(op, f_prime: GridField, max_iters: int = 1000,
                tol: float = 1e-10):
    """Plain iteration p <- A_c^{-1}(S p + f'); returns (GridField, SolveReport).

    Divergence (residual growth beyond 1e6x the initial) is reported via
    converged=False, never raised.
    """
    if f_prime.subdomain_id != op.coupled_id:
        raise ValidationError("right-hand side is not on the coupled subdomain")
    f = np.asarray(f_prime.values, dtype=float)
    start = time.perf_counter()
    f_norm = np.linalg.norm(f)
    if f_norm == 0.0:
        report = SolveReport(converged=True, iterations=0,
                             residual_history=np.zeros(1),
                             wall_time=time.perf_counter() - start,
                             true_residual=0.0)
        return GridField(op.coupled_id, np.zeros(op.size)), report

    base = op.center_solve(f)
    p = np.zeros(op.size)
    history = [1.0]
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        p = op.center_solve(op.schur(p)) + base
        res = np.linalg.norm(op.unpreconditioned(p) - f) / f_norm
        history.append(res)
        if res <= tol:
            converged = True
            break
        if not np.isfinite(res) or res > _DIVERGENCE_FACTOR * history[0]:
            break
    report = SolveReport(converged=converged, iterations=iters,
                         residual_history=np.asarray(history),
                         wall_time=time.perf_counter() - start,
                         true_residual=history[-1] * f_norm)
    return GridField(op.coupled_id, p), report


def jacobi_diagonal(op, guard: int = _JACOBI_GUARD) -> np.ndarray:
    """diag(A_c - S) by probing with unit vectors; desk scale only."""
    N = op.size
    if N > guard:
        raise ValidationError(
            f"coupled subdomain has {N} nodes; diagonal probing is guarded "
            f"at {guard} (desk scale only)")
    d = np.empty(N)
    e = np.zeros(N)
    for i in range(N):
        e[i] = 1.0
        d[i] = op.unpreconditioned(e)[i]
        e[i] = 0.0
    return d
