"""Direct O(N log N) Helmholtz-Poisson solver on a single rectangle.

Pipeline: eigenbasis transform along one axis, one tridiagonal solve per
spectral mode along the other axis, inverse transform.  The transform
axis must carry one of the pure pair forms (plain Dirichlet/interface,
Neumann, periodic); the solve axis tolerates arbitrary per-end diagonal
modifications, which is where half-cell Dirichlet edges and Neumann
corner terms in the sweep direction land.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import transforms
from .errors import SingularOperatorError, ValidationError
from .geometry import BoundaryKind, GridField, RectSubdomain

_PIVOT_RTOL = 1e-13


def _transformable(sub: RectSubdomain, axis: str) -> bool:
    pair = sub.axis_pair(axis)
    if pair != "DD":
        return True
    lo, hi = (("west", "east") if axis == "x" else ("south", "north"))
    return sub.end_modifier(lo) == 0.0 and sub.end_modifier(hi) == 0.0


@dataclass(frozen=True)
class RectPlan:
    """Prepared factorizations for one rectangle; immutable and shareable."""

    subdomain: RectSubdomain
    transform_axis: str          # 'y' (default) or 'x' (field transposed)
    y_plan: transforms.SpectralPlan
    solve_pair: str              # BC pair along the sweep axis
    off: float                   # off-diagonal coupling delta on the sweep axis
    beta: np.ndarray             # (ms, nt) pivots of the per-mode LU
    lower: np.ndarray            # (ms, nt) subdiagonal multipliers
    cyclic: bool
    sm_q: np.ndarray | None      # Sherman-Morrison correction solves (cyclic)
    sm_denom: np.ndarray | None
    sm_gamma: np.ndarray | None
    singular_modes: tuple
    singular_dense: tuple
    pin_mean: bool

    @property
    def x_solver_kind(self) -> str:
        if self.cyclic:
            return "cyclic"
        return "corner-modified" if self.solve_pair == "NN" else "standard-tridiagonal"

    @property
    def singular(self) -> bool:
        return bool(self.singular_modes)


def _factor_tridiag(diag: np.ndarray, off: float, tol: float):
    """Vectorized LU of tridiag(off, diag[i], off) per column; returns
    (beta, lower, bad-column mask)."""
    ms, nt = diag.shape
    beta = np.empty_like(diag)
    lower = np.zeros_like(diag)
    beta[0] = diag[0]
    bad = np.abs(beta[0]) < tol
    safe = np.where(bad, 1.0, beta[0])
    for i in range(1, ms):
        lower[i] = off / safe
        beta[i] = diag[i] - off * lower[i]
        bad |= np.abs(beta[i]) < tol
        safe = np.where(bad, 1.0, beta[i])
        beta[i] = safe
    return beta, lower, bad


def _tridiag_solve(beta, lower, off, rhs):
    """Solve with the factors from _factor_tridiag; rhs is (ms, nt)."""
    ms = rhs.shape[0]
    y = np.empty_like(rhs)
    y[0] = rhs[0]
    for i in range(1, ms):
        y[i] = rhs[i] - lower[i] * y[i - 1]
    x = np.empty_like(rhs)
    x[ms - 1] = y[ms - 1] / beta[ms - 1]
    for i in range(ms - 2, -1, -1):
        x[i] = (y[i] - off * x[i + 1]) / beta[i]
    return x


def plan_rect(subdomain: RectSubdomain, pin_mean: bool = False) -> RectPlan:
    """Build the spectral plan and the per-mode tridiagonal factorizations.

    Raises SingularOperatorError for a singular operator (e.g. an
    all-Neumann rectangle with kappa = 0) unless pin_mean is set, in which
    case singular modes are solved in the minimum-norm sense.
    """
    sub = subdomain
    if _transformable(sub, "y"):
        axis = "y"
    elif _transformable(sub, "x"):
        axis = "x"
    else:
        raise ValidationError(
            f"subdomain {sub.id}: neither axis is in a pure transformable "
            f"form (half-cell Dirichlet on both axes?)")

    if axis == "y":
        nt, ms = sub.n, sub.m
        delta_t, delta_s = sub.delta_y, sub.delta_x
        lo, hi = "west", "east"
    else:
        nt, ms = sub.m, sub.n
        delta_t, delta_s = sub.delta_x, sub.delta_y
        lo, hi = "south", "north"
    t_pair = sub.axis_pair("y" if axis == "y" else "x")
    s_pair = sub.axis_pair("x" if axis == "y" else "y")

    plan = transforms.make_plan(t_pair, nt, delta_t, delta_s, sub.kappa)
    lam = plan.eigenvalues

    diag = np.tile(lam, (ms, 1))
    cyclic = s_pair == "PP"
    if cyclic:
        if ms % 2:
            raise ValidationError(
                f"subdomain {sub.id}: periodic sweep axis needs an even count")
    else:
        diag[0] += sub.end_modifier(lo)
        diag[-1] += sub.end_modifier(hi)

    tol = _PIVOT_RTOL * max(np.abs(lam).max(), delta_s)
    sm_q = sm_denom = sm_gamma = None
    if cyclic and ms > 2:
        # Sherman-Morrison rank-one correction of the wrap-around entries
        gamma = np.where(np.abs(diag[0]) > tol, -diag[0], delta_s)
        bdiag = diag.copy()
        bdiag[0] -= gamma
        bdiag[-1] -= delta_s * delta_s / gamma
        beta, lower, bad = _factor_tridiag(bdiag, delta_s, tol)
        u = np.zeros((ms, nt))
        u[0] = gamma
        u[-1] = delta_s
        sm_q = _tridiag_solve(beta, lower, delta_s, u)
        sm_denom = 1.0 + sm_q[0] + (delta_s / gamma) * sm_q[-1]
        bad |= np.abs(sm_denom) < 1e-12
        sm_gamma = gamma
    elif cyclic:  # ms == 2: wrap doubles the coupling
        beta, lower, bad = _factor_tridiag(diag, 2.0 * delta_s, tol)
    else:
        beta, lower, bad = _factor_tridiag(diag, delta_s, tol)

    singular_modes: tuple = ()
    singular_dense: tuple = ()
    if np.any(bad):
        singular_modes = tuple(int(k) for k in np.nonzero(bad)[0])
        if not pin_mean:
            raise SingularOperatorError(
                f"subdomain {sub.id}: operator singular in spectral modes "
                f"{singular_modes} (all-Neumann/periodic with kappa = 0?)")
        mats = []
        for k in singular_modes:
            M = np.diag(diag[:, k])
            idx = np.arange(ms - 1)
            M[idx, idx + 1] += delta_s
            M[idx + 1, idx] += delta_s
            if cyclic:
                M[0, ms - 1] += delta_s
                M[ms - 1, 0] += delta_s
            mats.append(M)
        singular_dense = tuple(mats)

    return RectPlan(subdomain=sub, transform_axis=axis, y_plan=plan,
                    solve_pair=s_pair, off=delta_s, beta=beta, lower=lower,
                    cyclic=cyclic, sm_q=sm_q, sm_denom=sm_denom,
                    sm_gamma=sm_gamma, singular_modes=singular_modes,
                    singular_dense=singular_dense, pin_mean=pin_mean)


def solve_rect(plan: RectPlan, f: GridField) -> GridField:
    """Solve A p = f on the rectangle; returns p as a new GridField."""
    sub = plan.subdomain
    if not isinstance(f, GridField):
        f = GridField(sub.id, f)
    if f.subdomain_id != sub.id:
        raise ValueError(
            f"field belongs to subdomain {f.subdomain_id}, plan to {sub.id}")
    if f.values.size != sub.size:
        raise ValueError(
            f"field length {f.values.size} != {sub.m} x {sub.n}")
    if plan.singular and not plan.pin_mean:
        raise SingularOperatorError("plan is singular")

    grid = f.values.reshape(sub.m, sub.n)
    if plan.transform_axis == "x":
        grid = grid.T
    fhat = transforms.apply_Qt(plan.y_plan, grid)        # (ms, nt)

    off = 2.0 * plan.off if (plan.cyclic and fhat.shape[0] == 2) else plan.off
    phat = _tridiag_solve(plan.beta, plan.lower, off, fhat)
    if plan.cyclic and plan.sm_q is not None:
        vy = phat[0] + (plan.off / plan.sm_gamma) * phat[-1]
        phat = phat - plan.sm_q * (vy / plan.sm_denom)
    for k, M in zip(plan.singular_modes, plan.singular_dense):
        phat[:, k] = np.linalg.lstsq(M, fhat[:, k], rcond=None)[0]

    out = transforms.apply_Q(plan.y_plan, phat)
    if plan.transform_axis == "x":
        out = out.T
    return GridField(subdomain_id=sub.id, values=out.reshape(-1))


def thomas_solve(diag: np.ndarray, off: float, rhs: np.ndarray,
                 kind: str = "standard") -> np.ndarray:
    """Direct solve of a (possibly corner-modified or cyclic) tridiagonal
    system with constant off-diagonal `off`.

    kind 'standard': tridiag(off, diag, off).
    kind 'corner':   diagonal gains +off at both ends (Neumann sweep axis).
    kind 'cyclic':   additional wrap-around entries `off` in the corners.
    """
    diag = np.asarray(diag, dtype=float).copy()
    rhs = np.asarray(rhs, dtype=float)
    m = diag.size
    if kind == "corner":
        diag[0] += off
        diag[-1] += off
    tol = _PIVOT_RTOL * max(np.abs(diag).max(), abs(off), 1.0)

    if kind == "cyclic":
        if m <= 3:
            M = np.diag(diag)
            for i in range(m):
                M[i, (i - 1) % m] += off
                M[i, (i + 1) % m] += off
            if abs(np.linalg.det(M)) < tol:
                raise SingularOperatorError("cyclic system is singular")
            return np.linalg.solve(M, rhs)
        gamma = -diag[0] if abs(diag[0]) > tol else off
        bdiag = diag.copy()
        bdiag[0] -= gamma
        bdiag[-1] -= off * off / gamma
        beta, lower, bad = _factor_tridiag(bdiag[:, None], off, tol)
        if bad[0]:
            raise SingularOperatorError("zero pivot in cyclic solve")
        u = np.zeros(m)
        u[0], u[-1] = gamma, off
        q = _tridiag_solve(beta, lower, off, u[:, None])[:, 0]
        y = _tridiag_solve(beta, lower, off, rhs[:, None])[:, 0]
        denom = 1.0 + q[0] + (off / gamma) * q[-1]
        if abs(denom) < 1e-12:
            raise SingularOperatorError("cyclic system is singular")
        return y - q * ((y[0] + (off / gamma) * y[-1]) / denom)

    beta, lower, bad = _factor_tridiag(diag[:, None], off, tol)
    if bad[0]:
        raise SingularOperatorError("zero pivot in tridiagonal solve")
    return _tridiag_solve(beta, lower, off, rhs[:, None])[:, 0]


def apply_rect_operator(sub: RectSubdomain, values: np.ndarray) -> np.ndarray:
    """Matrix-vector product with the rectangle operator (5-point stencil
    with the subdomain's boundary modifications); used for residual checks
    and unpreconditioned iteration."""
    G = np.asarray(values, dtype=float).reshape(sub.m, sub.n)
    dx, dy = sub.delta_x, sub.delta_y
    out = (-2.0 * (dx + dy) + sub.kappa) * G
    # y neighbours
    out[:, 1:] += dy * G[:, :-1]
    out[:, :-1] += dy * G[:, 1:]
    if sub.axis_pair("y") == "PP":
        out[:, 0] += dy * G[:, -1]
        out[:, -1] += dy * G[:, 0]
    else:
        out[:, 0] += sub.end_modifier("south") * G[:, 0]
        out[:, -1] += sub.end_modifier("north") * G[:, -1]
    # x neighbours
    out[1:, :] += dx * G[:-1, :]
    out[:-1, :] += dx * G[1:, :]
    if sub.axis_pair("x") == "PP":
        out[0, :] += dx * G[-1, :]
        out[-1, :] += dx * G[0, :]
    else:
        out[0, :] += sub.end_modifier("west") * G[0, :]
        out[-1, :] += sub.end_modifier("east") * G[-1, :]
    return out.reshape(-1)


def lift_dirichlet(sub: RectSubdomain, rhs: np.ndarray, edge: str,
                   boundary_values: np.ndarray) -> np.ndarray:
    """Move nonhomogeneous Dirichlet data on `edge` into the right-hand side.

    Ghost-node edges subtract delta * g at the adjacent node line; half-cell
    edges subtract 2 * delta * g (the ghost value is the reflection
    2g - p).  Returns a new flat RHS array.
    """
    if sub.edge_bc[edge] is not BoundaryKind.DIRICHLET:
        raise ValueError(f"edge {edge} of subdomain {sub.id} is not Dirichlet")
    G = np.asarray(rhs, dtype=float).reshape(sub.m, sub.n).copy()
    g = np.asarray(boundary_values, dtype=float)
    factor = 2.0 if edge in sub.half_cell_dirichlet else 1.0
    if edge == "west":
        G[0, :] -= factor * sub.delta_x * g
    elif edge == "east":
        G[-1, :] -= factor * sub.delta_x * g
    elif edge == "south":
        G[:, 0] -= factor * sub.delta_y * g
    else:
        G[:, -1] -= factor * sub.delta_y * g
    return G.reshape(-1)
