"""Cross-domain benchmark: case construction, studies, CSV output.

The benchmark domain is a plus-shaped union of five rectangles of overall
extent 7L x 7L: a 2L x 4L center with four arms.  Outer edges carry zero
Dirichlet data on the arm-end faces and zero Neumann data on the arm
flanks.  The manufactured solution

    p(x, y) = sin(psi_x(x)) sin(psi_y(y))

uses cubic phase polynomials pinned so that p vanishes on every Dirichlet
face and its normal derivative vanishes on every Neumann face; the
right-hand side is its Laplacian (plus kappa * p when a Helmholtz shift
is requested).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .geometry import (BoundaryKind, CompositeDomain, GridField,
                       RectSubdomain, make_interface, validate)
from . import ddm, krylov

D = BoundaryKind.DIRICHLET
N = BoundaryKind.NEUMANN
I = BoundaryKind.INTERFACE

# subdomain ids inside the cross
CENTER, WEST, EAST, SOUTH, NORTH = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class CrossCase:
    L: float
    k_n: int
    kappa: float
    composite: CompositeDomain
    psi_coeffs: tuple  # (A1, A2, A3, B1, B2, B3)
    paper_literal: bool = False

    @property
    def h(self) -> float:
        return self.L / self.k_n

    @property
    def total_nodes(self) -> int:
        return sum(s.size for s in self.composite.subdomains)


def derive_psi_coeffs(L: float) -> tuple:
    """Phase-polynomial coefficients from the endpoint constraints.

    psi_x(x) = x (A1 + A2 (x - L) + A3 (x^2 - 4Lx + 3L^2)) must hit
    pi/2, 3pi/2, 3pi at x = L, 3L, 7L; psi_y analogously hits pi/2,
    3pi/2, 2pi at y = 2L, 6L, 7L.  Each axis is a 3x3 linear solve.
    """
    def solve_axis(xs, targets, shift, q):
        M = np.array([[x, x * (x - shift), x * q(x)] for x in xs])
        return np.linalg.solve(M, np.asarray(targets))

    a = solve_axis([L, 3 * L, 7 * L],
                   [np.pi / 2, 3 * np.pi / 2, 3 * np.pi],
                   L, lambda x: x * x - 4 * L * x + 3 * L * L)
    b = solve_axis([2 * L, 6 * L, 7 * L],
                   [np.pi / 2, 3 * np.pi / 2, 2 * np.pi],
                   2 * L, lambda y: y * y - 8 * L * y + 12 * L * L)
    return (a[0], a[1], a[2], b[0], b[1], b[2])


def paper_literal_coeffs(L: float) -> tuple:
    """The originally published constant set (does not satisfy the outer
    Dirichlet conditions; kept selectable for comparison runs)."""
    return (np.pi / (2 * L), 0.0, -np.pi / (56 * L ** 3),
            np.pi / (4 * L), 0.0, -np.pi / (28 * L ** 3))


def build_cross(L: float = 1.0 / 7.0, k_n: int = 1, kappa: float = 0.0,
                paper_literal: bool = False) -> CrossCase:
    """Five-rectangle cross at grid density k_n nodes per length L."""
    if k_n < 1:
        raise ValidationError("k_n must be >= 1")
    h = L / k_n
    k = k_n

    def rect(sid, origin, m, n, bc, half=()):
        return RectSubdomain(id=sid, origin=origin, m=m, n=n, dx=h, dy=h,
                             edge_bc=bc, kappa=kappa,
                             half_cell_dirichlet=frozenset(half))

    center = rect(CENTER, (L, 2 * L), 2 * k, 4 * k,
                  {"west": I, "east": I, "south": I, "north": I})
    west = rect(WEST, (0.0, 2 * L), k, 4 * k,
                {"west": D, "east": I, "south": N, "north": N},
                half=("west",))
    east = rect(EAST, (3 * L, 2 * L), 4 * k, 4 * k,
                {"west": I, "east": D, "south": N, "north": N},
                half=("east",))
    south = rect(SOUTH, (L, 0.0), 2 * k, 2 * k,
                 {"west": N, "east": N, "south": D, "north": I},
                 half=("south",))
    north = rect(NORTH, (L, 6 * L), 2 * k, k,
                 {"west": N, "east": N, "south": I, "north": D},
                 half=("north",))

    interfaces = [
        make_interface(0, west, "east", center, "west"),
        make_interface(1, center, "east", east, "west"),
        make_interface(2, south, "north", center, "south"),
        make_interface(3, center, "north", north, "south"),
    ]
    comp = CompositeDomain(subdomains=[center, west, east, south, north],
                           interfaces=interfaces)
    validate(comp).require()
    coeffs = paper_literal_coeffs(L) if paper_literal else derive_psi_coeffs(L)
    return CrossCase(L=L, k_n=k_n, kappa=kappa, composite=comp,
                     psi_coeffs=coeffs, paper_literal=paper_literal)


# ---------------------------------------------------------------------------
# manufactured solution

def _psi_x(case: CrossCase, x):
    A1, A2, A3, *_ = case.psi_coeffs
    L = case.L
    return x * (A1 + A2 * (x - L) + A3 * (x * x - 4 * L * x + 3 * L * L))


def _psi_x_prime(case: CrossCase, x):
    A1, A2, A3, *_ = case.psi_coeffs
    L = case.L
    return A1 + A2 * (2 * x - L) + A3 * (3 * x * x - 8 * L * x + 3 * L * L)


def _psi_x_second(case: CrossCase, x):
    _, A2, A3, *_ = case.psi_coeffs
    return 2 * A2 + A3 * (6 * x - 8 * case.L)


def _psi_y(case: CrossCase, y):
    *_, B1, B2, B3 = case.psi_coeffs
    L = case.L
    return y * (B1 + B2 * (y - 2 * L) + B3 * (y * y - 8 * L * y + 12 * L * L))


def _psi_y_prime(case: CrossCase, y):
    *_, B1, B2, B3 = case.psi_coeffs
    L = case.L
    return B1 + B2 * (2 * y - 2 * L) + B3 * (3 * y * y - 16 * L * y + 12 * L * L)


def _psi_y_second(case: CrossCase, y):
    *_, _B1, B2, B3 = case.psi_coeffs
    return 2 * B2 + B3 * (6 * y - 16 * case.L)


def inside_cross(case: CrossCase, x, y, tol: float = 1e-12) -> np.ndarray:
    """True where (x, y) lies in the closed cross-shaped union."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.zeros(np.broadcast(x, y).shape, dtype=bool)
    for sub in case.composite.subdomains:
        x0, x1, y0, y1 = sub.extent()
        ok |= ((x >= x0 - tol) & (x <= x1 + tol)
               & (y >= y0 - tol) & (y <= y1 + tol))
    return ok


def _require_inside(case, x, y):
    if not np.all(inside_cross(case, x, y)):
        raise ValidationError("point lies outside the cross domain")


def manufactured_solution(case: CrossCase, x, y):
    """Analytic p(x, y); raises if a point is outside the domain."""
    _require_inside(case, x, y)
    return np.sin(_psi_x(case, x)) * np.sin(_psi_y(case, y))


def manufactured_rhs(case: CrossCase, x, y):
    """Laplacian of the analytic solution, plus kappa * p if shifted."""
    _require_inside(case, x, y)
    sx, cx = np.sin(_psi_x(case, x)), np.cos(_psi_x(case, x))
    sy, cy = np.sin(_psi_y(case, y)), np.cos(_psi_y(case, y))
    px, ppx = _psi_x_prime(case, x), _psi_x_second(case, x)
    py, ppy = _psi_y_prime(case, y), _psi_y_second(case, y)
    f = (ppx * cx - px * px * sx) * sy + sx * (ppy * cy - py * py * sy)
    if case.kappa:
        f = f + case.kappa * sx * sy
    return f


def _node_grid(sub: RectSubdomain):
    """(x, y) coordinate arrays over the rectangle in flat node order."""
    X, Y = np.meshgrid(sub.x_nodes(), sub.y_nodes(), indexing="ij")
    return X.ravel(), Y.ravel()


def exact_fields(case: CrossCase) -> dict:
    out = {}
    for sub in case.composite.subdomains:
        x, y = _node_grid(sub)
        out[sub.id] = GridField(sub.id, manufactured_solution(case, x, y))
    return out


def rhs_fields(case: CrossCase) -> dict:
    out = {}
    for sub in case.composite.subdomains:
        x, y = _node_grid(sub)
        out[sub.id] = GridField(sub.id, manufactured_rhs(case, x, y))
    return out


def solve_case(case: CrossCase, cfg: krylov.GmresConfig | None = None):
    """Solve the cross with its manufactured RHS; (fields, report)."""
    return ddm.ddm_solve(case.composite, rhs_fields(case), cfg)


def error_norms(case: CrossCase, fields: dict) -> tuple:
    """(L-infinity, L2) node errors against the manufactured solution."""
    exact = exact_fields(case)
    sup = 0.0
    sq = 0.0
    count = 0
    for sid, fld in fields.items():
        diff = fld.values - exact[sid].values
        sup = max(sup, float(np.abs(diff).max(initial=0.0)))
        sq += float(diff @ diff)
        count += diff.size
    return sup, np.sqrt(sq / max(count, 1))


# ---------------------------------------------------------------------------
# studies

def run_convergence(kn_list, L: float = 1.0 / 7.0, kappa: float = 0.0,
                    cfg: krylov.GmresConfig | None = None,
                    paper_literal: bool = False) -> list:
    """Rows of (k_n, h, linf_error, l2_error, observed_order)."""
    if list(kn_list) != sorted(kn_list):
        raise ValidationError("k_n sweep must be nondecreasing")
    rows = []
    prev = None
    for kn in kn_list:
        case = build_cross(L=L, k_n=kn, kappa=kappa,
                           paper_literal=paper_literal)
        fields, _ = solve_case(case, cfg)
        linf, l2 = error_norms(case, fields)
        order = float("nan") if prev is None else np.log2(prev / linf)
        rows.append({"k_n": kn, "h": case.h, "linf_error": linf,
                     "l2_error": l2, "observed_order": order})
        prev = linf
    return rows


def run_precond_compare(kn_list, m_list, tol: float = 1e-7,
                        preconditioners=("fft", "jacobi", "identity"),
                        max_restarts: int = 40, L: float = 1.0 / 7.0):
    """Rows of (k_n, m, preconditioner, iterations, converged) + histories.

    Non-convergence is recorded with the iteration cap and flagged, never
    raised.  Returns (rows, histories) where histories maps
    (k_n, m, preconditioner) to the residual-history array.
    """
    rows, histories = [], {}
    for kn in kn_list:
        case = build_cross(L=L, k_n=kn)
        op = ddm.build_schur_operator(case.composite)
        f = rhs_fields(case)
        f_prime = f[op.coupled_id].values.copy()
        for nb in op.neighbors:
            sid = nb.plan.subdomain.id
            q = nb.to_center.apply(
                ddm.solve_rect(nb.plan, f[sid].values).values)
            f_prime -= q
        rhs = GridField(op.coupled_id, f_prime)
        for m in m_list:
            for precond in preconditioners:
                cfg = krylov.GmresConfig(m=m, tol=tol,
                                         max_restarts=max_restarts,
                                         preconditioner=precond)
                try:
                    _, rep = krylov.solve_coupled(op, rhs, cfg)
                    iters, conv, hist = rep.iterations, rep.converged, \
                        rep.residual_history
                except ConvergenceError as exc:
                    iters, conv, hist = exc.report.iterations, False, \
                        exc.report.residual_history
                rows.append({"k_n": kn, "m": m, "preconditioner": precond,
                             "iterations": iters, "converged": int(conv)})
                histories[(kn, m, precond)] = np.asarray(hist)
    return rows, histories


def fit_exponent(kns, iters) -> float:
    """Least-squares slope of log(iterations) against log(k_n)."""
    x = np.log(np.asarray(kns, dtype=float))
    y = np.log(np.asarray(iters, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def run_scaling(kn_list, tol_list=(1e-7, 1e-10), m: int = 80,
                max_restarts: int = 200, L: float = 1.0 / 7.0):
    """Rows of (tol, k_n, iterations, fitted_exponent per tol)."""
    rows = []
    for tol in tol_list:
        kns, counts = [], []
        for kn in kn_list:
            case = build_cross(L=L, k_n=kn)
            cfg = krylov.GmresConfig(m=m, tol=tol, max_restarts=max_restarts,
                                     preconditioner="fft")
            _, rep = solve_case(case, cfg)
            kns.append(kn)
            counts.append(rep.iterations)
        expo = fit_exponent(kns, counts) if len(kns) >= 2 else float("nan")
        for kn, it in zip(kns, counts):
            rows.append({"tol": tol, "k_n": kn, "iterations": it,
                         "fitted_exponent": expo})
    return rows


def run_timing(kn_list, tol: float = 1e-7, m: int = 80, repeats: int = 5,
               L: float = 1.0 / 7.0):
    """Rows of (k_n, iterations, seconds_per_iteration); median of repeats.

    Plans are built (and one solve run) before timing so FFT sizes are
    warm; the per-iteration cost is total GMRES wall time over total
    inner iterations.
    """
    rows = []
    for kn in kn_list:
        case = build_cross(L=L, k_n=kn)
        op = ddm.build_schur_operator(case.composite)
        f = rhs_fields(case)
        f_prime = f[op.coupled_id].values.copy()
        for nb in op.neighbors:
            sid = nb.plan.subdomain.id
            f_prime -= nb.to_center.apply(
                ddm.solve_rect(nb.plan, f[sid].values).values)
        rhs = GridField(op.coupled_id, f_prime)
        cfg = krylov.GmresConfig(m=m, tol=tol, preconditioner="fft")
        krylov.solve_coupled(op, rhs, cfg)  # warm-up
        per_iter = []
        iters = 0
        for _ in range(repeats):
            start = time.perf_counter()
            _, rep = krylov.solve_coupled(op, rhs, cfg)
            elapsed = time.perf_counter() - start
            iters = rep.iterations
            per_iter.append(elapsed / max(rep.iterations, 1))
        rows.append({"k_n": kn, "iterations": iters,
                     "seconds_per_iteration": float(np.median(per_iter))})
    return rows


# ---------------------------------------------------------------------------
# output

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def emit_csv(rows, path, header=None) -> None:
    """Write dict rows as CSV with a header; deterministic formatting."""
    if header is None:
        header = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) for k in header) + "\n")


def emit_field(case: CrossCase, fields: dict, path) -> None:
    """Dump a solution as (x, y, value) triples in node order."""
    with open(path, "w", newline="\n") as fh:
        fh.write("x,y,value\n")
        for sub in case.composite.subdomains:
            x, y = _node_grid(sub)
            vals = fields[sub.id].values
            for xi, yi, vi in zip(x, y, vals):
                fh.write(f"{_fmt(xi)},{_fmt(yi)},{_fmt(vi)}\n")


def emit_history(history, path) -> None:
    """Per-iteration relative residuals as CSV."""
    with open(path, "w", newline="\n") as fh:
        fh.write("iteration,relative_residual\n")
        for i, r in enumerate(np.asarray(history)):
            fh.write(f"{i},{_fmt(float(r))}\n")
