"""End-to-end acceptance gates, one test per criterion.

Each test prints a single PASS/FAIL line (visible with pytest -s or on
failure) in addition to asserting, so the suite doubles as a report.
"""

import time

import numpy as np
import pytest

from fftddm import bench, ddm, krylov, oracle, rectsolver, transforms
from fftddm.errors import ConvergenceError
from fftddm.geometry import GridField

from conftest import make_rect


def _verdict(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    print(line)
    assert ok, line


def test_criterion_1_oracle_equivalence_small_instances():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for kn in (1, 2):
        comp = bench.build_cross(k_n=kn).composite
        G = oracle.assemble_global_matrix(comp)
        offs = oracle.global_offsets(comp)
        for _ in range(10):
            fvec = rng.standard_normal(G.shape[0])
            f = {sid: fvec[a:b] for sid, (a, b) in offs.items()}
            fields, _ = ddm.ddm_solve(comp, f, krylov.GmresConfig(tol=1e-12))
            want = oracle.dense_lu_solve(G, fvec)
            got = np.concatenate(
                [fields[s.id].values for s in comp.subdomains])
            worst = max(worst,
                        np.abs(got - want).max() / np.abs(want).max())
    elapsed = time.perf_counter() - start
    _verdict("criterion 1 (composite solve vs dense LU)",
             worst <= 1e-8 and elapsed < 10.0,
             f"worst relative error {worst:.3e} (<= 1e-8), "
             f"{elapsed:.1f} s (< 10 s)")


def test_criterion_2_transform_correctness():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst_orth = worst_diag = worst_fft = 0.0
    for bc in transforms.BC_PAIRS:
        for n in (2, 3, 4, 8, 16, 32):
            if bc == "PP" and n % 2:
                continue
            plan = transforms.make_plan(bc, n, 1.0, 1.0)
            v = rng.standard_normal(n)
            w = transforms.apply_Qt(plan, transforms.apply_Q(plan, v))
            worst_orth = max(worst_orth,
                             np.abs(w - v).max() / np.abs(v).max())
            A = oracle.assemble_axis_matrix(bc, n, 1.0, 1.0)
            Qd = oracle.assemble_eigvector_matrix(bc, n)
            Q = np.column_stack(
                [transforms.apply_Q(plan, col) for col in np.eye(n)])
            lam = plan.eigenvalues
            worst_diag = max(worst_diag,
                             np.abs(Q.T @ A @ Q - np.diag(lam)).max()
                             / np.abs(lam).max())
            worst_fft = max(worst_fft, np.abs(Q - Qd).max())
    elapsed = time.perf_counter() - start
    ok = worst_orth <= 1e-12 and worst_diag <= 1e-10 \
        and worst_fft <= 1e-11 and elapsed < 5.0
    _verdict("criterion 2 (transform correctness)", ok,
             f"orthogonality {worst_orth:.2e} (<= 1e-12), diagonalization "
             f"{worst_diag:.2e} (<= 1e-10), FFT vs dense {worst_fft:.2e} "
             f"(<= 1e-11), {elapsed:.1f} s (< 5 s)")


def test_criterion_3_second_order_convergence():
    start = time.perf_counter()
    rows = bench.run_convergence([4, 8, 16, 32, 64])
    elapsed = time.perf_counter() - start
    orders = [r["observed_order"] for r in rows[-2:]]
    ok = all(1.9 <= o <= 2.1 for o in orders) and elapsed < 120.0
    _verdict("criterion 3 (second-order convergence)", ok,
             f"last two observed orders {orders[0]:.3f}, {orders[1]:.3f} "
             f"(in [1.9, 2.1]), {elapsed:.1f} s (< 120 s)")


def test_criterion_4_preconditioner_benefit():
    start = time.perf_counter()
    case = bench.build_cross(k_n=16)
    op = ddm.build_schur_operator(case.composite)
    f = bench.rhs_fields(case)
    f_prime = f[op.coupled_id].values.copy()
    for nb in op.neighbors:
        f_prime -= nb.to_center.apply(
            rectsolver.solve_rect(nb.plan, f[nb.plan.subdomain.id]).values)
    rhs = GridField(op.coupled_id, f_prime)
    counts = {}
    for mode in ("fft", "identity"):
        cfg = krylov.GmresConfig(m=80, tol=1e-7, max_restarts=25,
                                 preconditioner=mode)
        try:
            _, rep = krylov.solve_coupled(op, rhs, cfg)
            counts[mode] = rep.iterations
        except ConvergenceError as exc:
            counts[mode] = exc.report.iterations  # cap reached
    elapsed = time.perf_counter() - start
    ok = counts["fft"] <= counts["identity"] / 7.0 and elapsed < 60.0
    _verdict("criterion 4 (preconditioner benefit)", ok,
             f"fft {counts['fft']} vs identity {counts['identity']} "
             f"iterations (ratio {counts['identity'] / counts['fft']:.1f}, "
             f"needs >= 7), {elapsed:.1f} s (< 60 s)")


def test_criterion_5_iteration_scaling():
    start = time.perf_counter()
    kns = [8, 16, 32, 64, 128]
    rows = bench.run_scaling(kns, tol_list=(1e-7,), m=80)
    elapsed = time.perf_counter() - start
    expo = rows[0]["fitted_exponent"]
    ok = 0.3 <= expo <= 0.7 and elapsed < 600.0
    iters = {r["k_n"]: r["iterations"] for r in rows}
    _verdict("criterion 5 (iteration scaling)", ok,
             f"fitted exponent {expo:.3f} (in [0.3, 0.7]), iterations "
             f"{iters}, {elapsed:.1f} s (< 600 s)")


def test_criterion_6_per_iteration_cost():
    # loose tolerance keeps the run short without changing the per-iteration
    # cost being measured
    kns = [32, 64, 128, 256]
    rows = bench.run_timing(kns, tol=1e-5, repeats=3)
    t = np.array([r["seconds_per_iteration"] for r in rows])
    model = np.array([k * k * np.log(k) for k in kns], dtype=float)
    c = np.exp(np.mean(np.log(t / model)))
    ratios = t / (c * model)
    ok = ratios.max() <= 2.0 and ratios.min() >= 0.5
    _verdict("criterion 6 (per-iteration cost model)", ok,
             "time / (c k^2 log k) ratios "
             + ", ".join(f"{r:.2f}" for r in ratios)
             + " (within [0.5, 2.0])")


def test_criterion_7_property_suites():
    rng = np.random.default_rng(7)
    details = []
    ok = True

    # GMRES residual monotonicity within a restart cycle
    A = rng.standard_normal((30, 30)) + 5 * np.eye(30)
    b = rng.standard_normal(30)
    _, rep = krylov.gmres(lambda v: A @ v, b,
                          cfg=krylov.GmresConfig(m=30, tol=1e-12))
    mono = bool(np.all(np.diff(rep.residual_history) <= 1e-12))
    ok &= mono
    details.append(f"gmres monotone={mono}")

    # coupling transpose symmetry on the cross
    comp = bench.build_cross(k_n=2).composite
    worst = 0.0
    for iface in comp.interfaces:
        a, bside = iface.side_a[0], iface.side_b[0]
        fwd = ddm.make_coupling(comp, iface, a)
        bwd = ddm.make_coupling(comp, iface, bside)
        u = rng.standard_normal(comp.subdomain(a).size)
        v = rng.standard_normal(comp.subdomain(bside).size)
        worst = max(worst, abs(np.dot(fwd.apply(u), v)
                               - np.dot(u, bwd.apply(v))))
    ok &= worst <= 1e-12
    details.append(f"R transpose symmetry {worst:.2e}")

    # linearity of the rectangle solver
    plan = rectsolver.plan_rect(make_rect(7, 6, "NN", "DD"))
    f = rng.standard_normal(42)
    g = rng.standard_normal(42)
    lhs = rectsolver.solve_rect(plan, 2.0 * f - 0.5 * g).values
    rhs = 2.0 * rectsolver.solve_rect(plan, f).values \
        - 0.5 * rectsolver.solve_rect(plan, g).values
    lin = np.abs(lhs - rhs).max() / max(np.abs(rhs).max(), 1.0)
    ok &= lin <= 1e-11
    details.append(f"solve_rect linearity {lin:.2e}")

    # manufactured-solution boundary residuals on all boundary faces
    case = bench.build_cross(k_n=8)
    L = case.L
    worst_bc = 0.0
    ts = np.linspace(0.0, 1.0, 4 * case.k_n + 1)
    dirichlet_faces = [
        (np.zeros_like(ts), 2 * L + 4 * L * ts),
        (np.full_like(ts, 7 * L), 2 * L + 4 * L * ts),
        (L + 2 * L * ts, np.zeros_like(ts)),
        (L + 2 * L * ts, np.full_like(ts, 7 * L)),
    ]
    for xs, ys in dirichlet_faces:
        worst_bc = max(worst_bc, np.abs(
            bench.manufactured_solution(case, xs, ys)).max())
    for x in (L, 3 * L):
        for lo, hi in ((0.0, 2 * L), (6 * L, 7 * L)):
            ys = lo + (hi - lo) * ts
            dpdx = bench._psi_x_prime(case, x) \
                * np.cos(bench._psi_x(case, x)) \
                * np.sin(bench._psi_y(case, ys))
            worst_bc = max(worst_bc, np.abs(dpdx).max())
    for y in (2 * L, 6 * L):
        for lo, hi in ((0.0, L), (3 * L, 7 * L)):
            xs = lo + (hi - lo) * ts
            dpdy = bench._psi_y_prime(case, y) \
                * np.cos(bench._psi_y(case, y)) \
                * np.sin(bench._psi_x(case, xs))
            worst_bc = max(worst_bc, np.abs(dpdy).max())
    ok &= worst_bc <= 1e-10
    details.append(f"BC residuals {worst_bc:.2e}")

    _verdict("criterion 7 (property suites)", bool(ok), "; ".join(details))
