"""Command-line benchmark driver.

Subcommands:
  solve             one cross solve, field + report CSVs
  convergence       grid-refinement error study
  precond-compare   GMRES iteration counts per preconditioner
  scaling           iteration growth and per-iteration timing vs k_n
  oracle-check      dense-equivalence suite at desk scale

All outputs are CSV; exit code 0 on success, nonzero with a single
machine-readable JSON error line on stderr otherwise.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bench, ddm, krylov, oracle
from .errors import FftDdmError


def _ints(text: str):
    return [int(t) for t in text.split(",") if t]


def _floats(text: str):
    return [float(t) for t in text.split(",") if t]


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _add_common(p):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--kappa", type=float, default=0.0,
                   help="Helmholtz shift added to the operator diagonal")
    p.add_argument("--paper-literal-constants", action="store_true",
                   help="use the originally published phase constants "
                        "(these violate the outer Dirichlet data)")


def cmd_solve(args) -> int:
    if args.case != "cross":
        raise FftDdmError(f"unknown case {args.case!r}")
    case = bench.build_cross(k_n=args.kn, kappa=args.kappa,
                             paper_literal=args.paper_literal_constants)
    cfg = krylov.GmresConfig(m=args.m, tol=args.tol)
    fields, report = bench.solve_case(case, cfg)
    bench.emit_field(case, fields, _out_path(args, "solution.csv"))
    linf, l2 = bench.error_norms(case, fields)
    bench.emit_csv([{
        "k_n": args.kn, "m": args.m, "tol": args.tol,
        "iterations": report.iterations, "converged": report.converged,
        "wall_time": report.wall_time, "linf_error": linf, "l2_error": l2,
    }], _out_path(args, "report.csv"))
    bench.emit_history(report.residual_history,
                       _out_path(args, "residual_history.csv"))
    print(f"solved cross k_n={args.kn}: {report.iterations} iterations, "
          f"L-inf error {linf:.3e}")
    return 0


def cmd_convergence(args) -> int:
    rows = bench.run_convergence(
        args.kn_list, kappa=args.kappa,
        paper_literal=args.paper_literal_constants)
    bench.emit_csv(rows, _out_path(args, "convergence.csv"))
    for r in rows:
        print(f"k_n={r['k_n']:<4d} h={r['h']:.5f} "
              f"linf={r['linf_error']:.6e} order={r['observed_order']:.3f}")
    return 0


def cmd_precond_compare(args) -> int:
    rows, histories = bench.run_precond_compare(
        args.kn_list, args.m_list, tol=args.tol,
        preconditioners=tuple(args.precond.split(",")),
        max_restarts=args.max_restarts)
    for (kn, m, precond), hist in histories.items():
        bench.emit_history(
            hist, _out_path(args, f"history_kn{kn}_m{m}_{precond}.csv"))
    for row, key in zip(rows, histories):
        row["history_file"] = f"history_kn{key[0]}_m{key[1]}_{key[2]}.csv"
    bench.emit_csv(rows, _out_path(args, "precond_compare.csv"))
    for r in rows:
        flag = "" if r["converged"] else "  [cap reached]"
        print(f"k_n={r['k_n']:<4d} m={r['m']:<3d} {r['preconditioner']:<9s}"
              f" iterations={r['iterations']}{flag}")
    return 0


def cmd_scaling(args) -> int:
    rows = bench.run_scaling(args.kn_list, tol_list=args.tol_list, m=args.m)
    bench.emit_csv(rows, _out_path(args, "scaling.csv"))
    timing = bench.run_timing(args.kn_list, tol=max(args.tol_list), m=args.m)
    bench.emit_csv(timing, _out_path(args, "timing.csv"))
    for r in rows:
        print(f"tol={r['tol']:g} k_n={r['k_n']:<4d} "
              f"iterations={r['iterations']} exponent={r['fitted_exponent']:.3f}")
    for r in timing:
        print(f"k_n={r['k_n']:<4d} sec/iteration="
              f"{r['seconds_per_iteration']:.6f}")
    return 0


def cmd_oracle_check(args) -> int:
    """Pit the FFT solver stack against dense assemblies at one k_n."""
    rng = np.random.default_rng(20250823)
    case = bench.build_cross(k_n=args.kn, kappa=args.kappa)
    comp = case.composite
    failures = []

    def check(name, err, tol):
        status = "pass" if err <= tol else "FAIL"
        print(f"{status}  {name}: error {err:.3e} (tolerance {tol:g})")
        if err > tol:
            failures.append(name)

    op = ddm.build_schur_operator(comp)
    cid = op.coupled_id
    A2 = oracle.assemble_rect_matrix(comp.subdomain(cid))
    S = np.zeros_like(A2)
    for iface in comp.interfaces_of(cid):
        oid = iface.other_side(cid)[0]
        Rci = oracle.assemble_coupling_matrix(comp, oid, cid)
        Ric = oracle.assemble_coupling_matrix(comp, cid, oid)
        Ai = oracle.assemble_rect_matrix(comp.subdomain(oid))
        S += Rci @ np.linalg.solve(Ai, Ric)
    Nc = A2.shape[0]
    eye = np.eye(Nc)
    Sn = np.column_stack([op.schur(eye[:, j]) for j in range(Nc)])
    check("schur operator vs dense", float(np.abs(Sn - S).max()), 1e-9)
    Pn = np.column_stack([op.preconditioned(eye[:, j]) for j in range(Nc)])
    check("preconditioned operator vs dense",
          float(np.abs(Pn - np.eye(Nc) + np.linalg.solve(A2, S)).max()), 1e-9)
    check("probed diagonal vs dense",
          float(np.abs(krylov.jacobi_diagonal(op) - np.diag(A2 - S)).max()),
          1e-10)

    G = oracle.assemble_global_matrix(comp)
    offs = oracle.global_offsets(comp)
    worst = 0.0
    for _ in range(10):
        fvec = rng.standard_normal(G.shape[0])
        f = {sid: fvec[a:b] for sid, (a, b) in offs.items()}
        fields, _ = ddm.ddm_solve(comp, f, krylov.GmresConfig(tol=1e-12))
        x = oracle.dense_lu_solve(G, fvec)
        got = np.concatenate([fields[s.id].values for s in comp.subdomains])
        worst = max(worst, float(np.abs(got - x).max() / np.abs(x).max()))
    check("composite solve vs dense LU (10 random RHS)", worst, 1e-8)

    if failures:
        raise FftDdmError("oracle check failed: " + ", ".join(failures))
    print(f"oracle check passed at k_n={args.kn}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fftddm",
        description="FFT-accelerated domain-decomposition benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve the cross benchmark once")
    p.add_argument("--case", default="cross")
    p.add_argument("--kn", type=int, required=True)
    p.add_argument("--m", type=int, default=80)
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("convergence", help="grid-refinement study")
    p.add_argument("--kn-list", type=_ints, default=[4, 8, 16, 32, 64])
    _add_common(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("precond-compare",
                       help="GMRES iterations per preconditioner")
    p.add_argument("--kn-list", type=_ints, default=[8, 16])
    p.add_argument("--m-list", type=_ints, default=[80])
    p.add_argument("--precond", default="fft,jacobi,identity")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-restarts", type=int, default=40)
    _add_common(p)
    p.set_defaults(func=cmd_precond_compare)

    p = sub.add_parser("scaling", help="iteration and timing scaling study")
    p.add_argument("--kn-list", type=_ints, default=[8, 16, 32, 64, 128])
    p.add_argument("--tol-list", type=_floats, default=[1e-7, 1e-10])
    p.add_argument("--m", type=int, default=80)
    _add_common(p)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("oracle-check",
                       help="dense-equivalence suite (desk scale)")
    p.add_argument("--kn", type=int, default=2)
    _add_common(p)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FftDdmError, OSError, ValueError) as exc:
        line = json.dumps({"error": {"type": type(exc).__name__,
                                     "message": str(exc)}})
        print(line, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
