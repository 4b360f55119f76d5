"""Schur-complement domain decomposition over a composite of rectangles.

One "coupled" subdomain (the center) talks to any number of "independent"
neighbors through interface coupling maps R.  Eliminating the neighbors
gives a system on the center alone,

    (A_c - sum_i R_{c,i} A_i^{-1} R_{i,c}) p_c = f_c - sum_i R_{c,i} q_i,

with A_i q_i = f_i.  Every A^{-1} application is one FFT rectangle solve,
so the Schur operator is applied matrix-free.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .geometry import CompositeDomain, GridField, Interface, RectSubdomain, line_indices
from .rectsolver import RectPlan, apply_rect_operator, plan_rect, solve_rect
from . import krylov


@dataclass(frozen=True)
class CouplingMap:
    """Sparse interface map R taking a field on from_id into rows on to_id.

    from_idx[k] and to_idx[k] are paired flat node indices on the two
    adjacent node lines; every carried weight is the same `coupling`.
    """

    interface: Interface
    from_id: int
    to_id: int
    from_size: int
    to_size: int
    from_idx: np.ndarray
    to_idx: np.ndarray
    coupling: float

    def apply(self, values: np.ndarray) -> np.ndarray:
        if values.shape != (self.from_size,):
            raise ValidationError(
                f"field length {values.shape} does not match subdomain "
                f"{self.from_id} (size {self.from_size})")
        out = np.zeros(self.to_size)
        out[self.to_idx] = self.coupling * values[self.from_idx]
        return out


def make_coupling(comp: CompositeDomain, iface: Interface,
                  from_id: int) -> CouplingMap:
    """Coupling map across `iface` leaving the subdomain `from_id`."""
    to_id = iface.other_side(from_id)[0]
    sub_f = comp.subdomain(from_id)
    sub_t = comp.subdomain(to_id)
    perm = np.asarray(iface.index_map)
    if iface.side_a[0] == from_id:
        from_line = line_indices(sub_f, iface.side_a[1])
        to_line = line_indices(sub_t, iface.side_b[1])[perm]
    else:
        from_line = line_indices(sub_f, iface.side_b[1])[perm]
        to_line = line_indices(sub_t, iface.side_a[1])
    return CouplingMap(interface=iface, from_id=from_id, to_id=to_id,
                       from_size=sub_f.size, to_size=sub_t.size,
                       from_idx=from_line, to_idx=to_line,
                       coupling=iface.coupling)


def apply_R(cmap: CouplingMap, v: GridField) -> GridField:
    """R v: nonzeros only on the node line adjacent to the interface."""
    if v.subdomain_id != cmap.from_id:
        raise ValidationError(
            f"field lives on subdomain {v.subdomain_id}, coupling expects "
            f"{cmap.from_id}")
    return GridField(cmap.to_id, cmap.apply(np.asarray(v.values, dtype=float)))


@dataclass(frozen=True)
class _Neighbor:
    plan: RectPlan
    to_center: CouplingMap      # R_{c,i}: neighbor line -> center rows
    from_center: CouplingMap    # R_{i,c}: center line -> neighbor rows


# below this many center nodes the thread-pool handoff costs more than
# the neighbor solves it hides
_PARALLEL_MIN_NODES = 16_384


@dataclass(frozen=True)
class SchurOperator:
    """Matrix-free (A_c - sum S) on the coupled subdomain, FFT-backed."""

    coupled_id: int
    center: RectSubdomain
    center_plan: RectPlan
    neighbors: tuple = field(default_factory=tuple)
    pool: ThreadPoolExecutor | None = None

    @property
    def size(self) -> int:
        return self.center.size

    def _neighbor_term(self, nb: _Neighbor, p: np.ndarray) -> np.ndarray:
        q = solve_rect(nb.plan, nb.from_center.apply(p))
        return nb.to_center.apply(q.values)

    def schur(self, p: np.ndarray) -> np.ndarray:
        """sum_i R_{c,i} A_i^{-1} R_{i,c} p; one FFT solve per neighbor."""
        p = np.asarray(p, dtype=float)
        if self.pool is not None and len(self.neighbors) > 1:
            parts = list(self.pool.map(lambda nb: self._neighbor_term(nb, p),
                                       self.neighbors))
        else:
            parts = [self._neighbor_term(nb, p) for nb in self.neighbors]
        out = np.zeros(self.size)
        for part in parts:
            out += part
        return out

    def center_solve(self, rhs: np.ndarray) -> np.ndarray:
        return solve_rect(self.center_plan, np.asarray(rhs, dtype=float)).values

    def unpreconditioned(self, p: np.ndarray) -> np.ndarray:
        """(A_c - sum S) p."""
        p = np.asarray(p, dtype=float)
        return apply_rect_operator(self.center, p) - self.schur(p)

    def preconditioned(self, p: np.ndarray) -> np.ndarray:
        """(I - A_c^{-1} sum S) p."""
        p = np.asarray(p, dtype=float)
        return p - self.center_solve(self.schur(p))


def apply_schur(op: SchurOperator, p: GridField) -> GridField:
    if p.subdomain_id != op.coupled_id:
        raise ValidationError("field is not on the coupled subdomain")
    return GridField(op.coupled_id, op.schur(np.asarray(p.values, dtype=float)))


def apply_preconditioned_operator(op: SchurOperator, p: GridField) -> GridField:
    if p.subdomain_id != op.coupled_id:
        raise ValidationError("field is not on the coupled subdomain")
    return GridField(op.coupled_id,
                     op.preconditioned(np.asarray(p.values, dtype=float)))


def solver_threads() -> int:
    """Worker count from SOLVER_THREADS (default: hardware concurrency)."""
    raw = os.environ.get("SOLVER_THREADS", "")
    if not raw.strip():
        return os.cpu_count() or 1
    try:
        count = int(raw)
    except ValueError:
        raise ValidationError(f"SOLVER_THREADS must be an integer, got {raw!r}")
    if count < 1:
        raise ValidationError(f"SOLVER_THREADS must be positive, got {count}")
    return count


def designate_center(comp: CompositeDomain) -> int:
    """Pick the coupled subdomain: the unique one with >= 2 interfaces.

    When every subdomain has a single interface (two-rectangle case) the
    lowest id is promoted so the star layout still applies.
    """
    coupled = sorted(comp.coupled_ids)
    if len(coupled) > 1:
        raise ValidationError(f"more than one coupled subdomain: {coupled}")
    if coupled:
        return coupled[0]
    if not comp.interfaces:
        raise ValidationError("composite has no interfaces")
    return min(s.id for s in comp.subdomains)


def build_schur_operator(comp: CompositeDomain, coupled_id: int | None = None,
                         threads: int | None = None) -> SchurOperator:
    if coupled_id is None:
        coupled_id = designate_center(comp)
    center = comp.subdomain(coupled_id)
    neighbors = []
    for iface in comp.interfaces_of(coupled_id):
        other = iface.other_side(coupled_id)[0]
        neighbors.append(_Neighbor(
            plan=plan_rect(comp.subdomain(other)),
            to_center=make_coupling(comp, iface, other),
            from_center=make_coupling(comp, iface, coupled_id)))
    if threads is None:
        threads = solver_threads()
    pool = None
    if threads > 1 and len(neighbors) > 1 and center.size >= _PARALLEL_MIN_NODES:
        pool = ThreadPoolExecutor(max_workers=min(threads, len(neighbors)))
    return SchurOperator(coupled_id=coupled_id, center=center,
                         center_plan=plan_rect(center),
                         neighbors=tuple(neighbors), pool=pool)


def _map_over(pool, fn, items):
    if pool is None:
        return [fn(it) for it in items]
    return list(pool.map(fn, items))


def ddm_solve(comp: CompositeDomain, f, gmres_cfg=None,
              coupled_id: int | None = None):
    """Solve the composite system; returns ({id: GridField}, SolveReport).

    `f` maps subdomain id to a GridField (or flat array) of right-hand
    sides.  Single-rectangle composites bypass the Schur machinery.
    """
    from .geometry import validate
    validate(comp).require()
    if gmres_cfg is None:
        gmres_cfg = krylov.GmresConfig()

    rhs = {}
    for sub in comp.subdomains:
        fi = f[sub.id]
        vals = np.asarray(fi.values if isinstance(fi, GridField) else fi,
                          dtype=float)
        if vals.shape != (sub.size,):
            raise ValidationError(
                f"rhs for subdomain {sub.id} has length {vals.size}, "
                f"expected {sub.size}")
        rhs[sub.id] = vals

    if not comp.interfaces:
        (sub,) = comp.subdomains
        p = solve_rect(plan_rect(sub), rhs[sub.id])
        report = krylov.SolveReport(converged=True, iterations=0,
                                    residual_history=np.zeros(1),
                                    wall_time=0.0)
        return {sub.id: p}, report

    threads = solver_threads()
    op = build_schur_operator(comp, coupled_id=coupled_id, threads=threads)
    arms = [nb for nb in op.neighbors]
    big = sum(nb.plan.subdomain.size for nb in arms) >= _PARALLEL_MIN_NODES
    pool = ThreadPoolExecutor(max_workers=min(threads, len(arms))) \
        if threads > 1 and len(arms) > 1 and big else None
    try:
        # independent pre-solves: A_i q_i = f_i
        qs = _map_over(pool, lambda nb: solve_rect(
            nb.plan, rhs[nb.plan.subdomain.id]).values, arms)

        f_prime = rhs[op.coupled_id].copy()
        for nb, q in zip(arms, qs):
            f_prime -= nb.to_center.apply(q)

        p_c, report = krylov.solve_coupled(
            op, GridField(op.coupled_id, f_prime), gmres_cfg)

        # back-substitution: p_i = q_i - A_i^{-1} R_{i,c} p_c
        corr = _map_over(pool, lambda nb: solve_rect(
            nb.plan, nb.from_center.apply(p_c.values)).values, arms)
    finally:
        if pool is not None:
            pool.shutdown()

    fields = {op.coupled_id: p_c}
    for nb, q, c in zip(arms, qs, corr):
        sid = nb.plan.subdomain.id
        fields[sid] = GridField(sid, q - c)
    return fields, report
