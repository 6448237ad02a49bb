"""Exact in-house solver: bounded-variable primal simplex plus branch-and-bound.

The simplex works on a dense tableau over the standardized problem
(inequalities get slack columns, equalities get fixed slacks, feasibility is
established in a first phase with artificial columns).  Branch-and-bound
uses best-bound node selection and most-fractional branching, both with
deterministic tie-breaking, so identical inputs give identical results and
node counts.
"""

from __future__ import annotations

import enum
import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .model import EQ, GE, LE, MilpProblem

_PIV_TOL = 1e-9        # minimum pivot magnitude
_DJ_TOL = 1e-9         # reduced-cost optimality threshold
_FEAS_TOL = 1e-7       # feasibility verification tolerance (scaled)
_INT_TOL = 1e-6        # integrality tolerance
_STALL_LIMIT = 1000    # degenerate steps before switching to Bland's rule
_REFRESH_EVERY = 500   # iterations between refactorizations

_AT_LB, _AT_UB, _BASIC, _FREE = 0, 1, 2, 3


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class MilpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    x: np.ndarray | None
    objective: float | None
    iterations: int


@dataclass(frozen=True)
class MilpResult:
    status: MilpStatus
    values: np.ndarray | None
    objective: float | None
    best_bound: float | None
    node_count: int
    wall_time: float


class _Numerical(Exception):
    """Internal: the tableau degraded; caller retries with the fallback."""


class _StandardForm:
    """Equality-form copy of a problem, reusable across bound overrides.

    Rows are scaled by their largest coefficient; >= rows are negated to <=;
    every row gets a slack column (free slack for inequalities, fixed-at-zero
    slack for equalities).
    """

    def __init__(self, problem: MilpProblem):
        m, n = problem.n_rows, problem.n_vars
        A = np.array(problem.A, dtype=np.float64)
        b = np.array(problem.rhs, dtype=np.float64)
        for r, sense in enumerate(problem.senses):
            if sense == GE:
                A[r] = -A[r]
                b[r] = -b[r]
        scale = np.maximum(np.abs(A).max(axis=1), 1e-30) if m else np.ones(0)
        scale = np.where(scale < 1e-12, 1.0, scale)
        A /= scale[:, None]
        b /= scale
        self.A = np.hstack([A, np.eye(m)]) if m else np.zeros((0, n))
        self.b = b
        self.n_struct = n
        self.m = m
        self.slack_lb = np.zeros(m)
        self.slack_ub = np.array(
            [0.0 if sense == EQ else np.inf for sense in problem.senses])
        self.c = np.concatenate([problem.c.astype(np.float64), np.zeros(m)])
        self.offset = float(problem.offset)

    def solve(self, lb: np.ndarray, ub: np.ndarray,
              c: np.ndarray | None = None) -> LpResult:
        """Solve with the given structural bounds (and optional objective)."""
        cost = self.c if c is None else np.concatenate([c, np.zeros(self.m)])
        try:
            return self._attempt(lb, ub, cost, bland=False, perturb=False)
        except _Numerical:
            pass
        try:
            return self._attempt(lb, ub, cost, bland=True, perturb=True)
        except _Numerical as exc:
            raise SolverError(f"simplex failed even with the perturbed Bland fallback: {exc}")

    def _attempt(self, lb_struct, ub_struct, cost, *, bland: bool, perturb: bool) -> LpResult:
        lb = np.concatenate([lb_struct, self.slack_lb])
        ub = np.concatenate([ub_struct, self.slack_ub])
        b = self.b.copy()
        if perturb and self.m:
            b = b + 1e-10 * (1.0 + np.abs(b)) * np.linspace(1.0, 2.0, self.m)
        sx = _Simplex(self.A, b, cost, lb, ub, self.n_struct, bland=bland)
        status, iters = sx.run()
        if status is LpStatus.INFEASIBLE:
            return LpResult(LpStatus.INFEASIBLE, None, None, iters)
        if status is LpStatus.UNBOUNDED:
            return LpResult(LpStatus.UNBOUNDED, None, None, iters)
        xval = sx.polished_values(self.b)
        self._verify(xval, lb, ub)
        x = xval[: self.n_struct].copy()
        obj = float(cost @ xval[: cost.shape[0]] + self.offset)
        return LpResult(LpStatus.OPTIMAL, x, obj, iters)

    def _verify(self, xval, lb, ub) -> None:
        ncols = lb.shape[0]
        tol = _FEAS_TOL
        if np.any(xval[:ncols] < lb - tol * (1.0 + np.abs(lb))) or np.any(
                xval[:ncols] > ub + tol * np.where(np.isfinite(ub), 1.0 + np.abs(ub), 1.0)):
            raise _Numerical("bound violation at claimed optimum")
        if self.m:
            resid = self.A @ xval[: self.A.shape[1]] - self.b
            if np.any(np.abs(resid) > tol * (1.0 + np.abs(self.b))):
                raise _Numerical("row violation at claimed optimum")


class _Simplex:
    """One bounded-variable primal simplex run (two phases, dense tableau)."""

    def __init__(self, A, b, cost, lb, ub, n_struct, *, bland: bool):
        self.m, n0 = A.shape
        self.n0 = n0
        self.n_struct = n_struct
        self.b = b
        self.lb = lb
        self.ub = ub
        self.cost = cost
        self.bland = bland
        self.iters = 0
        self.stall = 0

        vstat = np.where(np.isfinite(lb), _AT_LB,
                         np.where(np.isfinite(ub), _AT_UB, _FREE)).astype(np.int8)
        xval = np.where(vstat == _AT_LB, np.where(np.isfinite(lb), lb, 0.0),
                        np.where(vstat == _AT_UB, np.where(np.isfinite(ub), ub, 0.0), 0.0))
        if self.m:
            slack_cols = np.arange(n0 - self.m, n0)
            sval = b - A[:, : n0 - self.m] @ xval[: n0 - self.m]
            clipped = np.clip(sval, lb[slack_cols], ub[slack_cols])
            viol = sval - clipped
            art_rows = np.nonzero(np.abs(viol) > 1e-11 * (1.0 + np.abs(b)))[0]
        else:
            slack_cols = np.arange(0)
            art_rows = np.arange(0)
            viol = np.zeros(0)
            clipped = np.zeros(0)

        self.n_art = art_rows.shape[0]
        if self.n_art:
            art_block = np.zeros((self.m, self.n_art))
            signs = np.sign(viol[art_rows])
            art_block[art_rows, np.arange(self.n_art)] = signs
            self.A = np.hstack([A, art_block])
            self.lb = np.concatenate([lb, np.zeros(self.n_art)])
            self.ub = np.concatenate([ub, np.full(self.n_art, np.inf)])
            vstat = np.concatenate([vstat, np.full(self.n_art, _AT_LB, dtype=np.int8)])
            xval = np.concatenate([xval, np.zeros(self.n_art)])
        else:
            self.A = A
        self.ncols = self.A.shape[1]
        self.vstat = vstat
        self.xval = xval

        basis = slack_cols.copy()
        if self.m:
            self.xval[slack_cols] = clipped
            for pos, r in enumerate(art_rows):
                art_col = n0 + pos
                basis[r] = art_col
                self.xval[art_col] = abs(viol[r])
                self.vstat[slack_cols[r]] = _AT_LB if clipped[r] <= (lb[slack_cols[r]] +
                                                                     1e-30) else _AT_UB
        self.basis = basis
        self.vstat[basis] = _BASIC
        self.beta = self.xval[basis].copy()
        # initial basis is diagonal +-1: invert by row sign flips
        diag = np.ones(self.m)
        if self.n_art:
            diag[art_rows] = np.sign(viol[art_rows])
        self.T = self.A * (1.0 / diag)[:, None] if self.m else self.A.copy()
        self.d = np.zeros(self.ncols)

    # -- public ------------------------------------------------------------

    def run(self) -> tuple[LpStatus, int]:
        max_iter = 5000 + 50 * self.m + 2 * self.ncols
        if self.n_art:
            c1 = np.zeros(self.ncols)
            c1[self.n0:] = 1.0
            status = self._optimize(c1, max_iter, phase_one=True)
            if status is not LpStatus.OPTIMAL:
                raise _Numerical("phase one did not converge")
            infeas = float(c1 @ self.xval)
            if infeas > _FEAS_TOL * (1.0 + float(np.abs(self.b).max(initial=0.0))):
                return LpStatus.INFEASIBLE, self.iters
            self._expel_artificials()
            self.ub[self.n0:] = 0.0
        cost = np.zeros(self.ncols)
        cost[: self.cost.shape[0]] = self.cost
        status = self._optimize(cost, max_iter, phase_one=False)
        return status, self.iters

    def polished_values(self, b_orig: np.ndarray) -> np.ndarray:
        """Recompute basic values from the original data for full accuracy."""
        if not self.m:
            return self.xval.copy()
        nonbasic = np.setdiff1d(np.arange(self.ncols), self.basis, assume_unique=False)
        B = self.A[:, self.basis]
        rhs = b_orig - self.A[:, nonbasic] @ self.xval[nonbasic]
        try:
            beta = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError as exc:
            raise _Numerical(f"singular final basis: {exc}")
        out = self.xval.copy()
        out[self.basis] = beta
        return out

    # -- internals ----------------------------------------------------------

    def _refresh(self, cost: np.ndarray) -> None:
        B = self.A[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.A)
        except np.linalg.LinAlgError as exc:
            raise _Numerical(f"singular basis during refresh: {exc}")
        nonbasic_mask = np.ones(self.ncols, dtype=bool)
        nonbasic_mask[self.basis] = False
        rhs = self.b - self.A[:, nonbasic_mask] @ self.xval[nonbasic_mask]
        self.beta = np.linalg.solve(B, rhs)
        self.xval[self.basis] = self.beta
        self.d = cost - cost[self.basis] @ self.T

    def _entering(self, bland: bool) -> int | None:
        d = self.d
        movable = (self.ub - self.lb) > 0.0
        open_lb = (self.vstat == _AT_LB) & movable & (d < -_DJ_TOL)
        open_ub = (self.vstat == _AT_UB) & movable & (d > _DJ_TOL)
        open_free = (self.vstat == _FREE) & (np.abs(d) > _DJ_TOL)
        eligible = open_lb | open_ub | open_free
        if not np.any(eligible):
            return None
        if bland:
            return int(np.nonzero(eligible)[0][0])
        score = np.where(eligible, np.abs(d), -np.inf)
        return int(np.argmax(score))

    def _optimize(self, cost: np.ndarray, max_iter: int, *, phase_one: bool) -> LpStatus:
        self._refresh(cost)
        bland = self.bland
        confirms = 0
        while True:
            if self.iters > max_iter:
                raise _Numerical("iteration limit exceeded")
            j = self._entering(bland)
            if j is None:
                # confirm against freshly recomputed reduced costs
                self._refresh(cost)
                j = self._entering(bland)
                if j is None:
                    return LpStatus.OPTIMAL
                confirms += 1
                if confirms > 5:
                    raise _Numerical("reduced costs will not settle")
            self.iters += 1
            if self.iters % _REFRESH_EVERY == 0:
                self._refresh(cost)
            direction = 1.0
            if self.vstat[j] == _AT_UB or (self.vstat[j] == _FREE and self.d[j] > 0):
                direction = -1.0
            w = self.T[:, j]
            dw = direction * w
            if self.m:
                lbB = self.lb[self.basis]
                ubB = self.ub[self.basis]
                with np.errstate(divide="ignore", invalid="ignore"):
                    t_rows = np.full(self.m, np.inf)
                    pos = dw > _PIV_TOL
                    t_rows[pos] = (self.beta[pos] - lbB[pos]) / dw[pos]
                    neg = dw < -_PIV_TOL
                    t_rows[neg] = (self.beta[neg] - ubB[neg]) / dw[neg]
                t_rows = np.where(np.isnan(t_rows), np.inf, t_rows)
                t_block = float(t_rows.min()) if self.m else np.inf
            else:
                t_rows = np.zeros(0)
                t_block = np.inf
            span = self.ub[j] - self.lb[j]
            t_own = float(span) if np.isfinite(span) else np.inf

            if t_block == np.inf and t_own == np.inf:
                if phase_one:
                    raise _Numerical("phase one claims an unbounded ray")
                return LpStatus.UNBOUNDED

            if t_own <= t_block:
                step = max(t_own, 0.0)
                self.beta -= step * dw
                self.xval[self.basis] = self.beta
                self.xval[j] = self.ub[j] if direction > 0 else self.lb[j]
                self.vstat[j] = _AT_UB if direction > 0 else _AT_LB
                self._count_stall(step, cost)
                continue

            tie = t_block + 1e-10 * (1.0 + abs(t_block))
            cand = np.nonzero(t_rows <= tie)[0]
            r = int(cand[np.argmin(self.basis[cand])])
            step = max(t_block, 0.0)

            leaving = int(self.basis[r])
            hits_lb = dw[r] > 0
            self.beta -= step * dw
            entering_val = self.xval[j] + direction * step
            self.xval[self.basis] = self.beta
            self.xval[leaving] = self.lb[leaving] if hits_lb else self.ub[leaving]
            self.vstat[leaving] = _AT_LB if hits_lb else _AT_UB
            self.xval[j] = entering_val
            self.vstat[j] = _BASIC
            self.basis[r] = j
            self.beta[r] = entering_val

            col = self.T[:, j].copy()
            piv = col[r]
            if abs(piv) < _PIV_TOL:
                raise _Numerical("vanishing pivot element")
            self.T[r, :] /= piv
            col[r] = 0.0
            self.T -= np.outer(col, self.T[r, :])
            dj = self.d[j]
            self.d -= dj * self.T[r, :]
            self._count_stall(step, cost)

    def _count_stall(self, step: float, cost: np.ndarray) -> None:
        if step <= 1e-12:
            self.stall += 1
            if self.stall >= _STALL_LIMIT and not self.bland:
                self.bland = True
        else:
            self.stall = 0

    def _expel_artificials(self) -> None:
        """Pivot zero-level artificial columns out of the basis when possible."""
        for r in range(self.m):
            if self.basis[r] < self.n0:
                continue
            row = self.T[r, :]
            cand = [jj for jj in range(self.n0)
                    if self.vstat[jj] != _BASIC and abs(row[jj]) > 1e-7
                    and (self.ub[jj] - self.lb[jj]) > 0]
            if not cand:
                continue  # redundant row; artificial stays basic at zero
            j = cand[0]
            leaving = int(self.basis[r])
            self.vstat[leaving] = _AT_LB
            self.xval[leaving] = 0.0
            entering_val = self.xval[j]
            self.vstat[j] = _BASIC
            self.basis[r] = j
            self.beta[r] = entering_val
            col = self.T[:, j].copy()
            piv = col[r]
            self.T[r, :] /= piv
            col[r] = 0.0
            self.T -= np.outer(col, self.T[r, :])
            dj = self.d[j]
            self.d -= dj * self.T[r, :]


def solve_lp(problem: MilpProblem) -> LpResult:
    """Solve the LP relaxation (integrality marks are ignored).

    Returns an optimal basic solution, or a correct infeasible/unbounded
    verdict.  Deterministic for identical inputs; a perturbed Bland-rule
    rerun is attempted automatically on numerical trouble.
    """
    std = _StandardForm(problem)
    return std.solve(problem.lb.astype(np.float64), problem.ub.astype(np.float64))


def _is_integral(x: np.ndarray, int_idx: np.ndarray) -> bool:
    if int_idx.size == 0:
        return True
    v = x[int_idx]
    return bool(np.all(np.abs(v - np.round(v)) <= _INT_TOL))


def _most_fractional(x: np.ndarray, int_idx: np.ndarray) -> int | None:
    v = x[int_idx]
    frac = np.abs(v - np.round(v))
    if np.all(frac <= _INT_TOL):
        return None
    score = np.minimum(v - np.floor(v), np.ceil(v) - v)
    score[frac <= _INT_TOL] = -1.0
    return int(int_idx[int(np.argmax(score))])


def solve_milp(problem: MilpProblem, *, time_limit: float | None = None,
               node_limit: int | None = None, dive: bool = True) -> MilpResult:
    """Best-bound branch-and-bound over the problem's integrality marks.

    Branches on the most fractional variable (ties to the lowest index) by
    splitting its bounds at floor/ceil.  An optional root dive fixes
    fractional variables to their nearest integers to seed the incumbent.
    Node counts include every LP actually solved, so identical inputs give
    identical results and counts.
    """
    t0 = time.perf_counter()
    std = _StandardForm(problem)
    int_idx = np.nonzero(np.asarray(problem.integer, dtype=bool))[0]
    lb0 = problem.lb.astype(np.float64).copy()
    ub0 = problem.ub.astype(np.float64).copy()

    nodes = 0
    incumbent_x: np.ndarray | None = None
    incumbent_obj = np.inf

    def out_of_budget() -> bool:
        if node_limit is not None and nodes >= node_limit:
            return True
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            return True
        return False

    root = std.solve(lb0, ub0)
    nodes += 1
    if root.status is LpStatus.INFEASIBLE:
        return MilpResult(MilpStatus.INFEASIBLE, None, None, None, nodes,
                          time.perf_counter() - t0)
    if root.status is LpStatus.UNBOUNDED:
        raise SolverError("the relaxation is unbounded; integer search cannot start")

    if _is_integral(root.x, int_idx):
        return MilpResult(MilpStatus.OPTIMAL, root.x, root.objective, root.objective,
                          nodes, time.perf_counter() - t0)

    if dive:
        lb_d, ub_d, xd = lb0.copy(), ub0.copy(), root.x
        for _ in range(int_idx.size + 1):
            j = _most_fractional(xd, int_idx)
            if j is None:
                incumbent_x = xd
                incumbent_obj = float(problem.c @ xd + problem.offset)
                break
            pin = float(np.round(xd[j]))
            pin = min(max(pin, lb_d[j]), ub_d[j])
            lb_d[j] = ub_d[j] = pin
            res = std.solve(lb_d, ub_d)
            nodes += 1
            if res.status is not LpStatus.OPTIMAL:
                break
            xd = res.x
            if out_of_budget():
                break

    def prune_eps(val: float) -> float:
        return 1e-9 * max(1.0, abs(val))

    heap: list = []
    counter = 0
    heapq.heappush(heap, (root.objective, counter, lb0, ub0, root.x))

    while heap:
        if out_of_budget():
            open_bounds = [entry[0] for entry in heap]
            best_bound = min(open_bounds + ([incumbent_obj] if incumbent_x is not None else []))
            status = MilpStatus.TIME_LIMIT
            return MilpResult(status, incumbent_x,
                              incumbent_obj if incumbent_x is not None else None,
                              best_bound if (incumbent_x is not None or heap) else None,
                              nodes, time.perf_counter() - t0)
        bound, _, lb, ub, x = heapq.heappop(heap)
        if incumbent_x is not None and bound >= incumbent_obj - prune_eps(incumbent_obj):
            continue
        j = _most_fractional(x, int_idx)
        if j is None:   # integral nodes never enter the heap, but stay safe
            continue
        v = x[j]
        for child_lb, child_ub in (
            (lb, _set_at(ub, j, math.floor(v))),
            (_set_at(lb, j, math.ceil(v)), ub),
        ):
            res = std.solve(child_lb, child_ub)
            nodes += 1
            if res.status is not LpStatus.OPTIMAL:
                continue
            if incumbent_x is not None and res.objective >= incumbent_obj - prune_eps(incumbent_obj):
                continue
            if _is_integral(res.x, int_idx):
                if res.objective < incumbent_obj:
                    incumbent_obj = res.objective
                    incumbent_x = res.x
                continue
            counter += 1
            heapq.heappush(heap, (res.objective, counter, child_lb, child_ub, res.x))

    if incumbent_x is None:
        return MilpResult(MilpStatus.INFEASIBLE, None, None, None, nodes,
                          time.perf_counter() - t0)
    return MilpResult(MilpStatus.OPTIMAL, incumbent_x, incumbent_obj, incumbent_obj,
                      nodes, time.perf_counter() - t0)


def _set_at(arr: np.ndarray, j: int, value: float) -> np.ndarray:
    out = arr.copy()
    out[j] = value
    return out


def _var_name(tag, j: int) -> str:
    if tag is None:
        return f"v{j}"
    if isinstance(tag, str):
        return tag
    head, *rest = tag
    return f"{head}[{','.join(str(r) for r in rest)}]" if rest else str(head)


def dump_lp(problem: MilpProblem) -> str:
    """Human-readable text form of a problem, for debugging and logging."""
    names = [_var_name(tag, j) for j, tag in enumerate(problem.var_tags)]
    lines = ["minimize"]
    terms = [f"{problem.c[j]:+g} {names[j]}" for j in range(problem.n_vars) if problem.c[j]]
    if problem.offset:
        terms.append(f"{problem.offset:+g}")
    lines.append("  " + (" ".join(terms) if terms else "0"))
    lines.append("subject to")
    for r in range(problem.n_rows):
        row = problem.A[r]
        terms = [f"{row[j]:+g} {names[j]}" for j in np.nonzero(row)[0]]
        tag = problem.row_tags[r] if r < len(problem.row_tags) else f"row{r}"
        label = _var_name(tag, r)
        lines.append(f"  {label}: {' '.join(terms) if terms else '0'} {problem.senses[r]} "
                     f"{problem.rhs[r]:g}")
    lines.append("bounds")
    for j in range(problem.n_vars):
        lines.append(f"  {problem.lb[j]:g} <= {names[j]} <= {problem.ub[j]:g}")
    integers = [names[j] for j in range(problem.n_vars) if problem.integer[j]]
    lines.append("integers")
    lines.append("  " + (" ".join(integers) if integers else "(none)"))
    return "\n".join(lines) + "\n"
