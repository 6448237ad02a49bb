"""Pareto-front construction by weighted-sum and bound-constraint sweeps.

Both methods reduce the bi-objective problem to a series of single-objective
solves.  The weighted sum normalizes each cost total by its ideal-to-nadir
range so neither magnitude dominates; the bound method minimizes the first
total while capping the second at a grid of values between its ideal and
nadir levels.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InfeasibleModelError
from .instance import Instance
from .milp import MilpStatus, solve_milp
from .model import (
    LE,
    MilpProblem,
    PlanSolution,
    RelaxMode,
    assemble_milp,
    extract_plan,
    objective_vectors,
)
from .patterns import PatternSet

FRONT_CSV_COLUMNS = ("method", "control", "status", "F1", "F2",
                     "g1", "g2", "g3", "g4", "g5")


@dataclass(frozen=True)
class BiobjectiveProblem:
    """A MILP plus the two cost vectors competing over its solutions.

    ``inst``/``patterns``/``relax`` are carried along when the problem came
    from an instance, so sweep points can be unpacked into plans.
    """

    base: MilpProblem
    f1: np.ndarray
    f2: np.ndarray
    inst: Instance | None = None
    patterns: PatternSet | None = None
    relax: RelaxMode | None = None

    def value_pair(self, values: np.ndarray) -> tuple[float, float]:
        return float(self.f1 @ values), float(self.f2 @ values)

    def plan_of(self, values: np.ndarray) -> PlanSolution | None:
        if self.inst is None or self.patterns is None or self.relax is None:
            return None
        return extract_plan(self.inst, self.patterns, values, self.relax)


def biobjective_from_instance(inst: Instance, patterns: PatternSet,
                              relax: RelaxMode) -> BiobjectiveProblem:
    """Assemble the planning MILP together with its two cost vectors."""
    base = assemble_milp(inst, patterns, relax)
    f1, f2 = objective_vectors(inst, patterns)
    return BiobjectiveProblem(base=base, f1=f1, f2=f2,
                              inst=inst, patterns=patterns, relax=relax)


@dataclass(frozen=True)
class PayoffTable:
    """Ideal and nadir estimates with the two anchor solutions.

    The nadir comes from lexicographic re-optimization: each cost total is
    re-minimized subject to the other being held at its own optimum, so the
    estimate cannot exceed the true nadir of the efficient set by more than
    the tie tolerance.
    """

    z_star: np.ndarray
    z_nadir: np.ndarray
    anchor_values: tuple[np.ndarray, np.ndarray]
    anchor_plans: tuple[PlanSolution | None, PlanSolution | None]
    constant: tuple[bool, bool]

    def range_of(self, k: int) -> float:
        return float(self.z_nadir[k] - self.z_star[k])


def _lex_bound(value: float) -> float:
    return value + 1e-9 * max(1.0, abs(value))


def compute_payoff(bi: BiobjectiveProblem, *, time_limit: float | None = None,
                   node_limit: int | None = None) -> PayoffTable:
    """Ideal and nadir vectors via two lexicographic optimizations.

    Raises:
        InfeasibleModelError: the model admits no feasible point.
    """
    limits = {"time_limit": time_limit, "node_limit": node_limit}

    def opt(c_vec: np.ndarray, cap: tuple[np.ndarray, float] | None = None):
        prob = bi.base
        if cap is not None:
            prob = prob.with_extra_row(cap[0], LE, cap[1], ("lex_cap",))
        res = solve_milp(prob.with_objective(c_vec), **limits)
        if res.status is not MilpStatus.OPTIMAL:
            raise InfeasibleModelError(
                f"anchor optimization ended with status {res.status.value}")
        return res

    first = opt(bi.f1)
    f1_star = float(bi.f1 @ first.values)
    lex_f2 = opt(bi.f2, cap=(bi.f1, _lex_bound(f1_star)))
    anchor1 = lex_f2.values
    f2_at_f1 = float(bi.f2 @ anchor1)

    second = opt(bi.f2)
    f2_star = float(bi.f2 @ second.values)
    lex_f1 = opt(bi.f1, cap=(bi.f2, _lex_bound(f2_star)))
    anchor2 = lex_f1.values
    f1_at_f2 = float(bi.f1 @ anchor2)

    z_star = np.array([f1_star, f2_star])
    z_nadir = np.array([f1_at_f2, f2_at_f1])
    constant = tuple(
        bool(z_nadir[k] - z_star[k] <= 1e-9 * max(1.0, abs(z_star[k])))
        for k in range(2))
    return PayoffTable(
        z_star=z_star,
        z_nadir=z_nadir,
        anchor_values=(anchor1, anchor2),
        anchor_plans=(bi.plan_of(anchor1), bi.plan_of(anchor2)),
        constant=constant,
    )


def normalize(value: float, k: int, payoff: PayoffTable) -> float:
    """Map a cost value onto its ideal-to-nadir range: ideal -> 0, nadir -> 1.

    A degenerate range (the objective is constant over the payoff table)
    maps everything to 0; ``payoff.constant[k]`` carries the flag.
    """
    if payoff.constant[k]:
        return 0.0
    return (value - float(payoff.z_star[k])) / payoff.range_of(k)


@dataclass(frozen=True)
class FrontPoint:
    """One sweep solve: its control parameter, status and cost evaluations."""

    method: str
    control: float
    status: str
    f1: float | None
    f2: float | None
    g: tuple | None
    plan: PlanSolution | None = None
    values: np.ndarray | None = None
    nodes: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class ParetoFront:
    """All sweep points of one method plus problem-shape metadata.

    ``points`` holds every attempted solve in control order; ``front`` is
    the filtered nondominated subset of the optimal ones.
    """

    method: str
    points: tuple
    payoff: PayoffTable | None
    n_vars: int
    n_rows: int
    wall_time: float

    @property
    def front(self) -> list:
        return filter_nondominated(
            [p for p in self.points if p.status == MilpStatus.OPTIMAL.value])


def _f1f2(point) -> tuple[float, float]:
    if hasattr(point, "f1"):
        return float(point.f1), float(point.f2)
    return float(point[0]), float(point[1])


def dominates(a, b) -> bool:
    """Componentwise-no-worse and not identical in the objective pair."""
    a1, a2 = _f1f2(a)
    b1, b2 = _f1f2(b)
    return a1 <= b1 and a2 <= b2 and (a1, a2) != (b1, b2)


def filter_nondominated(points) -> list:
    """The subset not dominated by any other point, sorted by ascending F1.

    Exact objective-pair duplicates are all retained (none dominates its
    copy).  Single sorted sweep; ties on F1 are ordered by F2 then original
    position, which keeps the output stable.
    """
    order = sorted(range(len(points)), key=lambda i: (*_f1f2(points[i]), i))
    kept: list = []
    best_f2 = np.inf
    last_pair: tuple | None = None
    for i in order:
        pair = _f1f2(points[i])
        if pair[1] < best_f2 or pair == last_pair:
            kept.append(i)
            best_f2 = min(best_f2, pair[1])
            last_pair = pair
    kept.sort(key=lambda i: (_f1f2(points[i])[0], i))
    return [points[i] for i in kept]


def _solve_point(bi: BiobjectiveProblem, problem: MilpProblem, method: str,
                 control: float, *, time_limit, node_limit) -> FrontPoint:
    started = time.perf_counter()
    res = solve_milp(problem, time_limit=time_limit, node_limit=node_limit)
    elapsed = time.perf_counter() - started
    if res.values is None:
        return FrontPoint(method=method, control=control, status=res.status.value,
                          f1=None, f2=None, g=None, nodes=res.node_count,
                          wall_time=elapsed)
    f1v, f2v = bi.value_pair(res.values)
    plan = bi.plan_of(res.values)
    g = None
    if plan is not None:
        v = plan.values
        g = (v.g1, v.g2, v.g3, v.g4, v.g5)
    return FrontPoint(method=method, control=control, status=res.status.value,
                      f1=f1v, f2=f2v, g=g, plan=plan, values=res.values,
                      nodes=res.node_count, wall_time=elapsed)


def weighting_sweep(bi: BiobjectiveProblem, count: int = 50, *,
                    payoff: PayoffTable | None = None,
                    time_limit: float | None = None,
                    node_limit: int | None = None) -> ParetoFront:
    """Minimize ``p1*F1_norm + p2*F2_norm`` for ``count`` interior weights.

    Weights are ``p1 = j/(count+1)`` for ``j = 1..count``, so both stay in
    the open interval (0, 1) and sum to one with ``p2 = 1 - p1``.  Constant
    (degenerate-range) objectives drop out of the scalarization.
    """
    if payoff is None:
        payoff = compute_payoff(bi, time_limit=time_limit, node_limit=node_limit)
    started = time.perf_counter()
    points = []
    for j in range(1, count + 1):
        p1 = j / (count + 1)
        p2 = 1.0 - p1
        a1 = 0.0 if payoff.constant[0] else p1 / payoff.range_of(0)
        a2 = 0.0 if payoff.constant[1] else p2 / payoff.range_of(1)
        c = a1 * bi.f1 + a2 * bi.f2
        offset = -(a1 * float(payoff.z_star[0]) + a2 * float(payoff.z_star[1]))
        prob = bi.base.with_objective(c, offset)
        points.append(_solve_point(bi, prob, "weighting", p1,
                                   time_limit=time_limit, node_limit=node_limit))
    return ParetoFront(method="weighting", points=tuple(points), payoff=payoff,
                       n_vars=bi.base.n_vars, n_rows=bi.base.n_rows,
                       wall_time=time.perf_counter() - started)


def epsilon_sweep(bi: BiobjectiveProblem, count: int = 50, *,
                  payoff: PayoffTable | None = None,
                  time_limit: float | None = None,
                  node_limit: int | None = None) -> ParetoFront:
    """Minimize F1 under a grid of caps on F2.

    The cap grid is an inclusive linspace over the ideal-to-nadir range of
    F2.  Caps get a relative 1e-7 slack so a cap equal to an achievable
    optimum is never cut off by solver arithmetic; infeasible caps are
    recorded with their status and excluded from the filtered front.
    """
    if payoff is None:
        payoff = compute_payoff(bi, time_limit=time_limit, node_limit=node_limit)
    started = time.perf_counter()
    grid = np.linspace(float(payoff.z_star[1]), float(payoff.z_nadir[1]), count)
    points = []
    for eps in grid:
        cap = float(eps) + 1e-7 * max(1.0, abs(float(eps)))
        prob = bi.base.with_extra_row(bi.f2, LE, cap, ("csp_cost_cap",))
        prob = prob.with_objective(bi.f1)
        points.append(_solve_point(bi, prob, "epsilon", float(eps),
                                   time_limit=time_limit, node_limit=node_limit))
    return ParetoFront(method="epsilon", points=tuple(points), payoff=payoff,
                       n_vars=bi.base.n_vars, n_rows=bi.base.n_rows + 1,
                       wall_time=time.perf_counter() - started)


# -- CSV interchange --------------------------------------------------------

def _cell(value) -> str:
    return "" if value is None else repr(float(value))


def write_front_csv(front: ParetoFront, path: str | Path) -> None:
    """Write every attempted sweep point as one CSV row."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(FRONT_CSV_COLUMNS)
        for p in front.points:
            g = p.g if p.g is not None else (None,) * 5
            writer.writerow([p.method, repr(float(p.control)), p.status,
                             _cell(p.f1), _cell(p.f2), *(_cell(v) for v in g)])


def read_front_csv(path: str | Path) -> list[FrontPoint]:
    """Read sweep points back; plans and raw value vectors are not stored."""
    out: list[FrontPoint] = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if tuple(header) != FRONT_CSV_COLUMNS:
            raise ValueError(f"unexpected front CSV header: {header}")
        for row in reader:
            method, control, status, f1, f2, *gcells = row
            g = None
            if all(cell != "" for cell in gcells):
                g = tuple(float(cell) for cell in gcells)
            out.append(FrontPoint(
                method=method, control=float(control), status=status,
                f1=float(f1) if f1 else None, f2=float(f2) if f2 else None, g=g))
    return out
