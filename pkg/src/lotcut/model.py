"""Integrated production-and-cutting model: assembly, evaluation, checking.

The planning problem decides, per grammage ``k``, machine ``m`` and period
``t``: how many objects to produce (``x``), store (``w``) and cut by each
pattern (``y``), whether a machine is set up (``z``), and how many surplus
pieces are stored (``e``).  Two cost totals compete:

* ``f1 = g1 + g2 + g3``: production + object storage + setup costs;
* ``f2 = g4 + g5``: cutting-waste + piece storage costs.

``assemble_milp`` lowers an instance plus a pattern set into a generic
mixed-integer linear problem; the objective vector is installed later by the
scalarization layer.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, InvalidInstanceError, ShapeError
from .instance import Instance
from .patterns import PatternSet


class RelaxMode(enum.Enum):
    """Which integrality marks the assembled problem carries."""

    INTEGER = "integer"                    # x, w, y, e integer; z binary
    RELAXED_EXCEPT_Z = "relaxed_except_z"  # only the setup indicator z stays binary


LE, EQ, GE = "<=", "==", ">="


@dataclass(frozen=True)
class MilpProblem:
    """A generic MILP: bounds, integrality marks, rows and a linear objective.

    ``var_tags[j]`` maps column ``j`` back to its model meaning, e.g.
    ``("x", k, m, t)`` or ``("y", k, m, j, t)``; ``row_tags`` does the same
    for constraint rows.  Instances are treated as immutable; the ``with_*``
    helpers return modified copies.
    """

    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray
    var_tags: tuple
    A: np.ndarray
    senses: tuple
    rhs: np.ndarray
    row_tags: tuple
    c: np.ndarray
    offset: float = 0.0

    @property
    def n_vars(self) -> int:
        return self.lb.shape[0]

    @property
    def n_rows(self) -> int:
        return self.rhs.shape[0]

    def with_objective(self, c: np.ndarray, offset: float = 0.0) -> "MilpProblem":
        c = np.asarray(c, dtype=np.float64)
        if c.shape != (self.n_vars,):
            raise ShapeError("objective vector", (self.n_vars,), c.shape)
        return replace(self, c=c, offset=float(offset))

    def with_extra_row(self, coeffs: np.ndarray, sense: str, rhs: float, tag) -> "MilpProblem":
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.shape != (self.n_vars,):
            raise ShapeError("constraint row", (self.n_vars,), coeffs.shape)
        if sense not in (LE, EQ, GE):
            raise ValueError(f"unknown sense {sense!r}")
        return replace(
            self,
            A=np.vstack([self.A, coeffs[None, :]]),
            senses=self.senses + (sense,),
            rhs=np.append(self.rhs, float(rhs)),
            row_tags=self.row_tags + (tag,),
        )

    def with_integer_mask(self, integer: np.ndarray) -> "MilpProblem":
        integer = np.asarray(integer, dtype=bool)
        if integer.shape != (self.n_vars,):
            raise ShapeError("integrality mask", (self.n_vars,), integer.shape)
        return replace(self, integer=integer)


@dataclass(frozen=True)
class ObjectiveValues:
    """The two cost totals and their five split components."""

    g1: float  # production cost
    g2: float  # object storage cost
    g3: float  # setup cost
    g4: float  # cutting-waste cost
    g5: float  # piece storage cost

    @property
    def f1(self) -> float:
        return self.g1 + self.g2 + self.g3

    @property
    def f2(self) -> float:
        return self.g4 + self.g5

    def as_tuple(self) -> tuple[float, ...]:
        return (self.f1, self.f2, self.g1, self.g2, self.g3, self.g4, self.g5)


@dataclass(frozen=True)
class PlanSolution:
    """A full assignment of the decision variables plus its cost breakdown.

    ``y[k][m]`` is an ``(N_km, T)`` array of pattern frequencies; the other
    arrays are indexed as in :class:`Instance`.
    """

    x: np.ndarray
    w: np.ndarray
    z: np.ndarray
    y: tuple
    e: np.ndarray
    relax: RelaxMode
    values: ObjectiveValues


@dataclass(frozen=True)
class Violation:
    """One violated model equation: family name, indices and residual."""

    family: str
    index: tuple
    residual: float

    def __str__(self) -> str:
        idx = ",".join(str(i) for i in self.index)
        return f"{self.family}[{idx}] residual={self.residual:.3e}"


class VariableLayout:
    """Column layout shared by assembly, objective vectors and extraction.

    Order: all ``x`` (k-major, then m, then t), all ``w``, all ``z``, then
    ``y`` grouped by (k, m) with pattern-major/period-minor order, then
    ``e`` piece-major.
    """

    def __init__(self, inst: Instance, patterns: PatternSet):
        if patterns.K != inst.K or patterns.M != inst.M:
            raise ConfigurationError("pattern set was built for a different instance shape")
        self.K, self.M, self.T, self.Nf = inst.K, inst.M, inst.T, inst.Nf
        self.n_patterns = [[patterns.count(k, m) for m in range(inst.M)] for k in range(inst.K)]
        block = inst.K * inst.M * inst.T
        self._w0 = block
        self._z0 = 2 * block
        self._y0 = 3 * block
        self._y_off = {}
        off = self._y0
        for k in range(inst.K):
            for m in range(inst.M):
                self._y_off[(k, m)] = off
                off += self.n_patterns[k][m] * inst.T
        self._e0 = off
        self.n_vars = off + inst.Nf * inst.T

    def x(self, k: int, m: int, t: int) -> int:
        return (k * self.M + m) * self.T + t

    def w(self, k: int, m: int, t: int) -> int:
        return self._w0 + (k * self.M + m) * self.T + t

    def z(self, k: int, m: int, t: int) -> int:
        return self._z0 + (k * self.M + m) * self.T + t

    def y(self, k: int, m: int, j: int, t: int) -> int:
        return self._y_off[(k, m)] + j * self.T + t

    def e(self, i: int, t: int) -> int:
        return self._e0 + i * self.T + t

    def tags(self) -> tuple:
        out: list = [None] * self.n_vars
        for k in range(self.K):
            for m in range(self.M):
                for t in range(self.T):
                    out[self.x(k, m, t)] = ("x", k, m, t)
                    out[self.w(k, m, t)] = ("w", k, m, t)
                    out[self.z(k, m, t)] = ("z", k, m, t)
                for j in range(self.n_patterns[k][m]):
                    for t in range(self.T):
                        out[self.y(k, m, j, t)] = ("y", k, m, j, t)
        for i in range(self.Nf):
            for t in range(self.T):
                out[self.e(i, t)] = ("e", i, t)
        return tuple(out)


def production_caps(inst: Instance) -> np.ndarray:
    """Tight per-(k, m, t) cap on producible objects.

    ``floor((C[m,t] - f[k,m]) / b[k,m])`` clamped at zero: with the machine
    set up, its capacity minus the setup waste bounds production weight even
    when no other grammage runs.
    """
    if np.any(inst.b <= 0):
        raise InvalidInstanceError("object weights b[k][m] must be positive")
    raw = (inst.C[None, :, :] - inst.f[:, :, None]) / inst.b[:, :, None]
    return np.maximum(0.0, np.floor(raw))


def assemble_milp(inst: Instance, patterns: PatternSet, relax: RelaxMode) -> MilpProblem:
    """Lower the instance into a generic MILP with a zero objective vector.

    Initial stocks are encoded by omitting period-0 storage variables: the
    first-period balance rows simply have no carry-in terms.

    Raises:
        ConfigurationError: some (k, m) has an empty pattern list.
        InvalidInstanceError: some object weight b[k][m] is zero.
    """
    patterns.validate()
    lay = VariableLayout(inst, patterns)
    caps = production_caps(inst)
    cum_caps = np.cumsum(caps, axis=2)

    n = lay.n_vars
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    integer = np.zeros(n, dtype=bool)
    K, M, T, Nf = inst.K, inst.M, inst.T, inst.Nf

    for k in range(K):
        for m in range(M):
            pats = patterns.for_km(k, m)
            for t in range(T):
                ub[lay.x(k, m, t)] = caps[k, m, t]
                ub[lay.w(k, m, t)] = cum_caps[k, m, t]
                ub[lay.z(k, m, t)] = 1.0
                for j in range(len(pats)):
                    ub[lay.y(k, m, j, t)] = cum_caps[k, m, t]
    for i in range(Nf):
        k = int(inst.piece_grammage[i])
        per_object = np.floor(inst.L / int(inst.ell[i]))
        for t in range(T):
            ub[lay.e(i, t)] = float(per_object @ cum_caps[k, :, t])

    integer_kinds = {"z"} if relax is RelaxMode.RELAXED_EXCEPT_Z else {"x", "w", "z", "y", "e"}
    tags = lay.tags()
    for j, tag in enumerate(tags):
        integer[j] = tag[0] in integer_kinds

    rows: list[np.ndarray] = []
    senses: list[str] = []
    rhs: list[float] = []
    row_tags: list = []

    def add_row(coeffs: np.ndarray, sense: str, b: float, tag) -> None:
        rows.append(coeffs)
        senses.append(sense)
        rhs.append(float(b))
        row_tags.append(tag)

    # aggregate weight demand per grammage and period
    for k in range(K):
        for t in range(T):
            row = np.zeros(n)
            for m in range(M):
                row[lay.x(k, m, t)] = inst.b[k, m]
                row[lay.w(k, m, t)] = -inst.b[k, m]
                if t > 0:
                    row[lay.w(k, m, t - 1)] = inst.b[k, m]
            add_row(row, GE, inst.D[k, t], ("demand_weight", k, t))

    # machine capacity in weight, including setup waste
    for m in range(M):
        for t in range(T):
            row = np.zeros(n)
            for k in range(K):
                row[lay.x(k, m, t)] = inst.b[k, m]
                row[lay.z(k, m, t)] = inst.f[k, m]
            add_row(row, LE, inst.C[m, t], ("capacity", m, t))

    # production forces the setup indicator
    for k in range(K):
        for m in range(M):
            for t in range(T):
                row = np.zeros(n)
                row[lay.x(k, m, t)] = 1.0
                row[lay.z(k, m, t)] = -caps[k, m, t]
                add_row(row, LE, 0.0, ("setup_link", k, m, t))

    # piece demand balance: cut pieces plus stock flow meet demand exactly
    for k in range(K):
        members = inst.pieces_of(k)
        for t in range(T):
            for i in members:
                row = np.zeros(n)
                for m in range(M):
                    pats = patterns.for_km(k, m)
                    for j, pat in enumerate(pats):
                        count = pat.full_counts(Nf)[i]
                        if count:
                            row[lay.y(k, m, j, t)] = float(count)
                row[lay.e(i, t)] = -1.0
                if t > 0:
                    row[lay.e(i, t - 1)] = 1.0
                add_row(row, EQ, float(inst.d[i, t]), ("piece_balance", k, int(i), t))

    # every produced-or-destocked object is cut by exactly one pattern
    for k in range(K):
        for m in range(M):
            for t in range(T):
                row = np.zeros(n)
                for j in range(patterns.count(k, m)):
                    row[lay.y(k, m, j, t)] = 1.0
                row[lay.x(k, m, t)] = -1.0
                row[lay.w(k, m, t)] = 1.0
                if t > 0:
                    row[lay.w(k, m, t - 1)] = -1.0
                add_row(row, EQ, 0.0, ("object_balance", k, m, t))

    return MilpProblem(
        lb=lb,
        ub=ub,
        integer=integer,
        var_tags=tags,
        A=np.array(rows) if rows else np.zeros((0, n)),
        senses=tuple(senses),
        rhs=np.array(rhs),
        row_tags=tuple(row_tags),
        c=np.zeros(n),
    )


def objective_vectors(inst: Instance, patterns: PatternSet) -> tuple[np.ndarray, np.ndarray]:
    """Cost vectors for the two totals, aligned with ``assemble_milp`` columns."""
    lay = VariableLayout(inst, patterns)
    f1 = np.zeros(lay.n_vars)
    f2 = np.zeros(lay.n_vars)
    for k in range(inst.K):
        for m in range(inst.M):
            pats = patterns.for_km(k, m)
            for t in range(inst.T):
                f1[lay.x(k, m, t)] = inst.c[k, m, t]
                f1[lay.w(k, m, t)] = inst.h[k, t] * inst.b[k, m]
                f1[lay.z(k, m, t)] = inst.s[k, m, t]
                for j, pat in enumerate(pats):
                    f2[lay.y(k, m, j, t)] = inst.cp[k, t] * pat.waste
    for i in range(inst.Nf):
        for t in range(inst.T):
            f2[lay.e(i, t)] = inst.sigma[i, t] * inst.eta[i]
    return f1, f2


def _check_plan_shapes(inst: Instance, patterns: PatternSet, x, w, z, y, e) -> None:
    kmt = (inst.K, inst.M, inst.T)
    for name, arr in (("x", x), ("w", w), ("z", z)):
        if arr.shape != kmt:
            raise ShapeError(f"plan.{name}", kmt, arr.shape)
    if e.shape != (inst.Nf, inst.T):
        raise ShapeError("plan.e", (inst.Nf, inst.T), e.shape)
    if len(y) != inst.K or any(len(y[k]) != inst.M for k in range(inst.K)):
        raise ShapeError("plan.y", (inst.K, inst.M), (len(y),))
    for k in range(inst.K):
        for m in range(inst.M):
            want = (patterns.count(k, m), inst.T)
            if y[k][m].shape != want:
                raise ShapeError(f"plan.y[{k}][{m}]", want, y[k][m].shape)


def evaluate_objectives(inst: Instance, patterns: PatternSet, plan: "PlanSolution | None" = None,
                        *, x=None, w=None, z=None, y=None, e=None) -> ObjectiveValues:
    """Evaluate both cost totals and the five split components of a plan.

    Accepts either a :class:`PlanSolution` or raw arrays.  Pure and linear in
    the decision variables; feasibility is not required.
    """
    if plan is not None:
        x, w, z, y, e = plan.x, plan.w, plan.z, plan.y, plan.e
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    y = tuple(tuple(np.asarray(y[k][m], dtype=np.float64) for m in range(inst.M))
              for k in range(inst.K))
    _check_plan_shapes(inst, patterns, x, w, z, y, e)

    g1 = float(np.sum(inst.c * x))
    g2 = float(np.sum(inst.h[:, None, :] * inst.b[:, :, None] * w))
    g3 = float(np.sum(inst.s * z))
    g4 = 0.0
    for k in range(inst.K):
        for m in range(inst.M):
            wastes = np.array([p.waste for p in patterns.for_km(k, m)], dtype=np.float64)
            g4 += float(inst.cp[k] @ (wastes @ y[k][m]))
    g5 = float(np.sum(inst.sigma * inst.eta[:, None] * e))
    return ObjectiveValues(g1=g1, g2=g2, g3=g3, g4=g4, g5=g5)


def build_plan(inst: Instance, patterns: PatternSet, x, w, z, y, e,
               relax: RelaxMode = RelaxMode.INTEGER) -> PlanSolution:
    """Bundle raw decision arrays into an evaluated :class:`PlanSolution`."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    y = tuple(tuple(np.asarray(y[k][m], dtype=np.float64) for m in range(inst.M))
              for k in range(inst.K))
    values = evaluate_objectives(inst, patterns, x=x, w=w, z=z, y=y, e=e)
    return PlanSolution(x=x, w=w, z=z, y=y, e=e, relax=relax, values=values)


def extract_plan(inst: Instance, patterns: PatternSet, values: np.ndarray,
                 relax: RelaxMode) -> PlanSolution:
    """Slice a solver value vector back into a :class:`PlanSolution`."""
    lay = VariableLayout(inst, patterns)
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (lay.n_vars,):
        raise ShapeError("solution vector", (lay.n_vars,), values.shape)
    K, M, T, Nf = inst.K, inst.M, inst.T, inst.Nf
    x = np.zeros((K, M, T))
    w = np.zeros((K, M, T))
    z = np.zeros((K, M, T))
    e = np.zeros((Nf, T))
    y = []
    for k in range(K):
        per_m = []
        for m in range(M):
            block = np.zeros((patterns.count(k, m), T))
            for j in range(patterns.count(k, m)):
                for t in range(T):
                    block[j, t] = values[lay.y(k, m, j, t)]
            per_m.append(block)
            for t in range(T):
                x[k, m, t] = values[lay.x(k, m, t)]
                w[k, m, t] = values[lay.w(k, m, t)]
                z[k, m, t] = values[lay.z(k, m, t)]
        y.append(tuple(per_m))
    for i in range(Nf):
        for t in range(T):
            e[i, t] = values[lay.e(i, t)]
    return build_plan(inst, patterns, x, w, z, tuple(y), e, relax=relax)


def check_feasible(inst: Instance, patterns: PatternSet, plan: PlanSolution,
                   tol: float = 1e-6) -> list[Violation]:
    """All model equations violated by ``plan`` beyond ``tol``.

    Returns an empty list iff the plan satisfies demand, capacity, setup
    linking, both balance families, sign constraints and the integrality
    marks implied by ``plan.relax``.  Overproduction of weight is legal.
    """
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    x, w, z, y, e = plan.x, plan.w, plan.z, plan.y, plan.e
    _check_plan_shapes(inst, patterns, x, w, z, y, e)
    caps = production_caps(inst)
    out: list[Violation] = []
    K, M, T = inst.K, inst.M, inst.T

    for k in range(K):
        for t in range(T):
            carry = w[k, :, t - 1] if t > 0 else 0.0
            produced = float(inst.b[k] @ (x[k, :, t] + carry - w[k, :, t]))
            resid = inst.D[k, t] - produced
            if resid > tol:
                out.append(Violation("demand_weight", (k, t), resid))
    for m in range(M):
        for t in range(T):
            load = float(inst.b[:, m] @ x[:, m, t] + inst.f[:, m] @ z[:, m, t])
            resid = load - inst.C[m, t]
            if resid > tol:
                out.append(Violation("capacity", (m, t), resid))
    for k in range(K):
        for m in range(M):
            for t in range(T):
                resid = x[k, m, t] - caps[k, m, t] * z[k, m, t]
                if resid > tol:
                    out.append(Violation("setup_link", (k, m, t), resid))
    for k in range(K):
        members = inst.pieces_of(k)
        for t in range(T):
            cut = np.zeros(inst.Nf)
            for m in range(M):
                for j, pat in enumerate(patterns.for_km(k, m)):
                    cut += pat.full_counts(inst.Nf) * y[k][m][j, t]
            for i in members:
                carry = e[i, t - 1] if t > 0 else 0.0
                resid = cut[i] + carry - e[i, t] - inst.d[i, t]
                if abs(resid) > tol:
                    out.append(Violation("piece_balance", (k, int(i), t), resid))
    for k in range(K):
        for m in range(M):
            for t in range(T):
                carry = w[k, m, t - 1] if t > 0 else 0.0
                resid = float(np.sum(y[k][m][:, t])) - (x[k, m, t] + carry - w[k, m, t])
                if abs(resid) > tol:
                    out.append(Violation("object_balance", (k, m, t), resid))

    def check_sign(name: str, arr: np.ndarray, index_of) -> None:
        flat = np.asarray(arr)
        for idx in np.argwhere(flat < -tol):
            out.append(Violation("nonnegative_" + name, index_of(idx), float(flat[tuple(idx)])))

    check_sign("x", x, tuple)
    check_sign("w", w, tuple)
    check_sign("e", e, tuple)
    for k in range(K):
        for m in range(M):
            check_sign("y", y[k][m], lambda idx, k=k, m=m: (k, m) + tuple(idx))

    for k in range(K):
        for m in range(M):
            for t in range(T):
                if min(abs(z[k, m, t]), abs(z[k, m, t] - 1.0)) > tol:
                    out.append(Violation("binary_z", (k, m, t), float(z[k, m, t])))
    if plan.relax is RelaxMode.INTEGER:
        def check_int(name, arr, index_of):
            flat = np.asarray(arr)
            frac = np.abs(flat - np.round(flat))
            for idx in np.argwhere(frac > tol):
                out.append(Violation("integral_" + name, index_of(idx), float(frac[tuple(idx)])))
        check_int("x", x, tuple)
        check_int("w", w, tuple)
        check_int("e", e, tuple)
        for k in range(K):
            for m in range(M):
                check_int("y", y[k][m], lambda idx, k=k, m=m: (k, m) + tuple(idx))
    return out
