"""Bi-objective lot-sizing and cutting-stock toolkit."""

from .analysis import build_report, count_distinct, pearson
from .errors import (
    ConfigurationError,
    InfeasibleModelError,
    InvalidInstanceError,
    LotcutError,
    PatternError,
    ShapeError,
    SolverError,
)
from .generator import CLASS_TABLE, GeneratorConfig, audit_instance, generate, generate_suite
from .instance import Instance
from .milp import LpResult, LpStatus, MilpResult, MilpStatus, dump_lp, solve_lp, solve_milp
from .model import (
    MilpProblem,
    ObjectiveValues,
    PlanSolution,
    RelaxMode,
    assemble_milp,
    build_plan,
    check_feasible,
    evaluate_objectives,
    extract_plan,
    objective_vectors,
    production_caps,
)
from .patterns import CuttingPattern, PatternSet, enumerate_patterns, select_heuristic
from .scalarize import (
    BiobjectiveProblem,
    FrontPoint,
    ParetoFront,
    PayoffTable,
    biobjective_from_instance,
    compute_payoff,
    dominates,
    epsilon_sweep,
    filter_nondominated,
    normalize,
    weighting_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
