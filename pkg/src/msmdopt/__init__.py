"""Multi-gradient stochastic mirror descent for stochastic multiobjective problems."""
from .analysis import ParetoFront, bk1_front_distance, hypervolume, nondominated_filter, rate_slope
from .benchmarks import PROBLEM_NAMES, get_problem, multi_start
from .core import ProblemInstance, StochasticOracle, linear_problem
from .inner_smd import InnerSchedule, run_inner
from .msmd import InnerBudgetRule, OuterSchedule, PreferenceSpec, solve, solve_with_preference

__version__ = "0.1.0"

__all__ = [
    "InnerBudgetRule", "InnerSchedule", "OuterSchedule", "PROBLEM_NAMES", "ParetoFront",
    "PreferenceSpec", "ProblemInstance", "StochasticOracle", "bk1_front_distance",
    "get_problem", "hypervolume", "linear_problem", "multi_start", "nondominated_filter",
    "rate_slope", "run_inner", "solve", "solve_with_preference",
]
