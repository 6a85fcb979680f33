"""Graphplan with advisor-guided pruning and ordering."""
from .strips import (GroundAction, LayeredPlan, Literal, PlanningProblem, Proposition,
                     validate)
from .pddl import load_domain, load_problem, parse_domain, parse_problem
from .advisor import HeuristicAdvisor, PassthroughAdvisor, RejectAllAdvisor, ReplayAdvisor
from .metrics import RunMetrics
from .solver import SolveResult, SolverConfig, run_ablation, solve

__version__ = "0.1.0"
