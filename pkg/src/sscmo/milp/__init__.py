"""Linear and mixed-integer modelling core with a small builtin solver."""

from .lpformat import export_lp_format, parse_lp_format
from .model import (TOL_FEAS, TOL_INT, Block, Domain, DomainError, LinConstraint, LinObjective,
                    Model, Sense, VarSpec, combine, fix_variables, relax_integrality,
                    tighten_bounds)
from .result import MILPResult, Status, read_result, write_result
from .solve import BACKENDS, SolveStats, solve_lp, solve_milp

__all__ = [
    "TOL_FEAS", "TOL_INT", "Block", "Domain", "DomainError", "LinConstraint", "LinObjective",
    "Model", "Sense", "VarSpec", "combine", "fix_variables", "relax_integrality", "tighten_bounds",
    "MILPResult", "Status", "read_result", "write_result", "BACKENDS", "SolveStats",
    "solve_lp", "solve_milp", "export_lp_format", "parse_lp_format",
]
