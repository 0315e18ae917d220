from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class Status(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    TIME_LIMIT = "TimeLimit"

    @property
    def has_solution(self) -> bool:
        return self in (Status.OPTIMAL, Status.FEASIBLE, Status.TIME_LIMIT)


@dataclass
class MILPResult:
    status: Status
    assignment: dict[str, float] = field(default_factory=dict)
    objective: float = math.nan
    best_bound: float = math.nan
    rel_gap: float = math.nan
    # LP relaxations solved (branch-and-bound nodes, or 1 for a plain LP)
    nodes: int = 0

    @property
    def ok(self) -> bool:
        return self.status.has_solution and bool(self.assignment)

    def to_json(self) -> dict:
        def num(v):
            return None if v is None or not math.isfinite(v) else v
        return {
            "status": self.status.value,
            "objective": num(self.objective),
            "best_bound": num(self.best_bound),
            "rel_gap": num(self.rel_gap),
            "assignment": dict(self.assignment),
        }

    @classmethod
    def from_json(cls, doc: dict) -> MILPResult:
        def num(v):
            return math.nan if v is None else float(v)
        return cls(
            status=Status(doc["status"]),
            assignment={k: float(v) for k, v in doc.get("assignment", {}).items()},
            objective=num(doc.get("objective")),
            best_bound=num(doc.get("best_bound")),
            rel_gap=num(doc.get("rel_gap")),
        )


def relative_gap(incumbent: float, bound: float) -> float:
    if not (math.isfinite(incumbent) and math.isfinite(bound)):
        return math.inf
    diff = max(0.0, incumbent - bound)
    if diff <= 1e-9:
        return 0.0
    return diff / max(abs(incumbent), 1e-10)


def write_result(result: MILPResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(result.to_json(), indent=1, sort_keys=True))


def read_result(path: str | Path) -> MILPResult:
    """Import a solver result file ``{status, objective, best_bound, assignment}``."""
    return MILPResult.from_json(json.loads(Path(path).read_text()))
