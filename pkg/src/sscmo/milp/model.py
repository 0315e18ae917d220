"""Linear / mixed-integer model values.

Models are immutable: every transformation returns a new model and leaves
the source untouched. Coefficients are sparse ``{var_id: value}`` maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

TOL_FEAS = 1e-6
TOL_INT = 1e-6


class DomainError(ValueError):
    """A fix or bound is incompatible with a variable's domain."""


class Domain(str, Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"
    BINARY = "binary"

    @property
    def discrete(self) -> bool:
        return self is not Domain.CONTINUOUS


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Block(str, Enum):
    RELAXABLE = "relaxable"
    KEPT = "kept"


@dataclass(frozen=True)
class VarSpec:
    id: str
    domain: Domain = Domain.CONTINUOUS
    lower: float = 0.0
    upper: float = math.inf

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise DomainError(f"{self.id}: lower {self.lower} > upper {self.upper}")
        if self.domain is Domain.BINARY and (self.lower < 0 or self.upper > 1):
            raise DomainError(f"{self.id}: binary bounds must lie in [0, 1]")


@dataclass(frozen=True)
class LinConstraint:
    coeffs: Mapping[str, float]
    sense: Sense
    rhs: float
    label: str
    block: Block = Block.KEPT

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError(f"constraint {self.label!r} has no coefficients")

    def activity(self, x: Mapping[str, float]) -> float:
        return sum(c * x.get(v, 0.0) for v, c in self.coeffs.items())

    def violation(self, x: Mapping[str, float]) -> float:
        """Amount by which ``x`` violates the row (0 when satisfied)."""
        lhs = self.activity(x)
        if self.sense is Sense.LE:
            return max(0.0, lhs - self.rhs)
        if self.sense is Sense.GE:
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)

    def scale(self, x: Mapping[str, float]) -> float:
        terms = [abs(c * x.get(v, 0.0)) for v, c in self.coeffs.items()]
        return max([1.0, abs(self.rhs), *terms])

    def as_le(self) -> list[tuple[dict[str, float], float]]:
        """The row as one or two ``a.x <= b`` pieces."""
        if self.sense is Sense.LE:
            return [(dict(self.coeffs), self.rhs)]
        neg = {v: -c for v, c in self.coeffs.items()}
        if self.sense is Sense.GE:
            return [(neg, -self.rhs)]
        return [(dict(self.coeffs), self.rhs), (neg, -self.rhs)]


@dataclass(frozen=True)
class LinObjective:
    """Minimisation objective ``coeffs . x + constant``."""

    coeffs: Mapping[str, float] = field(default_factory=dict)
    constant: float = 0.0

    def __post_init__(self):
        for v, c in self.coeffs.items():
            if not math.isfinite(c):
                raise ValueError(f"objective coefficient of {v} is not finite")

    def value(self, x: Mapping[str, float]) -> float:
        return self.constant + sum(c * x.get(v, 0.0) for v, c in self.coeffs.items())

    def __add__(self, other: LinObjective) -> LinObjective:
        return combine([(1.0, self), (1.0, other)])

    def scaled(self, factor: float) -> LinObjective:
        return LinObjective({v: factor * c for v, c in self.coeffs.items()}, factor * self.constant)


def combine(terms: Iterable[tuple[float, LinObjective]]) -> LinObjective:
    coeffs: dict[str, float] = {}
    const = 0.0
    for w, obj in terms:
        const += w * obj.constant
        for v, c in obj.coeffs.items():
            coeffs[v] = coeffs.get(v, 0.0) + w * c
    return LinObjective({v: c for v, c in coeffs.items() if c != 0.0}, const)


@dataclass(frozen=True)
class Model:
    vars: tuple[VarSpec, ...] = ()
    constraints: tuple[LinConstraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if len(self.index) != len(self.vars):
            raise ValueError("duplicate variable ids")
        labels = [c.label for c in self.constraints]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate constraint labels")
        for c in self.constraints:
            for v in c.coeffs:
                if v not in self.index:
                    raise KeyError(f"constraint {c.label!r} references unknown variable {v!r}")

    @cached_property
    def index(self) -> dict[str, int]:
        return {v.id: k for k, v in enumerate(self.vars)}

    def var(self, vid: str) -> VarSpec:
        return self.vars[self.index[vid]]

    @property
    def n_discrete(self) -> int:
        return sum(v.domain.discrete for v in self.vars)

    def rows(self, block: Block | None = None) -> list[LinConstraint]:
        if block is None:
            return list(self.constraints)
        return [c for c in self.constraints if c.block is block]

    # -- matrix form -------------------------------------------------------

    @cached_property
    def _matrix(self):
        idx = self.index
        data, ri, ci = [], [], []
        lo = np.full(len(self.constraints), -np.inf)
        hi = np.full(len(self.constraints), np.inf)
        for r, c in enumerate(self.constraints):
            for v, a in c.coeffs.items():
                ri.append(r)
                ci.append(idx[v])
                data.append(a)
            if c.sense is not Sense.GE:
                hi[r] = c.rhs
            if c.sense is not Sense.LE:
                lo[r] = c.rhs
        A = sp.csr_matrix((data, (ri, ci)), shape=(len(self.constraints), len(self.vars)))
        return A, lo, hi

    def matrix(self) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray]:
        """``(A, row_lo, row_hi)`` with ``row_lo <= A x <= row_hi``."""
        return self._matrix

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([v.lower for v in self.vars], dtype=float),
                np.array([v.upper for v in self.vars], dtype=float))

    def integrality(self) -> np.ndarray:
        return np.array([int(v.domain.discrete) for v in self.vars])

    def objective_vector(self, objective: LinObjective) -> np.ndarray:
        c = np.zeros(len(self.vars))
        for v, a in objective.coeffs.items():
            c[self.index[v]] += a
        return c

    def to_assignment(self, x: np.ndarray) -> dict[str, float]:
        return {v.id: float(val) for v, val in zip(self.vars, x)}

    def to_vector(self, assignment: Mapping[str, float]) -> np.ndarray:
        return np.array([assignment.get(v.id, 0.0) for v in self.vars], dtype=float)

    # -- derived models ----------------------------------------------------

    def with_vars(self, vars: Iterable[VarSpec]) -> Model:
        """Same rows, new variable specs (same ids, same order)."""
        new = replace(self, vars=tuple(vars))
        if "_matrix" in self.__dict__:
            new.__dict__["_matrix"] = self.__dict__["_matrix"]
        return new

    def extended(self, vars: Iterable[VarSpec] = (), constraints: Iterable[LinConstraint] = ()) -> Model:
        return Model(self.vars + tuple(vars), self.constraints + tuple(constraints))

    def with_constraints(self, constraints: Iterable[LinConstraint]) -> Model:
        return Model(self.vars, tuple(constraints))

    def violations(self, assignment: Mapping[str, float], tol: float = TOL_FEAS,
                   integrality: bool = True) -> list[tuple[str, float]]:
        """Rows and bounds violated by ``assignment`` as ``(label, amount)``.

        A row counts as violated when its violation exceeds ``tol`` times the
        row scale ``max(1, |rhs|, max_k |a_k x_k|)``.
        """
        out = []
        for v in self.vars:
            val = assignment.get(v.id, 0.0)
            if val < v.lower - tol * max(1.0, abs(v.lower)):
                out.append((f"lower({v.id})", v.lower - val))
            if val > v.upper + tol * max(1.0, abs(v.upper)):
                out.append((f"upper({v.id})", val - v.upper))
            if integrality and v.domain.discrete and abs(val - round(val)) > TOL_INT:
                out.append((f"integral({v.id})", abs(val - round(val))))
        for c in self.constraints:
            viol = c.violation(assignment)
            if viol > tol * c.scale(assignment):
                out.append((c.label, viol))
        return out


def fix_variables(model: Model, fixes: Mapping[str, float]) -> Model:
    """Return ``model`` with each variable in ``fixes`` pinned to its value."""
    if not fixes:
        return model
    new_vars = list(model.vars)
    for vid, val in fixes.items():
        k = model.index[vid]
        v = new_vars[k]
        if not v.lower - TOL_FEAS <= val <= v.upper + TOL_FEAS:
            raise DomainError(f"fix {vid}={val} outside [{v.lower}, {v.upper}]")
        if v.domain.discrete:
            if abs(val - round(val)) > TOL_INT:
                raise DomainError(f"fix {vid}={val} violates integrality")
            val = float(round(val))
        val = min(max(val, v.lower), v.upper)
        new_vars[k] = replace(v, lower=val, upper=val)
    return model.with_vars(new_vars)


def tighten_bounds(model: Model, lower: Mapping[str, float] = {}, upper: Mapping[str, float] = {}) -> Model:
    """Raise lower / lower upper bounds; never loosens."""
    new_vars = list(model.vars)
    for vid, lo in lower.items():
        k = model.index[vid]
        v = new_vars[k]
        new_vars[k] = replace(v, lower=min(max(v.lower, lo), v.upper))
    for vid, hi in upper.items():
        k = model.index[vid]
        v = new_vars[k]
        new_vars[k] = replace(v, upper=max(min(v.upper, hi), v.lower))
    return model.with_vars(new_vars)


def relax_integrality(model: Model) -> Model:
    if not model.n_discrete:
        return model
    return model.with_vars(replace(v, domain=Domain.CONTINUOUS) if v.domain.discrete else v
                           for v in model.vars)
