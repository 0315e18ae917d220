"""Quality measures for Pareto front approximations.

Objective vectors are in minimisation sense, ordered (eco, env, soc). Fronts
may be given as ParetoFront objects, lists of SolutionPoints or arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

OBJ = ("eco", "env", "soc")
RANGE_FLOOR = 1e-12


class EmptyFront(ValueError):
    pass


@dataclass(frozen=True)
class IdealPoint:
    eco: float
    env: float
    soc: float

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.eco, self.env, self.soc], dtype=float)

    @classmethod
    def of(cls, *fronts) -> IdealPoint:
        """Componentwise minimum over the given fronts."""
        F = np.vstack([as_array(f) for f in fronts if len(as_array(f))])
        if not len(F):
            raise EmptyFront("no points to take an ideal from")
        return cls(*F.min(axis=0).tolist())

    def to_json(self) -> dict:
        return {k: float(v) for k, v in zip(OBJ, self.vector)}

    @classmethod
    def from_json(cls, d: dict) -> IdealPoint:
        return cls(float(d["eco"]), float(d["env"]), float(d["soc"]))


def as_array(front) -> np.ndarray:
    """(n, 3) float array from a ParetoFront, a list of points or vectors."""
    if hasattr(front, "points"):
        front = front.points
    if isinstance(front, np.ndarray):
        F = front.astype(float)
    else:
        front = list(front)
        if not front:
            return np.zeros((0, 3))
        F = np.array([p.vector if hasattr(p, "vector") else p for p in front], dtype=float)
    F = F.reshape(-1, 3)
    if not np.all(np.isfinite(F)):
        raise ValueError("objective vectors must be finite")
    return F


def _ideal_vec(ideal) -> np.ndarray:
    if isinstance(ideal, IdealPoint):
        return ideal.vector
    if isinstance(ideal, dict):
        return np.array([ideal[k] for k in OBJ], dtype=float)
    return np.asarray(ideal, dtype=float)


def gap(a: float, b: float) -> float:
    """|a - b| / max(|a|, |b|), zero when both vanish."""
    den = max(abs(a), abs(b))
    if den == 0.0:
        return 0.0
    return abs(a - b) / den


def gapm(f, ideal) -> float:
    """Euclidean norm of the per-objective gaps to the ideal point."""
    f = np.asarray(f.vector if hasattr(f, "vector") else f, dtype=float)
    fi = _ideal_vec(ideal)
    return math.sqrt(sum(gap(float(a), float(b)) ** 2 for a, b in zip(f, fi)))


def _gapms(front, ideal) -> np.ndarray:
    F = as_array(front)
    if not len(F):
        raise EmptyFront("front has no points")
    return np.array([gapm(row, ideal) for row in F])


def amid(front, ideal) -> float:
    return float(np.mean(_gapms(front, ideal)))


def asns(front, ideal) -> float:
    """Sample standard deviation of gapm; a single point gives 0."""
    g = _gapms(front, ideal)
    if len(g) == 1:
        return 0.0
    return float(np.std(g, ddof=1))


def simplex_weights(nweights: int = 105) -> np.ndarray:
    """All (i, j, k)/n with i + j + k = n, n the smallest grid with at least
    ``nweights`` vectors."""
    if nweights < 1:
        raise ValueError("nweights must be >= 1")
    n = 0
    while (n + 1) * (n + 2) // 2 < nweights:
        n += 1
    if n == 0:
        return np.full((1, 3), 1.0 / 3.0)
    W = [(i, j, n - i - j) for i in range(n + 1) for j in range(n + 1 - i)]
    return np.array(W, dtype=float) / n


def tchebycheff(F: np.ndarray, W: np.ndarray, ideal: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Utilities u[w, s] = -max_i W[w, i] |ideal_i - F[s, i]| / r_i."""
    D = np.abs(ideal[None, :] - F) / np.maximum(RANGE_FLOOR, r)[None, :]
    return -np.max(W[:, None, :] * D[None, :, :], axis=2)


def r2(frontA, frontZ, ideal="auto", nweights: int = 105) -> float:
    """Mean best utility of frontZ minus that of frontA; positive when A is worse.

    Objectives are normalised by their range over the union of both fronts.
    """
    A, Z = as_array(frontA), as_array(frontZ)
    if not len(A) or not len(Z):
        raise EmptyFront("r2 needs two non-empty fronts")
    both = np.vstack([A, Z])
    fi = both.min(axis=0) if isinstance(ideal, str) and ideal == "auto" else _ideal_vec(ideal)
    r = both.max(axis=0) - both.min(axis=0)
    W = simplex_weights(nweights)
    uA = tchebycheff(A, W, fi, r).max(axis=1).mean()
    uZ = tchebycheff(Z, W, fi, r).max(axis=1).mean()
    return float(uZ - uA)


def report(frontA, frontZ=None, ideal="auto", nweights: int = 105) -> dict:
    """Summary used by the command line: amid, asns, r2, n_points, ideal."""
    frontZ = frontA if frontZ is None else frontZ
    if isinstance(ideal, str) and ideal == "auto":
        ip = IdealPoint.of(frontA, frontZ)
    elif isinstance(ideal, IdealPoint):
        ip = ideal
    else:
        ip = IdealPoint(*_ideal_vec(ideal).tolist())
    return {
        "amid": amid(frontA, ip),
        "asns": asns(frontA, ip),
        "r2": r2(frontA, frontZ, ip, nweights),
        "n_points": int(len(as_array(frontA))),
        "ideal": ip.to_json(),
    }
