"""Probability vectors, stochastic matrices, and the classical repair.

The classical fixer mixes the given map with a replacement onto the almost
fixed distribution, then power-iterates to the exact fixed point; both the
moved distribution and the moved map stay within sqrt(eps).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DimensionMismatch,
    InvalidDistribution,
    NoConvergence,
    PromiseViolated,
)

VECTOR_TOL = 1e-10
CLAMP_TOL = 1e-12


@dataclass
class ProbabilityVector:
    """Nonnegative entries summing to one; tiny negative noise is clamped."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.entries, dtype=float).reshape(-1)
        if p.size == 0:
            raise InvalidDistribution("empty distribution")
        if float(p.min()) < -CLAMP_TOL:
            raise InvalidDistribution(f"entry {p.min()} below the -1e-12 clamp floor")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > VECTOR_TOL:
            raise InvalidDistribution(f"entries sum to {p.sum()}, not 1 within 1e-10")
        p.setflags(write=False)
        self.entries = p

    @property
    def dim(self) -> int:
        return self.entries.size


@dataclass
class StochasticMatrix:
    """Column-stochastic matrix: every column is a probability vector."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDistribution(f"stochastic matrix must be square, got {m.shape}")
        if float(m.min()) < -CLAMP_TOL:
            raise InvalidDistribution(f"entry {m.min()} below the -1e-12 clamp floor")
        m = np.clip(m, 0.0, None)
        sums = m.sum(axis=0)
        if float(np.max(np.abs(sums - 1.0))) > VECTOR_TOL:
            raise InvalidDistribution("column sums deviate from 1 beyond 1e-10")
        m.setflags(write=False)
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def columns(self) -> list[ProbabilityVector]:
        return [ProbabilityVector(self.matrix[:, y]) for y in range(self.dim)]


@dataclass
class ClassicalFixCertificate:
    """Measured distances and the sqrt(eps) claims they are certified against."""

    epsilon_used: float
    state_bound_claimed: float
    map_bound_claimed: float
    state_distance: float
    map_distance: float
    residual: float


def half_l1(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)).sum())


def stochastic_norm(t: StochasticMatrix, s: StochasticMatrix) -> float:
    """max_y sum_x |T_xy - S_xy|, the classical analogue of the diamond norm."""
    if t.dim != s.dim:
        raise DimensionMismatch(f"dimensions differ: {t.dim} vs {s.dim}")
    return float(np.abs(t.matrix - s.matrix).sum(axis=0).max())


def deviation(t: StochasticMatrix, p: ProbabilityVector) -> float:
    """Half the l1 distance of p from being a fixed point of T."""
    return half_l1(t.matrix @ p.entries, p.entries)


def _power_iterate_fixed_point(
    s: np.ndarray,
    start: np.ndarray,
    contraction: float,
    tol: float = 1e-11,
    max_iter: int = 10**6,
) -> np.ndarray:
    lam = float(contraction)
    cur = start.astype(float)
    start_gap = None
    for _ in range(max_iter):
        nxt = s @ cur
        delta = float(np.abs(nxt - cur).sum())
        if start_gap is None:
            start_gap = delta
        if delta * (1.0 - lam) / lam <= tol:
            gap = float(np.abs(nxt - start).sum())
            assert gap <= start_gap / lam + 1e-9, (
                f"fixed point moved {gap}, beyond the {start_gap / lam} guarantee"
            )
            return nxt
        cur = nxt
    raise NoConvergence(f"no convergence after {max_iter} iterations")


def fix_classical(
    p: ProbabilityVector,
    t: StochasticMatrix,
    epsilon: float | None = None,
) -> tuple[ProbabilityVector, StochasticMatrix, ClassicalFixCertificate]:
    """Repair an approximate classical fixed point into an exact one.

    With eps at least the measured half-l1 deviation, the repaired map is
    S = (1 - sqrt(eps)) T + sqrt(eps) P 1^T and the repaired distribution is
    the power-iterated fixed point of S; both move at most sqrt(eps).
    """
    if p.dim != t.dim:
        raise DimensionMismatch(f"dimensions differ: {p.dim} vs {t.dim}")
    measured = deviation(t, p)
    if epsilon is not None and measured > float(epsilon) + VECTOR_TOL:
        raise PromiseViolated(f"measured deviation {measured} exceeds promised {epsilon}")
    eps = measured if epsilon is None else max(float(epsilon), measured)

    if eps <= 1e-12:
        cert = ClassicalFixCertificate(eps, np.sqrt(eps), np.sqrt(eps), 0.0, 0.0, measured)
        return p, t, cert

    lam = min(1.0, np.sqrt(eps))
    replaced = np.tile(p.entries.reshape(-1, 1), (1, t.dim))
    s_matrix = (1.0 - lam) * t.matrix + lam * replaced
    q_entries = _power_iterate_fixed_point(s_matrix, p.entries, lam)
    q = ProbabilityVector(q_entries / q_entries.sum())
    s = StochasticMatrix(s_matrix)

    residual = deviation(s, q)
    state_distance = half_l1(q.entries, p.entries)
    map_distance = 0.5 * stochastic_norm(s, t)
    claim = np.sqrt(eps)
    cert = ClassicalFixCertificate(eps, claim, claim, state_distance, map_distance, residual)
    if residual > 1e-10:
        raise NoConvergence(f"fixed-point residual {residual} above 1e-10")
    if state_distance > claim + VECTOR_TOL or map_distance > claim + VECTOR_TOL:
        raise PromiseViolated("repair moved further than the sqrt(eps) claim")
    return q, s, cert


def stationary_distribution(
    s: StochasticMatrix,
    tol: float = 1e-12,
    max_iter: int = 10**6,
) -> ProbabilityVector:
    """A stationary distribution by power iteration with a running Cesaro mean.

    Plain iteration handles the aperiodic case; the running average settles
    periodic chains, whose iterates cycle exactly.
    """
    m = s.matrix
    cur = np.full(s.dim, 1.0 / s.dim)
    acc = np.zeros(s.dim)
    for k in range(1, max_iter + 1):
        nxt = m @ cur
        if float(np.abs(nxt - cur).sum()) <= tol:
            return ProbabilityVector(nxt / nxt.sum())
        acc += nxt
        avg = acc / k
        if float(np.abs(m @ avg - avg).sum()) <= tol:
            return ProbabilityVector(avg / avg.sum())
        cur = nxt
    raise NoConvergence(f"no stationary distribution found in {max_iter} iterations")


def eigenvalue_one_multiplicity(s: StochasticMatrix, tol: float = 1e-8) -> int:
    """Number of eigenvalues of S within tol of 1."""
    vals = np.linalg.eigvals(s.matrix)
    return int(np.sum(np.abs(vals - 1.0) <= tol))


def is_irreducible(s: StochasticMatrix, threshold: float = 0.0) -> bool:
    """Strong connectivity of the support graph (entries above the threshold)."""
    graph = csr_matrix(s.matrix > threshold)
    count, _ = connected_components(graph, directed=True, connection="strong")
    return count == 1
