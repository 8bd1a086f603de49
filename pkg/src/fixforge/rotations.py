"""Near-identity unitaries that map nearby subspaces or frames onto each other.

Each construction returns the rotation together with its measured distance to
the identity and the explicit bound it is certified against: 2e for a single
projection pair, 5 sqrt(n) e for vector frames, 2e or 2 sqrt(n) e for rotating
frames into a subspace, and 6 sqrt(n) e for families of orthogonal projections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    CertificationError,
    DimensionMismatch,
    NotAProjection,
    NotIsometry,
    NotOrthogonalFamily,
    NotOrthonormal,
    TooFar,
)

PROJECTION_TOL = 1e-10


@dataclass
class RotationResult:
    """A unitary with its measured and promised distance to the identity."""

    unitary: np.ndarray
    distance_to_identity: float
    claimed_bound: float

    def __post_init__(self) -> None:
        u = np.asarray(self.unitary, dtype=complex)
        d = u.shape[0]
        if linalg.operator_norm(u.conj().T @ u - np.eye(d)) > PROJECTION_TOL:
            raise CertificationError("rotation result is not unitary within 1e-10")
        if self.distance_to_identity > self.claimed_bound + 1e-9:
            raise CertificationError(
                f"rotation moved {self.distance_to_identity}, claimed only {self.claimed_bound}"
            )
        u.setflags(write=False)
        self.unitary = u


def _check_projection(e: np.ndarray, label: str) -> np.ndarray:
    e = np.asarray(e, dtype=complex)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        raise NotAProjection(f"{label} must be a square matrix")
    if not linalg.is_projection(e, PROJECTION_TOL):
        raise NotAProjection(f"{label} is not an orthogonal projection within 1e-10")
    return e


def same_rank_or_fail(e: np.ndarray, f: np.ndarray) -> int:
    """Common rank of two projections, available only when ||E-F|| < 1."""
    e = _check_projection(e, "E")
    f = _check_projection(f, "F")
    if e.shape != f.shape:
        raise DimensionMismatch(f"projection shapes differ: {e.shape} vs {f.shape}")
    gap = linalg.operator_norm(e - f)
    if gap >= 1.0:
        raise TooFar(f"projections are distance {gap} apart; rotation needs < 1")
    r_e, r_f = linalg.projection_rank(e), linalg.projection_rank(f)
    if r_e != r_f:
        raise TooFar(f"rank mismatch {r_e} vs {r_f} despite gap {gap}")
    return r_e


def _blockwise_rotation(e: np.ndarray, f: np.ndarray, r: int) -> np.ndarray:
    """U = sum |v_i><w_i| from separate SVDs of FE and (1-F)(1-E)."""
    d = e.shape[0]
    eye = np.eye(d)
    top = linalg.svd(f @ e)
    bottom = linalg.svd((eye - f) @ (eye - e))
    lefts = np.hstack([top.left_vectors[:, :r], bottom.left_vectors[:, : d - r]])
    rights = np.hstack([top.right_vectors[:, :r], bottom.right_vectors[:, : d - r]])
    return lefts @ rights.conj().T


def align_projection(e: np.ndarray, f: np.ndarray) -> RotationResult:
    """Unitary with U E U^dagger = F and ||U - 1|| <= 2 ||E - F||."""
    r = same_rank_or_fail(e, f)
    e = np.asarray(e, dtype=complex)
    f = np.asarray(f, dtype=complex)
    u = _blockwise_rotation(e, f, r)
    residual = linalg.operator_norm(u @ e @ u.conj().T - f)
    if residual > 1e-9:
        raise CertificationError(f"projection alignment residual {residual} above 1e-9")
    dist = linalg.operator_norm(u - np.eye(e.shape[0]))
    return RotationResult(u, dist, 2.0 * linalg.operator_norm(e - f))


def _frame(vectors, label: str) -> np.ndarray:
    """Stack an orthonormal family as columns, validating within 1e-10."""
    cols = np.stack([np.asarray(v, dtype=complex).reshape(-1) for v in vectors], axis=1)
    gram = cols.conj().T @ cols
    if linalg.operator_norm(gram - np.eye(cols.shape[1])) > PROJECTION_TOL:
        raise NotOrthonormal(f"{label} vectors are not an orthonormal system within 1e-10")
    return cols


def align_vectors(sources, targets) -> RotationResult:
    """Unitary with U v_i = w_i exactly and ||U - 1|| <= 5 sqrt(n) max ||v_i - w_i||."""
    v = _frame(sources, "source")
    w = _frame(targets, "target")
    if v.shape != w.shape:
        raise DimensionMismatch("source and target frames must have equal shapes")
    d, n = v.shape
    eps = max(float(np.linalg.norm(w[:, i] - v[:, i])) for i in range(n))
    e = v @ v.conj().T
    f = w @ w.conj().T
    inner = align_projection(e, f)
    mapper = w @ v.conj().T  # sends each v_i to w_i and kills the complement
    u = mapper + inner.unitary @ (np.eye(d) - e)
    worst = max(float(np.linalg.norm(u @ v[:, i] - w[:, i])) for i in range(n))
    if worst > 1e-9:
        raise CertificationError(f"vector alignment residual {worst} above 1e-9")
    dist = linalg.operator_norm(u - np.eye(d))
    return RotationResult(u, dist, 5.0 * np.sqrt(n) * eps)


def align_into_subspace(psis, f: np.ndarray, mode: str, eps: float | None = None) -> RotationResult:
    """Unitary rotating a frame into ran(F), so F U psi_i = U psi_i exactly.

    The leakage alpha_i = ||(1-F) psi_i|| is budgeted either jointly
    (mode "summed": sqrt(sum alpha_i^2) <= eps < 1, bound 2 eps) or uniformly
    (mode "per-vector": max alpha_i <= eps < 1/sqrt(n), bound 2 sqrt(n) eps).
    """
    psi = _frame(psis, "input")
    f = _check_projection(f, "F")
    if f.shape[0] != psi.shape[0]:
        raise DimensionMismatch("projection and vectors live in different spaces")
    d, n = psi.shape
    leaks = np.array([np.linalg.norm(psi[:, i] - f @ psi[:, i]) for i in range(n)])
    if mode == "summed":
        measured = float(np.sqrt(np.sum(leaks**2)))
        budget = measured if eps is None else float(eps)
        limit, bound = 1.0, 2.0 * budget
    elif mode == "per-vector":
        measured = float(leaks.max())
        budget = measured if eps is None else float(eps)
        limit, bound = 1.0 / np.sqrt(n), 2.0 * np.sqrt(n) * budget
    else:
        raise ValueError(f"mode must be 'summed' or 'per-vector', got {mode!r}")
    if measured > budget + 1e-12:
        raise TooFar(f"leakage {measured} exceeds the stated budget {budget}")
    if budget >= limit:
        raise TooFar(f"budget {budget} reaches the rotation limit {limit}")
    projected = linalg.svd(f @ psi)
    if projected.singular_values.size < n or projected.singular_values[n - 1] <= 0:
        raise TooFar("projected frame collapses; no rank-preserving rotation exists")
    basis = projected.left_vectors[:, :n]
    f_prime = basis @ basis.conj().T
    inner = align_projection(psi @ psi.conj().T, f_prime)
    u = inner.unitary
    worst = max(float(np.linalg.norm((np.eye(d) - f) @ (u @ psi[:, i]))) for i in range(n))
    if worst > 1e-9:
        raise CertificationError(f"subspace containment residual {worst} above 1e-9")
    return RotationResult(u, inner.distance_to_identity, bound)


def align_projection_family(sources, targets) -> RotationResult:
    """Unitary with U E_l U^dagger = F_l for two orthogonal projection families.

    Blockwise alignments are glued over the family and completed on the
    orthogonal complement; the certified bound is 6 sqrt(n) max_l ||E_l - F_l||.
    """
    es = [_check_projection(e, f"E[{i}]") for i, e in enumerate(sources)]
    fs = [_check_projection(f, f"F[{i}]") for i, f in enumerate(targets)]
    if len(es) != len(fs) or not es:
        raise DimensionMismatch("families must be nonempty and equally long")
    d = es[0].shape[0]
    n = len(es)
    for family, label in ((es, "source"), (fs, "target")):
        total = sum(family)
        if float(np.linalg.eigvalsh(total)[-1]) > 1.0 + PROJECTION_TOL:
            raise NotOrthogonalFamily(f"{label} projections overlap; sum exceeds identity")
        for i in range(n):
            for j in range(i):
                if linalg.operator_norm(family[i] @ family[j]) > PROJECTION_TOL:
                    raise NotOrthogonalFamily(f"{label} projections {j} and {i} overlap")
    eps = max(linalg.operator_norm(e - f) for e, f in zip(es, fs))
    glued = np.zeros((d, d), dtype=complex)
    for e, f in zip(es, fs):
        glued += align_projection(e, f).unitary @ e
    e_total = sum(es)
    f_total = sum(fs)
    complement = align_projection(np.eye(d) - e_total, np.eye(d) - f_total)
    u = glued + complement.unitary @ (np.eye(d) - e_total)
    worst = max(
        linalg.operator_norm(u @ e @ u.conj().T - f) for e, f in zip(es, fs)
    )
    if worst > 1e-9:
        raise CertificationError(f"family alignment residual {worst} above 1e-9")
    dist = linalg.operator_norm(u - np.eye(d))
    return RotationResult(u, dist, 6.0 * np.sqrt(n) * eps)


def stinespring_distance_bound(v: np.ndarray, w: np.ndarray) -> float:
    """Operator distance ||V - W|| between two isometries with equal shapes.

    Half the diamond distance of the induced channels never exceeds this
    number, which is what makes it a valid channel-level certificate.
    """
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if v.shape != w.shape:
        raise DimensionMismatch(f"isometry shapes differ: {v.shape} vs {w.shape}")
    for iso, label in ((v, "V"), (w, "W")):
        gram = iso.conj().T @ iso
        if linalg.operator_norm(gram - np.eye(iso.shape[1])) > PROJECTION_TOL:
            raise NotIsometry(f"{label} is not an isometry within 1e-10")
    return linalg.operator_norm(v - w)
