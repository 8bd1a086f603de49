"""Spectral clustering of a state's eigenvalues and projection continuity checks.

A cluster groups consecutive distinct eigenvalues whose gaps stay at or below
a threshold delta; adjacent clusters are separated by a gap above delta.
Averaging the spectrum over each cluster yields a nearby state that shares the
eigenbasis and has exactly degenerate clusters, which is the starting point
for every rotation-based repair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import GapViolated
from .quantum import DensityMatrix

MERGE_TOL = 1e-12


def merged_spectral_points(
    matrix: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, list[np.ndarray]]:
    """Distinct eigenvalues (descending), multiplicities, and eigenvector blocks.

    Consecutive eigenvalues within 1e-12 of each other count as one spectral
    point; its value is the multiplicity-weighted mean and its block stacks
    the corresponding eigenvectors as columns.
    """
    dec = linalg.eigh(matrix)
    vals, vecs = dec.eigenvalues, dec.eigenvectors
    values: list[float] = []
    mults: list[int] = []
    blocks: list[np.ndarray] = []
    start = 0
    for i in range(1, vals.size + 1):
        if i == vals.size or vals[i - 1] - vals[i] > MERGE_TOL:
            group = vals[start:i]
            values.append(float(group.mean()))
            mults.append(i - start)
            blocks.append(vecs[:, start:i])
            start = i
    return np.asarray(values), np.asarray(mults), blocks


@dataclass
class ClusterDecomposition:
    """Spectrum of a state split into delta-separated clusters."""

    delta: float
    clusters: list[list[int]]
    projections: list[np.ndarray]
    averages: list[float]
    source_spectrum: list[tuple[float, int]]
    cluster_bases: list[np.ndarray]

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]


def cluster_spectrum(rho: DensityMatrix, delta: float) -> ClusterDecomposition:
    """Group the distinct spectral points of rho wherever gaps stay <= delta."""
    delta = float(delta)
    if delta < 0:
        raise ValueError(f"gap threshold must be >= 0, got {delta}")
    values, mults, blocks = merged_spectral_points(rho.matrix)
    clusters: list[list[int]] = [[0]]
    for i in range(1, values.size):
        if values[i - 1] - values[i] > delta:
            clusters.append([i])
        else:
            clusters[-1].append(i)
    projections = []
    averages = []
    bases = []
    for idx in clusters:
        basis = np.hstack([blocks[i] for i in idx])
        proj = basis @ basis.conj().T
        proj = (proj + proj.conj().T) / 2.0
        weight = sum(mults[i] for i in idx)
        mean = sum(values[i] * mults[i] for i in idx) / weight
        projections.append(proj)
        averages.append(float(mean))
        bases.append(basis)
    spectrum = [(float(v), int(m)) for v, m in zip(values, mults)]
    return ClusterDecomposition(delta, clusters, projections, averages, spectrum, bases)


def cluster_state(decomp: ClusterDecomposition) -> DensityMatrix:
    """The flattened state sigma = sum_l mu_l E_l."""
    sigma = sum(mu * e for mu, e in zip(decomp.averages, decomp.projections))
    return DensityMatrix(sigma)


def spectral_projection_gap_bound_check(
    a1: np.ndarray,
    a2: np.ndarray,
    interval,
    delta_gap: float,
) -> tuple[float, float]:
    """Distance between two interval spectral projections against 2||A1-A2||/gap.

    The closed interval must keep every eigenvalue of each matrix at distance
    >= delta_gap from the eigenvalues on the other side of its boundary.
    Returns (lhs, rhs); the caller asserts lhs <= rhs.
    """
    if delta_gap <= 0:
        raise GapViolated(f"spectral gap must be positive, got {delta_gap}")
    lo, hi = float(interval[0]), float(interval[1])
    projections = []
    for a in (np.asarray(a1, dtype=complex), np.asarray(a2, dtype=complex)):
        dec = linalg.eigh(a)
        inside = (dec.eigenvalues >= lo) & (dec.eigenvalues <= hi)
        ins, outs = dec.eigenvalues[inside], dec.eigenvalues[~inside]
        if ins.size and outs.size:
            sep = float(np.min(np.abs(ins[:, None] - outs[None, :])))
            if sep < delta_gap:
                raise GapViolated(
                    f"spectrum separation {sep} below the required gap {delta_gap}"
                )
        vecs = dec.eigenvectors[:, inside]
        projections.append(vecs @ vecs.conj().T)
    lhs = linalg.operator_norm(projections[0] - projections[1])
    rhs = 2.0 * linalg.operator_norm(np.asarray(a1) - np.asarray(a2)) / delta_gap
    return lhs, rhs
