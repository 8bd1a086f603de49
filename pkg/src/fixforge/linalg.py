"""Dense complex-matrix substrate: decompositions, tensor operations, norms.

Conventions fixed here and inherited by every other module:

* row-major (C order) storage; the left tensor factor is the slow index,
  so a composite ket index reads ``a * d_B + b``;
* eigenvalues and singular values are sorted descending, ties broken by
  original index (stable sort);
* seeded randomness is an explicit argument, never global state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotNormalized, NotSquare

HERMITICITY_TOL = 1e-10


def _as_complex(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(out.view(float))):
        raise ValueError("matrix entries must be finite")
    return out


@dataclass
class HermitianEigenDecomposition:
    """Spectrum of a Hermitian matrix, sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.conj().T


@dataclass
class SingularValueDecomposition:
    """A = L diag(s) R^dagger with orthonormal columns in L and R."""

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.conj().T


def eigh(a: np.ndarray) -> HermitianEigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input is symmetrized when its asymmetry is within tolerance and
    rejected otherwise.
    """
    a = _as_complex(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.linalg.norm(a, 2))) if a.size else 1.0
    if np.linalg.norm(a - a.conj().T, 2) > HERMITICITY_TOL * scale:
        raise NotHermitian("matrix is not Hermitian within 1e-10")
    vals, vecs = np.linalg.eigh((a + a.conj().T) / 2.0)
    order = np.argsort(-vals, kind="stable")
    return HermitianEigenDecomposition(vals[order], vecs[:, order])


def svd(a: np.ndarray) -> SingularValueDecomposition:
    """Singular value decomposition with descending singular values."""
    a = _as_complex(a)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return SingularValueDecomposition(s, u, vh.conj().T)


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values, ||A||_1."""
    return float(np.sum(np.linalg.svd(_as_complex(a), compute_uv=False)))


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value, ||A||."""
    a = _as_complex(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hs_norm(a: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm, ||A||_2."""
    return float(np.linalg.norm(_as_complex(a)))


def trace_norm_hermitian(a: np.ndarray) -> float:
    """||A||_1 for Hermitian A via eigenvalues (cheaper than a full SVD)."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(a))))


def partial_trace(x: np.ndarray, subsystem: str, dims: tuple[int, int]) -> np.ndarray:
    """Trace out one factor of an operator on H_A (x) H_B.

    ``subsystem`` names the factor that is traced OUT ("A" or "B"); composite
    indices follow the a*d_B + b convention.
    """
    d_a, d_b = dims
    x = _as_complex(x)
    if x.shape != (d_a * d_b, d_a * d_b):
        raise DimensionMismatch(
            f"operator shape {x.shape} does not match dims {d_a}x{d_b}"
        )
    t = x.reshape(d_a, d_b, d_a, d_b)
    if subsystem == "A":
        return np.einsum("abad->bd", t)
    if subsystem == "B":
        return np.einsum("abcb->ac", t)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def schmidt_decompose(
    psi: np.ndarray, dims: tuple[int, int]
) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
    """Schmidt decomposition of a bipartite unit vector.

    Returns ``(coefficients, vectors_A, vectors_B)`` where the coefficients
    are the squared Schmidt amplitudes (probabilities, descending) and
    psi = sum_i sqrt(coefficients[i]) vectors_A[i] (x) vectors_B[i].
    """
    d_a, d_b = dims
    psi = _as_complex(psi).reshape(-1)
    if psi.shape != (d_a * d_b,):
        raise DimensionMismatch(f"vector length {psi.size} != {d_a}*{d_b}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise NotNormalized("Schmidt decomposition needs a unit vector")
    u, s, vh = np.linalg.svd(psi.reshape(d_a, d_b), full_matrices=False)
    return s**2, [u[:, i] for i in range(s.size)], [vh[i, :] for i in range(s.size)]


def _rng(seed: int | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def haar_random_unitary(d: int, seed: int | np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from a Ginibre matrix and a phase-fixed QR."""
    if d < 1:
        raise DimensionMismatch("dimension must be at least 1")
    rng = _rng(seed)
    q, r = np.linalg.qr(_ginibre(rng, d, d))
    for j in range(d):
        q[:, j] *= r[j, j] / abs(r[j, j])
    return q


def random_isometry(d_in: int, d_out_total: int, seed: int | np.random.Generator) -> np.ndarray:
    """Random isometry C^{d_in} -> C^{d_out_total} (Ginibre + phase-fixed QR)."""
    if d_in < 1 or d_in > d_out_total:
        raise DimensionMismatch(f"need 1 <= d_in <= d_out_total, got {d_in}, {d_out_total}")
    rng = _rng(seed)
    q, r = np.linalg.qr(_ginibre(rng, d_out_total, d_in))
    for j in range(d_in):
        q[:, j] *= r[j, j] / abs(r[j, j])
    return q


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = _ginibre(rng, d, 1).reshape(-1)
    return v / np.linalg.norm(v)


def is_projection(e: np.ndarray, tol: float = 1e-10) -> bool:
    """True when E is Hermitian and idempotent within tolerance."""
    e = _as_complex(e)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        return False
    return (
        operator_norm(e - e.conj().T) <= tol * max(1.0, operator_norm(e))
        and operator_norm(e @ e - e) <= tol
    )


def projection_rank(e: np.ndarray) -> int:
    """Rank of a projection by counting eigenvalues at or above 1/2."""
    return int(np.sum(np.linalg.eigvalsh((e + e.conj().T) / 2.0) >= 0.5))
