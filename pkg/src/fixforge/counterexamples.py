"""Explicit instances where rapid fixing is impossible or both parts must move.

Each builder measures every quantity it claims and refuses to construct the
instance if a claim fails, so a successfully built CounterexampleInstance is
itself the verification record. Facts are stored as (description, value,
tolerance) rows; descriptions state whether the value is an equality target
or a one-sided bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import classical, fixers, linalg, quantum
from .classical import ProbabilityVector, StochasticMatrix
from .errors import (
    CertificationError,
    DimensionTooSmall,
    NotOrthonormal,
    TooFarFromNT,
    TooFarFromT,
)
from .quantum import Channel, DensityMatrix

CLASSICAL_RADIUS = 0.25


@dataclass
class CounterexampleInstance:
    """A named construction with its states, channels, and verified facts."""

    name: str
    states: list
    channels: list
    epsilon: float
    claimed_facts: list[tuple[str, float, float]] = field(default_factory=list)


@dataclass
class ClassicalRobustnessReport:
    """Uniqueness of the fixed distribution near the tridiagonal family."""

    dim: int
    distance_to_t: float
    fixed_space_dimension: int
    structure_verified: bool


@dataclass
class QuantumRobustnessReport:
    """Uniqueness of the fixed state near the embedded tridiagonal channel."""

    dim: int
    certified_upper: float
    fixed_space_dimension: int
    subspace_residuals: list[tuple[int, float]]


def _fact_eq(desc: str, measured: float, claimed: float, tol: float) -> tuple[str, float, float]:
    if abs(measured - claimed) > tol:
        raise CertificationError(f"{desc}: measured {measured}, claimed {claimed}")
    return (desc, claimed, tol)


def _fact_le(desc: str, measured: float, bound: float, tol: float) -> tuple[str, float, float]:
    if measured > bound + tol:
        raise CertificationError(f"{desc}: measured {measured} above {bound}")
    return (f"{desc} (at most)", bound, tol)


def _fact_ge(desc: str, measured: float, bound: float, tol: float) -> tuple[str, float, float]:
    if measured < bound - tol:
        raise CertificationError(f"{desc}: measured {measured} below {bound}")
    return (f"{desc} (at least)", bound, tol)


def example_change_both(epsilon: float) -> CounterexampleInstance:
    """Neither the state nor the channel alone can be repaired cheaply.

    On one two-dimensional block the channel's only fixed state is orthogonal
    to the almost fixed one; on a three-dimensional block the state is almost
    fixed but every nearby channel fixing it exactly must move.  Their direct
    sum forces any repair to move both ingredients.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon {epsilon} outside (0, 1)")
    e = float(epsilon)

    rho1 = DensityMatrix(np.diag([1.0, 0.0]))
    sink = DensityMatrix(np.diag([0.0, 1.0]))
    n1 = quantum.convex_combine(
        [1.0 - e, e],
        [quantum.identity_channel(2), quantum.replacement_channel(sink)],
    )
    rho2 = DensityMatrix(np.diag([e, 0.0, 1.0 - e]))
    swap01 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)
    n2 = quantum.unitary_channel(swap01)

    facts = [
        _fact_eq(
            "deviation of the first block", quantum.deviation(n1, rho1), e, 1e-12
        ),
        _fact_eq(
            "fixed-space dimension of the first block",
            float(quantum.fixed_point_space_dimension(n1, tol=min(1e-8, e / 2.0))),
            1.0,
            0.0,
        ),
        _fact_eq(
            "distance from the first state to the fixed space",
            quantum.trace_distance(rho1, sink),
            1.0,
            1e-12,
        ),
        _fact_eq(
            "deviation of the second block", quantum.deviation(n2, rho2), e, 1e-12
        ),
    ]

    # Direct sum on dimension five.
    rho = DensityMatrix(
        np.block(
            [
                [0.5 * rho1.matrix, np.zeros((2, 3))],
                [np.zeros((3, 2)), 0.5 * rho2.matrix],
            ]
        )
    )
    ops = []
    for k in quantum.kraus_operators(n1):
        ops.append(np.block([[k, np.zeros((2, 3))], [np.zeros((3, 2)), np.zeros((3, 3))]]))
    for k in quantum.kraus_operators(n2):
        ops.append(np.block([[np.zeros((2, 2)), np.zeros((2, 3))], [np.zeros((3, 2)), k]]))
    n = Channel("kraus", ops, 5, 5)
    facts.append(
        _fact_eq("deviation of the direct sum", quantum.deviation(n, rho), e, 1e-12)
    )

    repair = fixers.fix_general(rho, n)
    facts.append(
        _fact_ge("general repair moved the state", repair.state_distance_measured, 1e-6, 0.0)
    )
    facts.append(
        _fact_le(
            "general repair state move within sqrt(eps)",
            repair.state_distance_measured,
            float(np.sqrt(e)),
            1e-9,
        )
    )
    facts.append(
        _fact_ge(
            "general repair moved the channel",
            repair.channel_distance_certificate.lower,
            1e-6,
            0.0,
        )
    )
    facts.append(
        _fact_le(
            "general repair channel move within sqrt(eps)",
            repair.channel_distance_certificate.upper,
            float(np.sqrt(e)),
            1e-9,
        )
    )
    return CounterexampleInstance(
        "change-both", [rho1, rho2, rho], [n1, n2, n], e, facts
    )


def optimality_instance(epsilon: float = 1e-2) -> CounterexampleInstance:
    """Three-state chain whose repair cost scales exactly like sqrt(eps)."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon {epsilon} outside (0, 1]")
    e = float(epsilon)
    root = float(np.sqrt(e))
    t = StochasticMatrix(
        np.array(
            [
                [1.0 - root, root, 0.0],
                [root, 1.0 - root, 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
    )
    p = ProbabilityVector(np.array([root, 0.0, 1.0 - root]))
    measured = classical.deviation(t, p)
    facts = [_fact_eq("classical deviation equals eps", measured, e, 1e-12)]
    rho = quantum.embed_classical_state(p)
    n = quantum.embed_classical_channel(t)
    facts.append(
        _fact_eq("embedded deviation equals eps", quantum.deviation(n, rho), e, 1e-12)
    )
    return CounterexampleInstance("optimality", [p, rho], [t, n], e, facts)


def _tridiagonal_fractions(d: int) -> tuple[list[list[Fraction]], list[Fraction]]:
    if d < 3:
        raise DimensionTooSmall(f"the tridiagonal family needs d >= 3, got {d}")
    t = [[Fraction(0) for _ in range(d)] for _ in range(d)]
    t[0][0] = Fraction(3, 4)
    t[1][0] = Fraction(1, 4)
    for y in range(1, d - 1):
        t[y - 1][y] = Fraction(1, 2)
        t[y][y] = Fraction(1, 4)
        t[y + 1][y] = Fraction(1, 4)
    t[d - 1][d - 1] = Fraction(1)
    v = [Fraction(1, 2**k) for k in range(d - 1)] + [Fraction(0)]
    c = 1 / (2 - Fraction(1, 2 ** (d - 2)))
    p1 = [c * entry for entry in v]
    return t, p1


def tridiagonal_T(d: int) -> StochasticMatrix:
    """The birth-death chain with an absorbing end state."""
    t, _ = _tridiagonal_fractions(d)
    return StochasticMatrix(np.array([[float(x) for x in row] for row in t]))


def p1(d: int) -> ProbabilityVector:
    """Geometric weights away from the absorbing state; almost stationary."""
    _, p = _tridiagonal_fractions(d)
    return ProbabilityVector(np.array([float(x) for x in p]))


def p2(d: int) -> ProbabilityVector:
    """The absorbing state itself, the unique stationary distribution."""
    if d < 3:
        raise DimensionTooSmall(f"the tridiagonal family needs d >= 3, got {d}")
    entries = np.zeros(d)
    entries[d - 1] = 1.0
    return ProbabilityVector(entries)


def tridiagonal_deviation(d: int) -> float:
    """Exact dyadic value of the almost-stationarity gap of p1: c / 2^d."""
    if d < 3:
        raise DimensionTooSmall(f"the tridiagonal family needs d >= 3, got {d}")
    c = 1 / (2 - Fraction(1, 2 ** (d - 2)))
    return float(c / 2**d)


def classical_counterexample(d: int) -> CounterexampleInstance:
    """Two far-apart distributions, both almost stationary for one chain."""
    t = tridiagonal_T(d)
    q1, q2 = p1(d), p2(d)
    expected = tridiagonal_deviation(d)
    facts = [
        _fact_eq(
            "first distribution is almost stationary with gap c/2^d",
            classical.deviation(t, q1),
            expected,
            1e-12,
        ),
        _fact_eq(
            "second distribution is exactly stationary",
            classical.deviation(t, q2),
            0.0,
            1e-15,
        ),
        _fact_eq(
            "the two distributions are at maximal distance",
            classical.half_l1(q1.entries, q2.entries),
            1.0,
            1e-12,
        ),
        _fact_eq(
            "the chain has a unique stationary distribution",
            float(classical.eigenvalue_one_multiplicity(t)),
            1.0,
            0.0,
        ),
    ]
    return CounterexampleInstance(f"classical-impossibility-{d}", [q1, q2], [t], expected, facts)


def verify_classical_uniqueness_robustness(s: StochasticMatrix) -> ClassicalRobustnessReport:
    """Any chain within 1/4 of the tridiagonal one keeps a unique fixed point."""
    d = s.dim
    t = tridiagonal_T(d)
    gap = classical.stochastic_norm(s, t)
    if gap >= CLASSICAL_RADIUS:
        raise TooFarFromT(f"column-wise gap {gap} is not below 1/4")
    multiplicity = classical.eigenvalue_one_multiplicity(s)
    if multiplicity != 1:
        raise CertificationError(
            f"eigenvalue-one multiplicity {multiplicity} inside the robustness radius"
        )
    structure = all(
        s.matrix[y + 1, y] > 0 and s.matrix[y - 1, y] > 0 for y in range(1, d - 1)
    )
    if not structure:
        raise CertificationError("perturbed chain lost the tridiagonal connectivity")
    return ClassicalRobustnessReport(d, gap, multiplicity, structure)


def quantum_counterexample(d: int) -> CounterexampleInstance:
    """The classical impossibility family embedded as diagonal quantum objects."""
    t = tridiagonal_T(d)
    q1, q2 = p1(d), p2(d)
    rho1 = quantum.embed_classical_state(q1)
    rho2 = quantum.embed_classical_state(q2)
    n = quantum.embed_classical_channel(t)
    expected = tridiagonal_deviation(d)
    facts = [
        _fact_eq(
            "first embedded state deviation equals c/2^d",
            quantum.deviation(n, rho1),
            expected,
            1e-12,
        ),
        _fact_le(
            "first embedded state deviation within 2^-d",
            quantum.deviation(n, rho1),
            0.5**d,
            0.0,
        ),
        _fact_eq(
            "second embedded state is exactly fixed",
            quantum.deviation(n, rho2),
            0.0,
            1e-15,
        ),
        _fact_eq(
            "embedded states at maximal distance",
            quantum.trace_distance(rho1, rho2),
            1.0,
            1e-12,
        ),
        _fact_eq(
            "embedded channel has a unique fixed state",
            float(quantum.fixed_point_space_dimension(n)),
            1.0,
            0.0,
        ),
    ]
    return CounterexampleInstance(
        f"quantum-impossibility-{d}", [rho1, rho2], [n], expected, facts
    )


def perturbed_embedded_channel(d: int, scale: float, seed: int) -> tuple[Channel, float]:
    """A channel certified inside the 1/(16d) radius of the embedded chain.

    Perturbs the canonical dilation by a small unitary on the output-and-
    environment space and shrinks until the isometry gap certifies the radius.
    """
    n = quantum.embed_classical_channel(tridiagonal_T(d))
    v = quantum.stinespring_isometry(n)
    rng = np.random.default_rng(seed)
    big = v.shape[0]
    h = rng.normal(size=(big, big)) + 1j * rng.normal(size=(big, big))
    h = (h + h.conj().T) / 2.0
    h = h / linalg.operator_norm(h)
    radius = 1.0 / (16.0 * d)
    eta = min(float(scale), 0.9 * radius)
    while True:
        vals, vecs = np.linalg.eigh(eta * h)
        w = (vecs * np.exp(1j * vals)) @ vecs.conj().T @ v
        gap = linalg.operator_norm(w - v)
        if gap < radius:
            break
        eta *= 0.5
    env = big // d
    return Channel("stinespring", w, d, d, env_dim=env), gap


def verify_quantum_uniqueness_robustness(m: Channel) -> QuantumRobustnessReport:
    """Any channel certified within 1/(16d) of the embedded chain in diamond
    distance keeps a one-dimensional fixed-point space."""
    d = m.dim_in
    n = quantum.embed_classical_channel(tridiagonal_T(d))
    radius = 1.0 / (16.0 * d)
    canonical_v = quantum.stinespring_isometry(n)
    reference = Channel(
        "stinespring", canonical_v, d, d, env_dim=canonical_v.shape[0] // d
    )
    bounds = quantum.diamond_distance_bounds(m, reference, seed=11)
    if bounds.upper > radius:
        raise TooFarFromNT(
            f"certified upper bound {bounds.upper} exceeds the radius {radius}"
        )
    dimension = quantum.fixed_point_space_dimension(m)
    if dimension != 1:
        raise CertificationError(
            f"fixed-point space dimension {dimension} inside the robustness radius"
        )
    # Diagnostic: invariant-subspace residuals for projections built from the
    # unique fixed state, read off the superoperator's eigenvalue-one vector.
    # Power iteration is avoided because the chain mixes on a 2^d timescale.
    sup = quantum.superoperator_matrix(m)
    w, u = np.linalg.eig(sup)
    mat = u[:, int(np.argmin(np.abs(w - 1.0)))].reshape(d, d)
    mat = mat / np.trace(mat)
    sigma = quantum.repair_density((mat + mat.conj().T) / 2.0)
    eig = linalg.eigh(sigma.matrix)
    ranks = {1}
    support_rank = int(np.sum(eig.eigenvalues >= 1e-10))
    if support_rank < d:
        ranks.add(support_rank)
    residuals = []
    for rank in sorted(r for r in ranks if 0 < r < d):
        basis = eig.eigenvectors[:, :rank]
        pi = basis @ basis.conj().T
        residuals.append((rank, quantum.invariant_subspace_residual(m, pi)))
        residuals.append(
            (d - rank, quantum.invariant_subspace_residual(m, np.eye(d) - pi))
        )
    return QuantumRobustnessReport(d, bounds.upper, dimension, residuals)


def local_identity_defect(channel: Channel, dims: tuple[int, int]) -> float:
    """How far a composite channel is from acting as id on the A factor.

    Zero exactly for channels of the form id_A tensor M_B; the defect is the
    largest trace-norm mismatch over a basis of A operators.
    """
    d_a, d_b = dims
    if channel.dim_in != d_a * d_b or channel.dim_out != d_a * d_b:
        raise DimensionTooSmall("channel does not act on the given bipartition")
    tau = np.eye(d_b, dtype=complex) / d_b
    ref = quantum.apply(channel, np.kron(np.eye(d_a, dtype=complex) / d_a, tau))
    m_b = linalg.partial_trace(ref, "A", (d_a, d_b))
    defect = 0.0
    for i in range(d_a):
        for j in range(d_a):
            e_ij = np.zeros((d_a, d_a), dtype=complex)
            e_ij[i, j] = 1.0
            out = quantum.apply(channel, np.kron(e_ij, tau))
            defect = max(defect, linalg.trace_norm(out - np.kron(e_ij, m_b)))
    return defect


def bipartite_counterexample(d: int, d_a: int) -> CounterexampleInstance:
    """Impossibility of rapid fixing with the channel held local.

    Two classical impossibility states ride on orthogonal A-levels; the
    composite is almost fixed by id tensor N, yet keeping the channel local
    forces either the state correction or the channel correction to be large.
    """
    if d_a < 2:
        raise DimensionTooSmall(f"the A register needs d_A >= 2, got {d_a}")
    t = tridiagonal_T(d)
    n = quantum.embed_classical_channel(t)
    rho1 = quantum.embed_classical_state(p1(d)).matrix
    rho2 = quantum.embed_classical_state(p2(d)).matrix
    e0 = np.zeros((d_a, d_a), dtype=complex)
    e0[0, 0] = 1.0
    e1 = np.zeros((d_a, d_a), dtype=complex)
    e1[1, 1] = 1.0
    rho_ab = DensityMatrix(0.5 * np.kron(e0, rho1) + 0.5 * np.kron(e1, rho2))
    composite = Channel(
        "kraus",
        [np.kron(np.eye(d_a, dtype=complex), k) for k in quantum.kraus_operators(n)],
        d_a * d, d_a * d,
    )

    measured = quantum.deviation(composite, rho_ab)
    block_sum = 0.25 * linalg.trace_norm_hermitian(
        quantum.apply(n, rho1) - rho1
    ) + 0.25 * linalg.trace_norm_hermitian(quantum.apply(n, rho2) - rho2)
    facts = [
        _fact_eq(
            "composite deviation equals the block average", measured, block_sum, 1e-12
        ),
        _fact_le("composite deviation within 2^-d", measured, 0.5**d, 0.0),
    ]

    # Keeping the channel means moving the state by exactly 1/2.
    sigma_keep = DensityMatrix(0.5 * np.kron(e0, rho2) + 0.5 * np.kron(e1, rho2))
    facts.append(
        _fact_eq(
            "keeping the channel moves the state by 1/2",
            quantum.trace_distance(sigma_keep, rho_ab),
            0.5,
            1e-12,
        )
    )
    facts.append(
        _fact_le(
            "the channel-keeping candidate is an exact fixed point",
            quantum.deviation(composite, sigma_keep),
            0.0,
            1e-12,
        )
    )

    # Keeping the state means replacing N by the identity on B, which sits at
    # least 1/4 away in diamond distance, witnessed by one basis state.
    ident_b = quantum.identity_channel(d)
    witness_in = np.zeros((d, d), dtype=complex)
    witness_in[0, 0] = 1.0
    witness = 0.5 * linalg.trace_norm_hermitian(quantum.apply(n, witness_in) - witness_in)
    facts.append(
        _fact_eq("keeping the state moves the channel by at least 1/4", witness, 0.25, 1e-12)
    )
    facts.append(
        _fact_ge(
            "the witness already exceeds the uniqueness radius 1/(16d)",
            witness,
            1.0 / (16.0 * d),
            0.0,
        )
    )

    # Dephasing the A register of a coherent fixed point leaves a
    # block-diagonal fixed point.
    plus = np.full((d_a, d_a), 1.0 / d_a, dtype=complex)
    coherent = DensityMatrix(np.kron(plus, rho2))
    facts.append(
        _fact_le(
            "a coherent-on-A fixed point is exactly fixed",
            quantum.deviation(composite, coherent),
            0.0,
            1e-12,
        )
    )
    dephase = quantum.dephasing_channel(np.eye(d_a, dtype=complex))
    dephased = quantum.apply(dephase, linalg.partial_trace(coherent.matrix, "B", (d_a, d)))
    block_diag = DensityMatrix(np.kron(dephased, rho2))
    facts.append(
        _fact_le(
            "its A-dephasing is again an exact fixed point",
            quantum.deviation(composite, block_diag),
            0.0,
            1e-12,
        )
    )
    facts.append(
        _fact_eq(
            "the identity factor certificate: id tensor N is exactly local",
            local_identity_defect(composite, (d_a, d)),
            0.0,
            1e-12,
        )
    )
    return CounterexampleInstance(
        f"bipartite-impossibility-{d}-{d_a}",
        [rho_ab, sigma_keep],
        [composite, ident_b],
        measured,
        facts,
    )


def fix_linear_map(v: np.ndarray, a: np.ndarray, basis: np.ndarray | None = None) -> np.ndarray:
    """Repair a plain linear map so it fixes v, moving it by only ||Av - v||.

    Without positivity or trace constraints a rank-one correction suffices;
    the contrast with the sqrt(eps) cost for channels is the point.
    """
    v = np.asarray(v, dtype=complex).reshape(-1)
    a = np.asarray(a, dtype=complex)
    d = v.size
    if a.shape != (d, d):
        raise DimensionTooSmall(f"map shape {a.shape} does not match vector size {d}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise NotOrthonormal("the fixed vector must be a unit vector")
    if basis is not None:
        basis = np.asarray(basis, dtype=complex)
        if basis.shape != (d, d):
            raise NotOrthonormal("basis must be a full square matrix of columns")
        if linalg.operator_norm(basis.conj().T @ basis - np.eye(d)) > 1e-10:
            raise NotOrthonormal("basis columns are not orthonormal")
        if np.linalg.norm(basis[:, 0] - v) > 1e-10:
            raise NotOrthonormal("the first basis column must be the fixed vector")
    return a + np.outer(v - a @ v, v.conj())
