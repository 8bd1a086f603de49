"""States, channels in three representations, and channel distance measures.

Choi convention: J = sum_ij N(|i><j|) (x) |i><j| (output (x) input,
unnormalized, Tr_out J = 1_in).  With row-major flattening this is
J = sum_k flat(K_k) flat(K_k)^dagger.  Stinespring isometries store the
environment as the minor output factor: V[a*d_env + k, i] = K_k[a, i].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    InvalidChannel,
    InvalidState,
    InvalidWeights,
    NoConvergence,
    NotAProjection,
    NotNormalized,
)

STATE_TOL = 1e-10
CHANNEL_TOL = 1e-9
KRAUS_CUTOFF = 1e-12


def _mat(x) -> np.ndarray:
    """Accept DensityMatrix, PureState, or a raw array; return the operator."""
    if isinstance(x, DensityMatrix):
        return x.matrix
    if isinstance(x, PureState):
        return np.outer(x.vector, x.vector.conj())
    return np.asarray(x, dtype=complex)


@dataclass
class DensityMatrix:
    """PSD unit-trace operator; the state of every theorem."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidState(f"density matrix must be square, got {m.shape}")
        if linalg.operator_norm(m - m.conj().T) > STATE_TOL * max(1.0, linalg.operator_norm(m)):
            raise InvalidState("density matrix is not Hermitian within 1e-10")
        m = (m + m.conj().T) / 2.0
        if abs(np.trace(m).real - 1.0) > STATE_TOL:
            raise InvalidState(f"trace is {np.trace(m).real}, not 1 within 1e-10")
        if float(np.linalg.eigvalsh(m)[0]) < -STATE_TOL:
            raise InvalidState("density matrix has an eigenvalue below -1e-10")
        m.setflags(write=False)
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def repair_density(m: np.ndarray) -> DensityMatrix:
    """Clamp eigenvalues in [-1e-10, 0) to zero and renormalize the trace.

    Anything below -1e-10 is a logic bug upstream, not float noise, and is
    rejected.
    """
    m = np.asarray(m, dtype=complex)
    m = (m + m.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(m)
    if float(vals[0]) < -STATE_TOL:
        raise InvalidState(f"eigenvalue {vals[0]} below the -1e-10 repair floor")
    vals = np.clip(vals, 0.0, None)
    m = (vecs * vals) @ vecs.conj().T
    return DensityMatrix(m / np.trace(m).real)


@dataclass
class PureState:
    """Unit vector, optionally tagged with a bipartition (d_A, d_B)."""

    vector: np.ndarray
    dims: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(v) - 1.0) > STATE_TOL:
            raise NotNormalized("pure state vector must have unit norm within 1e-10")
        if self.dims is not None:
            d_a, d_b = self.dims
            if d_a * d_b != v.size:
                raise DimensionMismatch(f"dims {self.dims} do not factor length {v.size}")
            self.dims = (int(d_a), int(d_b))
        v.setflags(write=False)
        self.vector = v

    @property
    def dim(self) -> int:
        return self.vector.size

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.vector, self.vector.conj()))


@dataclass
class Channel:
    """CPTP map carried in one of the kraus / stinespring / choi forms."""

    kind: str
    data: np.ndarray | list[np.ndarray]
    dim_in: int
    dim_out: int
    env_dim: int | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind == "kraus":
            ops = [np.asarray(k, dtype=complex) for k in self.data]
            if not ops:
                raise InvalidChannel("empty Kraus list")
            for k in ops:
                if k.shape != (self.dim_out, self.dim_in):
                    raise InvalidChannel(f"Kraus shape {k.shape} != ({self.dim_out}, {self.dim_in})")
            gram = sum(k.conj().T @ k for k in ops)
            if linalg.operator_norm(gram - np.eye(self.dim_in)) > CHANNEL_TOL:
                raise InvalidChannel("Kraus operators are not trace preserving within 1e-9")
            for k in ops:
                k.setflags(write=False)
            self.data = ops
        elif self.kind == "stinespring":
            v = np.asarray(self.data, dtype=complex)
            if self.env_dim is None or v.shape != (self.dim_out * self.env_dim, self.dim_in):
                raise InvalidChannel(f"Stinespring shape {v.shape} needs ({self.dim_out}*env, {self.dim_in})")
            if linalg.operator_norm(v.conj().T @ v - np.eye(self.dim_in)) > CHANNEL_TOL:
                raise InvalidChannel("Stinespring operator is not an isometry within 1e-9")
            v.setflags(write=False)
            self.data = v
        elif self.kind == "choi":
            j = np.asarray(self.data, dtype=complex)
            n = self.dim_in * self.dim_out
            if j.shape != (n, n):
                raise InvalidChannel(f"Choi shape {j.shape} != ({n}, {n})")
            j = (j + j.conj().T) / 2.0
            if float(np.linalg.eigvalsh(j)[0]) < -CHANNEL_TOL:
                raise InvalidChannel("Choi matrix is not PSD within 1e-9")
            tr_out = linalg.partial_trace(j, "A", (self.dim_out, self.dim_in))
            if linalg.operator_norm(tr_out - np.eye(self.dim_in)) > CHANNEL_TOL:
                raise InvalidChannel("Tr_out(J) != 1_in within 1e-9")
            j.setflags(write=False)
            self.data = j
        else:
            raise InvalidChannel(f"unknown representation {self.kind!r}")

    @property
    def dim(self) -> int:
        if self.dim_in != self.dim_out:
            raise DimensionMismatch("channel is not square")
        return self.dim_in


@dataclass
class MixedUnitaryChannel:
    """Convex combination of unitary conjugations, N(x) = sum p_i U_i x U_i^dagger."""

    components: list[tuple[float, np.ndarray]]

    def __post_init__(self) -> None:
        comps = []
        total = 0.0
        d = None
        for p, u in self.components:
            p = float(p)
            u = np.asarray(u, dtype=complex)
            if p < 0:
                raise InvalidWeights(f"negative weight {p}")
            if d is None:
                d = u.shape[0]
            if u.shape != (d, d):
                raise DimensionMismatch("all component unitaries must share one dimension")
            if linalg.operator_norm(u.conj().T @ u - np.eye(d)) > 1e-10:
                raise InvalidChannel("component is not unitary within 1e-10")
            u.setflags(write=False)
            comps.append((p, u))
            total += p
        if abs(total - 1.0) > 1e-12:
            raise InvalidWeights(f"weights sum to {total}, not 1 within 1e-12")
        self.components = comps

    @property
    def dim(self) -> int:
        return self.components[0][1].shape[0]

    def channel(self) -> Channel:
        d = self.dim
        ops = [np.sqrt(p) * u for p, u in self.components if p > 0]
        return Channel("kraus", ops, d, d)


@dataclass
class DiamondBounds:
    """Certified lower/upper bounds on half the diamond-norm distance."""

    lower: float
    upper: float
    witnesses: str

    def __post_init__(self) -> None:
        if self.lower > self.upper + 1e-12:
            raise InvalidChannel(f"diamond lower {self.lower} exceeds upper {self.upper}")


# -- representation conversions ------------------------------------------------

def kraus_operators(channel: Channel) -> list[np.ndarray]:
    if channel.kind == "kraus":
        return list(channel.data)
    if "kraus" in channel._cache:
        return channel._cache["kraus"]
    if channel.kind == "stinespring":
        v = channel.data
        d_e = channel.env_dim
        ops = [v.reshape(channel.dim_out, d_e, channel.dim_in)[:, k, :] for k in range(d_e)]
    else:
        j = channel.data
        vals, vecs = np.linalg.eigh(j)
        cutoff = KRAUS_CUTOFF * float(np.trace(j).real)
        ops = [
            np.sqrt(vals[i]) * vecs[:, i].reshape(channel.dim_out, channel.dim_in)
            for i in range(vals.size)
            if vals[i] > cutoff
        ]
        ops = ops[::-1]  # descending eigenvalue order
    channel._cache["kraus"] = ops
    return ops


def choi_matrix(channel: Channel) -> np.ndarray:
    if channel.kind == "choi":
        return channel.data
    if "choi" not in channel._cache:
        flats = np.stack([k.reshape(-1) for k in kraus_operators(channel)])
        channel._cache["choi"] = flats.T @ flats.conj()
    return channel._cache["choi"]


def stinespring_isometry(channel: Channel, env_dim: int | None = None) -> np.ndarray:
    """Stinespring isometry with the smallest environment from the Kraus rank.

    ``env_dim`` may request a larger environment (zero-padded Kraus slices) so
    two channels can share one environment for a distance certificate.
    """
    if channel.kind == "stinespring" and env_dim in (None, channel.env_dim):
        return channel.data
    ops = kraus_operators(channel)
    d_e = len(ops) if env_dim is None else env_dim
    if d_e < len(ops):
        raise DimensionMismatch(f"environment {d_e} smaller than Kraus rank {len(ops)}")
    v = np.zeros((channel.dim_out * d_e, channel.dim_in), dtype=complex)
    for k, op in enumerate(ops):
        v[k::d_e, :] = op  # rows a*d_e + k
    return v


def convert(channel: Channel, target: str) -> Channel:
    """Convert to another representation (lossless on the channel action)."""
    if target == channel.kind:
        return channel
    if target == "kraus":
        return Channel("kraus", kraus_operators(channel), channel.dim_in, channel.dim_out)
    if target == "choi":
        return Channel("choi", choi_matrix(channel), channel.dim_in, channel.dim_out)
    if target == "stinespring":
        ops = kraus_operators(channel)
        return Channel(
            "stinespring",
            stinespring_isometry(channel),
            channel.dim_in,
            channel.dim_out,
            env_dim=len(ops),
        )
    raise InvalidChannel(f"unknown representation {target!r}")


def channel_from_kraus(ops: list[np.ndarray]) -> Channel:
    ops = [np.asarray(k, dtype=complex) for k in ops]
    return Channel("kraus", ops, ops[0].shape[1], ops[0].shape[0])


def unitary_channel(u: np.ndarray) -> Channel:
    u = np.asarray(u, dtype=complex)
    return Channel("kraus", [u], u.shape[0], u.shape[0])


def identity_channel(d: int) -> Channel:
    return Channel("kraus", [np.eye(d, dtype=complex)], d, d)


# -- actions -------------------------------------------------------------------

def apply(channel: Channel | MixedUnitaryChannel, x) -> np.ndarray:
    """Apply the channel to an operator (any representation)."""
    if isinstance(channel, MixedUnitaryChannel):
        channel = channel.channel()
    m = _mat(x)
    if m.shape != (channel.dim_in, channel.dim_in):
        raise DimensionMismatch(f"operator shape {m.shape} != channel input {channel.dim_in}")
    out = np.zeros((channel.dim_out, channel.dim_out), dtype=complex)
    for k in kraus_operators(channel):
        out += k @ m @ k.conj().T
    return out


def superoperator_matrix(channel: Channel) -> np.ndarray:
    """Matrix of the channel on row-major vectorized operators, sum_k K (x) conj(K)."""
    if "superop" not in channel._cache:
        s = np.zeros((channel.dim_out**2, channel.dim_in**2), dtype=complex)
        for k in kraus_operators(channel):
            s += np.kron(k, k.conj())
        channel._cache["superop"] = s
    return channel._cache["superop"]


def compose(outer: Channel, inner: Channel) -> Channel:
    """outer after inner; Kraus products, recompressed when the list is large."""
    if inner.dim_out != outer.dim_in:
        raise DimensionMismatch("composition dimensions do not match")
    ops = [ko @ ki for ko in kraus_operators(outer) for ki in kraus_operators(inner)]
    ch = Channel("kraus", ops, inner.dim_in, outer.dim_out)
    if len(ops) > inner.dim_in * outer.dim_out:
        ch = convert(convert(ch, "choi"), "kraus")
    return ch


def convex_combine(weights, channels: list[Channel]) -> Channel:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size != len(channels):
        raise InvalidWeights("one weight per channel required")
    if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-10:
        raise InvalidWeights("weights must form a probability vector")
    dims = {(c.dim_in, c.dim_out) for c in channels}
    if len(dims) != 1:
        raise DimensionMismatch("channels must share dimensions")
    ops = []
    for wi, ch in zip(w, channels):
        if wi > 0:
            ops.extend(np.sqrt(wi) * k for k in kraus_operators(ch))
    return Channel("kraus", ops, channels[0].dim_in, channels[0].dim_out)


def replacement_channel(tau: DensityMatrix) -> Channel:
    """x -> Tr(x) tau."""
    d = tau.dim
    vals, vecs = np.linalg.eigh(tau.matrix)
    ops = []
    for m in range(d):
        if vals[m] > 1e-14:
            root = np.sqrt(vals[m])
            for k in range(d):
                op = np.zeros((d, d), dtype=complex)
                op[:, k] = root * vecs[:, m]
                ops.append(op)
    return Channel("kraus", ops, d, d)


def dephasing_channel(basis: np.ndarray) -> Channel:
    """Projective dephasing onto the columns of a unitary basis matrix."""
    basis = np.asarray(basis, dtype=complex)
    d = basis.shape[0]
    if linalg.operator_norm(basis.conj().T @ basis - np.eye(d)) > 1e-10:
        raise InvalidChannel("dephasing basis must be unitary")
    ops = [np.outer(basis[:, i], basis[:, i].conj()) for i in range(d)]
    return Channel("kraus", ops, d, d)


# -- distances -----------------------------------------------------------------

def trace_distance(rho, sigma) -> float:
    """Half the trace norm of the difference, in [0, 1] for states."""
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise DimensionMismatch(f"state shapes differ: {a.shape} vs {b.shape}")
    return 0.5 * linalg.trace_norm_hermitian((a - b + (a - b).conj().T) / 2.0)


def deviation(channel, rho) -> float:
    """Half trace-norm deviation of rho from being a fixed point."""
    return trace_distance(apply(channel, rho), _mat(rho))


def diamond_distance_bounds(
    n: Channel,
    m: Channel,
    *,
    samples: int = 64,
    seed: int = 7,
) -> DiamondBounds:
    """Certified bounds on half the diamond distance between two channels.

    Lower: the best of ||J_Delta||_1 / (2 d_in) and a seeded sample of pure
    inputs on H (x) H (the maximally entangled state always included).
    Upper: the best of ||J_Delta||_1 / 2 and, when both channels carry
    Stinespring isometries of one shape, the Stinespring distance ||V - W||.
    """
    if (n.dim_in, n.dim_out) != (m.dim_in, m.dim_out):
        raise DimensionMismatch("channels must share dimensions")
    d = n.dim_in
    j_delta = choi_matrix(n) - choi_matrix(m)
    j_norm = linalg.trace_norm_hermitian(j_delta)
    lower = j_norm / (2.0 * d)
    upper = j_norm / 2.0
    witnesses = ["choi-trace"]

    kn, km = kraus_operators(n), kraus_operators(m)
    rng = np.random.default_rng(seed)
    best_sample = 0.0
    for idx in range(max(samples, 64)):
        if idx == 0:
            phi = np.eye(d, dtype=complex) / np.sqrt(d)  # maximally entangled
        else:
            phi = linalg.random_unit_vector(d * d, rng).reshape(d, d)
        out = np.zeros((n.dim_out * d, n.dim_out * d), dtype=complex)
        for k in kn:
            w = (k @ phi).reshape(-1)
            out += np.outer(w, w.conj())
        for k in km:
            w = (k @ phi).reshape(-1)
            out -= np.outer(w, w.conj())
        best_sample = max(best_sample, 0.5 * linalg.trace_norm_hermitian(out))
    if best_sample > lower:
        lower = best_sample
        witnesses.append("entangled-input sample")

    if (
        n.kind == "stinespring"
        and m.kind == "stinespring"
        and n.env_dim == m.env_dim
    ):
        stine = linalg.operator_norm(n.data - m.data)
        if stine <= upper:
            upper = stine
            witnesses.append("stinespring")
    lower = min(lower, upper)  # guard against float slack inversions
    return DiamondBounds(lower, upper, "; ".join(witnesses))


# -- fixed-point machinery -------------------------------------------------------

def unique_fixed_point(
    m: Channel,
    start: DensityMatrix,
    contraction: float,
    tol: float = 1e-10,
    max_iter: int = 10**6,
) -> DensityMatrix:
    """Fixed point of a strictly contractive channel by iteration.

    The caller guarantees M = (1-lambda) N + lambda Tr(.) tau for the given
    contraction rate lambda, so successive differences decay geometrically and
    the iteration stops once the tail bound delta_k (1-lambda)/lambda <= tol.
    """
    lam = float(contraction)
    if not 0.0 < lam <= 1.0:
        raise InvalidWeights(f"contraction must be in (0, 1], got {lam}")
    s = superoperator_matrix(m)
    d = m.dim
    cur = start.matrix.astype(complex).reshape(-1)
    start_gap = None
    for _ in range(max_iter):
        nxt = s @ cur
        delta = linalg.trace_norm_hermitian((nxt - cur).reshape(d, d))
        if start_gap is None:
            start_gap = delta
        if delta * (1.0 - lam) / lam <= tol:
            out = nxt.reshape(d, d)
            sigma = DensityMatrix((out + out.conj().T) / 2.0)
            gap = linalg.trace_norm_hermitian(sigma.matrix - start.matrix)
            # Lemma bound, asserted on every run, not merely tested.
            assert gap <= start_gap / lam + 1e-9, (
                f"fixed point moved {gap}, beyond the {start_gap / lam} guarantee"
            )
            return sigma
        cur = nxt
    raise NoConvergence(f"no convergence after {max_iter} iterations")


def is_unital(n: Channel | MixedUnitaryChannel, tol: float = CHANNEL_TOL) -> bool:
    if isinstance(n, MixedUnitaryChannel):
        return True
    d = n.dim
    return linalg.operator_norm(apply(n, np.eye(d)) - np.eye(d)) <= tol


def fixed_point_space_dimension(n: Channel | MixedUnitaryChannel, tol: float = 1e-8) -> int:
    """Number of superoperator eigenvalues within tol of 1."""
    if isinstance(n, MixedUnitaryChannel):
        n = n.channel()
    vals = np.linalg.eigvals(superoperator_matrix(n))
    return int(np.sum(np.abs(vals - 1.0) <= tol))


def invariant_subspace_residual(n: Channel | MixedUnitaryChannel, pi: np.ndarray) -> float:
    """Tr((1 - pi) N(pi)); zero exactly when ran(pi) is invariant."""
    pi = np.asarray(pi, dtype=complex)
    if not linalg.is_projection(pi):
        raise NotAProjection("invariant-subspace test needs an orthogonal projection")
    d = pi.shape[0]
    val = float(np.trace((np.eye(d) - pi) @ apply(n, pi)).real)
    if val < -1e-12:
        raise InvalidChannel(f"negative residual {val} signals a non-CP map")
    return val


# -- classical embeddings --------------------------------------------------------

def embed_classical_state(p) -> DensityMatrix:
    """Diagonal density matrix rho_P = sum_x p_x |x><x|."""
    entries = np.asarray(getattr(p, "entries", p), dtype=float)
    return DensityMatrix(np.diag(entries.astype(complex)))


def embed_classical_channel(t) -> Channel:
    """N_T = sum_xy T_xy |x><y| (.) |y><x| with Kraus sqrt(T_xy) |x><y|."""
    m = np.asarray(getattr(t, "matrix", t), dtype=float)
    d = m.shape[0]
    ops = []
    for x in range(d):
        for y in range(d):
            if m[x, y] > 0.0:
                op = np.zeros((d, d), dtype=complex)
                op[x, y] = np.sqrt(m[x, y])
                ops.append(op)
    return Channel("kraus", ops, d, d)
