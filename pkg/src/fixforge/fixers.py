"""Constructive repairs of approximate fixed points, with certified bounds.

Every fixer takes a state and a channel that almost fixes it and returns a
nearby exact fixed-point pair of the same structural class, together with the
measured distances and the explicit claims they are certified against:

    general          f = g = sqrt(eps)
    unitary          f = g = 4 d^(5/4) sqrt(eps)      (channel in operator norm)
    mixed-unitary    f = 4 d^2 eps^(1/5),  g = 7 d^2 eps^(1/5)
    unital           f = g = 7 d^(5/3) eps^(1/6)
    local-on-pure    f = g = 7 sqrt(min(d_A, d_B)) eps^(1/3)

Whenever a claim reaches 1 the statement is vacuous and the canonical trivial
pair is returned instead, flagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import clustering, linalg, quantum, rotations
from .errors import (
    CertificationError,
    DegenerateTruncation,
    DimensionMismatch,
    InvalidChannel,
    NotUnital,
    OperatorInequalityViolated,
    PromiseViolated,
    SupportsNotOrthogonal,
)
from .quantum import Channel, DensityMatrix, DiamondBounds, MixedUnitaryChannel, PureState

RESIDUAL_TOL = 1e-9
CLAIM_SLACK = 1e-9
EXACT_EPS = 1e-12


@dataclass
class FixResult:
    """An exact fixed-point pair with its certificates.

    The channel certificate is always a DiamondBounds bracket on half the
    diamond distance; certificate_norm records whether its upper endpoint was
    obtained directly in diamond norm or as an operator-norm distance (which
    dominates half the diamond distance for isometric dilations).
    """

    fix_class: str
    sigma: DensityMatrix | PureState
    fixed_channel: Channel | np.ndarray | MixedUnitaryChannel
    epsilon_used: float
    state_bound_claimed: float
    channel_bound_claimed: float
    state_distance_measured: float
    channel_distance_certificate: DiamondBounds
    certificate_norm: str
    fixed_point_residual: float
    trivial: bool = False
    notes: str = ""
    local_part: Channel | None = None

    def __post_init__(self) -> None:
        if self.fixed_point_residual > RESIDUAL_TOL:
            raise CertificationError(
                f"fixed-point residual {self.fixed_point_residual} above 1e-9"
            )
        if self.state_distance_measured > self.state_bound_claimed + CLAIM_SLACK:
            raise CertificationError(
                f"state moved {self.state_distance_measured}, claimed "
                f"{self.state_bound_claimed}"
            )
        if self.channel_distance_certificate.upper > self.channel_bound_claimed + CLAIM_SLACK:
            raise CertificationError(
                f"channel certificate {self.channel_distance_certificate.upper} above "
                f"claim {self.channel_bound_claimed}"
            )
        self._check_class()

    def _check_class(self) -> None:
        kind = self.fix_class
        ch = self.fixed_channel
        if kind == "general" and not isinstance(ch, Channel):
            raise CertificationError("general fixer must return a Channel")
        if kind == "unitary":
            u = np.asarray(ch, dtype=complex)
            if linalg.operator_norm(u.conj().T @ u - np.eye(u.shape[0])) > 1e-10:
                raise CertificationError("unitary fixer left the unitary class")
        if kind == "mixed_unitary" and not isinstance(ch, MixedUnitaryChannel):
            raise CertificationError("mixed-unitary fixer left its class")
        if kind == "unital":
            if not isinstance(ch, Channel) or not quantum.is_unital(ch, 1e-9):
                raise CertificationError("unital fixer left the unital class")
        if kind == "local_pure":
            if not isinstance(self.sigma, PureState) or self.sigma.dims is None:
                raise CertificationError("local fixer must return a bipartite pure state")
            if not isinstance(self.local_part, Channel):
                raise CertificationError("local fixer must expose its one-sided channel")


@dataclass
class GenDepInput:
    """Targets and sources for the depolarizing pullback.

    Each source must sit under (1+p) times its target in the operator order,
    and the sources must occupy mutually orthogonal supports; that is exactly
    what makes a (1-p) id + p (replace-per-block) channel able to pull every
    source back onto its target.
    """

    pairs: list[tuple[DensityMatrix, DensityMatrix]]
    p: float

    def __post_init__(self) -> None:
        p = float(self.p)
        if not 0.0 <= p <= 1.0:
            raise OperatorInequalityViolated(f"mixing weight {p} outside [0, 1]")
        self.p = p
        if not self.pairs:
            raise DimensionMismatch("at least one (target, source) pair required")
        supports = []
        for target, source in self.pairs:
            gap = (1.0 + p) * target.matrix - source.matrix
            low = float(np.linalg.eigvalsh((gap + gap.conj().T) / 2.0)[0])
            if low < -1e-9:
                raise OperatorInequalityViolated(
                    f"source exceeds (1+p) target by eigenvalue {low}"
                )
            if p == 0.0 and quantum.trace_distance(target, source) > 1e-9:
                raise OperatorInequalityViolated("p = 0 requires source = target")
            supports.append(_support_projector(source.matrix))
        for i in range(len(supports)):
            for j in range(i):
                if linalg.operator_norm(supports[i] @ supports[j]) > 1e-9:
                    raise SupportsNotOrthogonal(f"sources {j} and {i} share support")


@dataclass
class ComponentDeviation:
    """How far one mixture component moves the state, against its bounds."""

    weight: float
    hs_deviation: float
    hs_bound: float
    trace_deviation: float
    trace_bound: float


@dataclass
class PartDeviation:
    """Deviation of one canonical part of an almost fixed operator."""

    name: str
    operator: np.ndarray
    trace: float
    deviation: float
    bound: float


@dataclass
class FixedPartsReport:
    """All four signed parts of an almost fixed operator with their bounds."""

    parts: list[PartDeviation]
    real_deviation: float
    imag_deviation: float
    epsilon_used: float

    def part(self, name: str) -> PartDeviation:
        for p in self.parts:
            if p.name == name:
                return p
        raise KeyError(name)


def _support_projector(m: np.ndarray, rel_cutoff: float = 1e-12) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    cutoff = rel_cutoff * max(float(np.trace(m).real), 1.0e-300)
    cols = vecs[:, vals >= cutoff]
    return cols @ cols.conj().T


def _resolve_epsilon(
    measured: float, supplied: float | None, widen: bool
) -> float:
    """Promise handling: reject violations, otherwise pick the working eps."""
    if supplied is not None and measured > float(supplied) + 1e-9:
        raise PromiseViolated(
            f"measured deviation {measured} exceeds the promised {supplied}"
        )
    if supplied is None:
        return measured
    return max(float(supplied), measured) if widen else float(supplied)


def _choi_half_gap(a: Channel, b: Channel) -> float:
    return 0.5 * linalg.trace_norm_hermitian(quantum.choi_matrix(a) - quantum.choi_matrix(b))


def _choi_bracket(a: Channel, b: Channel, witness: str) -> DiamondBounds:
    half = _choi_half_gap(a, b)
    return DiamondBounds(half / a.dim_in, min(1.0, half), witness)


def _exact_certificate() -> DiamondBounds:
    return DiamondBounds(0.0, 0.0, "channel unchanged")


# -- general channels -----------------------------------------------------------------


def fix_general(rho: DensityMatrix, channel: Channel, epsilon: float | None = None) -> FixResult:
    """Repair any channel: mix in a replacement onto rho and iterate to its
    fixed point; both state and channel move at most sqrt(eps)."""
    measured = quantum.deviation(channel, rho)
    eps = _resolve_epsilon(measured, epsilon, widen=True)
    claim = float(np.sqrt(eps))

    if eps <= EXACT_EPS:
        return FixResult(
            "general", rho, channel, eps, claim, claim, 0.0,
            _exact_certificate(), "diamond", measured,
            notes="deviation at numerical zero; pair returned unchanged",
        )

    lam = min(1.0, float(np.sqrt(eps)))
    replacement = quantum.replacement_channel(rho)
    mixed = quantum.convex_combine([1.0 - lam, lam], [channel, replacement])
    sigma = quantum.unique_fixed_point(mixed, rho, lam, tol=1e-10)
    residual = quantum.deviation(mixed, sigma)
    state_distance = quantum.trace_distance(sigma, rho)

    half_gap = _choi_half_gap(replacement, channel)
    cert = DiamondBounds(
        lam * half_gap / channel.dim,
        lam * min(1.0, half_gap),
        "choi-trace scaled by the mixing weight",
    )
    return FixResult(
        "general", sigma, mixed, eps, claim, claim, state_distance,
        cert, "diamond", residual,
    )


# -- unitary channels -----------------------------------------------------------------


def fix_unitary(rho: DensityMatrix, unitary: np.ndarray, epsilon: float | None = None) -> FixResult:
    """Repair a unitary: flatten rho's spectrum into clusters and rotate the
    unitary so it permutes nothing across them.

    The repaired state depends only on (rho, eps), never on the unitary.
    """
    u = np.asarray(unitary, dtype=complex)
    d = rho.dim
    if u.shape != (d, d):
        raise DimensionMismatch(f"unitary shape {u.shape} does not match state dim {d}")
    if linalg.operator_norm(u.conj().T @ u - np.eye(d)) > 1e-10:
        raise InvalidChannel("input is not unitary within 1e-10")
    measured = quantum.trace_distance(u @ rho.matrix @ u.conj().T, rho)
    eps = _resolve_epsilon(measured, epsilon, widen=False)
    claim = 4.0 * d**1.25 * float(np.sqrt(eps))

    if claim >= 1.0:
        mixed_state = DensityMatrix(np.eye(d) / d)
        residual = quantum.trace_distance(u @ mixed_state.matrix @ u.conj().T, mixed_state)
        return FixResult(
            "unitary", mixed_state, u, eps, claim, claim,
            quantum.trace_distance(mixed_state, rho),
            _exact_certificate(), "operator", residual,
            trivial=True, notes="claimed bound reached 1; maximally mixed fallback",
        )
    if eps <= EXACT_EPS and measured <= 1e-10:
        return FixResult(
            "unitary", rho, u, eps, claim, claim, 0.0,
            _exact_certificate(), "operator", measured,
            notes="deviation at numerical zero; pair returned unchanged",
        )

    delta = float(np.sqrt(48.0 * eps)) / d**0.75
    decomp = clustering.cluster_spectrum(rho, delta)
    sigma = clustering.cluster_state(decomp)
    targets = decomp.projections
    moved = [u @ e @ u.conj().T for e in targets]
    rotation = rotations.align_projection_family(moved, targets)
    v = rotation.unitary @ u

    residual = quantum.trace_distance(v @ sigma.matrix @ v.conj().T, sigma)
    state_distance = quantum.trace_distance(sigma, rho)
    op_gap = linalg.operator_norm(v - u)
    lower = _choi_half_gap(quantum.unitary_channel(v), quantum.unitary_channel(u)) / d
    cert = DiamondBounds(
        min(lower, op_gap),
        op_gap,
        "operator norm of the unitary gap; dominates half the diamond distance",
    )
    return FixResult(
        "unitary", sigma, v, eps, claim, claim, state_distance, cert,
        "operator", residual,
        notes="certificate reported in operator norm as claimed; the same number "
        "upper-bounds half the diamond distance (shared trivial environment)",
    )


# -- mixed-unitary channels -------------------------------------------------------------


def mixture_component_deviation(
    rho: DensityMatrix,
    mixed: MixedUnitaryChannel,
    epsilon: float | None = None,
) -> list[ComponentDeviation]:
    """Per-component deviations of a mixed-unitary channel near a fixed state.

    A component carrying weight p can move the state by at most sqrt(4 eps/p)
    in Hilbert-Schmidt norm and sqrt(d eps/p) in trace distance.
    """
    measured = quantum.deviation(mixed, rho)
    eps = _resolve_epsilon(measured, epsilon, widen=True)
    d = rho.dim
    out = []
    for p, u in mixed.components:
        gap = u @ rho.matrix @ u.conj().T - rho.matrix
        hs = linalg.hs_norm(gap)
        tr = 0.5 * linalg.trace_norm_hermitian(gap)
        hs_bound = float(np.sqrt(4.0 * eps / p)) if p > 0 else np.inf
        tr_bound = float(np.sqrt(d * eps / p)) if p > 0 else np.inf
        if hs > hs_bound + 1e-9 or tr > tr_bound + 1e-9:
            raise CertificationError(
                f"component deviation ({hs}, {tr}) breaks bounds ({hs_bound}, {tr_bound})"
            )
        out.append(ComponentDeviation(p, hs, hs_bound, tr, tr_bound))
    return out


def fix_mixed_unitary(
    rho: DensityMatrix,
    mixed: MixedUnitaryChannel,
    epsilon: float | None = None,
) -> FixResult:
    """Repair a mixed-unitary channel componentwise.

    Heavy components are repaired by the unitary fixer against one shared
    flattened state; light components are replaced by the identity and their
    weight absorbed into the certificate tail.
    """
    measured = quantum.deviation(mixed, rho)
    eps = _resolve_epsilon(measured, epsilon, widen=True)
    d = rho.dim
    state_claim = 4.0 * d**2 * eps**0.2
    channel_claim = 7.0 * d**2 * eps**0.2

    if state_claim >= 1.0:
        mixed_state = DensityMatrix(np.eye(d) / d)
        return FixResult(
            "mixed_unitary", mixed_state, mixed, eps, state_claim, channel_claim,
            quantum.trace_distance(mixed_state, rho),
            _exact_certificate(), "operator", quantum.deviation(mixed, mixed_state),
            trivial=True, notes="claimed bound reached 1; maximally mixed fallback",
        )
    if eps <= 1e-14:
        return FixResult(
            "mixed_unitary", rho, mixed, eps, state_claim, channel_claim, 0.0,
            _exact_certificate(), "operator", measured,
            notes="deviation at numerical zero; pair returned unchanged",
        )

    delta = 4.0**0.8 * eps**0.2 / d**2
    inner_eps = float(np.sqrt(d * eps / delta))
    heavy = [i for i, (p, _) in enumerate(mixed.components) if p >= delta]
    notes = []
    if len(mixed.components) > d**4:
        notes.append(
            "component count exceeds d^4; the light-component tail may not be "
            "covered by the claimed bound"
        )

    components: list[tuple[float, np.ndarray]] = []
    sigma: DensityMatrix | None = None
    cert_upper = 0.0
    for i, (p, u) in enumerate(mixed.components):
        if i in heavy:
            repaired = fix_unitary(rho, u, epsilon=inner_eps)
            if repaired.trivial:
                raise CertificationError(
                    "component repair fell back to trivial inside a nontrivial mixture"
                )
            if sigma is None:
                sigma = repaired.sigma
            elif not np.array_equal(sigma.matrix, repaired.sigma.matrix):
                raise CertificationError("component repairs disagree on the shared state")
            v = np.asarray(repaired.fixed_channel)
            components.append((p, v))
            cert_upper += p * linalg.operator_norm(v - u)
        else:
            components.append((p, np.eye(d, dtype=complex)))
            cert_upper += p
    if sigma is None:
        # All weight below the cutoff: keep the flattened state, map to identity.
        inner_delta = float(np.sqrt(48.0 * inner_eps)) / d**0.75
        sigma = clustering.cluster_state(clustering.cluster_spectrum(rho, inner_delta))
        notes.append("no component reached the weight cutoff; identity mixture returned")

    fixed = MixedUnitaryChannel(components)
    residual = quantum.deviation(fixed, sigma)
    state_distance = quantum.trace_distance(sigma, rho)
    lower = _choi_half_gap(fixed.channel(), mixed.channel()) / d
    cert = DiamondBounds(
        min(lower, cert_upper),
        cert_upper,
        "componentwise operator gaps plus the light-component tail",
    )
    return FixResult(
        "mixed_unitary", sigma, fixed, eps, state_claim, channel_claim,
        state_distance, cert, "operator", residual,
        notes="; ".join(notes),
    )


# -- supporting lemmas ------------------------------------------------------------------


def approximate_fixed_parts(
    a: np.ndarray,
    channel: Channel,
    epsilon: float | None = None,
) -> FixedPartsReport:
    """Split an almost fixed operator into signed Hermitian parts.

    The real and imaginary parts inherit the deviation eps unchanged; each
    signed part deviates by at most (3/2) eps + sqrt(eps tr(part)).
    """
    a = np.asarray(a, dtype=complex)
    moved = quantum.apply(channel, a)
    measured = 0.5 * linalg.trace_norm(moved - a)
    eps = _resolve_epsilon(measured, epsilon, widen=True)

    real = (a + a.conj().T) / 2.0
    imag = (a - a.conj().T) / 2.0j
    parts: list[PartDeviation] = []
    flat_devs: list[float] = []
    for name, herm in (("real", real), ("imag", imag)):
        dev = 0.5 * linalg.trace_norm_hermitian(quantum.apply(channel, herm) - herm)
        if dev > eps + 1e-9:
            raise CertificationError(f"{name} part deviates {dev}, beyond eps {eps}")
        flat_devs.append(dev)
        vals, vecs = np.linalg.eigh(herm)
        plus = (vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T
        minus = (vecs * np.clip(-vals, 0.0, None)) @ vecs.conj().T
        for sign, part in (("plus", plus), ("minus", minus)):
            trace = float(np.trace(part).real)
            dev_part = 0.5 * linalg.trace_norm_hermitian(quantum.apply(channel, part) - part)
            bound = 1.5 * eps + float(np.sqrt(eps * trace))
            if dev_part > bound + 1e-9:
                raise CertificationError(
                    f"{name} {sign} part deviates {dev_part}, beyond {bound}"
                )
            parts.append(PartDeviation(f"{name}_{sign}", part, trace, dev_part, bound))
    return FixedPartsReport(parts, flat_devs[0], flat_devs[1], eps)


def cumulative_projection_deviation(
    rho: DensityMatrix,
    channel: Channel,
    epsilon: float | None = None,
) -> list[tuple[int, float, float]]:
    """Deviation of each cumulative spectral projection under a unital channel.

    For the j-th distinct eigenvalue gap delta_j, the projection onto the top
    j eigenspaces of an almost fixed state is itself almost fixed, within
    5 sqrt(eps)/delta_j. Returns (j, bound, measured) for j = 1..m-1.
    """
    if not quantum.is_unital(channel, 1e-9):
        raise NotUnital("cumulative projection bounds need a unital channel")
    measured = quantum.deviation(channel, rho)
    eps = _resolve_epsilon(measured, epsilon, widen=True)
    if eps > 1.0:
        raise PromiseViolated(f"deviation promise {eps} exceeds 1")

    values, _, blocks = clustering.merged_spectral_points(rho.matrix)
    out: list[tuple[int, float, float]] = []
    cumulative = np.zeros((rho.dim, rho.dim), dtype=complex)
    for j in range(values.size - 1):
        cumulative = cumulative + blocks[j] @ blocks[j].conj().T
        gap = float(values[j] - values[j + 1])
        bound = 5.0 * float(np.sqrt(eps)) / gap
        dev = 0.5 * linalg.trace_norm_hermitian(quantum.apply(channel, cumulative) - cumulative)
        if dev > bound + 1e-9:
            raise CertificationError(
                f"cumulative projection {j + 1} deviates {dev}, beyond {bound}"
            )
        out.append((j + 1, bound, dev))
    return out


def generalized_depolarizing_pullback(gen_input: GenDepInput) -> Channel:
    """Channel (1-p) id + p (measure-block-and-replace) mapping sources to targets.

    The complement of the source supports is sent to its maximally mixed
    state, which keeps the construction unital-friendly.
    """
    p = gen_input.p
    d = gen_input.pairs[0][0].dim
    if p == 0.0:
        return quantum.identity_channel(d)

    ops: list[np.ndarray] = [np.sqrt(1.0 - p) * np.eye(d, dtype=complex)] if p < 1.0 else []
    total_support = np.zeros((d, d), dtype=complex)
    blocks: list[tuple[np.ndarray, np.ndarray]] = []  # (basis of support, replacement)
    for target, source in gen_input.pairs:
        vals, vecs = np.linalg.eigh(source.matrix)
        cutoff = 1e-12 * float(np.trace(source.matrix).real)
        basis = vecs[:, vals >= cutoff]
        omega = (target.matrix - (1.0 - p) * source.matrix) / p
        blocks.append((basis, omega))
        total_support = total_support + basis @ basis.conj().T
    # Complement block: maximally mixed on whatever the sources leave out.
    comp_vals, comp_vecs = np.linalg.eigh(np.eye(d) - total_support)
    comp_basis = comp_vecs[:, comp_vals >= 0.5]
    if comp_basis.shape[1] > 0:
        blocks.append(
            (comp_basis, comp_basis @ comp_basis.conj().T / comp_basis.shape[1])
        )

    for basis, omega in blocks:
        w_vals, w_vecs = np.linalg.eigh((omega + omega.conj().T) / 2.0)
        if float(w_vals[0]) < -1e-9:
            raise OperatorInequalityViolated(
                f"replacement block has eigenvalue {w_vals[0]}"
            )
        w_vals = np.clip(w_vals, 0.0, None)
        w_vals = w_vals / w_vals.sum()
        for m in range(w_vals.size):
            if w_vals[m] <= 1e-14:
                continue
            for k in range(basis.shape[1]):
                ops.append(
                    np.sqrt(p * w_vals[m]) * np.outer(w_vecs[:, m], basis[:, k].conj())
                )
    phi = Channel("kraus", ops, d, d)
    for target, source in gen_input.pairs:
        pulled = quantum.apply(phi, source)
        if 0.5 * linalg.trace_norm_hermitian(pulled - target.matrix) > 1e-9:
            raise CertificationError("pullback failed to recover a target within 1e-9")
    return phi


# -- unital channels -----------------------------------------------------------------


def fix_unital(rho: DensityMatrix, channel: Channel, epsilon: float | None = None) -> FixResult:
    """Repair a unital channel while keeping it exactly unital.

    The state's spectrum is flattened into clusters; the channel's dilation is
    rotated so each cluster's block maps into itself, then a depolarizing
    pullback snaps every block average back into place.
    """
    if not quantum.is_unital(channel, 1e-9):
        raise NotUnital("input channel is not unital within 1e-9")
    d = rho.dim
    measured = quantum.deviation(channel, rho)
    eps = _resolve_epsilon(measured, epsilon, widen=True)
    claim = 7.0 * d ** (5.0 / 3.0) * eps ** (1.0 / 6.0)

    if claim >= 1.0 or eps > 1.0:
        mixed_state = DensityMatrix(np.eye(d) / d)
        residual = quantum.deviation(channel, mixed_state)
        return FixResult(
            "unital", mixed_state, channel, eps, claim, claim,
            quantum.trace_distance(mixed_state, rho),
            _exact_certificate(), "diamond", residual,
            trivial=True, notes="claimed bound reached 1; maximally mixed fallback",
        )
    if eps <= 1e-14:
        return FixResult(
            "unital", rho, channel, eps, claim, claim, 0.0,
            _exact_certificate(), "diamond", measured,
            notes="deviation at numerical zero; pair returned unchanged",
        )

    delta = 48.0 ** (2.0 / 3.0) * eps ** (1.0 / 6.0) / d ** (1.0 / 3.0)
    cumulative_projection_deviation(rho, channel, eps)
    decomp = clustering.cluster_spectrum(rho, delta)
    sigma = clustering.cluster_state(decomp)

    v = quantum.stinespring_isometry(channel)
    d_env = v.shape[0] // d
    budget = float(np.sqrt(10.0 * np.sqrt(eps) / delta))
    rotated_blocks = []
    for e_l, basis in zip(decomp.projections, decomp.cluster_bases):
        frame = [v @ basis[:, j] for j in range(basis.shape[1])]
        big_target = np.kron(e_l, np.eye(d_env))
        u_l = rotations.align_into_subspace(frame, big_target, "summed", eps=budget)
        rotated_blocks.append(u_l.unitary @ v @ e_l)
    v_prime = sum(rotated_blocks)
    repaired = Channel("stinespring", v_prime, d, d, env_dim=d_env)

    pairs = []
    for e_l in decomp.projections:
        d_l = float(np.trace(e_l).real)
        target = DensityMatrix(e_l / d_l)
        source = quantum.repair_density(quantum.apply(repaired, e_l) / d_l)
        pairs.append((target, source))
    p = min(1.0, 17.0 * d**1.5 * eps**0.25 / float(np.sqrt(delta)))
    pullback = generalized_depolarizing_pullback(GenDepInput(pairs, p))
    fixed = quantum.compose(pullback, repaired)

    residual = quantum.deviation(fixed, sigma)
    state_distance = quantum.trace_distance(sigma, rho)
    stine_gap = linalg.operator_norm(v_prime - v)
    pull_upper = min(p, _choi_half_gap(pullback, quantum.identity_channel(d)))
    cert_upper = pull_upper + stine_gap
    lower = _choi_half_gap(fixed, channel) / d
    cert = DiamondBounds(
        min(lower, cert_upper),
        cert_upper,
        "stinespring rotation plus depolarizing pullback triangle",
    )
    unitality = linalg.operator_norm(quantum.apply(fixed, np.eye(d)) - np.eye(d))
    if unitality > 1e-9:
        raise CertificationError(f"repaired channel lost unitality by {unitality}")
    return FixResult(
        "unital", sigma, fixed, eps, claim, claim, state_distance, cert,
        "diamond", residual,
    )


# -- local channels on bipartite pure states ------------------------------------------


def _local_channel(m_b: Channel, d_a: int) -> Channel:
    ops = [np.kron(np.eye(d_a, dtype=complex), k) for k in quantum.kraus_operators(m_b)]
    return Channel("kraus", ops, d_a * m_b.dim_in, d_a * m_b.dim_out)


def fix_local_pure(
    psi: PureState,
    channel_b: Channel,
    epsilon: float | None = None,
) -> FixResult:
    """Repair a one-sided channel so it exactly fixes a nearby pure state.

    The state is truncated to its dominant Schmidt components (a function of
    the state and eps only); the channel's dilation is rotated so those
    components ride through it untouched up to a global phase that cancels.
    """
    if psi.dims is None:
        raise DimensionMismatch("the pure state needs explicit (d_A, d_B) dims")
    d_a, d_b = psi.dims
    if channel_b.dim_in != d_b or channel_b.dim_out != d_b:
        raise DimensionMismatch("channel must act on the B factor")
    d_star = min(d_a, d_b)
    full = _local_channel(channel_b, d_a)
    measured = quantum.trace_distance(quantum.apply(full, psi), psi)
    eps = _resolve_epsilon(measured, epsilon, widen=False)
    claim = 7.0 * float(np.sqrt(d_star)) * eps ** (1.0 / 3.0)

    if claim >= 1.0:
        ident = quantum.identity_channel(d_b)
        return FixResult(
            "local_pure", psi, _local_channel(ident, d_a), eps, claim, claim, 0.0,
            _choi_bracket(ident, channel_b, "choi-trace"), "diamond", 0.0,
            trivial=True, notes="claimed bound reached 1; identity channel fallback",
            local_part=ident,
        )
    if eps <= EXACT_EPS and measured <= 1e-10:
        return FixResult(
            "local_pure", psi, full, eps, claim, claim, 0.0,
            _exact_certificate(), "diamond", measured,
            notes="deviation at numerical zero; pair returned unchanged",
            local_part=channel_b,
        )

    # The repaired state: truncate the Schmidt spectrum at delta. Everything
    # here depends only on (psi, eps).
    probs, vecs_a, vecs_b = linalg.schmidt_decompose(psi.vector, (d_a, d_b))
    delta = 15.0 ** (2.0 / 3.0) * eps ** (1.0 / 3.0)
    kept = [j for j, mu in enumerate(probs) if np.sqrt(mu) >= max(delta, 1e-12)]
    if not kept:
        raise DegenerateTruncation("every Schmidt coefficient fell below the cutoff")
    kept_mass = float(sum(probs[j] for j in kept))
    truncated = sum(
        np.sqrt(probs[j] / kept_mass) * np.kron(vecs_a[j], vecs_b[j]) for j in kept
    )
    sigma = PureState(truncated, dims=(d_a, d_b))

    v = quantum.stinespring_isometry(channel_b)
    d_env = v.shape[0] // d_b
    theta_mat = (psi.vector.reshape(d_a, d_b) @ v.T).reshape(d_a * d_b, d_env)
    dec = linalg.svd(theta_mat)
    nu1 = float(dec.singular_values[0] ** 2)
    if nu1 < 1.0 - eps - 1e-9:
        raise PromiseViolated(
            f"dominant dilation weight {nu1} below 1 - eps; promise does not hold"
        )
    alpha1 = dec.left_vectors[:, 0]
    beta1 = dec.right_vectors[:, 0].conj()  # row of vh, the environment factor
    overlap = np.vdot(alpha1, psi.vector)
    if abs(overlap) < 1e-12:
        raise DegenerateTruncation("dilation top component is orthogonal to the state")
    phase = overlap / abs(overlap)

    sources = [v @ vecs_b[j] for j in kept]
    targets = [np.conj(phase) * np.kron(vecs_b[j], beta1) for j in kept]
    rotation = rotations.align_vectors(sources, targets)
    v_prime = rotation.unitary @ v
    m_b = Channel("stinespring", v_prime, d_b, d_b, env_dim=d_env)
    fixed = _local_channel(m_b, d_a)

    residual = quantum.trace_distance(quantum.apply(fixed, sigma), sigma)
    state_distance = quantum.trace_distance(sigma, psi)
    op_gap = linalg.operator_norm(v_prime - v)
    lower = _choi_half_gap(m_b, channel_b) / d_b
    cert = DiamondBounds(
        min(lower, op_gap),
        op_gap,
        "stinespring gap on the B factor; the identity factor adds nothing",
    )
    return FixResult(
        "local_pure", sigma, fixed, eps, claim, claim, state_distance, cert,
        "diamond", residual, local_part=m_b,
    )
