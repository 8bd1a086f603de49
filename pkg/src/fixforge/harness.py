"""Randomized end-to-end verification: instance generation, suites, CSV rows.

Suites re-run the repair constructions on seeded random instances and turn
every module-level invariant into a pass/fail record. Instance generation is
exact-then-perturb: build a channel of the requested class with a known exact
fixed point, then kick the state (or the pure vector) until the measured
deviation lands in the [0.5, 1.0] band of the target epsilon.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import classical, clustering, counterexamples, fixers, linalg, quantum, rotations
from .classical import ProbabilityVector, StochasticMatrix
from .errors import FixforgeError, GenerationFailed, UnknownSuite
from .quantum import Channel, DensityMatrix, MixedUnitaryChannel, PureState

FIX_CLASSES = ("general", "classical", "unitary", "mixed_unitary", "unital", "local_pure")
EXTRA_SUITES = ("rotations", "lemmas", "counterexamples", "scaling")
SUITES = FIX_CLASSES + EXTRA_SUITES

CSV_HEADER = (
    "suite,class,d,d_env,epsilon,f_claim,f_meas,g_claim,"
    "g_cert_upper,g_cert_lower,residual,seed,pass"
)
BAND_LOW, BAND_HIGH = 0.5, 1.0
MAX_TUNING_ROUNDS = 48
RESIDUAL_TOL = 1e-9

DEFAULT_DIMS = {
    "general": list(range(2, 13)),
    "classical": [2, 4, 8, 16, 32, 64],
    "unitary": list(range(2, 11)),
    "mixed_unitary": list(range(2, 7)),
    "unital": list(range(2, 9)),
    "local_pure": [(a, b) for a in range(2, 6) for b in range(2, 6)],
}
DEFAULT_EPSILONS = {
    "general": [1e-2, 1e-3, 1e-4],
    "classical": [1e-2, 1e-3, 1e-4],
    "unitary": [1e-4, 1e-5, 1e-6],
    "mixed_unitary": [1e-8, 1e-10, 1e-12],
    "unital": [1e-9, 1e-11, 1e-12],
    "local_pure": [1e-4, 1e-6],
}
DEFAULT_COUNTS = {
    "general": 10,
    "classical": 17,
    "unitary": 8,
    "mixed_unitary": 7,
    "unital": 5,
    "local_pure": 4,
}


@dataclass
class InstanceSpec:
    """Everything that determines one random instance, bit for bit."""

    fix_class: str
    dim: int
    d_a: int | None = None
    d_b: int | None = None
    epsilon_target: float = 1e-3
    seed: int = 0
    strategy: str = "exact_then_perturb"
    index: int = 0

    def __post_init__(self) -> None:
        if self.fix_class not in FIX_CLASSES:
            raise UnknownSuite(f"unknown fix class {self.fix_class!r}")
        if self.fix_class == "local_pure" and (self.d_a is None or self.d_b is None):
            raise UnknownSuite("local_pure instances need d_a and d_b")
        if self.strategy not in ("exact_then_perturb", "promise_measured"):
            raise UnknownSuite(f"unknown strategy {self.strategy!r}")


@dataclass
class InstanceRecord:
    """One CSV row; empty fields stay None and render as empty strings."""

    suite: str
    fix_class: str
    d: int
    d_env: int | None
    epsilon: float | None
    f_claim: float | None
    f_meas: float | None
    g_claim: float | None
    g_cert_upper: float | None
    g_cert_lower: float | None
    residual: float | None
    seed: int
    passed: bool

    def row(self) -> str:
        def cell(x) -> str:
            return "" if x is None else repr(float(x))

        return ",".join(
            [
                self.suite,
                self.fix_class,
                str(self.d),
                "" if self.d_env is None else str(self.d_env),
                cell(self.epsilon),
                cell(self.f_claim),
                cell(self.f_meas),
                cell(self.g_claim),
                cell(self.g_cert_upper),
                cell(self.g_cert_lower),
                cell(self.residual),
                str(self.seed),
                "1" if self.passed else "0",
            ]
        )


@dataclass
class SuiteReport:
    name: str
    count: int
    records: list[InstanceRecord] = field(default_factory=list)
    passed: bool = True
    wall_time_s: float = 0.0

    def csv_body(self) -> str:
        return "\n".join(r.row() for r in self.records)


def write_csv(reports: list[SuiteReport], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for report in reports:
            body = report.csv_body()
            if body:
                fh.write(body + "\n")


# -- instance generation ----------------------------------------------------------


def _spec_rng(spec: InstanceSpec) -> np.random.Generator:
    eps_key = int(np.float64(spec.epsilon_target).view(np.uint64))
    return np.random.default_rng(
        [
            spec.seed,
            FIX_CLASSES.index(spec.fix_class),
            spec.dim,
            spec.d_a or 0,
            spec.d_b or 0,
            eps_key,
            spec.index,
        ]
    )


def _floored_spectrum(d: int, rng: np.random.Generator) -> np.ndarray:
    # Eigenvalues at least 1/(2d): small kicks never push the state negative.
    return (rng.dirichlet(np.ones(d)) + 1.0 / d) / 2.0


def _traceless_direction(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (g + g.conj().T) / 2.0
    h -= np.trace(h).real / d * np.eye(d)
    return h / linalg.operator_norm(h)


def _psd_repair(m: np.ndarray) -> DensityMatrix:
    dec = linalg.eigh((m + m.conj().T) / 2.0)
    vals = np.clip(dec.eigenvalues, 0.0, None)
    out = (dec.eigenvectors * vals) @ dec.eigenvectors.conj().T
    return DensityMatrix(out / np.trace(out).real)


def _commuting_unitaries(
    w: np.ndarray, count: int, rng: np.random.Generator
) -> list[np.ndarray]:
    d = w.shape[0]
    return [
        (w * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, d))) @ w.conj().T
        for _ in range(count)
    ]


def _exact_general(d: int, rng: np.random.Generator):
    w = linalg.haar_random_unitary(d, rng)
    sigma0 = DensityMatrix((w * _floored_spectrum(d, rng)) @ w.conj().T)
    t = float(rng.uniform(0.2, 0.6))
    u1, u2 = _commuting_unitaries(w, 2, rng)
    base = quantum.convex_combine(
        [t, (1.0 - t) / 2.0, (1.0 - t) / 2.0],
        [
            quantum.replacement_channel(sigma0),
            quantum.unitary_channel(u1),
            quantum.unitary_channel(u2),
        ],
    )
    return sigma0, base


def _kick_channel(channel: Channel, eta: float, rng: np.random.Generator) -> Channel:
    # Stinespring kick confined to a d-dimensional block keeps it cheap.
    v = quantum.stinespring_isometry(channel)
    d = channel.dim_in
    g = _traceless_direction(d, rng)
    kicked = v.copy()
    kicked[:d, :] = sla.expm(1j * eta * g) @ v[:d, :]
    return Channel("stinespring", kicked, d, channel.dim_out, env_dim=v.shape[0] // channel.dim_out)


def generate_instance(spec: InstanceSpec):
    """Build (state, channel, epsilon_measured) for an InstanceSpec, reproducibly.

    A zero target returns the exact pair. Otherwise the kick size is rescaled
    multiplicatively until the measured deviation lands inside the band
    [0.5, 1.0] * epsilon_target; the promise_measured strategy applies a
    single kick of size epsilon_target and just reports what it measured.
    """
    rng = _spec_rng(spec)
    cls = spec.fix_class

    if cls == "classical":
        d = spec.dim
        p0 = ProbabilityVector(_floored_spectrum(d, rng))
        t = float(rng.uniform(0.3, 0.9))
        base = StochasticMatrix(
            (1.0 - t) * np.eye(d) + t * np.tile(p0.entries.reshape(-1, 1), (1, d))
        )
        direction = rng.normal(size=d)
        direction -= direction.mean()
        direction /= np.abs(direction).sum()

        def make(eta: float):
            kicked = np.clip(p0.entries + eta * direction, 0.0, None)
            return ProbabilityVector(kicked / kicked.sum())

        def measure(state) -> float:
            return classical.deviation(base, state)

        exact_state = p0
        channel = base

    elif cls == "unitary":
        d = spec.dim
        w = linalg.haar_random_unitary(d, rng)
        channel = (w * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, d))) @ w.conj().T
        sigma0 = DensityMatrix((w * _floored_spectrum(d, rng)) @ w.conj().T)
        direction = _traceless_direction(d, rng)

        def make(eta: float):
            return _psd_repair(sigma0.matrix + eta * direction)

        def measure(state) -> float:
            return quantum.trace_distance(
                DensityMatrix(channel @ state.matrix @ channel.conj().T), state
            )

        exact_state = sigma0

    elif cls == "mixed_unitary":
        d = spec.dim
        w = linalg.haar_random_unitary(d, rng)
        count = int(rng.integers(2, 6))
        weights = rng.dirichlet(np.ones(count))
        channel = MixedUnitaryChannel(
            list(zip(weights.tolist(), _commuting_unitaries(w, count, rng)))
        )
        sigma0 = DensityMatrix((w * _floored_spectrum(d, rng)) @ w.conj().T)
        direction = _traceless_direction(d, rng)

        def make(eta: float):
            return _psd_repair(sigma0.matrix + eta * direction)

        def measure(state) -> float:
            return quantum.deviation(channel, state)

        exact_state = sigma0

    elif cls == "unital":
        d = spec.dim
        w = linalg.haar_random_unitary(d, rng)
        weights = rng.dirichlet(np.ones(3))
        u1, u2 = _commuting_unitaries(w, 2, rng)
        channel = quantum.convex_combine(
            weights.tolist(),
            [
                quantum.unitary_channel(u1),
                quantum.unitary_channel(u2),
                quantum.dephasing_channel(w),
            ],
        )
        sigma0 = DensityMatrix((w * _floored_spectrum(d, rng)) @ w.conj().T)
        direction = _traceless_direction(d, rng)

        def make(eta: float):
            return _psd_repair(sigma0.matrix + eta * direction)

        def measure(state) -> float:
            return quantum.deviation(channel, state)

        exact_state = sigma0

    elif cls == "local_pure":
        d_a, d_b = spec.d_a, spec.d_b
        a_frame = linalg.haar_random_unitary(d_a, rng)
        b_frame = linalg.haar_random_unitary(d_b, rng)
        rank = max(1, min(d_a, d_b - 1))
        mu = (rng.dirichlet(np.ones(rank)) + 1.0 / rank) / 2.0
        psi0 = np.zeros(d_a * d_b, dtype=complex)
        for i in range(rank):
            psi0 += np.sqrt(mu[i]) * np.kron(a_frame[:, i], b_frame[:, i])
        psi0 /= np.linalg.norm(psi0)
        # Identity on the Schmidt support; scrambled environment elsewhere so
        # kicks that leave the support actually register as deviation.
        d_env = 2
        v = np.zeros((d_b * d_env, d_b), dtype=complex)
        shared = linalg.random_unit_vector(d_env, rng)
        for j in range(d_b):
            beta = shared if j < rank else linalg.random_unit_vector(d_env, rng)
            v += np.outer(np.kron(b_frame[:, j], beta), b_frame[:, j].conj())
        channel = Channel("stinespring", v, d_b, d_b, env_dim=d_env)
        full = Channel(
            "kraus",
            [np.kron(np.eye(d_a, dtype=complex), k) for k in quantum.kraus_operators(channel)],
            d_a * d_b, d_a * d_b,
        )
        direction = rng.normal(size=d_a * d_b) + 1j * rng.normal(size=d_a * d_b)
        direction /= np.linalg.norm(direction)

        def make(eta: float):
            kicked = psi0 + eta * direction
            return PureState(kicked / np.linalg.norm(kicked), dims=(d_a, d_b))

        def measure(state) -> float:
            return quantum.deviation(full, state)

        exact_state = PureState(psi0, dims=(d_a, d_b))

    else:  # general
        d = spec.dim
        sigma0, base = _exact_general(d, rng)
        direction = _traceless_direction(d, rng)
        if spec.epsilon_target == 0.0:
            channel = base
        else:
            # The channel kick contributes at most 0.3 * target to the
            # deviation and is fixed once; only the state kick is retuned.
            channel = _kick_channel(base, 0.3 * spec.epsilon_target, rng)

        def make(eta: float):
            return _psd_repair(sigma0.matrix + eta * direction)

        def measure(state) -> float:
            return quantum.deviation(channel, state)

        exact_state = sigma0

    if spec.epsilon_target == 0.0:
        measured = measure(exact_state)
        if measured > 1e-12:
            raise GenerationFailed(f"exact pair shows deviation {measured}")
        return exact_state, channel, measured

    target = float(spec.epsilon_target)
    eta = target
    if spec.strategy == "promise_measured":
        state = make(eta)
        return state, channel, measure(state)

    for _ in range(MAX_TUNING_ROUNDS):
        state = make(eta)
        measured = measure(state)
        if BAND_LOW * target <= measured <= BAND_HIGH * target:
            return state, channel, measured
        if measured <= 0.0:
            eta *= 8.0
            continue
        scale = 0.75 * target / measured
        eta *= float(np.clip(scale, 0.125, 8.0))
    raise GenerationFailed(
        f"no kick reached the [{BAND_LOW}, {BAND_HIGH}] * {target} band "
        f"in {MAX_TUNING_ROUNDS} rounds"
    )


# -- fixer suites ----------------------------------------------------------------


def _channel_env(channel) -> int | None:
    if isinstance(channel, Channel) and channel.kind == "stinespring":
        return channel.env_dim
    return None


def _failure_record(suite: str, cls: str, d: int, eps: float, seed: int) -> InstanceRecord:
    return InstanceRecord(suite, cls, d, None, eps, None, None, None, None, None, None, seed, False)


def _run_classical_instance(
    suite: str, spec: InstanceSpec, tol: float
) -> InstanceRecord:
    p, t, measured = generate_instance(spec)
    try:
        q, s, cert = classical.fix_classical(p, t, epsilon=measured)
    except FixforgeError:
        return _failure_record(suite, spec.fix_class, spec.dim, measured, spec.seed)
    ok = (
        cert.residual <= 1e-10
        and cert.state_distance <= cert.state_bound_claimed + 1e-10
        and cert.map_distance <= cert.map_bound_claimed + 1e-10
    )
    return InstanceRecord(
        suite, spec.fix_class, spec.dim, None, measured,
        cert.state_bound_claimed, cert.state_distance,
        cert.map_bound_claimed, cert.map_distance, cert.map_distance,
        cert.residual, spec.seed, ok,
    )


def _run_fix_instance(suite: str, spec: InstanceSpec, tol: float) -> InstanceRecord:
    if spec.fix_class == "classical":
        return _run_classical_instance(suite, spec, tol)
    state, channel, measured = generate_instance(spec)
    runner = {
        "general": fixers.fix_general,
        "unitary": fixers.fix_unitary,
        "mixed_unitary": fixers.fix_mixed_unitary,
        "unital": fixers.fix_unital,
        "local_pure": fixers.fix_local_pure,
    }[spec.fix_class]
    try:
        result = runner(state, channel, epsilon=measured)
    except FixforgeError:
        return _failure_record(suite, spec.fix_class, spec.dim, measured, spec.seed)
    cert = result.channel_distance_certificate
    ok = (
        result.fixed_point_residual <= tol
        and result.state_distance_measured <= result.state_bound_claimed + 1e-9
        and cert.upper <= result.channel_bound_claimed + 1e-9
        and cert.lower <= cert.upper + 1e-12
    )
    env = _channel_env(result.local_part) if spec.fix_class == "local_pure" else _channel_env(channel)
    return InstanceRecord(
        suite, spec.fix_class, spec.dim, env, measured,
        result.state_bound_claimed, result.state_distance_measured,
        result.channel_bound_claimed, cert.upper, cert.lower,
        result.fixed_point_residual, spec.seed, ok,
    )


def _fixer_suite(
    name: str, dims, epsilons, per_cell: int | None, seed: int, tol: float
) -> list[InstanceRecord]:
    dims = DEFAULT_DIMS[name] if dims is None else dims
    epsilons = DEFAULT_EPSILONS[name] if epsilons is None else epsilons
    per_cell = DEFAULT_COUNTS[name] if per_cell is None else per_cell
    records = []
    for dim in dims:
        if name == "local_pure":
            d_a, d_b = dim if isinstance(dim, (tuple, list)) else (int(dim), int(dim))
            d, d_pair = d_a * d_b, (d_a, d_b)
        else:
            d, d_pair = int(dim), None
        for eps in sorted(float(e) for e in epsilons):
            for idx in range(per_cell):
                spec = InstanceSpec(
                    name, d,
                    d_a=d_pair[0] if d_pair else None,
                    d_b=d_pair[1] if d_pair else None,
                    epsilon_target=eps, seed=seed, index=idx,
                )
                records.append(_run_fix_instance(name, spec, tol))
    return records


# -- rotation lemma suite ----------------------------------------------------------


def _rotation_instance(
    lemma: str, n: int, rng: np.random.Generator, seed: int
) -> InstanceRecord:
    eta = float(rng.uniform(1e-4, 5e-2))
    w = sla.expm(1j * eta * _traceless_direction(n, rng))
    basis = linalg.haar_random_unitary(n, rng)

    if lemma == "projection":
        r = int(rng.integers(1, n))
        e = basis[:, :r] @ basis[:, :r].conj().T
        f = w @ e @ w.conj().T
        gap = linalg.operator_norm(e - f)
        result = rotations.align_projection(e, f)
        residual = linalg.operator_norm(
            result.unitary @ e @ result.unitary.conj().T - f
        )
    elif lemma == "vectors":
        k = int(rng.integers(1, n + 1))
        sources = [basis[:, i] for i in range(k)]
        targets = [w @ s for s in sources]
        gap = max(float(np.linalg.norm(s - t)) for s, t in zip(sources, targets))
        result = rotations.align_vectors(sources, targets)
        residual = max(
            float(np.linalg.norm(result.unitary @ s - t))
            for s, t in zip(sources, targets)
        )
    elif lemma == "subspace":
        r = int(rng.integers(1, n))
        f = basis[:, :r] @ basis[:, :r].conj().T
        k = int(rng.integers(1, r + 1))
        kicked = np.empty((n, k), dtype=complex)
        for i in range(k):
            kick = rng.normal(size=n) + 1j * rng.normal(size=n)
            kicked[:, i] = basis[:, i] + eta * kick / np.linalg.norm(kick)
        # QR restores exact orthonormality; the span stays within eta of ran(F).
        frame = np.linalg.qr(kicked)[0]
        psis = [frame[:, i] for i in range(k)]
        mode = "summed" if int(rng.integers(0, 2)) == 0 else "per-vector"
        result = rotations.align_into_subspace(psis, f, mode)
        gap = max(float(np.linalg.norm((np.eye(n) - f) @ p)) for p in psis)
        residual = max(
            float(np.linalg.norm((np.eye(n) - f) @ (result.unitary @ p))) for p in psis
        )
    else:  # family
        parts = int(rng.integers(2, min(n, 4) + 1))
        cuts = sorted(rng.choice(range(1, n), size=parts - 1, replace=False).tolist())
        bounds = [0] + cuts + [n]
        sources, targets = [], []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            e = basis[:, lo:hi] @ basis[:, lo:hi].conj().T
            sources.append(e)
            targets.append(w @ e @ w.conj().T)
        gap = max(
            linalg.operator_norm(e - f) for e, f in zip(sources, targets)
        )
        result = rotations.align_projection_family(sources, targets)
        residual = max(
            linalg.operator_norm(result.unitary @ e @ result.unitary.conj().T - f)
            for e, f in zip(sources, targets)
        )

    ok = (
        result.distance_to_identity <= result.claimed_bound + 1e-9
        and residual <= 1e-9
    )
    return InstanceRecord(
        "rotations", lemma, n, None, eta,
        result.claimed_bound, result.distance_to_identity,
        None, None, None, residual, seed, ok,
    )


def _rotations_suite(dims, per_lemma: int | None, seed: int) -> list[InstanceRecord]:
    dims = list(range(2, 9)) if dims is None else [int(d) for d in dims]
    per_lemma = 200 if per_lemma is None else per_lemma
    records = []
    for lemma_idx, lemma in enumerate(("projection", "vectors", "subspace", "family")):
        for idx in range(per_lemma):
            n = dims[idx % len(dims)]
            rng = np.random.default_rng([seed, 101, lemma_idx, n, idx])
            records.append(_rotation_instance(lemma, n, rng, seed))
    return records


# -- supporting lemma suite ---------------------------------------------------------


def _lemma_instance(
    lemma: str, d: int, rng: np.random.Generator, seed: int
) -> InstanceRecord:
    if lemma == "approximate-parts":
        sigma0, channel = _exact_general(d, rng)
        eta = float(rng.uniform(1e-5, 1e-3))
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        a = sigma0.matrix + eta * g / linalg.operator_norm(g)
        report = fixers.approximate_fixed_parts(a, channel)
        worst = max(report.parts, key=lambda part: part.deviation - part.bound)
        ok = all(part.deviation <= part.bound + 1e-9 for part in report.parts) and (
            max(report.real_deviation, report.imag_deviation)
            <= report.epsilon_used + 1e-9
        )
        return InstanceRecord(
            "lemmas", lemma, d, None, report.epsilon_used,
            worst.bound, worst.deviation, None, None, None, None, seed, ok,
        )

    if lemma == "cumulative-projection":
        w = linalg.haar_random_unitary(d, rng)
        weights = rng.dirichlet(np.ones(2))
        channel = quantum.convex_combine(
            weights.tolist(),
            [
                quantum.unitary_channel(_commuting_unitaries(w, 1, rng)[0]),
                quantum.dephasing_channel(w),
            ],
        )
        sigma0 = DensityMatrix((w * _floored_spectrum(d, rng)) @ w.conj().T)
        eta = float(rng.uniform(1e-7, 1e-5))
        rho = _psd_repair(sigma0.matrix + eta * _traceless_direction(d, rng))
        rows = fixers.cumulative_projection_deviation(rho, channel)
        if not rows:
            return InstanceRecord("lemmas", lemma, d, None, eta, None, None, None, None, None, None, seed, True)
        j, bound, measured = max(rows, key=lambda row: row[2] - row[1])
        ok = all(m <= b + 1e-9 for _, b, m in rows)
        return InstanceRecord(
            "lemmas", lemma, d, None, eta, bound, measured, None, None, None, None, seed, ok,
        )

    if lemma == "mixture-component":
        w = linalg.haar_random_unitary(d, rng)
        count = int(rng.integers(2, 5))
        weights = (rng.dirichlet(np.ones(count)) + 0.05) / (1.0 + 0.05 * count)
        mixed = MixedUnitaryChannel(
            list(zip(weights.tolist(), _commuting_unitaries(w, count, rng)))
        )
        sigma0 = DensityMatrix((w * _floored_spectrum(d, rng)) @ w.conj().T)
        eta = float(rng.uniform(1e-7, 1e-4))
        rho = _psd_repair(sigma0.matrix + eta * _traceless_direction(d, rng))
        comps = fixers.mixture_component_deviation(rho, mixed)
        worst = max(comps, key=lambda c: c.hs_deviation - c.hs_bound)
        ok = all(
            c.hs_deviation <= c.hs_bound + 1e-9
            and c.trace_deviation <= c.trace_bound + 1e-9
            for c in comps
        )
        return InstanceRecord(
            "lemmas", lemma, d, None, eta, worst.hs_bound, worst.hs_deviation,
            None, None, None, None, seed, ok,
        )

    if lemma == "spectral-gap":
        gap = float(rng.uniform(0.2, 0.5))
        low = rng.uniform(0.0, 0.25, size=(d + 1) // 2)
        high = rng.uniform(0.25 + gap, 1.0 + gap, size=d - low.size)
        vals = np.concatenate([low, high])
        basis = linalg.haar_random_unitary(d, rng)
        a1 = (basis * vals) @ basis.conj().T
        eta = gap / 8.0
        a2 = a1 + eta * _traceless_direction(d, rng)
        lhs, rhs = clustering.spectral_projection_gap_bound_check(
            a1, a2, (-0.5, 0.25 + gap / 2.0), gap / 2.0
        )
        return InstanceRecord(
            "lemmas", lemma, d, None, eta, rhs, lhs, None, None, None, None, seed,
            lhs <= rhs + 1e-9,
        )

    # cluster-state
    w = linalg.haar_random_unitary(d, rng)
    rho = DensityMatrix((w * _floored_spectrum(d, rng)) @ w.conj().T)
    delta = float(rng.uniform(1e-4, 0.2))
    decomp = clustering.cluster_spectrum(rho, delta)
    sigma = clustering.cluster_state(decomp)
    measured = quantum.trace_distance(rho, sigma)
    bound = d * d * delta / 2.0
    return InstanceRecord(
        "lemmas", "cluster-state", d, None, delta, bound, measured,
        None, None, None, None, seed, measured <= bound + 1e-9,
    )


def _lemmas_suite(dims, per_lemma: int | None, seed: int) -> list[InstanceRecord]:
    dims = list(range(2, 9)) if dims is None else [int(d) for d in dims]
    per_lemma = 100 if per_lemma is None else per_lemma
    lemmas = (
        "approximate-parts",
        "cumulative-projection",
        "mixture-component",
        "spectral-gap",
        "cluster-state",
    )
    records = []
    for lemma_idx, lemma in enumerate(lemmas):
        for idx in range(per_lemma):
            d = dims[idx % len(dims)]
            if lemma == "spectral-gap" and d < 2:
                continue
            rng = np.random.default_rng([seed, 202, lemma_idx, d, idx])
            records.append(_lemma_instance(lemma, d, rng, seed))
    return records


# -- counterexample suite -----------------------------------------------------------


def _instance_records(
    builder, label: str, d: int, seed: int, epsilon_hint: float | None = None
) -> InstanceRecord:
    try:
        inst = builder()
    except FixforgeError:
        return _failure_record("counterexamples", label, d, epsilon_hint, seed)
    return InstanceRecord(
        "counterexamples", label, d, None, inst.epsilon,
        None, None, None, None, None, None, seed, True,
    )


def _counterexamples_suite(dims, per_cell: int | None, seed: int) -> list[InstanceRecord]:
    dims = list(range(3, 11)) if dims is None else [int(d) for d in dims]
    records = []
    for d in dims:
        records.append(
            _instance_records(
                lambda d=d: counterexamples.classical_counterexample(d),
                "classical-impossibility", d, seed,
            )
        )
        records.append(
            _instance_records(
                lambda d=d: counterexamples.quantum_counterexample(d),
                "quantum-impossibility", d, seed,
            )
        )
    records.append(
        _instance_records(lambda: counterexamples.example_change_both(1e-2), "change-both", 5, seed)
    )
    records.append(
        _instance_records(lambda: counterexamples.optimality_instance(1e-2), "optimality", 3, seed)
    )
    records.append(
        _instance_records(lambda: counterexamples.bipartite_counterexample(4, 2), "bipartite", 8, seed)
    )

    # Robustness of uniqueness, classical then quantum.
    n_classical = 100 if per_cell is None else per_cell
    rng = np.random.default_rng([seed, 303])
    dims_cycle = [d for d in dims if d >= 3] or [4]
    for idx in range(n_classical):
        d = dims_cycle[idx % len(dims_cycle)]
        t = counterexamples.tridiagonal_T(d).matrix
        noise = rng.dirichlet(np.ones(d), size=d).T
        eta = float(rng.uniform(0.0, 0.12))
        s = StochasticMatrix((1.0 - eta) * t + eta * noise)
        try:
            report = counterexamples.verify_classical_uniqueness_robustness(s)
            ok = report.fixed_space_dimension == 1
            records.append(
                InstanceRecord(
                    "counterexamples", "classical-uniqueness", d, None,
                    report.distance_to_t, 1.0, float(report.fixed_space_dimension),
                    None, None, None, None, seed, ok,
                )
            )
        except FixforgeError:
            records.append(_failure_record("counterexamples", "classical-uniqueness", d, eta, seed))

    n_quantum = 50 if per_cell is None else per_cell
    for idx in range(n_quantum):
        d = 4
        try:
            m, _ = counterexamples.perturbed_embedded_channel(d, 0.008, seed * 1000 + idx)
            report = counterexamples.verify_quantum_uniqueness_robustness(m)
            ok = report.fixed_space_dimension == 1
            records.append(
                InstanceRecord(
                    "counterexamples", "quantum-uniqueness", d, None,
                    report.certified_upper, 1.0, float(report.fixed_space_dimension),
                    None, None, None, None, seed, ok,
                )
            )
        except FixforgeError:
            records.append(_failure_record("counterexamples", "quantum-uniqueness", d, None, seed))

    # Linear maps escape the sqrt(eps) price: rank-one corrections suffice.
    for idx in range(20):
        rng_lin = np.random.default_rng([seed, 404, idx])
        d = int(rng_lin.integers(2, 8))
        v = linalg.random_unit_vector(d, rng_lin)
        g = rng_lin.normal(size=(d, d)) + 1j * rng_lin.normal(size=(d, d))
        a = np.eye(d) + 0.01 * g / linalg.operator_norm(g)
        b = counterexamples.fix_linear_map(v, a)
        drift = float(np.linalg.norm(a @ v - v))
        moved = linalg.operator_norm(b - a)
        resid = float(np.linalg.norm(b @ v - v))
        ok = resid <= 1e-12 and abs(moved - drift) <= 1e-12
        records.append(
            InstanceRecord(
                "counterexamples", "linear-map", d, None, drift,
                drift, moved, None, None, None, resid, seed, ok,
            )
        )
    return records


# -- scaling suite --------------------------------------------------------------------


def _scaling_suite(seed: int, tol: float) -> list[InstanceRecord]:
    records = []
    grid = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
    costs = []
    for eps in grid:
        inst = counterexamples.optimality_instance(eps)
        p, t = inst.states[0], inst.channels[0]
        measured = classical.deviation(t, p)
        q, s, cert = classical.fix_classical(p, t)
        cost = max(cert.state_distance, cert.map_distance)
        costs.append(cost)
        ok = abs(measured - eps) <= 1e-12 and cost <= np.sqrt(eps) + 1e-10
        records.append(
            InstanceRecord(
                "scaling", "optimality", 3, None, eps,
                float(np.sqrt(eps)), cost, None, None, None,
                abs(measured - eps), seed, ok,
            )
        )
    slope = float(np.polyfit(np.log(grid), np.log(costs), 1)[0])
    records.append(
        InstanceRecord(
            "scaling", "optimality-slope", 3, None, None,
            0.5, slope, None, None, None, None, seed, 0.4 <= slope <= 0.6,
        )
    )

    # Informational exponent fits on the achieved general and classical costs.
    for cls, dims in (("general", [2, 4, 8]), ("classical", [4, 16, 64])):
        rows = []
        for d in dims:
            for eps in (1e-2, 1e-3, 1e-4):
                for idx in range(2):
                    spec = InstanceSpec(
                        cls, d,
                        epsilon_target=eps, seed=seed, index=idx,
                    )
                    rec = _run_fix_instance("scaling", spec, tol)
                    records.append(rec)
                    if rec.passed and rec.f_meas and rec.f_meas > 0:
                        rows.append((rec.epsilon, d, rec.f_meas))
        design = np.array([[np.log(e), np.log(d), 1.0] for e, d, _ in rows])
        response = np.log([cost for _, _, cost in rows])
        a, b, _ = np.linalg.lstsq(design, response, rcond=None)[0]
        records.append(
            InstanceRecord(
                "scaling", f"{cls}-exponents", 0, None, None,
                float(a), float(b), None, None, None, None, seed, True,
            )
        )
    return records


# -- entry point ------------------------------------------------------------------------


def run_suite(
    name: str,
    dims=None,
    epsilons=None,
    instances_per_cell: int | None = None,
    seed: int = 0,
    tol: float = RESIDUAL_TOL,
) -> SuiteReport:
    """Run one verification suite and collect its per-instance records."""
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    start = time.perf_counter()
    if name in FIX_CLASSES:
        records = _fixer_suite(name, dims, epsilons, instances_per_cell, seed, tol)
    elif name == "rotations":
        records = _rotations_suite(dims, instances_per_cell, seed)
    elif name == "lemmas":
        records = _lemmas_suite(dims, instances_per_cell, seed)
    elif name == "counterexamples":
        records = _counterexamples_suite(dims, instances_per_cell, seed)
    else:
        records = _scaling_suite(seed, tol)
    wall = time.perf_counter() - start
    passed = all(r.passed for r in records)
    return SuiteReport(name, len(records), records, passed, wall)
