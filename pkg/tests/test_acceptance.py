"""Acceptance gate: every documented guarantee at its stated tolerance.

Each test prints one pass/fail line. Run with `pytest tests/test_acceptance.py -v`
(add -s to stream the lines while the suite runs).
"""

from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as sla

from fixforge import (
    classical,
    cli,
    counterexamples,
    fixers,
    harness,
    linalg,
    quantum,
    rotations,
)
from fixforge.classical import ProbabilityVector
from fixforge.harness import InstanceSpec
from fixforge.quantum import DensityMatrix, MixedUnitaryChannel


def report(num: int, ok: bool, text: str) -> None:
    print(f"criterion {num:02d} [{'PASS' if ok else 'FAIL'}] {text}", flush=True)
    assert ok, f"criterion {num:02d} failed: {text}"


def density_of(state) -> np.ndarray:
    if hasattr(state, "matrix"):
        return state.matrix
    v = state.vector
    return np.outer(v, v.conj())


def test_criterion_01_general_fixer_sqrt_eps() -> None:
    rep = harness.run_suite("general", seed=42)
    ok = rep.count >= 300 and rep.wall_time_s < 60.0
    for rec in rep.records:
        bound = np.sqrt(rec.epsilon) + 1e-9
        ok = ok and rec.residual <= 1e-9
        ok = ok and rec.f_meas <= bound and rec.g_cert_upper <= bound
    report(1, ok, f"general: {rep.count} instances, wall {rep.wall_time_s:.1f}s")


def test_criterion_02_classical_fixer_sqrt_eps() -> None:
    rep = harness.run_suite("classical", seed=42)
    ok = rep.count >= 300 and rep.wall_time_s < 10.0
    for rec in rep.records:
        bound = np.sqrt(rec.epsilon) + 1e-10
        ok = ok and rec.d <= 64 and rec.residual <= 1e-10
        ok = ok and rec.f_meas <= bound and rec.g_cert_upper <= bound
    report(2, ok, f"classical: {rep.count} instances, wall {rep.wall_time_s:.2f}s")


def test_criterion_03_unitary_fixer_bound_and_state_independence() -> None:
    rep = harness.run_suite("unitary", seed=42)
    ok = rep.count >= 200
    for rec in rep.records:
        bound = 4.0 * rec.d**1.25 * np.sqrt(rec.epsilon) + 1e-9
        ok = ok and rec.residual <= 1e-9
        ok = ok and rec.f_meas <= bound and rec.g_cert_upper <= bound

    # The repaired state may depend on (rho, eps) only, never on the unitary.
    rng = np.random.default_rng(3)
    d, eps = 5, 1e-4
    w = linalg.haar_random_unitary(d, rng)
    probs = (rng.dirichlet(np.ones(d)) + 1.0 / d) / 2.0
    kick = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    kick = (kick + kick.conj().T) / 2.0
    kick -= np.trace(kick) * np.eye(d) / d
    rho = quantum.repair_density(
        (w * probs) @ w.conj().T + 1e-6 * kick / linalg.operator_norm(kick)
    )
    sigmas = []
    for phase_seed in (10, 11):
        phases = np.exp(1j * np.random.default_rng(phase_seed).uniform(0, 2 * np.pi, d))
        u = (w * phases) @ w.conj().T
        sigmas.append(fixers.fix_unitary(rho, u, epsilon=eps).sigma.matrix)
    ok = ok and np.array_equal(sigmas[0], sigmas[1])
    report(3, ok, f"unitary: {rep.count} instances, sigma bitwise-independent of U")


def test_criterion_04_mixed_unitary_fixer_and_class_predicate() -> None:
    dims = harness.DEFAULT_DIMS["mixed_unitary"]
    eps_grid = harness.DEFAULT_EPSILONS["mixed_unitary"]
    ok, total = True, 0
    for i in range(100):
        spec = InstanceSpec(
            "mixed_unitary", dims[i % len(dims)],
            epsilon_target=eps_grid[i % len(eps_grid)], seed=42, index=i,
        )
        state, mixture, measured = harness.generate_instance(spec)
        result = fixers.fix_mixed_unitary(state, mixture, epsilon=measured)
        d = spec.dim
        state_bound = 4.0 * d**2 * measured**0.2 + 1e-9
        channel_bound = 7.0 * d**2 * measured**0.2 + 1e-9
        ok = ok and result.fixed_point_residual <= 1e-9
        ok = ok and result.state_distance_measured <= state_bound
        ok = ok and result.channel_distance_certificate.upper <= channel_bound
        fixed = result.fixed_channel
        ok = ok and isinstance(fixed, MixedUnitaryChannel)
        ok = ok and len(fixed.components) <= max(len(mixture.components), 1)
        ok = ok and abs(sum(p for p, _ in fixed.components) - 1.0) <= 1e-12
        for _, u in fixed.components:
            ok = ok and linalg.operator_norm(u @ u.conj().T - np.eye(d)) <= 1e-12
        total += 1
    report(4, ok, f"mixed_unitary: {total} instances, outputs stay mixed-unitary")


def test_criterion_05_unital_fixer_stays_unital() -> None:
    dims = harness.DEFAULT_DIMS["unital"]
    eps_grid = harness.DEFAULT_EPSILONS["unital"]
    ok, total = True, 0
    for i in range(100):
        spec = InstanceSpec(
            "unital", dims[i % len(dims)],
            epsilon_target=eps_grid[i % len(eps_grid)], seed=42, index=i,
        )
        state, channel, measured = harness.generate_instance(spec)
        result = fixers.fix_unital(state, channel, epsilon=measured)
        d = spec.dim
        bound = 7.0 * d ** (5.0 / 3.0) * measured ** (1.0 / 6.0) + 1e-9
        ok = ok and result.fixed_point_residual <= 1e-9
        ok = ok and result.state_distance_measured <= bound
        ok = ok and result.channel_distance_certificate.upper <= bound
        ok = ok and quantum.is_unital(result.fixed_channel, 1e-9)
        total += 1
    report(5, ok, f"unital: {total} instances, every output maps 1 to 1")


def test_criterion_06_local_pure_fixer_identity_on_a() -> None:
    pairs = harness.DEFAULT_DIMS["local_pure"]
    eps_grid = harness.DEFAULT_EPSILONS["local_pure"]
    ok, total = True, 0
    for i in range(100):
        d_a, d_b = pairs[i % len(pairs)]
        spec = InstanceSpec(
            "local_pure", d_a * d_b, d_a=d_a, d_b=d_b,
            epsilon_target=eps_grid[i % len(eps_grid)], seed=42, index=i,
        )
        state, channel_b, measured = harness.generate_instance(spec)
        result = fixers.fix_local_pure(state, channel_b, epsilon=measured)
        bound = 7.0 * np.sqrt(min(d_a, d_b)) * measured ** (1.0 / 3.0) + 1e-9
        sigma_mat = density_of(result.sigma)
        top = float(linalg.eigh(sigma_mat).eigenvalues[0])
        ok = ok and top >= 1.0 - 1e-9
        ok = ok and result.fixed_point_residual <= 1e-9
        ok = ok and result.state_distance_measured <= bound
        ok = ok and result.channel_distance_certificate.upper <= bound
        defect = counterexamples.local_identity_defect(result.fixed_channel, (d_a, d_b))
        ok = ok and defect <= 1e-9
        total += 1
    report(6, ok, f"local_pure: {total} instances, outputs act as id on A")


def test_criterion_07_rotation_lemma_constants() -> None:
    rep = harness.run_suite("rotations", seed=42)
    per_lemma: dict[str, int] = {}
    ok = rep.passed
    for rec in rep.records:
        per_lemma[rec.fix_class] = per_lemma.get(rec.fix_class, 0) + 1
        ok = ok and rec.residual <= 1e-9 and rec.f_meas <= rec.f_claim + 1e-9
    ok = ok and all(per_lemma.get(k, 0) >= 200 for k in
                    ("projection", "vectors", "subspace", "family"))

    # The claimed constants, spot-checked against their defining formulas.
    rng = np.random.default_rng(7)
    n = 6
    basis = linalg.haar_random_unitary(n, rng)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    g = (g + g.conj().T) / 2.0
    w = sla.expm(1j * 0.01 * g / linalg.operator_norm(g))
    e = basis[:, :3] @ basis[:, :3].conj().T
    f = w @ e @ w.conj().T
    res = rotations.align_projection(e, f)
    ok = ok and abs(res.claimed_bound - 2.0 * linalg.operator_norm(e - f)) <= 1e-12
    sources = [basis[:, i] for i in range(3)]
    targets = [w @ s for s in sources]
    gap = max(float(np.linalg.norm(s - t)) for s, t in zip(sources, targets))
    res = rotations.align_vectors(sources, targets)
    ok = ok and abs(res.claimed_bound - 5.0 * np.sqrt(3) * gap) <= 1e-12
    psis = [basis[:, i] + 0.01 * basis[:, 4] for i in range(2)]
    frame = np.linalg.qr(np.stack(psis, axis=1))[0]
    psis = [frame[:, 0], frame[:, 1]]
    leaks = [float(np.linalg.norm(p - e @ p)) for p in psis]
    res = rotations.align_into_subspace(psis, e, "summed")
    ok = ok and abs(res.claimed_bound - 2.0 * np.sqrt(sum(l**2 for l in leaks))) <= 1e-12
    res = rotations.align_into_subspace(psis, e, "per-vector")
    ok = ok and abs(res.claimed_bound - 2.0 * np.sqrt(2) * max(leaks)) <= 1e-12
    es = [basis[:, :2] @ basis[:, :2].conj().T, basis[:, 2:5] @ basis[:, 2:5].conj().T]
    fs = [w @ p @ w.conj().T for p in es]
    fgap = max(linalg.operator_norm(a - b) for a, b in zip(es, fs))
    res = rotations.align_projection_family(es, fs)
    ok = ok and abs(res.claimed_bound - 6.0 * np.sqrt(2) * fgap) <= 1e-12
    report(7, ok, f"rotations: {rep.count} instances, constants 2 / 5sqrt(n) / 2, 2sqrt(n) / 6sqrt(n)")


def test_criterion_08_supporting_lemma_bounds() -> None:
    rep = harness.run_suite("lemmas", seed=42)
    per_lemma: dict[str, int] = {}
    ok = rep.passed
    for rec in rep.records:
        per_lemma[rec.fix_class] = per_lemma.get(rec.fix_class, 0) + 1
    names = ("approximate-parts", "cumulative-projection", "mixture-component",
             "spectral-gap", "cluster-state")
    ok = ok and all(per_lemma.get(k, 0) >= 100 for k in names)
    report(8, ok, f"lemmas: {rep.count} instances across {len(per_lemma)} bounds, zero violations")


def test_criterion_09_tridiagonal_family_exactness() -> None:
    ok = True
    for d in range(3, 13):
        t = counterexamples.tridiagonal_T(d)
        p1 = counterexamples.p1(d)
        p2 = counterexamples.p2(d)
        c = 1.0 / (2.0 - 2.0 ** (2 - d))
        ok = ok and abs(classical.deviation(t, p1) - c / 2**d) <= 1e-12
        ok = ok and np.array_equal(t.matrix @ p2.entries, p2.entries)
        ok = ok and abs(classical.half_l1(p1.entries, p2.entries) - 1.0) <= 1e-12
    report(9, ok, "tridiagonal family: both near-fixed distributions verified, d in 3..12")


def test_criterion_10_uniqueness_robustness() -> None:
    ok = True
    rng = np.random.default_rng(20260814)
    dims = [3, 4, 5, 6, 8]
    for i in range(100):
        d = dims[i % len(dims)]
        t = counterexamples.tridiagonal_T(d)
        eta = float(rng.uniform(0.0, 0.12))
        noise = np.stack([rng.dirichlet(np.ones(d)) for _ in range(d)], axis=1)
        s = classical.StochasticMatrix((1.0 - eta) * t.matrix + eta * noise)
        rep = counterexamples.verify_classical_uniqueness_robustness(s)
        ok = ok and rep.distance_to_t < 0.25 and rep.fixed_space_dimension == 1
    for i in range(50):
        m, gap = counterexamples.perturbed_embedded_channel(4, 0.008, seed=i)
        rep = counterexamples.verify_quantum_uniqueness_robustness(m)
        ok = ok and rep.certified_upper <= 1.0 / 16.0 and rep.fixed_space_dimension == 1
    report(10, ok, "uniqueness: 100 classical + 50 quantum perturbations, multiplicity 1")


def test_criterion_11_optimality_scaling() -> None:
    eps_grid = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
    ok, costs = True, []
    for eps in eps_grid:
        inst = counterexamples.optimality_instance(eps)
        p = next(s for s in inst.states if isinstance(s, ProbabilityVector))
        t = next(c for c in inst.channels if isinstance(c, classical.StochasticMatrix))
        rho = next(s for s in inst.states if isinstance(s, DensityMatrix))
        chan = next(c for c in inst.channels if hasattr(c, "kind"))
        ok = ok and abs(classical.deviation(t, p) - eps) <= 1e-12
        ok = ok and abs(quantum.deviation(chan, rho) - eps) <= 1e-12
        result = fixers.fix_general(rho, chan, epsilon=eps)
        costs.append(max(result.state_distance_measured,
                         result.channel_distance_certificate.upper))
    slope = float(np.polyfit(np.log(eps_grid), np.log(costs), 1)[0])
    ok = ok and 0.4 <= slope <= 0.6
    report(11, ok, f"optimality: deviation equals eps, cost slope {slope:.3f} in [0.4, 0.6]")


def test_criterion_12_csv_determinism(tmp_path) -> None:
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    codes = [cli.main(["verify", "general", "--seed", "42", "--csv", str(p)])
             for p in paths]
    ok = codes == [0, 0] and paths[0].read_bytes() == paths[1].read_bytes()
    report(12, ok, "two `verify general --seed 42` runs: byte-identical CSV")
