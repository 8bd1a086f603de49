"""Channel representations, conversions, distances, and fixed-point tools."""

from __future__ import annotations

import numpy as np
import pytest

from fixforge import linalg, quantum
from fixforge.errors import (
    DimensionMismatch,
    InvalidChannel,
    InvalidState,
    InvalidWeights,
    NoConvergence,
    NotAProjection,
    NotNormalized,
)


def random_state(rng: np.random.Generator, d: int) -> quantum.DensityMatrix:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return quantum.DensityMatrix(m / np.trace(m).real)


def random_channel(rng: np.random.Generator, d: int, n_kraus: int) -> quantum.Channel:
    v = linalg.random_isometry(d, d * n_kraus, int(rng.integers(1 << 30)))
    return quantum.Channel("stinespring", v, d, d, env_dim=n_kraus)


def choi_by_definition(channel: quantum.Channel) -> np.ndarray:
    """J = sum_ij N(|i><j|) (x) |i><j| computed entry by entry."""
    d_in, d_out = channel.dim_in, channel.dim_out
    j = np.zeros((d_out * d_in, d_out * d_in), dtype=complex)
    for i in range(d_in):
        for k in range(d_in):
            unit = np.zeros((d_in, d_in), dtype=complex)
            unit[i, k] = 1.0
            block = quantum.apply(channel, unit)
            e = np.zeros((d_in, d_in), dtype=complex)
            e[i, k] = 1.0
            j += np.kron(block, e)
    return j


# -- state containers --------------------------------------------------------------


def test_density_matrix_validation():
    quantum.DensityMatrix(np.diag([0.5, 0.5]))
    with pytest.raises(InvalidState):
        quantum.DensityMatrix(np.diag([0.6, 0.6]))
    with pytest.raises(InvalidState):
        quantum.DensityMatrix(np.array([[0.5, 0.3], [0.0, 0.5]]))
    with pytest.raises(InvalidState):
        quantum.DensityMatrix(np.diag([1.2, -0.2]))


def test_repair_density_clamps_float_noise():
    rho = quantum.repair_density(np.diag([1.0, -5e-11]))
    assert rho.matrix[1, 1].real == 0.0
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(InvalidState):
        quantum.repair_density(np.diag([1.0, -1e-8]))


def test_pure_state_validation_and_density():
    psi = quantum.PureState(np.array([0.6, 0.8j]))
    assert psi.density().matrix[0, 0] == pytest.approx(0.36, abs=1e-12)
    with pytest.raises(NotNormalized):
        quantum.PureState(np.array([1.0, 1.0]))
    with pytest.raises(DimensionMismatch):
        quantum.PureState(np.array([1.0, 0.0, 0.0]), dims=(2, 2))


# -- channel construction and validation --------------------------------------------


def test_channel_rejects_non_trace_preserving_kraus():
    with pytest.raises(InvalidChannel):
        quantum.Channel("kraus", [np.eye(2) * 0.5], 2, 2)


def test_channel_rejects_bad_stinespring():
    with pytest.raises(InvalidChannel):
        quantum.Channel("stinespring", np.ones((4, 2)), 2, 2, env_dim=2)


def test_channel_rejects_bad_choi():
    with pytest.raises(InvalidChannel):
        quantum.Channel("choi", -np.eye(4), 2, 2)
    with pytest.raises(InvalidChannel):
        quantum.Channel("choi", 2 * np.eye(4), 2, 2)


def test_mixed_unitary_validation():
    u = linalg.haar_random_unitary(3, 1)
    quantum.MixedUnitaryChannel([(0.5, np.eye(3)), (0.5, u)])
    with pytest.raises(InvalidWeights):
        quantum.MixedUnitaryChannel([(0.7, np.eye(3)), (0.5, u)])
    with pytest.raises(InvalidChannel):
        quantum.MixedUnitaryChannel([(1.0, np.eye(3) * 2)])


def test_diamond_bounds_ordering_enforced():
    with pytest.raises(InvalidChannel):
        quantum.DiamondBounds(0.5, 0.2, "bad")


# -- Choi matrix against the definition ----------------------------------------------


def test_choi_matrix_matches_definition():
    rng = np.random.default_rng(30)
    for d in (2, 3):
        ch = random_channel(rng, d, 2)
        assert np.allclose(quantum.choi_matrix(ch), choi_by_definition(ch), atol=1e-10)


def test_choi_contraction_recovers_action():
    # N(X) = Tr_in[(1 (x) X^T) J] with J on out (x) in.
    rng = np.random.default_rng(31)
    ch = random_channel(rng, 3, 2)
    j = quantum.choi_matrix(ch)
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    contracted = linalg.partial_trace(j @ np.kron(np.eye(3), x.T), "B", (3, 3))
    assert np.allclose(contracted, quantum.apply(ch, x), atol=1e-10)


def test_choi_trace_is_input_dimension():
    rng = np.random.default_rng(32)
    ch = random_channel(rng, 4, 3)
    assert np.trace(quantum.choi_matrix(ch)).real == pytest.approx(4.0, abs=1e-9)


# -- conversions ---------------------------------------------------------------------


def test_representation_round_trips_preserve_action():
    rng = np.random.default_rng(33)
    ch = random_channel(rng, 3, 3)
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    expect = quantum.apply(ch, x)
    for path in [("kraus", "choi", "stinespring"), ("choi", "kraus"), ("stinespring", "choi")]:
        cur = ch
        for target in path:
            cur = quantum.convert(cur, target)
        assert np.allclose(quantum.apply(cur, x), expect, atol=1e-9)


def test_stinespring_layout_and_dilation():
    rng = np.random.default_rng(34)
    ch = random_channel(rng, 3, 2)
    ops = quantum.kraus_operators(ch)
    v = quantum.stinespring_isometry(ch)
    d_e = len(ops)
    for k, op in enumerate(ops):
        assert np.allclose(v.reshape(3, d_e, 3)[:, k, :], op, atol=1e-12)
    rho = random_state(rng, 3)
    dilated = v @ rho.matrix @ v.conj().T
    reduced = linalg.partial_trace(dilated, "B", (3, d_e))
    assert np.allclose(reduced, quantum.apply(ch, rho), atol=1e-10)


def test_stinespring_environment_padding():
    ch = quantum.unitary_channel(linalg.haar_random_unitary(2, 9))
    v = quantum.stinespring_isometry(ch, env_dim=3)
    assert v.shape == (6, 2)
    assert np.allclose(v.conj().T @ v, np.eye(2), atol=1e-12)
    with pytest.raises(DimensionMismatch):
        quantum.stinespring_isometry(ch, env_dim=0)


def test_choi_to_kraus_drops_null_directions():
    ch = quantum.unitary_channel(linalg.haar_random_unitary(4, 2))
    back = quantum.convert(quantum.convert(ch, "choi"), "kraus")
    assert len(back.data) == 1


# -- composition and mixtures ----------------------------------------------------------


def test_compose_matches_superoperator_product():
    rng = np.random.default_rng(35)
    a = random_channel(rng, 3, 2)
    b = random_channel(rng, 3, 2)
    combined = quantum.compose(a, b)
    expect = quantum.superoperator_matrix(a) @ quantum.superoperator_matrix(b)
    assert np.allclose(quantum.superoperator_matrix(combined), expect, atol=1e-9)


def test_compose_recompresses_long_kraus_lists():
    rng = np.random.default_rng(36)
    a = random_channel(rng, 2, 4)
    b = random_channel(rng, 2, 4)
    combined = quantum.compose(a, b)
    assert len(quantum.kraus_operators(combined)) <= 4


def test_convex_combine_action_and_validation():
    rng = np.random.default_rng(37)
    a = random_channel(rng, 2, 2)
    b = random_channel(rng, 2, 2)
    mix = quantum.convex_combine([0.3, 0.7], [a, b])
    rho = random_state(rng, 2)
    expect = 0.3 * quantum.apply(a, rho) + 0.7 * quantum.apply(b, rho)
    assert np.allclose(quantum.apply(mix, rho), expect, atol=1e-10)
    with pytest.raises(InvalidWeights):
        quantum.convex_combine([0.3, 0.3], [a, b])


def test_replacement_channel_outputs_target():
    rng = np.random.default_rng(38)
    tau = random_state(rng, 3)
    repl = quantum.replacement_channel(tau)
    rho = random_state(rng, 3)
    assert np.allclose(quantum.apply(repl, rho), tau.matrix, atol=1e-10)
    x = rng.normal(size=(3, 3))
    assert np.allclose(quantum.apply(repl, x), np.trace(x) * tau.matrix, atol=1e-9)


def test_dephasing_channel_kills_off_diagonals():
    deph = quantum.dephasing_channel(np.eye(3))
    x = np.arange(9, dtype=complex).reshape(3, 3)
    assert np.allclose(quantum.apply(deph, x), np.diag(np.diag(x)), atol=1e-12)
    u = linalg.haar_random_unitary(3, 4)
    deph_u = quantum.dephasing_channel(u)
    rho = random_state(np.random.default_rng(39), 3)
    out = u.conj().T @ quantum.apply(deph_u, rho) @ u
    assert np.allclose(out, np.diag(np.diag(out)), atol=1e-10)


# -- distances ---------------------------------------------------------------------


def test_trace_distance_range_and_pure_formula():
    rng = np.random.default_rng(40)
    for _ in range(20):
        a = random_state(rng, 4)
        b = random_state(rng, 4)
        t = quantum.trace_distance(a, b)
        assert -1e-12 <= t <= 1.0 + 1e-10
    for _ in range(20):
        psi = quantum.PureState(linalg.random_unit_vector(4, rng))
        phi = quantum.PureState(linalg.random_unit_vector(4, rng))
        overlap = abs(np.vdot(psi.vector, phi.vector)) ** 2
        expect = np.sqrt(max(0.0, 1.0 - overlap))
        assert quantum.trace_distance(psi, phi) == pytest.approx(expect, abs=1e-9)


def test_diamond_bounds_identity_vs_depolarizing():
    # Half the diamond distance between id and full depolarizing in d=2 is 3/4;
    # the maximally entangled input certifies it exactly.
    d = 2
    ident = quantum.identity_channel(d)
    repl = quantum.replacement_channel(quantum.DensityMatrix(np.eye(d) / d))
    bounds = quantum.diamond_distance_bounds(ident, repl)
    assert bounds.lower == pytest.approx(0.75, abs=1e-9)
    assert bounds.upper >= bounds.lower - 1e-12


def test_diamond_bounds_zero_for_equal_channels():
    ch = quantum.identity_channel(3)
    bounds = quantum.diamond_distance_bounds(ch, quantum.convert(ch, "choi"))
    assert bounds.lower <= 1e-10
    assert bounds.upper <= 1e-10


def test_diamond_bounds_entangled_beats_product_inputs():
    # Dephasing vs identity in d=2: product inputs see at most 1/2 on the
    # equator, while the entangled witness reaches the true value 1/2 as well;
    # here we check the sampled lower bound meets the Choi lower bound.
    ident = quantum.identity_channel(2)
    deph = quantum.dephasing_channel(np.eye(2))
    bounds = quantum.diamond_distance_bounds(ident, deph)
    assert bounds.lower >= 0.5 - 1e-9
    assert bounds.upper <= 1.0 + 1e-12


def test_diamond_bounds_stinespring_upper_route():
    # Phase rotation diag(e^{i eta}, e^{-i eta}): the isometry distance is
    # 2 sin(eta/2) while the Choi route only gives 2 sin(eta), twice as big.
    eta = 0.1
    u = np.eye(2, dtype=complex)
    v = np.diag([np.exp(1j * eta), np.exp(-1j * eta)])
    a = quantum.Channel("stinespring", u, 2, 2, env_dim=1)
    b = quantum.Channel("stinespring", v, 2, 2, env_dim=1)
    bounds = quantum.diamond_distance_bounds(a, b)
    assert bounds.upper == pytest.approx(2 * np.sin(eta / 2), abs=1e-12)
    assert "stinespring" in bounds.witnesses
    identical = quantum.diamond_distance_bounds(a, quantum.Channel("stinespring", u.copy(), 2, 2, env_dim=1))
    assert identical.upper <= 1e-12


def test_diamond_bounds_determinism():
    rng = np.random.default_rng(42)
    a = random_channel(rng, 2, 2)
    b = random_channel(rng, 2, 2)
    b1 = quantum.diamond_distance_bounds(a, b, seed=5)
    b2 = quantum.diamond_distance_bounds(a, b, seed=5)
    assert b1.lower == b2.lower and b1.upper == b2.upper


# -- fixed-point machinery ------------------------------------------------------------


def test_unique_fixed_point_of_depolarizing_mixture():
    rng = np.random.default_rng(43)
    tau = random_state(rng, 3)
    lam = 0.3
    mix = quantum.convex_combine(
        [1 - lam, lam], [quantum.identity_channel(3), quantum.replacement_channel(tau)]
    )
    start = random_state(rng, 3)
    sigma = quantum.unique_fixed_point(mix, start, lam, tol=1e-12)
    assert quantum.trace_distance(sigma, tau) <= 1e-11
    assert quantum.deviation(mix, sigma) <= 1e-11


def test_unique_fixed_point_single_step_at_full_contraction():
    rng = np.random.default_rng(44)
    tau = random_state(rng, 2)
    repl = quantum.replacement_channel(tau)
    start = random_state(rng, 2)
    sigma = quantum.unique_fixed_point(repl, start, 1.0)
    assert quantum.trace_distance(sigma, tau) <= 1e-12


def test_unique_fixed_point_respects_iteration_cap():
    rng = np.random.default_rng(45)
    tau = random_state(rng, 2)
    lam = 0.05
    mix = quantum.convex_combine(
        [1 - lam, lam], [quantum.identity_channel(2), quantum.replacement_channel(tau)]
    )
    with pytest.raises(NoConvergence):
        quantum.unique_fixed_point(mix, random_state(rng, 2), lam, tol=1e-14, max_iter=3)


def test_is_unital_classification():
    assert quantum.is_unital(quantum.unitary_channel(linalg.haar_random_unitary(3, 8)))
    tau = quantum.DensityMatrix(np.diag([0.9, 0.1]))
    assert not quantum.is_unital(quantum.replacement_channel(tau))
    u = linalg.haar_random_unitary(2, 9)
    assert quantum.is_unital(quantum.MixedUnitaryChannel([(0.4, np.eye(2)), (0.6, u)]))


def test_fixed_point_space_dimension_counts():
    assert quantum.fixed_point_space_dimension(quantum.identity_channel(2)) == 4
    deph = quantum.dephasing_channel(np.eye(3))
    assert quantum.fixed_point_space_dimension(deph) == 3
    tau = quantum.DensityMatrix(np.diag([0.5, 0.3, 0.2]))
    assert quantum.fixed_point_space_dimension(quantum.replacement_channel(tau)) == 1


def test_invariant_subspace_residual_values():
    pi = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)
    repl = quantum.replacement_channel(quantum.DensityMatrix(np.eye(4) / 4))
    leak = quantum.invariant_subspace_residual(repl, pi)
    assert leak == pytest.approx(0.75, abs=1e-12)
    deph = quantum.dephasing_channel(np.eye(4))
    assert quantum.invariant_subspace_residual(deph, pi) <= 1e-12
    with pytest.raises(NotAProjection):
        quantum.invariant_subspace_residual(deph, np.diag([0.5, 0.0, 0.0, 0.0]))


# -- classical embeddings ---------------------------------------------------------------


def test_embed_classical_state_and_channel_commute():
    rng = np.random.default_rng(46)
    d = 4
    p = rng.random(d)
    p /= p.sum()
    t = rng.random((d, d))
    t /= t.sum(axis=0, keepdims=True)
    rho = quantum.embed_classical_state(p)
    n_t = quantum.embed_classical_channel(t)
    moved = quantum.apply(n_t, rho)
    assert np.allclose(moved, np.diag((t @ p).astype(complex)), atol=1e-12)
    assert np.allclose(np.diag(moved).real, t @ p, atol=1e-12)


def test_embedded_channel_spectrum_contains_matrix_spectrum():
    rng = np.random.default_rng(47)
    t = rng.random((3, 3))
    t /= t.sum(axis=0, keepdims=True)
    n_t = quantum.embed_classical_channel(t)
    sup = np.linalg.eigvals(quantum.superoperator_matrix(n_t))
    mat = np.linalg.eigvals(t)
    for lam in mat:
        assert np.min(np.abs(sup - lam)) <= 1e-9
