"""Classical distributions, stochastic maps, and the sqrt(eps) repair."""

from __future__ import annotations

import numpy as np
import pytest

from fixforge import classical, quantum
from fixforge.errors import (
    DimensionMismatch,
    InvalidDistribution,
    PromiseViolated,
)


def random_distribution(rng: np.random.Generator, d: int) -> classical.ProbabilityVector:
    p = rng.random(d) + 1e-3
    return classical.ProbabilityVector(p / p.sum())


def random_stochastic(rng: np.random.Generator, d: int) -> classical.StochasticMatrix:
    m = rng.random((d, d)) + 1e-3
    return classical.StochasticMatrix(m / m.sum(axis=0, keepdims=True))


# -- containers ---------------------------------------------------------------------


def test_probability_vector_validation_and_clamping():
    p = classical.ProbabilityVector(np.array([1.0, -5e-13]))
    assert p.entries[1] == 0.0
    with pytest.raises(InvalidDistribution):
        classical.ProbabilityVector(np.array([0.7, 0.2]))
    with pytest.raises(InvalidDistribution):
        classical.ProbabilityVector(np.array([1.1, -0.1]))


def test_stochastic_matrix_validation():
    classical.StochasticMatrix(np.array([[0.3, 1.0], [0.7, 0.0]]))
    with pytest.raises(InvalidDistribution):
        classical.StochasticMatrix(np.array([[0.5, 0.5], [0.4, 0.5]]))
    with pytest.raises(InvalidDistribution):
        classical.StochasticMatrix(np.array([[1.5, 0.0], [-0.5, 1.0]]))
    cols = classical.StochasticMatrix(np.eye(2)).columns
    assert cols[0].entries[0] == 1.0


# -- the classical channel norm ------------------------------------------------------


def test_stochastic_norm_basic_values():
    t = classical.StochasticMatrix(np.eye(2))
    assert classical.stochastic_norm(t, t) == 0.0
    swap = classical.StochasticMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert classical.stochastic_norm(t, swap) == pytest.approx(2.0, abs=1e-14)
    uniform = classical.StochasticMatrix(np.full((2, 2), 0.5))
    assert classical.stochastic_norm(t, uniform) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(DimensionMismatch):
        classical.stochastic_norm(t, classical.StochasticMatrix(np.eye(3)))


def test_stochastic_norm_brackets_embedded_diamond_bounds():
    rng = np.random.default_rng(70)
    for trial in range(100):
        d = int(rng.integers(2, 7))
        t = random_stochastic(rng, d)
        s = random_stochastic(rng, d)
        half = 0.5 * classical.stochastic_norm(t, s)
        bounds = quantum.diamond_distance_bounds(
            quantum.embed_classical_channel(t), quantum.embed_classical_channel(s)
        )
        assert bounds.lower <= half + 1e-9
        assert half <= bounds.upper + 1e-9


# -- the classical fixer ---------------------------------------------------------------


def test_fix_classical_exact_input_passes_through():
    p = classical.ProbabilityVector(np.array([0.25, 0.75]))
    t = classical.StochasticMatrix(np.eye(2))
    q, s, cert = classical.fix_classical(p, t)
    assert np.array_equal(q.entries, p.entries)
    assert np.array_equal(s.matrix, t.matrix)
    assert cert.epsilon_used <= 1e-12


def test_fix_classical_two_level_leak():
    a = 1e-3
    p = classical.ProbabilityVector(np.array([1.0, 0.0]))
    t = classical.StochasticMatrix(np.array([[1.0 - a, 0.0], [a, 1.0]]))
    assert classical.deviation(t, p) == pytest.approx(a, abs=1e-15)
    q, s, cert = classical.fix_classical(p, t)
    assert classical.deviation(s, q) <= 1e-10
    assert classical.half_l1(q.entries, p.entries) <= np.sqrt(a) + 1e-10
    assert 0.5 * classical.stochastic_norm(s, t) <= np.sqrt(a) + 1e-10


def test_fix_classical_randomized_suite():
    rng = np.random.default_rng(71)
    for trial in range(40):
        d = int(rng.integers(2, 17))
        t = random_stochastic(rng, d)
        p = random_distribution(rng, d)
        # Pull p toward the fixed point until the deviation is small.
        for _ in range(200):
            moved = t.matrix @ p.entries
            p = classical.ProbabilityVector(moved / moved.sum())
            if classical.deviation(t, p) < 1e-3:
                break
        eps = classical.deviation(t, p)
        q, s, cert = classical.fix_classical(p, t)
        assert classical.deviation(s, q) <= 1e-10
        assert cert.state_distance <= np.sqrt(cert.epsilon_used) + 1e-10
        assert cert.map_distance <= np.sqrt(cert.epsilon_used) + 1e-10
        assert cert.epsilon_used >= eps - 1e-15


def test_fix_classical_epsilon_promise_checked():
    p = classical.ProbabilityVector(np.array([0.5, 0.5]))
    t = classical.StochasticMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    q, s, cert = classical.fix_classical(p, t, epsilon=0.3)
    assert cert.epsilon_used == pytest.approx(0.3, abs=1e-15)
    leaky = classical.StochasticMatrix(np.array([[0.5, 0.5], [0.5, 0.5]]))
    bad_p = classical.ProbabilityVector(np.array([1.0, 0.0]))
    with pytest.raises(PromiseViolated):
        classical.fix_classical(bad_p, leaky, epsilon=1e-6)


def test_fix_classical_supplied_epsilon_widens_the_mix():
    p = classical.ProbabilityVector(np.array([0.6, 0.4]))
    t = classical.StochasticMatrix(np.array([[0.9, 0.15], [0.1, 0.85]]))
    q1, s1, c1 = classical.fix_classical(p, t)
    q2, s2, c2 = classical.fix_classical(p, t, epsilon=0.25)
    assert c2.epsilon_used == pytest.approx(0.25, abs=1e-15)
    assert c2.map_distance >= c1.map_distance


# -- stationary structure ---------------------------------------------------------------


def test_stationary_identity_and_uniform_column():
    ident = classical.StochasticMatrix(np.eye(2))
    pi = classical.stationary_distribution(ident)
    assert np.allclose(ident.matrix @ pi.entries, pi.entries, atol=1e-12)
    assert classical.eigenvalue_one_multiplicity(ident) == 2
    assert not classical.is_irreducible(ident)

    uniform = classical.StochasticMatrix(np.full((3, 3), 1.0 / 3.0))
    pi = classical.stationary_distribution(uniform)
    assert np.allclose(pi.entries, 1.0 / 3.0, atol=1e-12)
    assert classical.eigenvalue_one_multiplicity(uniform) == 1
    assert classical.is_irreducible(uniform)


def test_stationary_handles_periodic_chain():
    cycle = classical.StochasticMatrix(
        np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    )
    pi = classical.stationary_distribution(cycle)
    assert np.allclose(pi.entries, 1.0 / 3.0, atol=1e-10)
    assert classical.is_irreducible(cycle)
    assert classical.eigenvalue_one_multiplicity(cycle) == 1


def test_stationary_biased_two_state_chain():
    t = classical.StochasticMatrix(np.array([[0.9, 0.3], [0.1, 0.7]]))
    pi = classical.stationary_distribution(t)
    assert pi.entries[0] == pytest.approx(0.75, abs=1e-10)
    assert pi.entries[1] == pytest.approx(0.25, abs=1e-10)


def test_irreducibility_threshold_matters():
    t = classical.StochasticMatrix(np.array([[1.0 - 1e-16, 1e-16], [1e-16, 1.0 - 1e-16]]))
    assert classical.is_irreducible(t, threshold=0.0)
    assert not classical.is_irreducible(t, threshold=1e-14)
