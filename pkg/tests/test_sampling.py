import numpy as np
import pytest

from waybound.linops import dag, is_unitary
from waybound.sampling import (
    as_generator,
    haar_unitary,
    random_density,
    random_orthogonal_pair,
    random_povm,
    random_pure_state,
    random_pvm,
    stream,
)


def test_streams_are_reproducible_and_distinct():
    a = stream(7, 3).standard_normal(4)
    np.testing.assert_array_equal(a, stream(7, 3).standard_normal(4))
    assert not np.allclose(a, stream(7, 4).standard_normal(4))
    assert not np.allclose(a, stream(8, 3).standard_normal(4))
    g = np.random.default_rng(0)
    assert as_generator(g) is g


def test_negative_and_large_seeds_are_accepted():
    stream(-1).standard_normal()
    stream(2**70).standard_normal()


def test_haar_first_moment():
    """E|U_00|^2 = 1/d for Haar unitaries, checked within 3 standard errors."""
    rng = stream(11)
    for d in (2, 3, 5):
        x = np.array([abs(haar_unitary(d, rng)[0, 0]) ** 2 for _ in range(4000)])
        se = x.std(ddof=1) / np.sqrt(x.size)
        assert abs(x.mean() - 1.0 / d) < 3 * se


def test_haar_phase_is_uniform():
    """Phase correction removes the QR bias: E[U_00] = 0."""
    rng = stream(12)
    z = np.array([haar_unitary(2, rng)[0, 0] for _ in range(4000)])
    se = np.sqrt(np.mean(np.abs(z) ** 2) / z.size)
    assert abs(z.mean()) < 4 * se


def test_samplers_produce_valid_objects():
    rng = stream(13)
    for d in (1, 2, 4):
        assert is_unitary(haar_unitary(d, rng))
        v = random_pure_state(d, rng)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        rho = random_density(d, rng)
        assert np.trace(rho).real == pytest.approx(1.0)
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-12
        np.testing.assert_allclose(rho, dag(rho), atol=0)
    rho = random_density(4, rng, rank=2)
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 2
    a, b = random_orthogonal_pair(3, rng)
    assert abs(np.vdot(a, b)) < 1e-12
    for elems in (random_pvm(3, rng), random_povm(3, 4, rng)):
        np.testing.assert_allclose(sum(elems), np.eye(3), atol=1e-12)
        assert all(np.min(np.linalg.eigvalsh(e)) > -1e-12 for e in elems)
