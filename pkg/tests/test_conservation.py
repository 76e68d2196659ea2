import logging
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waybound.conservation import (
    BlockUnitary,
    assemble,
    blocks_of,
    build_sectors,
    exp_generator,
    full_haar_unitary,
    generator_params,
    haar_random_block_unitary,
    identity_blocks,
    spin_z,
)
from waybound.linops import DimensionMismatchError, commutator_norm, is_unitary
from waybound.sampling import haar_unitary, stream


def integer_spectrum(d, rng, low=-2, high=3):
    """Random Hermitian matrix with integer eigenvalues in a random eigenbasis."""
    u = haar_unitary(d, rng)
    return u @ np.diag(rng.integers(low, high, d).astype(float)) @ u.conj().T


def test_spin_z():
    np.testing.assert_allclose(spin_z(0), np.zeros((1, 1)))
    np.testing.assert_allclose(spin_z(1), np.diag([0.5, -0.5]))
    np.testing.assert_allclose(np.diag(spin_z(2)).real, [1, 0, 0, -1])
    with pytest.raises(ValueError):
        spin_z(-1)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sector_dimensions_are_binomial(n):
    cp = build_sectors(spin_z(1), spin_z(n))
    total = n + 1
    assert cp.sector_dims == tuple(comb(total, k) for k in range(total + 1))
    np.testing.assert_allclose(cp.charges, [k - total / 2 for k in range(total + 1)], atol=1e-12)


def test_sectors_span_the_space_and_diagonalize_charge():
    rng = stream(1)
    cp = build_sectors(integer_spectrum(3, rng), integer_spectrum(3, rng))
    basis = np.hstack([s.basis for s in cp.sectors])
    np.testing.assert_allclose(basis.conj().T @ basis, np.eye(9), atol=1e-12)
    for s in cp.sectors:
        np.testing.assert_allclose(cp.total @ s.basis, s.charge * s.basis, atol=1e-10)
    np.testing.assert_allclose(sum(s.projector() for s in cp.sectors), np.eye(9), atol=1e-12)
    assert list(cp.charges) == sorted(cp.charges)


def test_grouping_merges_near_degenerate_charges(caplog):
    l_sys = np.diag([0.0, 1.0])
    l_app = np.diag([0.0, 1.0 + 1e-11])
    with caplog.at_level(logging.DEBUG, logger="waybound.conservation"):
        cp = build_sectors(l_sys, l_app)
    assert cp.sector_dims == (1, 2, 1)
    assert "merged" in caplog.text
    assert build_sectors(l_sys, l_app, grouping_tol=1e-14).sector_dims == (1, 1, 1, 1)


def test_norms_and_params():
    cp = build_sectors(spin_z(1), spin_z(2))
    assert cp.norms == pytest.approx((0.5, 1.0))
    assert cp.dims == (2, 4)
    assert cp.n_params == sum(d * d for d in (1, 3, 3, 1))


def test_block_unitaries_conserve_charge():
    rng = stream(2)
    for dims in [(2, 2), (2, 3), (3, 3)]:
        cp = build_sectors(integer_spectrum(dims[0], rng), integer_spectrum(dims[1], rng))
        u = assemble(haar_random_block_unitary(cp, rng), cp)
        assert is_unitary(u)
        assert commutator_norm(u, cp.total) < 1e-10


def test_full_haar_does_not_conserve():
    cp = build_sectors(spin_z(1), spin_z(1))
    assert commutator_norm(full_haar_unitary(cp, 3), cp.total) > 1e-3


def test_blocks_roundtrip():
    rng = stream(4)
    cp = build_sectors(spin_z(1), spin_z(2))
    bu = haar_random_block_unitary(cp, rng)
    again = blocks_of(assemble(bu, cp), cp)
    for a, b in zip(bu.blocks, again.blocks):
        np.testing.assert_allclose(a, b, atol=1e-12)
    np.testing.assert_allclose(assemble(identity_blocks(cp), cp), np.eye(8), atol=1e-12)


def test_assemble_rejects_mismatched_blocks():
    cp = build_sectors(spin_z(1), spin_z(1))
    with pytest.raises(DimensionMismatchError):
        assemble(BlockUnitary((np.eye(1),)), cp)
    with pytest.raises(DimensionMismatchError):
        assemble(BlockUnitary((np.eye(1), np.eye(1), np.eye(1))), cp)


def test_exp_generator_layout():
    cp = build_sectors(spin_z(1), spin_z(1))  # sector dims (1, 2, 1)
    p = np.zeros(cp.n_params)
    assert p.size == 6
    p[0] = 0.3  # first 1x1 block
    p[1:3] = [0.1, -0.2]  # diagonal of the 2x2 block
    p[3] = 0.4  # Re H_01
    p[4] = 0.5  # Im H_01
    bu = exp_generator(cp, p)
    assert bu.blocks[0][0, 0] == pytest.approx(np.exp(0.3j))
    h = np.array([[0.1, 0.4 + 0.5j], [0.4 - 0.5j, -0.2]])
    w, v = np.linalg.eigh(h)
    np.testing.assert_allclose(bu.blocks[1], v @ np.diag(np.exp(1j * w)) @ v.conj().T, atol=1e-14)
    np.testing.assert_allclose(bu.blocks[2], [[1.0]])
    with pytest.raises(ValueError):
        exp_generator(cp, np.zeros(5))


def test_generator_params_inverts_exp_generator():
    rng = stream(5)
    cp = build_sectors(spin_z(1), spin_z(2))
    for _ in range(20):
        bu = haar_random_block_unitary(cp, rng)
        p = generator_params(bu, cp)
        for a, b in zip(bu.blocks, exp_generator(cp, p).blocks):
            np.testing.assert_allclose(a, b, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 3), st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_exp_generator_always_conserving(ds, da, seed):
    rng = stream(seed)
    cp = build_sectors(integer_spectrum(ds, rng), integer_spectrum(da, rng))
    u = assemble(exp_generator(cp, rng.uniform(-5, 5, cp.n_params)), cp)
    assert is_unitary(u)
    assert commutator_norm(u, cp.total) < 1e-9
