"""Additive conserved charges and the unitaries that respect them.

A unitary ``U`` on ``H_S (x) H_A`` conserves ``L = L_S (x) 1 + 1 (x) L_A``
exactly when it is block diagonal across the eigenspaces (charge sectors)
of ``L``. Unitaries are therefore stored block by block.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
import scipy.linalg

from .linops import DimensionMismatchError, as_matrix, dag, eigh, hermitian_part, op_norm, tensor
from .sampling import SeedLike, as_generator, haar_unitary

log = logging.getLogger(__name__)

GROUPING_TOL = 1e-9


@dataclass(frozen=True)
class ChargeSector:
    charge: float
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ dag(self.basis)


@dataclass(frozen=True)
class ConservedPair:
    """System and apparatus charges together with the sectors of their sum."""

    l_sys: np.ndarray
    l_app: np.ndarray
    sectors: tuple[ChargeSector, ...]

    @property
    def d_sys(self) -> int:
        return self.l_sys.shape[0]

    @property
    def d_app(self) -> int:
        return self.l_app.shape[0]

    @property
    def dims(self) -> tuple[int, int]:
        return self.d_sys, self.d_app

    @cached_property
    def total(self) -> np.ndarray:
        return tensor(self.l_sys, np.eye(self.d_app)) + tensor(np.eye(self.d_sys), self.l_app)

    @cached_property
    def norms(self) -> tuple[float, float]:
        """Operator norms ``(||L_S||, ||L_A||)``."""
        return op_norm(self.l_sys), op_norm(self.l_app)

    @property
    def charges(self) -> tuple[float, ...]:
        return tuple(s.charge for s in self.sectors)

    @cached_property
    def sector_dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.sectors)

    @property
    def n_params(self) -> int:
        return sum(d * d for d in self.sector_dims)


@dataclass(frozen=True)
class BlockUnitary:
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(as_matrix(b) for b in self.blocks))


def build_sectors(l_sys, l_app, grouping_tol: float = GROUPING_TOL) -> ConservedPair:
    """Split ``L_S (x) 1 + 1 (x) L_A`` into charge sectors, sorted by ascending charge.

    Neighbouring eigenvalues closer than ``grouping_tol * (1 + max|l|)`` share a sector.
    """
    l_sys = hermitian_part(l_sys)
    l_app = hermitian_part(l_app)
    total = tensor(l_sys, np.eye(l_app.shape[0])) + tensor(np.eye(l_sys.shape[0]), l_app)
    w, v = eigh(total)
    gap = grouping_tol * (1.0 + float(np.max(np.abs(w))))
    groups: list[list[int]] = [[0]]
    for k in range(1, w.size):
        if w[k] - w[k - 1] <= gap:
            groups[-1].append(k)
        else:
            groups.append([k])
    sectors = []
    for g in groups:
        spread = w[g[-1]] - w[g[0]]
        if spread > 1e-12:
            log.debug("merged eigenvalues %s into one sector (spread %.3g)", w[g], spread)
        sectors.append(ChargeSector(float(np.mean(w[g])), v[:, g]))
    return ConservedPair(l_sys, l_app, tuple(sectors))


def _check_blocks(bu: BlockUnitary, cp: ConservedPair) -> None:
    if len(bu.blocks) != len(cp.sectors):
        raise DimensionMismatchError(f"{len(bu.blocks)} blocks for {len(cp.sectors)} sectors")
    for k, (b, s) in enumerate(zip(bu.blocks, cp.sectors)):
        if b.shape != (s.dim, s.dim):
            raise DimensionMismatchError(f"block {k} has shape {b.shape}, sector dim is {s.dim}")


def assemble(bu: BlockUnitary, cp: ConservedPair) -> np.ndarray:
    """Full-space operator ``sum_k V_k B_k V_k†``."""
    _check_blocks(bu, cp)
    n = cp.d_sys * cp.d_app
    u = np.zeros((n, n), dtype=complex)
    for b, s in zip(bu.blocks, cp.sectors):
        u += s.basis @ b @ dag(s.basis)
    return u


def blocks_of(u, cp: ConservedPair) -> BlockUnitary:
    """Restrict a full-space operator to each sector (inverse of :func:`assemble`)."""
    u = as_matrix(u)
    return BlockUnitary(tuple(dag(s.basis) @ u @ s.basis for s in cp.sectors))


def identity_blocks(cp: ConservedPair) -> BlockUnitary:
    return BlockUnitary(tuple(np.eye(d, dtype=complex) for d in cp.sector_dims))


def haar_random_block_unitary(cp: ConservedPair, seed: SeedLike) -> BlockUnitary:
    """Independent Haar-random unitary on every sector."""
    rng = as_generator(seed)
    return BlockUnitary(tuple(haar_unitary(d, rng) for d in cp.sector_dims))


@lru_cache(maxsize=None)
def _upper(d: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(d, 1)


def _hermitian_from_params(p: np.ndarray, d: int) -> np.ndarray:
    h = np.diag(p[:d]).astype(complex)
    iu = _upper(d)
    m = len(iu[0])
    h[iu] = p[d : d + m] + 1j * p[d + m : d + 2 * m]
    h[(iu[1], iu[0])] = np.conj(h[iu])
    return h


def _params_from_hermitian(h: np.ndarray) -> np.ndarray:
    iu = _upper(h.shape[0])
    return np.concatenate([np.real(np.diag(h)), np.real(h[iu]), np.imag(h[iu])])


def exp_generator(cp: ConservedPair, params: Sequence[float]) -> BlockUnitary:
    """Blocks ``exp(i H_k)`` from a flat real parameter vector.

    Each block of size ``d`` consumes ``d**2`` parameters: the ``d`` diagonal
    entries of ``H_k``, then the real parts of its strict upper triangle
    (row-major), then the matching imaginary parts.
    """
    p = np.asarray(params, dtype=float).reshape(-1)
    if p.size != cp.n_params:
        raise ValueError(f"expected {cp.n_params} parameters, got {p.size}")
    blocks = []
    offset = 0
    for d in cp.sector_dims:
        h = _hermitian_from_params(p[offset : offset + d * d], d)
        offset += d * d
        w, v = np.linalg.eigh(h)
        blocks.append((v * np.exp(1j * w)) @ dag(v))
    return BlockUnitary(tuple(blocks))


def generator_params(bu: BlockUnitary, cp: ConservedPair) -> np.ndarray:
    """Parameters whose :func:`exp_generator` image is ``bu`` (principal logarithm)."""
    _check_blocks(bu, cp)
    out = []
    for b in bu.blocks:
        t, z = scipy.linalg.schur(b, output="complex")
        phases = np.angle(np.diag(t))
        h = (z * phases) @ dag(z)
        out.append(_params_from_hermitian(0.5 * (h + dag(h))))
    return np.concatenate(out) if out else np.zeros(0)


def full_haar_unitary(cp: ConservedPair, seed: SeedLike) -> np.ndarray:
    """Haar unitary on the whole space, ignoring the charge (a non-conserving control)."""
    return haar_unitary(cp.d_sys * cp.d_app, as_generator(seed))


def spin_z(n: int) -> np.ndarray:
    """``sum_k sigma_z^(k) / 2`` on ``n`` qubits, basis label ``|1>`` first."""
    if n < 0:
        raise ValueError("number of spins must be non-negative")
    out = np.zeros((1, 1))
    for _ in range(n):
        out = np.kron(out, np.eye(2)) + np.kron(np.eye(out.shape[0]), 0.5 * np.diag([1.0, -1.0]))
    return out.astype(complex)


__all__ = [
    "BlockUnitary",
    "ChargeSector",
    "ConservedPair",
    "assemble",
    "blocks_of",
    "build_sectors",
    "exp_generator",
    "full_haar_unitary",
    "generator_params",
    "haar_random_block_unitary",
    "identity_blocks",
    "spin_z",
]
