"""Seeded random states, unitaries and measurements.

All randomness flows through :func:`stream`, which derives an independent
counter-based (Philox) generator from a 64-bit master seed and a stream
index. Results therefore do not depend on evaluation order or thread count.
"""

from __future__ import annotations

import numpy as np

from .linops import dag

SeedLike = int | np.random.Generator

_MASK64 = (1 << 64) - 1


def stream(master: int, *index: int) -> np.random.Generator:
    """Independent generator for ``(master, *index)``."""
    seq = np.random.SeedSequence(entropy=int(master) & _MASK64, spawn_key=tuple(int(i) for i in index))
    return np.random.Generator(np.random.Philox(seq))


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed)


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Matrix of i.i.d. standard complex Gaussians (E|z|^2 = 1)."""
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return z / np.sqrt(2.0)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary via phase-corrected QR."""
    q, r = np.linalg.qr(ginibre(d, d, rng))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = ginibre(d, 1, rng)[:, 0]
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state ``G G† / tr(G G†)`` with ``G`` a ``d x rank`` Ginibre matrix."""
    g = ginibre(d, d if rank is None else rank, rng)
    rho = g @ dag(g)
    rho = 0.5 * (rho + dag(rho))
    return rho / np.trace(rho).real


def random_orthogonal_pair(d: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    u = haar_unitary(d, rng)
    return u[:, 0].copy(), u[:, 1].copy()


def random_pvm(d: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Rank-one projective measurement in a Haar-random basis."""
    u = haar_unitary(d, rng)
    return [np.outer(u[:, k], np.conj(u[:, k])) for k in range(d)]


def random_povm(d: int, outcomes: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random POVM built by normalizing random PSD matrices to sum to the identity."""
    parts = []
    for _ in range(outcomes):
        g = ginibre(d, d, rng)
        parts.append(g @ dag(g))
    s = sum(parts)
    w, v = np.linalg.eigh(0.5 * (s + dag(s)))
    s_inv_half = (v / np.sqrt(w)) @ dag(v)
    elems = [s_inv_half @ p @ s_inv_half for p in parts]
    return [0.5 * (e + dag(e)) for e in elems]


__all__ = [
    "SeedLike",
    "as_generator",
    "ginibre",
    "haar_unitary",
    "random_density",
    "random_orthogonal_pair",
    "random_povm",
    "random_pure_state",
    "random_pvm",
    "stream",
]
