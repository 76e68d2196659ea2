"""Quantum states, purification, fidelity and optimal discrimination.

Fidelity uses the square-root convention ``F(a, b) = tr sqrt(sqrt(a) b sqrt(a))``,
so ``F = 1`` for identical states and ``F = 0`` for orthogonal ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linops import (
    DimensionMismatchError,
    HERMITIAN_TOL,
    PSD_TOL,
    as_matrix,
    dag,
    eigh,
    hermitian_part,
    partial_trace,
    psd_sqrt,
)

NORM_TOL = 1e-10
POVM_SUM_TOL = 1e-9
SUPPORT_TOL = 1e-10
# Eigenvalues of a unit-trace state below this are floating-point dust.
NOISE_FLOOR = 1e-14
# Outcome probabilities in [-1e-12, PROB_FLOOR] are rounding residue of exact zeros.
PROB_FLOOR = 1e-15


class InvalidStateError(ValueError):
    pass


class InvalidPovmError(ValueError):
    pass


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first significant amplitude is real positive."""
    idx = int(np.argmax(np.abs(v) > 1e-12 * max(np.max(np.abs(v)), 1e-300)))
    a = v[idx]
    return v * (np.conj(a) / abs(a)) if abs(a) > 0 else v


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in self.dims) or (amp.size,)
        if int(np.prod(dims)) != amp.size:
            raise InvalidStateError(f"{amp.size} amplitudes do not match dims {dims}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "dims", dims)

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, np.conj(self.amplitudes))

    def density(self) -> "DensityOperator":
        return DensityOperator(self.projector(), self.dims)


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.dims) or (m.shape[0],)
        if m.shape != (int(np.prod(dims)),) * 2:
            raise InvalidStateError(f"matrix shape {m.shape} does not match dims {dims}")
        try:
            m = hermitian_part(m, HERMITIAN_TOL)
        except ValueError as exc:
            raise InvalidStateError(str(exc)) from exc
        tr = np.trace(m).real
        if abs(tr - 1.0) > NORM_TOL:
            raise InvalidStateError(f"trace {tr!r} differs from 1")
        w = np.linalg.eigvalsh(m)
        if w[0] < -PSD_TOL:
            raise InvalidStateError(f"state has negative eigenvalue {w[0]:.3g}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def reduce(self, keep: Sequence[int] | int) -> "DensityOperator":
        keep_list = [keep] if isinstance(keep, int) else sorted(keep)
        return DensityOperator(
            partial_trace(self.matrix, self.dims, keep_list),
            tuple(self.dims[k] for k in keep_list),
        )


@dataclass(frozen=True)
class Povm:
    """A finite POVM; ``projective=True`` additionally enforces orthogonal projectors."""

    elements: tuple[np.ndarray, ...]
    projective: bool = False
    tol: float = field(default=POVM_SUM_TOL, repr=False)

    def __post_init__(self):
        elems = tuple(as_matrix(e) for e in self.elements)
        if not elems:
            raise InvalidPovmError("a POVM needs at least one element")
        d = elems[0].shape[0]
        for k, e in enumerate(elems):
            if e.shape != (d, d):
                raise InvalidPovmError(f"element {k} has shape {e.shape}, expected {(d, d)}")
        stack = np.stack(elems)
        dev = np.max(np.abs(stack - dag(stack)), axis=(1, 2))
        if np.any(dev > HERMITIAN_TOL):
            k = int(np.argmax(dev > HERMITIAN_TOL))
            raise InvalidPovmError(f"element {k}: matrix is not Hermitian (max deviation {dev[k]:.3g})")
        stack = 0.5 * (stack + dag(stack))
        low = np.linalg.eigvalsh(stack)[:, 0]
        if np.any(low < -PSD_TOL):
            raise InvalidPovmError(f"element {int(np.argmin(low))} is not positive semidefinite")
        total_dev = np.max(np.abs(stack.sum(axis=0) - np.eye(d)))
        if total_dev > self.tol:
            raise InvalidPovmError(f"elements sum to identity only within {total_dev:.3g}")
        if self.projective:
            products = np.einsum("aij,bjk->abik", stack, stack)
            target = np.zeros_like(products)
            idx = np.arange(len(elems))
            target[idx, idx] = stack
            bad = np.argwhere(np.max(np.abs(products - target), axis=(2, 3)) > self.tol)
            if bad.size:
                i, j = bad[0]
                raise InvalidPovmError(f"elements {i}, {j} are not orthogonal projectors")
        object.__setattr__(self, "elements", tuple(stack))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "Povm":
        """Rank-one PVM from the columns of a unitary matrix."""
        cols = [basis[:, k] for k in range(basis.shape[1])]
        return cls(tuple(np.outer(c, np.conj(c)) for c in cols), projective=True)


def _as_state_matrix(rho) -> np.ndarray:
    if isinstance(rho, PureState):
        return rho.projector()
    m = np.asarray(rho, dtype=complex)
    if m.ndim == 1:
        return np.outer(m, np.conj(m))
    return as_matrix(m)


def purify(sigma) -> PureState:
    """Purification of ``sigma`` on ``H (x) H`` with a canonical-basis ancilla.

    Amplitudes are ``sqrt(l_k)`` on ``|v_k> (x) |e_k>`` with eigenvalues in
    descending order (ties keep ``eigh`` order) and zero eigenvalues dropped.
    """
    if not isinstance(sigma, DensityOperator):
        try:
            sigma = DensityOperator(_as_state_matrix(sigma))
        except ValueError as exc:
            raise InvalidStateError(str(exc)) from exc
    d = sigma.matrix.shape[0]
    w, v = eigh(sigma.matrix)
    order = [k for k in np.argsort(-w, kind="stable") if w[k] > NOISE_FLOOR]
    amp = np.zeros((d, d), dtype=complex)
    for slot, k in enumerate(order):
        amp[:, slot] = np.sqrt(w[k]) * _canonical_phase(v[:, k])
    amp = amp.reshape(-1)
    return PureState(amp / np.linalg.norm(amp), (d, d))


def _state_root(rho: np.ndarray) -> np.ndarray:
    return psd_sqrt(rho, cutoff=NOISE_FLOOR)


def fidelity(rho0, rho1) -> float:
    """Uhlmann fidelity ``tr sqrt(sqrt(rho0) rho1 sqrt(rho0))``.

    Accepts density matrices, :class:`DensityOperator`, :class:`PureState`
    or state vectors. Evaluated as the trace norm of ``sqrt(rho0) sqrt(rho1)``,
    which equals the defining expression and avoids taking square roots of
    rounding noise in the inner product.
    """
    a, b = _as_state_matrix(rho0), _as_state_matrix(rho1)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"states of shape {a.shape} and {b.shape}")
    s = np.linalg.svd(_state_root(a) @ _state_root(b), compute_uv=False)
    f = float(np.sum(s))
    return 1.0 if 1.0 < f <= 1.0 + 1e-9 else f


def marginal_fidelity(vec0, vec1, dims: Sequence[int], keep: Sequence[int] | int) -> float:
    """Fidelity of the marginals of two pure states on the factors ``keep``.

    By Uhlmann's theorem this is the trace norm of ``N0† N1``, where ``N_i``
    is ``vec_i`` reshaped to (kept factors) x (all other factors). The
    expression is bilinear in the vectors, so near-orthogonal marginals keep
    full floating-point accuracy.
    """
    dims = [int(d) for d in dims]
    keep = [keep] if isinstance(keep, (int, np.integer)) else sorted(keep)
    rest = [k for k in range(len(dims)) if k not in keep]
    mats = []
    for vec in (vec0, vec1):
        t = np.asarray(vec, dtype=complex).reshape(dims)
        t = np.transpose(t, keep + rest)
        mats.append(t.reshape(int(np.prod([dims[k] for k in keep])), -1))
    if mats[0].shape != mats[1].shape:
        raise DimensionMismatchError("vectors do not match the factor dims")
    s = np.linalg.svd(dag(mats[0]) @ mats[1], compute_uv=False)
    f = float(np.sum(s))
    return 1.0 if 1.0 < f <= 1.0 + 1e-9 else f


def _coerce_povm(povm) -> Povm:
    if isinstance(povm, Povm):
        return povm
    try:
        return Povm(tuple(povm))
    except ValueError as exc:
        raise InvalidPovmError(str(exc)) from exc


def outcome_distribution(rho, povm) -> np.ndarray:
    rho = _as_state_matrix(rho)
    povm = _coerce_povm(povm)
    if povm.dim != rho.shape[0]:
        raise DimensionMismatchError(f"POVM on dimension {povm.dim}, state on {rho.shape[0]}")
    p = np.real(np.einsum("ij,kji->k", rho, np.stack(povm.elements)))
    return np.where((p >= -1e-12) & (p <= PROB_FLOOR), 0.0, p)


def povm_overlap(rho0, rho1, povm) -> float:
    """Bhattacharyya overlap ``sum_a sqrt(p0(a) p1(a))`` of the two outcome distributions."""
    povm = _coerce_povm(povm)
    p0 = outcome_distribution(rho0, povm)
    p1 = outcome_distribution(rho1, povm)
    return float(np.sum(np.sqrt(np.clip(p0 * p1, 0.0, None))))


def _complete_basis(q: np.ndarray, d: int) -> np.ndarray:
    """Extend orthonormal columns ``q`` to a basis of C^d, Gram-Schmidt over e_0, e_1, ..."""
    cols = [q[:, k] for k in range(q.shape[1])]
    for i in range(d):
        if len(cols) == d:
            break
        v = np.zeros(d, dtype=complex)
        v[i] = 1.0
        for _ in range(2):
            for c in cols:
                v = v - c * np.vdot(c, v)
        n = np.linalg.norm(v)
        if n > 1e-6:
            cols.append(v / n)
    return np.column_stack(cols) if cols else np.zeros((d, 0), dtype=complex)


def optimal_pvm(rho0, rho1) -> Povm:
    """Rank-one PVM whose outcome overlap equals the fidelity.

    Uses the eigenbasis of ``M = rho0^{-1/2} |sqrt(rho1) sqrt(rho0)| rho0^{-1/2}``
    on the support of ``rho0``; the kernel of ``rho0`` is filled in with a
    Gram-Schmidt basis.
    """
    a, b = _as_state_matrix(rho0), _as_state_matrix(rho1)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"states of shape {a.shape} and {b.shape}")
    d = a.shape[0]
    w, v = eigh(a)
    support = w >= SUPPORT_TOL
    ws, vs = w[support], v[:, support]
    if vs.shape[1] == 0:
        return Povm.from_basis(np.eye(d, dtype=complex))
    root_a = (vs * np.sqrt(ws)) @ dag(vs)
    # |sqrt(b) sqrt(a)| = sqrt(sqrt(a) b sqrt(a)) via the SVD's right singular vectors
    _, s, vh = np.linalg.svd(_state_root(b) @ root_a)
    g = (dag(vh) * s) @ vh
    inv_half = 1.0 / np.sqrt(ws)
    m_sup = inv_half[:, None] * (dag(vs) @ g @ vs) * inv_half[None, :]
    _, mv = np.linalg.eigh(0.5 * (m_sup + dag(m_sup)))
    basis = _complete_basis(vs @ mv, d)
    return Povm.from_basis(basis)


__all__ = [
    "DensityOperator",
    "InvalidPovmError",
    "InvalidStateError",
    "Povm",
    "PureState",
    "fidelity",
    "marginal_fidelity",
    "optimal_pvm",
    "outcome_distribution",
    "povm_overlap",
    "purify",
]
