"""Dense complex linear algebra used throughout the package.

Operators are plain ``numpy`` arrays of dtype ``complex128``. Every function
here is pure: inputs are never modified in place.
"""

from __future__ import annotations

import string
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10


class NotHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""


class NegativeEigenvalueError(ValueError):
    """Raised when a matrix expected to be PSD has a clearly negative eigenvalue."""


class DimensionMismatchError(ValueError):
    """Raised when operator shapes are inconsistent with the requested operation."""


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a finite 2-d complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def tensor(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors), left to right."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        b = np.asarray(op, dtype=complex)
        if out.ndim == 1 and b.ndim == 1:
            out = np.multiply.outer(out, b).reshape(-1)
        elif out.ndim == 2 and b.ndim == 2:
            r = out[:, None, :, None] * b[None, :, None, :]
            out = r.reshape(out.shape[0] * b.shape[0], out.shape[1] * b.shape[1])
        else:
            out = np.kron(out, b)
    return out


def partial_trace(m, dims: Sequence[int], keep: Sequence[int] | int) -> np.ndarray:
    """Trace out every tensor factor of ``m`` not listed in ``keep``.

    Args:
        m: square operator on the product space with factor sizes ``dims``.
        dims: dimension of each tensor factor.
        keep: index (or indices) of the factors to retain; the result is
            ordered by ascending factor index.

    Returns:
        The reduced operator on the kept factors.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims)) if dims else 1
    if m.shape != (total, total):
        raise DimensionMismatchError(
            f"operator of shape {m.shape} does not match factor dims {dims}"
        )
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatchError(f"keep={keep} out of range for {len(dims)} factors")

    n = len(dims)
    letters = string.ascii_letters
    rows = list(letters[:n])
    cols = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep:
            cols[i] = rows[i]
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    spec = "".join(rows) + "".join(cols) + "->" + out
    reduced = np.einsum(spec, m.reshape(dims + dims))
    side = int(np.prod([dims[i] for i in keep])) if keep else 1
    return reduced.reshape(side, side)


def hermitian_part(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(m + m†)/2`` after checking ``m`` is Hermitian within ``tol``."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {m.shape}")
    dev = np.max(np.abs(m - dag(m))) if m.size else 0.0
    if dev > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {dev:.3g})")
    return 0.5 * (m + dag(m))


def eigh(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    return np.linalg.eigh(hermitian_part(m, tol))


def psd_sqrt(m, cutoff: float = 0.0) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues in ``[-1e-10, cutoff]`` are treated as zero; anything more
    negative raises :class:`NegativeEigenvalueError`.
    """
    w, v = eigh(m)
    if w.size and w[0] < -PSD_TOL:
        raise NegativeEigenvalueError(f"matrix has eigenvalue {w[0]:.3g} < 0")
    w = np.where(w > cutoff, w, 0.0)
    return (v * np.sqrt(w)) @ dag(v)


def op_norm(m) -> float:
    """Operator norm (largest singular value)."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def commutator_norm(a, b) -> float:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} do not commute-check")
    return op_norm(a @ b - b @ a)


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(dag(u) @ u - np.eye(u.shape[0]))) <= tol)
