"""Spin-1/2 constructions: the measured pair, the Ohira-Pearle interaction,
and the apparatus-size scaling study.

Basis convention: spin label ``|1>`` is coordinate 0 and ``|-1>`` is
coordinate 1, on the system and on every apparatus or environment spin.
Units have hbar = 1, so ``S_z = diag(1, -1) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conservation import BlockUnitary, ConservedPair, assemble, blocks_of, build_sectors, spin_z
from .linops import tensor
from .way import MeasurementScheme, run_ordered

AMPLITUDE_TOL = 1e-12
SCALING_PENALTY = 1e6
ZERO_F_APP = 1e-6

PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)


class AmplitudeError(ValueError):
    pass


def check_amplitudes(alpha: complex, beta: complex) -> tuple[complex, complex]:
    alpha, beta = complex(alpha), complex(beta)
    if abs(alpha) == 0 or abs(beta) == 0:
        raise AmplitudeError("alpha and beta must both be nonzero")
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > AMPLITUDE_TOL:
        raise AmplitudeError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
    return alpha, beta


@dataclass(frozen=True)
class SpinHalfScenario:
    alpha: complex
    beta: complex
    n_apparatus_spins: int = 1
    n_environment_spins: int = 0

    def __post_init__(self):
        alpha, beta = check_amplitudes(self.alpha, self.beta)
        if self.n_apparatus_spins < 0 or self.n_environment_spins < 0:
            raise ValueError("spin counts must be non-negative")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def psi1(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    @property
    def psi0(self) -> np.ndarray:
        return np.array([np.conj(self.beta), -np.conj(self.alpha)], dtype=complex)

    @property
    def l_env(self) -> np.ndarray:
        return spin_z(self.n_environment_spins)


def build_spin_scenario(s: SpinHalfScenario) -> tuple[np.ndarray, np.ndarray, ConservedPair]:
    """``(psi0, psi1, ConservedPair)`` for a spin-1/2 system and an n-spin apparatus."""
    cp = build_sectors(spin_z(1), spin_z(s.n_apparatus_spins))
    amp = np.vdot(s.psi0, cp.l_sys @ s.psi1)
    if abs(amp - s.alpha * s.beta) > 1e-12:
        raise AssertionError(f"<psi0|L_S|psi1> = {amp}, expected alpha*beta = {s.alpha * s.beta}")
    return s.psi0, s.psi1, cp


def ohira_pearle_matrix(alpha: complex, beta: complex, n_apparatus_spins: int = 1) -> np.ndarray:
    """Full-space Ohira-Pearle unitary, acting on the first apparatus spin only.

    On system (x) first spin it is the identity on ``|1,1>`` and ``|-1,-1>`` and
    the reflection ``2P - 1`` on span{``|1,-1>``, ``|-1,1>``}, with ``P`` the
    projector onto ``alpha|1,-1> + beta|-1,1>``.
    """
    alpha, beta = check_amplitudes(alpha, beta)
    p = np.array([0.0, alpha, beta, 0.0], dtype=complex)
    u = np.eye(4, dtype=complex)
    u[1:3, 1:3] = 2.0 * np.outer(p[1:3], np.conj(p[1:3])) - np.eye(2)
    rest = 2 ** (n_apparatus_spins - 1)
    return tensor(u, np.eye(rest))


def plus_state(n: int) -> np.ndarray:
    """``|+>^{(x) n}`` as a density matrix."""
    v = np.ones(2**n, dtype=complex) / np.sqrt(2.0**n)
    return np.outer(v, np.conj(v))


def ohira_pearle_unitary(alpha: complex, beta: complex) -> tuple[BlockUnitary, np.ndarray]:
    """Sector blocks of the Ohira-Pearle interaction and the apparatus state ``|+><+|``.

    Blocks refer to ``build_sectors(spin_z(1), spin_z(1))``.
    """
    cp = build_sectors(spin_z(1), spin_z(1))
    return blocks_of(ohira_pearle_matrix(alpha, beta), cp), plus_state(1)


def ohira_pearle_scheme(alpha: complex, beta: complex) -> MeasurementScheme:
    s = SpinHalfScenario(alpha, beta)
    psi0, psi1, cp = build_spin_scenario(s)
    bu, sigma = ohira_pearle_unitary(s.alpha, s.beta)
    return MeasurementScheme(psi0, psi1, sigma, assemble(bu, cp), cp)


def basis_copier(psi0, psi1, d_app: int = 2) -> np.ndarray:
    """Unitary sending ``|psi_i> (x) |0>`` to ``|psi_i> (x) |i>``.

    It copies which state was prepared into the apparatus without disturbing
    the system, which no charge-conserving interaction can do when
    ``<psi0|L_S|psi1> != 0``. ``psi0`` and ``psi1`` must be orthonormal.
    """
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    psi1 = np.asarray(psi1, dtype=complex).reshape(-1)
    if d_app < 2:
        raise ValueError("the apparatus needs dimension at least 2")
    p1 = np.outer(psi1, np.conj(psi1))
    flip = np.eye(d_app, dtype=complex)
    flip[:2, :2] = [[0, 1], [1, 0]]
    return tensor(np.eye(psi0.size) - p1, np.eye(d_app)) + tensor(p1, flip)


def spin_half_amplitudes(cp: ConservedPair, psi1) -> tuple[complex, complex, int] | None:
    """``(alpha, beta, n)`` if ``cp`` is a spin-1/2 system with an n-spin apparatus."""
    psi1 = np.asarray(psi1, dtype=complex).reshape(-1)
    if cp.d_sys != 2 or cp.d_app < 2 or cp.d_app & (cp.d_app - 1):
        return None
    n = cp.d_app.bit_length() - 1
    if not (np.allclose(cp.l_sys, spin_z(1), atol=1e-12) and np.allclose(cp.l_app, spin_z(n), atol=1e-12)):
        return None
    if min(abs(psi1[0]), abs(psi1[1])) < 1e-12:
        return None
    return complex(psi1[0]), complex(psi1[1]), n


@dataclass(frozen=True)
class ScalingRow:
    n: int
    norm_l_app: float
    bound_floor: float
    best_f_sys: float
    best_f_app: float

    def record(self) -> dict:
        return {
            "n": self.n,
            "norm_l_app": self.norm_l_app,
            "bound_floor": self.bound_floor,
            "best_f_sys": self.best_f_sys,
            "best_f_app": self.best_f_app,
        }


SCALING_FIELDS = ("n", "norm_l_app", "bound_floor", "best_f_sys", "best_f_app")


def apparatus_scaling_study(
    alpha: complex,
    beta: complex,
    max_spins: int,
    restarts: int = 4,
    seed: int = 0,
    *,
    max_evals: int = 5000,
    threads: int = 1,
) -> list[ScalingRow]:
    """Smallest system fidelity reachable at (near) perfect apparatus distinguishability.

    For each apparatus size ``n`` the optimizer minimizes
    ``f_sys + 1e6 * f_app`` with the apparatus prepared in ``|+>^n``. Among the
    restart results with ``f_app <= 1e-6`` the smallest ``f_sys`` is reported
    (NaN if none qualifies), next to the floor ``|alpha beta| / ||L_A||``.
    """
    from .optimize import Objective, optimize_unitary

    if max_spins < 1:
        raise ValueError("max_spins must be at least 1")
    s = SpinHalfScenario(alpha, beta)
    objective = Objective("weighted-fidelity", w_sys=1.0, w_app=SCALING_PENALTY)

    def row(k: int) -> ScalingRow:
        n = k + 1
        psi0, psi1, cp = build_spin_scenario(SpinHalfScenario(s.alpha, s.beta, n))
        result = optimize_unitary(
            cp, psi0, psi1, plus_state(n), objective, restarts=restarts, seed=seed, max_evals=max_evals, stream_key=(n,)
        )
        ok = [r for r in result.restart_reports if r.f_app <= ZERO_F_APP]
        best = min(ok, key=lambda r: (r.f_sys, r.f_app)) if ok else None
        norm_a = n / 2.0
        return ScalingRow(
            n=n,
            norm_l_app=norm_a,
            bound_floor=abs(s.alpha * s.beta) / norm_a,
            best_f_sys=best.f_sys if best else float("nan"),
            best_f_app=best.f_app if best else float("nan"),
        )

    return run_ordered(row, max_spins, threads)


__all__ = [
    "AmplitudeError",
    "MINUS",
    "PLUS",
    "SCALING_FIELDS",
    "ScalingRow",
    "SpinHalfScenario",
    "apparatus_scaling_study",
    "basis_copier",
    "build_spin_scenario",
    "check_amplitudes",
    "ohira_pearle_matrix",
    "ohira_pearle_scheme",
    "ohira_pearle_unitary",
    "plus_state",
    "spin_half_amplitudes",
]
