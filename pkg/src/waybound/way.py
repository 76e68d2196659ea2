"""Evaluation of the conservation-law distinguishability trade-off.

For orthogonal system states ``psi0, psi1``, apparatus state ``sigma`` and a
unitary ``U`` conserving ``L_S + L_A``, the final states
``rho_i = U (|psi_i><psi_i| (x) sigma) U†`` obey

    |<psi0|L_S|psi1>| <= ||L_A|| F(rho0^S, rho1^S) + ||L_S|| F(rho0^A, rho1^A).

Nothing here raises when the inequality fails; the outcome is reported.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, TypeVar

import numpy as np

from .conservation import (
    ConservedPair,
    assemble,
    build_sectors,
    full_haar_unitary,
    haar_random_block_unitary,
)
from .linops import (
    DimensionMismatchError,
    as_matrix,
    commutator_norm,
    dag,
    is_unitary,
    op_norm,
    partial_trace,
    tensor,
)
from .sampling import random_density, random_pure_state, stream
from .states import fidelity, marginal_fidelity, purify

SLACK_TOL = 1e-9
CONSERVATION_TOL = 1e-8
ORTHOGONALITY_TOL = 1e-10

SIGMA_MODES = ("pure-random", "mixed-random", "fixed")
UNITARY_MODES = ("conserving", "haar-full")

REPORT_FIELDS = (
    "trial",
    "lhs",
    "f_sys",
    "f_app",
    "norm_l_sys",
    "norm_l_app",
    "rhs",
    "slack",
    "conservation_residual",
    "satisfied",
)

TRIPARTITE_FIELDS = (
    "trial",
    "lhs",
    "f_sys",
    "f_ae",
    "f_app",
    "norm_l_sys",
    "norm_l_app",
    "norm_l_env",
    "rhs_joint",
    "rhs_app",
    "slack_joint",
    "slack_app",
    "conservation_residual",
    "monotone",
    "satisfied",
)


class SchemeError(ValueError):
    """Raised for measurement schemes that violate their preconditions."""


def _vector(v) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(-1)


def _check_states(psi0: np.ndarray, psi1: np.ndarray, d_sys: int) -> None:
    if psi0.size != d_sys or psi1.size != d_sys:
        raise DimensionMismatchError(
            f"system states of size {psi0.size}, {psi1.size} for a {d_sys}-dim system"
        )
    for name, v in (("psi0", psi0), ("psi1", psi1)):
        if abs(np.linalg.norm(v) - 1.0) > ORTHOGONALITY_TOL:
            raise SchemeError(f"{name} is not normalized")
    overlap = abs(np.vdot(psi0, psi1))
    if overlap > ORTHOGONALITY_TOL:
        raise SchemeError(f"psi0 and psi1 are not orthogonal (|<psi0|psi1>| = {overlap:.3g})")


@dataclass(frozen=True)
class MeasurementScheme:
    psi0: np.ndarray
    psi1: np.ndarray
    sigma: np.ndarray
    u: np.ndarray
    cp: ConservedPair

    def __post_init__(self):
        psi0, psi1 = _vector(self.psi0), _vector(self.psi1)
        sigma = np.asarray(self.sigma, dtype=complex)
        sigma = as_matrix(np.outer(sigma, np.conj(sigma)) if sigma.ndim == 1 else sigma)
        u = as_matrix(self.u)
        d_sys, d_app = self.cp.dims
        _check_states(psi0, psi1, d_sys)
        if sigma.shape != (d_app, d_app):
            raise DimensionMismatchError(f"sigma has shape {sigma.shape}, apparatus dim is {d_app}")
        if u.shape != (d_sys * d_app,) * 2:
            raise DimensionMismatchError(f"U has shape {u.shape}, expected {(d_sys * d_app,) * 2}")
        if not is_unitary(u, 1e-9):
            raise SchemeError("U is not unitary within 1e-9")
        object.__setattr__(self, "psi0", psi0)
        object.__setattr__(self, "psi1", psi1)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "u", u)

    def final_states(self) -> tuple[np.ndarray, np.ndarray]:
        out = []
        for psi in (self.psi0, self.psi1):
            rho = tensor(np.outer(psi, np.conj(psi)), self.sigma)
            out.append(self.u @ rho @ dag(self.u))
        return out[0], out[1]

    def lhs_amplitude(self) -> complex:
        return complex(np.vdot(self.psi0, self.cp.l_sys @ self.psi1))


@dataclass(frozen=True)
class TradeoffReport:
    lhs: float
    f_sys: float
    f_app: float
    norm_l_sys: float
    norm_l_app: float
    rhs: float
    slack: float
    conservation_residual: float
    satisfied: bool
    trial: int = 0
    identity_residual: float = 0.0
    tol: float = field(default=SLACK_TOL, repr=False)

    @property
    def applicable(self) -> bool:
        """Whether the conservation hypothesis holds, so a failure would refute the bound."""
        return self.conservation_residual <= CONSERVATION_TOL

    @property
    def violated(self) -> bool:
        return self.applicable and not self.satisfied

    def record(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in REPORT_FIELDS}

    def detail(self) -> dict:
        d = self.record()
        d["identity_residual"] = self.identity_residual
        d["applicable"] = self.applicable
        return d


def purified_outputs(scheme: MeasurementScheme) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Final global vectors ``(U (x) 1)(|psi_i> (x) |Omega>)`` with Omega purifying sigma.

    Returns the two vectors and the factor dims ``[d_S, d_A, d_ancilla]``.
    """
    d_sys, d_app = scheme.cp.dims
    omega = purify(scheme.sigma).amplitudes
    d_anc = omega.size // d_app
    omega = omega.reshape(d_app, d_anc)
    vecs = [(scheme.u @ tensor(psi[:, None], omega)).reshape(-1) for psi in (scheme.psi0, scheme.psi1)]
    return vecs[0], vecs[1], [d_sys, d_app, d_anc]


def eq2_terms(scheme: MeasurementScheme, outputs=None) -> tuple[complex, complex, complex]:
    """Terms of the conservation identity on the purified apparatus.

    Returns ``(<Psi0|U† L_S U|Psi1>, <Psi0|U† L_A U|Psi1>, <psi0|L_S|psi1>)``;
    for a conserving ``U`` the first two sum to the third.
    """
    big0, big1, dims = outputs or purified_outputs(scheme)
    t0, t1 = big0.reshape(dims), big1.reshape(dims)
    ls_t1 = np.einsum("ij,jab->iab", scheme.cp.l_sys, t1)
    la_t1 = np.einsum("ij,ajb->aib", scheme.cp.l_app, t1)
    return (
        complex(np.vdot(t0, ls_t1)),
        complex(np.vdot(t0, la_t1)),
        scheme.lhs_amplitude(),
    )


def density_fidelities(scheme: MeasurementScheme) -> tuple[float, float]:
    """``(f_sys, f_app)`` from direct density-operator evolution of the mixed input.

    Independent of the purification route used by :func:`evaluate_tradeoff`.
    """
    dims = list(scheme.cp.dims)
    rho0, rho1 = scheme.final_states()
    return (
        fidelity(partial_trace(rho0, dims, 0), partial_trace(rho1, dims, 0)),
        fidelity(partial_trace(rho0, dims, 1), partial_trace(rho1, dims, 1)),
    )


def evaluate_tradeoff(scheme: MeasurementScheme, tol: float = SLACK_TOL, trial: int = 0) -> TradeoffReport:
    """Both sides of the trade-off for one scheme.

    Marginal fidelities come from the purified output vectors, which keeps
    them accurate to rounding even when the marginals are nearly orthogonal.
    """
    cp = scheme.cp
    outputs = purified_outputs(scheme)
    v0, v1, dims = outputs
    f_sys = marginal_fidelity(v0, v1, dims, 0)
    f_app = marginal_fidelity(v0, v1, dims, 1)
    norm_s, norm_a = cp.norms
    sys_term, app_term, amp = eq2_terms(scheme, outputs)
    lhs = abs(amp)
    rhs = norm_a * f_sys + norm_s * f_app
    slack = rhs - lhs
    return TradeoffReport(
        lhs=lhs,
        f_sys=f_sys,
        f_app=f_app,
        norm_l_sys=norm_s,
        norm_l_app=norm_a,
        rhs=rhs,
        slack=slack,
        conservation_residual=commutator_norm(scheme.u, cp.total),
        satisfied=bool(slack >= -tol),
        trial=trial,
        identity_residual=abs(sys_term + app_term - amp),
        tol=tol,
    )


T = TypeVar("T")


def run_ordered(fn: Callable[[int], T], n: int, threads: int = 1) -> list[T]:
    """``[fn(0), ..., fn(n-1)]``, optionally on a thread pool; order is by index."""
    if threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def draw_sigma(mode: str, d: int, rng: np.random.Generator, fixed=None) -> np.ndarray:
    if mode == "pure-random":
        v = random_pure_state(d, rng)
        return np.outer(v, np.conj(v))
    if mode == "mixed-random":
        return random_density(d, rng)
    if mode == "fixed":
        if fixed is None:
            sigma = np.zeros((d, d), dtype=complex)
            sigma[0, 0] = 1.0
            return sigma
        sigma = np.asarray(fixed, dtype=complex)
        return np.outer(sigma, np.conj(sigma)) if sigma.ndim == 1 else sigma
    raise ValueError(f"unknown sigma mode {mode!r}; expected one of {SIGMA_MODES}")


def sweep(
    cp: ConservedPair,
    psi0,
    psi1,
    n_trials: int,
    seed: int = 0,
    sigma_mode: str = "pure-random",
    *,
    sigma=None,
    unitary_mode: str = "conserving",
    tol: float = SLACK_TOL,
    threads: int = 1,
) -> list[TradeoffReport]:
    """Monte-Carlo check of the trade-off over random unitaries and apparatus states.

    Trial ``t`` draws from the stream ``(seed, t)``: first the unitary, then sigma.
    ``unitary_mode="haar-full"`` samples unrestricted unitaries as a control group.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    if sigma_mode not in SIGMA_MODES:
        raise ValueError(f"unknown sigma mode {sigma_mode!r}; expected one of {SIGMA_MODES}")
    if unitary_mode not in UNITARY_MODES:
        raise ValueError(f"unknown unitary mode {unitary_mode!r}; expected one of {UNITARY_MODES}")
    psi0, psi1 = _vector(psi0), _vector(psi1)
    _check_states(psi0, psi1, cp.d_sys)

    def trial(t: int) -> TradeoffReport:
        rng = stream(seed, t)
        if unitary_mode == "conserving":
            u = assemble(haar_random_block_unitary(cp, rng), cp)
        else:
            u = full_haar_unitary(cp, rng)
        s = draw_sigma(sigma_mode, cp.d_app, rng, sigma)
        return evaluate_tradeoff(MeasurementScheme(psi0, psi1, s, u, cp), tol, trial=t)

    return run_ordered(trial, n_trials, threads)


@dataclass(frozen=True)
class RepeatabilityResult:
    repeatable: bool
    apparatus_overlap: float


def check_repeatability(scheme: MeasurementScheme, tol: float = 1e-9) -> RepeatabilityResult:
    """Whether both system states pass through the interaction unchanged.

    Requires a pure apparatus state. ``apparatus_overlap`` is the fidelity of
    the two final apparatus marginals.
    """
    w, v = np.linalg.eigh(scheme.sigma)
    if w[-1] < 1.0 - tol:
        raise SchemeError("repeatability check needs a pure apparatus state")
    omega = v[:, -1]
    dims = list(scheme.cp.dims)
    repeatable = True
    apps = []
    for psi in (scheme.psi0, scheme.psi1):
        out = scheme.u @ tensor(psi, omega)
        rho = np.outer(out, np.conj(out))
        rho_s = partial_trace(rho, dims, 0)
        purity = float(np.real(np.trace(rho_s @ rho_s)))
        stay = float(np.real(np.vdot(psi, rho_s @ psi)))
        repeatable &= purity >= 1.0 - tol and stay >= 1.0 - tol
        apps.append(partial_trace(rho, dims, 1))
    return RepeatabilityResult(bool(repeatable), fidelity(apps[0], apps[1]))


# --- tripartite: system, apparatus, environment ------------------------------


def tripartite_pair(l_sys, l_app, l_env, grouping_tol: float = 1e-9) -> ConservedPair:
    """Charge sectors of ``L_S + L_A + L_E`` with apparatus and environment merged."""
    l_app, l_env = as_matrix(l_app), as_matrix(l_env)
    l_ae = tensor(l_app, np.eye(l_env.shape[0])) + tensor(np.eye(l_app.shape[0]), l_env)
    return build_sectors(l_sys, l_ae, grouping_tol)


@dataclass(frozen=True)
class TripartiteScheme:
    psi0: np.ndarray
    psi1: np.ndarray
    sigma: np.ndarray  # on H_A (x) H_E
    u: np.ndarray  # on H_S (x) H_A (x) H_E
    l_sys: np.ndarray
    l_app: np.ndarray
    l_env: np.ndarray

    def __post_init__(self):
        for name in ("l_sys", "l_app", "l_env"):
            object.__setattr__(self, name, as_matrix(getattr(self, name)))
        psi0, psi1 = _vector(self.psi0), _vector(self.psi1)
        _check_states(psi0, psi1, self.l_sys.shape[0])
        object.__setattr__(self, "psi0", psi0)
        object.__setattr__(self, "psi1", psi1)

    @property
    def dims(self) -> list[int]:
        return [self.l_sys.shape[0], self.l_app.shape[0], self.l_env.shape[0]]

    def as_bipartite(self, cp: ConservedPair | None = None) -> MeasurementScheme:
        """The same experiment with apparatus and environment viewed as one party."""
        if cp is None:
            cp = tripartite_pair(self.l_sys, self.l_app, self.l_env)
        return MeasurementScheme(self.psi0, self.psi1, self.sigma, self.u, cp)


@dataclass(frozen=True)
class TripartiteReport:
    lhs: float
    f_sys: float
    f_ae: float
    f_app: float
    norm_l_sys: float
    norm_l_app: float
    norm_l_env: float
    rhs_joint: float
    rhs_app: float
    slack_joint: float
    slack_app: float
    conservation_residual: float
    monotone: bool
    satisfied: bool
    trial: int = 0

    def record(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in TRIPARTITE_FIELDS}


def evaluate_tripartite(
    scheme: TripartiteScheme,
    tol: float = SLACK_TOL,
    trial: int = 0,
    cp: ConservedPair | None = None,
) -> TripartiteReport:
    """Trade-off with an environment, in joint (A+E) and apparatus-only form."""
    bi = scheme.as_bipartite(cp)
    v0, v1, (d_sys, d_ae, d_anc) = purified_outputs(bi)
    dims = scheme.dims + [d_anc]
    f_sys = marginal_fidelity(v0, v1, dims, 0)
    f_ae = marginal_fidelity(v0, v1, dims, [1, 2])
    f_app = marginal_fidelity(v0, v1, dims, 1)
    n_s, n_a, n_e = op_norm(scheme.l_sys), op_norm(scheme.l_app), op_norm(scheme.l_env)
    lhs = abs(bi.lhs_amplitude())
    rhs_joint = (n_a + n_e) * f_sys + n_s * f_ae
    rhs_app = (n_a + n_e) * f_sys + n_s * f_app
    slack_joint, slack_app = rhs_joint - lhs, rhs_app - lhs
    monotone = f_ae <= f_app + tol
    return TripartiteReport(
        lhs=lhs,
        f_sys=f_sys,
        f_ae=f_ae,
        f_app=f_app,
        norm_l_sys=n_s,
        norm_l_app=n_a,
        norm_l_env=n_e,
        rhs_joint=rhs_joint,
        rhs_app=rhs_app,
        slack_joint=slack_joint,
        slack_app=slack_app,
        conservation_residual=commutator_norm(bi.u, bi.cp.total),
        monotone=bool(monotone),
        satisfied=bool(slack_joint >= -tol and slack_app >= -tol and monotone),
        trial=trial,
    )


def tripartite_sweep(
    l_sys,
    l_app,
    l_env,
    psi0,
    psi1,
    n_trials: int,
    seed: int = 0,
    sigma_mode: str = "pure-random",
    *,
    sigma=None,
    tol: float = SLACK_TOL,
    threads: int = 1,
) -> list[TripartiteReport]:
    """Random conserving unitaries on S (x) A (x) E, sigma drawn on A (x) E."""
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    cp = tripartite_pair(l_sys, l_app, l_env)
    psi0, psi1 = _vector(psi0), _vector(psi1)

    def trial(t: int) -> TripartiteReport:
        rng = stream(seed, t)
        u = assemble(haar_random_block_unitary(cp, rng), cp)
        s = draw_sigma(sigma_mode, cp.d_app, rng, sigma)
        scheme = TripartiteScheme(psi0, psi1, s, u, cp.l_sys, l_app, l_env)
        return evaluate_tripartite(scheme, tol, trial=t, cp=cp)

    return run_ordered(trial, n_trials, threads)


__all__ = [
    "MeasurementScheme",
    "REPORT_FIELDS",
    "RepeatabilityResult",
    "SchemeError",
    "TRIPARTITE_FIELDS",
    "TradeoffReport",
    "TripartiteReport",
    "TripartiteScheme",
    "check_repeatability",
    "eq2_terms",
    "evaluate_tradeoff",
    "evaluate_tripartite",
    "density_fidelities",
    "purified_outputs",
    "run_ordered",
    "sweep",
    "tripartite_pair",
    "tripartite_sweep",
]
