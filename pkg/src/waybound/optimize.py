"""Derivative-free search over charge-conserving unitaries.

Every candidate is ``exp_generator(cp, params)`` assembled across sectors, so
conservation holds by construction. Each restart is an independent
Nelder-Mead descent; the best restart wins, ties going to the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .conservation import ConservedPair, assemble, blocks_of, exp_generator, generator_params
from .linops import dag
from .sampling import stream
from .way import MeasurementScheme, TradeoffReport, evaluate_tradeoff, run_ordered

OBJECTIVE_KINDS = ("weighted-fidelity", "max-fidelity", "slack")

DEFAULT_RESTARTS = 32
DEFAULT_MAX_EVALS = 5000
DEFAULT_XATOL = 1e-9
DEFAULT_STEP = 0.5


@dataclass(frozen=True)
class Objective:
    kind: str = "slack"
    w_sys: float = 1.0
    w_app: float = 1.0

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}; expected one of {OBJECTIVE_KINDS}")
        if self.kind == "weighted-fidelity":
            if self.w_sys < 0 or self.w_app < 0 or self.w_sys + self.w_app <= 0:
                raise ValueError("weighted-fidelity needs non-negative weights with a positive sum")

    def __call__(self, report: TradeoffReport) -> float:
        if self.kind == "weighted-fidelity":
            return self.w_sys * report.f_sys + self.w_app * report.f_app
        if self.kind == "max-fidelity":
            return max(report.f_sys, report.f_app)
        return report.slack


@dataclass
class OptimizationResult:
    best_params: np.ndarray
    best_report: TradeoffReport
    objective_value: float
    restarts_used: int
    evaluations: int
    seed: int
    best_restart: int
    restart_values: list[float] = field(default_factory=list)
    restart_reports: list[TradeoffReport] = field(default_factory=list)
    trace: list[tuple[int, int, float]] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "objective_value": self.objective_value,
            "restarts_used": self.restarts_used,
            "evaluations": self.evaluations,
            "best_restart": self.best_restart,
            "best_params": [float(x) for x in self.best_params],
            "best_report": self.best_report.detail(),
            "restart_values": list(self.restart_values),
        }


def _sigma_from_params(x: np.ndarray, d: int) -> np.ndarray:
    v = x[:d] + 1j * x[d : 2 * d]
    n = np.linalg.norm(v)
    if n < 1e-12:
        v = np.zeros(d, dtype=complex)
        v[0] = 1.0
    else:
        v = v / n
    return np.outer(v, np.conj(v))


def _sigma_coords(sigma: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(sigma)
    top = v[:, -1]
    return np.concatenate([top.real, top.imag])


def report_at(
    cp: ConservedPair,
    psi0,
    psi1,
    sigma,
    params,
    *,
    optimize_sigma: bool = False,
    trial: int = 0,
) -> TradeoffReport:
    """Trade-off report for one point of the search space."""
    x = np.asarray(params, dtype=float)
    u = assemble(exp_generator(cp, x[: cp.n_params]), cp)
    if optimize_sigma:
        sigma = _sigma_from_params(x[cp.n_params :], cp.d_app)
    return evaluate_tradeoff(MeasurementScheme(psi0, psi1, sigma, u, cp), trial=trial)


def structured_starts(cp: ConservedPair, psi1) -> list[np.ndarray]:
    """Known good generator coordinates: the Ohira-Pearle interaction on spin-1/2 setups."""
    from .scenarios import ohira_pearle_matrix, spin_half_amplitudes

    found = spin_half_amplitudes(cp, psi1)
    if found is None:
        return []
    alpha, beta, n = found
    norm = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    u = ohira_pearle_matrix(alpha / norm, beta / norm, n)
    bu = blocks_of(u, cp)
    for b in bu.blocks:
        if np.max(np.abs(dag(b) @ b - np.eye(b.shape[0]))) > 1e-9:
            return []
    return [generator_params(bu, cp)]


def _nelder_mead(fun, x0: np.ndarray, max_evals: int, xatol: float, step: float):
    n = x0.size
    if n == 0:
        return x0, fun(x0), 1, [(1, fun(x0))]
    simplex = np.vstack([x0, x0 + step * np.eye(n)])
    trace: list[tuple[int, float]] = []
    calls = [0]

    def counted(x):
        calls[0] += 1
        return fun(x)

    def callback(intermediate_result):
        trace.append((calls[0], float(intermediate_result.fun)))

    res = minimize(
        counted,
        x0,
        method="Nelder-Mead",
        callback=callback,
        options={
            "initial_simplex": simplex,
            "maxfev": max_evals,
            "maxiter": 100 * max_evals,
            "xatol": xatol,
            "fatol": np.inf,
            "adaptive": n > 10,
        },
    )
    return np.asarray(res.x, dtype=float), float(res.fun), calls[0], trace


def optimize_unitary(
    cp: ConservedPair,
    psi0,
    psi1,
    sigma,
    objective: Objective,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    *,
    max_evals: int = DEFAULT_MAX_EVALS,
    xatol: float = DEFAULT_XATOL,
    step: float = DEFAULT_STEP,
    optimize_sigma: bool = False,
    stream_key: tuple[int, ...] = (),
    threads: int = 1,
) -> OptimizationResult:
    """Minimize ``objective`` over conserving unitaries (and optionally a pure sigma).

    Restart 0 starts at the identity, then any structured starts (the
    Ohira-Pearle interaction when the setup is spin-1/2), and the remaining
    restarts start from uniform draws in ``[-pi, pi]`` taken from the stream
    ``(seed, *stream_key, restart)``.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.ndim == 1:
        sigma = np.outer(sigma, np.conj(sigma))
    n_u = cp.n_params
    extra = _sigma_coords(sigma) if optimize_sigma else np.zeros(0)

    starts = [np.concatenate([np.zeros(n_u), extra])]
    starts += [np.concatenate([p, extra]) for p in structured_starts(cp, psi1)]
    starts = starts[:restarts]

    def start(r: int) -> np.ndarray:
        if r < len(starts):
            return starts[r]
        rng = stream(seed, *stream_key, r)
        x = rng.uniform(-np.pi, np.pi, n_u)
        if optimize_sigma:
            x = np.concatenate([x, rng.standard_normal(2 * cp.d_app)])
        return x

    def fun(x: np.ndarray) -> float:
        return objective(report_at(cp, psi0, psi1, sigma, x, optimize_sigma=optimize_sigma))

    def local(r: int):
        x, val, evals, trace = _nelder_mead(fun, start(r), max_evals, xatol, step)
        return x, val, evals, [(r, e, v) for e, v in trace]

    runs = run_ordered(local, restarts, threads)
    values = [val for _, val, _, _ in runs]
    best = int(np.argmin(values))  # first minimum wins ties
    best_x = runs[best][0]
    reports = [report_at(cp, psi0, psi1, sigma, x, optimize_sigma=optimize_sigma) for x, _, _, _ in runs]
    return OptimizationResult(
        best_params=best_x,
        best_report=reports[best],
        objective_value=values[best],
        restarts_used=restarts,
        evaluations=sum(e for _, _, e, _ in runs),
        seed=seed,
        best_restart=best,
        restart_values=values,
        restart_reports=reports,
        trace=[row for run in runs for row in run[3]],
    )


class FrontierPoint(NamedTuple):
    """An ``(f_app, f_sys)`` pair with the weight ratio and slack that produced it."""

    f_app: float
    f_sys: float
    weight_ratio: float
    slack: float


FRONTIER_FIELDS = ("f_app", "f_sys", "weight_ratio", "slack")


def pareto_scan(
    cp: ConservedPair,
    psi0,
    psi1,
    sigma,
    n_points: int,
    seed: int = 0,
    *,
    restarts: int = 4,
    max_evals: int = 2000,
    ratio_range: tuple[float, float] = (1e-2, 1e2),
    threads: int = 1,
) -> list[FrontierPoint]:
    """Empirical (f_app, f_sys) frontier from weighted-fidelity minimizations.

    The ratio ``w_app / w_sys`` runs over a logarithmic grid; points come back
    sorted by ``f_app``.
    """
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    ratios = np.logspace(np.log10(ratio_range[0]), np.log10(ratio_range[1]), n_points)

    def point(k: int) -> FrontierPoint:
        r = float(ratios[k])
        obj = Objective("weighted-fidelity", w_sys=1.0 / (1.0 + r), w_app=r / (1.0 + r))
        res = optimize_unitary(
            cp, psi0, psi1, sigma, obj, restarts, seed, max_evals=max_evals, stream_key=(k,)
        )
        rep = res.best_report
        return FrontierPoint(rep.f_app, rep.f_sys, r, rep.slack)

    points = run_ordered(point, n_points, threads)
    return sorted(points, key=lambda p: (p.f_app, p.f_sys, p.weight_ratio))


__all__ = [
    "FRONTIER_FIELDS",
    "FrontierPoint",
    "OBJECTIVE_KINDS",
    "Objective",
    "OptimizationResult",
    "optimize_unitary",
    "pareto_scan",
    "report_at",
    "structured_starts",
]
