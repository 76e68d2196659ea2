"""Command-line entry point.

Every command reads an optional JSON config (``--config``); explicit flags
override config fields, and flag names are the kebab-case field names.
Exit codes: 0 success, 1 inequality violation found, 2 configuration error.
"""

from __future__ import annotations

import functools
import os
import sys
import time

import click
import numpy as np

from .conservation import build_sectors
from .optimize import FRONTIER_FIELDS, OBJECTIVE_KINDS, Objective, optimize_unitary, pareto_scan
from .reporting import (
    ConfigError,
    fmt,
    load_config,
    parse_matrix,
    parse_observable,
    parse_vector,
    write_csv,
    write_json,
)
from .scenarios import (
    SCALING_FIELDS,
    SpinHalfScenario,
    apparatus_scaling_study,
    build_spin_scenario,
    ohira_pearle_scheme,
    plus_state,
)
from .way import (
    REPORT_FIELDS,
    SIGMA_MODES,
    TRIPARTITE_FIELDS,
    UNITARY_MODES,
    evaluate_tradeoff,
    sweep,
    tripartite_sweep,
)

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2
MAX_SPINS = 6
MAX_TOTAL_DIM = 2**7
EXAMPLE_TOL = 1e-9


def _env_seed() -> int:
    raw = os.environ.get("WAYBOUND_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("WAYBOUND_SEED", f"not an integer: {raw!r}") from None


def _settings(config: str | None, flags: dict, defaults: dict) -> dict:
    """defaults < WAYBOUND_SEED < config file < flags."""
    cfg = dict(defaults)
    cfg["seed"] = _env_seed()
    cfg.update(load_config(config))
    cfg.update({k: v for k, v in flags.items() if v is not None})
    cfg["threads"] = cfg.get("threads") or os.cpu_count() or 1
    return cfg


def _int(cfg: dict, key: str, minimum: int | None = None) -> int:
    v = cfg.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
        if isinstance(v, float) and v.is_integer():
            v = int(v)
        else:
            raise ConfigError(key, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(key, f"must be at least {minimum}, got {v}")
    return int(v)


def _float(cfg: dict, key: str) -> float:
    v = cfg.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    return float(v)


def _complex(cfg: dict, key: str) -> complex:
    v = cfg.get(key)
    try:
        if isinstance(v, str):
            return complex(v.replace(" ", ""))
        if isinstance(v, list) and len(v) == 2:
            return complex(float(v[0]), float(v[1]))
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return complex(v)
    except (TypeError, ValueError):
        pass
    raise ConfigError(key, f"expected a real or complex amplitude, got {v!r}")


def _choice(cfg: dict, key: str, options) -> str:
    v = cfg.get(key)
    if v not in options:
        raise ConfigError(key, f"unknown value {v!r}; expected one of {', '.join(options)}")
    return v


def _spin_half(cfg: dict, n_app: int = 1, n_env: int = 0) -> SpinHalfScenario:
    alpha, beta = _complex(cfg, "alpha"), _complex(cfg, "beta")
    try:
        return SpinHalfScenario(alpha, beta, n_app, n_env)
    except ValueError as exc:
        raise ConfigError("alpha", str(exc)) from exc


def _scenario(cfg: dict):
    """``(psi0, psi1, cp, default sigma)`` from the scenario fields."""
    kind = _choice(cfg, "scenario", ("spin-half", "explicit"))
    if kind == "spin-half":
        n = _int(cfg, "app_spins", 1)
        if 2 * 2**n > MAX_TOTAL_DIM:
            raise ConfigError("app_spins", f"total dimension 2*2^{n} exceeds {MAX_TOTAL_DIM}")
        psi0, psi1, cp = build_spin_scenario(_spin_half(cfg, n))
        sigma = _sigma(cfg, cp.d_app)
        return psi0, psi1, cp, plus_state(n) if sigma is None else sigma
    for key in ("l_sys", "l_app"):
        if cfg.get(key) is None:
            raise ConfigError(key, "required for the explicit scenario")
    l_sys = parse_observable(cfg["l_sys"], "l_sys")
    l_app = parse_observable(cfg["l_app"], "l_app")
    d_s, d_a = l_sys.shape[0], l_app.shape[0]
    if d_s * d_a > MAX_TOTAL_DIM:
        raise ConfigError("l_app", f"total dimension {d_s * d_a} exceeds {MAX_TOTAL_DIM}")
    if d_s < 2:
        raise ConfigError("l_sys", "the system needs dimension at least 2")
    states = []
    for i, key in enumerate(("psi0", "psi1")):
        if cfg.get(key) is None:
            v = np.zeros(d_s, dtype=complex)
            v[i] = 1.0
        else:
            v = parse_vector(cfg[key], key)
        if v.size != d_s:
            raise ConfigError(key, f"has {v.size} amplitudes, system dimension is {d_s}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ConfigError(key, "state is not normalized")
        states.append(v)
    if abs(np.vdot(states[0], states[1])) > 1e-10:
        raise ConfigError("psi1", "psi0 and psi1 must be orthogonal")
    sigma = _sigma(cfg, d_a)
    if sigma is None:
        sigma = np.zeros((d_a, d_a), dtype=complex)
        sigma[0, 0] = 1.0
    grouping = _float(cfg, "grouping_tol") if cfg.get("grouping_tol") is not None else 1e-9
    cp = build_sectors(l_sys, l_app, grouping)
    return states[0], states[1], cp, sigma


def _sigma(cfg: dict, d: int) -> np.ndarray | None:
    """Apparatus state from ``sigma`` (density matrix) or ``sigma_state`` (pure state)."""
    if cfg.get("sigma") is not None and cfg.get("sigma_state") is not None:
        raise ConfigError("sigma_state", "give either sigma or sigma_state, not both")
    if cfg.get("sigma_state") is not None:
        v = parse_vector(cfg["sigma_state"], "sigma_state")
        if v.size != d:
            raise ConfigError("sigma_state", f"has {v.size} amplitudes, apparatus dimension is {d}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ConfigError("sigma_state", "state is not normalized")
        return np.outer(v, np.conj(v))
    if cfg.get("sigma") is None:
        return None
    sigma = parse_matrix(cfg["sigma"], "sigma")
    if sigma.shape != (d, d):
        raise ConfigError("sigma", f"has shape {sigma.shape}, apparatus dimension is {d}")
    herm = np.max(np.abs(sigma - sigma.conj().T)) <= 1e-10
    if not herm or abs(np.trace(sigma) - 1.0) > 1e-10 or np.linalg.eigvalsh(sigma)[0] < -1e-10:
        raise ConfigError("sigma", "not a valid density operator")
    return sigma


def guarded(fn):
    """Map configuration problems to exit code 2 with a diagnostic naming the field."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        sys.exit(code or EXIT_OK)

    return wrapper


def common(fn):
    fn = click.option("--threads", type=int, default=None, help="Worker threads (default: CPU count).")(fn)
    fn = click.option("--seed", type=int, default=None, help="Master seed (default: $WAYBOUND_SEED or 0).")(fn)
    fn = click.option("--config", "config", type=click.Path(dir_okay=False), default=None,
                      help="JSON config document; flags override its fields.")(fn)
    return fn


def scenario_options(fn):
    fn = click.option("--app-spins", type=int, default=None, help="Apparatus spins (spin-half scenario).")(fn)
    fn = click.option("--beta", default=None, help="Amplitude of |-1> in psi1.")(fn)
    fn = click.option("--alpha", default=None, help="Amplitude of |1> in psi1.")(fn)
    fn = click.option("--scenario", type=click.Choice(["spin-half", "explicit"]), default=None)(fn)
    return fn


SCENARIO_DEFAULTS = {
    "scenario": "spin-half",
    "alpha": 2**-0.5,
    "beta": 2**-0.5,
    "app_spins": 1,
}


def _echo_report(record: dict) -> None:
    for k, v in record.items():
        click.echo(f"{k:>22} = {fmt(v)}")


@click.group()
def main():
    """Numerical checks of the distinguishability trade-off under an additive conservation law."""


@main.command()
@common
@scenario_options
@click.option("--trials", type=int, default=None, help="Number of random trials (default 1000).")
@click.option("--sigma-mode", type=click.Choice(SIGMA_MODES), default=None)
@click.option("--unitary-mode", type=click.Choice(UNITARY_MODES), default=None,
              help="'haar-full' samples non-conserving unitaries as a control group.")
@click.option("--tol", type=float, default=None, help="Allowed negative slack (default 1e-9).")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None)
@guarded
def verify(config, csv_path, json_path, **flags):
    """Monte-Carlo sweep of the trade-off over random conserving unitaries."""
    cfg = _settings(config, dict(flags, csv=csv_path, json=json_path), {
        **SCENARIO_DEFAULTS,
        "trials": 1000,
        "sigma_mode": "pure-random",
        "unitary_mode": "conserving",
        "tol": 1e-9,
        "csv": "verify_reports.csv",
        "json": "verify_summary.json",
    })
    trials = _int(cfg, "trials", 1)
    seed = _int(cfg, "seed")
    sigma_mode = _choice(cfg, "sigma_mode", SIGMA_MODES)
    unitary_mode = _choice(cfg, "unitary_mode", UNITARY_MODES)
    tol = _float(cfg, "tol")
    psi0, psi1, cp, sigma = _scenario(cfg)

    start = time.perf_counter()
    reports = sweep(cp, psi0, psi1, trials, seed, sigma_mode, sigma=sigma,
                    unitary_mode=unitary_mode, tol=tol, threads=_int(cfg, "threads", 1))
    wall = time.perf_counter() - start

    violations = sum(not r.satisfied for r in reports)
    summary = {
        "command": "verify",
        "scenario": cfg["scenario"],
        "unitary_mode": unitary_mode,
        "sigma_mode": sigma_mode,
        "seed": seed,
        "trials": trials,
        "tolerance": tol,
        "min_slack": min(r.slack for r in reports),
        "violation_count": violations,
        "not_applicable_count": sum(not r.applicable for r in reports),
        "bound_violation_count": sum(r.violated for r in reports),
        "max_conservation_residual": max(r.conservation_residual for r in reports),
        "max_identity_residual": max(r.identity_residual for r in reports),
    }
    write_csv(cfg["csv"], REPORT_FIELDS, (r.record() for r in reports))
    write_json(cfg["json"], summary)
    click.echo(f"{trials} trials, {violations} violations, min slack {fmt(summary['min_slack'])}")
    click.echo(f"wall time {wall:.3f} s", err=True)
    return EXIT_VIOLATION if violations else EXIT_OK


@main.command()
@common
@click.option("--alpha", default=None)
@click.option("--beta", default=None)
@click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None)
@guarded
def example(config, json_path, **flags):
    """Evaluate the Ohira-Pearle interaction, the equality case of the bound."""
    cfg = _settings(config, dict(flags, json=json_path), {"alpha": 2**-0.5, "beta": 2**-0.5})
    s = _spin_half(cfg)
    report = evaluate_tradeoff(ohira_pearle_scheme(s.alpha, s.beta))
    record = report.detail()
    _echo_report(record)
    if cfg.get("json"):
        write_json(cfg["json"], {"command": "example", "alpha": [s.alpha.real, s.alpha.imag],
                                 "beta": [s.beta.real, s.beta.imag], "report": record})
    if abs(report.slack) > EXAMPLE_TOL:
        click.echo(f"slack {fmt(report.slack)} exceeds {EXAMPLE_TOL}", err=True)
        return EXIT_VIOLATION
    return EXIT_OK


@main.command()
@common
@scenario_options
@click.option("--objective", type=click.Choice(OBJECTIVE_KINDS), default=None)
@click.option("--w-sys", type=float, default=None)
@click.option("--w-app", type=float, default=None)
@click.option("--restarts", type=int, default=None, help="Independent local searches (default 32).")
@click.option("--max-evals", type=int, default=None, help="Evaluation cap per restart (default 5000).")
@click.option("--pareto-points", type=int, default=None, help="Run a frontier scan with this many weights.")
@click.option("--optimize-sigma/--fixed-sigma", default=None)
@click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None)
@click.option("--frontier-csv", type=click.Path(dir_okay=False), default=None)
@click.option("--trace-csv", type=click.Path(dir_okay=False), default=None)
@guarded
def optimize(config, json_path, **flags):
    """Search conserving unitaries for joint distinguishability, or scan the frontier."""
    cfg = _settings(config, dict(flags, json=json_path), {
        **SCENARIO_DEFAULTS,
        "objective": "slack",
        "w_sys": 1.0,
        "w_app": 1.0,
        "restarts": 32,
        "max_evals": 5000,
        "optimize_sigma": False,
        "json": "optimize_result.json",
        "frontier_csv": "frontier.csv",
    })
    seed = _int(cfg, "seed")
    restarts = _int(cfg, "restarts", 1)
    max_evals = _int(cfg, "max_evals", 1)
    threads = _int(cfg, "threads", 1)
    psi0, psi1, cp, sigma = _scenario(cfg)

    if cfg.get("pareto_points") is not None:
        n_points = _int(cfg, "pareto_points", 2)
        points = pareto_scan(cp, psi0, psi1, sigma, n_points, seed, restarts=restarts,
                             max_evals=max_evals, threads=threads)
        write_csv(cfg["frontier_csv"], FRONTIER_FIELDS, (p._asdict() for p in points))
        worst = min(p.slack for p in points)
        write_json(cfg["json"], {"command": "optimize", "mode": "pareto", "seed": seed,
                                 "n_points": n_points, "restarts": restarts, "min_slack": worst,
                                 "points": [p._asdict() for p in points]})
        click.echo(f"{len(points)} frontier points, min slack {fmt(worst)}")
        return EXIT_VIOLATION if worst < -1e-9 else EXIT_OK

    kind = _choice(cfg, "objective", OBJECTIVE_KINDS)
    try:
        objective = Objective(kind, _float(cfg, "w_sys"), _float(cfg, "w_app"))
    except ValueError as exc:
        raise ConfigError("w_sys", str(exc)) from exc
    result = optimize_unitary(cp, psi0, psi1, sigma, objective, restarts, seed, max_evals=max_evals,
                              optimize_sigma=bool(cfg["optimize_sigma"]), threads=threads)
    write_json(cfg["json"], {"command": "optimize", "mode": "single", "objective": kind,
                             "w_sys": objective.w_sys, "w_app": objective.w_app, **result.summary()})
    if cfg.get("trace_csv"):
        write_csv(cfg["trace_csv"], ("restart", "evaluation", "objective_value"),
                  (dict(zip(("restart", "evaluation", "objective_value"), row)) for row in result.trace))
    _echo_report(result.best_report.detail())
    click.echo(f"objective {kind} = {fmt(result.objective_value)} after {result.evaluations} evaluations")
    return EXIT_VIOLATION if result.best_report.violated else EXIT_OK


@main.command()
@common
@click.option("--alpha", default=None)
@click.option("--beta", default=None)
@click.option("--max-spins", type=int, default=None, help=f"Largest apparatus (at most {MAX_SPINS}).")
@click.option("--restarts", type=int, default=None)
@click.option("--max-evals", type=int, default=None)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@guarded
def scaling(config, csv_path, **flags):
    """Best system fidelity at perfect apparatus distinguishability versus apparatus size."""
    cfg = _settings(config, dict(flags, csv=csv_path), {
        "alpha": 2**-0.5,
        "beta": 2**-0.5,
        "max_spins": 3,
        "restarts": 4,
        "max_evals": 5000,
        "csv": "scaling.csv",
    })
    max_spins = _int(cfg, "max_spins", 1)
    if max_spins > MAX_SPINS or 2 * 2**max_spins > MAX_TOTAL_DIM:
        raise ConfigError("max_spins", f"at most {MAX_SPINS} spins (total dimension {MAX_TOTAL_DIM})")
    s = _spin_half(cfg)
    rows = apparatus_scaling_study(s.alpha, s.beta, max_spins, _int(cfg, "restarts", 1), _int(cfg, "seed"),
                                   max_evals=_int(cfg, "max_evals", 1), threads=_int(cfg, "threads", 1))
    write_csv(cfg["csv"], SCALING_FIELDS, (r.record() for r in rows))
    # full inequality at the reported point: ||L_A|| f_sys + ||L_S|| f_app >= |alpha beta|
    lhs = abs(s.alpha * s.beta)
    below = [r.n for r in rows if r.norm_l_app * r.best_f_sys + 0.5 * r.best_f_app - lhs < -1e-9]
    for r in rows:
        click.echo(f"n={r.n} floor={fmt(r.bound_floor)} best_f_sys={fmt(r.best_f_sys)}")
    return EXIT_VIOLATION if below else EXIT_OK


@main.command()
@common
@click.option("--alpha", default=None)
@click.option("--beta", default=None)
@click.option("--app-spins", type=int, default=None)
@click.option("--env-spins", type=int, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--sigma-mode", type=click.Choice(SIGMA_MODES), default=None)
@click.option("--tol", type=float, default=None)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None)
@guarded
def tripartite(config, csv_path, json_path, **flags):
    """Sweep with an environment sharing the conserved charge."""
    cfg = _settings(config, dict(flags, csv=csv_path, json=json_path), {
        "alpha": 2**-0.5,
        "beta": 2**-0.5,
        "app_spins": 1,
        "env_spins": 1,
        "trials": 1000,
        "sigma_mode": "pure-random",
        "tol": 1e-9,
        "csv": "tripartite_reports.csv",
        "json": "tripartite_summary.json",
    })
    n_app, n_env = _int(cfg, "app_spins", 1), _int(cfg, "env_spins", 0)
    if 2 * 2 ** (n_app + n_env) > MAX_TOTAL_DIM:
        raise ConfigError("env_spins", f"total dimension exceeds {MAX_TOTAL_DIM}")
    s = _spin_half(cfg, n_app, n_env)
    trials = _int(cfg, "trials", 1)
    seed = _int(cfg, "seed")
    sigma_mode = _choice(cfg, "sigma_mode", SIGMA_MODES)
    tol = _float(cfg, "tol")
    psi0, psi1, cp = build_spin_scenario(s)
    reports = tripartite_sweep(cp.l_sys, cp.l_app, s.l_env, psi0, psi1, trials, seed, sigma_mode,
                               sigma=plus_state(n_app + n_env), tol=tol, threads=_int(cfg, "threads", 1))
    failures = sum(not r.satisfied for r in reports)
    write_csv(cfg["csv"], TRIPARTITE_FIELDS, (r.record() for r in reports))
    write_json(cfg["json"], {
        "command": "tripartite",
        "seed": seed,
        "trials": trials,
        "app_spins": n_app,
        "env_spins": n_env,
        "sigma_mode": sigma_mode,
        "tolerance": tol,
        "min_slack_joint": min(r.slack_joint for r in reports),
        "min_slack_app": min(r.slack_app for r in reports),
        "monotonicity_failures": sum(not r.monotone for r in reports),
        "violation_count": failures,
    })
    click.echo(f"{trials} trials, {failures} violations")
    return EXIT_VIOLATION if failures else EXIT_OK


if __name__ == "__main__":
    main()
