"""Acceptance criteria, each checked at its stated tolerance.

The terminal summary prints one PASS/FAIL line per criterion.
"""

import time

import numpy as np
import pytest
from click.testing import CliRunner

from waybound.cli import main
from waybound.conservation import build_sectors, spin_z
from waybound.linops import partial_trace, tensor
from waybound.optimize import Objective, optimize_unitary, pareto_scan, structured_starts
from waybound.sampling import (
    haar_unitary,
    random_density,
    random_orthogonal_pair,
    random_povm,
    random_pure_state,
    random_pvm,
    stream,
)
from waybound.scenarios import SpinHalfScenario, basis_copier, build_spin_scenario, ohira_pearle_scheme, plus_state
from waybound.states import fidelity, optimal_pvm, povm_overlap
from waybound.way import MeasurementScheme, evaluate_tradeoff, sweep, tripartite_sweep

TOL = 1e-9
SWEEP_DIMS = [(2, 2), (2, 3), (3, 3)]
SWEEP_TRIALS = 10_000  # per dimension pair, half with pure and half with mixed sigma


def integer_spectrum(d, rng):
    u = haar_unitary(d, rng)
    return u @ np.diag(rng.integers(-2, 3, d).astype(float)) @ u.conj().T


@pytest.fixture(scope="module")
def sweep_reports():
    reports = []
    start = time.perf_counter()
    for k, (ds, da) in enumerate(SWEEP_DIMS):
        rng = stream(2024, k)
        cp = build_sectors(integer_spectrum(ds, rng), integer_spectrum(da, rng))
        psi0, psi1 = random_orthogonal_pair(ds, rng)
        for j, mode in enumerate(("pure-random", "mixed-random")):
            reports += sweep(cp, psi0, psi1, SWEEP_TRIALS // 2, seed=1000 * k + j, sigma_mode=mode)
    return reports, time.perf_counter() - start


def test_c1_ohira_pearle_equality(criterion):
    start = time.perf_counter()
    r = evaluate_tradeoff(ohira_pearle_scheme(2**-0.5, 2**-0.5))
    s = evaluate_tradeoff(ohira_pearle_scheme(0.6, 0.8))
    elapsed = time.perf_counter() - start
    ok = (
        abs(r.lhs - 0.5) <= TOL
        and abs(r.f_app) <= TOL
        and abs(r.f_sys - 1.0) <= TOL
        and abs(r.rhs - 0.5) <= TOL
        and abs(r.slack) <= TOL
        and abs(s.lhs - 0.48) <= TOL
        and abs(s.f_sys - 0.96) <= TOL
        and elapsed < 1.0
    )
    criterion("C1 Ohira-Pearle equality", ok,
              f"lhs={r.lhs!r} rhs={r.rhs!r} slack={r.slack!r}; lhs'={s.lhs!r} f_sys'={s.f_sys!r}; {elapsed:.3f}s")


def test_c2_sweep(sweep_reports, criterion):
    reports, elapsed = sweep_reports
    bad = sum(r.slack < -TOL for r in reports)
    worst = min(r.slack for r in reports)
    ok = len(reports) == SWEEP_TRIALS * len(SWEEP_DIMS) and bad == 0 and elapsed < 120
    criterion("C2 conserving sweep", ok, f"{len(reports)} trials, {bad} below -1e-9, min slack {worst:.3e}, {elapsed:.1f}s")


def test_c3_optimal_measurement(criterion):
    rng = stream(3)
    worst_opt, worst_beat = 0.0, -np.inf
    for k in range(200):
        d = 2 + k % 2
        a = random_density(d, rng, 1 + rng.integers(d))
        b = random_density(d, rng, 1 + rng.integers(d))
        f = fidelity(a, b)
        worst_opt = max(worst_opt, abs(povm_overlap(a, b, optimal_pvm(a, b)) - f))
        for _ in range(1000):
            worst_beat = max(worst_beat, f - povm_overlap(a, b, random_pvm(d, rng)))
        for _ in range(200):
            worst_beat = max(worst_beat, f - povm_overlap(a, b, random_povm(d, 3, rng)))
    ok = worst_opt <= 1e-8 and worst_beat <= 1e-8
    criterion("C3 optimal measurement", ok, f"max |overlap-F|={worst_opt:.2e}, max F-overlap over samples={worst_beat:.2e}")


def test_c4_detector_sensitivity(criterion):
    psi0, psi1, cp = build_spin_scenario(SpinHalfScenario(0.6, 0.8))
    r = evaluate_tradeoff(MeasurementScheme(psi0, psi1, np.array([1.0, 0.0]), basis_copier(psi0, psi1), cp))
    ok = abs(r.f_sys) <= TOL and abs(r.f_app) <= TOL and abs(r.lhs - 0.48) <= TOL and r.lhs > 0 and not r.satisfied
    criterion("C4 detector sensitivity", ok,
              f"f_sys={r.f_sys:.1e} f_app={r.f_app:.1e} lhs={r.lhs!r} satisfied={r.satisfied}")


def test_c5_fidelity_properties(criterion):
    rng = stream(5)
    n = 1000
    errs = dict.fromkeys(("symmetry", "unitary", "pure", "tensor", "range", "monotone"), 0.0)
    for k in range(n):
        d = 2 + k % 3
        a, b = random_density(d, rng, 1 + rng.integers(d)), random_density(d, rng)
        f = fidelity(a, b)
        errs["symmetry"] = max(errs["symmetry"], abs(f - fidelity(b, a)))
        u = haar_unitary(d, rng)
        errs["unitary"] = max(errs["unitary"], abs(f - fidelity(u @ a @ u.conj().T, u @ b @ u.conj().T)))
        v, w = random_pure_state(d, rng), random_pure_state(d, rng)
        errs["pure"] = max(errs["pure"], abs(fidelity(v, w) - abs(np.vdot(v, w))))
        c, e = random_density(2, rng), random_density(2, rng)
        errs["tensor"] = max(errs["tensor"], abs(fidelity(tensor(a, c), tensor(b, c)) - f),
                             abs(fidelity(tensor(a, c), tensor(b, e)) - f * fidelity(c, e)))
        errs["range"] = max(errs["range"], -f, f - 1.0, 0.0)
        big0, big1 = random_density(2 * d, rng), random_density(2 * d, rng)
        fb = fidelity(big0, big1)
        for keep in (0, 1):
            drop = fb - fidelity(partial_trace(big0, [2, d], keep), partial_trace(big1, [2, d], keep))
            errs["monotone"] = max(errs["monotone"], drop)
    ok = all(v <= TOL for v in errs.values())
    criterion("C5 fidelity properties", ok, ", ".join(f"{k}={v:.1e}" for k, v in errs.items()) + f" over {n} instances")


def test_c6_conservation_identity(sweep_reports, criterion):
    reports, _ = sweep_reports
    worst = max(r.identity_residual for r in reports)
    criterion("C6 conservation identity", worst <= TOL, f"max residual {worst:.2e} over {len(reports)} trials")


def test_c7_tripartite(criterion):
    psi0, psi1, _ = build_spin_scenario(SpinHalfScenario(0.6, 0.8))
    reports = []
    for j, mode in enumerate(("pure-random", "mixed-random")):
        reports += tripartite_sweep(spin_z(1), spin_z(1), spin_z(1), psi0, psi1, 500, seed=70 + j, sigma_mode=mode)
    joint = min(r.slack_joint for r in reports)
    mono = max(r.f_ae - r.f_app for r in reports)
    ok = len(reports) == 1000 and joint >= -TOL and mono <= TOL
    criterion("C7 tripartite", ok, f"{len(reports)} trials, min joint slack {joint:.3e}, max f_ae-f_app {mono:.2e}")


def test_c8_optimizer_saturation(criterion):
    psi0, psi1, cp = build_spin_scenario(SpinHalfScenario(0.6, 0.8))
    sigma = plus_state(1)
    in_pool = len(structured_starts(cp, psi1)) == 1
    res = optimize_unitary(cp, psi0, psi1, sigma, Objective("slack"), restarts=4, seed=8)
    points = pareto_scan(cp, psi0, psi1, sigma, 6, seed=8, restarts=2, max_evals=1500)
    worst = min(p.slack for p in points)
    ok = in_pool and res.objective_value <= 1e-6 and worst >= -TOL
    criterion("C8 optimizer saturation", ok,
              f"slack objective {res.objective_value:.2e}, min frontier slack {worst:.2e} over {len(points)} points")


COMMANDS = {
    "verify": ["verify", "--alpha", "0.6", "--beta", "0.8", "--trials", "200", "--sigma-mode", "mixed-random",
               "--csv", "v.csv", "--json", "v.json"],
    "example": ["example", "--json", "e.json"],
    "optimize": ["optimize", "--restarts", "3", "--max-evals", "800", "--json", "o.json", "--trace-csv", "t.csv"],
    "pareto": ["optimize", "--pareto-points", "3", "--restarts", "2", "--max-evals", "400",
               "--json", "p.json", "--frontier-csv", "f.csv"],
    "scaling": ["scaling", "--max-spins", "2", "--restarts", "2", "--max-evals", "400", "--csv", "s.csv"],
    "tripartite": ["tripartite", "--trials", "100", "--csv", "tr.csv", "--json", "tr.json"],
}


def test_c9_determinism(tmp_path, monkeypatch, criterion):
    runner = CliRunner()
    monkeypatch.delenv("WAYBOUND_SEED", raising=False)
    mismatched, compared = [], 0
    for name, args in COMMANDS.items():
        outputs = []
        for threads in ("1", "3"):
            work = tmp_path / f"{name}-{threads}"
            work.mkdir()
            monkeypatch.chdir(work)
            result = runner.invoke(main, args + ["--seed", "11", "--threads", threads], catch_exceptions=False)
            assert result.exit_code == 0, result.output
            outputs.append({p.name: p.read_bytes() for p in sorted(work.iterdir())})
        compared += len(outputs[0])
        if outputs[0] != outputs[1] or not outputs[0]:
            mismatched.append(name)
    criterion("C9 determinism", not mismatched, f"{compared} files across {len(COMMANDS)} runs, mismatched: {mismatched or 'none'}")
