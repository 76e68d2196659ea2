import numpy as np
import pytest

from waybound.conservation import build_sectors, spin_z
from waybound.optimize import (
    Objective,
    optimize_unitary,
    pareto_scan,
    report_at,
    structured_starts,
)
from waybound.scenarios import SpinHalfScenario, build_spin_scenario, plus_state


@pytest.fixture(scope="module")
def setup():
    psi0, psi1, cp = build_spin_scenario(SpinHalfScenario(0.6, 0.8))
    return cp, psi0, psi1, plus_state(1)


def test_objective_kinds(setup):
    cp, psi0, psi1, sigma = setup
    r = report_at(cp, psi0, psi1, sigma, np.zeros(cp.n_params))
    assert Objective("slack")(r) == r.slack
    assert Objective("max-fidelity")(r) == max(r.f_sys, r.f_app)
    assert Objective("weighted-fidelity", 2.0, 3.0)(r) == 2.0 * r.f_sys + 3.0 * r.f_app
    with pytest.raises(ValueError):
        Objective("bogus")
    with pytest.raises(ValueError):
        Objective("weighted-fidelity", -1.0, 1.0)
    with pytest.raises(ValueError):
        Objective("weighted-fidelity", 0.0, 0.0)


def test_structured_start_is_ohira_pearle(setup):
    cp, psi0, psi1, sigma = setup
    (p,) = structured_starts(cp, psi1)
    r = report_at(cp, psi0, psi1, sigma, p)
    assert abs(r.slack) < 1e-12
    assert r.f_sys == pytest.approx(0.96, abs=1e-12)
    other = build_sectors(np.diag([0.0, 1.0, 2.0]), spin_z(1))
    assert structured_starts(other, np.array([1.0, 0.0, 0.0])) == []


def test_slack_objective_saturates(setup):
    cp, psi0, psi1, sigma = setup
    res = optimize_unitary(cp, psi0, psi1, sigma, Objective("slack"), restarts=3, seed=1)
    assert res.objective_value <= 1e-6
    assert res.best_report.slack >= -1e-9
    assert res.restarts_used == 3 and len(res.restart_values) == 3
    assert res.best_restart == int(np.argmin(res.restart_values))
    assert res.evaluations > 0


def test_traces_are_monotone(setup):
    cp, psi0, psi1, sigma = setup
    res = optimize_unitary(cp, psi0, psi1, sigma, Objective("max-fidelity"), restarts=3, seed=2, max_evals=800)
    for r in range(3):
        vals = [v for k, _, v in res.trace if k == r]
        assert vals and all(b <= a for a, b in zip(vals, vals[1:]))
        evals = [e for k, e, _ in res.trace if k == r]
        assert evals == sorted(evals)


def test_max_fidelity_is_bounded_below(setup):
    """max(f_sys, f_app) >= |<psi0|L_S|psi1>| / (||L_S|| + ||L_A||) for every conserving U."""
    cp, psi0, psi1, sigma = setup
    res = optimize_unitary(cp, psi0, psi1, sigma, Objective("max-fidelity"), restarts=6, seed=3,
                           optimize_sigma=True, max_evals=1500)
    assert res.objective_value >= 0.48 / 1.0 - 1e-9


def test_commuting_case_reaches_joint_distinguishability():
    """With <psi0|L_S|psi1> = 0 nothing stops both fidelities from vanishing."""
    cp = build_sectors(spin_z(1), spin_z(1))
    psi0, psi1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    res = optimize_unitary(cp, psi0, psi1, plus_state(1), Objective("weighted-fidelity"), restarts=8, seed=4)
    assert res.best_report.lhs == 0.0
    assert res.best_report.f_sys < 1e-6 and res.best_report.f_app < 1e-6


def test_optimize_sigma_and_determinism(setup):
    cp, psi0, psi1, sigma = setup
    kw = dict(restarts=3, seed=5, max_evals=600, optimize_sigma=True)
    a = optimize_unitary(cp, psi0, psi1, sigma, Objective("max-fidelity"), threads=1, **kw)
    b = optimize_unitary(cp, psi0, psi1, sigma, Objective("max-fidelity"), threads=3, **kw)
    assert a.best_params.size == cp.n_params + 2 * cp.d_app
    np.testing.assert_array_equal(a.best_params, b.best_params)
    assert a.restart_values == b.restart_values and a.trace == b.trace
    with pytest.raises(ValueError):
        optimize_unitary(cp, psi0, psi1, sigma, Objective(), restarts=0)


def test_summary_fields(setup):
    cp, psi0, psi1, sigma = setup
    s = optimize_unitary(cp, psi0, psi1, sigma, Objective(), restarts=1, max_evals=50).summary()
    assert {"seed", "objective_value", "best_params", "best_report", "restart_values"} <= set(s)


def test_pareto_scan(setup):
    cp, psi0, psi1, sigma = setup
    pts = pareto_scan(cp, psi0, psi1, sigma, 4, seed=6, restarts=2, max_evals=800)
    assert len(pts) == 4
    assert [p.f_app for p in pts] == sorted(p.f_app for p in pts)
    assert all(p.slack >= -1e-9 for p in pts)
    assert all(0.5 * p.f_sys + 0.5 * p.f_app >= 0.48 - 1e-9 for p in pts)
    with pytest.raises(ValueError):
        pareto_scan(cp, psi0, psi1, sigma, 1)
