"""Acceptance suite: one test per criterion, printing a pass/fail line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines (pytest hides captured output of passing tests otherwise).
"""

import time

import numpy as np

from cointoss.analysis import (
    ANALYTIC_BOUND,
    alice_objective,
    exact_win_probability,
    monte_carlo,
    optimize_alice,
    phase_sweep,
    sensitivity_scan,
)
from cointoss.strategies import (
    AliceCoefficients,
    aligned_strategy,
    coefficient_strategy,
    honest_alice,
    measure_and_pick_bob,
    optimal_alice,
    random_bob_strategy,
)


def report(criterion: int, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"[criterion {criterion}] {status}: {detail}")
    assert passed, f"criterion {criterion}: {detail}"


def five_sigma(p: float, trials: int) -> float:
    return 5.0 * np.sqrt(p * (1.0 - p) / trials)


def test_criterion_1_honest_protocol():
    started = time.perf_counter()
    heads_exact = exact_win_probability(honest_alice(), 0)
    tails_exact = exact_win_probability(honest_alice(), 1)
    exact_ok = (
        abs(heads_exact.p_win_exact - 0.5) < 1e-12
        and abs(tails_exact.p_win_exact - 0.5) < 1e-12
        and abs(heads_exact.p_abort_exact) < 1e-12
    )
    mc = monte_carlo("honest", trials=1_000_000, root_seed=101)
    mc_ok = (
        abs(mc.heads / mc.trials - 0.5) < five_sigma(0.5, mc.trials)
        and abs(mc.tails / mc.trials - 0.5) < five_sigma(0.5, mc.trials)
        and mc.aborts == 0
    )
    elapsed = time.perf_counter() - started
    report(
        1,
        exact_ok and mc_ok and elapsed < 30.0,
        f"exact P(heads)={heads_exact.p_win_exact:.15f}, "
        f"P(abort)={heads_exact.p_abort_exact:.2e}; "
        f"MC heads={mc.heads / mc.trials:.6f} aborts={mc.aborts} "
        f"({elapsed:.1f}s < 30s)",
    )


def test_criterion_2_optimal_alice():
    exact_ok = True
    details = []
    for target in (0, 1):
        result = exact_win_probability(optimal_alice(target), target)
        exact_ok &= abs(result.p_win_exact - 0.75) < 1e-9
        exact_ok &= abs(result.p_abort_exact - 1 / 6) < 1e-9
        details.append(f"target {target}: win={result.p_win_exact:.12f}")
    mc = monte_carlo("cheat-alice", "optimal-alice", 0, trials=1_000_000, root_seed=102)
    mc_ok = abs(mc.win_frequency - 0.75) < five_sigma(0.75, mc.trials) and abs(
        mc.abort_frequency - 1 / 6
    ) < five_sigma(1 / 6, mc.trials)
    report(
        2,
        exact_ok and mc_ok,
        "; ".join(details) + f"; MC win={mc.win_frequency:.6f} abort={mc.abort_frequency:.6f}",
    )


def test_criterion_3_optimizer():
    started = time.perf_counter()
    result = optimize_alice(grid_resolution=100, refinement_tolerance=1e-10)
    elapsed = time.perf_counter() - started
    expected = AliceCoefficients.optimal().as_array()
    coords_ok = bool(np.all(np.abs(result.argmax.as_array() - expected) < 1e-3))
    argmax = tuple(round(float(v), 5) for v in result.argmax.as_array())
    report(
        3,
        abs(result.value - 0.75) < 1e-6 and coords_ok and elapsed < 60.0,
        f"value={result.value:.9f}, argmax={argmax} ({elapsed:.1f}s < 60s)",
    )


def test_criterion_4_closed_form_equals_simulation():
    rng = np.random.default_rng(104)
    worst = 0.0
    for _ in range(100):
        raw = np.abs(rng.normal(size=4))
        c = AliceCoefficients.from_array(raw / np.linalg.norm(raw))
        simulated = exact_win_probability(coefficient_strategy(c, "aligned"), 0)
        worst = max(worst, abs(simulated.p_win_exact - alice_objective(c)))
    report(4, worst < 1e-9, f"max |closed form - simulation| = {worst:.2e} over 100 tuples")


def test_criterion_5_bob_bound():
    exact = exact_win_probability(measure_and_pick_bob(0), 0)
    optimal_ok = abs(exact.p_win_exact - 0.75) < 1e-9 and exact.p_abort_exact == 0.0
    rng = np.random.default_rng(105)
    worst = 0.0
    for _ in range(1000):
        result = exact_win_probability(random_bob_strategy(rng), 0)
        worst = max(worst, result.p_win_exact)
    report(
        5,
        optimal_ok and worst <= ANALYTIC_BOUND + 1e-9,
        f"measure-and-pick win={exact.p_win_exact:.12f} aborts={exact.p_abort_exact}; "
        f"max over 1000 random strategies = {worst:.12f} <= 0.75 + 1e-9",
    )


def test_criterion_6_cheat_sensitivity():
    points = sensitivity_scan(50)
    undetected = [
        p for p in points if p.p_win > 0.5 + 1e-6 and not p.p_detect > 0.0
    ]
    increases = sum(
        points[i + 1].p_detect >= points[i].p_detect - 1e-12 for i in range(49)
    )
    report(
        6,
        not undetected,
        f"all {sum(p.p_win > 0.5 + 1e-6 for p in points)} cheating points detectable; "
        f"p_detect observed non-decreasing on {increases}/49 steps",
    )


def test_criterion_7_balance():
    details = []
    balanced = True
    for build, name in ((optimal_alice, "optimal-alice"), (measure_and_pick_bob, "measure-and-pick")):
        p0 = exact_win_probability(build(0), 0)
        p1 = exact_win_probability(build(1), 1)
        balanced &= abs(p0.p_win_exact - p1.p_win_exact) < 1e-9
        balanced &= abs(p0.epsilon - 0.25) < 1e-9
        details.append(f"{name}: eps0={p0.epsilon:.12f} eps1={p1.epsilon:.12f}")
    report(7, balanced, "; ".join(details))


def test_criterion_8_phase_sweep():
    rng = np.random.default_rng(108)
    worst = 0.0
    for _ in range(1000):
        raw = np.abs(rng.normal(size=4))
        weights = raw / np.linalg.norm(raw)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=4))
        phases[0] = 1.0
        result = exact_win_probability(aligned_strategy(weights * phases), 0)
        worst = max(worst, result.p_win_exact)
    sweep_best = phase_sweep(AliceCoefficients.optimal(), samples=1000, seed=108)
    report(
        8,
        worst <= ANALYTIC_BOUND + 1e-9 and sweep_best <= ANALYTIC_BOUND + 1e-9,
        f"max over 1000 random-phase strategies = {worst:.12f}; "
        f"sweep at optimal coefficients = {sweep_best:.12f}; both <= 0.75 + 1e-9",
    )
