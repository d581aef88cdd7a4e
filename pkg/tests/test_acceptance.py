"""Acceptance suite: each test pins one shipping requirement.

The two reference sweeps of the built-in model run once per module and
dominate the suite's runtime.  Exploration-side checks replay the stored
sweep values through a lookup evaluator; the lookup returns bit-identical
numbers to a fresh cycle search at the same node, so decision logic is
exercised against live data without integrating the same cycles twice.
The zero-tolerance equivalence check deliberately does not replay: both of
its sides integrate live.

Everything here runs headless (figures, when any, go through the Agg
backend, and the HTTP check uses an in-process client).
"""

import math
import time
from types import SimpleNamespace

import numpy as np
import pytest
from fastapi.testclient import TestClient
from scipy.stats import linregress, spearmanr

from conftest import decay_system
from odescout import (
    Box,
    Counters,
    CycleConfig,
    Entry,
    ExplorationConfig,
    InterpolatedField,
    OdeSystem,
    RelevanceSettings,
    ResultSet,
    RunStore,
    SolverConfig,
    build_grid,
    build_relevance_model,
    build_run_grid,
    find_limit_cycle,
    integrate_fixed_step,
    interpolate_1d,
    make_feature_evaluator,
    measure,
    parse_run_config,
    run_full,
    run_random_exploration,
)
from odescout.convergence import (
    SYNTHETIC_TARGETS,
    ErrorStudyConfig,
    convergence_study,
    pointwise_target,
)
from odescout.exploration import FLAG_COMPUTED
from odescout.service import create_app
from odescout.store import STATUS_DONE

pytestmark = pytest.mark.filterwarnings("ignore::DeprecationWarning")


def budworm_run(axes):
    config = parse_run_config(
        {
            "model": "budworm",
            "feature": "max-N",
            "axes": axes,
            "exploration": {"tol": 0.0, "fraction": 1.0},
        }
    )
    return config, build_run_grid(config)


def replay_evaluator(result: ResultSet):
    """Lookup into a completed sweep; bit-identical to re-running the solver."""
    values = result.values_by_index()
    return lambda point: values[point.index]


def values_array(result: ResultSet) -> np.ndarray:
    out = np.full(result.grid.counts, np.nan)
    for index, entry in result.entries.items():
        out[index] = entry.value
    return out


def assert_identical_results(a: ResultSet, b: ResultSet) -> None:
    assert set(a.entries) == set(b.entries)
    for index, ea in a.entries.items():
        eb = b.entries[index]
        assert ea.value == eb.value
        assert ea.flag == eb.flag
        assert ea.source == eb.source
    assert a.failures == b.failures


def relative_variation(line: np.ndarray) -> float:
    return float((np.max(line) - np.min(line)) / abs(np.mean(line)))


@pytest.fixture(scope="module")
def p3p6(budworm):
    """Brute-force sweep of the 17x11 (p3, p6) box."""
    config, grid = budworm_run(
        [
            {"name": "p3", "lo": 22000.0, "hi": 26000.0, "spacing": 250.0},
            {"name": "p6", "lo": 1.0, "hi": 2.0, "spacing": 0.1},
        ]
    )
    assert grid.counts == (17, 11)
    t0 = time.perf_counter()
    full = run_full(grid, make_feature_evaluator(config, grid))
    elapsed = time.perf_counter() - t0
    assert not full.failures
    return SimpleNamespace(config=config, grid=grid, full=full, elapsed=elapsed)


@pytest.fixture(scope="module")
def sweep3(budworm):
    """Brute-force sweep of the 17x17x11 (p3, p5, p6) box."""
    config, grid = budworm_run(
        [
            {"name": "p3", "lo": 22000.0, "hi": 26000.0, "spacing": 250.0},
            {"name": "p5", "lo": 24000.0, "hi": 32000.0, "spacing": 500.0},
            {"name": "p6", "lo": 1.0, "hi": 2.0, "spacing": 0.1},
        ]
    )
    assert grid.counts == (17, 17, 11)
    full = run_full(grid, make_feature_evaluator(config, grid))
    assert not full.failures
    return SimpleNamespace(config=config, grid=grid, full=full, values=values_array(full))


@pytest.fixture(scope="module")
def guided(sweep3, budworm):
    """Relevance-guided run over the 3-D box, at a 5% center budget."""
    relevance = build_relevance_model(
        budworm.system,
        sweep3.grid,
        RelevanceSettings(seed=0),
        SolverConfig(),
        CycleConfig(),
        budworm.initial_state,
    )
    result = run_random_exploration(
        sweep3.grid,
        relevance,
        ExplorationConfig(tol=1.1, fraction=0.05, seed=15),
        replay_evaluator(sweep3.full),
    )
    field = InterpolatedField(result)
    slices = {
        value: field.extract_slice(("p3", "p6"), {"p5": value})
        for value in (24000.0, 28000.0, 32000.0)
    }
    return SimpleNamespace(relevance=relevance, result=result, field=field, slices=slices)


def test_default_parameters_sustain_a_stable_cycle(budworm):
    t0 = time.perf_counter()
    p = budworm.defaults.values
    peaks = {}
    for rtol in (1e-6, 1e-9):
        cycle = find_limit_cycle(
            budworm.system, p, budworm.initial_state(p), SolverConfig(rtol=rtol), CycleConfig()
        )
        peaks[rtol] = (measure(cycle, 0), measure(cycle, 1))
    elapsed = time.perf_counter() - t0

    r_lo, n_lo = peaks[1e-6]
    r_hi, n_hi = peaks[1e-9]
    assert abs(r_lo - r_hi) <= 0.01 * abs(r_hi)
    assert abs(n_lo - n_hi) <= 0.01 * abs(n_hi)
    assert r_hi == pytest.approx(10809.76, rel=1e-3)
    assert n_hi == pytest.approx(1716433.3, rel=1e-3)
    assert elapsed < 5.0


def test_fixed_step_solver_is_second_order():
    t0 = time.perf_counter()
    system = decay_system()
    steps = (1e-2, 1e-3, 1e-4)
    errors = []
    for h in steps:
        traj = integrate_fixed_step(system, np.array([1.0]), np.array([0.0]), (0.0, 1.0), h)
        errors.append(abs(traj.states[-1, 0] - math.exp(-1.0)))
    order = float(linregress(np.log(steps), np.log(errors)).slope)
    assert 1.8 <= order <= 2.2
    assert time.perf_counter() - t0 < 1.0


def test_zero_tolerance_with_full_budget_equals_brute_force(p3p6):
    grid = build_grid(Box(axes=((0.0, 2.0), (0.0, 2.0))), [0.25, 0.25])
    assert grid.counts == (9, 9)

    def wavy(point):
        x, y = point.values
        return math.sin(3.0 * x) * math.cos(2.0 * y) + 0.5 * x

    reference = run_full(grid, wavy)
    explored = run_random_exploration(
        grid, None, ExplorationConfig(tol=0.0, i_max=grid.size, seed=4), wavy
    )
    assert_identical_results(explored, reference)
    assert explored.counters.evaluator_calls == grid.size
    assert not explored.copied_indices()

    t0 = time.perf_counter()
    live = run_random_exploration(
        p3p6.grid,
        None,
        ExplorationConfig(tol=0.0, i_max=p3p6.grid.size, seed=4),
        make_feature_evaluator(p3p6.config, p3p6.grid),
    )
    elapsed = time.perf_counter() - t0
    assert_identical_results(live, p3p6.full)
    assert live.counters.evaluator_calls == p3p6.grid.size
    assert p3p6.elapsed + elapsed < 600.0


def test_peak_falls_monotonically_along_p6(sweep3):
    p6 = sweep3.grid.axis_values(2)
    lines = 0
    passing = 0
    for i in range(17):
        for j in range(17):
            rho = spearmanr(p6, sweep3.values[i, j, :])[0]
            lines += 1
            passing += rho < -0.9
    assert lines == 289
    assert passing / lines >= 0.9


def test_slice_means_fall_as_p5_grows(sweep3):
    means = [float(np.mean(sweep3.values[:, j, :])) for j in (0, 8, 16)]
    assert means[0] > means[1] > means[2], f"slice means {means}"


def test_p3_variation_is_small_next_to_p6(sweep3):
    along_p3 = max(
        relative_variation(sweep3.values[:, j, k]) for j in range(17) for k in range(11)
    )
    along_p6 = max(
        relative_variation(sweep3.values[i, j, :]) for i in range(17) for j in range(17)
    )
    assert along_p3 < 0.25 * along_p6


def test_guided_run_reproduces_p6_monotonicity(guided):
    lines = 0
    passing = 0
    for slc in guided.slices.values():
        p6 = np.asarray(slc.axis_values[1], dtype=float)
        values = np.asarray(slc.values, dtype=float)
        for i in range(values.shape[0]):
            known = ~np.isnan(values[i, :])
            if known.sum() < 3:
                continue
            rho = spearmanr(p6[known], values[i, known])[0]
            lines += 1
            passing += rho < -0.9
    assert lines > 0
    assert passing / lines >= 0.9


def test_guided_run_reproduces_p5_slice_ordering(guided):
    means = [
        float(np.nanmean(np.asarray(guided.slices[v].values, dtype=float)))
        for v in (24000.0, 28000.0, 32000.0)
    ]
    assert means[0] > means[1] > means[2], f"slice means {means}"


def test_guided_run_reproduces_weak_p3_variation(guided):
    def known_lines(matrix, axis):
        moved = np.moveaxis(matrix, axis, -1)
        for line in moved.reshape(-1, moved.shape[-1]):
            known = line[~np.isnan(line)]
            if known.size >= 2:
                yield known

    planes = [np.asarray(s.values, dtype=float) for s in guided.slices.values()]
    along_p3 = max(relative_variation(line) for m in planes for line in known_lines(m, 0))
    along_p6 = max(relative_variation(line) for m in planes for line in known_lines(m, 1))
    assert along_p3 < 0.25 * along_p6


def test_guided_run_stays_inside_evaluation_budget(guided, sweep3):
    assert guided.result.counters.evaluator_calls <= 0.3 * sweep3.grid.size


def test_guided_run_locates_the_global_peak_cell(guided, sweep3):
    full_best = np.unravel_index(int(np.argmax(sweep3.values)), sweep3.values.shape)
    guided_best = max(guided.result.entries.items(), key=lambda kv: kv[1].value)[0]
    assert all(abs(a - b) <= 1 for a, b in zip(guided_best, full_best)), (
        f"guided argmax {guided_best} vs full argmax {full_best}"
    )


BLIND_SOLVER = SolverConfig(rtol=1e-5, atol=1e-8)
BLIND_CYCLE = CycleConfig(transient_time=10.0, max_time=80.0, closure_tol=0.05, n_points=64)


def parameter_blind_oscillator() -> OdeSystem:
    """Unit-circle oscillator whose field ignores its two parameters."""

    def rhs(x, q):
        r2 = x[0] * x[0] + x[1] * x[1]
        return np.array([-x[1] + x[0] * (1.0 - r2), x[0] + x[1] * (1.0 - r2)])

    return OdeSystem(name="blind", state_dim=2, param_dim=2, rhs=rhs)


def test_zero_relevance_copies_every_non_center():
    system = parameter_blind_oscillator()
    grid = build_grid(Box(axes=((0.5, 1.5), (0.5, 1.5))), [0.25, 0.25])
    relevance = build_relevance_model(
        system,
        grid,
        RelevanceSettings(k1=2, m=3, k3=5, k4=2, seed=1),
        BLIND_SOLVER,
        BLIND_CYCLE,
        lambda q: np.array([0.8, 0.0]),
    )
    assert relevance.r == 0.0

    def amplitude(point):
        cycle = find_limit_cycle(
            system, np.asarray(point.values), np.array([0.8, 0.0]), BLIND_SOLVER, BLIND_CYCLE
        )
        return measure(cycle, 0)

    everything = set(grid.indices())
    for tol in (0.5, 1.1, 2.0):
        result = run_random_exploration(
            grid, relevance, ExplorationConfig(tol=tol, i_max=grid.size, seed=2), amplitude
        )
        assert not result.failures
        assert set(result.entries) == everything
        computed = result.computed_indices()
        assert result.copied_indices() == everything - computed
        assert result.counters.neighbors_computed == 0
        assert len(computed) == result.counters.centers_computed
        assert len(computed) < grid.size


def test_computed_sets_nest_as_tolerance_grows(p3p6, budworm):
    relevance = build_relevance_model(
        budworm.system,
        p3p6.grid,
        RelevanceSettings(seed=0),
        SolverConfig(),
        CycleConfig(),
        budworm.initial_state,
    )
    evaluator = replay_evaluator(p3p6.full)
    everything = set(p3p6.grid.indices())
    for seed in (0, 1, 2):
        computed = []
        for tol in (0.5, 1.1, 2.0):
            result = run_random_exploration(
                p3p6.grid,
                relevance,
                ExplorationConfig(tol=tol, i_max=p3p6.grid.size, seed=seed),
                evaluator,
            )
            assert set(result.entries) == everything
            computed.append(result.computed_indices())
        assert computed[2] <= computed[1] <= computed[0]
        assert len(computed[2]) < len(computed[0])


def test_interpolation_error_decays_at_monte_carlo_rate():
    t0 = time.perf_counter()
    grids = []
    for n in (10, 20, 40, 80):
        box = Box(axes=((0.0, 3.0), (0.0, 2.0)))
        grids.append(build_grid(box, [3.0 / (n - 1), 2.0 / (n - 1)]))
    assert [g.counts for g in grids] == [(10, 10), (20, 20), (40, 40), (80, 80)]

    study = ErrorStudyConfig(
        grids=tuple(grids), i_max=(6, 23, 87, 348), seeds=tuple(range(20)), tol=0.0
    )
    report = convergence_study(pointwise_target(SYNTHETIC_TARGETS["sin-sq"]), study)
    assert report.exact is False
    assert -0.65 <= report.slope <= -0.35, f"slope {report.slope}"
    assert time.perf_counter() - t0 < 60.0


def test_relevance_variant_cannot_change_exact_results(p3p6, budworm):
    evaluator = replay_evaluator(p3p6.full)
    results = []
    for variant in ("norm", "derivative"):
        relevance = build_relevance_model(
            budworm.system,
            p3p6.grid,
            RelevanceSettings(variant=variant, seed=0),
            SolverConfig(),
            CycleConfig(),
            budworm.initial_state,
        )
        results.append(
            run_random_exploration(
                p3p6.grid, relevance, ExplorationConfig(tol=0.0, i_max=60, seed=7), evaluator
            )
        )
    a, b = results
    assert a.relevance_r != b.relevance_r
    assert_identical_results(a, b)
    assert a.counters.as_dict() == b.counters.as_dict()


THREE_POINTS = [(0.0, 0.3), (0.5, 0.25), (1.0, 0.3)]
FOUR_POINTS = [(0.0, 0.3), (0.5, 0.25), (0.58, 0.04), (1.0, 0.3)]


def test_reference_interpolants_hit_pinned_values():
    assert interpolate_1d(THREE_POINTS, 0.75) == pytest.approx(0.275, abs=1e-12)
    assert interpolate_1d(FOUR_POINTS, 0.54) == pytest.approx(0.145, abs=1e-12)

    xs = np.linspace(0.5, 1.0, 501)
    linear = interpolate_1d(FOUR_POINTS, xs)
    spline = interpolate_1d(FOUR_POINTS, xs, method="cubic-spline")
    assert float(np.min(linear)) == pytest.approx(0.04, abs=1e-15)
    assert float(np.min(spline)) < float(np.min(linear))
    assert float(np.min(spline)) == pytest.approx(-0.0985765971, abs=1e-6)


def test_service_slice_matches_library_extraction(tmp_path):
    config = parse_run_config(
        {
            "model": "budworm",
            "feature": "max-N",
            "axes": [
                {"name": "p3", "lo": 22000.0, "hi": 26000.0, "spacing": 1000.0},
                {"name": "p6", "lo": 1.0, "hi": 2.0, "spacing": 0.25},
            ],
            "exploration": {"tol": 0.0, "fraction": 1.0},
        }
    )
    grid = build_run_grid(config)
    failures = {(0, 0)}
    entries = {}
    for flat in range(grid.size):
        index = grid.index_from_flat(flat)
        if index in failures:
            continue
        entries[index] = Entry(
            value=float(np.sin(1.7 * flat) * math.pi + flat / 7.0),
            flag=FLAG_COMPUTED,
            source=None,
        )
    result = ResultSet(
        grid=grid,
        entries=entries,
        failures=failures,
        counters=Counters(centers_computed=24, failures=1, evaluator_calls=25),
        tol=0.0,
    )
    store = RunStore(tmp_path)
    store.create("acc", config)
    store.save_result("acc", result)
    store.set_status("acc", STATUS_DONE)

    direct = InterpolatedField(store.load("acc").result).extract_slice(("p3", "p6"), {})
    client = TestClient(create_app(store))
    resp = client.get("/runs/acc/slice", params={"axes": "p3,p6"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["axes"] == ["p3", "p6"]
    rows, cols = direct.values.shape
    for i in range(rows):
        for j in range(cols):
            want = direct.values[i, j]
            got = body["values"][i][j]
            if math.isnan(want):
                assert got is None
            else:
                assert got == want
            assert body["flags"][i][j] == direct.flags[i, j]
