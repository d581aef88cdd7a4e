"""Relevance function and relevance measure.

The cheap surrogate M(p) averages vector-field magnitudes over a fixed phase
sample; r averages |M(p) - M(q)| over sampled neighbor pairs.  Several tests
below construct systems whose M is known in closed form, which makes r itself
predictable regardless of which random pairs get drawn.
"""

import numpy as np
import pytest

from odescout import (
    Box,
    ConfigError,
    CycleConfig,
    HyperbolicDomainError,
    OdeSystem,
    ParameterVector,
    PhaseSample,
    RelevanceSettings,
    SolverConfig,
    build_grid,
    build_phase_sample,
    build_relevance_model,
    get_model,
    relevance_function,
    relevance_measure,
)

from conftest import radial_oscillator

FAST_SOLVER = SolverConfig(rtol=1e-5, atol=1e-8)
FAST_CYCLE = CycleConfig(transient_time=10.0, max_time=80.0)


def manual_sample(states, k1=1):
    states = np.asarray(states, dtype=float)
    m = states.shape[0] // k1
    return PhaseSample(states=states, parameter_points=np.zeros((k1, 1)), m=m)


def echo_system(param_dim, factor=1.0):
    """f(x, p) = (factor * p[0], 0), so M(p) = factor * p[0] on positive boxes."""
    return OdeSystem(
        name="echo", state_dim=2, param_dim=param_dim,
        rhs=lambda x, p: np.array([factor * p[0], 0.0]),
    )


def test_settings_validation():
    for field in ("k1", "m", "k3", "k4", "n_size"):
        with pytest.raises(ConfigError):
            RelevanceSettings(**{field: 0})
    with pytest.raises(ConfigError, match="variant"):
        RelevanceSettings(variant="best")


def test_phase_sample_validation():
    with pytest.raises(ConfigError):
        PhaseSample(states=np.zeros((0, 2)), parameter_points=np.zeros((1, 2)), m=1)
    with pytest.raises(ConfigError, match="k1"):
        PhaseSample(states=np.zeros((5, 2)), parameter_points=np.zeros((2, 2)), m=2)


def test_norm_variant_matches_direct_mean():
    rng = np.random.default_rng(31)
    system = radial_oscillator()
    for _ in range(20):
        states = rng.normal(size=(6, 2))
        sample = manual_sample(states, k1=2)
        p = rng.uniform(0.5, 2.0, size=2)
        want = np.mean([np.linalg.norm(system.eval_rhs(x, p)) for x in states])
        assert relevance_function(system, sample, p, "norm") == pytest.approx(want, rel=1e-14)


def test_derivative_variant_matches_direct_mean():
    """Column norms of df/dp, averaged over states and parameters."""
    system = OdeSystem(
        name="bilinear", state_dim=2, param_dim=2,
        rhs=lambda x, p: np.array([p[0] * x[0], p[1] * x[1]]),
        param_derivatives=lambda x, p: np.array([[x[0], 0.0], [0.0, x[1]]]),
    )
    rng = np.random.default_rng(8)
    for _ in range(20):
        states = rng.normal(size=(4, 2))
        sample = manual_sample(states, k1=1)
        p = rng.uniform(0.5, 2.0, size=2)
        want = np.mean([(abs(x[0]) + abs(x[1])) / 2.0 for x in states])
        got = relevance_function(system, sample, p, "derivative")
        assert got == pytest.approx(want, rel=1e-14)


def test_relevance_function_rejects_unknown_variant():
    sample = manual_sample(np.ones((2, 2)), k1=1)
    with pytest.raises(ConfigError):
        relevance_function(echo_system(1), sample, np.array([1.0]), "quadratic")


def test_measure_on_linear_m_is_the_spacing():
    """With M(p) = p exactly, every neighbor pair differs by one spacing."""
    grid = build_grid(Box(axes=((1.0, 2.0),)), [0.25])
    sample = manual_sample(np.ones((3, 2)), k1=1)
    system = echo_system(1)
    for seed in range(6):
        settings = RelevanceSettings(k3=3, k4=1, seed=seed)
        model = relevance_measure(system, sample, grid, settings, np.random.default_rng(seed))
        assert model.r == 0.25


def test_measure_scales_with_the_field():
    grid = build_grid(Box(axes=((1.0, 2.0), (0.0, 1.0))), [0.25, 0.5])
    rng = np.random.default_rng(17)
    sample = manual_sample(rng.normal(size=(4, 2)), k1=1)
    settings = RelevanceSettings(k3=4, k4=2)
    r1 = relevance_measure(echo_system(2, 1.0), sample, grid, settings,
                           np.random.default_rng(2)).r
    r3 = relevance_measure(echo_system(2, 3.0), sample, grid, settings,
                           np.random.default_rng(2)).r
    assert r3 == pytest.approx(3.0 * r1, rel=1e-12)
    assert r1 > 0.0


def test_measure_zero_for_parameter_free_field():
    system = OdeSystem(
        name="swirl", state_dim=2, param_dim=2,
        rhs=lambda x, p: np.array([x[1], -x[0]]),
    )
    grid = build_grid(Box(axes=((0.0, 1.0), (0.0, 1.0))), [0.25, 0.25])
    rng = np.random.default_rng(4)
    sample = manual_sample(rng.normal(size=(6, 2)), k1=2)
    model = relevance_measure(system, sample, grid, RelevanceSettings(k3=5, k4=2),
                              np.random.default_rng(0))
    assert model.r == 0.0


def test_measure_requires_enough_neighbors():
    # every point of a 2x2 plane is a corner with exactly two neighbors
    grid = build_grid(Box(axes=((0.0, 1.0), (0.0, 1.0))), [1.0, 1.0])
    sample = manual_sample(np.ones((2, 2)), k1=1)
    with pytest.raises(ConfigError, match="neighbors"):
        relevance_measure(echo_system(2), sample, grid, RelevanceSettings(k3=2, k4=3),
                          np.random.default_rng(0))


def test_measure_k3_budget_checked():
    grid = build_grid(Box(axes=((0.0, 1.0),)), [0.5])
    sample = manual_sample(np.ones((2, 2)), k1=1)
    with pytest.raises(ConfigError, match="k3"):
        relevance_measure(echo_system(1), sample, grid, RelevanceSettings(k3=9, k4=1),
                          np.random.default_rng(0))


def test_phase_sample_from_cycles():
    system = radial_oscillator()
    grid = build_grid(Box(axes=((1.0, 2.0), (0.5, 1.0))), [0.5, 0.25])
    sample = build_phase_sample(system, grid, k1=3, m=5, solver_config=FAST_SOLVER,
                                cycle_config=FAST_CYCLE, rng=np.random.default_rng(1),
                                initial_state=lambda p: np.array([0.5, 0.0]))
    assert sample.states.shape == (15, 2)
    assert sample.parameter_points.shape == (3, 2)
    assert sample.k2 == 15
    # states lie on circles of radius sqrt(a) for a in the sampled box
    radii = np.hypot(sample.states[:, 0], sample.states[:, 1])
    assert np.all((radii > 0.6) & (radii < 1.1))
    # parameter rows are genuine grid points
    all_params = {tuple(grid.params_at(idx)) for idx in grid.indices()}
    for row in sample.parameter_points:
        assert tuple(row) in all_params


def test_phase_sample_redraws_failed_cycles():
    """Parameter rows where no cycle exists are skipped, not fatal."""
    system = radial_oscillator()
    grid = build_grid(Box(axes=((1.0, 1.5), (-1.0, 1.0))), [0.5, 0.5])
    sample = build_phase_sample(system, grid, k1=2, m=3, solver_config=FAST_SOLVER,
                                cycle_config=CycleConfig(transient_time=5.0, max_time=40.0),
                                rng=np.random.default_rng(3),
                                initial_state=lambda p: np.array([0.5, 0.0]))
    assert sample.parameter_points.shape == (2, 2)
    assert np.all(sample.parameter_points[:, 1] > 0.0)


def test_phase_sample_gives_up_outside_usable_domain():
    system = radial_oscillator()
    base = ParameterVector(np.array([1.0, -1.5]), ("w", "a"), ("", ""))
    grid = build_grid(Box(axes=((-2.0, -1.0),)), [0.5], axis_names=("a",), base=base)
    with pytest.raises(HyperbolicDomainError):
        build_phase_sample(system, grid, k1=1, m=2, solver_config=FAST_SOLVER,
                           cycle_config=CycleConfig(transient_time=5.0, max_time=40.0),
                           rng=np.random.default_rng(0),
                           initial_state=lambda p: np.array([0.5, 0.0]))


def test_phase_sample_k1_budget_checked():
    grid = build_grid(Box(axes=((0.0, 1.0),)), [0.5])
    with pytest.raises(ConfigError, match="k1"):
        build_phase_sample(radial_oscillator(), grid, k1=4, m=1,
                           solver_config=FAST_SOLVER, cycle_config=FAST_CYCLE,
                           rng=np.random.default_rng(0),
                           initial_state=lambda p: np.array([0.5, 0.0]))


def test_model_exposes_variant_and_m_value():
    grid = build_grid(Box(axes=((1.0, 2.0),)), [0.25])
    sample = manual_sample(np.ones((3, 2)), k1=1)
    model = relevance_measure(echo_system(1), sample, grid,
                              RelevanceSettings(k3=3, k4=1, variant="norm"),
                              np.random.default_rng(0))
    assert model.variant == "norm"
    assert model.m_value(np.array([1.5])) == pytest.approx(1.5, rel=1e-14)


def test_budworm_measure_reproducible(budworm):
    """Frozen regression value for the benchmark plane at the default seed."""
    grid = build_grid(
        Box(axes=((22000.0, 26000.0), (1.0, 2.0))), [250.0, 0.1],
        axis_names=("p3", "p6"), base=budworm.defaults,
    )
    model = build_relevance_model(budworm.system, grid, RelevanceSettings(seed=0),
                                  solver_config=SolverConfig(), cycle_config=CycleConfig(),
                                  initial_state=budworm.initial_state)
    assert model.r == pytest.approx(25.43989308993393, rel=1e-9)
    repeat = build_relevance_model(budworm.system, grid, RelevanceSettings(seed=0),
                                   solver_config=SolverConfig(), cycle_config=CycleConfig(),
                                   initial_state=budworm.initial_state)
    assert repeat.r == model.r


def test_budworm_measure_stable_across_seeds(budworm):
    """The seed changes r, but not its scale."""
    grid = build_grid(
        Box(axes=((22000.0, 26000.0), (1.0, 2.0))), [250.0, 0.1],
        axis_names=("p3", "p6"), base=budworm.defaults,
    )
    rs = []
    for seed in range(4):
        model = build_relevance_model(budworm.system, grid, RelevanceSettings(k4=2, seed=seed),
                                      solver_config=SolverConfig(), cycle_config=CycleConfig(),
                                      initial_state=budworm.initial_state)
        rs.append(model.r)
    rs = np.array(rs)
    assert np.all(rs > 0.0)
    assert rs.std() / rs.mean() <= 0.5
