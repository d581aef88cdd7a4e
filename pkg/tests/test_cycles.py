"""Cycle detection and amplitude measurement."""

import math

import numpy as np
import pytest

from odescout import (
    ConfigError,
    CycleConfig,
    DomainViolationError,
    NoCycleError,
    OdeSystem,
    SolverConfig,
    find_limit_cycle,
    measure,
    sample_cycle_points,
)

from conftest import radial_oscillator

RADIAL_SOLVER = SolverConfig(rtol=1e-8, atol=1e-10)
RADIAL_CYCLE = CycleConfig(transient_time=20.0, max_time=120.0)


@pytest.fixture(scope="module")
def unit_circle_cycle():
    system = radial_oscillator()
    return find_limit_cycle(system, np.array([1.0, 1.0]), np.array([0.5, 0.0]),
                            RADIAL_SOLVER, RADIAL_CYCLE)


def test_circular_cycle_amplitude_and_period(unit_circle_cycle):
    cycle = unit_circle_cycle
    assert measure(cycle, 0) == pytest.approx(1.0, abs=1e-4)
    assert measure(cycle, 1) == pytest.approx(1.0, abs=1e-4)
    assert cycle.period == pytest.approx(2.0 * math.pi, rel=1e-4)


def test_cycle_sampling_layout(unit_circle_cycle):
    cycle = unit_circle_cycle
    n_points = CycleConfig().n_points
    assert cycle.points.shape == (n_points + 1, 2)
    assert cycle.times.shape == (n_points + 1,)
    assert cycle.times[0] == 0.0
    assert cycle.times[-1] == pytest.approx(cycle.period, rel=1e-12)
    # the loop closes
    gap = np.linalg.norm(cycle.points[0] - cycle.points[-1])
    assert gap < 0.01 * np.linalg.norm(cycle.points.max(0) - cycle.points.min(0))
    # every sample sits on the unit circle
    radii = np.hypot(cycle.points[:, 0], cycle.points[:, 1])
    assert np.max(np.abs(radii - 1.0)) < 1e-3


def test_cycle_scales_with_parameters():
    """Radius sqrt(a) and period 2*pi/w move as the parameters demand."""
    system = radial_oscillator()
    cycle = find_limit_cycle(system, np.array([2.0, 4.0]), np.array([0.5, 0.0]),
                             RADIAL_SOLVER, RADIAL_CYCLE)
    assert measure(cycle, 0) == pytest.approx(2.0, abs=1e-3)
    assert cycle.period == pytest.approx(math.pi, rel=1e-4)


def test_measure_never_below_discrete_peak(unit_circle_cycle):
    vals = unit_circle_cycle.points[:-1, 0]
    assert measure(unit_circle_cycle, 0) >= float(vals.max())


def test_measure_coordinate_out_of_range(unit_circle_cycle):
    with pytest.raises(ConfigError, match="coordinate"):
        measure(unit_circle_cycle, 2)


def test_no_cycle_for_contracting_flow():
    system = OdeSystem(
        name="sink", state_dim=2, param_dim=1,
        rhs=lambda x, q: -x,
        state_jacobian=lambda x, q: -np.eye(2),
    )
    with pytest.raises(NoCycleError):
        find_limit_cycle(system, np.array([0.0]), np.array([1.0, 1.0]),
                         SolverConfig(), CycleConfig(transient_time=5.0, max_time=40.0))


def test_positive_domain_violation_detected():
    system = OdeSystem(
        name="drain", state_dim=2, param_dim=1,
        rhs=lambda x, q: np.array([-1.0, -1.0]),
        state_jacobian=lambda x, q: np.zeros((2, 2)),
        positive_states=True,
    )
    with pytest.raises(DomainViolationError):
        find_limit_cycle(system, np.array([0.0]), np.array([0.5, 0.5]),
                         SolverConfig(), CycleConfig(transient_time=5.0, max_time=40.0))


def test_section_coordinate_out_of_range():
    system = radial_oscillator()
    with pytest.raises(ConfigError, match="section_coordinate"):
        find_limit_cycle(system, np.array([1.0, 1.0]), np.array([0.5, 0.0]),
                         RADIAL_SOLVER, CycleConfig(section_coordinate=2))


def test_cycle_config_validation():
    with pytest.raises(ConfigError):
        CycleConfig(transient_time=100.0, max_time=50.0)
    with pytest.raises(ConfigError):
        CycleConfig(closure_tol=0.0)
    with pytest.raises(ConfigError):
        CycleConfig(n_points=16)
    with pytest.raises(ConfigError):
        CycleConfig(section_coordinate=-1)


def test_budworm_default_cycle(budworm_default_cycle):
    """The benchmark outbreak cycle: slow growth, fast collapse, year scale."""
    cycle = budworm_default_cycle
    assert cycle.period == pytest.approx(56.29, rel=0.01)
    assert measure(cycle, 1) == pytest.approx(1716436.0, rel=1e-3)
    assert measure(cycle, 0) == pytest.approx(10809.6, rel=1e-3)
    assert float(cycle.points.min()) > 0.0


def test_budworm_cycle_insensitive_to_longer_transient(budworm):
    p = budworm.defaults.values
    cycle = find_limit_cycle(
        budworm.system, p, budworm.initial_state(p), SolverConfig(),
        CycleConfig(transient_time=400.0, max_time=1200.0),
    )
    assert measure(cycle, 1) == pytest.approx(1716436.0, rel=1e-3)


def test_sample_cycle_points(unit_circle_cycle):
    rows = {tuple(row) for row in unit_circle_cycle.points}
    rng = np.random.default_rng(123)
    for _ in range(25):
        m = int(rng.integers(1, 9))
        pts = sample_cycle_points(unit_circle_cycle, m, rng)
        assert pts.shape == (m, 2)
        for row in pts:
            assert tuple(row) in rows


def test_sample_cycle_points_m_bounds(unit_circle_cycle):
    rng = np.random.default_rng(0)
    n = unit_circle_cycle.points.shape[0] - 1
    with pytest.raises(ConfigError):
        sample_cycle_points(unit_circle_cycle, 0, rng)
    with pytest.raises(ConfigError):
        sample_cycle_points(unit_circle_cycle, n + 1, rng)
