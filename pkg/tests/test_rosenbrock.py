"""Integrator checks against closed-form solutions.

Error magnitudes asserted here were recorded from a reference run of this
implementation and are given a factor-of-several margin, so the tests pin
accuracy without being hostage to last-bit arithmetic differences.
"""

import math

import numpy as np
import pytest

from odescout import (
    ConfigError,
    OdeSystem,
    SingularMatrixError,
    SolverConfig,
    integrate,
    integrate_fixed_step,
)
from odescout.rosenbrock import D, STATUS_COMPLETED, STATUS_STEP_BUDGET

from conftest import decay_system


def rotation_decay_pair():
    """x' = -x - w*y, y' = w*x - y; solution spirals in at rate e^{-t}."""

    def rhs_pair(a, b, q):
        return (-a - q[0] * b, q[0] * a - b)

    def jac_pair(a, b, q):
        return (-1.0, -q[0], q[0], -1.0)

    def rhs(x, q):
        return np.array(rhs_pair(x[0], x[1], q))

    def jac(x, q):
        return np.array([[-1.0, -q[0]], [q[0], -1.0]])

    return OdeSystem(
        name="rot", state_dim=2, param_dim=1, rhs=rhs, state_jacobian=jac,
        rhs_pair=rhs_pair, jac_pair=jac_pair,
    )


def rotation_exact(t, w):
    return math.exp(-t) * np.array([math.cos(w * t), math.sin(w * t)])


def test_exponential_decay_endpoint():
    tr = integrate(decay_system(), np.array([1.0]), np.array([0.0]), (0.0, 5.0),
                   SolverConfig(rtol=1e-6, atol=1e-12))
    assert tr.status == STATUS_COMPLETED
    assert tr.final_time == 5.0
    assert abs(tr.final_state[0] - math.exp(-5.0)) < 5e-6
    assert tr.times[0] == 0.0
    assert np.all(np.diff(tr.times) > 0.0)


def test_tightening_rtol_reduces_error():
    errs = []
    for rtol in (1e-3, 1e-6, 1e-8):
        tr = integrate(decay_system(), np.array([1.0]), np.array([0.0]), (0.0, 5.0),
                       SolverConfig(rtol=rtol, atol=1e-12))
        errs.append(abs(tr.final_state[0] - math.exp(-5.0)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-6


def test_pair_fast_path_matches_closed_form():
    system = rotation_decay_pair()
    q = np.array([3.0])
    tr = integrate(system, np.array([1.0, 0.0]), q, (0.0, 2.0),
                   SolverConfig(rtol=1e-8, atol=1e-12))
    assert np.max(np.abs(tr.final_state - rotation_exact(2.0, 3.0))) < 1e-5


def test_pair_and_general_paths_agree():
    """The scalar fast path and the LU path integrate the same flow."""
    fast = rotation_decay_pair()
    slow = OdeSystem(name="rot-nd", state_dim=2, param_dim=1,
                     rhs=fast.rhs, state_jacobian=fast.state_jacobian)
    q = np.array([3.0])
    cfg = SolverConfig(rtol=1e-8, atol=1e-12)
    a = integrate(fast, np.array([1.0, 0.0]), q, (0.0, 2.0), cfg)
    b = integrate(slow, np.array([1.0, 0.0]), q, (0.0, 2.0), cfg)
    assert np.max(np.abs(a.final_state - b.final_state)) < 1e-6


def test_stiff_fast_slow_split_stays_cheap():
    """A rate ratio of 10^6 must not force 10^6 steps."""
    system = OdeSystem(
        name="stiff", state_dim=2, param_dim=1,
        rhs=lambda x, q: np.array([-x[0], -1e6 * x[1]]),
        state_jacobian=lambda x, q: np.array([[-1.0, 0.0], [0.0, -1e6]]),
    )
    tr = integrate(system, np.array([1.0, 1.0]), np.array([0.0]), (0.0, 2.0),
                   SolverConfig(rtol=1e-6, atol=1e-10))
    assert tr.status == STATUS_COMPLETED
    assert tr.naccept < 2000
    assert abs(tr.final_state[0] - math.exp(-2.0)) < 1e-4
    assert abs(tr.final_state[1]) < 1e-12


def test_keep_last_matches_keep_all():
    system = rotation_decay_pair()
    q = np.array([2.0])
    cfg = SolverConfig(rtol=1e-6, atol=1e-10)
    full = integrate(system, np.array([1.0, 0.0]), q, (0.0, 3.0), cfg, keep="all")
    last = integrate(system, np.array([1.0, 0.0]), q, (0.0, 3.0), cfg, keep="last")
    assert last.times.shape == (2,)
    assert last.states.shape == (2, 2)
    assert np.array_equal(last.final_state, full.final_state)
    assert last.naccept == full.naccept


def test_h_max_is_respected():
    tr = integrate(decay_system(), np.array([1.0]), np.array([0.0]), (0.0, 2.0),
                   SolverConfig(rtol=1e-6, atol=1e-12, h_max=0.01))
    assert np.all(np.diff(tr.times) <= 0.01 + 1e-12)


def test_step_budget_reports_partial_trajectory():
    tr = integrate(decay_system(), np.array([1.0]), np.array([0.0]), (0.0, 100.0),
                   SolverConfig(rtol=1e-10, atol=1e-14, max_steps=10))
    assert tr.status == STATUS_STEP_BUDGET
    assert tr.final_time < 100.0
    assert tr.naccept + tr.nreject == 10


def test_trajectory_sampling_interpolates():
    tr = integrate(decay_system(), np.array([1.0]), np.array([0.0]), (0.0, 5.0),
                   SolverConfig(rtol=1e-8, atol=1e-12))
    ts = np.linspace(0.0, 5.0, 17)
    sampled = tr.sample(ts)
    assert sampled.shape == (17, 1)
    assert np.max(np.abs(sampled[:, 0] - np.exp(-ts))) < 1e-5


def test_fixed_step_is_second_order():
    errs = []
    hs = (1e-2, 1e-3, 1e-4)
    for h in hs:
        tr = integrate_fixed_step(decay_system(), np.array([1.0]), np.array([0.0]), (0.0, 1.0), h)
        errs.append(abs(tr.final_state[0] - math.exp(-1.0)))
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert 1.8 <= order <= 2.2


def test_fixed_step_rejects_nondividing_step():
    with pytest.raises(ConfigError, match="does not divide"):
        integrate_fixed_step(decay_system(), np.array([1.0]), np.array([0.0]), (0.0, 1.0), 0.3)


@pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
def test_fixed_step_detects_singular_stage_matrix():
    """lambda = 1/(h*d) makes I - h*d*J exactly zero in one dimension."""
    h = 0.5
    lam = 1.0 / (h * D)
    assert 1.0 - h * D * lam == 0.0  # the cancellation must be exact for this h
    system = OdeSystem(
        name="sing", state_dim=1, param_dim=1,
        rhs=lambda x, q: lam * x,
        state_jacobian=lambda x, q: np.array([[lam]]),
    )
    with pytest.raises(SingularMatrixError):
        integrate_fixed_step(system, np.array([1.0]), np.array([0.0]), (0.0, 1.0), h)


def test_config_validation():
    with pytest.raises(ConfigError):
        SolverConfig(rtol=0.0)
    with pytest.raises(ConfigError):
        SolverConfig(atol=-1e-9)
    with pytest.raises(ConfigError):
        SolverConfig(h_init=0.2, h_max=0.1)
    with pytest.raises(ConfigError):
        SolverConfig(max_steps=0)
    with pytest.raises(ConfigError, match="t_span"):
        integrate(decay_system(), np.array([1.0]), np.array([0.0]), (1.0, 1.0))
    with pytest.raises(ConfigError, match="keep"):
        integrate(decay_system(), np.array([1.0]), np.array([0.0]), (0.0, 1.0), keep="some")
    with pytest.raises(ConfigError, match="initial state"):
        integrate(decay_system(), np.array([1.0, 2.0]), np.array([0.0]), (0.0, 1.0))
