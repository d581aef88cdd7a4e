"""Shared fixtures: the built-in model and a handful of cheap toy systems."""

import numpy as np
import pytest

from odescout import (
    CycleConfig,
    OdeSystem,
    SolverConfig,
    find_limit_cycle,
    get_model,
)


@pytest.fixture(scope="session")
def budworm():
    return get_model("budworm")


@pytest.fixture(scope="session")
def budworm_default_cycle(budworm):
    """The cycle at the default parameter vector, found once per session."""
    p = budworm.defaults.values
    return find_limit_cycle(
        budworm.system, p, budworm.initial_state(p), SolverConfig(), CycleConfig()
    )


def radial_oscillator() -> OdeSystem:
    """Planar system with an attracting circular cycle.

    For parameters (w, a) with a > 0 the cycle is the circle of radius
    sqrt(a) traversed with angular speed w, so the period is 2*pi/w.
    """

    def rhs(x, q):
        r2 = x[0] * x[0] + x[1] * x[1]
        return np.array([
            -q[0] * x[1] + x[0] * (q[1] - r2),
            q[0] * x[0] + x[1] * (q[1] - r2),
        ])

    return OdeSystem(name="radial", state_dim=2, param_dim=2, rhs=rhs)


def decay_system() -> OdeSystem:
    """One-dimensional x' = -x with analytic Jacobian."""
    return OdeSystem(
        name="decay",
        state_dim=1,
        param_dim=1,
        rhs=lambda x, q: -x,
        state_jacobian=lambda x, q: np.array([[-1.0]]),
    )
