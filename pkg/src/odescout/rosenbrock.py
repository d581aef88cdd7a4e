"""Linearly implicit Rosenbrock integrator for stiff autonomous systems.

The scheme is the two-stage, L-stable order-2(1) method with stage constant
``d = 1/(2 + sqrt(2))``: both stages solve a linear system with the matrix
``I - h*d*J`` built from the current Jacobian, and a third stage supplies the
embedded error estimate.  The Jacobian is recomputed every step.

Two implementations share the algorithm: a general ``n``-dimensional path
using LU factorization, and a scalar fast path for two-dimensional systems
that provide ``rhs_pair``/``jac_pair`` (plain ``float`` arithmetic in the
step loop is several times faster than small-array work, which matters when
a parameter sweep integrates the same system tens of thousands of times).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConfigError, SingularInputError, SingularMatrixError
from .models import Array, OdeSystem, fd_state_jacobian

# Stage constants of the order-2(1) pair.
D = 1.0 / (2.0 + math.sqrt(2.0))
E32 = 6.0 + math.sqrt(2.0)

# Step-size floor, relative to the span of the integration interval.
UNDERFLOW_FACTOR = 1e-14

STATUS_COMPLETED = "completed"
STATUS_STEP_BUDGET = "step-budget-exhausted"
STATUS_UNDERFLOW = "step-size-underflow"

# Step-size controller bounds.
_FAC_MIN = 0.2
_FAC_MAX = 5.0
_FAC_SAFETY = 0.9

_REJECTED = (SingularInputError, ZeroDivisionError, OverflowError, FloatingPointError)


@dataclass(frozen=True)
class SolverConfig:
    """Adaptive integration settings.

    Args:
        rtol: relative tolerance on the embedded error estimate.
        atol: absolute tolerance, scalar or per-component array.
        h_init: initial step size (default: 1e-4 of the span).
        h_max: largest allowed step size (default: the span).
        max_steps: budget on step attempts, accepted plus rejected.
    """

    rtol: float = 1e-6
    atol: float | Array = 1e-9
    h_init: float | None = None
    h_max: float | None = None
    max_steps: int = 2_000_000

    def __post_init__(self) -> None:
        if not self.rtol > 0.0:
            raise ConfigError(f"rtol must be positive, got {self.rtol!r}")
        atol = np.asarray(self.atol, dtype=float)
        if not np.all(atol > 0.0):
            raise ConfigError("atol must be positive")
        if self.h_init is not None and not self.h_init > 0.0:
            raise ConfigError(f"h_init must be positive, got {self.h_init!r}")
        if self.h_max is not None and not self.h_max > 0.0:
            raise ConfigError(f"h_max must be positive, got {self.h_max!r}")
        if self.h_init is not None and self.h_max is not None and self.h_init > self.h_max:
            raise ConfigError("h_init must not exceed h_max")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")


@dataclass
class Trajectory:
    """Accepted integration output.

    ``times`` and ``states`` hold the accepted steps in order (including the
    initial state).  ``status`` is one of ``completed``,
    ``step-budget-exhausted`` or ``step-size-underflow``; the last two mark a
    partial trajectory.
    """

    times: Array
    states: Array
    status: str
    naccept: int
    nreject: int

    @property
    def final_state(self) -> Array:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def sample(self, ts: Array) -> Array:
        """Dense output by linear interpolation between accepted steps."""
        ts = np.asarray(ts, dtype=float)
        out = np.empty((ts.size, self.states.shape[1]))
        for j in range(self.states.shape[1]):
            out[:, j] = np.interp(ts, self.times, self.states[:, j])
        return out


def _resolve_steps(config: SolverConfig, span: float) -> tuple[float, float]:
    h_max = config.h_max if config.h_max is not None else span
    h_max = min(h_max, span)
    h0 = config.h_init if config.h_init is not None else span * 1e-4
    return min(h0, h_max), h_max


def _controller_factor(err: float) -> float:
    if err == 0.0:
        return _FAC_MAX
    return min(_FAC_MAX, max(_FAC_MIN, _FAC_SAFETY / math.sqrt(err)))


def integrate(
    system: OdeSystem,
    x0: Array,
    p: Array,
    t_span: tuple[float, float],
    config: SolverConfig | None = None,
    keep: str = "all",
) -> Trajectory:
    """Integrate ``x' = f(x, p)`` over ``t_span`` with adaptive steps.

    Args:
        system: the ODE system.
        x0: initial state.
        p: parameter vector.
        t_span: (t0, t1) with t1 > t0.
        config: solver settings; defaults apply when omitted.
        keep: "all" records every accepted step, "last" records only the
            initial and final states.

    Returns:
        A Trajectory whose status reports whether t1 was reached.
    """
    if config is None:
        config = SolverConfig()
    if keep not in ("all", "last"):
        raise ConfigError(f"keep must be 'all' or 'last', got {keep!r}")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ConfigError(f"t_span must satisfy t1 > t0, got {t_span!r}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (system.state_dim,):
        raise ConfigError(f"initial state has shape {x0.shape}, system expects ({system.state_dim},)")
    if system.state_dim == 2 and system.rhs_pair is not None and system.jac_pair is not None:
        return _integrate_pair(system, x0, p, t0, t1, config, keep)
    return _integrate_nd(system, x0, p, t0, t1, config, keep)


def _integrate_pair(
    system: OdeSystem,
    x0: Array,
    p: Array,
    t0: float,
    t1: float,
    config: SolverConfig,
    keep: str,
) -> Trajectory:
    rhs = system.rhs_pair
    jac = system.jac_pair
    rtol = config.rtol
    atol = np.asarray(config.atol, dtype=float)
    if atol.ndim == 0:
        atol_a = atol_b = float(atol)
    else:
        atol_a, atol_b = float(atol[0]), float(atol[1])
    span = t1 - t0
    h, h_max = _resolve_steps(config, span)
    h_floor = UNDERFLOW_FACTOR * span
    max_steps = config.max_steps
    record = keep == "all"

    t = t0
    ya, yb = float(x0[0]), float(x0[1])
    f0a, f0b = rhs(ya, yb, p)
    times = [t0]
    states = [(ya, yb)]
    naccept = 0
    nreject = 0
    status = STATUS_COMPLETED
    sqrt_ = math.sqrt
    isfinite = math.isfinite

    while t < t1:
        if naccept + nreject >= max_steps:
            status = STATUS_STEP_BUDGET
            break
        if h < h_floor:
            status = STATUS_UNDERFLOW
            break
        landing = h >= (t1 - t)
        h_step = (t1 - t) if landing else h
        try:
            j11, j12, j21, j22 = jac(ya, yb, p)
            hd = h_step * D
            w11 = 1.0 - hd * j11
            w12 = -hd * j12
            w21 = -hd * j21
            w22 = 1.0 - hd * j22
            det = w11 * w22 - w12 * w21
            k1a = (f0a * w22 - f0b * w12) / det
            k1b = (w11 * f0b - w21 * f0a) / det
            f1a, f1b = rhs(ya + 0.5 * h_step * k1a, yb + 0.5 * h_step * k1b, p)
            ga = f1a - k1a
            gb = f1b - k1b
            k2a = (ga * w22 - gb * w12) / det + k1a
            k2b = (w11 * gb - w21 * ga) / det + k1b
            na = ya + h_step * k2a
            nb = yb + h_step * k2b
            f2a, f2b = rhs(na, nb, p)
            ra = f2a - E32 * (k2a - f1a) - 2.0 * (k1a - f0a)
            rb = f2b - E32 * (k2b - f1b) - 2.0 * (k1b - f0b)
            k3a = (ra * w22 - rb * w12) / det
            k3b = (w11 * rb - w21 * ra) / det
            ea = (h_step / 6.0) * (k1a - 2.0 * k2a + k3a)
            eb = (h_step / 6.0) * (k1b - 2.0 * k2b + k3b)
            sa = atol_a + rtol * max(abs(ya), abs(na))
            sb = atol_b + rtol * max(abs(yb), abs(nb))
            err = sqrt_(0.5 * ((ea / sa) ** 2 + (eb / sb) ** 2))
        except _REJECTED:
            nreject += 1
            h = h_step * _FAC_MIN
            continue
        if not isfinite(err) or err > 1.0:
            nreject += 1
            h = h_step * (_FAC_MIN if not isfinite(err) else max(_FAC_MIN, _FAC_SAFETY / sqrt_(err)))
            continue
        naccept += 1
        t = t1 if landing else t + h_step
        ya, yb = na, nb
        f0a, f0b = f2a, f2b
        if record:
            times.append(t)
            states.append((na, nb))
        h = min(h_max, h_step * _controller_factor(err))

    if not record:
        times.append(t)
        states.append((ya, yb))
    return Trajectory(
        times=np.asarray(times, dtype=float),
        states=np.asarray(states, dtype=float),
        status=status,
        naccept=naccept,
        nreject=nreject,
    )


def _integrate_nd(
    system: OdeSystem,
    x0: Array,
    p: Array,
    t0: float,
    t1: float,
    config: SolverConfig,
    keep: str,
) -> Trajectory:
    rhs = system.rhs
    if system.state_jacobian is not None:
        jac = system.state_jacobian
    else:
        jac = lambda x, q: fd_state_jacobian(rhs, x, q)  # noqa: E731
    rtol = config.rtol
    atol = np.asarray(config.atol, dtype=float)
    span = t1 - t0
    h, h_max = _resolve_steps(config, span)
    h_floor = UNDERFLOW_FACTOR * span
    max_steps = config.max_steps
    record = keep == "all"

    n = system.state_dim
    eye = np.eye(n)
    t = t0
    y = x0.astype(float)
    f0 = np.asarray(rhs(y, p), dtype=float)
    times = [t0]
    states = [y.copy()]
    naccept = 0
    nreject = 0
    status = STATUS_COMPLETED

    while t < t1:
        if naccept + nreject >= max_steps:
            status = STATUS_STEP_BUDGET
            break
        if h < h_floor:
            status = STATUS_UNDERFLOW
            break
        landing = h >= (t1 - t)
        h_step = (t1 - t) if landing else h
        try:
            with np.errstate(all="ignore"):
                w = eye - (h_step * D) * np.asarray(jac(y, p), dtype=float)
                lu = scipy.linalg.lu_factor(w, check_finite=False)
                k1 = scipy.linalg.lu_solve(lu, f0, check_finite=False)
                f1 = np.asarray(rhs(y + 0.5 * h_step * k1, p), dtype=float)
                k2 = scipy.linalg.lu_solve(lu, f1 - k1, check_finite=False) + k1
                ynew = y + h_step * k2
                f2 = np.asarray(rhs(ynew, p), dtype=float)
                k3 = scipy.linalg.lu_solve(lu, f2 - E32 * (k2 - f1) - 2.0 * (k1 - f0), check_finite=False)
                est = (h_step / 6.0) * (k1 - 2.0 * k2 + k3)
                sc = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
                err = float(np.sqrt(np.mean((est / sc) ** 2)))
        except (_REJECTED, scipy.linalg.LinAlgError, np.linalg.LinAlgError):
            nreject += 1
            h = h_step * _FAC_MIN
            continue
        if not math.isfinite(err) or err > 1.0:
            nreject += 1
            h = h_step * (_FAC_MIN if not math.isfinite(err) else max(_FAC_MIN, _FAC_SAFETY / math.sqrt(err)))
            continue
        naccept += 1
        t = t1 if landing else t + h_step
        y = ynew
        f0 = f2
        if record:
            times.append(t)
            states.append(y.copy())
        h = min(h_max, h_step * _controller_factor(err))

    if not record:
        times.append(t)
        states.append(y.copy())
    return Trajectory(
        times=np.asarray(times, dtype=float),
        states=np.asarray(states, dtype=float),
        status=status,
        naccept=naccept,
        nreject=nreject,
    )


def integrate_fixed_step(
    system: OdeSystem,
    x0: Array,
    p: Array,
    t_span: tuple[float, float],
    h: float,
) -> Trajectory:
    """Integrate with the same Rosenbrock stages at a constant step size.

    ``h`` must divide the span to within rounding.  There is no error
    control; a singular stage matrix raises SingularMatrixError.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ConfigError(f"t_span must satisfy t1 > t0, got {t_span!r}")
    if not h > 0.0:
        raise ConfigError(f"step size must be positive, got {h!r}")
    span = t1 - t0
    nsteps = int(round(span / h))
    if nsteps < 1 or abs(nsteps * h - span) > 1e-9 * span:
        raise ConfigError(f"step size {h!r} does not divide the span {span!r}")

    rhs = system.rhs
    if system.state_jacobian is not None:
        jac = system.state_jacobian
    else:
        jac = lambda x, q: fd_state_jacobian(rhs, x, q)  # noqa: E731
    n = system.state_dim
    eye = np.eye(n)
    y = np.asarray(x0, dtype=float)
    if y.shape != (n,):
        raise ConfigError(f"initial state has shape {y.shape}, system expects ({n},)")
    f0 = np.asarray(rhs(y, p), dtype=float)
    times = np.empty(nsteps + 1)
    states = np.empty((nsteps + 1, n))
    times[0] = t0
    states[0] = y

    for i in range(nsteps):
        w = eye - (h * D) * np.asarray(jac(y, p), dtype=float)
        try:
            lu = scipy.linalg.lu_factor(w)
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise SingularMatrixError(f"stage matrix is singular at t={times[i]!r}") from exc
        if not np.all(np.isfinite(lu[0])) or np.any(np.diag(lu[0]) == 0.0):
            raise SingularMatrixError(f"stage matrix is singular at t={times[i]!r}")
        k1 = scipy.linalg.lu_solve(lu, f0)
        f1 = np.asarray(rhs(y + 0.5 * h * k1, p), dtype=float)
        k2 = scipy.linalg.lu_solve(lu, f1 - k1) + k1
        y = y + h * k2
        f0 = np.asarray(rhs(y, p), dtype=float)
        times[i + 1] = t0 + (i + 1) * h
        states[i + 1] = y

    return Trajectory(times=times, states=states, status=STATUS_COMPLETED, naccept=nsteps, nreject=0)
