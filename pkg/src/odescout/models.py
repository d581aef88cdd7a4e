"""Parametrized autonomous ODE systems and the built-in model registry.

A system is a right-hand side ``f(x, p)`` together with optional analytic
derivatives.  Derivatives that are not supplied analytically fall back to
central finite differences so every system supports the full interface.

The spruce budworm forest-outbreak model ships as the built-in benchmark::

    dR/dt = p1 * R * (1 - R / p3) - p7 * N
    dN/dt = p2 * N * (1 - N / (p4 * R)) - p5 * N^2 / (p6^2 * R^2 + N^2)

with branch density ``R > 0`` and budworm density ``N >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DimensionMismatchError, SingularInputError

Array = np.ndarray

# Relative step used by the finite-difference fallbacks.
FD_RELATIVE_STEP = 1e-6

_MSG_BAD_STATE_DIM = "state vector has length {got}, system expects {want}"
_MSG_BAD_PARAM_DIM = "parameter vector has length {got}, system expects {want}"


@dataclass(frozen=True)
class ParameterVector:
    """An ordered parameter vector with names and units.

    Args:
        values: parameter values, one per model parameter.
        names: parameter names, aligned with ``values``.
        units: unit strings, aligned with ``values``.
    """

    values: Array
    names: tuple[str, ...]
    units: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or self.values.size < 1:
            raise ConfigError("parameter vector must be one-dimensional and non-empty")
        if len(self.names) != self.values.size or len(self.units) != self.values.size:
            raise ConfigError(
                "names/units must match parameter count "
                f"({len(self.names)}/{len(self.units)} vs {self.values.size})"
            )

    def __len__(self) -> int:
        return int(self.values.size)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ConfigError(f"unknown parameter name {name!r}; known: {', '.join(self.names)}") from None

    def replace(self, **overrides: float) -> "ParameterVector":
        """Return a copy with the named entries replaced."""
        values = self.values.copy()
        for name, value in overrides.items():
            values[self.index_of(name)] = float(value)
        return ParameterVector(values, self.names, self.units)

    def as_dict(self) -> dict[str, float]:
        return {name: float(v) for name, v in zip(self.names, self.values)}


@dataclass
class OdeSystem:
    """An autonomous ODE system ``x' = f(x, p)``.

    Args:
        name: short identifier used in diagnostics.
        state_dim: dimension ``n`` of the state space.
        param_dim: dimension ``k`` of the parameter space.
        rhs: vector field evaluator ``(x, p) -> f(x, p)``.
        state_jacobian: optional analytic ``df/dx`` evaluator, shape (n, n).
        param_derivatives: optional analytic ``df/dp`` evaluator, shape (n, k).
        rhs_pair: optional scalar fast path for ``n == 2`` systems; takes the
            two state components plus the parameter array and returns a tuple.
        jac_pair: scalar fast path companion returning the flattened Jacobian
            ``(j11, j12, j21, j22)``.
        positive_states: whether trajectories are only meaningful while all
            state components stay non-negative.
    """

    name: str
    state_dim: int
    param_dim: int
    rhs: Callable[[Array, Array], Array]
    state_jacobian: Callable[[Array, Array], Array] | None = None
    param_derivatives: Callable[[Array, Array], Array] | None = None
    rhs_pair: Callable[[float, float, Array], tuple[float, float]] | None = None
    jac_pair: Callable[[float, float, Array], tuple[float, float, float, float]] | None = None
    positive_states: bool = False

    # ---- validated evaluation -------------------------------------------------

    def _check(self, x: Array, p: Array) -> tuple[Array, Array]:
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        if x.shape != (self.state_dim,):
            raise DimensionMismatchError(_MSG_BAD_STATE_DIM.format(got=x.shape, want=self.state_dim))
        if p.shape != (self.param_dim,):
            raise DimensionMismatchError(_MSG_BAD_PARAM_DIM.format(got=p.shape, want=self.param_dim))
        return x, p

    def eval_rhs(self, x: Array, p: Array) -> Array:
        """Evaluate ``f(x, p)`` with dimension checks."""
        x, p = self._check(x, p)
        return np.asarray(self.rhs(x, p), dtype=float)

    def eval_state_jacobian(self, x: Array, p: Array) -> Array:
        """Evaluate ``df/dx``; falls back to central finite differences."""
        x, p = self._check(x, p)
        if self.state_jacobian is not None:
            return np.asarray(self.state_jacobian(x, p), dtype=float)
        return fd_state_jacobian(self.rhs, x, p)

    def eval_param_derivatives(self, x: Array, p: Array) -> Array:
        """Evaluate ``df/dp`` (shape (n, k)); falls back to finite differences."""
        x, p = self._check(x, p)
        if self.param_derivatives is not None:
            return np.asarray(self.param_derivatives(x, p), dtype=float)
        return fd_param_derivatives(self.rhs, x, p)


def fd_state_jacobian(rhs: Callable[[Array, Array], Array], x: Array, p: Array) -> Array:
    """Central finite-difference Jacobian ``df/dx`` with per-component steps."""
    n = x.size
    jac = np.empty((n, n), dtype=float)
    for i in range(n):
        h = FD_RELATIVE_STEP * max(abs(float(x[i])), 1.0)
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (np.asarray(rhs(xp, p)) - np.asarray(rhs(xm, p))) / (2.0 * h)
    return jac


def fd_param_derivatives(rhs: Callable[[Array, Array], Array], x: Array, p: Array) -> Array:
    """Central finite-difference parameter derivatives ``df/dp``."""
    n = np.asarray(rhs(x, p)).size
    k = p.size
    out = np.empty((n, k), dtype=float)
    for l in range(k):
        h = FD_RELATIVE_STEP * max(abs(float(p[l])), 1.0)
        pp = p.copy()
        pm = p.copy()
        pp[l] += h
        pm[l] -= h
        out[:, l] = (np.asarray(rhs(x, pp)) - np.asarray(rhs(x, pm))) / (2.0 * h)
    return out


# ---- model registry ---------------------------------------------------------


@dataclass(frozen=True)
class ModelInfo:
    """A registered model bundle.

    Couples the system with its default parameters, the published study box
    (per-axis ranges and spacings), coordinate names for feature selection,
    and a default initial state for cycle searches.
    """

    name: str
    system: OdeSystem
    defaults: ParameterVector
    ranges: dict[str, tuple[float, float]]
    spacings: dict[str, float]
    coordinates: tuple[str, ...]
    initial_state: Callable[[Array], Array]


_REGISTRY: dict[str, ModelInfo] = {}


def register_model(info: ModelInfo) -> None:
    """Register a model under ``info.name`` (replacing any previous entry)."""
    _REGISTRY[info.name] = info


def get_model(name: str) -> ModelInfo:
    try:
        return _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY)) or "(none)"
        raise ConfigError(f"unknown model {name!r}; registered models: {known}") from None


def available_models() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


# ---- spruce budworm model ---------------------------------------------------

BUDWORM_PARAM_NAMES = ("p1", "p2", "p3", "p4", "p5", "p6", "p7")
BUDWORM_PARAM_UNITS = (
    "1/yr",
    "1/yr",
    "branches/acre",
    "larvae/branch",
    "larvae/(acre*yr)",
    "larvae/branch",
    "(branches*acre)/(yr*larvae)",
)
BUDWORM_DEFAULT_VALUES = (0.15, 1.6, 24000.0, 200.0, 28000.0, 1.5, 0.0015)
BUDWORM_RANGES: dict[str, tuple[float, float]] = {
    "p1": (0.149, 0.151),
    "p2": (1.5, 1.7),
    "p3": (22000.0, 26000.0),
    "p4": (190.0, 210.0),
    "p5": (24000.0, 32000.0),
    "p6": (1.0, 2.0),
    "p7": (0.001, 0.002),
}
BUDWORM_SPACINGS: dict[str, float] = {
    "p1": 0.0001,
    "p2": 0.1,
    "p3": 250.0,
    "p4": 2.0,
    "p5": 500.0,
    "p6": 0.1,
    "p7": 0.0001,
}

_MSG_BUDWORM_SINGULAR = "budworm right-hand side is undefined for branch density R <= 0 (got R={r!r})"


def budworm_rhs_pair(r: float, n: float, p: Array) -> tuple[float, float]:
    if r <= 0.0:
        raise SingularInputError(_MSG_BUDWORM_SINGULAR.format(r=r))
    den = p[5] * p[5] * r * r + n * n
    dr = p[0] * r * (1.0 - r / p[2]) - p[6] * n
    dn = p[1] * n * (1.0 - n / (p[3] * r)) - p[4] * n * n / den
    return dr, dn


def budworm_jac_pair(r: float, n: float, p: Array) -> tuple[float, float, float, float]:
    if r <= 0.0:
        raise SingularInputError(_MSG_BUDWORM_SINGULAR.format(r=r))
    den = p[5] * p[5] * r * r + n * n
    den2 = den * den
    j11 = p[0] * (1.0 - 2.0 * r / p[2])
    j12 = -p[6]
    j21 = p[1] * n * n / (p[3] * r * r) + 2.0 * p[4] * p[5] * p[5] * r * n * n / den2
    j22 = p[1] * (1.0 - 2.0 * n / (p[3] * r)) - 2.0 * p[4] * p[5] * p[5] * r * r * n / den2
    return j11, j12, j21, j22


def budworm_rhs(x: Array, p: Array) -> Array:
    dr, dn = budworm_rhs_pair(float(x[0]), float(x[1]), p)
    return np.array((dr, dn))


def budworm_state_jacobian(x: Array, p: Array) -> Array:
    j11, j12, j21, j22 = budworm_jac_pair(float(x[0]), float(x[1]), p)
    return np.array(((j11, j12), (j21, j22)))


def budworm_param_derivatives(x: Array, p: Array) -> Array:
    """Analytic ``df/dp`` for the budworm model, shape (2, 7)."""
    r = float(x[0])
    n = float(x[1])
    if r <= 0.0:
        raise SingularInputError(_MSG_BUDWORM_SINGULAR.format(r=r))
    den = p[5] * p[5] * r * r + n * n
    den2 = den * den
    out = np.zeros((2, 7))
    out[0, 0] = r * (1.0 - r / p[2])
    out[0, 2] = p[0] * r * r / (p[2] * p[2])
    out[0, 6] = -n
    out[1, 1] = n * (1.0 - n / (p[3] * r))
    out[1, 3] = p[1] * n * n / (p[3] * p[3] * r)
    out[1, 4] = -n * n / den
    out[1, 5] = 2.0 * p[4] * p[5] * r * r * n * n / den2
    return out


def budworm_initial_state(p: Array) -> Array:
    """Interior starting point for cycle searches: R = 0.75*p3, N = 0.1*p4*R."""
    r0 = 0.75 * p[2]
    return np.array((r0, 0.1 * p[3] * r0))


def budworm_defaults() -> ParameterVector:
    return ParameterVector(np.array(BUDWORM_DEFAULT_VALUES), BUDWORM_PARAM_NAMES, BUDWORM_PARAM_UNITS)


def budworm_model() -> ModelInfo:
    system = OdeSystem(
        name="budworm",
        state_dim=2,
        param_dim=7,
        rhs=budworm_rhs,
        state_jacobian=budworm_state_jacobian,
        param_derivatives=budworm_param_derivatives,
        rhs_pair=budworm_rhs_pair,
        jac_pair=budworm_jac_pair,
        positive_states=True,
    )
    return ModelInfo(
        name="budworm",
        system=system,
        defaults=budworm_defaults(),
        ranges=dict(BUDWORM_RANGES),
        spacings=dict(BUDWORM_SPACINGS),
        coordinates=("R", "N"),
        initial_state=budworm_initial_state,
    )


register_model(budworm_model())
