"""Shared domain types for the flow-model chain.

A chain of n buffers is parameterized by n+1 strictly positive link rates:
rates[0] feeds the first buffer, rates[i] carries traffic from buffer i to
buffer i+1, and rates[n] drains the last buffer. Occupancies are normalized
fill levels in [0, 1].
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


def _as_float_array(x, name):
    try:
        arr = np.asarray(x, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} must be a sequence of reals") from exc
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional")
    return arr


@dataclass(frozen=True)
class RateProfile:
    """The n+1 link rates of an n-buffer chain (packets/second)."""

    rates: np.ndarray

    def __post_init__(self):
        arr = _as_float_array(self.rates, "rates")
        if arr.size < 2:
            raise InvalidInputError("a chain needs at least 2 rates (n >= 1 buffers)")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise InvalidInputError("all rates must be strictly positive and finite")
        object.__setattr__(self, "rates", arr)

    @property
    def n(self):
        """Number of buffers in the chain."""
        return self.rates.size - 1

    @classmethod
    def homogeneous(cls, n, rate):
        """Profile with all n+1 rates equal to ``rate``."""
        if n < 1:
            raise InvalidInputError("n must be >= 1")
        return cls(np.full(n + 1, float(rate)))


@dataclass(frozen=True)
class OccupancyState:
    """Normalized buffer fill levels at one time instant."""

    levels: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        arr = _as_float_array(self.levels, "levels")
        if arr.size < 1:
            raise InvalidInputError("levels must be non-empty")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise InvalidInputError("levels must lie in [0, 1]")
        if not self.time >= 0.0:
            raise InvalidInputError("time must be nonnegative")
        object.__setattr__(self, "levels", arr)
        object.__setattr__(self, "time", float(self.time))

    @property
    def n(self):
        return self.levels.size


@dataclass(frozen=True)
class SteadyState:
    """Equilibrium occupancies with the derived flow and delay metrics."""

    occupancies: np.ndarray
    throughput: float
    per_node_delay: np.ndarray
    e2e_delay: float

    def __post_init__(self):
        occ = _as_float_array(self.occupancies, "occupancies")
        dly = _as_float_array(self.per_node_delay, "per_node_delay")
        if occ.size != dly.size:
            raise InvalidInputError("occupancies and per_node_delay lengths differ")
        if np.any(occ <= 0.0) or np.any(occ >= 1.0):
            raise InvalidInputError("equilibrium occupancies must lie strictly in (0, 1)")
        if not self.throughput > 0.0 or not self.e2e_delay > 0.0:
            raise InvalidInputError("throughput and e2e_delay must be positive")
        object.__setattr__(self, "occupancies", occ)
        object.__setattr__(self, "per_node_delay", dly)

    @property
    def n(self):
        return self.occupancies.size


@dataclass(frozen=True)
class Trajectory:
    """Integrator output: states sampled at the accepted solver steps.

    Behaves as an ordered sequence of :class:`OccupancyState`, index 0 being
    the initial condition.
    """

    times: np.ndarray
    levels: np.ndarray  # shape (len(times), n)

    def __len__(self):
        return self.times.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return OccupancyState(self.levels[i], self.times[i])

    @property
    def final(self):
        return self[len(self) - 1]


@dataclass(frozen=True)
class StepControl:
    """Tolerances and step bounds for the adaptive integrator.

    ``min_step`` defaults to 1e-12 divided by the largest rate; a step
    falling below it (or too small to advance the clock) raises
    :class:`~rfmnet.errors.StiffnessError`.
    """

    rtol: float = 1e-8
    atol: float = 1e-12
    first_step: float | None = None
    min_step: float | None = None
    max_step: float = float("inf")

    def __post_init__(self):
        if not (self.rtol > 0.0 and self.atol >= 0.0):
            raise InvalidInputError("rtol must be > 0 and atol >= 0")
        for name in ("first_step", "min_step"):
            v = getattr(self, name)
            if v is not None and not v > 0.0:
                raise InvalidInputError(f"{name} must be positive when given")
