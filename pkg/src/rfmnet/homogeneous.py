"""Closed-form steady-state metrics for the totally homogeneous chain.

When all n+1 link rates share a common value lambda_c, the equilibrium of the
chain ODE has explicit trigonometric form: occupancies depend only on n, the
throughput is lambda_c / (4 cos^2(pi/(n+3))), and per-node delays follow from
Little's law.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .types import SteadyState


@dataclass(frozen=True)
class ThrfmSpec:
    """A homogeneous chain: n buffers, common link rate lambda_c."""

    n: int
    lambda_c: float

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise InvalidInputError("n must be an integer >= 1")
        if not self.lambda_c > 0.0:
            raise InvalidInputError("lambda_c must be positive")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lambda_c", float(self.lambda_c))


def thrfm_occupancy(spec, i):
    """Steady-state occupancy of buffer i (1-based), independent of lambda_c."""
    if not 1 <= i <= spec.n:
        raise InvalidInputError(f"site index {i} outside 1..{spec.n}")
    u = math.pi / (spec.n + 3)
    return 0.5 + 0.5 * math.tan(u) / math.tan((i + 1) * u)


def thrfm_occupancies(spec):
    """All n steady-state occupancies as an array."""
    u = math.pi / (spec.n + 3)
    idx = np.arange(1, spec.n + 1)
    return 0.5 + 0.5 * math.tan(u) / np.tan((idx + 1) * u)


def thrfm_throughput(spec):
    """Steady-state throughput lambda_c / (4 cos^2(pi/(n+3)))."""
    return spec.lambda_c / (4.0 * math.cos(math.pi / (spec.n + 3)) ** 2)


def thrfm_delays(spec):
    """Per-node delays and the end-to-end delay (seconds).

    D_i = e_i / R by Little's law; the end-to-end sum collapses to
    (2 n / lambda_c) cos^2(pi/(n+3)).
    """
    u = math.pi / (spec.n + 3)
    idx = np.arange(1, spec.n + 1)
    per_node = (2.0 / spec.lambda_c) * math.cos(u) ** 2 \
        * (1.0 + math.tan(u) / np.tan((idx + 1) * u))
    e2e = (2.0 * spec.n / spec.lambda_c) * math.cos(u) ** 2
    return per_node, e2e


def thrfm_steady_state(spec):
    """Bundle occupancies, throughput, and delays into one SteadyState."""
    return SteadyState(
        occupancies=thrfm_occupancies(spec),
        throughput=thrfm_throughput(spec),
        per_node_delay=thrfm_delays(spec)[0],
        e2e_delay=thrfm_delays(spec)[1],
    )
