"""Channel models and closed-form design rules for multihop relaying.

Two regimes are covered. Noise-limited: a hop of length m*l succeeds with
probability exp(-theta*n0*(m*l)**gamma), and routing over hops of m unit
steps trades chain length n/m against per-hop success. Interference-limited:
nodes transmit with contention probability q and the success probability is
exp(-q*c/2) with c = pi*theta**(1/gamma)/sqrt(gamma/2) - 1. In both cases the
end-to-end delay of the homogeneous chain is minimized in closed form, with
the unit link rate set to the success probability (times q in the contention
case).
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DegenerateChannelError, InvalidInputError


@dataclass(frozen=True)
class ChannelParams:
    """Noise-limited channel and chain geometry.

    theta: success threshold on the received signal ratio (linear scale).
    n0: noise power spectral density (W/Hz).
    gamma: path-loss exponent, >= 1.
    l: unit node spacing (meters).
    n: number of unit hops in the chain.
    """

    theta: float
    n0: float
    gamma: float
    l: float
    n: int

    def __post_init__(self):
        if not (self.theta > 0.0 and self.n0 > 0.0 and self.l > 0.0):
            raise InvalidInputError("theta, n0 and l must be positive")
        if not self.gamma >= 1.0:
            raise InvalidInputError("gamma must be >= 1")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise InvalidInputError("n must be an integer >= 1")


class HopOptimum(NamedTuple):
    m_star_real: float
    m_star_int: int
    delay_at_optimum: float


class ContentionOptimum(NamedTuple):
    q_star: float
    delay_at_optimum: float


def snr_success_prob(p: ChannelParams, m: int = 1) -> float:
    """Success probability of one hop spanning m unit spacings."""
    if not m >= 1:
        raise InvalidInputError("hop multiplier m must be >= 1")
    return math.exp(-p.theta * p.n0 * (m * p.l) ** p.gamma)


def _log_snr_delay_approx(p: ChannelParams, m: float) -> float:
    # log of (2n/m) * exp(theta*n0*(m*l)**gamma), safe against overflow
    return math.log(2.0 * p.n / m) + p.theta * p.n0 * (m * p.l) ** p.gamma


def snr_e2e_delay(p: ChannelParams, m: int, approximate: bool = False,
                  rate_scale: float = 1.0) -> float:
    """End-to-end delay when routing over hops of m unit steps.

    The chain shortens to n/m sites with per-link rate rate_scale times the
    hop success probability. Exact mode keeps the finite-chain cosine factor;
    approximate mode drops it (valid for n/m >> 1).
    """
    if not 1 <= m <= p.n:
        raise InvalidInputError(f"hop multiplier {m} outside 1..{p.n}")
    if not rate_scale > 0.0:
        raise InvalidInputError("rate_scale must be positive")
    base = (2.0 * p.n / m) * math.exp(p.theta * p.n0 * (m * p.l) ** p.gamma) / rate_scale
    if approximate:
        return base
    return base * math.cos(math.pi / ((p.n / m) + 3.0)) ** 2


def optimal_hop_length(p: ChannelParams, rate_scale: float = 1.0) -> HopOptimum:
    """Hop length minimizing the large-chain end-to-end delay.

    The continuous minimizer is m* = (1/l) * (1/(gamma*theta*n0))**(1/gamma);
    the integer choice is whichever of floor/ceil (clamped to [1, n]) gives
    the smaller approximate delay, ties resolved toward the smaller m.
    ``delay_at_optimum`` is the continuous-relaxation value
    2*n*l*(gamma*theta*n0)**(1/gamma)*exp(1/gamma) / rate_scale.
    """
    if not rate_scale > 0.0:
        raise InvalidInputError("rate_scale must be positive")
    g = p.gamma
    m_real = (1.0 / p.l) * (1.0 / (g * p.theta * p.n0)) ** (1.0 / g)
    lo = min(max(math.floor(m_real), 1), p.n)
    hi = min(max(math.ceil(m_real), 1), p.n)
    if _log_snr_delay_approx(p, lo) <= _log_snr_delay_approx(p, hi):
        m_int = lo
    else:
        m_int = hi
    delay = (2.0 * p.n * p.l * (g * p.theta * p.n0) ** (1.0 / g)
             * math.exp(1.0 / g) / rate_scale)
    return HopOptimum(m_real, m_int, delay)


def sir_constant(theta: float, gamma: float) -> float:
    """Interference constant c = pi*theta**(1/gamma)/sqrt(gamma/2) - 1.

    Raises DegenerateChannelError when c <= 0, where the interference-limited
    success model breaks down (small theta with large gamma).
    """
    if not theta > 0.0:
        raise InvalidInputError("theta must be positive")
    if not gamma >= 1.0:
        raise InvalidInputError("gamma must be >= 1")
    c = math.pi * theta ** (1.0 / gamma) / math.sqrt(gamma / 2.0) - 1.0
    if c <= 0.0:
        raise DegenerateChannelError(
            f"interference constant c={c:.4g} <= 0 for theta={theta}, gamma={gamma}"
        )
    return c


def sir_success_prob(q: float, theta: float, gamma: float) -> float:
    """Success probability under contention probability q."""
    if not 0.0 < q <= 1.0:
        raise InvalidInputError("q must lie in (0, 1]")
    return math.exp(-q * sir_constant(theta, gamma) / 2.0)


def optimal_contention(theta: float, gamma: float, n: int) -> ContentionOptimum:
    """Contention probability minimizing the end-to-end delay.

    With link rate q * exp(-q*c/2) the delay is (v/q)*exp(q*c/2) with
    v = 2*n*cos^2(pi/(n+3)); the minimizer is q* = min(1, 2/c).
    """
    if not (isinstance(n, int) and n >= 1):
        raise InvalidInputError("n must be an integer >= 1")
    c = sir_constant(theta, gamma)
    q = min(1.0, 2.0 / c)
    v = 2.0 * n * math.cos(math.pi / (n + 3)) ** 2
    delay = (v / q) * math.exp(q * c / 2.0)
    return ContentionOptimum(q, delay)
