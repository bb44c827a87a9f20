"""Stochastic exclusion-process simulator for the n-buffer chain.

Each site holds at most one packet. Time advances in fixed ticks; at every
tick the sites are scanned from the last to the first, a packet whose hop
clock has expired advances when the next site is free (the last site exits),
and a blocked packet redraws a fresh exponential waiting time. The source
injects into site 1 under its own clock. Waiting times at site i are
exponential with mean 1/rates[i] (rates[0] is the injection clock, rates[n]
the exit clock), matching the mean-field chain ODE's boundary terms.

Implementation choices not pinned elsewhere: the tick width defaults to
0.1 / max(rates); delay statistics cover packets that entered after burn-in
and exited before the run ended; the backward scan is the only ordering rule,
so simultaneously-ready packets at non-adjacent sites resolve in scan order.
Tick rounding biases boundary-site occupancy by O(rate * tick); shrink the
tick for tighter agreement with the deterministic model.

A single run is sequential; replicas are independent (counter-based RNG keyed
by consecutive seeds) and may execute in parallel threads.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import InsufficientStatisticsError, InvalidInputError
from .types import RateProfile

log = logging.getLogger(__name__)

_CHUNK_TICKS = 4096


@dataclass(frozen=True)
class TasepConfig:
    """Simulation protocol parameters.

    ``burn_in_cycles`` ticks are discarded before measuring; occupancies and
    delays are then averaged over ``measure_cycles`` ticks. ``tick`` of None
    selects the default width 0.1 / max(rates).
    """

    n: int
    rates: RateProfile
    measure_cycles: int
    seed: int
    burn_in_cycles: int = 350_000
    tick: float | None = None

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise InvalidInputError("n must be an integer >= 1")
        if self.rates.n != self.n:
            raise InvalidInputError(
                f"rates describe {self.rates.n} sites but n={self.n}"
            )
        if not (isinstance(self.measure_cycles, (int, np.integer))
                and self.measure_cycles >= 1):
            raise InvalidInputError("measure_cycles must be an integer >= 1")
        if not (isinstance(self.burn_in_cycles, (int, np.integer))
                and self.burn_in_cycles >= 0):
            raise InvalidInputError("burn_in_cycles must be a nonnegative integer")
        if self.tick is not None and not self.tick > 0.0:
            raise InvalidInputError("tick must be positive when given")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "measure_cycles", int(self.measure_cycles))
        object.__setattr__(self, "burn_in_cycles", int(self.burn_in_cycles))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def tick_width(self):
        if self.tick is not None:
            return float(self.tick)
        return 0.1 / float(np.max(self.rates.rates))


@dataclass(frozen=True)
class SimStats:
    """Time-averaged statistics from one run.

    Counters: ``packets_completed`` exits inside the measurement window,
    ``packets_exited`` / ``packets_entered`` / ``packets_in_flight`` whole-run
    totals (entered = exited + in_flight at the end of the run).
    ``transits`` is a (pid, entry_time, exit_time) record array when the run
    was asked to keep raw transit times.
    """

    mean_occupancy: np.ndarray
    throughput_estimate: float
    mean_e2e_delay: float
    e2e_delay_stderr: float
    packets_completed: int
    packets_entered: int
    packets_exited: int
    packets_in_flight: int
    transits: np.ndarray | None = field(default=None, compare=False)


class _ExpStream:
    """Buffered standard-exponential draws from a counter-based generator.

    Both kernel backends consume variates strictly in draw order, so results
    do not depend on the backend or on the chunking of kernel calls.
    """

    def __init__(self, seed, block=1 << 18):
        self._gen = np.random.Generator(np.random.Philox(key=seed & (2 ** 64 - 1)))
        self._block = block
        self.buf = self._gen.standard_exponential(block)
        self.pos = 0

    def ensure(self, count):
        """Guarantee at least ``count`` unconsumed variates in ``buf``."""
        remaining = self.buf.size - self.pos
        if remaining < count:
            fresh = self._gen.standard_exponential(max(self._block, count))
            self.buf = np.concatenate([self.buf[self.pos:], fresh])
            self.pos = 0

    def next(self):
        self.ensure(1)
        v = self.buf[self.pos]
        self.pos += 1
        return v


def _run_with_kernel(kernels, config: TasepConfig, keep_transits: bool):
    n = config.n
    lam = np.ascontiguousarray(config.rates.rates)
    tick = config.tick_width
    total_ticks = config.burn_in_cycles + config.measure_cycles

    occ = np.zeros(n, dtype=np.uint8)
    hop_time = np.zeros(n)
    pid = np.zeros(n, dtype=np.int64)
    entry_t = np.zeros(n)
    occ_sum = np.zeros(n)
    out_pid = np.empty(_CHUNK_TICKS, dtype=np.int64)
    out_entry = np.empty(_CHUNK_TICKS)
    out_exit = np.empty(_CHUNK_TICKS)

    stream = _ExpStream(config.seed)
    entry_clock = stream.next() / lam[0]
    next_pid = 0
    exits_pid, exits_entry, exits_exit = [], [], []

    done = 0
    while done < total_ticks:
        chunk = min(_CHUNK_TICKS, total_ticks - done)
        stream.ensure(chunk * (n + 2))
        entry_clock, next_pid, stream.pos, n_exits = kernels.tasep_chunk(
            lam, occ, hop_time, pid, entry_t, tick, done, chunk,
            config.burn_in_cycles, entry_clock, next_pid, stream.buf,
            stream.pos, occ_sum, out_pid, out_entry, out_exit,
        )
        if n_exits:
            exits_pid.append(out_pid[:n_exits].copy())
            exits_entry.append(out_entry[:n_exits].copy())
            exits_exit.append(out_exit[:n_exits].copy())
        done += chunk

    all_pid = np.concatenate(exits_pid) if exits_pid else np.empty(0, dtype=np.int64)
    all_entry = np.concatenate(exits_entry) if exits_entry else np.empty(0)
    all_exit = np.concatenate(exits_exit) if exits_exit else np.empty(0)

    t_burn = (config.burn_in_cycles + 0.5) * tick
    measured = all_exit > t_burn
    n_completed = int(np.count_nonzero(measured))
    if n_completed == 0:
        raise InsufficientStatisticsError(
            "no packet completed inside the measurement window"
        )
    throughput = n_completed / (config.measure_cycles * tick)

    steady = all_entry > t_burn
    delays = (all_exit - all_entry)[steady]
    if delays.size == 0:
        raise InsufficientStatisticsError(
            "no packet both entered and exited inside the measurement window"
        )
    stderr = float(np.std(delays, ddof=1) / np.sqrt(delays.size)) if delays.size > 1 else 0.0

    transits = None
    if keep_transits:
        transits = np.rec.fromarrays(
            [all_pid, all_entry, all_exit],
            names=["packet_id", "entry_time", "exit_time"],
        )

    return SimStats(
        mean_occupancy=occ_sum / config.measure_cycles,
        throughput_estimate=float(throughput),
        mean_e2e_delay=float(delays.mean()),
        e2e_delay_stderr=stderr,
        packets_completed=n_completed,
        packets_entered=int(next_pid),
        packets_exited=int(all_pid.size),
        packets_in_flight=int(occ.sum()),
        transits=transits,
    )


def run_tasep(config: TasepConfig, *, keep_transits: bool = False) -> SimStats:
    """Simulate one lattice realization and return its time-averaged statistics.

    Deterministic: identical config (including seed) gives identical output.
    Raises InsufficientStatisticsError when the measurement window yields no
    completed packets.
    """
    return _run_with_kernel(_backend.kernels, config, keep_transits)


@dataclass(frozen=True)
class ReplicateStats:
    """Across-replica means and standard errors for each statistic."""

    mean_occupancy: np.ndarray
    occupancy_stderr: np.ndarray
    throughput_estimate: float
    throughput_stderr: float
    mean_e2e_delay: float
    e2e_delay_stderr: float
    packets_completed: int
    replicas: int
    per_replica: tuple


def replicate(config: TasepConfig, replicas: int, *, threads: int = 1) -> ReplicateStats:
    """Run independent replicas seeded seed, seed+1, ... and aggregate.

    Reports the across-replica mean and standard error of each statistic.
    Per-replica failures are tolerated; the call fails only when every
    replica fails.
    """
    if not replicas >= 2:
        raise InvalidInputError("replicas must be >= 2")
    configs = [
        TasepConfig(
            n=config.n, rates=config.rates, measure_cycles=config.measure_cycles,
            seed=config.seed + r, burn_in_cycles=config.burn_in_cycles,
            tick=config.tick,
        )
        for r in range(replicas)
    ]

    results: list = [None] * replicas
    errors: list = [None] * replicas

    def _one(idx):
        try:
            results[idx] = run_tasep(configs[idx])
        except InsufficientStatisticsError as exc:
            errors[idx] = exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(_one, range(replicas)))
    else:
        for idx in range(replicas):
            _one(idx)

    good = [s for s in results if s is not None]
    if not good:
        raise InsufficientStatisticsError(
            f"all {replicas} replicas failed"
        ) from next(e for e in errors if e is not None)
    if len(good) < replicas:
        log.warning("replicate: %d of %d replicas failed", replicas - len(good), replicas)

    m = len(good)
    occ = np.vstack([s.mean_occupancy for s in good])
    thr = np.array([s.throughput_estimate for s in good])
    dly = np.array([s.mean_e2e_delay for s in good])
    sq = np.sqrt(m)
    return ReplicateStats(
        mean_occupancy=occ.mean(axis=0),
        occupancy_stderr=occ.std(axis=0, ddof=1) / sq,
        throughput_estimate=float(thr.mean()),
        throughput_stderr=float(thr.std(ddof=1) / sq),
        mean_e2e_delay=float(dly.mean()),
        e2e_delay_stderr=float(dly.std(ddof=1) / sq),
        packets_completed=int(sum(s.packets_completed for s in good)),
        replicas=m,
        per_replica=tuple(good),
    )
