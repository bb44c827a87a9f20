"""Chain ODE: right-hand side, adaptive integration, and steady-state solving.

The n coupled equations move material from a saturating source through n
buffers to a sink; the (1 - x) factors throttle inflow into fuller buffers.
Every trajectory stays inside [0,1]^n and converges to the unique interior
equilibrium, which this module finds by integrating until the derivative
residual is below tolerance and then polishing with the algebraic backward
recursion.
"""

import numpy as np

from . import _backend
from .errors import ConvergenceError, InvalidInputError, StiffnessError
from .spectral import occupancies_from_throughput
from .types import OccupancyState, RateProfile, StepControl, SteadyState, Trajectory

_STATUS_DONE = 0
_STATUS_BUFFER_FULL = 1
_STATUS_UNDERFLOW = 2
_STATUS_RESIDUAL_OK = 3
_STATUS_BUDGET = 4


def rfm_rhs(rates: RateProfile, state: OccupancyState) -> np.ndarray:
    """Occupancy time-derivatives (1/second) at the given state.

    Buffer 1 fills at rates[0]*(1-x_1) and drains at rates[1]*x_1*(1-x_2);
    interior buffers balance the two neighboring link flows; the last buffer
    drains unconditionally at rates[n]*x_n.
    """
    if state.n != rates.n:
        raise InvalidInputError(
            f"state has {state.n} levels but rates describe {rates.n} buffers"
        )
    lam = np.ascontiguousarray(rates.rates)
    x = np.ascontiguousarray(state.levels)
    return _backend.kernels.flow_rhs(lam, x)


def _min_step_default(sc: StepControl, lam: np.ndarray) -> float:
    if sc.min_step is not None:
        return sc.min_step
    return 1e-12 / float(np.max(lam))


def _first_step_default(sc: StepControl, lam: np.ndarray, horizon: float) -> float:
    if sc.first_step is not None:
        return sc.first_step
    return min(0.1 / float(np.max(lam)), 0.1 * horizon)


def integrate(rates: RateProfile, init: OccupancyState, horizon: float,
              step_control: StepControl | None = None) -> Trajectory:
    """Integrate the chain ODE over [t0, t0+horizon] from the given state.

    The trajectory holds every accepted solver step (initial state included);
    steps whose trial state leaves [0,1]^n are rejected and halved, so all
    samples lie in the cube without clipping. Raises StiffnessError when the
    step size underflows the configured minimum.
    """
    if not horizon > 0.0:
        raise InvalidInputError("horizon must be positive")
    if init.n != rates.n:
        raise InvalidInputError(
            f"init has {init.n} levels but rates describe {rates.n} buffers"
        )
    sc = step_control or StepControl()
    lam = np.ascontiguousarray(rates.rates)
    x = np.array(init.levels, dtype=np.float64)
    t = init.time
    t_end = t + horizon
    h = _first_step_default(sc, lam, horizon)
    min_step = _min_step_default(sc, lam)

    cap = 1024
    times_chunks = [np.array([t])]
    level_chunks = [x.reshape(1, -1).copy()]
    while True:
        out_t = np.empty(cap)
        out_x = np.empty((cap, x.size))
        status, t, h, n_rec, _, _ = _backend.kernels.rk45_chunk(
            lam, x, t, t_end, sc.rtol, sc.atol, h, min_step, sc.max_step,
            0.0, np.iinfo(np.int64).max, out_t, out_x, True,
        )
        if n_rec:
            times_chunks.append(out_t[:n_rec].copy())
            level_chunks.append(out_x[:n_rec].copy())
        if status == _STATUS_BUFFER_FULL:
            cap = min(2 * cap, 1 << 20)
            continue
        if status == _STATUS_UNDERFLOW:
            raise StiffnessError(
                f"integrator step underflowed {min_step:.3e} at t={t:.6g}", time=t
            )
        break

    return Trajectory(np.concatenate(times_chunks), np.vstack(level_chunks))


def _polish(lam: np.ndarray, e: np.ndarray):
    """Refine an approximate equilibrium with the backward recursion.

    Solves the scalar closure equation lam[0]*(1 - e_1(R)) = R for the
    throughput by safeguarded bisection, starting from the integrator's
    estimate. Returns (e, R); falls back to the input when no bracket is
    found (should not happen for valid profiles).
    """
    def closure_gap(r):
        occ = occupancies_from_throughput(lam, r)
        if occ is None:
            return -np.inf, None
        return lam[0] * (1.0 - occ[0]) - r, occ

    r0 = float(lam[-1] * e[-1])
    lo = hi = r0
    gap, _ = closure_gap(r0)
    if gap > 0.0:
        while True:
            hi *= 1.0 + 1e-3
            gap, _ = closure_gap(hi)
            if gap <= 0.0:
                break
    else:
        while True:
            lo *= 1.0 - 1e-3
            gap, _ = closure_gap(lo)
            if gap > 0.0:
                break
            if lo < 1e-300:
                return e, r0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * hi:
            break
        gap, _ = closure_gap(mid)
        if gap > 0.0:
            lo = mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    occ = occupancies_from_throughput(lam, r)
    if occ is None:
        return e, r0
    return occ, r


def solve_steady_state(rates: RateProfile, tol: float = 1e-10, *,
                       step_control: StepControl | None = None,
                       polish: bool = True,
                       max_steps: int = 20_000_000) -> SteadyState:
    """Equilibrium occupancies, throughput, and delays for a rate profile.

    Integrates from the unbiased interior point (1/2, ..., 1/2) until
    max|dx/dt| <= tol, then (by default) polishes the result with the
    algebraic backward recursion. The returned state always satisfies the
    residual bound, polish or not. Raises ConvergenceError carrying the best
    iterate when the step budget runs out first.
    """
    if not tol > 0.0:
        raise InvalidInputError("tol must be positive")
    sc = step_control or StepControl(rtol=1e-12, atol=1e-14)
    lam = np.ascontiguousarray(rates.rates)
    n = rates.n
    x = np.full(n, 0.5)
    horizon = 1e12
    t = 0.0
    h = _first_step_default(sc, lam, horizon)
    min_step = _min_step_default(sc, lam)
    dummy_t = np.empty(1)
    dummy_x = np.empty((1, n))

    # Explicit stepping hovers at a tolerance-dependent noise floor once the
    # equilibrium is reached, so run bounded sub-budgets and stop early when
    # the residual stops improving; the polish then closes the gap.
    sub_budget = 200_000
    spent = 0
    resid_prev = np.inf
    resid = np.inf
    converged = False
    while spent < max_steps:
        status, t, h, _, n_steps, resid = _backend.kernels.rk45_chunk(
            lam, x, t, horizon, sc.rtol, sc.atol, h, min_step, sc.max_step,
            tol, min(sub_budget, max_steps - spent), dummy_t, dummy_x, False,
        )
        spent += n_steps
        if status == _STATUS_UNDERFLOW:
            raise StiffnessError(
                f"integrator step underflowed {min_step:.3e} at t={t:.6g}", time=t
            )
        if status == _STATUS_RESIDUAL_OK:
            converged = True
            break
        if status == _STATUS_DONE:
            break  # pseudo-horizon exhausted
        if status == _STATUS_BUDGET and resid > 0.3 * resid_prev:
            break  # residual noise floor reached
        resid_prev = resid

    e, r = (x, float(lam[-1] * x[-1]))
    if polish:
        e_pol, r_pol = _polish(lam, x)
        resid_pol = float(np.max(np.abs(rfm_rhs(rates, OccupancyState(e_pol)))))
        if resid_pol <= resid:
            e, r, resid = e_pol, r_pol, resid_pol
    if resid > tol:
        if not converged:
            raise ConvergenceError(
                f"residual {resid:.3e} still above {tol:.1e} after {spent} steps",
                best=e, residual=float(resid),
            )
        raise ConvergenceError(
            f"post-polish residual {resid:.3e} above {tol:.1e}",
            best=e, residual=float(resid),
        )

    per_node = e / r
    return SteadyState(
        occupancies=e,
        throughput=r,
        per_node_delay=per_node,
        e2e_delay=float(per_node.sum()),
    )
