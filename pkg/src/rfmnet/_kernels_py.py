"""Pure NumPy/SciPy fallback for the compiled kernels.

Same call contracts as the Cython module ``_kernels``; selected by
``rfmnet._backend`` when the extension is unavailable or when
``RFMNET_PURE_PYTHON=1``. The lattice kernel consumes exponential variates
from a caller-supplied buffer strictly in order, so simulation results are
bit-identical across the two backends.
"""

import numpy as np
import scipy.linalg

IMPL = "python"

# Cash-Karp 5(4) embedded pair. The 5th-order solution is propagated; the
# difference to the 4th-order one estimates the local error.
_A2 = (1 / 5,)
_A3 = (3 / 40, 9 / 40)
_A4 = (3 / 10, -9 / 10, 6 / 5)
_A5 = (-11 / 54, 5 / 2, -70 / 27, 35 / 27)
_A6 = (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096)
_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_B4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

RK_DONE = 0
RK_BUFFER_FULL = 1
RK_STEP_UNDERFLOW = 2
RK_RESIDUAL_OK = 3
RK_STEP_BUDGET = 4


def flow_rhs(lam, x):
    """Occupancy derivatives of the chain ODE for rates lam (n+1) and state x (n)."""
    n = x.size
    f = np.empty(n + 1)
    f[0] = lam[0] * (1.0 - x[0])
    if n > 1:
        f[1:n] = lam[1:n] * x[: n - 1] * (1.0 - x[1:n])
    f[n] = lam[n] * x[n - 1]
    return f[:n] - f[1:]


def rk45_chunk(lam, x, t, t_end, rtol, atol, h, min_step, max_step,
               resid_tol, max_steps, out_times, out_levels, record):
    """Advance the chain ODE from t toward t_end with adaptive embedded 4/5 steps.

    ``x`` is updated in place. A trial step leaving [0,1]^n is rejected and
    halved. Returns (status, t, h, n_recorded, n_steps, resid) where resid is
    max|dx/dt| at the final state.
    """
    n_rec = 0
    n_steps = 0
    k1 = flow_rhs(lam, x)
    resid = float(np.max(np.abs(k1))) if k1.size else 0.0
    if resid_tol > 0.0 and resid <= resid_tol:
        return RK_RESIDUAL_OK, t, h, 0, 0, resid

    while t < t_end:
        if n_steps >= max_steps:
            return RK_STEP_BUDGET, t, h, n_rec, n_steps, resid
        if h < min_step:
            return RK_STEP_UNDERFLOW, t, h, n_rec, n_steps, resid
        h_use = min(h, max_step, t_end - t)
        if t + h_use == t:
            return RK_STEP_UNDERFLOW, t, h, n_rec, n_steps, resid

        k2 = flow_rhs(lam, x + h_use * (_A2[0] * k1))
        k3 = flow_rhs(lam, x + h_use * (_A3[0] * k1 + _A3[1] * k2))
        k4 = flow_rhs(lam, x + h_use * (_A4[0] * k1 + _A4[1] * k2 + _A4[2] * k3))
        k5 = flow_rhs(lam, x + h_use * (_A5[0] * k1 + _A5[1] * k2 + _A5[2] * k3
                                        + _A5[3] * k4))
        k6 = flow_rhs(lam, x + h_use * (_A6[0] * k1 + _A6[1] * k2 + _A6[2] * k3
                                        + _A6[3] * k4 + _A6[4] * k5))
        y_new = x + h_use * (_B5[0] * k1 + _B5[2] * k3 + _B5[3] * k4 + _B5[5] * k6)
        delta = h_use * (_E[0] * k1 + _E[2] * k3 + _E[3] * k4 + _E[4] * k5
                         + _E[5] * k6)
        n_steps += 1

        if np.any(y_new < 0.0) or np.any(y_new > 1.0):
            h = 0.5 * h_use
            continue

        scale = atol + rtol * np.maximum(np.abs(x), np.abs(y_new))
        err = float(np.max(np.abs(delta) / scale))
        if err <= 1.0:
            t = t + h_use
            x[:] = y_new
            k1 = flow_rhs(lam, x)
            resid = float(np.max(np.abs(k1)))
            if record:
                out_times[n_rec] = t
                out_levels[n_rec, :] = x
                n_rec += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = h_use * fac
            if resid_tol > 0.0 and resid <= resid_tol:
                return RK_RESIDUAL_OK, t, h, n_rec, n_steps, resid
            if record and n_rec == out_times.size:
                return RK_BUFFER_FULL, t, h, n_rec, n_steps, resid
        else:
            h = h_use * max(0.2, 0.9 * err ** -0.2)

    return RK_DONE, t, h, n_rec, n_steps, resid


def max_eigenvalue_offdiag(b):
    """Largest eigenvalue of the zero-diagonal symmetric tridiagonal matrix
    with off-diagonal entries b (matrix size len(b)+1).

    Delegates to LAPACK's bisection-based banded solver, an equivalent of the
    Sturm-count bisection used by the compiled backend.
    """
    m = b.size + 1
    band = np.zeros((2, m))
    band[1, : m - 1] = b
    vals = scipy.linalg.eig_banded(
        band, lower=True, eigvals_only=True, select="i", select_range=(m - 1, m - 1)
    )
    return float(vals[0])


def tasep_chunk(lam, occ, hop_time, pid, entry_t, tick, tick_start, n_ticks,
                burn_in, entry_clock, next_pid, exp_buf, exp_pos, occ_sum,
                out_pid, out_entry, out_exit):
    """Run n_ticks lattice scans starting at absolute tick index tick_start.

    Each tick scans sites last-to-first: a particle whose hop clock expired
    advances when the next site is free (the last site exits the chain) and
    redraws a fresh waiting time when blocked. A source injection is attempted
    after the scan. Occupancies accumulate into occ_sum for ticks >= burn_in.
    Exits are appended to out_* from index 0; returns
    (entry_clock, next_pid, exp_pos, n_exits).
    """
    n = occ.size
    n_exits = 0
    for k in range(tick_start, tick_start + n_ticks):
        now = (k + 1) * tick
        for i in range(n - 1, -1, -1):
            if occ[i] and hop_time[i] <= now:
                if i == n - 1:
                    occ[i] = 0
                    out_pid[n_exits] = pid[i]
                    out_entry[n_exits] = entry_t[i]
                    out_exit[n_exits] = now
                    n_exits += 1
                elif not occ[i + 1]:
                    occ[i + 1] = 1
                    occ[i] = 0
                    pid[i + 1] = pid[i]
                    entry_t[i + 1] = entry_t[i]
                    hop_time[i + 1] = now + exp_buf[exp_pos] / lam[i + 2]
                    exp_pos += 1
                else:
                    hop_time[i] = now + exp_buf[exp_pos] / lam[i + 1]
                    exp_pos += 1
        if entry_clock <= now:
            if not occ[0]:
                occ[0] = 1
                pid[0] = next_pid
                entry_t[0] = now
                next_pid += 1
                hop_time[0] = now + exp_buf[exp_pos] / lam[1]
                exp_pos += 1
            entry_clock = now + exp_buf[exp_pos] / lam[0]
            exp_pos += 1
        if k >= burn_in:
            for i in range(n):
                occ_sum[i] += occ[i]
    return entry_clock, next_pid, exp_pos, n_exits
