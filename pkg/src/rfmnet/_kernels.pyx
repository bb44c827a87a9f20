# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: adaptive RK stepping, Sturm-count bisection for the
largest eigenvalue, and the lattice tick scan. Call contracts mirror
``_kernels_py`` exactly; the lattice kernel consumes exponential variates from
the caller-supplied buffer strictly in order, so both backends produce
bit-identical simulations.
"""

import numpy as np

from libc.math cimport fabs, pow

IMPL = "cython"

cdef enum:
    _DONE = 0
    _BUFFER_FULL = 1
    _UNDERFLOW = 2
    _RESIDUAL_OK = 3
    _BUDGET = 4

RK_DONE = _DONE
RK_BUFFER_FULL = _BUFFER_FULL
RK_STEP_UNDERFLOW = _UNDERFLOW
RK_RESIDUAL_OK = _RESIDUAL_OK
RK_STEP_BUDGET = _BUDGET

# Cash-Karp 5(4) tableau
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 3.0 / 10.0, A42 = -9.0 / 10.0, A43 = 6.0 / 5.0
cdef double A51 = -11.0 / 54.0, A52 = 5.0 / 2.0, A53 = -70.0 / 27.0, A54 = 35.0 / 27.0
cdef double A61 = 1631.0 / 55296.0, A62 = 175.0 / 512.0, A63 = 575.0 / 13824.0
cdef double A64 = 44275.0 / 110592.0, A65 = 253.0 / 4096.0
cdef double B1 = 37.0 / 378.0, B3 = 250.0 / 621.0, B4 = 125.0 / 594.0, B6 = 512.0 / 1771.0
cdef double E1 = 37.0 / 378.0 - 2825.0 / 27648.0
cdef double E3 = 250.0 / 621.0 - 18575.0 / 48384.0
cdef double E4 = 125.0 / 594.0 - 13525.0 / 55296.0
cdef double E5 = 0.0 - 277.0 / 14336.0
cdef double E6 = 512.0 / 1771.0 - 1.0 / 4.0


cdef inline void _rhs(int n, double* lam, double* x, double* out) noexcept nogil:
    # out[j] = inflow(j) - outflow(j) for the chain ODE
    cdef int j
    cdef double prev = lam[0] * (1.0 - x[0])
    cdef double cur
    for j in range(n - 1):
        cur = lam[j + 1] * x[j] * (1.0 - x[j + 1])
        out[j] = prev - cur
        prev = cur
    out[n - 1] = prev - lam[n] * x[n - 1]


def flow_rhs(double[::1] lam, double[::1] x):
    """Occupancy derivatives of the chain ODE for rates lam (n+1) and state x (n)."""
    cdef int n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] mv = out
    _rhs(n, &lam[0], &x[0], &mv[0])
    return out


def rk45_chunk(double[::1] lam, double[::1] x, double t, double t_end,
               double rtol, double atol, double h, double min_step,
               double max_step, double resid_tol, long long max_steps,
               double[::1] out_times, double[:, ::1] out_levels, bint record):
    """Advance the chain ODE from t toward t_end with adaptive embedded 4/5 steps.

    ``x`` is updated in place; see ``_kernels_py.rk45_chunk``.
    """
    cdef int n = x.shape[0]
    cdef long long n_rec = 0, n_steps = 0
    cdef int status = _DONE
    cdef int i
    cdef double h_use, err, sc, e_i, fac, resid

    work = np.empty((8, n))
    cdef double[:, ::1] w = work
    cdef double* k1 = &w[0, 0]
    cdef double* k2 = &w[1, 0]
    cdef double* k3 = &w[2, 0]
    cdef double* k4 = &w[3, 0]
    cdef double* k5 = &w[4, 0]
    cdef double* k6 = &w[5, 0]
    cdef double* yt = &w[6, 0]
    cdef double* yn = &w[7, 0]
    cdef double* xp = &x[0]
    cdef double* lp = &lam[0]
    cdef bint out_of_cube

    with nogil:
        _rhs(n, lp, xp, k1)
        resid = 0.0
        for i in range(n):
            if fabs(k1[i]) > resid:
                resid = fabs(k1[i])
        if resid_tol > 0.0 and resid <= resid_tol:
            status = _RESIDUAL_OK
        else:
            while t < t_end:
                if n_steps >= max_steps:
                    status = _BUDGET
                    break
                if h < min_step:
                    status = _UNDERFLOW
                    break
                h_use = h
                if max_step < h_use:
                    h_use = max_step
                if t_end - t < h_use:
                    h_use = t_end - t
                if t + h_use == t:
                    status = _UNDERFLOW
                    break

                for i in range(n):
                    yt[i] = xp[i] + h_use * (A21 * k1[i])
                _rhs(n, lp, yt, k2)
                for i in range(n):
                    yt[i] = xp[i] + h_use * (A31 * k1[i] + A32 * k2[i])
                _rhs(n, lp, yt, k3)
                for i in range(n):
                    yt[i] = xp[i] + h_use * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
                _rhs(n, lp, yt, k4)
                for i in range(n):
                    yt[i] = xp[i] + h_use * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i]
                                             + A54 * k4[i])
                _rhs(n, lp, yt, k5)
                for i in range(n):
                    yt[i] = xp[i] + h_use * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                             + A64 * k4[i] + A65 * k5[i])
                _rhs(n, lp, yt, k6)
                n_steps += 1

                out_of_cube = 0
                for i in range(n):
                    yn[i] = xp[i] + h_use * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                             + B6 * k6[i])
                    if yn[i] < 0.0 or yn[i] > 1.0:
                        out_of_cube = 1
                if out_of_cube:
                    h = 0.5 * h_use
                    continue

                err = 0.0
                for i in range(n):
                    e_i = h_use * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                                   + E6 * k6[i])
                    sc = fabs(xp[i])
                    if fabs(yn[i]) > sc:
                        sc = fabs(yn[i])
                    sc = atol + rtol * sc
                    if fabs(e_i) / sc > err:
                        err = fabs(e_i) / sc

                if err <= 1.0:
                    t = t + h_use
                    for i in range(n):
                        xp[i] = yn[i]
                    _rhs(n, lp, xp, k1)
                    resid = 0.0
                    for i in range(n):
                        if fabs(k1[i]) > resid:
                            resid = fabs(k1[i])
                    if record:
                        out_times[n_rec] = t
                        for i in range(n):
                            out_levels[n_rec, i] = xp[i]
                        n_rec += 1
                    if err == 0.0:
                        fac = 5.0
                    else:
                        fac = 0.9 * pow(err, -0.2)
                        if fac > 5.0:
                            fac = 5.0
                        elif fac < 0.2:
                            fac = 0.2
                    h = h_use * fac
                    if resid_tol > 0.0 and resid <= resid_tol:
                        status = _RESIDUAL_OK
                        break
                    if record and n_rec == out_times.shape[0]:
                        status = _BUFFER_FULL
                        break
                else:
                    fac = 0.9 * pow(err, -0.2)
                    if fac < 0.2:
                        fac = 0.2
                    h = h_use * fac

    return status, t, h, n_rec, n_steps, resid


cdef int _sturm_count(int m, double* b, double sigma) noexcept nogil:
    # eigenvalues of the m x m zero-diagonal tridiagonal matrix below sigma
    cdef double d = -sigma
    cdef int cnt = 1 if d < 0.0 else 0
    cdef int k
    for k in range(1, m):
        if d == 0.0:
            d = -1e-300
        d = -sigma - b[k - 1] * b[k - 1] / d
        if d < 0.0:
            cnt += 1
    return cnt


def max_eigenvalue_offdiag(double[::1] b):
    """Largest eigenvalue of the zero-diagonal symmetric tridiagonal matrix
    with off-diagonal entries b (matrix size len(b)+1), by Sturm bisection.
    """
    cdef int m = b.shape[0] + 1
    cdef double bmax = 0.0
    cdef int k
    cdef double lo, hi, mid
    cdef double* bp = &b[0]

    with nogil:
        for k in range(m - 1):
            if b[k] > bmax:
                bmax = b[k]
        # interlacing puts the top eigenvalue in (bmax, 2*bmax)
        lo = bmax
        hi = 2.0 * bmax * (1.0 + 1e-12)
        while _sturm_count(m, bp, lo) == m:
            lo *= 1.0 - 1e-8
        while _sturm_count(m, bp, hi) < m:
            hi *= 1.5
        for k in range(200):
            if hi - lo <= 4e-16 * hi:
                break
            mid = 0.5 * (lo + hi)
            if _sturm_count(m, bp, mid) == m:
                hi = mid
            else:
                lo = mid
    return 0.5 * (lo + hi)


def tasep_chunk(double[::1] lam, unsigned char[::1] occ, double[::1] hop_time,
                long long[::1] pid, double[::1] entry_t, double tick,
                long long tick_start, long long n_ticks, long long burn_in,
                double entry_clock, long long next_pid, double[::1] exp_buf,
                long long exp_pos, double[::1] occ_sum, long long[::1] out_pid,
                double[::1] out_entry, double[::1] out_exit):
    """Run n_ticks lattice scans starting at absolute tick index tick_start.

    See ``_kernels_py.tasep_chunk`` for the protocol description.
    """
    cdef int n = occ.shape[0]
    cdef long long n_exits = 0
    cdef long long k
    cdef int i
    cdef double now

    with nogil:
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
