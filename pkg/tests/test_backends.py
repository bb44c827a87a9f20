"""Compiled extension versus pure NumPy/SciPy fallback equivalence.

The lattice kernel must be bit-identical across backends (both consume the
same exponential variate stream in the same order); the ODE stepper and
eigensolver agree to floating-point roundoff.
"""

import numpy as np
import pytest

import rfmnet._backend as backend
import rfmnet._kernels_py as kernels_py
from rfmnet import RateProfile, TasepConfig
from rfmnet.tasep import run_tasep

kernels_cy = pytest.importorskip(
    "rfmnet._kernels", reason="compiled extension not built"
)


@pytest.fixture
def swap_backend():
    saved = backend.kernels
    yield
    backend.kernels = saved


def test_status_constants_match():
    for name in ("RK_DONE", "RK_BUFFER_FULL", "RK_STEP_UNDERFLOW",
                 "RK_RESIDUAL_OK", "RK_STEP_BUDGET"):
        assert getattr(kernels_cy, name) == getattr(kernels_py, name)


def test_flow_rhs_identical():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(1, 60))
        lam = np.ascontiguousarray(rng.uniform(0.1, 10.0, n + 1))
        x = np.ascontiguousarray(rng.uniform(0.0, 1.0, n))
        assert np.array_equal(kernels_cy.flow_rhs(lam, x), kernels_py.flow_rhs(lam, x))


def test_rk45_chunk_equivalence():
    rng = np.random.default_rng(1)
    for _ in range(5):
        n = int(rng.integers(1, 20))
        lam = np.ascontiguousarray(rng.uniform(0.3, 3.0, n + 1))
        x_cy = np.ascontiguousarray(rng.uniform(0.0, 1.0, n))
        x_py = x_cy.copy()
        args = (0.0, 30.0, 1e-10, 1e-12, 0.05, 1e-14, np.inf, 0.0, 1 << 62)
        buf_t = np.empty(1)
        buf_x = np.empty((1, n))
        res_cy = kernels_cy.rk45_chunk(lam, x_cy, *args, buf_t, buf_x, False)
        res_py = kernels_py.rk45_chunk(lam, x_py, *args, buf_t, buf_x, False)
        assert res_cy[0] == res_py[0]            # status
        assert res_cy[4] == res_py[4]            # step count
        assert np.max(np.abs(x_cy - x_py)) < 1e-12


def test_max_eigenvalue_sturm_vs_lapack():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(1, 300))
        b = np.ascontiguousarray(rng.uniform(0.05, 20.0, n + 1) ** -0.5)
        z_cy = kernels_cy.max_eigenvalue_offdiag(b)
        z_py = kernels_py.max_eigenvalue_offdiag(b)
        assert z_cy == pytest.approx(z_py, rel=1e-13)


def test_tasep_bit_identical(swap_backend):
    cfg = TasepConfig(n=7, rates=RateProfile(np.linspace(0.8, 2.0, 8)),
                      measure_cycles=40_000, seed=99, burn_in_cycles=10_000)
    backend.kernels = kernels_cy
    a = run_tasep(cfg, keep_transits=True)
    backend.kernels = kernels_py
    b = run_tasep(cfg, keep_transits=True)
    assert np.array_equal(a.mean_occupancy, b.mean_occupancy)
    assert a.throughput_estimate == b.throughput_estimate
    assert a.mean_e2e_delay == b.mean_e2e_delay
    assert a.e2e_delay_stderr == b.e2e_delay_stderr
    assert a.packets_completed == b.packets_completed
    assert a.packets_entered == b.packets_entered
    assert np.array_equal(a.transits.entry_time, b.transits.entry_time)
    assert np.array_equal(a.transits.exit_time, b.transits.exit_time)


def test_steady_state_routes_agree_across_backends(swap_backend):
    from rfmnet import solve_steady_state, spectral_steady_state

    rates = RateProfile(np.array([0.7, 1.9, 1.1, 0.9, 2.3]))
    backend.kernels = kernels_cy
    a_ode, a_spec = solve_steady_state(rates), spectral_steady_state(rates)
    backend.kernels = kernels_py
    b_ode, b_spec = solve_steady_state(rates), spectral_steady_state(rates)
    assert np.max(np.abs(a_ode.occupancies - b_ode.occupancies)) < 1e-10
    assert np.max(np.abs(a_spec.occupancies - b_spec.occupancies)) < 1e-10
    assert a_spec.throughput == pytest.approx(b_spec.throughput, rel=1e-13)


def test_tasep_independent_of_chunk_size(swap_backend, monkeypatch):
    import rfmnet.tasep as tasep_mod

    cfg = TasepConfig(n=4, rates=RateProfile.homogeneous(4, 1.0),
                      measure_cycles=9_000, seed=17, burn_in_cycles=1_000)
    a = run_tasep(cfg)
    monkeypatch.setattr(tasep_mod, "_CHUNK_TICKS", 257)
    b = run_tasep(cfg)
    assert np.array_equal(a.mean_occupancy, b.mean_occupancy)
    assert a.mean_e2e_delay == b.mean_e2e_delay
