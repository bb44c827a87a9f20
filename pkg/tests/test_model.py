"""Chain ODE: right-hand side, integrator invariance, steady-state solving."""

import numpy as np
import pytest

from rfmnet import (
    ConvergenceError,
    InvalidInputError,
    OccupancyState,
    RateProfile,
    StepControl,
    StiffnessError,
    integrate,
    rfm_rhs,
    solve_steady_state,
    spectral_steady_state,
)


def test_rhs_single_empty_site_fills_at_entry_rate():
    rates = RateProfile([1.0, 1.0])
    dx = rfm_rhs(rates, OccupancyState([0.0]))
    assert dx == pytest.approx([1.0], abs=0)


def test_rhs_single_site_half_full_is_fixed_point():
    rates = RateProfile([1.0, 1.0])
    dx = rfm_rhs(rates, OccupancyState([0.5]))
    assert dx == pytest.approx([0.0], abs=0)


def test_rhs_full_chain_blocks_entry_and_drains_last_site():
    rates = RateProfile([1.0, 1.0, 1.0])
    dx = rfm_rhs(rates, OccupancyState([1.0, 1.0]))
    assert dx == pytest.approx([0.0, -1.0], abs=0)


def test_rhs_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        rfm_rhs(RateProfile([1.0, 1.0]), OccupancyState([0.5, 0.5]))


def test_rate_profile_validation():
    with pytest.raises(InvalidInputError):
        RateProfile([1.0])
    with pytest.raises(InvalidInputError):
        RateProfile([1.0, -2.0])
    with pytest.raises(InvalidInputError):
        RateProfile([1.0, 0.0])
    with pytest.raises(InvalidInputError):
        RateProfile([1.0, np.inf])


def test_occupancy_state_validation():
    with pytest.raises(InvalidInputError):
        OccupancyState([1.2])
    with pytest.raises(InvalidInputError):
        OccupancyState([-0.1])
    with pytest.raises(InvalidInputError):
        OccupancyState([0.5], time=-1.0)


def test_forward_invariance_random_pairs():
    # every sampled state of every trajectory stays inside the unit cube
    rng = np.random.default_rng(42)
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        rates = RateProfile(rng.uniform(0.2, 5.0, n + 1))
        init = OccupancyState(rng.uniform(0.0, 1.0, n))
        traj = integrate(rates, init, horizon=2.0,
                         step_control=StepControl(rtol=1e-7, atol=1e-9))
        assert np.all(traj.levels >= 0.0)
        assert np.all(traj.levels <= 1.0)


def test_trajectory_sequence_protocol():
    rates = RateProfile([1.0, 2.0, 0.5])
    traj = integrate(rates, OccupancyState([0.1, 0.9]), horizon=5.0)
    assert len(traj) > 2
    assert traj[0].time == 0.0
    assert np.array_equal(traj[0].levels, [0.1, 0.9])
    assert traj.final.time == pytest.approx(5.0, abs=0)
    assert np.all(np.diff(traj.times) > 0.0)


def test_integrate_from_equilibrium_stays_put():
    rates = RateProfile([1.0, 1.5, 0.8, 1.2])
    eq = solve_steady_state(rates).occupancies
    traj = integrate(rates, OccupancyState(eq), horizon=50.0,
                     step_control=StepControl(rtol=1e-10, atol=1e-12))
    assert np.max(np.abs(traj.levels - eq)) < 1e-8


def test_two_random_inits_reach_same_terminal_state():
    rng = np.random.default_rng(7)
    rates = RateProfile([1.0, 0.7, 1.3, 0.9])
    sc = StepControl(rtol=1e-10, atol=1e-12)
    finals = []
    for _ in range(2):
        init = OccupancyState(rng.uniform(0.0, 1.0, 3))
        finals.append(integrate(rates, init, horizon=300.0, step_control=sc).final.levels)
    assert np.max(np.abs(finals[0] - finals[1])) < 1e-6


def test_global_attraction_ten_inits():
    rng = np.random.default_rng(11)
    rates = RateProfile(rng.uniform(0.5, 2.0, 6))
    sc = StepControl(rtol=1e-10, atol=1e-12)
    finals = [
        integrate(rates, OccupancyState(rng.uniform(0.0, 1.0, 5)), 400.0,
                  step_control=sc).final.levels
        for _ in range(10)
    ]
    for a in finals:
        for b in finals:
            assert np.max(np.abs(a - b)) < 1e-6


def test_solve_single_site_symmetric():
    ss = solve_steady_state(RateProfile([1.0, 1.0]))
    assert ss.occupancies == pytest.approx([0.5], abs=1e-12)
    assert ss.throughput == pytest.approx(0.5, abs=1e-12)
    assert ss.per_node_delay == pytest.approx([1.0], abs=1e-11)
    assert ss.e2e_delay == pytest.approx(1.0, abs=1e-11)


def test_solve_residual_and_flow_balance():
    rng = np.random.default_rng(5)
    tol = 1e-10
    for _ in range(10):
        n = int(rng.integers(1, 20))
        rates = RateProfile(rng.uniform(0.3, 3.0, n + 1))
        ss = solve_steady_state(rates, tol=tol)
        state = OccupancyState(ss.occupancies)
        assert np.max(np.abs(rfm_rhs(rates, state))) <= tol
        lam = rates.rates
        e = ss.occupancies
        flows = np.concatenate((
            [lam[0] * (1.0 - e[0])],
            lam[1:n] * e[:-1] * (1.0 - e[1:]),
            [lam[n] * e[-1]],
        ))
        assert np.max(np.abs(flows - ss.throughput)) <= 10 * tol
        assert ss.e2e_delay == pytest.approx(float(ss.per_node_delay.sum()), rel=1e-12)


def test_solve_matches_spectral_route():
    rng = np.random.default_rng(13)
    for _ in range(10):
        n = int(rng.integers(1, 11))
        rates = RateProfile(rng.uniform(0.5, 2.0, n + 1))
        a = solve_steady_state(rates)
        b = spectral_steady_state(rates)
        assert np.max(np.abs(a.occupancies - b.occupancies)) < 1e-8


def test_solve_without_polish_still_meets_tolerance():
    rates = RateProfile.homogeneous(5, 1.0)
    ss = solve_steady_state(rates, tol=1e-10, polish=False)
    assert np.max(np.abs(rfm_rhs(rates, OccupancyState(ss.occupancies)))) <= 1e-10


def test_stiffness_error_reports_time():
    rates = RateProfile([1.0, 1.0, 1.0])
    sc = StepControl(rtol=1e-13, atol=1e-15, first_step=5.0, min_step=4.0)
    with pytest.raises(StiffnessError) as exc_info:
        integrate(rates, OccupancyState([0.9, 0.1]), horizon=50.0, step_control=sc)
    assert exc_info.value.time >= 0.0


def test_solve_budget_exhaustion_carries_best_iterate():
    rates = RateProfile([1.0, 2.0, 0.5, 1.5])
    with pytest.raises(ConvergenceError) as exc_info:
        solve_steady_state(rates, tol=1e-12, polish=False, max_steps=3)
    err = exc_info.value
    assert isinstance(err.best, np.ndarray)
    assert err.best.shape == (3,)
    assert err.residual > 1e-12


def test_integrate_rejects_bad_horizon():
    rates = RateProfile([1.0, 1.0])
    with pytest.raises(InvalidInputError):
        integrate(rates, OccupancyState([0.5]), horizon=0.0)
