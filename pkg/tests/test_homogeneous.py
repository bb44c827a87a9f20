"""Closed-form metrics for the homogeneous chain.

Frozen reference values were evaluated independently at 50 decimal digits
(mpmath): R(n) = lambda_c / (4 cos^2(pi/(n+3))) and the occupancy formula.
"""

import numpy as np
import pytest

from rfmnet import (
    InvalidInputError,
    RateProfile,
    ThrfmSpec,
    solve_steady_state,
    thrfm_delays,
    thrfm_occupancies,
    thrfm_occupancy,
    thrfm_steady_state,
    thrfm_throughput,
)

# 50-digit evaluations, rounded to double
R_N19 = 0.25516804945602624502
R_N2 = 0.3819660112501051518
R_N5 = 0.2928932188134524756
E1_N19 = 0.74483195054397375498
E8_N19 = 0.52110855811320272294
E12_N19 = 0.47889144188679727706
D_E2E_N19 = 37.230366498675450408


def test_occupancy_center_site_is_half_for_odd_n():
    for n in (1, 5, 19, 101):
        spec = ThrfmSpec(n, 1.0)
        assert abs(thrfm_occupancy(spec, (n + 1) // 2) - 0.5) <= 1e-14


def test_occupancy_frozen_values_n19():
    spec = ThrfmSpec(19, 1.0)
    assert thrfm_occupancy(spec, 1) == pytest.approx(E1_N19, abs=1e-14)
    assert thrfm_occupancy(spec, 8) == pytest.approx(E8_N19, abs=1e-14)
    assert thrfm_occupancy(spec, 12) == pytest.approx(E12_N19, abs=1e-14)


def test_occupancy_symmetry_about_center_n19():
    # e_8 - 1/2 == 1/2 - e_12, via cot(x) = -cot(pi - x)
    spec = ThrfmSpec(19, 1.0)
    lhs = thrfm_occupancy(spec, 8) - 0.5
    rhs = 0.5 - thrfm_occupancy(spec, 12)
    assert abs(lhs - rhs) <= 1e-15


def test_occupancy_index_bounds():
    spec = ThrfmSpec(5, 1.0)
    with pytest.raises(InvalidInputError):
        thrfm_occupancy(spec, 0)
    with pytest.raises(InvalidInputError):
        thrfm_occupancy(spec, 6)


def test_spec_validation():
    with pytest.raises(InvalidInputError):
        ThrfmSpec(0, 1.0)
    with pytest.raises(InvalidInputError):
        ThrfmSpec(3, 0.0)


def test_throughput_values():
    assert thrfm_throughput(ThrfmSpec(1, 1.0)) == pytest.approx(0.5, abs=1e-15)
    assert thrfm_throughput(ThrfmSpec(2, 1.0)) == pytest.approx(R_N2, abs=1e-15)
    assert thrfm_throughput(ThrfmSpec(5, 1.0)) == pytest.approx(R_N5, abs=1e-15)
    assert thrfm_throughput(ThrfmSpec(19, 1.0)) == pytest.approx(R_N19, abs=1e-15)
    assert thrfm_throughput(ThrfmSpec(19, 3.5)) == pytest.approx(3.5 * R_N19, rel=1e-15)


def test_throughput_large_n_limit_quarter_from_above():
    r = thrfm_throughput(ThrfmSpec(10_000, 1.0))
    assert r > 0.25
    assert abs(r - 0.25) < 1e-3


def test_delays_single_site():
    per_node, e2e = thrfm_delays(ThrfmSpec(1, 1.0))
    assert per_node == pytest.approx([1.0], abs=1e-15)
    assert e2e == pytest.approx(1.0, abs=1e-15)


def test_delays_match_littles_law_and_sum():
    for n in (1, 4, 19, 60):
        spec = ThrfmSpec(n, 2.7)
        per_node, e2e = thrfm_delays(spec)
        e = thrfm_occupancies(spec)
        r = thrfm_throughput(spec)
        assert np.max(np.abs(per_node - e / r)) < 1e-14
        assert e2e == pytest.approx(float(per_node.sum()), rel=1e-12)
    assert thrfm_delays(ThrfmSpec(19, 1.0))[1] == pytest.approx(D_E2E_N19, rel=1e-15)


def test_delay_approaches_2n_over_rate_for_large_n():
    for lc in (1.0, 2.0):
        _, e2e = thrfm_delays(ThrfmSpec(10_000, lc))
        assert e2e == pytest.approx(2 * 10_000 / lc, rel=1e-3)


def test_steady_state_sum_rule_symmetry_monotone():
    for n in range(1, 201):
        e = thrfm_occupancies(ThrfmSpec(n, 1.0))
        assert abs(e.sum() - n / 2.0) <= 1e-10
        assert np.max(np.abs(e + e[::-1] - 1.0)) <= 1e-12
        assert np.all(np.diff(e) < 0.0)


def test_occupancies_independent_of_rate():
    a = thrfm_steady_state(ThrfmSpec(19, 1.0)).occupancies
    b = thrfm_steady_state(ThrfmSpec(19, 7.0)).occupancies
    assert np.array_equal(a, b)


def test_throughput_monotone_decreasing_and_bounded():
    rs = np.array([thrfm_throughput(ThrfmSpec(n, 1.0)) for n in range(1, 201)])
    assert np.all(np.diff(rs) < 0.0)
    assert np.all(rs > 0.25)
    assert np.all(rs <= 0.5)


def test_matches_ode_solver_on_homogeneous_profiles():
    for n in (1, 2, 5, 19, 50):
        closed = thrfm_steady_state(ThrfmSpec(n, 1.0))
        ode = solve_steady_state(RateProfile.homogeneous(n, 1.0))
        assert np.max(np.abs(closed.occupancies - ode.occupancies)) < 1e-6
        assert closed.throughput == pytest.approx(ode.throughput, abs=1e-6)
