"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines. Tolerances are fixed here and must not be loosened.
"""

import math

import numpy as np

from rfmnet import (
    BudgetConstraint,
    ChannelParams,
    RateProfile,
    TasepConfig,
    ThrfmSpec,
    maximize_throughput,
    optimal_contention,
    optimal_hop_length,
    run_tasep,
    solve_steady_state,
    spectral_steady_state,
    spectral_throughput,
    thrfm_occupancies,
    thrfm_throughput,
)


def _report(num, description, ok):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'} - {description}")
    assert ok, f"criterion {num} failed: {description}"


def test_criterion_01_closed_form_relations():
    ok = True
    for n in range(1, 201):
        e = thrfm_occupancies(ThrfmSpec(n, 1.0))
        ok &= abs(float(e.sum()) - n / 2.0) <= 1e-10
        ok &= float(np.max(np.abs(e + e[::-1] - 1.0))) <= 1e-12
        ok &= bool(np.all(np.diff(e) < 0.0))
        if n % 2 == 1:
            ok &= abs(e[(n + 1) // 2 - 1] - 0.5) <= 1e-14
    _report(1, "closed-form sum rule, symmetry, monotonicity, center site "
               "for n in 1..200", ok)


def test_criterion_02_spectral_equals_closed_form():
    ok = True
    for n in (1, 2, 5, 19, 50, 200):
        r_spec = spectral_throughput(RateProfile.homogeneous(n, 1.0))
        r_closed = thrfm_throughput(ThrfmSpec(n, 1.0))
        ok &= abs(r_spec - r_closed) / r_closed <= 1e-10
    _report(2, "spectral throughput matches the closed form to 1e-10 "
               "relative on homogeneous profiles", ok)


def test_criterion_03_ode_equals_spectral_on_random_profiles():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 51))
        rates = RateProfile(rng.uniform(0.1, 10.0, n + 1))
        a = solve_steady_state(rates)
        b = spectral_steady_state(rates)
        worst = max(worst, float(np.max(np.abs(a.occupancies - b.occupancies))))
    _report(3, f"ODE and spectral occupancies agree to 1e-6 on 100 random "
               f"profiles (worst {worst:.2e})", worst <= 1e-6)


def test_criterion_04_lattice_simulation_tracks_closed_form():
    config = TasepConfig(
        n=19, rates=RateProfile.homogeneous(19, 1.0),
        measure_cycles=1_000_000, seed=20_240_115, burn_in_cycles=350_000,
    )
    stats = run_tasep(config)
    predicted = thrfm_occupancies(ThrfmSpec(19, 1.0))
    worst = float(np.max(np.abs(stats.mean_occupancy - predicted)))
    _report(4, f"n=19 lattice occupancies within 0.05 of closed form after "
               f"350k burn-in and 1e6 measured cycles (worst {worst:.3f})",
            worst <= 0.05)


def test_criterion_05_throughput_trend_in_chain_length():
    r1 = thrfm_throughput(ThrfmSpec(1, 1.0))
    grid = np.unique(np.concatenate([
        np.arange(1, 1001),
        np.geomspace(1000, 10_000, 60).astype(int),
    ]))
    rs = np.array([thrfm_throughput(ThrfmSpec(int(n), 1.0)) for n in grid])
    r_last = thrfm_throughput(ThrfmSpec(10_000, 1.0))
    ok = (abs(r1 - 0.5) <= 1e-15
          and bool(np.all(np.diff(rs) < 0.0))
          and abs(r_last - 0.25) <= 1e-3)
    _report(5, "throughput starts at 0.5, decreases in n, and is within "
               "1e-3 of 0.25 at n=1e4", ok)


def test_criterion_06_hop_length_matches_integer_search():
    rng = np.random.default_rng(606)
    ok = True
    for _ in range(100):
        gamma = rng.uniform(1.0, 4.0)
        l = rng.uniform(0.5, 2.0)
        n = int(rng.integers(5, 400))
        x = 10.0 ** rng.uniform(-6.0, math.log10(0.3))
        theta = 10.0 ** rng.uniform(-1.0, 1.3)
        p = ChannelParams(theta=theta, n0=x / theta, gamma=gamma, l=l, n=n)
        logd = [math.log(2.0 * n / m) + theta * (x / theta) * (m * l) ** gamma
                for m in range(1, n + 1)]
        brute = 1 + int(np.argmin(logd))  # first minimum = smaller m on ties
        ok &= optimal_hop_length(p).m_star_int == brute
    _report(6, "closed-form integer hop length equals exhaustive search on "
               "100 random parameter sets", ok)


def test_criterion_07_contention_matches_golden_section():
    rng = np.random.default_rng(707)
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    ok = True
    for _ in range(100):
        c = 10.0 ** rng.uniform(-1.0, math.log10(60.0))
        theta = ((c + 1.0) / math.pi) ** 2  # gamma=2 gives this c exactly
        q_star = optimal_contention(theta, 2.0, 19).q_star
        if 2.0 / c > 1.0:
            ok &= q_star == 1.0
            continue
        a, b = 1e-9, 1.0
        x1 = b - phi * (b - a)
        x2 = a + phi * (b - a)
        f = lambda q: math.exp(q * c / 2.0) / q
        f1, f2 = f(x1), f(x2)
        while b - a > 1e-9:
            if f1 < f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - phi * (b - a)
                f1 = f(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + phi * (b - a)
                f2 = f(x2)
        ok &= abs(q_star - 0.5 * (a + b)) <= 1e-6
    _report(7, "closed-form contention probability matches golden-section "
               "search on 100 random interference constants", ok)


def test_criterion_08_capacity_allocation_structure():
    constraint = BudgetConstraint(np.ones(10), 1.0)
    res = maximize_throughput(9, constraint)
    lam = res.optimal_rates.rates
    ok = float(np.max(np.abs(lam - lam[::-1]))) <= 1e-4
    ok &= bool(np.all(np.diff(lam[:5]) > 0.0))
    ok &= abs(float(lam.sum()) - 1.0) <= 1e-10
    rng = np.random.default_rng(808)
    for _ in range(10):
        x0 = rng.uniform(0.05, 1.0, 10)
        x0 *= 1.0 / x0.sum()
        other = maximize_throughput(9, constraint, x0=x0).optimal_rates.rates
        ok &= float(np.max(np.abs(other - lam))) <= 1e-4
    _report(8, "optimal allocation is symmetric, center-peaked, budget-tight, "
               "and identical from 10 random starts", ok)


def test_criterion_09_concavity_and_homogeneity():
    rng = np.random.default_rng(909)
    ok = True
    for _ in range(100):
        n = int(rng.integers(1, 31))
        a = rng.uniform(0.1, 10.0, n + 1)
        b = rng.uniform(0.1, 10.0, n + 1)
        r_mid = spectral_throughput(RateProfile(0.5 * (a + b)))
        r_avg = 0.5 * (spectral_throughput(RateProfile(a))
                       + spectral_throughput(RateProfile(b)))
        ok &= r_mid >= r_avg - 1e-10
        base = spectral_throughput(RateProfile(a))
        for c in (0.5, 2.0, 10.0):
            scaled = spectral_throughput(RateProfile(c * a))
            ok &= abs(scaled - c * base) <= 1e-12 * abs(c * base)
    _report(9, "throughput is midpoint-concave and degree-1 homogeneous on "
               "100 random profile pairs", ok)


def test_criterion_10_objective_convexity():
    rng = np.random.default_rng(1010)
    ok = True
    for _ in range(50):  # noise-limited hop-delay objective in m
        gamma = rng.uniform(1.0, 4.0)
        l = rng.uniform(0.5, 2.0)
        n = int(rng.integers(10, 200))
        x = 10.0 ** rng.uniform(-8.0, math.log10(300.0 / (n * l) ** gamma))
        grid = np.linspace(1.0, float(n), 60)
        f = (2.0 * n / grid) * np.exp(x * (grid * l) ** gamma)
        ok &= bool(np.all(f[:-2] - 2.0 * f[1:-1] + f[2:] > 0.0))
    for _ in range(50):  # interference-limited delay objective in q
        c = 10.0 ** rng.uniform(math.log10(0.05), math.log10(50.0))
        grid = np.linspace(0.02, 1.0, 50)
        f = np.exp(grid * c / 2.0) / grid
        ok &= bool(np.all(f[:-2] - 2.0 * f[1:-1] + f[2:] > 0.0))
    _report(10, "hop-delay and contention-delay objectives have positive "
                "second differences on 50 random parameter sets each", ok)
