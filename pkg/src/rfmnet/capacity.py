"""Budget-constrained throughput maximization over link rates.

Throughput is a strictly concave, degree-1 homogeneous function of the n+1
link rates, so maximizing it under a weighted budget w . lam <= b is a convex
problem whose optimum is unique and sits on the budget face. The solver runs
projected gradient ascent: central finite differences of the spectral
throughput give the gradient, a sorting-based weighted-simplex projection
restores feasibility, and a Barzilai-Borwein trial step with Armijo
backtracking keeps the ascent monotone.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, InvalidInputError
from .spectral import spectral_throughput
from .types import RateProfile


@dataclass(frozen=True)
class BudgetConstraint:
    """Weighted budget sum(weights * rates) <= budget, weights > 0."""

    weights: np.ndarray
    budget: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 2:
            raise InvalidInputError("weights must be a 1-d array of length >= 2")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise InvalidInputError("weights must be strictly positive and finite")
        if not self.budget > 0.0:
            raise InvalidInputError("budget must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "budget", float(self.budget))


@dataclass(frozen=True)
class OptResult:
    """Solver output; ``r_trace`` lists throughput after each accepted step."""

    optimal_rates: RateProfile
    optimal_throughput: float
    iterations: int
    kkt_residual: float
    max_budget_violation: float = 0.0
    r_trace: np.ndarray | None = field(default=None, compare=False)


def project_to_budget(z, weights, budget, floor=1e-9):
    """Euclidean projection onto {x : weights . x = budget, x >= floor}.

    Sorting-based exact algorithm: x_i(tau) = max(floor, z_i - tau * w_i) with
    tau selected on the piecewise-linear segment where the budget is met.
    """
    z = np.asarray(z, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if np.sum(w) * floor >= budget:
        raise InvalidInputError("budget too small for the feasible floor")
    breakpoints = (z - floor) / w
    order = np.argsort(breakpoints)
    s1 = float(np.sum(w * z))        # sum over unclamped of w_i z_i
    s2 = float(np.sum(w * w))        # sum over unclamped of w_i^2
    clamped = 0.0                    # sum over clamped of w_i * floor
    prev_bp = -np.inf
    for k in range(z.size + 1):
        bp = breakpoints[order[k]] if k < z.size else np.inf
        tau = (s1 + clamped - budget) / s2 if s2 > 0.0 else np.inf
        if prev_bp <= tau <= bp:
            return np.maximum(floor, z - tau * w)
        if k < z.size:
            i = order[k]
            s1 -= w[i] * z[i]
            s2 -= w[i] * w[i]
            clamped += w[i] * floor
            prev_bp = bp
    raise InvalidInputError("projection failed; inconsistent constraint data")


def _fd_gradient(lam, fd_rel):
    """Central-difference gradient of the spectral throughput."""
    g = np.empty(lam.size)
    for i in range(lam.size):
        h = fd_rel * lam[i]
        up = lam.copy()
        dn = lam.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (spectral_throughput(RateProfile(up))
                - spectral_throughput(RateProfile(dn))) / (2.0 * h)
    return g


def kkt_residual(rates: RateProfile, c: BudgetConstraint, fd_rel=1e-6) -> float:
    """Norm of the gradient component orthogonal to the budget normal.

    Zero exactly at the unique optimum on the active budget face. Requires an
    active constraint (weights . rates = budget).
    """
    lam = rates.rates
    w = c.weights
    if lam.size != w.size:
        raise InvalidInputError("rates and weights lengths differ")
    if abs(float(w @ lam) - c.budget) > 1e-6 * c.budget:
        raise InvalidInputError("constraint is not active at the given rates")
    g = _fd_gradient(lam, fd_rel)
    g_perp = g - (float(g @ w) / float(w @ w)) * w
    return float(np.linalg.norm(g_perp))


def maximize_throughput(n: int, c: BudgetConstraint, *, kkt_tol: float = 1e-8,
                        max_iter: int = 100_000, fd_rel: float = 1e-6,
                        floor: float = 1e-9, x0=None,
                        keep_trace: bool = False) -> OptResult:
    """Rates maximizing throughput subject to the weighted budget.

    Starts from the weight-balanced point lam_i = b / ((n+1) w_i) unless x0
    is given. Homogeneity forces the budget to bind at the optimum, so every
    iterate lives on the budget face. Raises ConvergenceError with the best
    iterate when max_iter is hit before the stationarity residual drops to
    kkt_tol.
    """
    w = c.weights
    if w.size != n + 1:
        raise InvalidInputError(f"expected {n + 1} weights, got {w.size}")
    b = c.budget

    if x0 is None:
        lam = b / ((n + 1) * w)
    else:
        lam = project_to_budget(np.asarray(x0, dtype=np.float64), w, b, floor)
    r = spectral_throughput(RateProfile(lam))
    g = _fd_gradient(lam, fd_rel)
    ww = float(w @ w)

    trace = [r] if keep_trace else None
    alpha = float(b / ((n + 1) * np.max(w)) / max(np.max(np.abs(g)), 1e-30))
    worst_violation = abs(float(w @ lam) - b)
    kkt = float(np.linalg.norm(g - (float(g @ w) / ww) * w))
    it = 0
    while kkt > kkt_tol and it < max_iter:
        it += 1
        direction = project_to_budget(lam + alpha * g, w, b, floor) - lam
        slope = float(g @ direction)
        if slope <= 0.0:
            # projection made no ascent direction; shrink the trial step
            alpha *= 0.5
            if alpha < 1e-18:
                break
            continue
        t = 1.0
        accepted = False
        for _ in range(60):
            cand = lam + t * direction
            r_cand = spectral_throughput(RateProfile(cand))
            if r_cand >= r + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        lam_new = cand
        g_new = _fd_gradient(lam_new, fd_rel)
        dx = lam_new - lam
        dg = g_new - g
        denom = float(dx @ dg)
        if denom < 0.0:  # concave: dx.dg <= 0 along ascent
            alpha = float(dx @ dx) / (-denom)
        lam, g, r = lam_new, g_new, r_cand
        worst_violation = max(worst_violation, abs(float(w @ lam) - b))
        kkt = float(np.linalg.norm(g - (float(g @ w) / ww) * w))
        if keep_trace:
            trace.append(r)

    result = OptResult(
        optimal_rates=RateProfile(lam),
        optimal_throughput=float(r),
        iterations=it,
        kkt_residual=float(kkt),
        max_budget_violation=float(worst_violation),
        r_trace=np.asarray(trace) if keep_trace else None,
    )
    if kkt > kkt_tol:
        raise ConvergenceError(
            f"stationarity residual {kkt:.3e} above {kkt_tol:.1e} "
            f"after {it} iterations",
            best=result, residual=float(kkt),
        )
    return result
