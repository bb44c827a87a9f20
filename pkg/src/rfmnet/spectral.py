"""Steady-state metrics for arbitrary rate profiles via the spectral route.

The throughput of a chain with rates lam[0..n] equals zeta**-2 where zeta is
the largest eigenvalue of the (n+2)x(n+2) symmetric tridiagonal matrix with
zero diagonal and off-diagonal entries lam[k]**-0.5. Occupancies then follow
from the equilibrium flow-balance relations: a backward recursion from the
sink seeds them, and a damped Newton iteration on the tridiagonal equilibrium
system removes the recursion's sweep-direction error amplification (the
recursion is a shooting pass whose roundoff can grow exponentially along the
chain even though the equilibrium itself is well conditioned). The inflow
closure lam[0]*(1 - e_1) = R checks the whole computation.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _backend
from .errors import InvalidInputError, NumericalConsistencyError
from .types import RateProfile, SteadyState


@dataclass(frozen=True)
class SpectralMatrix:
    """Off-diagonal entries lam[k]**-0.5 of the zero-diagonal tridiagonal matrix."""

    off_diagonal: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.off_diagonal, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 2:
            raise InvalidInputError("off_diagonal must be a 1-d array of length >= 2")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise InvalidInputError("off-diagonal entries must be positive and finite")
        object.__setattr__(self, "off_diagonal", arr)

    @property
    def size(self):
        """Dimension of the full matrix (n + 2)."""
        return self.off_diagonal.size + 1


def build_matrix(rates: RateProfile) -> SpectralMatrix:
    """Spectral matrix for a rate profile: entry k is rates[k]**-0.5."""
    return SpectralMatrix(rates.rates ** -0.5)


def max_eigenvalue(m: SpectralMatrix) -> float:
    """Largest eigenvalue of the spectral matrix.

    Positive off-diagonals make all eigenvalues real and distinct, so the top
    one is well separated and bisection-style solvers locate it to near
    machine precision.
    """
    b = np.ascontiguousarray(m.off_diagonal)
    return _backend.kernels.max_eigenvalue_offdiag(b)


def spectral_throughput(rates: RateProfile) -> float:
    """Steady-state throughput: the top eigenvalue to the power -2."""
    return max_eigenvalue(build_matrix(rates)) ** -2


def occupancies_from_throughput(lam, throughput):
    """Backward recursion for equilibrium occupancies given the throughput.

    e_n = R / lam[n]; e_i = R / (lam[i] * (1 - e_{i+1})) going backward.
    Returns None when the recursion leaves (0, 1), which signals that the
    supplied throughput exceeds what the profile can carry.
    """
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.size - 1
    e = np.empty(n)
    val = throughput / lam[n]
    if not 0.0 < val < 1.0:
        return None
    e[n - 1] = val
    for i in range(n - 2, -1, -1):
        val = throughput / (lam[i + 1] * (1.0 - e[i + 1]))
        if not 0.0 < val < 1.0:
            return None
        e[i] = val
    return e


def _forward_occupancies(lam, throughput):
    """Forward sweep e_1 = 1 - R/lam[0], e_{i+1} = 1 - R/(lam[i]*e_i).

    Stable exactly where the backward sweep is not (the two directions have
    reciprocal error amplification). Returns None when it leaves (0, 1).
    """
    n = lam.size - 1
    e = np.empty(n)
    val = 1.0 - throughput / lam[0]
    if not 0.0 < val < 1.0:
        return None
    e[0] = val
    for i in range(1, n):
        val = 1.0 - throughput / (lam[i] * e[i - 1])
        if not 0.0 < val < 1.0:
            return None
        e[i] = val
    return e


def _equilibrium_newton(lam, e0, resid_tol, max_iter=100):
    """Damped Newton on the zero-derivative system with tridiagonal Jacobian.

    Returns (e, resid) with resid = max|de/dt|, or None when the iteration
    fails to reach resid_tol.
    """
    n = lam.size - 1
    e = np.clip(np.asarray(e0, dtype=np.float64), 1e-12, 1.0 - 1e-12)
    f = _backend.kernels.flow_rhs(lam, np.ascontiguousarray(e))
    resid = float(np.max(np.abs(f)))
    for _ in range(max_iter):
        if resid <= resid_tol:
            return e, resid
        diag = np.empty(n)
        upper = np.zeros(n)
        lower = np.zeros(n)
        if n == 1:
            diag[0] = -lam[0] - lam[1]
        else:
            diag[0] = -lam[0] - lam[1] * (1.0 - e[1])
            diag[1:n - 1] = (-lam[1:n - 1] * e[:n - 2]
                             - lam[2:n] * (1.0 - e[2:]))
            diag[n - 1] = -lam[n - 1] * e[n - 2] - lam[n]
            upper[1:] = lam[1:n] * e[:n - 1]      # ab row above the diagonal
            lower[:n - 1] = lam[1:n] * (1.0 - e[1:])
        ab = np.vstack([upper, diag, lower])
        try:
            delta = scipy.linalg.solve_banded((1, 1), ab, -f)
        except scipy.linalg.LinAlgError:
            return None
        step = 1.0
        for _ in range(50):
            cand = e + step * delta
            if np.all(cand > 0.0) and np.all(cand < 1.0):
                f_cand = _backend.kernels.flow_rhs(lam, np.ascontiguousarray(cand))
                r_cand = float(np.max(np.abs(f_cand)))
                if r_cand < resid:
                    e, f, resid = cand, f_cand, r_cand
                    break
            step *= 0.5
        else:
            return None
    return (e, resid) if resid <= resid_tol else None


def spectral_steady_state(rates: RateProfile, closure_rtol=1e-8) -> SteadyState:
    """Full steady state for an arbitrary profile via the spectral throughput.

    The backward recursion from the sink is used directly when it closes the
    inflow balance; otherwise either sweep direction seeds a damped Newton
    solve of the equilibrium system, which is immune to the sweeps'
    directional roundoff amplification. Raises NumericalConsistencyError when
    the final closure residual |lam[0]*(1-e_1) - R| exceeds closure_rtol * R,
    which indicates eigensolver inaccuracy.
    """
    lam = rates.rates
    r = spectral_throughput(rates)
    resid_tol = 1e-12 * r

    e = occupancies_from_throughput(lam, r)
    if e is None or abs(lam[0] * (1.0 - e[0]) - r) > resid_tol:
        seeds = [s for s in (e, _forward_occupancies(lam, r)) if s is not None]
        seeds.append(np.full(rates.n, 0.5))
        refined = None
        for seed in seeds:
            refined = _equilibrium_newton(lam, seed, resid_tol)
            if refined is not None:
                break
        if refined is None:
            raise NumericalConsistencyError(
                "equilibrium refinement failed; spectral throughput is inconsistent"
            )
        e = refined[0]

    closure = abs(lam[0] * (1.0 - e[0]) - r)
    if closure > closure_rtol * r:
        raise NumericalConsistencyError(
            f"inflow closure residual {closure:.3e} exceeds {closure_rtol:.1e} * R"
        )
    per_node = e / r
    return SteadyState(
        occupancies=e,
        throughput=r,
        per_node_delay=per_node,
        e2e_delay=float(per_node.sum()),
    )
