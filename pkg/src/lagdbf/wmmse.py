"""WMMSE baseline.

Block-coordinate descent on the weighted sum-MSE reformulation

    min_{u, w, V}  sum_i alpha_i (w_i e_i - log2 w_i)   s.t.  Tr(V V^H) <= P

with closed-form updates for the receive gains ``u``, the MSE weights ``w``
and the precoder ``V``; the power constraint is handled by bisection on
its Lagrange multiplier.
"""

import time
from dataclasses import dataclass

import numpy as np

from ._validation import check_channels, check_precoder
from .exceptions import NumericDomainError, SolverError
from .model import LN2, RunResult, wsr

BISECTION_MAX_STEPS = 64
BRACKET_MAX_DOUBLINGS = 1100
POWER_RTOL = 1e-10


@dataclass
class WmmseState:
    u: np.ndarray
    w: np.ndarray
    mu: float
    precoder: np.ndarray


def mse(config, H, V, u):
    """Per-user mean-square error ``e_i`` for receive gains ``u``."""
    H = check_channels(H, *config.shape)
    V = check_precoder(V, *config.shape)
    u = np.asarray(u, dtype=complex).reshape(-1)
    A = H.conj() @ V.T
    scaled = u[:, np.newaxis] * A
    own = np.diag(scaled)
    cross = np.sum(np.abs(scaled) ** 2, axis=1) - np.abs(own) ** 2
    return np.abs(own - 1.0) ** 2 + cross + config.noise_power * np.abs(u) ** 2


def update_u(config, H, V):
    """MMSE receive gains minimising ``e_i``.

    With ``e_i = |u_i h_i^H v_i - 1|^2 + ...`` the minimiser is
    ``u_i = conj(h_i^H v_i) / (sigma^2 + sum_j |h_i^H v_j|^2)``.
    """
    H = check_channels(H, *config.shape)
    V = check_precoder(V, *config.shape)
    A = H.conj() @ V.T
    total = config.noise_power + np.sum(np.abs(A) ** 2, axis=1)
    return np.diag(A).conj() / total


def update_w(config, H, V, u):
    """MSE weights minimising ``w e - log2(w)``, i.e. ``w = 1 / (e ln 2)``.

    The base-2 logarithm of the objective is kept, so the weights carry a
    ``1/ln 2`` factor relative to the natural-log formulation. This scales
    all ``w`` uniformly and leaves the precoder update unchanged.
    """
    return weights_from_mse(mse(config, H, V, u))


def weights_from_mse(e):
    e = np.asarray(e, dtype=float)
    if np.any(~np.isfinite(e)) or np.any(e <= 0):
        raise NumericDomainError(f"MSE values must be positive and finite, got {e}")
    return 1.0 / (e * LN2)


def update_v(config, H, u, w, return_diagnostics=False):
    """Optimal precoder for fixed ``u`` and ``w`` under the power constraint.

    Returns ``(V, mu)`` where ``mu`` is the Lagrange multiplier of the
    power constraint. The multiplier is zero when the unconstrained
    minimiser is feasible; otherwise it is found by bisection on the
    strictly decreasing map ``mu -> Tr(V(mu) V(mu)^H)``.
    """
    H = check_channels(H, *config.shape)
    u = np.asarray(u, dtype=complex).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(-1)
    P = config.total_power

    scale = config.weights * w
    # A = sum_i alpha_i w_i |u_i|^2 h_i h_i^H, B[:, k] = alpha_k w_k u_k^* h_k
    Hw = H.T * np.sqrt(scale * np.abs(u) ** 2)
    A = Hw @ Hw.conj().T
    B = H.T * (scale * u.conj())

    lam, U = np.linalg.eigh(A)
    lam = np.clip(lam, 0.0, None)
    C = U.conj().T @ B
    coef = np.sum(np.abs(C) ** 2, axis=1)
    # Directions with (numerically) zero eigenvalue carry no signal energy;
    # dropping them gives the minimum-norm solution at mu = 0.
    null = lam <= lam.max(initial=0.0) * lam.size * np.finfo(float).eps
    coef = np.where(null, 0.0, coef)

    def power(mu):
        denom = np.where(null, 1.0, lam + mu)
        return float(np.sum(coef / denom ** 2))

    mu = 0.0
    steps = 0
    if power(0.0) > P:
        lo, hi = 0.0, 1.0
        doublings = 0
        while power(hi) >= P:
            lo, hi = hi, 2.0 * hi
            doublings += 1
            if doublings > BRACKET_MAX_DOUBLINGS or not np.isfinite(hi):
                raise SolverError("could not bracket the power multiplier",
                                  {"power_at_hi": power(hi), "hi": hi, "total_power": P})
        # invariant: power(lo) >= P > power(hi); hi is always feasible
        while steps < BISECTION_MAX_STEPS and P - power(hi) > POWER_RTOL * P:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if power(mid) >= P:
                lo = mid
            else:
                hi = mid
            steps += 1
        mu = hi

    inv = np.where(null, 0.0, 1.0 / np.where(null, 1.0, lam + mu))
    V = (U @ (inv[:, np.newaxis] * C)).T
    if not np.all(np.isfinite(V)):
        raise SolverError("non-finite precoder in WMMSE V-update", {"mu": mu})
    if return_diagnostics:
        return V, mu, {"bisection_steps": steps, "power": float(np.vdot(V, V).real)}
    return V, mu


def wmmse_objective(config, H, V, u, w):
    """Weighted sum-MSE objective ``sum_i alpha_i (w_i e_i - log2 w_i)``."""
    e = mse(config, H, V, u)
    return float(np.dot(config.weights, w * e - np.log2(w)))


def wmmse_round(config, H, V):
    """One block-coordinate round: update ``u``, then ``w``, then ``V``."""
    u = update_u(config, H, V)
    w = update_w(config, H, V, u)
    V, mu = update_v(config, H, u, w)
    return WmmseState(u=u, w=w, mu=mu, precoder=V)


def wmmse_solve(config, H, V0, iters=50, seed=None):
    """Run ``iters`` rounds of (u, w, V) updates from the precoder ``V0``.

    The returned :class:`RunResult` carries the WSR after every round and,
    in ``objective_trace``, the weighted sum-MSE objective after every
    round (``objective_trace[0]`` is NaN since no ``u, w`` exist yet).
    """
    H = check_channels(H, *config.shape)
    V = check_precoder(V0, *config.shape).copy()
    start = time.perf_counter()
    trace = np.empty(iters + 1)
    objective = np.full(iters + 1, np.nan)
    trace[0] = wsr(config, H, V)
    for k in range(1, iters + 1):
        state = wmmse_round(config, H, V)
        V = state.precoder
        trace[k] = wsr(config, H, V)
        objective[k] = wmmse_objective(config, H, V, state.u, state.w)
    return RunResult(final_precoder=V, wsr_trace=trace,
                     wall_time=time.perf_counter() - start, seed=seed,
                     algorithm="wmmse", objective_trace=objective)
