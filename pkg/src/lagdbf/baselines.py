"""Projected gradient ascent and projected Adam directly on the precoder."""

import copy
import time
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_channels, check_positive, check_precoder
from .model import RunResult, _project, _wsr_gradient, from_real, to_real, wsr


@dataclass
class AdamState:
    """Moment estimates and hyperparameters of the Adam optimizer.

    ``step`` returns the update ``lr * m_hat / (sqrt(v_hat) + eps)``; callers
    add it for ascent or subtract it for descent.
    """

    size: int
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray = field(default=None)
    v: np.ndarray = field(default=None)

    def __post_init__(self):
        check_positive(self.lr, "lr")
        check_positive(self.eps, "eps")
        for name in ("beta1", "beta2"):
            beta = getattr(self, name)
            if not 0.0 < beta < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {beta}")
        if self.m is None:
            self.m = np.zeros(self.size)
        if self.v is None:
            self.v = np.zeros(self.size)

    def step(self, grad):
        grad = np.asarray(grad, dtype=float)
        if grad.shape != self.m.shape:
            raise ValueError(f"gradient has shape {grad.shape}, expected {self.m.shape}")
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def adam_step(state, grad):
    """Functional form of :meth:`AdamState.step`; ``state`` is left untouched."""
    new = copy.deepcopy(state)
    step = new.step(grad)
    return new, step


def gd_solve(config, H, V0, iters=500, step_size=1e-2, seed=None):
    """Projected gradient ascent ``V <- proj(V + step_size * grad F(V))``."""
    check_positive(step_size, "step_size")
    H = check_channels(H, *config.shape)
    V = check_precoder(V0, *config.shape).copy()
    start = time.perf_counter()
    trace = np.empty(iters + 1)
    trace[0] = wsr(config, H, V)
    for k in range(1, iters + 1):
        grad = _wsr_gradient(config.weights, config.noise_power, H, V)
        V = _project(V + step_size * grad, config.total_power)
        trace[k] = wsr(config, H, V)
    return RunResult(final_precoder=V, wsr_trace=trace,
                     wall_time=time.perf_counter() - start, seed=seed, algorithm="gd")


def adam_solve(config, H, V0, iters=500, lr=1e-2, beta1=0.9, beta2=0.999, eps=1e-8,
               seed=None):
    """Projected Adam ascent on the real-stacked precoder."""
    H = check_channels(H, *config.shape)
    V = check_precoder(V0, *config.shape).copy()
    state = AdamState(config.n_real, lr=lr, beta1=beta1, beta2=beta2, eps=eps)
    start = time.perf_counter()
    trace = np.empty(iters + 1)
    trace[0] = wsr(config, H, V)
    for k in range(1, iters + 1):
        grad = to_real(_wsr_gradient(config.weights, config.noise_power, H, V))
        V = _project(V + from_real(state.step(grad), config.shape), config.total_power)
        trace[k] = wsr(config, H, V)
    return RunResult(final_precoder=V, wsr_trace=trace,
                     wall_time=time.perf_counter() - start, seed=seed, algorithm="adam")
