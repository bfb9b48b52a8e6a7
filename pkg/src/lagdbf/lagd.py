"""Learning-aided gradient descent (LAGD).

Each iteration feeds the WSR gradient at the current precoder through the
update network, adds the network output to the precoder, projects onto
the power ball, and then takes one Adam ascent step on the network
parameters using the WSR gradient at the new precoder back-propagated
through the projection and the network.  The network is initialised
afresh for every problem instance.
"""

import time
from dataclasses import dataclass

import numpy as np

from ._validation import check_channels, check_positive, check_precoder
from .exceptions import ConfigurationError, SolverError
from .model import RunResult, _project, _wsr_gradient, random_precoder, wsr
from .network import init_net, parse_arch

REPORT_MODES = ("final", "best")


@dataclass
class LagdConfig:
    """Hyperparameters of :func:`lagd_solve` and :func:`lagd_multistart`."""

    iters: int = 500
    theta_lr: float = 1e-4
    restarts: int = 10
    hidden: tuple = (40, 40)
    report_mode: str = "final"
    encoding: str = "flat"
    activation: str = "tanh"
    output_scale: float = 1e-2

    def __post_init__(self):
        check_positive(self.iters, "iters", integer=True, allow_zero=True)
        check_positive(self.theta_lr, "theta_lr")
        check_positive(self.restarts, "restarts", integer=True)
        check_positive(self.output_scale, "output_scale", allow_zero=True)
        self.hidden = parse_arch(self.hidden)
        if self.report_mode not in REPORT_MODES:
            raise ConfigurationError(f"report_mode must be one of {REPORT_MODES}")


def seed_sequence(seed):
    """A fresh :class:`numpy.random.SeedSequence` for ``seed``.

    A ``SeedSequence`` argument is copied so that spawning from the result
    does not advance the caller's spawn counter.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key,
                                      pool_size=seed.pool_size)
    return np.random.SeedSequence(seed)


def restart_seeds(seed, restarts):
    """Per-restart seed sequences; the first ``k`` do not depend on ``restarts``."""
    return seed_sequence(seed).spawn(restarts)


def init_streams(seed):
    """Generators for the initial precoder and for the network parameters.

    Every solver draws its starting precoder from the first stream, so runs
    of different algorithms from the same seed start at the same point.
    """
    precoder_ss, net_ss = seed_sequence(seed).spawn(2)
    return np.random.default_rng(precoder_ss), np.random.default_rng(net_ss)


def initial_precoder(config, seed):
    return random_precoder(config, init_streams(seed)[0])


def projection_vjp(x, u, total_power):
    """Transpose-Jacobian product of the power projection at real vector ``x``.

    Identity inside the ball (including its boundary); in the scaling
    branch ``(c/|x|) (u - (x.u / |x|^2) x)`` with ``c = sqrt(P)``.
    """
    sq = float(x @ x)
    if sq <= total_power:
        return u
    norm = np.sqrt(sq)
    return (np.sqrt(total_power) / norm) * (u - (x @ u / sq) * x)


def lagd_theta_gradient(config, H, V, net, iteration=None):
    """Forward part of one LAGD iteration.

    Returns ``(V_next, grad_theta)``: the projected precoder after applying
    the network's update, and the gradient of ``F(V_next)`` with respect to
    the network parameters. The input gradient and ``V`` are held constant.
    """
    weights, noise, P = config.weights, config.noise_power, config.total_power
    size = V.size
    g = _wsr_gradient(weights, noise, H, V)
    g_real = np.concatenate((g.real.ravel(), g.imag.ravel()))
    delta, tape = net.forward(g_real)
    V_pre = V + (delta[:size] + 1j * delta[size:]).reshape(V.shape)
    V_next = _project(V_pre, P)
    u = _wsr_gradient(weights, noise, H, V_next)
    u_real = np.concatenate((u.real.ravel(), u.imag.ravel()))
    x = np.concatenate((V_pre.real.ravel(), V_pre.imag.ravel()))
    grad_theta = net.backward_params(tape, projection_vjp(x, u_real, P))
    if not (np.all(np.isfinite(V_next)) and np.all(np.isfinite(grad_theta))):
        raise SolverError("non-finite value in LAGD step",
                          {"iteration": iteration, "power": float(x @ x),
                           "grad_norm": float(np.linalg.norm(g_real))})
    return V_next, grad_theta


def lagd_step(config, H, V, net, iteration=None):
    """One LAGD iteration; updates ``net`` in place and returns the new precoder."""
    V_next, grad_theta = lagd_theta_gradient(config, H, V, net, iteration)
    net.apply_theta_update(grad_theta)
    return V_next


def lagd_solve(config, H, lagd_cfg=None, seed=None, V0=None, net=None):
    """Run LAGD from a random (or given) precoder and a freshly initialised network."""
    lagd_cfg = lagd_cfg or LagdConfig()
    H = check_channels(H, *config.shape)
    precoder_rng, net_rng = init_streams(seed)
    V = random_precoder(config, precoder_rng) if V0 is None else check_precoder(V0, *config.shape)
    if net is None:
        net = init_net(config, lagd_cfg.hidden, net_rng, lr=lagd_cfg.theta_lr,
                       encoding=lagd_cfg.encoding, activation=lagd_cfg.activation,
                       output_scale=lagd_cfg.output_scale)
    start = time.perf_counter()
    trace = np.empty(lagd_cfg.iters + 1)
    trace[0] = wsr(config, H, V)
    for k in range(lagd_cfg.iters):
        V = lagd_step(config, H, V, net, iteration=k)
        trace[k + 1] = wsr(config, H, V)
    return RunResult(final_precoder=V, wsr_trace=trace,
                     wall_time=time.perf_counter() - start,
                     seed=_seed_repr(seed), algorithm="lagd",
                     report_mode=lagd_cfg.report_mode)


def multistart(solve, seed, restarts, report_mode="final"):
    """Run ``solve(restart_seed)`` for each restart and keep the best run.

    Runs are ranked by their reported WSR (final or best iterate according
    to ``report_mode``); ties keep the earliest restart.  The returned
    result's ``wall_time`` covers all restarts.
    """
    check_positive(restarts, "restarts", integer=True)
    best = None
    total_time = 0.0
    for r, ss in enumerate(restart_seeds(seed, restarts)):
        result = solve(ss)
        result.report_mode = report_mode
        result.restart = r
        total_time += result.wall_time
        if best is None or result.reported_wsr > best.reported_wsr:
            best = result
    best.wall_time = total_time
    return best


def lagd_multistart(config, H, lagd_cfg=None, seed=None):
    """Best of ``lagd_cfg.restarts`` independent LAGD runs."""
    lagd_cfg = lagd_cfg or LagdConfig()
    return multistart(lambda ss: lagd_solve(config, H, lagd_cfg, ss), seed,
                      lagd_cfg.restarts, lagd_cfg.report_mode)


def _seed_repr(seed):
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.generate_state(1, np.uint64)[0])
    return seed
