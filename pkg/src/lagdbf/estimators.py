"""scikit-learn style wrappers around the beamforming solvers.

A "fit" here is a solve: ``fit(H)`` maximises the weighted sum rate for the
channel ``H`` and stores the precoder.  ``predict`` solves every channel of
a batch, and ``score`` is the mean WSR of those solutions.  There is no
training data; each channel is an independent optimisation problem.

Examples
--------
>>> import numpy as np
>>> from lagdbf.estimators import WMMSEBeamformer
>>> H = np.random.default_rng(0).standard_normal((2, 3)) + 0j
>>> est = WMMSEBeamformer(snr_db=10.0, restarts=2, random_state=0).fit(H)
>>> est.precoder_.shape
(2, 3)
"""

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_channel_batch, check_channels, check_positive
from .baselines import adam_solve, gd_solve
from .exceptions import ConfigurationError
from .lagd import REPORT_MODES, LagdConfig, initial_precoder, lagd_solve, multistart
from .model import SystemConfig, snr_to_power, wsr
from .wmmse import wmmse_solve


class _BeamformerBase(BaseEstimator):
    """Shared parameter handling.  Subclasses implement ``_solve(config, H, seed)``."""

    algorithm = None

    def _config(self, H):
        n_users, n_antennas = H.shape
        return SystemConfig(n_users, n_antennas, total_power=snr_to_power(self.snr_db),
                            noise_power=1.0, weights=self.weights)

    def _validate_params(self):
        check_positive(self.restarts, "restarts", integer=True)
        if self.report_mode not in REPORT_MODES:
            raise ConfigurationError(f"report_mode must be one of {REPORT_MODES}")

    def _solve_one(self, H):
        config = self._config(H)
        result = multistart(lambda ss: self._solve(config, H, ss), self.random_state,
                            self.restarts, self.report_mode)
        return config, result

    def fit(self, H, y=None):
        """Solve for the channel matrix ``H`` of shape (n_users, n_antennas).

        Returns
        -------
        self
        """
        self._validate_params()
        H = check_channels(H)
        config, result = self._solve_one(H)
        self.config_ = config
        self.result_ = result
        # in "best" mode wsr_ is the best iterate's WSR but only the final precoder is kept
        self.precoder_ = result.final_precoder
        self.wsr_ = result.reported_wsr
        self.wsr_trace_ = result.wsr_trace
        self.n_iter_ = result.n_iter
        self.restart_ = result.restart
        return self

    def predict(self, H):
        """Precoders for a channel (N, M) or a batch of channels (R, N, M)."""
        self._validate_params()
        single = np.ndim(H) == 2
        batch = check_channel_batch(H)
        out = np.stack([self._solve_one(h)[1].final_precoder for h in batch])
        return out[0] if single else out

    def fit_predict(self, H, y=None):
        return self.fit(H).precoder_

    def score(self, H, y=None):
        """Mean weighted sum rate of the predicted precoders over ``H``."""
        batch = check_channel_batch(H)
        V = self.predict(batch)
        return float(np.mean([wsr(self._config(h), h, v) for h, v in zip(batch, V)]))


class LAGDBeamformer(_BeamformerBase):
    """Learning-aided gradient descent, re-initialised for every channel.

    Parameters
    ----------
    snr_db : float
        Transmit SNR; the noise power is 1 and the power budget ``10**(snr_db/10)``.
    hidden : tuple of int or str
        Hidden layer widths of the update network, e.g. ``(40, 40)`` or ``"40,40"``.
    iters : int
        Iterations per restart.
    theta_lr : float
        Adam learning rate of the network parameters.
    restarts : int
        Independent random initialisations; the best run is kept.
    report_mode : {"final", "best"}
        Rank restarts by their final or best iterate.
    encoding : {"flat", "coordinate"}
        How the gradient is fed to the network (see :class:`lagdbf.network.UpdateNet`).
    weights : array_like, optional
        Per-user rate weights.
    random_state : int or None
        Master seed for initial precoders and network parameters.
    """

    algorithm = "lagd"

    def __init__(self, snr_db=10.0, hidden=(40, 40), iters=500, theta_lr=1e-4, restarts=10,
                 report_mode="final", encoding="flat", activation="tanh", output_scale=1e-2,
                 weights=None, random_state=None):
        self.snr_db = snr_db
        self.hidden = hidden
        self.iters = iters
        self.theta_lr = theta_lr
        self.restarts = restarts
        self.report_mode = report_mode
        self.encoding = encoding
        self.activation = activation
        self.output_scale = output_scale
        self.weights = weights
        self.random_state = random_state

    def _solve(self, config, H, seed):
        cfg = LagdConfig(iters=self.iters, theta_lr=self.theta_lr, restarts=1,
                         hidden=self.hidden, report_mode=self.report_mode,
                         encoding=self.encoding, activation=self.activation,
                         output_scale=self.output_scale)
        return lagd_solve(config, H, cfg, seed)


class WMMSEBeamformer(_BeamformerBase):
    """Weighted MMSE block-coordinate descent from random starting precoders."""

    algorithm = "wmmse"

    def __init__(self, snr_db=10.0, iters=50, restarts=10, report_mode="final",
                 weights=None, random_state=None):
        self.snr_db = snr_db
        self.iters = iters
        self.restarts = restarts
        self.report_mode = report_mode
        self.weights = weights
        self.random_state = random_state

    def _solve(self, config, H, seed):
        return wmmse_solve(config, H, initial_precoder(config, seed), self.iters)


class GDBeamformer(_BeamformerBase):
    """Projected gradient ascent with a fixed step size."""

    algorithm = "gd"

    def __init__(self, snr_db=10.0, iters=500, step_size=1e-2, restarts=10,
                 report_mode="final", weights=None, random_state=None):
        self.snr_db = snr_db
        self.iters = iters
        self.step_size = step_size
        self.restarts = restarts
        self.report_mode = report_mode
        self.weights = weights
        self.random_state = random_state

    def _solve(self, config, H, seed):
        return gd_solve(config, H, initial_precoder(config, seed), self.iters, self.step_size)


class AdamBeamformer(_BeamformerBase):
    """Projected Adam ascent on the precoder."""

    algorithm = "adam"

    def __init__(self, snr_db=10.0, iters=500, lr=1e-2, restarts=10, report_mode="final",
                 weights=None, random_state=None):
        self.snr_db = snr_db
        self.iters = iters
        self.lr = lr
        self.restarts = restarts
        self.report_mode = report_mode
        self.weights = weights
        self.random_state = random_state

    def _solve(self, config, H, seed):
        return adam_solve(config, H, initial_precoder(config, seed), self.iters, lr=self.lr)
