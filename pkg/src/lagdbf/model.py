"""System model for multi-user MISO downlink beamforming.

Channels are stored as a complex ``(N, M)`` array whose row ``i`` is the
channel vector ``h_i`` of user ``i``; precoders use the same layout, row
``i`` being the beamformer ``v_i``.  Received amplitudes are therefore
``A = conj(H) @ V.T`` with ``A[i, j] = h_i^H v_j``.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_channels, check_positive, check_precoder
from .exceptions import ConfigurationError, DimensionError

LN2 = np.log(2.0)


@dataclass(frozen=True)
class SystemConfig:
    """Problem dimensions, power budget and user weights.

    Parameters
    ----------
    num_users : int
        Number of single-antenna users ``N``.
    num_antennas : int
        Number of transmit antennas ``M``.
    total_power : float
        Total transmit power budget ``P`` (linear).
    noise_power : float
        Receiver noise power ``sigma^2`` (linear).
    weights : array_like, optional
        Per-user rate weights, all positive. Defaults to all ones.
    """

    num_users: int
    num_antennas: int
    total_power: float = 1.0
    noise_power: float = 1.0
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        check_positive(self.num_users, "num_users", integer=True)
        check_positive(self.num_antennas, "num_antennas", integer=True)
        check_positive(self.total_power, "total_power")
        check_positive(self.noise_power, "noise_power")
        if self.weights is None:
            weights = np.ones(self.num_users)
        else:
            weights = np.array(self.weights, dtype=float).reshape(-1)
        if weights.shape != (self.num_users,):
            raise ConfigurationError(
                f"weights must have length {self.num_users}, got {weights.shape[0]}")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ConfigurationError("weights must be finite and strictly positive")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_snr(cls, num_users, num_antennas, snr_db, weights=None):
        """Config with unit noise power and ``P = 10^(snr_db / 10)``."""
        return cls(num_users, num_antennas, total_power=snr_to_power(snr_db),
                   noise_power=1.0, weights=weights)

    @property
    def shape(self):
        return (self.num_users, self.num_antennas)

    @property
    def n_real(self):
        """Length of the real-stacked representation of a precoder."""
        return 2 * self.num_users * self.num_antennas


@dataclass
class RunResult:
    """Outcome of one solver run.

    ``wsr_trace[k]`` is the weighted sum rate after ``k`` iterations, so the
    trace has ``iters + 1`` entries and starts at the initial point.
    """

    final_precoder: np.ndarray
    wsr_trace: np.ndarray
    wall_time: float = 0.0
    seed: int = None
    algorithm: str = ""
    report_mode: str = "final"
    restart: int = 0
    objective_trace: np.ndarray = None

    @property
    def final_wsr(self):
        return float(self.wsr_trace[-1])

    @property
    def best_wsr(self):
        return float(np.max(self.wsr_trace))

    @property
    def reported_wsr(self):
        if self.report_mode == "best":
            return self.best_wsr
        return self.final_wsr

    @property
    def n_iter(self):
        return len(self.wsr_trace) - 1


def snr_to_power(snr_db):
    """Transmit power for a given SNR in dB, with the noise power fixed to 1."""
    snr_db = float(snr_db)
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    return 10.0 ** (snr_db / 10.0)


def sample_channel(config, rng):
    """Draw i.i.d. Rayleigh channels, each entry CN(0, 1)."""
    rng = np.random.default_rng(rng)
    shape = config.shape
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def _amplitudes(config, H, V):
    H = check_channels(H, *config.shape)
    V = check_precoder(V, *config.shape)
    return H, V, H.conj() @ V.T


def sinr(config, H, V):
    """Per-user signal-to-interference-plus-noise ratios."""
    _, _, A = _amplitudes(config, H, V)
    gains = np.abs(A) ** 2
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    return signal / (interference + config.noise_power)


def wsr(config, H, V):
    """Weighted sum rate ``sum_i alpha_i log2(1 + SINR_i)`` in bits per channel use."""
    return float(np.dot(config.weights, np.log2(1.0 + sinr(config, H, V))))


def wsr_gradient(config, H, V):
    """Gradient of the weighted sum rate with respect to the precoder.

    Returns a complex ``(N, M)`` array ``D`` whose real and imaginary parts
    are the partial derivatives with respect to ``Re(V)`` and ``Im(V)``,
    i.e. twice the conjugate Wirtinger derivative.
    """
    H, V, A = _amplitudes(config, H, V)
    return _wsr_gradient(config.weights, config.noise_power, H, V, A)


def _wsr_gradient(weights, noise_power, H, V, A=None):
    # Unchecked kernel shared by the solvers' inner loops.
    if A is None:
        A = H.conj() @ V.T
    gains = A.real ** 2 + A.imag ** 2
    total = noise_power + gains.sum(axis=1)
    interference = total - np.diag(gains)
    # coeff[i, k] multiplies h_i h_i^H v_k in dF/dv_k^*
    coeff = np.outer(weights * (1.0 / total - 1.0 / interference), np.ones(len(weights)))
    np.fill_diagonal(coeff, weights / total)
    return (2.0 / LN2) * ((coeff * A).T @ H)


def project_power(config, V):
    """Scale ``V`` back onto the power ball ``Tr(V V^H) <= P`` if it lies outside."""
    V = check_precoder(V, *config.shape)
    return _project(V, config.total_power)


def _project(V, total_power):
    power = np.vdot(V, V).real
    if power <= total_power:
        return V
    return V * np.sqrt(total_power / power)


def random_precoder(config, rng):
    """Random CN(0, 1) precoder projected onto the feasible set."""
    rng = np.random.default_rng(rng)
    shape = config.shape
    V = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)
    return _project(V, config.total_power)


def to_real(V):
    """Stack real and imaginary planes of ``V`` into one real vector."""
    return np.concatenate((V.real.ravel(), V.imag.ravel()))


def from_real(x, shape):
    """Inverse of :func:`to_real`."""
    x = np.asarray(x, dtype=float)
    size = shape[0] * shape[1]
    if x.shape != (2 * size,):
        raise DimensionError(f"expected a vector of length {2 * size}, got shape {x.shape}")
    return (x[:size] + 1j * x[size:]).reshape(shape)
