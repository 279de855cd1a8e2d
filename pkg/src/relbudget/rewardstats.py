"""
Closed-form reward statistics under the gamma time-to-solution model.

A problem is described by ``T ~ Gamma(K, p)`` (shape ``K``, rate ``p``) and a
token budget ``H``.  Most quantities depend on ``(K, p, H)`` only through the
relative budget ``xi = p * H / K``, the budget measured in units of the mean
time-to-solution.

Two reward conventions appear:

* ``Convention.CONTINUOUS``: ``R = max(0, H - T)``, used by all gamma closed
  forms (``c_rl``, ``sigma_rl``, ``psi``, ``anti_concentration``, ...).
* ``Convention.BILEVEL``: ``R = (H - T + 1) * 1{T <= H}``, the reward actually
  assigned to traces.  On successes it exceeds the continuous reward by one.
"""
import enum
import math
import numbers
from dataclasses import dataclass
from typing import Optional

from .errors import DegenerateError, DomainError, NumericError
from .specfun import reg_lower_gamma, reg_upper_gamma

__all__ = [
    "Convention",
    "GammaModel",
    "RewardStats",
    "TruncatedMoments",
    "relative_budget",
    "truncated_gamma_moments",
    "bilevel_reward_stats",
    "continuous_reward_mean",
    "continuous_reward_stats",
    "c_rl",
    "sigma_rl",
    "psi",
    "anti_concentration",
    "c_sft",
    "sigma_sft",
    "expected_return_J",
]

# Negative radicands down to this value are float noise and clamp to zero.
RADICAND_TOL = 1e-9
# Below this success probability the truncated moments are meaningless.
MIN_SUCCESS_PROB = 1e-300


class Convention(str, enum.Enum):
    CONTINUOUS = "continuous"
    BILEVEL = "bilevel"


def _positive(name, value):
    if not (isinstance(value, numbers.Real) and math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a positive finite real, got {value!r}")
    return float(value)


def _non_negative(name, value):
    if not (isinstance(value, numbers.Real) and math.isfinite(value) and value >= 0):
        raise DomainError(f"{name} must be a non-negative finite real, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class GammaModel:
    """Gamma(K, p) time-to-solution model.

    Attributes
    ----------
    K : float
        Shape, the number of required insights.  Any positive real is
        accepted since fitted shapes are rarely integers.
    p : float
        Rate, per-token success intensity.
    """

    K: float
    p: float

    def __post_init__(self):
        _positive("K", self.K)
        _positive("p", self.p)

    @property
    def mean(self):
        return self.K / self.p

    @property
    def variance(self):
        return self.K / self.p**2

    def xi(self, H):
        """Relative budget of token budget ``H`` under this model."""
        return relative_budget(self, H)

    @classmethod
    def from_relative_budget(cls, K, xi, H):
        """The model whose relative budget at ``H`` equals ``xi``."""
        return cls(K, _positive("xi", xi) * K / _positive("H", H))


@dataclass(frozen=True)
class RewardStats:
    mean: float
    variance: float
    convention: Convention

    @property
    def std(self):
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class TruncatedMoments:
    """Moments of ``T`` conditioned on success ``T <= H``.

    ``mean_given_success`` and ``var_given_success`` are ``None`` when
    ``degenerate`` is set (success probability below 1e-300).
    """

    q: float
    mean_given_success: Optional[float]
    var_given_success: Optional[float]
    degenerate: bool = False


def relative_budget(model, H):
    return model.p * _positive("H", H) / model.K


def _clamp_radicand(value, what):
    if value >= 0.0:
        return value
    if value >= -RADICAND_TOL:
        return 0.0
    raise NumericError(f"{what} radicand is negative ({value:.3e})")


def _sft_radicand(K, z):
    """Squared C_SFT at ``z = K * xi``, or None when P(K, z) underflows."""
    g0 = reg_lower_gamma(K, z)
    if g0 < MIN_SUCCESS_PROB:
        return None
    g1 = reg_lower_gamma(K + 1.0, z)
    g2 = reg_lower_gamma(K + 2.0, z)
    r1 = g1 / g0
    return _clamp_radicand((K + 1.0) * g2 / g0 - K * r1 * r1, "C_SFT^2")


def truncated_gamma_moments(model, H):
    """Success probability and success-conditioned mean/variance of ``T``."""
    H = _positive("H", H)
    K, p = model.K, model.p
    z = p * H
    q = reg_lower_gamma(K, z)
    if q < MIN_SUCCESS_PROB:
        return TruncatedMoments(q, None, None, degenerate=True)
    mu = (K / p) * reg_lower_gamma(K + 1.0, z) / q
    c2 = _sft_radicand(K, z)
    return TruncatedMoments(q, mu, K / p**2 * c2)


def bilevel_reward_stats(tm, H):
    """Mean and variance of ``(H - T + 1) * 1{T <= H}`` from truncated moments."""
    H = _positive("H", H)
    if tm.degenerate:
        return RewardStats(0.0, 0.0, Convention.BILEVEL)
    q = tm.q
    gain = H + 1.0 - tm.mean_given_success
    mean = q * gain
    variance = q * tm.var_given_success + q * (1.0 - q) * gain * gain
    return RewardStats(mean, variance, Convention.BILEVEL)


def continuous_reward_mean(model, H):
    """``E[max(0, H - T)]`` under the gamma model."""
    H = _positive("H", H)
    K, p = model.K, model.p
    z = p * H
    return H * reg_lower_gamma(K, z) - (K / p) * reg_lower_gamma(K + 1.0, z)


def continuous_reward_stats(model, H):
    """Mean and variance of ``max(0, H - T)``, parameterized by the model."""
    xi = relative_budget(model, H)
    return sigma_rl(model.K, xi, H)


def _crl_radicand(K, xi):
    z = K * xi
    g0 = reg_lower_gamma(K, z)
    g1 = reg_lower_gamma(K + 1.0, z)
    g2 = reg_lower_gamma(K + 2.0, z)
    first = z * g0 - K * g1
    return z * z * g0 - 2.0 * K * K * xi * g1 + K * (K + 1.0) * g2 - first * first


def c_rl(K, xi):
    """Dimensionless reward-std coefficient: std = c_rl * H / (K * xi)."""
    K = _positive("K", K)
    xi = _positive("xi", xi)
    return math.sqrt(_clamp_radicand(_crl_radicand(K, xi), "C_RL^2"))


def sigma_rl(K, xi, H=1.0):
    """Continuous-reward statistics at relative budget ``xi`` and budget ``H``.

    The standard deviation is ``c_rl(K, xi) * H / (K * xi)``; the mean is
    ``expected_return_J(K, xi, H)``.
    """
    H = _positive("H", H)
    std = c_rl(K, xi) * H / (K * xi)
    return RewardStats(expected_return_J(K, xi, H), std * std, Convention.CONTINUOUS)


def expected_return_J(K, xi, H=1.0):
    """``H * (P(K, K xi) - P(K+1, K xi) / xi)``, the expected continuous reward."""
    K = _positive("K", K)
    xi = _positive("xi", xi)
    H = _positive("H", H)
    z = K * xi
    return H * (reg_lower_gamma(K, z) - reg_lower_gamma(K + 1.0, z) / xi)


def psi(K, xi, eps):
    """Unclipped success-time threshold, as a fraction of ``H``, for the
    event ``R >= mean + std * sqrt(eps)``."""
    K = _positive("K", K)
    xi = _positive("xi", xi)
    eps = _non_negative("eps", eps)
    z = K * xi
    return (
        reg_upper_gamma(K, z)
        + reg_lower_gamma(K + 1.0, z) / xi
        - c_rl(K, xi) / z * math.sqrt(eps)
    )


def anti_concentration(K, xi, eps):
    """``P[R >= E R + sqrt(eps) * std R]`` for the continuous reward."""
    clipped = min(1.0, max(0.0, psi(K, xi, eps)))
    return reg_lower_gamma(K, K * xi * clipped)


def c_sft(K, xi):
    """Ratio of success-conditioned to unconditional std of ``T``.

    Raises
    ------
    DegenerateError
        If ``P(K, K xi)`` is below 1e-300, i.e. no trace ever succeeds.
    """
    K = _positive("K", K)
    xi = _positive("xi", xi)
    c2 = _sft_radicand(K, K * xi)
    if c2 is None:
        raise DegenerateError(f"no successful traces at K={K}, xi={xi}")
    return math.sqrt(c2)


def sigma_sft(K, xi, H=1.0):
    """Std of success-conditioned solution length: ``c_sft * H / (sqrt(K) xi)``."""
    H = _positive("H", H)
    return c_sft(K, xi) * H / (math.sqrt(K) * xi)
