"""
Optimal relative budget and regime classification.

``optimal_xi`` maximizes the reward standard deviation ``sigma_rl(K, xi) / H``
over ``xi``: a coarse log-spaced scan locates a bracket, the scan is checked
for a single interior peak, and golden-section search refines it.
"""
import enum
import math
from dataclasses import dataclass

from .errors import DomainError, NumericError
from .rewardstats import c_rl
from .specfun import reg_lower_gamma

__all__ = [
    "Regime",
    "RegimeThresholds",
    "OptimalBudget",
    "SampleComplexity",
    "normalized_std",
    "golden_section_max",
    "optimal_xi",
    "classify",
    "regime_sample_complexity",
]

SCAN_LO = 0.05
SCAN_HI = 20.0
SCAN_POINTS = 200
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class Regime(str, enum.Enum):
    DEFICIENT = "deficient"
    BALANCED = "balanced"
    AMPLE = "ample"

    @property
    def order(self):
        return ("deficient", "balanced", "ample").index(self.value)


@dataclass(frozen=True)
class RegimeThresholds:
    xi_lo: float = 0.8
    xi_hi: float = 2.0

    def __post_init__(self):
        if not (0.0 < self.xi_lo < self.xi_hi):
            raise DomainError(
                f"thresholds need 0 < xi_lo < xi_hi, got ({self.xi_lo}, {self.xi_hi})"
            )


@dataclass(frozen=True)
class OptimalBudget:
    xi_star: float
    sigma_at_star: float  # in units of H
    iterations_used: int


@dataclass(frozen=True)
class SampleComplexity:
    """Order-of-magnitude rollout count with unit constants and no log factors.

    ``asymptotic`` is always True: the underlying bounds hide constants, so
    ``n_estimate`` is only meaningful up to a multiplicative factor.
    """

    label: Regime
    n_estimate: float
    asymptotic: bool = True


def normalized_std(K, xi):
    """Reward standard deviation in units of ``H``."""
    return c_rl(K, xi) / (K * xi)


def golden_section_max(f, lo, hi, tol=1e-6, max_iter=200):
    """Maximize a unimodal ``f`` on ``[lo, hi]``.

    Returns
    -------
    (x, f(x), iterations)
    """
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol:
        if it >= max_iter:
            raise NumericError(f"golden-section search exceeded {max_iter} iterations")
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x), it


def _check_unimodal(values):
    # The scan must rise to a single peak and then fall.  Plateaus of exact
    # zeros (underflow at tiny xi) count as rising.
    peak = max(range(len(values)), key=values.__getitem__)
    for i in range(peak):
        if values[i + 1] < values[i] * (1.0 - 1e-12):
            raise NumericError(f"reward std is not unimodal in xi (dip near index {i})")
    for i in range(peak, len(values) - 1):
        if values[i + 1] > values[i] * (1.0 + 1e-12):
            raise NumericError(f"reward std is not unimodal in xi (rise near index {i})")
    return peak


def optimal_xi(K, tol=1e-6):
    """Relative budget that maximizes the reward standard deviation.

    Parameters
    ----------
    K : float
        Gamma shape.
    tol : float
        Width of the final golden-section bracket.

    Raises
    ------
    NumericError
        If the coarse scan is not unimodal or the peak sits on the scan
        boundary.
    """
    if not (K > 0 and math.isfinite(K)):
        raise DomainError(f"K must be positive, got {K!r}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    step = math.log(SCAN_HI / SCAN_LO) / (SCAN_POINTS - 1)
    grid = [SCAN_LO * math.exp(i * step) for i in range(SCAN_POINTS)]
    values = [normalized_std(K, x) for x in grid]
    peak = _check_unimodal(values)
    if peak == 0 or peak == len(grid) - 1:
        raise NumericError(f"reward std peaks at the scan boundary xi={grid[peak]}")
    lo, hi = grid[peak - 1], grid[peak + 1]
    x, fx, it = golden_section_max(lambda x: normalized_std(K, x), lo, hi, tol=tol)
    return OptimalBudget(x, fx, it)


def classify(xi, th=RegimeThresholds()):
    if not xi > 0:
        raise DomainError(f"xi must be positive, got {xi!r}")
    if xi < th.xi_lo:
        return Regime.DEFICIENT
    if xi <= th.xi_hi:
        return Regime.BALANCED
    return Regime.AMPLE


def regime_sample_complexity(K, xi, kappa, th=RegimeThresholds()):
    """Regime label and unit-constant sample-size scaling at ``xi``.

    Deficient: ``kappa^-1/2 * f^-3/2`` with ``f = P(K, K xi)``; balanced:
    ``kappa^-1/2``; ample: ``xi * kappa^-1/2``.  A vanishing ``f`` gives
    ``inf``.
    """
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa!r}")
    label = classify(xi, th)
    base = 1.0 / math.sqrt(kappa)
    if label is Regime.DEFICIENT:
        f = reg_lower_gamma(K, K * xi)
        if f < 1e-300:
            return SampleComplexity(label, math.inf)
        # f**-1.5 overflows only for f < ~1e-205
        try:
            n = base * f**-1.5
        except OverflowError:
            n = math.inf
        return SampleComplexity(label, n)
    if label is Regime.BALANCED:
        return SampleComplexity(label, base)
    return SampleComplexity(label, xi * base)
