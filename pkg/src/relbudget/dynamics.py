"""
Idealized online-RL iteration under the gamma model.

Each iteration raises the expected return by the guaranteed floor
``0.5 * sqrt(kappa) * sigma`` and then re-expresses the new policy as the
gamma model with the same shape ``K`` whose expected return matches.  The
trust-region radius follows the schedule

    kappa = min(sigma / J, (H - J) / (2 sigma)) ** 2

and every state records the rollout count that the one-step guarantee needs.
The simulator is deterministic.
"""
import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional

from .errors import DomainError, NumericError
from .rewardstats import expected_return_J, sigma_rl
from .specfun import reg_lower_gamma

__all__ = [
    "SimConfig",
    "OnlineState",
    "Trajectory",
    "ConvergedSignal",
    "trust_region_kappa",
    "anti_concentration_online",
    "required_rollouts",
    "initial_state",
    "invert_expected_return",
    "step",
    "simulate",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("i", "xi", "J", "sigma", "kappa", "c0", "n_required")
_BISECT_RTOL = 1e-12
_MAX_DOUBLINGS = 200
_MAX_BISECT = 200


class ConvergedSignal(Exception):
    """Raised when the return has reached the budget and no step remains."""


@dataclass(frozen=True)
class SimConfig:
    K: float
    xi0: float
    H: float
    m: int
    delta: float = 0.05
    reward_class_log_size: float = 1.0
    universal_C: float = 1.0
    include_m_in_log: bool = True

    def __post_init__(self):
        for name in ("K", "xi0", "H", "universal_C"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v!r}")
        if not 0 < self.delta <= 1:
            raise DomainError(f"delta must lie in (0, 1], got {self.delta!r}")
        if not self.reward_class_log_size >= 0:
            raise DomainError("reward_class_log_size must be non-negative")
        if int(self.m) != self.m or self.m < 0:
            raise DomainError(f"m must be a non-negative integer, got {self.m!r}")

    @property
    def log_term(self):
        """log(m |R| / delta), or log(|R| / delta) without the union bound."""
        value = self.reward_class_log_size - math.log(self.delta)
        if self.include_m_in_log:
            value += math.log(max(self.m, 1))
        return value


@dataclass(frozen=True)
class OnlineState:
    i: int
    xi: float
    J: float
    sigma: float
    kappa: float
    c0: float
    n_required: float


@dataclass
class Trajectory:
    config: SimConfig
    states: List[OnlineState] = field(default_factory=list)
    terminated_early: bool = False
    termination_reason: Optional[str] = None

    def __len__(self):
        return len(self.states)

    def column(self, name):
        return [getattr(s, name) for s in self.states]

    def to_csv(self, fh=None):
        """Write the trajectory as CSV (12 significant digits).

        Returns the CSV text when ``fh`` is None.
        """
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for s in self.states:
            writer.writerow(
                [s.i] + [f"{getattr(s, c):.12g}" for c in CSV_COLUMNS[1:]]
            )
        if fh is None:
            return out.getvalue()
        return None


def trust_region_kappa(J, sigma, H):
    """Squared trust-region radius ``min(sigma / J, (H - J) / (2 sigma))**2``.

    Raises
    ------
    ConvergedSignal
        If ``J >= H`` or ``sigma == 0``; the policy has nothing left to gain.
    """
    if J >= H or sigma <= 0.0:
        raise ConvergedSignal(f"degenerate state J={J}, sigma={sigma}, H={H}")
    if J <= 0.0:
        raise DomainError(f"J must be positive, got {J!r}")
    r = min(sigma / J, (H - J) / (2.0 * sigma))
    return r * r


def anti_concentration_online(K, xi, J, sigma, H, kappa=None):
    """``P[R >= J + sqrt(kappa) sigma]`` for the continuous reward.

    With ``kappa=None`` the late-phase schedule ``sqrt(kappa) = sigma / J`` is
    assumed, giving ``P(K, (xi K / H) (H - J - sigma^2 / J))``.
    """
    if J <= 0:
        raise DomainError(f"J must be positive, got {J!r}")
    lift = sigma * sigma / J if kappa is None else math.sqrt(kappa) * sigma
    arg = (xi * K / H) * (H - J - lift)
    return reg_lower_gamma(K, max(0.0, arg))


def required_rollouts(cfg, state):
    """Rollouts for the one-step guarantee: ``2 C H log(.) / (sqrt(kappa) c0 sigma)``."""
    denom = math.sqrt(state.kappa) * state.c0 * state.sigma
    if denom <= 0.0:
        return math.inf
    return 2.0 * cfg.universal_C * cfg.H * cfg.log_term / denom


def _state_at(cfg, i, xi):
    K, H = cfg.K, cfg.H
    stats = sigma_rl(K, xi, H)
    J, sigma = stats.mean, stats.std
    try:
        kappa = trust_region_kappa(J, sigma, H)
    except ConvergedSignal:
        # saturated start: record it, step() will stop on kappa == 0
        kappa = 0.0
    c0 = anti_concentration_online(K, xi, J, sigma, H, kappa=kappa)
    partial = OnlineState(i, xi, J, sigma, kappa, c0, math.nan)
    return OnlineState(i, xi, J, sigma, kappa, c0, required_rollouts(cfg, partial))


def initial_state(cfg):
    return _state_at(cfg, 0, cfg.xi0)


def invert_expected_return(K, target, H, xi_start):
    """The ``xi > xi_start`` with ``expected_return_J(K, xi, H) == target``.

    Bisection on an expanding bracket ``[xi_start, 4 xi_start]``, doubled until
    it straddles the target; stops at relative width 1e-12.
    """
    lo = xi_start
    hi = 4.0 * xi_start
    for _ in range(_MAX_DOUBLINGS):
        if expected_return_J(K, hi, H) > target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericError(f"could not bracket expected return {target} (H={H})")
    for _ in range(_MAX_BISECT):
        if hi - lo <= _BISECT_RTOL * hi:
            break
        mid = 0.5 * (lo + hi)
        if expected_return_J(K, mid, H) < target:
            lo = mid
        else:
            hi = mid
    else:
        raise NumericError("bisection for xi did not converge")
    return 0.5 * (lo + hi)


def step(cfg, state):
    """Advance one iteration at the guaranteed improvement floor."""
    H = cfg.H
    if state.kappa == 0.0:
        raise ConvergedSignal(f"no trust region left at xi={state.xi}")
    target = state.J + 0.5 * math.sqrt(state.kappa) * state.sigma
    if target >= H * (1.0 - 1e-12):
        raise ConvergedSignal(f"return {target} reached the budget {H}")
    xi = invert_expected_return(cfg.K, target, H, state.xi)
    return _state_at(cfg, state.i + 1, xi)


def simulate(cfg):
    """Run ``cfg.m`` iterations from ``xi0``; returns ``m + 1`` states unless
    the return saturates first (then ``terminated_early`` is set)."""
    traj = Trajectory(cfg)
    state = initial_state(cfg)
    traj.states.append(state)
    for _ in range(cfg.m):
        try:
            state = step(cfg, state)
        except ConvergedSignal as exc:
            traj.terminated_early = True
            traj.termination_reason = str(exc)
            break
        traj.states.append(state)
    return traj
