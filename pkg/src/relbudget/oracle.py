"""
Monte-Carlo ground truth for the closed forms in ``rewardstats``.

Random streams are numpy ``Generator`` objects on the PCG64 bit generator.
A ``RngSpec(seed, stream_id)`` maps to ``SeedSequence(seed,
spawn_key=(stream_id,))``, so distinct stream ids give independent streams
and a given (seed, stream_id) pair always reproduces the same draws.  A
generator is stateful; do not share one between threads.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .rewardstats import Convention, GammaModel, anti_concentration
from .rewardstats import bilevel_reward_stats, sigma_rl, truncated_gamma_moments

__all__ = [
    "RNG_ALGORITHM",
    "RngSpec",
    "McEstimate",
    "as_generator",
    "sample_gamma",
    "sample_negbin",
    "rewards",
    "mc_reward_stats",
    "mc_anti_concentration",
    "mc_truncated_variance_ratio",
    "ks_distance",
    "gamma_cdf",
    "closed_form_report",
]

RNG_ALGORITHM = "PCG64"
_MAX_U64 = 2**64 - 1


@dataclass(frozen=True)
class RngSpec:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) <= _MAX_U64):
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.stream_id) < 0:
            raise DomainError(f"stream_id must be non-negative, got {self.stream_id}")

    def generator(self):
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))

    def metadata(self):
        return {"algorithm": RNG_ALGORITHM, "seed": int(self.seed),
                "stream_id": int(self.stream_id)}


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n_samples: int

    def z_score(self, reference):
        if self.std_error == 0.0:
            return 0.0 if self.value == reference else math.inf
        return (self.value - reference) / self.std_error


def as_generator(rng):
    """Accept a ``RngSpec`` (fresh stream) or an existing ``Generator``."""
    if isinstance(rng, RngSpec):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngSpec or numpy Generator, got {type(rng).__name__}")


def _marsaglia_tsang(shape, gen, n):
    # Standard Gamma(shape, 1) for shape >= 1 by squeeze + log acceptance.
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = int(1.05 * (n - filled)) + 32
        x = gen.standard_normal(m)
        u = gen.random(m)
        v = 1.0 + c * x
        ok = v > 0.0
        x, u, v = x[ok], u[ok], v[ok] ** 3
        with np.errstate(divide="ignore"):
            accept = (u < 1.0 - 0.0331 * x**4) | (
                np.log(u) < 0.5 * x * x + d * (1.0 - v + np.log(v))
            )
        draws = d * v[accept]
        take = min(draws.size, n - filled)
        out[filled:filled + take] = draws[:take]
        filled += take
    return out


def sample_gamma(K, p, rng, n):
    """``n`` i.i.d. Gamma(shape K, rate p) variates.

    K == 1 uses the inverse CDF of the exponential; K > 1 Marsaglia-Tsang;
    K < 1 draws Gamma(K + 1) and multiplies by ``U ** (1 / K)``.
    """
    GammaModel(K, p)
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    gen = as_generator(rng)
    if K == 1.0:
        std = -np.log1p(-gen.random(n))
    elif K > 1.0:
        std = _marsaglia_tsang(float(K), gen, n)
    else:
        std = _marsaglia_tsang(K + 1.0, gen, n) * gen.random(n) ** (1.0 / K)
    return std / p


def sample_negbin(K, p, rng, n):
    """Total trials until the K-th success, summing K geometric counts."""
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    gen = as_generator(rng)
    n = int(n)
    total = np.zeros(n, dtype=np.int64)
    for _ in range(int(K)):
        total += gen.geometric(p, size=n)
    return total


def rewards(T, H, convention):
    """Per-trace rewards for times-to-solution ``T`` at budget ``H``.

    Continuous: ``max(0, H - T)``; bi-level: ``H - T + 1`` when ``T <= H``,
    else 0.
    """
    T = np.asarray(T, dtype=float)
    if Convention(convention) is Convention.CONTINUOUS:
        return np.maximum(0.0, H - T)
    return np.where(T <= H, H - T + 1.0, 0.0)


def _mean_and_variance(r):
    n = r.size
    mean = float(r.mean())
    dev = r - mean
    m2 = float(np.mean(dev * dev))
    m4 = float(np.mean(dev**4))
    var = m2 * n / (n - 1)
    return (
        McEstimate(mean, math.sqrt(m2 / n), n),
        McEstimate(var, math.sqrt(max(m4 - m2 * m2, 0.0) / n), n),
    )


def mc_reward_stats(K, p, H, convention, rng, n):
    """Empirical reward mean and variance over ``n`` gamma draws.

    The variance standard error uses the large-sample formula
    ``sqrt((mu4 - sigma^4) / n)``.
    """
    if not H > 0:
        raise DomainError(f"H must be positive, got {H!r}")
    T = sample_gamma(K, p, rng, n)
    return _mean_and_variance(rewards(T, H, convention))


def _binomial(hits, n):
    f = hits / n
    return McEstimate(f, math.sqrt(f * (1.0 - f) / n), n)


def mc_anti_concentration(K, p, H, eps, rng, n, convention=Convention.CONTINUOUS):
    """Fraction of sampled rewards with ``R >= mean + std sqrt(eps)``.

    ``mean`` and ``std`` are the closed-form values, so only the tail
    probability is being estimated.
    """
    if not eps >= 0:
        raise DomainError(f"eps must be non-negative, got {eps!r}")
    model = GammaModel(K, p)
    if Convention(convention) is Convention.CONTINUOUS:
        stats = sigma_rl(K, model.xi(H), H)
    else:
        stats = bilevel_reward_stats(truncated_gamma_moments(model, H), H)
    threshold = stats.mean + stats.std * math.sqrt(eps)
    r = rewards(sample_gamma(K, p, rng, n), H, convention)
    return _binomial(int(np.count_nonzero(r >= threshold)), int(n))


def mc_truncated_variance_ratio(K, p, H, rng, n):
    """Estimate ``Var[T | T <= H] / Var[T]``, the square of C_SFT."""
    T = sample_gamma(K, p, rng, n)
    kept = T[T <= H]
    if kept.size < 2:
        return McEstimate(math.nan, math.inf, int(kept.size))
    _, var = _mean_and_variance(kept)
    v = K / p**2
    return McEstimate(var.value / v, var.std_error / v, var.n_samples)


def gamma_cdf(K, p):
    """Vectorized Gamma(K, rate p) CDF for use with ``ks_distance``."""
    GammaModel(K, p)
    return lambda x: special.gammainc(K, p * np.maximum(np.asarray(x, float), 0.0))


def ks_distance(samples, cdf):
    """Kolmogorov-Smirnov sup distance between the sample ECDF and ``cdf``.

    Ties (discrete samples) are handled: the supremum is attained at the last
    and first copy of each tied value respectively.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 100:
        raise DomainError(f"ks_distance needs at least 100 samples, got {n}")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - F)
    d_minus = np.max(F - (i - 1) / n)
    return float(min(1.0, max(d_plus, d_minus)))


def closed_form_report(T, K, p, H, eps):
    """Compare rewards computed from sampled times ``T`` with the closed forms.

    Returns a dict keyed by statistic with ``analytic``, ``estimate``,
    ``std_error``, ``z_score`` and ``pass`` (``|z| < 3``).
    """
    T = np.asarray(T, dtype=float)
    model = GammaModel(K, p)
    xi = model.xi(H)
    cont = sigma_rl(K, xi, H)
    bilevel = bilevel_reward_stats(truncated_gamma_moments(model, H), H)
    r = rewards(T, H, Convention.CONTINUOUS)
    mean, var = _mean_and_variance(r)
    threshold = cont.mean + cont.std * math.sqrt(eps)
    ac = _binomial(int(np.count_nonzero(r >= threshold)), r.size)
    b_mean, b_var = _mean_and_variance(rewards(T, H, Convention.BILEVEL))

    pairs = {
        "mean": (cont.mean, mean),
        "variance": (cont.variance, var),
        "anti_concentration": (anti_concentration(K, xi, eps), ac),
        "bilevel_mean": (bilevel.mean, b_mean),
        "bilevel_variance": (bilevel.variance, b_var),
    }
    report = {}
    for name, (analytic, est) in pairs.items():
        z = est.z_score(analytic)
        report[name] = {
            "analytic": analytic,
            "estimate": est.value,
            "std_error": est.std_error,
            "z_score": z,
            "pass": bool(abs(z) < 3.0),
        }
    return report
