"""
Empirical trace pipeline: ingest rollout token counts, fit gamma difficulty
models, and sweep the budget to get normalized reward-variance and
anti-concentration curves.

Input format is line-delimited JSON, one trace per line::

    {"problem_id": "gsm8k-17", "tokens": 231, "correct": true}

``tokens`` is the time-to-solution for correct traces and the total generated
length otherwise.  Unknown keys are ignored.
"""
import csv
import io
import json
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import DataError, DegenerateError, DomainError
from .oracle import as_generator, sample_gamma
from .specfun import digamma, trigamma

__all__ = [
    "TraceRecord",
    "TraceDataset",
    "GammaFit",
    "ProblemStats",
    "SweepResult",
    "DEFAULT_XI_GRID",
    "load_traces",
    "parse_traces",
    "write_traces",
    "fit_gamma",
    "problem_stats",
    "sweep_budget",
    "generate_synthetic",
]

log = logging.getLogger(__name__)

DEFAULT_XI_GRID = tuple(np.linspace(0.1, 4.0, 40).tolist())
MAX_MALFORMED_FRACTION = 0.10
SWEEP_CSV_HEADER = ("xi", "normalized_variance", "anti_concentration", "n_problems")


@dataclass(frozen=True)
class TraceRecord:
    problem_id: str
    tokens: int
    correct: bool


@dataclass
class TraceDataset:
    records: List[TraceRecord] = field(default_factory=list)
    n_skipped: int = 0
    diagnostics: List[str] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def by_problem(self):
        """Records grouped by problem id, in sorted id order."""
        groups = {}
        for r in self.records:
            groups.setdefault(r.problem_id, []).append(r)
        return OrderedDict(sorted(groups.items()))

    @property
    def n_problems(self):
        return len({r.problem_id for r in self.records})


def _parse_record(line):
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    pid = obj.get("problem_id")
    tokens = obj.get("tokens")
    correct = obj.get("correct")
    if not isinstance(pid, str):
        raise ValueError("problem_id must be a string")
    if isinstance(tokens, bool) or not isinstance(tokens, int):
        raise ValueError("tokens must be an integer")
    if tokens < 1:
        raise ValueError(f"tokens must be >= 1, got {tokens}")
    if not isinstance(correct, bool):
        raise ValueError("correct must be a boolean")
    return TraceRecord(pid, tokens, correct)


def parse_traces(lines):
    """Parse an iterable of text lines; see ``load_traces``."""
    ds = TraceDataset()
    n_lines = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        n_lines += 1
        try:
            ds.records.append(_parse_record(line))
        except (ValueError, TypeError) as exc:
            ds.n_skipped += 1
            ds.diagnostics.append(f"line {lineno}: {exc}")
    if n_lines and ds.n_skipped > MAX_MALFORMED_FRACTION * n_lines:
        raise DataError(
            f"{ds.n_skipped} of {n_lines} lines are malformed "
            f"(limit {MAX_MALFORMED_FRACTION:.0%}); first: {ds.diagnostics[0]}"
        )
    for d in ds.diagnostics:
        log.warning("skipped %s", d)
    return ds


def load_traces(path):
    """Read a line-delimited trace file.

    Malformed lines are skipped and counted in ``n_skipped``; more than 10%
    malformed lines raises ``DataError``.  ``OSError`` propagates.
    """
    with open(path, encoding="utf-8") as fh:
        return parse_traces(fh)


def write_traces(dataset, fh):
    """Write records in the line-delimited input format."""
    for r in dataset.records:
        fh.write(
            json.dumps({"problem_id": r.problem_id, "tokens": r.tokens,
                        "correct": r.correct})
            + "\n"
        )


@dataclass(frozen=True)
class GammaFit:
    k: float
    p: float
    method: str
    converged: bool = True  # False: MLE fell back to moments


def _mom(mean, var):
    return mean * mean / var, mean / var


def fit_gamma(samples, method="mom", tol=1e-12, max_iter=100):
    """Fit shape ``k`` and rate ``p`` of a gamma distribution.

    Parameters
    ----------
    samples : array_like
        Positive observations, at least two with positive variance.
    method : {"mom", "mle"}
        Method of moments (``k = mean^2 / var``, ``p = mean / var`` with the
        unbiased variance) or maximum likelihood.  The MLE solves
        ``log k - digamma(k) = log(mean) - mean(log x)`` by Newton's method and
        falls back to the moment fit, with ``converged=False``, if Newton
        fails.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise DegenerateError(f"need at least 2 samples to fit, got {x.size}")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise DomainError("samples must be positive and finite")
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    if not var > 0:
        raise DegenerateError("samples have zero variance")
    k0, p0 = _mom(mean, var)
    method = method.lower()
    if method == "mom":
        return GammaFit(k0, p0, "mom")
    if method != "mle":
        raise DomainError(f"unknown fit method {method!r}")

    s = math.log(mean) - float(np.log(x).mean())
    if not s > 0:
        raise DegenerateError("samples have zero log-spread")
    # Minka's closed-form start, then Newton on log k - digamma(k) - s.
    k = (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)
    for _ in range(max_iter):
        f = math.log(k) - digamma(k) - s
        df = 1.0 / k - trigamma(k)
        k_new = k - f / df
        if not (math.isfinite(k_new) and k_new > 0):
            break
        if abs(k_new - k) <= tol * k:
            return GammaFit(k_new, k_new / mean, "mle")
        k = k_new
    log.warning("gamma MLE did not converge; using method of moments")
    return GammaFit(k0, p0, "mom", converged=False)


@dataclass(frozen=True)
class ProblemStats:
    problem_id: str
    n_traces: int
    n_correct: int
    mu_hat: Optional[float]
    var_hat: Optional[float]
    k_hat: Optional[float]
    p_hat: Optional[float]
    fit_method: Optional[str]


def problem_stats(dataset, method="mom"):
    """Per-problem statistics of correct-trace token counts.

    Incorrect traces are excluded from the fit; their lengths are censored
    and would bias the difficulty estimate.
    """
    out = []
    for pid, recs in dataset.by_problem().items():
        correct = np.array([r.tokens for r in recs if r.correct], dtype=float)
        mu = var = k = p = fm = None
        if correct.size >= 2:
            mu = float(correct.mean())
            var = float(correct.var(ddof=1))
            try:
                fit = fit_gamma(correct, method)
                k, p, fm = fit.k, fit.p, fit.method
            except DegenerateError:
                pass
        out.append(ProblemStats(pid, len(recs), int(correct.size), mu, var, k, p, fm))
    return out


@dataclass
class SweepResult:
    xi_grid: np.ndarray
    normalized_variance: np.ndarray
    anti_concentration: np.ndarray
    eps: float
    n_problems_used: int
    problem_ids: List[str] = field(default_factory=list)
    # Per-problem curves, shape (n_problems_used, len(xi_grid)); raw_variance
    # is the variance of R itself, in tokens^2.
    mu_hat: Optional[np.ndarray] = None
    raw_variance: Optional[np.ndarray] = None
    raw_anti_concentration: Optional[np.ndarray] = None

    def to_csv(self, fh=None):
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(SWEEP_CSV_HEADER)
        for xi, nv, ac in zip(self.xi_grid, self.normalized_variance,
                              self.anti_concentration):
            w.writerow([f"{xi:.10g}", f"{nv:.10g}", f"{ac:.10g}", self.n_problems_used])
        return out.getvalue() if fh is None else None


def _problem_curves(tokens, correct, mu_hat, xi_grid, eps):
    H = np.asarray(xi_grid)[:, None] * mu_hat
    success = correct[None, :] & (tokens[None, :] <= H)
    R = np.where(success, H - tokens[None, :] + 1.0, 0.0)
    mean = R.mean(axis=1)
    var = R.var(axis=1)
    std = np.sqrt(var)
    hits = (R >= (mean + std * math.sqrt(eps))[:, None]).mean(axis=1)
    ac = np.where(std > 0, hits, 0.0)
    return var, ac


def sweep_budget(dataset, xi_grid=DEFAULT_XI_GRID, eps=0.5, min_correct=5):
    """Reward variance and anti-concentration as the budget sweeps ``xi``.

    For each problem with at least ``min_correct`` correct traces, ``mu_hat``
    is the mean correct-trace length and the budget is ``H = xi * mu_hat``.
    Every trace of the problem is scored with the bi-level reward (failed and
    over-budget traces score 0).  The variance of the budget-relative reward
    ``R / H`` is divided by its own maximum over the grid, per problem.
    Anti-concentration is the fraction of traces with
    ``R >= mean + std * sqrt(eps)`` (0 where ``std == 0``).  Both curves are
    then averaged over problems with equal weight.

    Raises
    ------
    DataError
        If no problem has ``min_correct`` correct traces.
    """
    xi = np.asarray(xi_grid, dtype=float)
    if xi.ndim != 1 or xi.size == 0 or np.any(xi <= 0):
        raise DomainError("xi_grid must be a non-empty sequence of positive reals")
    if not eps >= 0:
        raise DomainError(f"eps must be non-negative, got {eps!r}")
    min_correct = max(int(min_correct), 1)
    ids, mu_hats, variances, acs = [], [], [], []
    for pid, recs in dataset.by_problem().items():
        tokens = np.array([r.tokens for r in recs], dtype=float)
        correct = np.array([r.correct for r in recs], dtype=bool)
        if correct.sum() < min_correct:
            continue
        mu_hat = float(tokens[correct].mean())
        var, ac = _problem_curves(tokens, correct, mu_hat, xi, eps)
        ids.append(pid)
        mu_hats.append(mu_hat)
        variances.append(var)
        acs.append(ac)
    if not ids:
        raise DataError(
            f"no problem has at least {min_correct} correct traces "
            f"({dataset.n_problems} problems, {len(dataset)} traces)"
        )
    raw_var = np.vstack(variances)
    raw_ac = np.vstack(acs)
    budgets = xi[None, :] * np.array(mu_hats)[:, None]
    scaled = raw_var / budgets**2
    peak = scaled.max(axis=1, keepdims=True)
    norm = np.divide(scaled, peak, out=np.zeros_like(scaled), where=peak > 0)
    return SweepResult(
        xi_grid=xi,
        normalized_variance=norm.mean(axis=0),
        anti_concentration=raw_ac.mean(axis=0),
        eps=float(eps),
        n_problems_used=len(ids),
        problem_ids=ids,
        mu_hat=np.array(mu_hats),
        raw_variance=raw_var,
        raw_anti_concentration=raw_ac,
    )


def generate_synthetic(K, p, n_problems, traces_per_problem, truncation_H=None, rng=None):
    """Synthetic dataset with Gamma(K, p) times-to-solution.

    Token counts are ``ceil(T)``.  With ``truncation_H`` set, traces with
    ``T > truncation_H`` are marked incorrect and censored at
    ``ceil(truncation_H)`` tokens.
    """
    if int(n_problems) < 1 or int(traces_per_problem) < 1:
        raise DomainError("n_problems and traces_per_problem must be at least 1")
    if truncation_H is not None and not truncation_H > 0:
        raise DomainError(f"truncation_H must be positive, got {truncation_H!r}")
    if rng is None:
        raise DomainError("an RngSpec or Generator is required")
    gen = as_generator(rng)
    width = len(str(int(n_problems) - 1))
    ds = TraceDataset()
    for j in range(int(n_problems)):
        pid = f"p{j:0{width}d}"
        T = sample_gamma(K, p, gen, int(traces_per_problem))
        for t in T:
            tokens = max(1, math.ceil(t))
            if truncation_H is not None and t > truncation_H:
                ds.records.append(
                    TraceRecord(pid, max(1, math.ceil(truncation_H)), False))
            else:
                ds.records.append(TraceRecord(pid, tokens, True))
    return ds
