"""Shape-constrained MLE of the event-time CDF from current-status data.

With indicators ordered by inspection time, the Bernoulli log likelihood
``sum(d_i log F_i + (1 - d_i) log(1 - F_i))`` is maximized over nondecreasing
vectors by pooling adjacent violators; the fitted value at position i also
equals the max-min of window means ``max_{h<=i} min_{k>=i} mean(d[h..k])``.
Both routes are implemented: the pooled pass is the production path and the
cubic max-min evaluation is the oracle it is checked against.

The fit is also the backbone of the profile likelihood in the cure fraction:
capping the fitted CDF at ``1 - p`` and rescoring gives the constrained
maximum for that ``p``, which is flat on an interval, so the likelihood alone
cannot pick a unique cure estimate.  ``inconsistency_probe`` measures how
often the fitted CDF reaches 1 at the largest inspection time, the event that
collapses that interval to the single point 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import map_replication_chunks
from .model import CurrentStatusSample, MixtureSpec, simulate, sort_with_concomitants


@dataclass(frozen=True)
class NpmleFit:
    """Fitted nondecreasing CDF values at the sorted inspection times."""

    fhat: np.ndarray


@dataclass(frozen=True)
class CureArgmaxInterval:
    """Closed interval of cure values attaining the profile maximum."""

    lo: float
    hi: float


def _as_indicator(deltas) -> np.ndarray:
    d = np.asarray(deltas)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("deltas must be a nonempty 1-d sequence")
    d = d.astype(np.int64)
    if not np.all((d == 0) | (d == 1)):
        raise ValueError("deltas entries must be 0 or 1")
    return d


def maxmin_brute(deltas) -> NpmleFit:
    """Literal max-min evaluation, cubic time; the reference oracle.

    Window means are formed as integer sum over integer count, the same
    single float division the pooled pass performs, so the two routes agree
    bit for bit, not just within rounding.
    """
    d = _as_indicator(deltas)
    n = d.size
    prefix = np.concatenate(([0], np.cumsum(d)))
    fhat = np.empty(n)
    for i in range(n):
        best = -math.inf
        for h in range(i + 1):
            worst = math.inf
            for k in range(i, n):
                mean = (prefix[k + 1] - prefix[h]) / (k - h + 1)
                if mean < worst:
                    worst = mean
            if worst > best:
                best = worst
        fhat[i] = best
    return NpmleFit(fhat=fhat)


def npmle_pava(deltas) -> NpmleFit:
    """Pool adjacent violators in one left-to-right pass, linear time.

    Blocks carry integer (sum, count) pairs and merge while the previous
    block mean is >= the incoming one; the comparison is done in exact
    integer arithmetic, and each fitted value is the single division
    sum/count.
    """
    d = _as_indicator(deltas)
    sums: list[int] = []
    counts: list[int] = []
    for v in d.tolist():
        s, c = v, 1
        while sums and sums[-1] * c >= s * counts[-1]:
            s += sums.pop()
            c += counts.pop()
        sums.append(s)
        counts.append(c)
    fhat = np.empty(d.size)
    pos = 0
    for s, c in zip(sums, counts):
        fhat[pos : pos + c] = s / c
        pos += c
    return NpmleFit(fhat=fhat)


def log_lik(f, deltas) -> float:
    """Bernoulli log likelihood of the indicator sequence under CDF values ``f``.

    Conventions: a zero-probability factor that is never hit contributes 0
    (0*log 0 = 0), while an indicator contradicting a degenerate value
    (delta=1 at f=0, or delta=0 at f=1) makes the whole sum -inf.  ``f`` must
    be nondecreasing within [0, 1]; anything else is a contract violation,
    not a -inf case.
    """
    d = _as_indicator(deltas)
    f = np.asarray(f, dtype=float)
    if f.shape != d.shape:
        raise ValueError("f and deltas must have equal length")
    if np.any(f < 0.0) or np.any(f > 1.0):
        raise ValueError("f values must lie in [0, 1]")
    if np.any(np.diff(f) < 0.0):
        raise ValueError("f must be nondecreasing")
    event = f[d == 1]
    censored = f[d == 0]
    if np.any(event == 0.0) or np.any(censored == 1.0):
        return -math.inf
    return float(np.sum(np.log(event)) + np.sum(np.log1p(-censored)))


def profile_cure_loglik(fit: NpmleFit, deltas, p: float) -> float:
    """Constrained maximum log likelihood when the CDF may total at most 1 - p.

    Capping the unconstrained fit at 1 - p is exactly the constrained
    maximizer, so this evaluates the profile in the cure fraction without
    re-optimizing.  Nonincreasing in p.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    return log_lik(np.minimum(fit.fhat, 1.0 - p), deltas)


def npmle_cure_argmax_interval(fit: NpmleFit) -> CureArgmaxInterval:
    """Cure values attaining the profile maximum: the interval [0, 1 - fhat[-1]].

    Degenerate at {0} exactly when the fitted CDF reaches 1, i.e. when the
    indicator at the largest inspection time is 1.
    """
    return CureArgmaxInterval(lo=0.0, hi=1.0 - float(fit.fhat[-1]))


def _probe_chunk(spec: MixtureSpec, n: int, seed: int, start: int, stop: int) -> int:
    hits = 0
    for rep in range(start, stop):
        sample = simulate(spec, n, seed + rep)
        ss = sort_with_concomitants(sample)
        hits += int(ss.delta[-1])
    return hits


def inconsistency_probe(
    spec: MixtureSpec, n: int, reps: int, seed: int, workers: int = 1
) -> float:
    """Monte Carlo frequency of samples whose fitted CDF reaches 1.

    That event is exactly {indicator at the largest inspection time is 1};
    when it happens the flat argmax interval for the cure fraction collapses
    to {0}, so this frequency measures how often the plain profile argmax is
    useless.  Replication k uses seed ``seed + k``.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    counts = map_replication_chunks(_probe_chunk, (spec, n, seed), reps, workers)
    return sum(counts) / reps


def fit_sorted(sample: CurrentStatusSample) -> NpmleFit:
    """Sort a raw sample and fit; convenience wrapper for callers holding
    unsorted records."""
    return npmle_pava(sort_with_concomitants(sample).delta)
