"""Monte Carlo estimates of the stationary hit rate and stack-depth law.

Two estimators:

* stationary sampling draws whole recency stacks directly (exponential ages
  sorted, equivalently a size-biased permutation) and scores each stack by
  its cached popularity mass;
* the move-to-front chain replays an i.i.d. request stream and records the
  list depth of every request after a burn-in.

Replica ``r`` of a run with seed ``s`` draws from ``SeedSequence(s).spawn``
child ``r``, and replicas are merged in index order, so results depend only
on ``(seed, config)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import ModelParams, PopularityVector, as_popularity
from .errors import BadLength, ModelError

CHUNK = 1 << 16
#: batches per replica for the chain's batch-means standard errors
BATCHES = 50


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    samples: int = 100_000
    steps: int = 1_000_000
    burn_in: Optional[int] = None  # None selects the heuristic default
    replicas: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ModelError("seed must be a 64-bit unsigned integer", "seed")
        if self.samples < 1:
            raise ModelError("samples must be at least 1", "samples")
        if self.steps < 1:
            raise ModelError("steps must be at least 1", "steps")
        if self.burn_in is not None and self.burn_in < 0:
            raise ModelError("burn_in must be nonnegative", "burn_in")
        if self.replicas < 1:
            raise ModelError("replicas must be at least 1", "replicas")

    def streams(self):
        return [np.random.default_rng(s)
                for s in np.random.SeedSequence(self.seed).spawn(self.replicas)]


@dataclass(frozen=True)
class SimResult:
    hit_rate_estimate: float
    std_error: float
    search_cost_histogram: np.ndarray
    samples_used: int
    pmf_std_error: Optional[np.ndarray] = None
    burn_in: int = 0
    burn_in_heuristic: bool = False
    notes: tuple = field(default=())

    def empirical_pmf(self) -> np.ndarray:
        return self.search_cost_histogram / self.samples_used

    def empirical_cdf(self) -> np.ndarray:
        return np.cumsum(self.search_cost_histogram) / self.samples_used


class _Moments:
    """Running count / mean / sum of squared deviations (pairwise merge)."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, values: np.ndarray) -> None:
        k = values.size
        if k == 0:
            return
        mu = float(values.mean())
        m2 = float(((values - mu) ** 2).sum())
        total = self.n + k
        delta = mu - self.mean
        self.mean += delta * k / total
        self.m2 += m2 + delta * delta * self.n * k / total
        self.n = total

    def std_error(self) -> float:
        if self.n < 2:
            return float("nan")
        return math.sqrt(self.m2 / (self.n - 1)) / math.sqrt(self.n)


def _check(p: PopularityVector, params: ModelParams) -> None:
    if p.n != params.n_items:
        raise BadLength(f"popularity has {p.n} entries but n_items = {params.n_items}")
    params.require_partial()


def sample_stacks(probs: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent stationary stacks, most recent item first."""
    ages = rng.standard_exponential((size, len(probs))) / probs
    return np.argsort(ages, axis=1)


def sample_stationary_stack(p, rng: np.random.Generator) -> np.ndarray:
    """One stationary recency order (a size-biased permutation of the items)."""
    p = as_popularity(p)
    return sample_stacks(p.probs, 1, rng)[0]


def estimate_hit_rate_stationary(p, params: ModelParams, cfg: SimConfig = SimConfig()) -> SimResult:
    """Average cached popularity mass over independent stationary stacks.

    Each stack contributes ``sum of p_i over its top C`` (the conditional hit
    probability) rather than a 0/1 outcome.  The depth histogram comes from
    one extra request drawn per stack.
    """
    p = as_popularity(p)
    _check(p, params)
    n, c = p.n, params.capacity
    moments = _Moments()
    hist = np.zeros(n, dtype=np.int64)
    for rng in cfg.streams():
        left = cfg.samples
        while left:
            size = min(left, CHUNK)
            stacks = sample_stacks(p.probs, size, rng)
            moments.add(p.probs[stacks[:, :c]].sum(axis=1))
            request = rng.choice(n, size=size, p=p.probs)
            depth = np.argmax(stacks == request[:, None], axis=1)
            hist += np.bincount(depth, minlength=n)
            left -= size
    freq = hist / moments.n
    pmf_se = np.sqrt(freq * (1.0 - freq) / max(moments.n - 1, 1))
    return SimResult(moments.mean, moments.std_error(), hist, moments.n, pmf_se)


def default_burn_in(p: PopularityVector) -> int:
    """Heuristic ``50 N max(p) / min(p)`` requests."""
    return int(math.ceil(50 * p.n * p.probs.max() / p.probs.min()))


def mtf_depths(requests: np.ndarray, n: int) -> np.ndarray:
    """List depth (1-based) of every request, starting from the order 0, 1, .., n-1.

    The starting list is encoded as virtual past requests ``n-1, .., 0`` so
    every real request has a previous occurrence; its depth is one plus the
    number of distinct other items requested since then.
    """
    seq = np.concatenate([np.arange(n - 1, -1, -1), requests])
    idx = np.arange(seq.size)
    prev = np.empty(seq.size, dtype=np.int64)
    positions = []
    for j in range(n):
        pos = idx[seq == j]
        positions.append(pos)
        prev[pos[1:]] = pos[:-1]
    real = idx[n:]
    since = prev[real]
    depth = np.ones(real.size, dtype=np.int64)
    for pos in positions:
        k = np.searchsorted(pos, since, side="right")
        nxt = np.append(pos, seq.size)[k]
        depth += nxt < real
    return depth


def simulate_mtf_chain(p, params: ModelParams, cfg: SimConfig = SimConfig()) -> SimResult:
    """Run the discrete move-to-front list for ``burn_in + steps`` requests.

    Successive depths are correlated, so standard errors come from batch
    means (``BATCHES`` per replica) instead of the i.i.d. formula.
    """
    p = as_popularity(p)
    _check(p, params)
    n = p.n
    heuristic = cfg.burn_in is None
    burn = default_burn_in(p) if heuristic else cfg.burn_in
    hist = np.zeros(n, dtype=np.int64)
    batch_freqs = []
    for rng in cfg.streams():
        requests = rng.choice(n, size=burn + cfg.steps, p=p.probs)
        depth = mtf_depths(requests, n)[burn:]
        hist += np.bincount(depth - 1, minlength=n)
        for part in np.array_split(depth, min(BATCHES, depth.size)):
            batch_freqs.append(np.bincount(part - 1, minlength=n) / part.size)
    used = int(hist.sum())
    hit = float(hist[: params.capacity].sum()) / used
    batch_hits = np.array([f[: params.capacity].sum() for f in batch_freqs])
    nb = len(batch_freqs)
    if nb > 1:
        se = float(batch_hits.std(ddof=1)) / math.sqrt(nb)
        pmf_se = np.array(batch_freqs).std(axis=0, ddof=1) / math.sqrt(nb)
    else:
        se, pmf_se = float("nan"), np.full(n, np.nan)
    notes = ("burn-in from a heuristic bound; no mixing-time guarantee",) if heuristic else ()
    return SimResult(hit, se, hist, used, pmf_se, burn, heuristic, notes)
