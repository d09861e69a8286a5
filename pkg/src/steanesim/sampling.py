"""Syndrome samplers: direct (Born rule), power-law importance reweighting,
and uniform; estimator weighting, convergence traces, and the 2-D
(probability, damage) syndrome histogram.

Importance reweighting is applied per error-correction block: each block's
syndrome distribution is tilted independently and the total sample weight
is the product of the per-block ratios Pr(s)/Q(s).  The power-law tilt is

    Q(s) = Pr(s)^beta / Z,   beta chosen so Q(0) = min(Pr(0), cutoff)

with cutoff 1/2 on the trivial syndrome; blocks whose tilted distribution
would be degenerate (all mass on the trivial syndrome) fall back to direct
sampling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

BETA_TOL = 1e-10
DEGENERATE_TAIL = 1e-12


class DegenerateDistributionError(ValueError):
    """All probability mass sits on the trivial syndrome; no tilt exists."""


@dataclass(frozen=True)
class ImportanceConfig:
    mode: str = "direct"  # direct | power_law | uniform
    cutoff: float = 0.5

    def __post_init__(self):
        if self.mode not in ("direct", "power_law", "uniform"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")


DIRECT = ImportanceConfig("direct")
POWER_LAW = ImportanceConfig("power_law")


def solve_beta(probs: np.ndarray, cutoff: float = 0.5, tol: float = BETA_TOL) -> float:
    """Exponent of the power-law tilt.

    Returns 1 when Pr(0) <= cutoff; otherwise bisects the monotone map
    beta -> Pr(0)^beta / sum_s Pr(s)^beta down to the cutoff.
    """
    p = np.asarray(probs, dtype=float)
    p0 = p[0]
    if p0 <= cutoff:
        return 1.0
    if 1.0 - p0 <= DEGENERATE_TAIL or (p[1:] > 0).sum() == 0:
        raise DegenerateDistributionError("no mass outside the trivial syndrome")
    logp = np.full_like(p, -np.inf)
    np.log(p, out=logp, where=p > 0)

    def q0(beta):
        scaled = beta * logp
        mx = scaled.max()
        return np.exp(scaled[0] - mx - np.log(np.exp(scaled - mx).sum()))

    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if q0(mid) > cutoff:
            hi = mid
        else:
            lo = mid
    return hi


def solve_beta_batch(probs: np.ndarray, cutoff: float = 0.5,
                     iterations: int = 60) -> np.ndarray:
    """Vectorized bisection over rows; rows with Pr(0) <= cutoff get beta 1,
    degenerate rows get beta nan (caller falls back to direct sampling)."""
    p = np.asarray(probs, dtype=float)
    beta = np.ones(p.shape[0])
    active = p[:, 0] > cutoff
    degenerate = active & ((1.0 - p[:, 0] <= DEGENERATE_TAIL)
                           | ((p[:, 1:] > 0).sum(axis=1) == 0))
    beta[degenerate] = np.nan
    active &= ~degenerate
    if not active.any():
        return beta
    logp = np.full(p.shape, -np.inf)
    np.log(p, out=logp, where=p > 0)
    lp = logp[active]
    lo = np.zeros(lp.shape[0])
    hi = np.ones(lp.shape[0])
    for _ in range(iterations):
        mid = (lo + hi) / 2
        scaled = mid[:, None] * lp
        mx = scaled.max(axis=1, keepdims=True)
        logq0 = scaled[:, 0] - mx[:, 0] - np.log(np.exp(scaled - mx).sum(axis=1))
        too_high = logq0 > np.log(cutoff)
        hi = np.where(too_high, mid, hi)
        lo = np.where(too_high, lo, mid)
    beta[active] = hi
    return beta


def importance_distribution(probs: np.ndarray, config: ImportanceConfig):
    """(Q, beta) for one block; Q has the support of Pr in power-law mode."""
    p = np.asarray(probs, dtype=float)
    if config.mode == "direct":
        return p, 1.0
    if config.mode == "uniform":
        return np.full_like(p, 1.0 / p.size), 1.0
    try:
        beta = solve_beta(p, cutoff=config.cutoff)
    except DegenerateDistributionError:
        return p, 1.0
    if beta == 1.0:
        return p, 1.0
    q = np.where(p > 0, p ** beta, 0.0)
    return q / q.sum(), beta


def importance_distribution_batch(probs: np.ndarray, config: ImportanceConfig):
    """Row-wise version of importance_distribution for (B, S) blocks."""
    p = np.asarray(probs, dtype=float)
    if config.mode == "direct":
        return p, np.ones(p.shape[0])
    if config.mode == "uniform":
        return np.full_like(p, 1.0 / p.shape[1]), np.ones(p.shape[0])
    beta = solve_beta_batch(p, cutoff=config.cutoff)
    b = np.where(np.isnan(beta), 1.0, beta)
    q = np.where(p > 0, p, 1.0) ** b[:, None]
    q[p <= 0] = 0.0
    q /= q.sum(axis=1, keepdims=True)
    return q, beta


# ---------------------------------------------------------------------------
# weighted estimators and convergence traces
# ---------------------------------------------------------------------------

def trace_checkpoints(n: int) -> list[int]:
    points = []
    c = 10
    while c < n:
        points.append(c)
        c *= 10
    points.append(n)
    return points


def weighted_running_mean(values: np.ndarray, weights: np.ndarray,
                          checkpoints: list[int] | None = None):
    """Running weighted mean (1/n) sum w_j v_j recorded at checkpoints."""
    wv = np.asarray(values, dtype=float) * np.asarray(weights, dtype=float)
    csum = np.cumsum(wv)
    n = len(wv)
    points = checkpoints or trace_checkpoints(n)
    trace = [(int(k), float(csum[k - 1] / k)) for k in points if 1 <= k <= n]
    return float(csum[-1] / n), trace


def importance_estimate(records, metric):
    """Weighted Monte Carlo mean of a metric over sampled syndrome records.

    records: iterable with .weight and .gamma_logical (SyndromeRecord or
    ConcatResult).  metric: MetricKind/callable on a process matrix.
    Returns (estimate, trace).
    """
    from .metrics import MetricKind, get_metric
    fn = metric if callable(metric) else get_metric(MetricKind(metric))
    recs = list(records)
    if not recs:
        raise ValueError("need at least one record")
    values = np.array([float(fn(r.gamma_logical)) for r in recs])
    weights = np.array([r.weight for r in recs])
    return weighted_running_mean(values, weights)


# ---------------------------------------------------------------------------
# outlier histogram (probability vs damage density)
# ---------------------------------------------------------------------------

@dataclass
class SyndromeHistogram:
    bins_p: np.ndarray   # log10 Pr(s) bin edges
    bins_n: np.ndarray   # log10 damage bin edges
    counts: np.ndarray   # (len(bins_p)-1, len(bins_n)-1)
    total: int = 0
    truncated: bool = False
    meta: dict = field(default_factory=dict)

    def add(self, log_p, log_n):
        ip = np.clip(np.searchsorted(self.bins_p, log_p, side="right") - 1,
                     0, len(self.bins_p) - 2)
        iq = np.clip(np.searchsorted(self.bins_n, log_n, side="right") - 1,
                     0, len(self.bins_n) - 2)
        np.add.at(self.counts, (ip, iq), 1)
        self.total += len(np.atleast_1d(log_p))

    def to_json(self) -> str:
        return json.dumps({
            "bins_p": list(map(float, self.bins_p)),
            "bins_n": list(map(float, self.bins_n)),
            "counts": self.counts.astype(int).tolist(),
            "total": self.total,
            "truncated": self.truncated,
            "meta": self.meta,
        })

    @classmethod
    def from_json(cls, text: str) -> "SyndromeHistogram":
        d = json.loads(text)
        return cls(np.array(d["bins_p"]), np.array(d["bins_n"]),
                   np.array(d["counts"]), d["total"], d["truncated"], d["meta"])


def outlier_histogram(code, gamma0, level: int, metric="infidelity",
                      budget: int | None = None, rng=None,
                      decades_p: float = 50.0, decades_n: float = 50.0,
                      bins: int = 50) -> SyndromeHistogram:
    """Density of syndromes over (log10 Pr(s), log10 damage).

    Level 1 enumerates all syndromes exactly (each counted once, matching a
    combinatorial count over syndromes).  Higher levels draw histories with
    a uniform per-block syndrome distribution, which samples histories
    uniformly and therefore estimates the same count density; ``budget``
    histories are drawn (required for level >= 2).
    """
    from .concat import simulate_batch
    from .metrics import evaluate_metric
    from .qec import BlockInput, block_conditionals

    if level == 1:
        probs, gammas, _ = block_conditionals(BlockInput.iid(code, gamma0))
        weights_p = probs
        damages = np.asarray(evaluate_metric(metric, gammas), dtype=float)
        truncated = False
    else:
        if budget is None:
            raise ValueError("level >= 2 histograms need a sample budget")
        rng = rng or np.random.default_rng(0)
        batch = simulate_batch(code, gamma0, level, budget, rng,
                               sampler=ImportanceConfig("uniform"))
        weights_p = np.prod(batch.block_probs, axis=1)
        damages = np.asarray(evaluate_metric(metric, batch.gammas), dtype=float)
        truncated = False

    keep = weights_p > 0
    log_p = np.log10(weights_p[keep])
    dmg = np.clip(damages[keep], 1e-300, None)
    log_n = np.log10(dmg)
    edges_p = np.linspace(min(log_p.min(), -decades_p), 0.0, bins + 1)
    edges_n = np.linspace(min(log_n.min(), -decades_n), 0.0, bins + 1)
    hist = SyndromeHistogram(edges_p, edges_n,
                             np.zeros((bins, bins), dtype=np.int64),
                             meta={"level": level, "metric": str(metric)})
    hist.add(log_p, log_n)
    hist.truncated = truncated
    return hist
