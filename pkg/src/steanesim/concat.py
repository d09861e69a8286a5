"""Recursive concatenated simulation and the two logical-noise averages.

A level-L simulation runs n^(L-1) innermost rounds on the physical
channel, feeds the surviving conditional channels upward n at a time, and
ends with a single top block; syndrome histories are stored level-major
(all level-1 blocks first, in block order).  Two code paths exist:

* ``simulate_level`` draws one sample by honest recursion, recomputing
  every block; its cost grows by a factor of n per added level.
* ``simulate_batch`` vectorizes many samples and computes the (shared)
  level-1 conditionals once, which is what the estimators use.

Both averages are estimated: ``avg_of_metric`` is the weighted mean of
the per-syndrome metric values, ``metric_of_avg`` applies the metric to
the weighted mean channel.  For infidelity the two coincide exactly
(the metric is affine in the process matrix).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import evaluate_metric
from .qec import BlockInput, block_conditionals, block_conditionals_batch
from .sampling import (ImportanceConfig, DIRECT, importance_distribution,
                       importance_distribution_batch, trace_checkpoints,
                       weighted_running_mean)

_MAX_LEVEL = 4
_ROWS_PER_CHUNK = 8192


def blocks_per_level(code, level: int) -> list[int]:
    """Blocks at each level of one level-`level` history, innermost first."""
    return [code.n ** (level - k) for k in range(1, level + 1)]


@dataclass
class ConcatResult:
    level: int
    gamma_logical: np.ndarray
    weight: float
    syndrome_history: np.ndarray  # per-block syndromes, level-major order
    block_probs: np.ndarray       # Born probability of each block's syndrome

    def history_bits(self, code) -> np.ndarray:
        m = code.num_generators
        bits = ((self.syndrome_history[:, None] >> np.arange(m)) & 1)
        return bits.reshape(-1).astype(np.uint8)


@dataclass
class BatchResult:
    level: int
    gammas: np.ndarray        # (N, 4, 4)
    weights: np.ndarray       # (N,)
    histories: np.ndarray     # (N, total blocks)
    block_probs: np.ndarray   # (N, total blocks)
    betas: list[float] = field(default_factory=list)


@dataclass
class LogicalEstimate:
    metric: str
    level: int
    n_samples: int
    mode: str
    avg_of_metric: float
    metric_of_avg: float
    variance: float
    convergence_trace: list[tuple[int, float]]


def _check_level(level: int):
    if not 1 <= level <= _MAX_LEVEL:
        raise ValueError(f"level must be in 1..{_MAX_LEVEL}")


def _clamp_metric(values: np.ndarray) -> np.ndarray:
    """Metric values are nonnegative up to roundoff; clip the dust."""
    values = np.asarray(values, dtype=float)
    if values.min() < -1e-10:
        raise ValueError(f"metric returned {values.min()}, below roundoff tolerance")
    return np.clip(values, 0.0, None)


def _sample_weight(probs, q, s, mode: str):
    if mode == "direct":
        return 1.0 if np.isscalar(s) else np.ones(np.shape(s))
    return probs[..., s] / q[..., s] if np.isscalar(s) else None


# ---------------------------------------------------------------------------
# single-sample recursion (no caching; cost scales with the block count)
# ---------------------------------------------------------------------------

def simulate_level(code, gamma0: np.ndarray, level: int,
                   rng: np.random.Generator,
                   sampler: ImportanceConfig = DIRECT,
                   dtype=np.float64) -> ConcatResult:
    """One syndrome-history sample of the level-`level` logical channel."""
    _check_level(level)
    gamma0 = np.asarray(gamma0, dtype=float)

    def run(lv: int) -> tuple[np.ndarray, float, list[list[int]], list[list[float]]]:
        if lv == 1:
            probs, gammas, _ = block_conditionals(BlockInput.iid(code, gamma0), dtype)
            q, _beta = importance_distribution(probs, sampler)
            s = int(np.searchsorted(np.cumsum(q), rng.random(), side="right")
                    .clip(0, code.num_syndromes - 1))
            w = 1.0 if sampler.mode == "direct" else float(probs[s] / q[s])
            return gammas[s], w, [[s]], [[float(probs[s])]]
        child = [run(lv - 1) for _ in range(code.n)]
        gam_in = np.stack([c[0] for c in child])
        probs, gammas, _ = block_conditionals(BlockInput(code, gam_in), dtype)
        q, _beta = importance_distribution(probs, sampler)
        s = int(np.searchsorted(np.cumsum(q), rng.random(), side="right")
                .clip(0, code.num_syndromes - 1))
        w = 1.0 if sampler.mode == "direct" else float(probs[s] / q[s])
        weight = w * float(np.prod([c[1] for c in child]))
        hist = [sum((c[2][k] for c in child), []) for k in range(lv - 1)] + [[s]]
        bp = [sum((c[3][k] for c in child), []) for k in range(lv - 1)] + [[float(probs[s])]]
        return gammas[s], weight, hist, bp

    gamma, weight, hist, bp = run(level)
    flat = np.array(sum(hist, []), dtype=np.int64)
    flat_p = np.array(sum(bp, []), dtype=float)
    return ConcatResult(level=level, gamma_logical=gamma, weight=weight,
                        syndrome_history=flat, block_probs=flat_p)


# ---------------------------------------------------------------------------
# vectorized sampler
# ---------------------------------------------------------------------------

def _draw_rows(q: np.ndarray, u: np.ndarray) -> np.ndarray:
    cum = np.cumsum(q, axis=1)
    return np.minimum((cum < u[:, None]).sum(axis=1), q.shape[1] - 1)


def simulate_batch(code, gamma0: np.ndarray, level: int, n_samples: int,
                   rng: np.random.Generator,
                   sampler: ImportanceConfig = DIRECT,
                   dtype=np.float64) -> BatchResult:
    """n_samples independent histories; all uniform variates are drawn up
    front in a fixed order so results do not depend on internal chunking."""
    _check_level(level)
    if n_samples < 1:
        raise ValueError("need n_samples >= 1")
    gamma0 = np.asarray(gamma0, dtype=float)
    bpl = blocks_per_level(code, level)
    total = sum(bpl)
    uniforms = rng.random((n_samples, total))

    probs1, gammas1, _ = block_conditionals(BlockInput.iid(code, gamma0), dtype)
    q1, _ = importance_distribution(probs1, sampler)
    cum1 = np.cumsum(q1)

    histories = np.empty((n_samples, total), dtype=np.int64)
    block_probs = np.empty((n_samples, total), dtype=float)
    weights = np.ones(n_samples)
    gammas = np.empty((n_samples, 4, 4))

    chunk = max(1, _ROWS_PER_CHUNK // max(bpl))
    for lo in range(0, n_samples, chunk):
        hi = min(lo + chunk, n_samples)
        nn = hi - lo
        nb1 = bpl[0]
        s = np.searchsorted(cum1, uniforms[lo:hi, :nb1], side="right")
        s = np.minimum(s, code.num_syndromes - 1)
        histories[lo:hi, :nb1] = s
        block_probs[lo:hi, :nb1] = probs1[s]
        w = np.ones(nn)
        if sampler.mode != "direct":
            w *= np.prod(probs1[s] / q1[s], axis=1)
        cur = gammas1[s]  # (nn, nb1, 4, 4)
        offset = nb1
        for k in range(1, level):
            nb = bpl[k]
            rows = cur.reshape(nn * nb, code.n, 4, 4)
            pb, gb, _ = block_conditionals_batch(code, rows, dtype)
            qb, _ = importance_distribution_batch(pb, sampler)
            u = uniforms[lo:hi, offset:offset + nb].reshape(nn * nb)
            sr = _draw_rows(qb, u)
            ridx = np.arange(nn * nb)
            histories[lo:hi, offset:offset + nb] = sr.reshape(nn, nb)
            block_probs[lo:hi, offset:offset + nb] = pb[ridx, sr].reshape(nn, nb)
            if sampler.mode != "direct":
                ratio = pb[ridx, sr] / qb[ridx, sr]
                w *= np.prod(ratio.reshape(nn, nb), axis=1)
            cur = gb[ridx, sr].reshape(nn, nb, 4, 4)
            offset += nb
        weights[lo:hi] = w
        gammas[lo:hi] = cur[:, 0]
    return BatchResult(level=level, gammas=gammas, weights=weights,
                       histories=histories, block_probs=block_probs)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def exact_level1(code, gamma0: np.ndarray, metric) -> LogicalEstimate:
    """Exhaustive enumeration of every level-1 syndrome: both averages exact."""
    probs, gammas, _ = block_conditionals(BlockInput.iid(code, np.asarray(gamma0, float)))
    values = _clamp_metric(evaluate_metric(metric, gammas))
    eq2 = float(probs @ values)
    mean_gamma = np.tensordot(probs, gammas, axes=([0], [0]))
    eq1 = float(max(evaluate_metric(metric, mean_gamma), 0.0))
    return LogicalEstimate(metric=str(metric), level=1, n_samples=len(probs),
                           mode="exhaustive", avg_of_metric=eq2,
                           metric_of_avg=eq1, variance=0.0,
                           convergence_trace=[(len(probs), eq2)])


def estimate(code, gamma0: np.ndarray, level: int, metric, n_samples: int,
             rng, sampler: ImportanceConfig = DIRECT,
             dtype=np.float64) -> LogicalEstimate:
    """Monte Carlo estimate of both logical-noise averages at a level."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    batch = simulate_batch(code, gamma0, level, n_samples, rng, sampler, dtype)
    values = _clamp_metric(evaluate_metric(metric, batch.gammas))
    eq2, trace = weighted_running_mean(values, batch.weights,
                                       trace_checkpoints(n_samples))
    wv = values * batch.weights
    variance = float(wv.var(ddof=1) / n_samples) if n_samples > 1 else float("inf")
    mean_gamma = np.tensordot(batch.weights, batch.gammas, axes=([0], [0])) / n_samples
    eq1 = float(evaluate_metric(metric, mean_gamma))
    return LogicalEstimate(metric=str(metric), level=level, n_samples=n_samples,
                           mode=sampler.mode, avg_of_metric=eq2,
                           metric_of_avg=eq1, variance=variance,
                           convergence_trace=trace)


def enumerate_level2(code, gamma0: np.ndarray, metric) -> tuple[float, float]:
    """Exact level-2 averages by enumeration over all syndrome histories.

    Cost is S^n level-2 block evaluations (S syndromes, n qubits), feasible
    only for the 3-qubit validation code; used as the correctness reference
    for the Monte Carlo estimators, decoder adaptivity included.
    """
    from itertools import product
    gamma0 = np.asarray(gamma0, dtype=float)
    probs1, gammas1, _ = block_conditionals(BlockInput.iid(code, gamma0))
    S = code.num_syndromes
    if S ** code.n > 100_000:
        raise ValueError("full level-2 enumeration is infeasible for this code")
    eq2 = 0.0
    avg_gamma = np.zeros((4, 4))
    for combo in product(range(S), repeat=code.n):
        w1 = float(np.prod(probs1[list(combo)]))
        if w1 == 0.0:
            continue
        gam_in = gammas1[list(combo)]
        p2, g2, _ = block_conditionals(BlockInput(code, gam_in))
        vals = np.asarray(evaluate_metric(metric, g2), dtype=float)
        eq2 += w1 * float(p2 @ vals)
        avg_gamma += w1 * np.tensordot(p2, g2, axes=([0], [0]))
    eq1 = float(evaluate_metric(metric, avg_gamma))
    return eq2, eq1
