"""Reproduction driver: ensemble generation, simulation campaigns, metric
tables, scatter/histogram/convergence exports, and the ML dataset handoff.

All outputs are JSON-lines (one record per line) except histograms (single
JSON object).  Files are written atomically (temp file + rename) and
campaigns resume by skipping channels whose results already exist under
the same configuration; a changed configuration is refused.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .channels import (Channel, ChannelEnsemble, channel_from_json,
                       channel_to_json, depolarizing, load_channels, rotation,
                       save_channels)
from .concat import LogicalEstimate, estimate, exact_level1
from .metrics import MetricKind, get_metric
from .pauli import steane_code
from .sampling import ImportanceConfig, outlier_histogram
from . import __version__

CONFIG_VERSION = 1
WORKERS_ENV = "STEANESIM_WORKERS"


@dataclass
class CampaignConfig:
    count: int
    deltas: list[float]
    master_seed: int
    levels: list[int] = field(default_factory=lambda: [1, 2])
    metrics: list[str] = field(default_factory=lambda: ["infidelity"])
    physical_metrics: list[str] = field(default_factory=lambda: [m.value for m in MetricKind])
    sampler_mode: str = "direct"
    n_samples: int = 1000
    level1_exhaustive: bool = True
    averaging: str = "eq2"  # reported scalar: eq2 (default) or eq1
    out_dir: str = "campaign"
    version: int = CONFIG_VERSION

    def __post_init__(self):
        if self.count < 1 or self.n_samples < 1:
            raise ValueError("count and n_samples must be positive")
        if self.averaging not in ("eq1", "eq2"):
            raise ValueError("averaging must be eq1 or eq2")
        ImportanceConfig(self.sampler_mode if self.sampler_mode != "exhaustive"
                         else "direct")
        for m in list(self.metrics) + list(self.physical_metrics):
            MetricKind(m)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CampaignConfig":
        return cls(**json.loads(text))


def atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_jsonl(path: str) -> list[dict]:
    """Read records, silently dropping a truncated trailing line."""
    out = []
    if not os.path.exists(path):
        return out
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError:
                break
    return out


def write_jsonl(path: str, records: list[dict]):
    atomic_write(path, "".join(json.dumps(r) + "\n" for r in records))


# ---------------------------------------------------------------------------
# ensemble generation
# ---------------------------------------------------------------------------

def gen_ensemble(count: int, deltas: list[float], master_seed: int,
                 out_path: str) -> list[Channel]:
    """`count` channels per delta; per-channel seeds derive from the master
    seed and a global index, so the file is reproducible bit-for-bit."""
    channels = []
    idx = 0
    for delta in deltas:
        ens = []
        for _ in range(count):
            from .channels import channel_seed, random_channel
            ens.append(random_channel(delta, channel_seed(master_seed, idx)))
            idx += 1
        channels.extend(ens)
    save_channels(out_path, channels)
    return channels


# ---------------------------------------------------------------------------
# simulation campaign
# ---------------------------------------------------------------------------

def _estimate_record(args):
    gamma16, seed, level, cfg_dict = args
    cfg = CampaignConfig(**cfg_dict)
    gamma = np.array(gamma16, dtype=float).reshape(4, 4)
    code = steane_code()
    lines = []
    for metric in cfg.metrics:
        if level == 1 and cfg.level1_exhaustive:
            est = exact_level1(code, gamma, metric)
        else:
            sampler = ImportanceConfig(cfg.sampler_mode)
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=(cfg.master_seed, int(seed), level)))
            est = estimate(code, gamma, level, metric, cfg.n_samples, rng, sampler)
        flagged = (est.mode == "direct"
                   and est.avg_of_metric < 1.0 / max(est.n_samples, 1))
        lines.append({
            "seed": int(seed), "level": level, "metric": metric,
            "n_samples": est.n_samples, "mode": est.mode,
            "avg_of_metric": est.avg_of_metric,
            "metric_of_avg": est.metric_of_avg,
            "estimate": est.avg_of_metric if cfg.averaging == "eq2" else est.metric_of_avg,
            "variance": est.variance,
            "trace": [[int(n), float(v)] for n, v in est.convergence_trace],
            "resolution_limited": bool(flagged),
        })
    return seed, level, lines


def run_simulate(cfg: CampaignConfig, channels_path: str):
    """Simulate every channel at every configured level, resumably."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    cfg_path = os.path.join(cfg.out_dir, "campaign.json")
    if os.path.exists(cfg_path):
        existing = open(cfg_path).read()
        if existing != cfg.to_json():
            raise RuntimeError(
                "output directory holds a campaign with a different "
                "configuration; refusing to resume")
    else:
        atomic_write(cfg_path, cfg.to_json())

    channels = load_channels(channels_path)
    results = {lv: read_jsonl(os.path.join(cfg.out_dir, f"results_l{lv}.jsonl"))
               for lv in cfg.levels}
    done = {lv: {r["seed"] for r in results[lv]} for lv in cfg.levels}

    tasks = []
    for ch in channels:
        for lv in cfg.levels:
            if ch.seed not in done[lv]:
                tasks.append((list(map(float, ch.gamma.ravel())), ch.seed, lv,
                              dataclasses.asdict(cfg)))

    workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers > 1 and len(tasks) > 1:
        import multiprocessing as mp
        with mp.Pool(workers) as pool:
            outputs = list(pool.imap(_estimate_record, tasks, chunksize=1))
    else:
        outputs = [_estimate_record(t) for t in tasks]

    for _seed, lv, lines in outputs:
        results[lv].extend(lines)
    for lv in cfg.levels:
        results[lv].sort(key=lambda r: (r["seed"], r["metric"]))
        write_jsonl(os.path.join(cfg.out_dir, f"results_l{lv}.jsonl"), results[lv])
    return results


def run_physical_metrics(channels: list[Channel], metrics: list[str],
                         out_path: str | None = None) -> list[dict]:
    records = []
    for ch in channels:
        for m in metrics:
            value = float(get_metric(m)(ch))
            records.append({"seed": ch.seed, "metric": m, "value": value})
    if out_path:
        write_jsonl(out_path, records)
    return records


def export_scatter(cfg: CampaignConfig, channels_path: str):
    """One file per (physical metric, level): x = physical strength,
    y = logical estimate; every record carries all physical metrics."""
    channels = load_channels(channels_path)
    phys = {}
    for ch in channels:
        phys[ch.seed] = {m: float(get_metric(m)(ch)) for m in cfg.physical_metrics}
    for lv in cfg.levels:
        results = read_jsonl(os.path.join(cfg.out_dir, f"results_l{lv}.jsonl"))
        by_seed = {}
        for r in results:
            by_seed.setdefault(r["seed"], {})[r["metric"]] = r
        for pm in cfg.physical_metrics:
            records = []
            for ch in channels:
                row = by_seed.get(ch.seed, {})
                for metric, r in sorted(row.items()):
                    records.append({
                        "seed": ch.seed, "delta": ch.delta,
                        "x_metric": pm, "x": phys[ch.seed][pm],
                        "y_metric": metric, "level": lv, "y": r["estimate"],
                        "resolution_limited": r["resolution_limited"],
                        "physical": phys[ch.seed],
                    })
            write_jsonl(os.path.join(cfg.out_dir, f"scatter_{pm}_l{lv}.jsonl"),
                        records)


def reference_curves(cfg: CampaignConfig, params: list[float] | None = None,
                     family: str = "depolarizing") -> list[dict]:
    """Logical-vs-physical points for the named reference families."""
    if params is None:
        params = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2]
    code = steane_code()
    family_id = {"depolarizing": 0, "rotation": 1}[family]
    make = {"depolarizing": depolarizing, "rotation": rotation}[family]
    records = []
    for p in params:
        ch = make(p)
        rec = {"family": family, "param": p,
               "physical": {m: float(get_metric(m)(ch)) for m in cfg.physical_metrics},
               "logical": {}}
        for lv in cfg.levels:
            if lv == 1 and cfg.level1_exhaustive:
                est = exact_level1(code, ch.gamma, cfg.metrics[0])
            else:
                rng = np.random.default_rng(np.random.SeedSequence(
                    entropy=(cfg.master_seed, family_id, int(p * 1e9), lv)))
                est = estimate(code, ch.gamma, lv, cfg.metrics[0], cfg.n_samples,
                               rng, ImportanceConfig(cfg.sampler_mode))
            rec["logical"][str(lv)] = (est.avg_of_metric if cfg.averaging == "eq2"
                                       else est.metric_of_avg)
        records.append(rec)
    write_jsonl(os.path.join(cfg.out_dir, f"reference_{family}.jsonl"), records)
    return records


def export_ml(cfg: CampaignConfig, channels_path: str, out_path: str):
    """Join channels, physical metrics, and per-level logical estimates into
    the regression dataset: one record per channel."""
    channels = load_channels(channels_path)
    per_level = {}
    for lv in cfg.levels:
        rows = read_jsonl(os.path.join(cfg.out_dir, f"results_l{lv}.jsonl"))
        per_level[lv] = {r["seed"]: r for r in rows if r["metric"] == cfg.metrics[0]}
    records = []
    for ch in channels:
        rec = {
            "seed": ch.seed, "delta": ch.delta,
            "gamma": [float(v) for v in ch.gamma.ravel()],
            "physical": {m: float(get_metric(m)(ch)) for m in cfg.physical_metrics},
            "levels": {},
        }
        for lv in cfg.levels:
            r = per_level[lv].get(ch.seed)
            if r is not None:
                rec["levels"][str(lv)] = {
                    "estimate": r["estimate"],
                    "variance": r["variance"],
                    "n_samples": r["n_samples"],
                    "mode": r["mode"],
                    "resolution_limited": r["resolution_limited"],
                }
        records.append(rec)
    write_jsonl(out_path, records)
    return records


def convergence_trace(gamma: np.ndarray, level: int, n_samples: int,
                      modes: list[str], master_seed: int,
                      out_path: str | None = None,
                      metric: str = "infidelity", stride: int = 1) -> list[dict]:
    """Dense running-estimate traces for the requested sampler modes."""
    from .concat import simulate_batch
    from .metrics import evaluate_metric
    code = steane_code()
    records = []
    for i, mode in enumerate(modes):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=(master_seed, level, i)))
        batch = simulate_batch(code, np.asarray(gamma, float), level, n_samples,
                               rng, ImportanceConfig(mode))
        vals = np.asarray(evaluate_metric(metric, batch.gammas)) * batch.weights
        running = np.cumsum(vals) / np.arange(1, n_samples + 1)
        for n in range(stride, n_samples + 1, stride):
            records.append({"n": n, "estimate": float(running[n - 1]), "mode": mode})
    if out_path:
        write_jsonl(out_path, records)
    return records
