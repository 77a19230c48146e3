"""Monte-Carlo latency and communication analysis.

Worker completion times are sampled iid from a pluggable model; each scheme's
latency on one sample is the stopping time of its decodability predicate over
the arrival order. Latency excludes decoding (the harness reports decode
overhead separately).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DominanceViolation, InvalidModelParams, NeverDecodable
from .field import FieldCtx
from .matrixcore import ProblemShape
from .schemes import Scheme, get_scheme

CCDF_GRID_POINTS = 200


@dataclass(frozen=True)
class LatencyModel:
    """iid per-worker completion-time model."""

    kind: str = "shifted_exponential"
    shift: float = 1.0
    rate: float = 1.0
    value: float = 1.0
    samples: tuple = ()

    def __post_init__(self):
        if self.kind == "shifted_exponential":
            if self.shift < 0 or self.rate <= 0:
                raise InvalidModelParams("need shift >= 0 and rate > 0")
        elif self.kind == "deterministic":
            if self.value < 0:
                raise InvalidModelParams("deterministic time must be >= 0")
        elif self.kind == "empirical":
            if not self.samples or any(s < 0 for s in self.samples):
                raise InvalidModelParams("empirical model needs nonnegative samples")
        else:
            raise InvalidModelParams(f"unknown latency model kind {self.kind!r}")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "shifted_exponential":
            return self.shift + rng.exponential(1.0 / self.rate, size=n)
        if self.kind == "deterministic":
            return np.full(n, float(self.value))
        return rng.choice(np.asarray(self.samples, dtype=float), size=n, replace=True)


def sample_latency(model: LatencyModel, n: int, seed: int, trials: int) -> np.ndarray:
    """trials x n matrix of worker completion times, reproducible by seed."""
    if trials < 1 or n < 1:
        raise InvalidModelParams("need trials >= 1 and n >= 1")
    rng = np.random.default_rng(seed)
    return np.vstack([model.sample(n, rng) for _ in range(trials)])


def scheme_latency(scheme: Scheme, shape: ProblemShape, times) -> float:
    """Earliest t at which the responded set {i : T_i <= t} is decodable."""
    times = np.asarray(times, dtype=float)
    active = min(len(times), scheme.num_shares(shape))
    order = sorted(range(active), key=lambda i: (times[i], i))
    responded = set()
    for i in order:
        responded.add(i)
        if scheme.decodable(responded, shape):
            return float(times[i])
    raise NeverDecodable(f"{scheme.name} cannot decode even with all workers")


def scheme_latency_batch(scheme: Scheme, shape: ProblemShape, samples: np.ndarray) -> np.ndarray:
    """Per-trial latencies; vectorized for the order-statistic schemes."""
    samples = np.asarray(samples, dtype=float)
    if scheme.name == "poly":
        k = scheme.threshold(shape)
        return np.sort(samples, axis=1)[:, k - 1]
    if scheme.name == "uncoded":
        return samples[:, : shape.m * shape.n].max(axis=1)
    if scheme.name == "mds1d":
        g = scheme.group_size(shape)
        groups = samples[:, : shape.N].reshape(samples.shape[0], shape.n, g)
        # each group needs its m-th fastest; the slowest group gates the decode
        kth = np.sort(groups, axis=2)[:, :, shape.m - 1]
        return kth.max(axis=1)
    # Generic schemes: the responded set grows with t and decodability is
    # monotone, so binary-search the arrival prefix per trial.
    out = np.empty(samples.shape[0])
    active = min(samples.shape[1], scheme.num_shares(shape))
    for row_idx in range(samples.shape[0]):
        times = samples[row_idx]
        order = sorted(range(active), key=lambda i: (times[i], i))
        lo, hi = 1, active
        if not scheme.decodable(set(order), shape):
            raise NeverDecodable(f"{scheme.name} cannot decode even with all workers")
        while lo < hi:
            mid = (lo + hi) // 2
            if scheme.decodable(set(order[:mid]), shape):
                hi = mid
            else:
                lo = mid + 1
        out[row_idx] = times[order[lo - 1]]
    return out


def ccdf_table(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Empirical P(T > t) on the given grid."""
    samples = np.sort(np.asarray(samples, dtype=float))
    n = len(samples)
    idx = np.searchsorted(samples, grid, side="right")
    return (n - idx) / n


def ccdf_grid(pooled: np.ndarray, points: int = CCDF_GRID_POINTS) -> np.ndarray:
    """Evenly spaced grid between the pooled minimum and p99.9."""
    lo = float(np.min(pooled))
    hi = float(np.percentile(pooled, 99.9))
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, points)


def comm_load_bits(results_used: int, shape: ProblemShape, ctx: FieldCtx) -> float:
    """Bits received by the master: used results x block elements x log2(q)."""
    elems = results_used * shape.block_rows * shape.block_cols
    return elems * math.log2(ctx.q)


def comm_load_analytic(name: str, shape: ProblemShape, ctx: FieldCtx) -> float:
    """Worst-case load: the scheme's recovery threshold worth of results."""
    return comm_load_bits(get_scheme(name, ctx).threshold(shape), shape, ctx)


@dataclass
class DominanceReport:
    shape: ProblemShape
    trials: int
    seed: int
    latencies: dict = field(default_factory=dict)   # scheme -> np.ndarray
    max_violation: float = 0.0
    violations: int = 0
    grid: np.ndarray = None
    ccdfs: dict = field(default_factory=dict)       # scheme -> np.ndarray
    means: dict = field(default_factory=dict)
    p95: dict = field(default_factory=dict)
    p99: dict = field(default_factory=dict)
    comm_bits: dict = field(default_factory=dict)


def dominance_check(
    scheme_names: list,
    model: LatencyModel,
    shape: ProblemShape,
    trials: int,
    seed: int,
    ctx: FieldCtx = None,
    raise_on_violation: bool = True,
) -> DominanceReport:
    """Per-sample check of the polynomial code's latency dominance.

    Every scheme's latency is computed on the SAME completion-time sample as
    the polynomial code's; any strictly smaller value is a violation.
    """
    ctx = ctx or FieldCtx()
    if "poly" not in scheme_names:
        scheme_names = ["poly"] + list(scheme_names)
    samples = sample_latency(model, shape.N, seed, trials)
    report = DominanceReport(shape=shape, trials=trials, seed=seed)
    for name in scheme_names:
        scheme = get_scheme(name, ctx)
        scheme.validate(shape)
        report.latencies[name] = scheme_latency_batch(scheme, shape, samples)
    poly_lat = report.latencies["poly"]
    for name, lat in report.latencies.items():
        diff = poly_lat - lat
        report.max_violation = max(report.max_violation, float(diff.max(initial=0.0)))
        report.violations += int((diff > 0).sum())
    if report.violations and raise_on_violation:
        raise DominanceViolation(
            f"{report.violations} samples beat poly (max gap {report.max_violation})"
        )
    pooled = np.concatenate(list(report.latencies.values()))
    report.grid = ccdf_grid(pooled)
    for name, lat in report.latencies.items():
        report.ccdfs[name] = ccdf_table(lat, report.grid)
        report.means[name] = float(lat.mean())
        report.p95[name] = float(np.percentile(lat, 95))
        report.p99[name] = float(np.percentile(lat, 99))
        report.comm_bits[name] = comm_load_analytic(name, shape, ctx)
    return report
