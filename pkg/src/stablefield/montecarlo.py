"""Monte Carlo engine: replicate the weighted innovation sum, compare the
normalized draws against the limit law, and estimate the local-limit
functionals.

Reproducibility contract: replicate r draws from PCG64 seeded with

    seed_r = splitmix64((master_seed + (r + 1) * 0x9E3779B97F4A7C15) mod 2^64)

so every replicate's stream is a pure function of (master_seed, r) and the
assembled sample vector is bitwise independent of how replicates are split
across workers.
"""

from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DomainError, NumericError
from .innovations import InnovationModel
from .weights import WeightField

__all__ = ["SimPlan", "SimResult", "TestFunction", "TEST_FUNCTIONS",
           "splitmix64", "replicate_seed", "simulate", "ks_against",
           "llt_estimate", "interval_prob", "write_samples", "read_samples"]

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1

MAGIC = b"SFLD"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQdd")


def splitmix64(x: int) -> int:
    """The 64-bit finalizing mixer of SplitMix64."""
    x &= _MASK
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK
    return (x ^ (x >> 31)) & _MASK


def replicate_seed(master_seed: int, r: int) -> int:
    return splitmix64((master_seed + (r + 1) * _GOLDEN) & _MASK)


@dataclass(frozen=True, eq=False)
class SimPlan:
    """One simulation campaign: field, innovations, normalizer, replicates.

    Construction refuses fields whose truncated tail energy at B_n exceeds
    max_tail_energy: simulating such a field would silently drop a
    non-negligible share of the limit variance.
    """

    field: WeightField
    innovations: InnovationModel
    B_n: float
    replicates: int
    master_seed: int
    max_tail_energy: float = 1e-3

    def __post_init__(self):
        if self.replicates < 1:
            raise DomainError("need at least one replicate")
        if self.B_n <= 0:
            raise DomainError("normalizer must be positive")
        if self.B_n >= 1.0:
            omitted = self.field.tail_energy_at(self.B_n)
            if omitted > self.max_tail_energy:
                raise DomainError(
                    f"field omits up to {omitted:.3g} normalized tail energy "
                    f"(cap {self.max_tail_energy:.3g}); enlarge the window"
                )


@dataclass
class SimResult:
    """Normalized samples plus whatever diagnostics were requested."""

    samples: np.ndarray          # finite values of S_n / B_n
    n_excluded: int
    ks_distance: float | None = None
    llt_estimates: list = dc_field(default_factory=list)
    interval_probs: list = dc_field(default_factory=list)


def _simulate_range(plan: SimPlan, lo: int, hi: int) -> np.ndarray:
    weights = plan.field.values.ravel()
    out = np.empty(hi - lo)
    # heavy tails legitimately overflow on occasion; the non-finite slot is
    # flagged and excluded downstream rather than treated as an error
    with np.errstate(over="ignore", invalid="ignore"):
        for r in range(lo, hi):
            rng = np.random.Generator(
                np.random.PCG64(replicate_seed(plan.master_seed, r))
            )
            draws = plan.innovations.sample(rng, weights.size)
            out[r - lo] = weights @ draws
    return out


def _worker_count(workers) -> int:
    env = os.environ.get("STABLEFIELD_THREADS")
    cap = max(1, int(env)) if env else None
    if workers is not None:
        w = max(1, int(workers))
        return min(w, cap) if cap else w
    return cap or 1


def simulate(plan: SimPlan, workers: int | None = None) -> np.ndarray:
    """Raw replicate sums (one slot per replicate, order fixed by index).

    Non-finite outcomes stay in their slots; downstream statistics exclude
    and count them.  Deterministic for a given plan regardless of workers.
    """
    R = plan.replicates
    w = _worker_count(workers)
    if w == 1 or R < 2 * w:
        return _simulate_range(plan, 0, R)
    bounds = np.linspace(0, R, w + 1, dtype=int)
    out = np.empty(R)
    with ProcessPoolExecutor(max_workers=w) as pool:
        futures = [
            pool.submit(_simulate_range, plan, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
        ]
        for (lo, hi), fut in zip(zip(bounds[:-1], bounds[1:]), futures):
            out[lo:hi] = fut.result()
    return out


def _finite(samples):
    mask = np.isfinite(samples)
    return samples[mask], int(np.sum(~mask))


def ks_against(samples, law) -> float:
    """sup_x |ECDF(x) - CDF(x)| over the sample points."""
    finite, _ = _finite(np.asarray(samples, dtype=float))
    n = finite.size
    if n < 100:
        raise DomainError(f"KS needs at least 100 samples, got {n}")
    xs = np.sort(finite)
    cdf = law.cdf_batch(xs)
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(i / n - cdf, cdf - (i - 1) / n)))


@dataclass(frozen=True)
class TestFunction:
    """Continuous compactly supported test function with known integral."""

    name: str
    fn: object
    integral: float
    radius: float

    def __call__(self, x):
        return self.fn(x)


def _tent(x):
    return np.maximum(0.0, 1.0 - np.abs(x))


def _smooth_box(x):
    ax = np.abs(x)
    ramp = 0.5 * (1.0 + np.cos(np.pi * (ax - 0.5) / 0.5))
    return np.where(ax <= 0.5, 1.0, np.where(ax <= 1.0, ramp, 0.0))


TEST_FUNCTIONS = {
    "tent": TestFunction("tent", _tent, 1.0, 1.0),
    "smoothbox": TestFunction("smoothbox", _smooth_box, 1.5, 1.0),
}


def tabulated_test_function(xs, ys) -> TestFunction:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
        raise DomainError("tabulated m needs matching 1-d grids")
    if ys[0] != 0.0 or ys[-1] != 0.0:
        raise DomainError("tabulated m must vanish at its support ends")
    integral = float(np.trapezoid(ys, xs))
    radius = float(max(abs(xs[0]), abs(xs[-1])))
    fn = lambda x: np.interp(x, xs, ys, left=0.0, right=0.0)
    return TestFunction("tabulated", fn, integral, radius)


def llt_estimate(plan: SimPlan, law, m: TestFunction, u_list,
                 samples=None, workers=None) -> list[dict]:
    """Rows B_n * mean m(S_n + u) vs the density target, one per u."""
    if isinstance(m, str):
        m = TEST_FUNCTIONS[m]
    raw = simulate(plan, workers) if samples is None else np.asarray(samples)
    finite, excluded = _finite(raw)
    n = finite.size
    if n == 0:
        raise NumericError("no finite replicates to average")
    rows = []
    for u in u_list:
        vals = m(finite + u)
        est = plan.B_n * float(np.mean(vals))
        se = plan.B_n * float(np.std(vals, ddof=1)) / math.sqrt(n)
        target = law.pdf(-u / plan.B_n) * m.integral
        rows.append({
            "u": float(u),
            "m": m.name,
            "value": est,
            "target": target,
            "std_err": se,
            "n_excluded": excluded,
        })
    return rows


def interval_prob(plan: SimPlan, law, a: float, b: float,
                  samples=None, workers=None) -> dict:
    """Row B_n * P(a < S_n <= b) vs the flat-density target f(0)(b-a)."""
    if not a < b:
        raise DomainError("need a < b")
    raw = simulate(plan, workers) if samples is None else np.asarray(samples)
    finite, excluded = _finite(raw)
    n = finite.size
    if n == 0:
        raise NumericError("no finite replicates to count")
    p = float(np.mean((finite > a) & (finite <= b)))
    est = plan.B_n * p
    se = plan.B_n * np.sqrt(max(p * (1.0 - p), 1.0 / n) / n)
    target = law.pdf(0.0) * (b - a)
    return {
        "a": float(a),
        "b": float(b),
        "value": est,
        "target": target,
        "std_err": float(se),
        "noise_dominated": bool(se > est),
        "n_excluded": excluded,
    }


def summarize(plan: SimPlan, law, m=None, u_list=(), intervals=(),
              workers=None) -> SimResult:
    """Run the plan once and collect every requested statistic."""
    raw = simulate(plan, workers)
    finite, excluded = _finite(raw)
    result = SimResult(samples=finite / plan.B_n, n_excluded=excluded)
    if finite.size >= 100:
        result.ks_distance = ks_against(result.samples, law)
    if m is not None and len(u_list):
        result.llt_estimates = llt_estimate(plan, law, m, u_list, samples=raw)
    for a, b in intervals:
        result.interval_probs.append(
            interval_prob(plan, law, float(a), float(b), samples=raw)
        )
    return result


def write_samples(path, samples, B_n: float, alpha: float) -> None:
    """Spill raw samples to the little-endian binary column format."""
    arr = np.asarray(samples, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, arr.size, B_n, alpha))
        fh.write(arr.tobytes())


def read_samples(path) -> tuple[np.ndarray, dict]:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        magic, version, count, B_n, alpha = _HEADER.unpack(head)
        if magic != MAGIC:
            raise DomainError("not a stablefield sample file")
        if version != FORMAT_VERSION:
            raise DomainError(f"unsupported sample-file version {version}")
        data = np.frombuffer(fh.read(8 * count), dtype="<f8")
        if data.size != count:
            raise DomainError("sample file truncated")
    return data.copy(), {"R": count, "B_n": B_n, "alpha": alpha}
