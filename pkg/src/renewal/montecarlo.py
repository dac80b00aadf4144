"""Monte Carlo estimation of draw counts, stopped sums, and overshoots.

Paths are simulated in vectorized blocks: each round draws one uniform per
still-active path, applies the transform, and retires paths whose running
sum exceeded the threshold.  Randomness comes from the counter-based
Philox generator keyed by (seed, worker index), so every worker owns an
independent, reproducible substream: results are bit-identical for
identical (seed, samples, t, transform, worker count) regardless of how
the workers are scheduled.  They may differ across worker counts, because
the sample split changes which substream serves which path.

Sums of the integer draw counts are accumulated exactly (integer
arithmetic), float accumulators are combined in a fixed block-then-worker
order, and thread workers never share state, which is what makes the
bit-identical guarantee hold.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bijections import (
    BijectionSpec,
    ConvergenceError,
    DomainError,
    BUILTIN_TRANSFORMS,
    asymptotic_params,
    integrate,
)

__all__ = [
    "SimEstimate",
    "OvershootHistogram",
    "sample_k",
    "estimate_n",
    "estimate_stopped_sum",
    "overshoot_histogram",
    "paired_domination",
    "chernoff_bound",
    "k_concentration_check",
    "limit_overshoot_bin_probs",
    "estimate_payload",
    "histogram_payload",
]

_MASK64 = (1 << 64) - 1
_BLOCK = 1 << 20
_DRAW_CAP = 10**9


def _stream(seed: int, worker: int) -> np.random.Generator:
    """Philox stream for one worker, keyed by (seed, worker index)."""
    key = np.array([seed & _MASK64, worker & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _check_common(t, samples, seed, workers):
    t = float(t)
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    if not (isinstance(samples, int) and samples >= 1):
        raise DomainError(f"samples must be a positive integer, got {samples!r}")
    if not (isinstance(seed, int) and seed >= 0):
        raise DomainError(f"seed must be a nonnegative integer, got {seed!r}")
    if not (isinstance(workers, int) and 1 <= workers <= 256):
        raise DomainError(f"workers must be an integer in [1, 256], got {workers!r}")
    return t


@dataclass(frozen=True)
class SimEstimate:
    """Sample mean with its standard error for one simulated statistic."""

    mean: float
    std_error: float
    samples: int
    seed: int
    t: float
    spec: str

    def __post_init__(self):
        if self.std_error < 0.0 or not math.isfinite(self.mean):
            raise DomainError("estimate must have finite mean and std_error >= 0")


@dataclass(frozen=True)
class OvershootHistogram:
    """Normalized histogram of the amount by which the stopped sum overshoots t."""

    bin_edges: np.ndarray
    densities: np.ndarray
    samples: int
    t: float

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        dens = np.asarray(self.densities, dtype=float)
        if edges.ndim != 1 or edges.shape[0] != dens.shape[0] + 1:
            raise DomainError("bin_edges must have one more entry than densities")
        if edges[0] != 0.0 or edges[-1] != 1.0:
            raise DomainError("bin_edges must span [0, 1]")
        mass = float(np.dot(dens, np.diff(edges)))
        if abs(mass - 1.0) > 1e-12:
            raise DomainError(
                f"densities must integrate to 1 within 1e-12, got {mass!r} "
                f"(an overshoot sample escaped (0, 1])"
            )
        edges = edges.copy()
        dens = dens.copy()
        edges.setflags(write=False)
        dens.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "densities", dens)


def sample_k(transform: BijectionSpec, t: float, rng: np.random.Generator):
    """Draw one path: the draw count and overshoot for a single threshold crossing."""
    t = float(t)
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    total = 0.0
    k = 0
    while total <= t:
        k += 1
        if k > _DRAW_CAP:
            raise ConvergenceError(
                f"path exceeded {_DRAW_CAP} draws; transform increments are "
                f"effectively zero"
            )
        total += float(transform._f(np.asarray(rng.random())))
    return k, total - t


def _run_block(transform, t, n, rng):
    """Simulate n paths; returns (draw counts, overshoots)."""
    idx = np.arange(n)
    sums = np.zeros(n)
    k = np.zeros(n, dtype=np.int64)
    over = np.zeros(n)
    r = 0
    drawn = 0
    while idx.size:
        r += 1
        drawn += idx.size
        if drawn > _DRAW_CAP:
            raise ConvergenceError(
                f"block exceeded {_DRAW_CAP} total draws; transform increments "
                f"are effectively zero"
            )
        sums += transform._f(rng.random(idx.size))
        done = sums > t
        if done.any():
            hit = idx[done]
            k[hit] = r
            over[hit] = sums[done] - t
            keep = ~done
            idx = idx[keep]
            sums = sums[keep]
    return k, over


def _worker_counts(samples: int, workers: int):
    base, rem = divmod(samples, workers)
    return [base + (1 if i < rem else 0) for i in range(workers)]


def _tally_worker(transform, t, count, rng, bins, center, radius):
    sum_k = 0
    sum_k2 = 0
    sum_o = 0.0
    sum_o2 = 0.0
    hist = np.zeros(bins, dtype=np.int64) if bins else None
    far = 0
    done = 0
    while done < count:
        n = min(_BLOCK, count - done)
        k, o = _run_block(transform, t, n, rng)
        sum_k += int(k.sum())
        sum_k2 += int(np.dot(k, k))
        sum_o += float(o.sum())
        sum_o2 += float(np.dot(o, o))
        if bins:
            hist += np.histogram(o, bins=bins, range=(0.0, 1.0))[0]
        if center is not None:
            far += int(np.count_nonzero(np.abs(k - 1 - center) > radius))
        done += n
    return sum_k, sum_k2, sum_o, sum_o2, hist, far


def _tally(transform, t, samples, seed, workers, bins=None, center=None, radius=None):
    """Run all workers and merge their accumulators in worker order."""
    counts = _worker_counts(samples, workers)
    jobs = [(i, c) for i, c in enumerate(counts) if c > 0]
    if workers == 1 or len(jobs) == 1:
        results = [
            _tally_worker(transform, t, c, _stream(seed, i), bins, center, radius)
            for i, c in jobs
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _tally_worker, transform, t, c, _stream(seed, i), bins, center, radius
                )
                for i, c in jobs
            ]
            results = [f.result() for f in futures]
    sum_k = sum(r[0] for r in results)
    sum_k2 = sum(r[1] for r in results)
    sum_o = 0.0
    sum_o2 = 0.0
    for r in results:
        sum_o += r[2]
        sum_o2 += r[3]
    hist = None
    if bins:
        hist = np.zeros(bins, dtype=np.int64)
        for r in results:
            hist += r[4]
    far = sum(r[5] for r in results)
    return sum_k, sum_k2, sum_o, sum_o2, hist, far


def estimate_n(
    transform: BijectionSpec, t: float, samples: int, seed: int = 42, workers: int = 1
) -> SimEstimate:
    """Estimate the expected draw count at threshold t.

    The draw-count sums are integers, accumulated exactly, so the mean and
    standard error are deterministic down to the final float divisions.
    At t = 0 every path stops on its first draw and the estimate is
    exactly 1.0 with zero standard error.
    """
    t = _check_common(t, samples, seed, workers)
    sum_k, sum_k2, _, _, _, _ = _tally(transform, t, samples, seed, workers)
    mean = sum_k / samples
    if samples > 1:
        # exact integer arithmetic up to the final division
        var = (samples * sum_k2 - sum_k * sum_k) / (samples * (samples - 1))
        var = max(var, 0.0)
    else:
        var = 0.0
    return SimEstimate(
        mean=mean,
        std_error=math.sqrt(var / samples),
        samples=samples,
        seed=seed,
        t=t,
        spec=transform.label,
    )


def estimate_stopped_sum(
    transform: BijectionSpec, t: float, samples: int, seed: int = 42, workers: int = 1
) -> SimEstimate:
    """Estimate the mean stopped sum (threshold plus overshoot).

    With the same (seed, samples, workers) this walks the same paths as
    ``estimate_n``, so the pair can be used to test the proportionality of
    stopped sum and draw count without an independent-run penalty.  For
    large t the mean minus t approaches the limiting mean overshoot c.
    """
    t = _check_common(t, samples, seed, workers)
    _, _, sum_o, sum_o2, _, _ = _tally(transform, t, samples, seed, workers)
    mean_o = sum_o / samples
    if samples > 1:
        var = (sum_o2 - sum_o * mean_o) / (samples - 1)
        var = max(var, 0.0)
    else:
        var = 0.0
    return SimEstimate(
        mean=t + mean_o,
        std_error=math.sqrt(var / samples),
        samples=samples,
        seed=seed,
        t=t,
        spec=transform.label,
    )


def overshoot_histogram(
    transform: BijectionSpec,
    t: float,
    samples: int,
    bins: int = 50,
    seed: int = 42,
    workers: int = 1,
) -> OvershootHistogram:
    """Histogram of overshoot samples on [0, 1], normalized to unit mass.

    Overshoots always land in (0, 1] because increments never exceed 1.
    The limiting shape is only reached for large t (t >= 20 is a sound
    choice); small t leaves visible transient bias.
    """
    t = _check_common(t, samples, seed, workers)
    if not (isinstance(bins, int) and bins >= 10):
        raise DomainError(f"bins must be an integer >= 10, got {bins!r}")
    _, _, _, _, hist, _ = _tally(transform, t, samples, seed, workers, bins=bins)
    edges = np.linspace(0.0, 1.0, bins + 1)
    densities = hist * (bins / samples)
    return OvershootHistogram(bin_edges=edges, densities=densities, samples=samples, t=t)


def _paired_block(t, n, rng, f_base, f_dominating):
    """Coupled paths driven by shared uniforms; returns count of order violations.

    Both accumulators see the same uniform draw each round; the dominating
    transform (pointwise >= the base on [0, 1]) must never need more draws.
    Returns how many of the n paths violated that (expected: none).
    """
    s1 = np.zeros(n)
    s2 = np.zeros(n)
    k1 = np.zeros(n, dtype=np.int64)
    k2 = np.zeros(n, dtype=np.int64)
    done1 = np.zeros(n, dtype=bool)
    done2 = np.zeros(n, dtype=bool)
    violations = 0
    drawn = 0
    while n:
        drawn += n
        if drawn > _DRAW_CAP:
            raise ConvergenceError(f"coupled block exceeded {_DRAW_CAP} draws")
        u = rng.random(n)
        act1 = ~done1
        s1[act1] += f_base(u[act1])
        k1[act1] += 1
        done1 = s1 > t
        act2 = ~done2
        s2[act2] += f_dominating(u[act2])
        k2[act2] += 1
        done2 = s2 > t
        both = done1 & done2
        if both.any():
            violations += int(np.count_nonzero(k2[both] > k1[both]))
            keep = ~both
            s1, s2 = s1[keep], s2[keep]
            k1, k2 = k1[keep], k2[keep]
            done1, done2 = done1[keep], done2[keep]
            n = s1.shape[0]
    return violations


def paired_domination(
    t: float, samples: int, seed: int = 42, workers: int = 1
) -> tuple[int, int]:
    """Coupled identity/logproduct paths on shared uniforms.

    ln(1 + (e-1)x) >= x on [0, 1], so on every single path the logproduct
    sum crosses t no later than the identity sum.  Returns (number of
    paths where the logproduct count exceeded the identity count, samples);
    the first entry should be 0.
    """
    t = _check_common(t, samples, seed, workers)
    ident = BUILTIN_TRANSFORMS["identity"]
    logp = BUILTIN_TRANSFORMS["logproduct"]

    def run(widx, count):
        rng = _stream(seed, widx)
        v = 0
        done = 0
        while done < count:
            n = min(_BLOCK, count - done)
            v += _paired_block(t, n, rng, ident._f, logp._f)
            done += n
        return v

    jobs = [(i, c) for i, c in enumerate(_worker_counts(samples, workers)) if c > 0]
    if workers == 1 or len(jobs) == 1:
        total = sum(run(i, c) for i, c in jobs)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run, i, c) for i, c in jobs]
            total = sum(f.result() for f in futures)
    return total, samples


def chernoff_bound(mu: float, delta: float) -> float:
    """Upper tail bound min(1, 2 exp(-delta^2 mu / (2 + delta)))."""
    mu = float(mu)
    delta = float(delta)
    if not (math.isfinite(mu) and mu > 0.0):
        raise DomainError(f"mu must be positive, got {mu}")
    if not (math.isfinite(delta) and delta > 0.0):
        raise DomainError(f"delta must be positive, got {delta}")
    return min(1.0, 2.0 * math.exp(-delta * delta * mu / (2.0 + delta)))


def k_concentration_check(
    transform: BijectionSpec,
    t: float,
    samples: int,
    c: float,
    seed: int = 42,
    workers: int = 1,
) -> float:
    """Fraction of paths whose draw count strays past 1 + t/mu by c * sqrt(t).

    A concentration smoke test: for t well above 1 the fraction outside
    c = 6 standard-deviation-scale bands is far below 1e-3.
    """
    t = _check_common(t, samples, seed, workers)
    if t < 1.0:
        raise DomainError(f"concentration check needs t >= 1, got {t}")
    c = float(c)
    if not (math.isfinite(c) and c > 0.0):
        raise DomainError(f"c must be positive, got {c}")
    mu = asymptotic_params(transform).mu
    center = t / mu
    radius = c * math.sqrt(t)
    _, _, _, _, _, far = _tally(
        transform, t, samples, seed, workers, center=center, radius=radius
    )
    return far / samples


def limit_overshoot_bin_probs(transform: BijectionSpec, edges: np.ndarray) -> np.ndarray:
    """Probability mass of each histogram bin under the limiting overshoot law.

    The limiting overshoot density at u is (1 - f^{-1}(u)) / mu; each bin
    mass is its integral, computed by adaptive quadrature.
    """
    edges = np.asarray(edges, dtype=float)
    mu = asymptotic_params(transform).mu
    probs = np.empty(edges.shape[0] - 1)
    for i in range(probs.shape[0]):
        probs[i] = (
            integrate(
                lambda u: 1.0 - transform._finv(u), edges[i], edges[i + 1], 1e-12
            )
            / mu
        )
    return probs


def estimate_payload(est: SimEstimate) -> dict:
    """JSON-ready dict for an estimate, keys in the documented order."""
    return {
        "t": est.t,
        "spec": est.spec,
        "samples": est.samples,
        "seed": est.seed,
        "mean": est.mean,
        "std_error": est.std_error,
    }


def histogram_payload(hist: OvershootHistogram) -> dict:
    """JSON-ready dict for an overshoot histogram."""
    return {
        "bin_edges": [float(x) for x in hist.bin_edges],
        "densities": [float(x) for x in hist.densities],
        "samples": hist.samples,
        "t": hist.t,
    }
