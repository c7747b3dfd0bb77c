"""Single-particle arrival sampling, histogramming and goodness of fit.

Random numbers come from numpy's Philox-4x64 counter-based generator. A
stream is keyed by ``(seed, stream_index)`` through ``SeedSequence`` with the
stream index as spawn key, so each pair names one portable bit stream and
different stream indices are independent.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from packetlab.errors import DomainError, PreconditionError
from packetlab.experiments import DetectorProbabilities, ScreenIntensity

GENERATOR_ALGORITHM = "numpy.random.Philox(4x64-10) keyed by SeedSequence(seed, spawn_key=(stream_index,))"

MIN_EXPECTED = 5.0
MIN_TOTAL = 100


@dataclass(frozen=True)
class SeededStream:
    seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2 ** 64):
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if int(self.stream_index) < 0:
            raise DomainError(f"stream_index must be >= 0, got {self.stream_index!r}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.Philox(ss))

    def split(self, k: int) -> list["SeededStream"]:
        """``k`` consecutive streams starting at this one."""
        return [SeededStream(self.seed, self.stream_index + i) for i in range(k)]


def _segment_masses(intensity: ScreenIntensity) -> np.ndarray:
    f = intensity.density
    return 0.5 * (f[:-1] + f[1:]) * np.diff(intensity.positions)


def cumulative(intensity: ScreenIntensity, x) -> np.ndarray:
    """Exact CDF of the piecewise-linear density at ``x`` (clamped to ``[0, 1]``)."""
    pos, f = intensity.positions, intensity.density
    masses = _segment_masses(intensity)
    cdf_nodes = np.concatenate(([0.0], np.cumsum(masses)))
    total = cdf_nodes[-1]
    x = np.asarray(x, dtype=float)
    seg = np.clip(np.searchsorted(pos, x, side="right") - 1, 0, pos.size - 2)
    h = pos[seg + 1] - pos[seg]
    t = np.clip(x - pos[seg], 0.0, h)
    slope = (f[seg + 1] - f[seg]) / h
    partial = f[seg] * t + 0.5 * slope * t * t
    return np.clip((cdf_nodes[seg] + partial) / total, 0.0, 1.0)


GUIDE_FACTOR = 16


def _locate(cdf_nodes: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index ``i`` of the last node with ``cdf_nodes[i] <= u``, clipped to a valid segment.

    Same result as ``searchsorted(side="right") - 1``. Large draws use a guide
    table over equal-mass buckets and then step forward, which avoids the
    branch-heavy binary search per sample.
    """
    m = cdf_nodes.size - 1
    buckets = GUIDE_FACTOR * m
    if u.size < buckets:
        return np.clip(np.searchsorted(cdf_nodes, u, side="right") - 1, 0, m - 1)
    total = cdf_nodes[-1]
    starts = np.clip(np.searchsorted(cdf_nodes, np.arange(buckets) * (total / buckets), side="right") - 1, 0, m - 1)
    # one bucket of slack so that the bucket start never exceeds u after rounding
    b = np.clip((u * (buckets / total)).astype(np.int64) - 1, 0, buckets - 1)
    seg = starts[b]
    active = np.arange(u.size)
    while active.size:
        s = seg[active]
        step = (s < m - 1) & (cdf_nodes[np.minimum(s + 1, m)] <= u[active])
        active = active[step]
        seg[active] += 1
    return seg


def sample_positions(intensity: ScreenIntensity, n: int, stream: SeededStream) -> np.ndarray:
    """Draw ``n`` arrival positions by exact inverse-CDF of the linear interpolant."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return np.empty(0)
    pos, f = intensity.positions, intensity.density
    masses = _segment_masses(intensity)
    cdf_nodes = np.concatenate(([0.0], np.cumsum(masses)))
    u = stream.generator().random(n) * cdf_nodes[-1]
    # last node <= u skips zero-mass segments
    seg = _locate(cdf_nodes, u)
    r = u - cdf_nodes[seg]
    h = pos[seg + 1] - pos[seg]
    f0 = f[seg]
    slope = (f[seg + 1] - f0) / h
    # root of f0 t + slope t^2 / 2 = r in the cancellation-free form
    disc = np.maximum(f0 * f0 + 2.0 * slope * r, 0.0)
    denom = f0 + np.sqrt(disc)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(denom > 0.0, 2.0 * r / denom, 0.0)
    return pos[seg] + np.clip(t, 0.0, h)


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    total: int
    overflow: int = 0

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if edges.ndim != 1 or counts.shape != (edges.size - 1,):
            raise DomainError("counts must have one entry per bin")
        if np.any(np.diff(edges) <= 0.0):
            raise DomainError("bin_edges must be strictly increasing")
        if int(counts.sum()) != int(self.total):
            raise DomainError("sum(counts) must equal total")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "total", int(self.total))
        object.__setattr__(self, "overflow", int(self.overflow))

    @property
    def bin_count(self) -> int:
        return self.counts.size

    def merge(self, other: "Histogram") -> "Histogram":
        if not np.array_equal(self.bin_edges, other.bin_edges):
            raise DomainError("cannot merge histograms with different binning")
        return Histogram(self.bin_edges, self.counts + other.counts,
                         self.total + other.total, self.overflow + other.overflow)


def accumulate(positions, bin_count: int, range: tuple[float, float]) -> Histogram:
    """Bin ``positions`` into ``bin_count`` uniform left-closed bins over ``range``.

    Values outside ``[lo, hi)`` go to the overflow tally.
    """
    lo, hi = float(range[0]), float(range[1])
    if bin_count < 2:
        raise DomainError("bin_count must be >= 2")
    if not (hi > lo):
        raise DomainError("range must be non-degenerate (hi > lo)")
    x = np.asarray(positions, dtype=float)
    n_all = x.size
    edges = np.linspace(lo, hi, bin_count + 1)
    inside = (x >= lo) & (x < hi)
    x = x[inside]
    # arithmetic bin guess, then nudge so that edges[idx] <= x < edges[idx + 1] exactly
    idx = np.clip(((x - lo) * (bin_count / (hi - lo))).astype(np.int64), 0, bin_count - 1)
    idx -= x < edges[idx]
    idx += x >= edges[idx + 1]
    counts = np.bincount(idx, minlength=bin_count)
    return Histogram(edges, counts, int(x.size), int(n_all - x.size))


def merge_all(histograms) -> Histogram:
    it = iter(histograms)
    acc = next(it)
    for h in it:
        acc = acc.merge(h)
    return acc


def expected_counts(hist: Histogram, intensity: ScreenIntensity) -> np.ndarray:
    """Expected per-bin counts: ``total`` times the bin probability, conditioned on the range."""
    cdf = cumulative(intensity, hist.bin_edges)
    probs = np.diff(cdf)
    covered = cdf[-1] - cdf[0]
    if not (covered > 0.0):
        raise DomainError("intensity has no mass inside the histogram range")
    return hist.total * probs / covered


@dataclass(frozen=True)
class FitReport:
    chi_square_per_dof: float
    dof: int
    bins_merged: int
    chi_square: float = field(default=0.0)


def _pool(observed: np.ndarray, expected: np.ndarray):
    """Pool adjacent bins left to right until each group expects at least ``MIN_EXPECTED``."""
    obs_groups, exp_groups = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= MIN_EXPECTED:
            obs_groups.append(o_acc)
            exp_groups.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0.0 or o_acc > 0.0:
        if exp_groups:
            obs_groups[-1] += o_acc
            exp_groups[-1] += e_acc
        else:
            obs_groups.append(o_acc)
            exp_groups.append(e_acc)
    return np.array(obs_groups), np.array(exp_groups)


def goodness_of_fit(hist: Histogram, intensity: ScreenIntensity) -> FitReport:
    """Pearson chi-square of ``hist`` against ``intensity`` after pooling sparse bins."""
    if hist.total < MIN_TOTAL:
        raise PreconditionError(f"goodness_of_fit needs hist.total >= {MIN_TOTAL}, got {hist.total}")
    expected = expected_counts(hist, intensity)
    obs, exp = _pool(hist.counts.astype(float), expected)
    dof = obs.size - 1
    if dof < 1:
        raise PreconditionError("fewer than two pooled bins; chi-square has no degrees of freedom")
    chi2 = float(np.sum((obs - exp) ** 2 / exp))
    return FitReport(chi2 / dof, dof, hist.bin_count - obs.size, chi2)


def sample_histogram(intensity: ScreenIntensity, n: int, stream: SeededStream, bin_count: int,
                     span: tuple[float, float] | None = None, streams: int = 1,
                     workers: int | None = None) -> Histogram:
    """Sample ``n`` arrivals split across ``streams`` consecutive streams and merge the histograms.

    The partition is fixed by ``streams`` (the first ``n % streams`` streams
    draw one extra sample), so the result does not depend on ``workers``.
    """
    if streams < 1:
        raise DomainError("streams must be >= 1")
    if span is None:
        span = (float(intensity.positions[0]), float(intensity.positions[-1]))
    base, extra = divmod(n, streams)
    sizes = [base + (1 if i < extra else 0) for i in range(streams)]

    def one(args):
        size, sub = args
        return accumulate(sample_positions(intensity, size, sub), bin_count, span)

    jobs = list(zip(sizes, stream.split(streams)))
    if workers and workers > 1 and streams > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, jobs))
    else:
        parts = [one(job) for job in jobs]
    return merge_all(parts)


def ks_distance(samples, intensity: ScreenIntensity) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF and the interpolant CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    cdf = cumulative(intensity, x)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def sample_detectors(probs: DetectorProbabilities, n: int, stream: SeededStream) -> tuple[int, int]:
    """Binomial split of ``n`` photons between the two detectors."""
    if n < 0:
        raise DomainError("n must be >= 0")
    p1 = min(max(probs.p1, 0.0), 1.0)
    c1 = int(stream.generator().binomial(n, p1)) if n else 0
    return c1, n - c1
