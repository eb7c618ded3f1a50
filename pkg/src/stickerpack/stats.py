"""Duplicate counting, run lengths, pairwise display overlap and Monte Carlo intervals."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .album import AlbumError, Display


@dataclass
class DuplicateSummary:
    total: int
    distinct: int
    duplicates: int
    # multiplicity -> number of stickers seen that many times
    multiplicity: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MonteCarloInterval:
    lower: float
    upper: float
    level: float = 0.95
    replicates: int = 0
    statistic_name: str = ""
    mean: float = float("nan")

    def __post_init__(self):
        if self.lower > self.upper:
            raise AlbumError("interval lower bound exceeds upper bound")

    def contains(self, value, closed: bool = True) -> bool:
        if closed:
            return self.lower <= value <= self.upper
        return self.lower < value < self.upper

    def to_dict(self) -> dict:
        return asdict(self)


def count_duplicates(stickers: Iterable[int]) -> DuplicateSummary:
    counts = Counter(int(x) for x in stickers)
    total = sum(counts.values())
    hist = Counter(counts.values())
    return DuplicateSummary(total, len(counts), total - len(counts), dict(sorted(hist.items())))


def duplicates_per_row(streams: np.ndarray) -> np.ndarray:
    """Excess copies in every row of a 2-D integer array."""
    streams = np.asarray(streams)
    if streams.shape[1] == 0:
        return np.zeros(len(streams), dtype=np.int64)
    srt = np.sort(streams, axis=1)
    return (np.diff(srt, axis=1) == 0).sum(axis=1)


def longest_consecutive_run(stream: Sequence[int], both_directions: bool = False) -> int:
    """Longest stretch of adjacent positions whose numbers go up by exactly 1.

    With ``both_directions`` a stretch of steps by exactly -1 also counts.
    """
    stream = [int(x) for x in stream]
    if not stream:
        return 0
    best = run = 1
    direction = 0
    for prev, cur in zip(stream, stream[1:]):
        step = cur - prev
        if step == 1 or (both_directions and step == -1):
            run = run + 1 if step == direction else 2
            direction = step
        else:
            run, direction = 1, 0
        best = max(best, run)
    return best


def longest_runs_per_row(streams: np.ndarray, both_directions: bool = False) -> np.ndarray:
    """Vectorised ``longest_consecutive_run`` over the rows of a 2-D array."""
    streams = np.asarray(streams, dtype=np.int64)
    rows, width = streams.shape
    if width == 0:
        return np.zeros(rows, dtype=np.int64)
    steps = np.diff(streams, axis=1)
    best = np.ones(rows, dtype=np.int64)
    for target in ((1, -1) if both_directions else (1,)):
        run = np.zeros(rows, dtype=np.int64)
        for col in range(width - 1):
            run = np.where(steps[:, col] == target, run + 1, 0)
            np.maximum(best, run + 1, out=best)
    return best


def pairwise_duplicate_matrix(displays: Sequence) -> np.ndarray:
    """Duplicates in the union of every pair of displays.

    The diagonal holds each display's own internal duplicates.
    """
    if len(displays) < 2:
        raise AlbumError("need at least two displays")
    streams = [d.stickers if isinstance(d, Display) else list(d) for d in displays]
    counts = [Counter(s) for s in streams]
    k = len(streams)
    out = np.zeros((k, k), dtype=np.int64)
    for a in range(k):
        out[a, a] = len(streams[a]) - len(counts[a])
        for b in range(a + 1, k):
            merged = counts[a] + counts[b]
            out[a, b] = out[b, a] = len(streams[a]) + len(streams[b]) - len(merged)
    return out


def significant_cells(matrix: np.ndarray, interval: MonteCarloInterval, closed: bool = True) -> np.ndarray:
    """Boolean mask over the strict upper triangle of entries outside the interval."""
    matrix = np.asarray(matrix)
    upper = np.triu(np.ones_like(matrix, dtype=bool), k=1)
    if closed:
        outside = (matrix < interval.lower) | (matrix > interval.upper)
    else:
        outside = (matrix <= interval.lower) | (matrix >= interval.upper)
    return upper & outside


def significance_count(matrix: np.ndarray, interval: MonteCarloInterval, closed: bool = True) -> int:
    """Off-diagonal pairs falling outside the interval.

    ``closed=True`` treats the boundaries as inside (not significant).
    """
    return int(significant_cells(matrix, interval, closed).sum())


def sample_skewness(values: Sequence[float]) -> float:
    """Adjusted Fisher-Pearson skewness G1."""
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    if n < 3:
        raise AlbumError("skewness needs at least three values")
    dev = x - x.mean()
    m2 = np.mean(dev * dev)
    if m2 <= 0:
        raise AlbumError("skewness undefined for zero variance")
    m3 = np.mean(dev * dev * dev)
    g1 = m3 / m2**1.5
    return float(g1 * np.sqrt(n * (n - 1)) / (n - 2))


def moving_average(values: Sequence[float], window: int = 10) -> list:
    """Trailing mean, one value per position from the ``window``-th on."""
    if window < 1:
        raise AlbumError("window must be at least 1")
    x = np.asarray(values, dtype=np.float64)
    if x.size < window:
        return []
    csum = np.concatenate(([0.0], np.cumsum(x)))
    return ((csum[window:] - csum[:-window]) / window).tolist()


def empirical_interval(values: np.ndarray, level: float = 0.95, name: str = "") -> MonteCarloInterval:
    values = np.asarray(values)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(values, [tail, 1.0 - tail], method="inverted_cdf")
    return MonteCarloInterval(float(lo), float(hi), level, int(values.size), name, float(values.mean()))


def monte_carlo_interval(
    statistic: Optional[Callable[[np.ndarray], np.ndarray]],
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    replicates: int = 100_000,
    level: float = 0.95,
    seed: int = 0,
    name: str = "",
    batch_size: int = 10_000,
    return_values: bool = False,
):
    """Empirical central interval of ``statistic`` under a random model.

    ``sampler(rng, k)`` draws k model realisations (e.g. a (k, D) array of
    display streams); ``statistic`` maps them to k values. Pass ``None`` when
    the sampler already yields statistic values.
    """
    if not 0 < level < 1:
        raise AlbumError("level must lie in (0, 1)")
    if replicates < 1000 and level >= 0.95:
        raise AlbumError("use at least 1000 replicates for a 95% interval")
    rng = np.random.default_rng(seed)
    chunks = []
    for start in range(0, replicates, batch_size):
        k = min(batch_size, replicates - start)
        draw = sampler(rng, k)
        chunks.append(np.asarray(draw if statistic is None else statistic(draw)))
    values = np.concatenate(chunks)
    interval = empirical_interval(values, level, name)
    return (interval, values) if return_values else interval
