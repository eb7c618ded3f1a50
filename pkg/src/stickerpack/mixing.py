"""Sheet mixing strategies: the order in which quadrottes reach the machine.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64 seeded
through ``SeedSequence``). Test expectations pin sequences by seed, so the
generator must not be swapped out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .album import AlbumConfig, AlbumError

VARIANTS = ("cyclic", "iid", "block", "swap", "twosided")


@dataclass(frozen=True)
class MixingStrategy:
    """A mixing variant plus its knobs.

    ``swap_count``/``window`` only apply to ``swap`` and ``block`` only to
    ``twosided``.
    """

    variant: str = "iid"
    seed: int = 0
    swap_count: int = 0
    window: int = 1
    block: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise AlbumError(f"unknown mixing variant {self.variant!r}")
        if not 0 <= self.seed < 2**64:
            raise AlbumError("seed must be a 64-bit unsigned integer")
        if self.swap_count < 0:
            raise AlbumError("swap_count must be non-negative")
        if self.window < 1 or self.block < 1:
            raise AlbumError("window and block must be positive")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "MixingStrategy":
        """Parse the CLI form ``cyclic|iid|block|swap:COUNT:WINDOW|twosided:BLOCK``."""
        name, *args = text.strip().lower().split(":")
        try:
            if name == "swap" and len(args) == 2:
                return cls("swap", seed, swap_count=int(args[0]), window=int(args[1]))
            if name == "twosided" and len(args) == 1:
                return cls("twosided", seed, block=int(args[0]))
            if name in ("cyclic", "iid", "block") and not args:
                return cls(name, seed)
        except ValueError:
            pass
        raise AlbumError(f"cannot parse mixing strategy {text!r}")

    def describe(self) -> str:
        if self.variant == "swap":
            return f"swap:{self.swap_count}:{self.window}"
        if self.variant == "twosided":
            return f"twosided:{self.block}"
        return self.variant


@dataclass(frozen=True, eq=False)
class QuadrotteSequence:
    """Sheet indices R_1, R_2, ... together with the strategy that made them."""

    sheets: np.ndarray
    strategy: MixingStrategy

    def __len__(self):
        return len(self.sheets)

    def __iter__(self):
        return iter(self.sheets.tolist())

    def __getitem__(self, item):
        return self.sheets[item]


def cyclic(q: int, length: int) -> np.ndarray:
    return np.arange(length, dtype=np.int64) % q + 1


def two_sided_pattern(q: int, block: int) -> np.ndarray:
    """One period of the two-sided feed.

    Sheets 1..q are cut into consecutive chunks of ``block`` (the last one may
    be shorter); each chunk is emitted by alternating its front and back ends,
    front first: 1..4 -> 1, 4, 2, 3.
    """
    out = []
    for start in range(1, q + 1, block):
        lo, hi = start, min(start + block - 1, q)
        take_front = True
        while lo <= hi:
            if take_front:
                out.append(lo)
                lo += 1
            else:
                out.append(hi)
                hi -= 1
            take_front = not take_front
    return np.asarray(out, dtype=np.int64)


def local_swaps(seq: np.ndarray, swap_count: int, window: int, rng: np.random.Generator) -> np.ndarray:
    """Apply ``swap_count`` random transpositions at distance at most ``window``.

    Each swap draws a distance d uniformly from 1..window, then a left
    position uniformly from the L - d positions that keep the partner in range.
    """
    length = len(seq)
    if swap_count == 0 or length < 2:
        return seq.copy()
    dist = rng.integers(1, window + 1, size=swap_count)
    left = (rng.random(swap_count) * (length - dist)).astype(np.int64)
    out = seq.tolist()
    for a, d in zip(left.tolist(), dist.tolist()):
        b = a + d
        out[a], out[b] = out[b], out[a]
    return np.asarray(out, dtype=np.int64)


def generate_sequence(cfg: AlbumConfig, strategy: MixingStrategy, length: int) -> QuadrotteSequence:
    """Sheet indices R_1..R_length, each in [1, q]; deterministic in (strategy, length)."""
    return QuadrotteSequence(_sheets(cfg, strategy, length), strategy)


def _sheets(cfg: AlbumConfig, strategy: MixingStrategy, length: int) -> np.ndarray:
    if length < 1:
        raise AlbumError("sequence length must be at least 1")
    q = cfg.sheet_count
    rng = np.random.default_rng(strategy.seed)
    variant = strategy.variant
    if variant == "cyclic":
        return cyclic(q, length)
    if variant == "iid":
        return rng.integers(1, q + 1, size=length, dtype=np.int64)
    if variant == "block":
        blocks = -(-length // q)
        perms = np.argsort(rng.random((blocks, q)), axis=1) + 1
        return perms.reshape(-1)[:length].astype(np.int64)
    if variant == "swap":
        if strategy.window >= length:
            raise AlbumError(f"swap window {strategy.window} must be smaller than length {length}")
        return local_swaps(cyclic(q, length), strategy.swap_count, strategy.window, rng)
    pattern = two_sided_pattern(q, strategy.block)
    reps = -(-length // len(pattern))
    return np.tile(pattern, reps)[:length]
