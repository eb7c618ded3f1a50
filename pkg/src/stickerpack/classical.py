"""Classical coupon-collector baseline.

Packets are independent uniform P-subsets of the album (random distribution,
no duplicates inside a packet, every sticker equally common). The closed forms
follow the single-card geometric model; packet-level behaviour is left to
simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .album import AlbumConfig, AlbumError, Packet

LN10 = math.log(10.0)


@dataclass
class CollectionRun:
    cards_bought: List[int]
    distinct_curve: List[tuple] = field(default_factory=list)  # (packets opened, distinct so far)
    completion_card_count: int = 0
    duplicates_per_packet: List[int] = field(default_factory=list)


def draw_packet_classical(cfg: AlbumConfig, rng: np.random.Generator) -> Packet:
    if cfg.packet_size > cfg.total_stickers:
        raise AlbumError("packet_size exceeds total_stickers")
    picks = rng.choice(cfg.total_stickers, size=cfg.packet_size, replace=False) + 1
    return Packet(tuple(int(x) for x in picks), source="classical")


def draw_packets_bulk(B: int, P: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` classical packets as a (count, P) array, by rejection.

    Rows with a repeated sticker are redrawn, which leaves every P-subset
    equally likely. Fast while P is small against B.
    """
    if P > B:
        raise AlbumError("packet_size exceeds total_stickers")
    out = rng.integers(1, B + 1, size=(count, P))
    if P == 1:
        return out
    bad = np.arange(count)
    while True:
        srt = np.sort(out[bad], axis=1)
        bad = bad[(np.diff(srt, axis=1) == 0).any(axis=1)]
        if not bad.size:
            return out
        out[bad] = rng.integers(1, B + 1, size=(bad.size, P))


def simulate_until_target(cfg: AlbumConfig, target: int, rng: np.random.Generator) -> CollectionRun:
    """Open classical packets until ``target`` distinct stickers are in the album.

    Cards are bought a whole packet at a time, so the completion count is a
    multiple of the packet size.
    """
    if target > cfg.total_stickers:
        raise AlbumError(f"target {target} exceeds total_stickers {cfg.total_stickers}")
    run = CollectionRun(cards_bought=[], distinct_curve=[(0, 0)])
    if target <= 0:
        return run
    seen = set()
    while len(seen) < target:
        packet = draw_packet_classical(cfg, rng).stickers
        run.cards_bought.extend(packet)
        run.duplicates_per_packet.append(sum(x in seen for x in packet))
        seen.update(packet)
        run.distinct_curve.append((len(run.distinct_curve), len(seen)))
    run.completion_card_count = len(run.cards_bought)
    return run


def completion_card_counts(
    cfg: AlbumConfig, target: int, runs: int, rng: np.random.Generator, batch_size: int = 200_000
) -> np.ndarray:
    """Completion card counts of many independent collections at once.

    Tracks only the distinct count c: a classical packet brings
    Hypergeometric(B - c new, c seen, P) new stickers.
    """
    B, P = cfg.total_stickers, cfg.packet_size
    if target > B:
        raise AlbumError(f"target {target} exceeds total_stickers {B}")
    out = np.zeros(runs, dtype=np.int64)
    if target <= 0:
        return out
    for start in range(0, runs, batch_size):
        stop = min(runs, start + batch_size)
        distinct = np.zeros(stop - start, dtype=np.int64)
        packets = np.zeros(stop - start, dtype=np.int64)
        active = np.arange(stop - start)
        while active.size:
            c = distinct[active]
            distinct[active] = c + rng.hypergeometric(B - c, c, P)
            packets[active] += 1
            active = active[distinct[active] < target]
        out[start:stop] = packets * P
    return out


def display_duplicate_counts(B: int, P: int, packets: int, replicates: int, rng: np.random.Generator) -> np.ndarray:
    """Duplicates inside a display of ``packets`` classical packets, many times over."""
    distinct = np.zeros(replicates, dtype=np.int64)
    for _ in range(packets):
        distinct += rng.hypergeometric(B - distinct, distinct, P)
    return packets * P - distinct


def expected_cards_to_target(B: int, target: int) -> float:
    """Mean number of single cards until ``target`` distinct ones are seen."""
    if target > B:
        raise AlbumError(f"target {target} exceeds B={B}")
    return math.fsum(B / (B - k) for k in range(max(target, 0)))


def std_cards_to_target(B: int, target: int) -> float:
    if target > B:
        raise AlbumError(f"target {target} exceeds B={B}")
    var = 0.0
    for k in range(max(target, 0)):
        p = (B - k) / B
        var += (1 - p) / (p * p)
    return math.sqrt(var)


def expected_duplicates_in_display(B: int, D: int) -> float:
    """Expected excess copies among D independent uniform cards."""
    if D < 0:
        raise AlbumError("display size must be non-negative")
    # D - B(1 - (1 - 1/B)^D), written to stay accurate for large B
    return D - B * -math.expm1(D * math.log1p(-1.0 / B)) if B > 1 else max(D - 1, 0)


def log10_comb(n: int, k: int) -> float:
    if k < 0 or k > n:
        return -math.inf
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / LN10


def log10_prob_zero_duplicates(B: int, P: int, m: int) -> float:
    """log10 of P(m classical packets contain no sticker twice)."""
    if m * P > B:
        return -math.inf
    return math.fsum(log10_comb(B - j * P, P) - log10_comb(B, P) for j in range(m))


def log10_prob_zero_duplicates_cards(B: int, D: int) -> float:
    """Same probability when the D cards are drawn one by one (birthday form)."""
    if D > B:
        return -math.inf
    return math.fsum(math.log10((B - k) / B) for k in range(D))


def classical_packet_count(B: int, P: int) -> int:
    return math.comb(B, P)


def fifimatic_packet_count(B: int, n: int) -> int:
    """Distinct packets the machine can emit: 4 columns times q^n sheet choices."""
    if n < 1 or B % (4 * n):
        raise AlbumError(f"B={B} is not divisible by 4n={4 * n}")
    return 4 * (B // (4 * n)) ** n


def formulas(cfg: AlbumConfig, target: Optional[int] = None) -> dict:
    """Every closed-form quantity for an album, keyed by name."""
    B, P, n = cfg.total_stickers, cfg.packet_size, cfg.quadrotte_rows
    target = cfg.buyback_target if target is None else target
    D = cfg.display_size
    rows = {
        "total_stickers": B,
        "packet_size": P,
        "sheet_count": cfg.sheet_count,
        "target": target,
        "expected_cards_to_target": expected_cards_to_target(B, target),
        "std_cards_to_target": std_cards_to_target(B, target),
        "display_size": D,
        "expected_duplicates_in_display": expected_duplicates_in_display(B, D),
        "log10_prob_zero_duplicates": log10_prob_zero_duplicates(B, P, cfg.display_packets),
        "log10_prob_zero_duplicates_cards": log10_prob_zero_duplicates_cards(B, D),
        "classical_packet_count": classical_packet_count(B, P),
    }
    if P == n:
        rows["fifimatic_packet_count"] = fifimatic_packet_count(B, n)
        rows["packet_count_ratio"] = rows["classical_packet_count"] / rows["fifimatic_packet_count"]
    return rows


def classical_display_sampler(B: int, P: int, packets: int):
    """Sampler of display streams built from classical packets: rng, k -> (k, packets*P)."""

    def sample(rng: np.random.Generator, k: int) -> np.ndarray:
        return draw_packets_bulk(B, P, k * packets, rng).reshape(k, packets * P)

    return sample


def duplicate_free_display_sampler(B: int, D: int, displays: int = 2):
    """Sampler of ``displays`` independent duplicate-free displays, concatenated.

    Each display is a uniform D-subset of the album; this is the random
    reference for comparing displays that are individually free of duplicates.
    """
    if D > B:
        raise AlbumError("a duplicate-free display cannot exceed the album size")

    def sample(rng: np.random.Generator, k: int) -> np.ndarray:
        parts = [np.argsort(rng.random((k, B)), axis=1)[:, :D] + 1 for _ in range(displays)]
        return np.concatenate(parts, axis=1)

    return sample
