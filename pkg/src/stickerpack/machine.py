"""The 4 x n magazine / conveyor-belt packing machine.

Each tick the bottom sheet drops one sticker from every magazine onto the four
belts (one belt per sheet column), then the belts advance one position. A stack
born at tick t therefore collects one row from each of the sheets fed at
ticks t, t+1, ..., t+n-1 and leaves the machine as a packet after tick t+n-1.
With ``descending`` orientation the stack receives rows n-1, n-2, ..., 0 in
that order; with ``ascending`` it receives 0, 1, ..., n-1.

Stacks born before the first tick would be incomplete, so packets only exist
for birth ticks 0..L-n of an L-sheet feed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from .album import (
    QUADROTTE_COLUMNS,
    AlbumConfig,
    AlbumError,
    Display,
    Packet,
    position_to_sticker,
    sticker_to_position,
)
from .mixing import MixingStrategy, generate_sequence

ORIENTATIONS = ("descending", "ascending")
PACKING_POLICIES = ("round-robin", "single-belt")


def _check_orientation(orientation: str) -> None:
    if orientation not in ORIENTATIONS:
        raise AlbumError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")


def _check_machine_config(cfg: AlbumConfig) -> None:
    if cfg.packet_size != cfg.quadrotte_rows:
        raise AlbumError(
            f"machine packets hold one sticker per sheet row: packet_size={cfg.packet_size} "
            f"but quadrotte_rows={cfg.quadrotte_rows}"
        )


def row_schedule(n: int, orientation: str = "descending") -> np.ndarray:
    """Row index collected by a stack at each age 0..n-1."""
    _check_orientation(orientation)
    ages = np.arange(n)
    return ages[::-1].copy() if orientation == "descending" else ages


class FifimaticMachine:
    """Tick-by-tick machine state: four belts of partially filled stacks."""

    def __init__(self, cfg: AlbumConfig, orientation: str = "descending"):
        _check_machine_config(cfg)
        _check_orientation(orientation)
        self.cfg = cfg
        self.orientation = orientation
        self.tick = 0
        self.rows = row_schedule(cfg.quadrotte_rows, orientation).tolist()
        # oldest stack first; each stack is the list of stickers collected so far
        self.belts = [deque() for _ in range(QUADROTTE_COLUMNS)]

    def step(self, sheet: int) -> List[Packet]:
        cfg = self.cfg
        if not 1 <= sheet <= cfg.sheet_count:
            raise AlbumError(f"sheet {sheet} outside [1, {cfg.sheet_count}]")
        n = cfg.quadrotte_rows
        emitted = []
        for column, belt in enumerate(self.belts):
            belt.append([])
            for age, stack in enumerate(reversed(belt)):
                stack.append(position_to_sticker(cfg, (sheet, self.rows[age], column)))
            if len(belt[0]) == n:
                emitted.append(
                    Packet(tuple(belt.popleft()), source="machine", belt=column, tick=self.tick)
                )
        self.tick += 1
        return emitted

    def feed(self, sheets: Iterable[int]) -> List[Packet]:
        out = []
        for sheet in sheets:
            out.extend(self.step(int(sheet)))
        return out


@dataclass
class PacketBatch:
    """Machine output as arrays, in (tick, belt) emission order."""

    stickers: np.ndarray  # (packets, n)
    belts: np.ndarray
    ticks: np.ndarray

    def __len__(self):
        return len(self.stickers)

    def to_packets(self) -> List[Packet]:
        return [
            Packet(tuple(row), source="machine", belt=b, tick=t)
            for row, b, t in zip(self.stickers.tolist(), self.belts.tolist(), self.ticks.tolist())
        ]


def assemble_packets(cfg: AlbumConfig, sheets: Sequence[int], orientation: str = "descending") -> PacketBatch:
    """Vectorised equivalent of feeding ``sheets`` through a fresh machine."""
    _check_machine_config(cfg)
    n = cfg.quadrotte_rows
    sheets = np.asarray(sheets, dtype=np.int64).reshape(-1)
    if sheets.size and (sheets.min() < 1 or sheets.max() > cfg.sheet_count):
        raise AlbumError(f"sheet indices must lie in [1, {cfg.sheet_count}]")
    births = len(sheets) - n + 1
    if births <= 0:
        empty = np.empty(0, dtype=np.int64)
        return PacketBatch(np.empty((0, n), dtype=np.int64), empty, empty)
    rows = row_schedule(n, orientation)
    # sheet feeding age d of every stack born at tick b: R[b + d]
    fed = np.lib.stride_tricks.sliding_window_view(sheets, n)[:births]  # (births, n)
    base = (fed - 1) * cfg.sheet_size + rows * QUADROTTE_COLUMNS + 1  # (births, n)
    cols = np.arange(QUADROTTE_COLUMNS)
    stickers = base[:, None, :] + cols[None, :, None]  # (births, 4, n)
    ticks = np.repeat(np.arange(births) + n - 1, QUADROTTE_COLUMNS)
    belts = np.tile(cols, births)
    return PacketBatch(stickers.reshape(-1, n), belts, ticks)


def ticks_for_packets(cfg: AlbumConfig, packet_count: int) -> int:
    return cfg.quadrotte_rows - 1 + -(-packet_count // QUADROTTE_COLUMNS)


def produce_batch(
    cfg: AlbumConfig, strategy: MixingStrategy, packet_count: int, orientation: str = "descending"
) -> PacketBatch:
    if packet_count < 1:
        raise AlbumError("packet_count must be at least 1")
    seq = generate_sequence(cfg, strategy, ticks_for_packets(cfg, packet_count))
    batch = assemble_packets(cfg, seq.sheets, orientation)
    return PacketBatch(
        batch.stickers[:packet_count], batch.belts[:packet_count], batch.ticks[:packet_count]
    )


def produce(
    cfg: AlbumConfig, strategy: MixingStrategy, packet_count: int, orientation: str = "descending"
) -> List[Packet]:
    """Run the machine until ``packet_count`` packets have been emitted."""
    return produce_batch(cfg, strategy, packet_count, orientation).to_packets()


def display_order(belts: np.ndarray, ticks: np.ndarray, policy: str = "round-robin") -> List[np.ndarray]:
    """Index groups (one per belt stream, or one overall) in display filling order."""
    if policy == "round-robin":
        return [np.lexsort((belts, ticks))]
    if policy == "single-belt":
        return [np.flatnonzero(belts == b)[np.argsort(ticks[belts == b], kind="stable")]
                for b in range(QUADROTTE_COLUMNS)]
    raise AlbumError(f"packing policy must be one of {PACKING_POLICIES}, got {policy!r}")


def pack_displays(packets: Sequence[Packet], cfg: AlbumConfig, policy: str = "round-robin") -> List[Display]:
    """Group packets into displays of ``cfg.display_packets``.

    ``round-robin`` fills displays in (tick, belt) order; ``single-belt`` fills
    each belt's stream separately (belt 0's displays first). Trailing packets
    that do not fill a whole display are left out.
    """
    size = cfg.display_packets
    if len(packets) < size:
        raise AlbumError(f"need at least {size} packets for one display, got {len(packets)}")
    belts = np.array([p.belt if p.belt is not None else 0 for p in packets])
    ticks = np.array([p.tick if p.tick is not None else i for i, p in enumerate(packets)])
    displays = []
    for order in display_order(belts, ticks, policy):
        for start in range(0, len(order) - size + 1, size):
            displays.append(Display(tuple(packets[i] for i in order[start:start + size])))
    return displays


def display_arrays(batch: PacketBatch, cfg: AlbumConfig, policy: str = "round-robin") -> np.ndarray:
    """Sticker streams of all full displays as a (displays, D) array."""
    size = cfg.display_packets
    chunks = []
    for order in display_order(batch.belts, batch.ticks, policy):
        full = len(order) // size * size
        if full:
            chunks.append(batch.stickers[order[:full]].reshape(-1, size * cfg.packet_size))
    if not chunks:
        raise AlbumError(f"need at least {size} packets for one display, got {len(batch)}")
    return np.concatenate(chunks)


def next_card_candidates(cfg: AlbumConfig, x: int, orientation: str = "descending") -> set:
    """Stickers that can come right after ``x`` in the same belt's packet stream.

    The follower sits one row further along the stack schedule, in the same
    column, on any sheet. After the last row of a stack the belt starts the next
    stack, so the schedule wraps around.
    """
    _check_orientation(orientation)
    pos = sticker_to_position(cfg, x)
    n = cfg.quadrotte_rows
    step = -1 if orientation == "descending" else 1
    row = (pos.row + step) % n
    return {position_to_sticker(cfg, (k, row, pos.column)) for k in range(1, cfg.sheet_count + 1)}


def packet_mate_candidates(cfg: AlbumConfig, x: int) -> set:
    """Every sticker that can share a packet with ``x``: same column, other row."""
    pos = sticker_to_position(cfg, x)
    return {
        position_to_sticker(cfg, (k, i, pos.column))
        for k in range(1, cfg.sheet_count + 1)
        for i in range(cfg.quadrotte_rows)
        if i != pos.row
    }


def expected_iid_display_duplicates(cfg: AlbumConfig, policy: str = "round-robin") -> float:
    """Mean duplicates per display when every sheet is drawn independently.

    A display holding m packets from belt j has m slots for each sheet
    position (i, j), each filled from an independent uniform sheet, so that
    position contributes m - q(1 - (1 - 1/q)^m) duplicates. For round-robin
    packing the belt counts are averaged over one period of display offsets.
    """
    q, n, size = cfg.sheet_count, cfg.quadrotte_rows, cfg.display_packets

    def excess(m):
        return m - q * (1.0 - (1.0 - 1.0 / q) ** m)

    if policy == "single-belt":
        return n * excess(size)
    if policy != "round-robin":
        raise AlbumError(f"packing policy must be one of {PACKING_POLICIES}, got {policy!r}")
    period = QUADROTTE_COLUMNS // np.gcd(size, QUADROTTE_COLUMNS)
    total = 0.0
    for d in range(period):
        belts = np.arange(d * size, (d + 1) * size) % QUADROTTE_COLUMNS
        total += n * sum(excess(int((belts == j).sum())) for j in range(QUADROTTE_COLUMNS))
    return total / period
