"""Album vocabulary: configurations, sticker coordinates, packets and displays.

Stickers are numbered 1..B. Each one sits at a unique position on a printed
sheet (a "quadrotte") of 4 columns by n rows; there are q = B / (4n) sheets.
Numbering is row-major within a sheet::

    x - 1 = (k - 1) * 4n + i * 4 + j
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple, Optional, Sequence

QUADROTTE_COLUMNS = 4

CONFIG_KEYS = (
    "total_stickers",
    "packet_size",
    "quadrotte_rows",
    "buyback_limit",
    "display_packets",
)


class AlbumError(ValueError):
    """Invalid album configuration or out-of-range sticker coordinates."""


@dataclass(frozen=True)
class AlbumConfig:
    total_stickers: int
    packet_size: int
    quadrotte_rows: int
    buyback_limit: int = 0
    display_packets: int = 50
    name: str = "custom"

    def __post_init__(self):
        for key in ("total_stickers", "packet_size", "quadrotte_rows", "display_packets"):
            value = getattr(self, key)
            if not isinstance(value, int) or value < 1:
                raise AlbumError(f"{key} must be a positive integer, got {value!r}")
        if not isinstance(self.buyback_limit, int) or self.buyback_limit < 0:
            raise AlbumError(f"buyback_limit must be a non-negative integer, got {self.buyback_limit!r}")
        if self.buyback_limit >= self.total_stickers:
            raise AlbumError("buyback_limit must be smaller than total_stickers")
        if self.total_stickers % self.sheet_size:
            raise AlbumError(
                f"total_stickers={self.total_stickers} is not divisible by 4n={self.sheet_size}"
            )

    @property
    def quadrotte_columns(self) -> int:
        return QUADROTTE_COLUMNS

    @property
    def sheet_size(self) -> int:
        """Stickers per quadrotte (4n)."""
        return QUADROTTE_COLUMNS * self.quadrotte_rows

    @property
    def sheet_count(self) -> int:
        """Number of distinct quadrottes q = B / 4n."""
        return self.total_stickers // self.sheet_size

    @property
    def display_size(self) -> int:
        return self.display_packets * self.packet_size

    @property
    def buyback_target(self) -> int:
        """Distinct stickers a collector needs before the rest can be bought directly."""
        return self.total_stickers - self.buyback_limit

    def to_dict(self) -> dict:
        return {key: getattr(self, key) for key in CONFIG_KEYS}


WM2014 = AlbumConfig(640, 5, 5, buyback_limit=0, display_packets=100, name="wm2014")
BUNDESLIGA2014 = AlbumConfig(300, 5, 5, buyback_limit=50, display_packets=50, name="bundesliga2014")
AMICI = AlbumConfig(576, 6, 6, buyback_limit=0, display_packets=50, name="amici")

PRESETS = {cfg.name: cfg for cfg in (WM2014, BUNDESLIGA2014, AMICI)}


def get_preset(name: str) -> AlbumConfig:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise AlbumError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def load_config(path) -> AlbumConfig:
    """Load a custom album from a JSON file using the documented key names."""
    path = Path(path)
    with path.open() as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise AlbumError(f"{path}: expected a JSON object")
    unknown = set(raw) - set(CONFIG_KEYS) - {"name"}
    if unknown:
        raise AlbumError(f"{path}: unknown keys {sorted(unknown)}")
    missing = [k for k in ("total_stickers", "packet_size", "quadrotte_rows") if k not in raw]
    if missing:
        raise AlbumError(f"{path}: missing keys {missing}")
    raw.setdefault("name", path.stem)
    return AlbumConfig(**raw)


class QuadrottePosition(NamedTuple):
    sheet: int  # k in [1, q]
    row: int  # i in [0, n-1]
    column: int  # j in [0, 3]


def sticker_to_position(cfg: AlbumConfig, x: int) -> QuadrottePosition:
    if not 1 <= x <= cfg.total_stickers:
        raise AlbumError(f"sticker id {x} outside [1, {cfg.total_stickers}]")
    sheet, offset = divmod(x - 1, cfg.sheet_size)
    row, column = divmod(offset, QUADROTTE_COLUMNS)
    return QuadrottePosition(sheet + 1, row, column)


def position_to_sticker(cfg: AlbumConfig, pos: Sequence[int]) -> int:
    sheet, row, column = pos
    if not 1 <= sheet <= cfg.sheet_count:
        raise AlbumError(f"sheet {sheet} outside [1, {cfg.sheet_count}]")
    if not 0 <= row < cfg.quadrotte_rows:
        raise AlbumError(f"row {row} outside [0, {cfg.quadrotte_rows - 1}]")
    if not 0 <= column < QUADROTTE_COLUMNS:
        raise AlbumError(f"column {column} outside [0, 3]")
    return (sheet - 1) * cfg.sheet_size + row * QUADROTTE_COLUMNS + column + 1


@dataclass(frozen=True)
class Packet:
    stickers: tuple
    source: str = "classical"
    belt: Optional[int] = None
    tick: Optional[int] = None

    def __len__(self):
        return len(self.stickers)

    def __iter__(self) -> Iterator[int]:
        return iter(self.stickers)


@dataclass(frozen=True)
class Display:
    packets: tuple
    serial: Optional[str] = None

    @property
    def stickers(self) -> list:
        return [x for packet in self.packets for x in packet.stickers]

    def __len__(self):
        return len(self.packets)


def display_from_stickers(stickers: Sequence[int], packet_size: int, serial=None) -> Display:
    """Rebuild a display from a flat sticker stream (e.g. ingested data)."""
    stickers = [int(x) for x in stickers]
    packets = tuple(
        Packet(tuple(stickers[i:i + packet_size]), source="observed")
        for i in range(0, len(stickers), packet_size)
    )
    return Display(packets, serial)
