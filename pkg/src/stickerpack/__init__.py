"""Sticker-pack production simulation: the quadrotte packing machine next to the classical coupon-collector model."""

from .album import (
    AMICI,
    BUNDESLIGA2014,
    PRESETS,
    WM2014,
    AlbumConfig,
    AlbumError,
    Display,
    Packet,
    QuadrottePosition,
    get_preset,
    load_config,
    position_to_sticker,
    sticker_to_position,
)
from .mixing import MixingStrategy, QuadrotteSequence, generate_sequence
from .machine import (
    FifimaticMachine,
    next_card_candidates,
    pack_displays,
    packet_mate_candidates,
    produce,
)

__version__ = "0.1.0"
