import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stickerpack.album import AMICI, PRESETS, WM2014, AlbumConfig, AlbumError, Packet, sticker_to_position
from stickerpack.classical import fifimatic_packet_count
from stickerpack.machine import (
    FifimaticMachine,
    assemble_packets,
    display_arrays,
    expected_iid_display_duplicates,
    next_card_candidates,
    pack_displays,
    packet_mate_candidates,
    produce,
    produce_batch,
)
from stickerpack.mixing import MixingStrategy
from stickerpack.stats import count_duplicates, duplicates_per_row

PRESET_LIST = list(PRESETS.values())


def test_toy_hand_unrolled(toy):
    # sheet k, row i, column j holds sticker (k-1)*8 + 4i + j + 1.
    # tick 0 feeds sheet 1: the new stacks get row 1 -> 5, 6, 7, 8
    # tick 1 feeds sheet 2: those stacks get row 0 -> 9..12 and leave;
    #                       new stacks get row 1 of sheet 2 -> 13..16
    # tick 2 feeds sheet 1: row 0 -> 1..4 completes them
    machine = FifimaticMachine(toy)
    assert machine.step(1) == []
    first = machine.step(2)
    assert [p.stickers for p in first] == [(5, 9), (6, 10), (7, 11), (8, 12)]
    assert [(p.belt, p.tick) for p in first] == [(0, 1), (1, 1), (2, 1), (3, 1)]
    assert [p.stickers for p in machine.step(1)] == [(13, 1), (14, 2), (15, 3), (16, 4)]


def test_toy_ascending(toy):
    machine = FifimaticMachine(toy, orientation="ascending")
    machine.step(1)
    assert [p.stickers for p in machine.step(2)] == [(1, 13), (2, 14), (3, 15), (4, 16)]


def test_first_packets_after_n_steps():
    machine = FifimaticMachine(AMICI)
    out = [machine.step(k) for k in range(1, 7)]
    assert all(not o for o in out[:5])
    assert len(out[5]) == 4
    # belt 0: row 5 of sheet 1, row 4 of sheet 2, ..., row 0 of sheet 6
    assert [sticker_to_position(AMICI, x) for x in out[5][0].stickers] == [
        (k, 6 - k, 0) for k in range(1, 7)
    ]


@pytest.mark.parametrize("orientation", ["descending", "ascending"])
@pytest.mark.parametrize("cfg", PRESET_LIST, ids=list(PRESETS))
def test_vectorised_matches_stepping(cfg, orientation):
    rng = np.random.default_rng(4)
    sheets = rng.integers(1, cfg.sheet_count + 1, size=40)
    machine = FifimaticMachine(cfg, orientation)
    assert machine.feed(sheets) == assemble_packets(cfg, sheets, orientation).to_packets()


def test_step_rejects_bad_sheet():
    with pytest.raises(AlbumError):
        FifimaticMachine(WM2014).step(33)


def test_machine_requires_packet_size_n():
    cfg = AlbumConfig(640, 4, 5)
    with pytest.raises(AlbumError):
        FifimaticMachine(cfg)
    with pytest.raises(AlbumError):
        assemble_packets(cfg, [1, 2, 3, 4, 5])


def assert_machine_packet(cfg, stickers):
    positions = [sticker_to_position(cfg, x) for x in stickers]
    assert len(set(stickers)) == cfg.packet_size
    assert len({p.column for p in positions}) == 1
    assert sorted(p.row for p in positions) == list(range(cfg.quadrotte_rows))


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(PRESET_LIST),
    st.sampled_from(["descending", "ascending"]),
    st.data(),
)
def test_satz1_arbitrary_sequences(cfg, orientation, data):
    sheets = data.draw(st.lists(st.integers(1, cfg.sheet_count), min_size=cfg.quadrotte_rows, max_size=60))
    batch = assemble_packets(cfg, sheets, orientation)
    assert len(batch) == 4 * (len(sheets) - cfg.quadrotte_rows + 1)
    for row in batch.stickers.tolist():
        assert_machine_packet(cfg, row)


@pytest.mark.parametrize("cfg", PRESET_LIST, ids=list(PRESETS))
def test_satz1_constant_feed(cfg):
    packets = FifimaticMachine(cfg).feed([7] * 30)
    assert packets
    for p in packets:
        assert_machine_packet(cfg, p.stickers)
        assert {sticker_to_position(cfg, x).sheet for x in p.stickers} == {7}


def test_short_feed_emits_nothing():
    assert len(assemble_packets(WM2014, [1, 2, 3, 4])) == 0


def test_produce_toy(toy):
    packets = produce(toy, MixingStrategy("cyclic"), 4)
    assert len(packets) == 4
    assert [p.belt for p in packets] == [0, 1, 2, 3]
    assert all(len(set(p.stickers)) == 2 for p in packets)


def test_produce_deterministic_and_column_pure():
    strategy = MixingStrategy("iid", seed=17)
    a = produce(WM2014, strategy, 100)
    assert a == produce(WM2014, strategy, 100)
    assert len(a) == 100
    batch = produce_batch(WM2014, strategy, 20_000)
    columns = (batch.stickers - 1) % 4
    assert np.all(columns == columns[:, :1])
    assert np.all(columns[:, 0] == batch.belts)


def test_produce_rejects_zero():
    with pytest.raises(AlbumError):
        produce(WM2014, MixingStrategy(), 0)


def test_satz2_toy_exhaustive(toy):
    # every packet the toy machine can ever emit: a column and one sheet per row
    possible = {
        frozenset((k - 1) * 8 + 4 * i + j + 1 for i, k in enumerate(choice))
        for j in range(4)
        for choice in itertools.product((1, 2), repeat=2)
    }
    assert len(possible) == fifimatic_packet_count(16, 2) == 16
    batch = produce_batch(toy, MixingStrategy("block", seed=3), 4000)
    seen = {frozenset(row) for row in batch.stickers.tolist()}
    assert seen == possible
    all_pairs = {frozenset(c) for c in itertools.combinations(range(1, 17), 2)}
    assert len(all_pairs) == 120 and seen < all_pairs


def test_pack_displays_arity():
    packets = produce(AMICI, MixingStrategy("iid", seed=1), 100)
    displays = pack_displays(packets, AMICI)
    assert len(displays) == 2
    assert all(len(d) == 50 and len(d.stickers) == 300 for d in displays)
    # round robin keeps emission order
    assert [p for d in displays for p in d.packets] == packets


def test_pack_displays_single_belt():
    packets = produce(AMICI, MixingStrategy("iid", seed=1), 400)
    displays = pack_displays(packets, AMICI, policy="single-belt")
    assert len(displays) == 8
    for d in displays:
        assert len({p.belt for p in d.packets}) == 1
        ticks = [p.tick for p in d.packets]
        assert ticks == sorted(ticks)


def test_pack_displays_errors():
    packets = produce(AMICI, MixingStrategy("iid"), 10)
    with pytest.raises(AlbumError):
        pack_displays(packets, AMICI)
    packets = produce(AMICI, MixingStrategy("iid"), 60)
    with pytest.raises(AlbumError):
        pack_displays(packets, AMICI, policy="random")


@pytest.mark.parametrize("policy", ["round-robin", "single-belt"])
def test_display_arrays_match_pack_displays(policy):
    batch = produce_batch(AMICI, MixingStrategy("iid", seed=9), 1000)
    streams = display_arrays(batch, AMICI, policy)
    displays = pack_displays(batch.to_packets(), AMICI, policy)
    assert streams.tolist() == [d.stickers for d in displays]


@pytest.mark.parametrize("cfg", [AMICI, WM2014], ids=["amici", "wm2014"])
def test_cyclic_displays_have_no_duplicates(cfg):
    packets = produce(cfg, MixingStrategy("cyclic"), 20 * cfg.display_packets)
    for d in pack_displays(packets, cfg):
        assert count_duplicates(d.stickers).duplicates == 0


def test_iid_display_duplicates_match_analytic():
    batch = produce_batch(AMICI, MixingStrategy("iid", seed=21), 20_000 * AMICI.display_packets)
    dups = duplicates_per_row(display_arrays(batch, AMICI))
    se = dups.std() / np.sqrt(dups.size)
    assert abs(dups.mean() - expected_iid_display_duplicates(AMICI)) < 4 * se


def test_iid_display_duplicates_single_belt():
    batch = produce_batch(AMICI, MixingStrategy("iid", seed=22), 2_000 * 4 * AMICI.display_packets)
    dups = duplicates_per_row(display_arrays(batch, AMICI, "single-belt"))
    se = dups.std() / np.sqrt(dups.size)
    assert abs(dups.mean() - expected_iid_display_duplicates(AMICI, "single-belt")) < 4 * se


@pytest.mark.parametrize("cfg, q", [(WM2014, 32), (AMICI, 24)], ids=["wm2014", "amici"])
@pytest.mark.parametrize("orientation", ["descending", "ascending"])
def test_next_card_candidates(cfg, q, orientation):
    for x in (1, 7, cfg.total_stickers // 2, cfg.total_stickers):
        result = next_card_candidates(cfg, x, orientation)
        assert len(result) == q
        assert x not in result
        col = sticker_to_position(cfg, x).column
        assert {sticker_to_position(cfg, y).column for y in result} == {col}


@pytest.mark.parametrize("orientation", ["descending", "ascending"])
def test_next_card_candidates_cover_observed_successors(orientation):
    batch = produce_batch(WM2014, MixingStrategy("iid", seed=2), 4000, orientation)
    for belt in range(4):
        stream = batch.stickers[batch.belts == belt].reshape(-1).tolist()
        for x, y in zip(stream[:500], stream[1:501]):
            assert y in next_card_candidates(WM2014, x, orientation)


def test_packet_mate_candidates_sizes():
    for x in (1, 100, 640):
        result = packet_mate_candidates(WM2014, x)
        assert len(result) == 128
        col = sticker_to_position(WM2014, x).column
        assert all(sticker_to_position(WM2014, y).column == col for y in result)
    assert len(packet_mate_candidates(AMICI, 5)) == 24 * 5


def test_packet_mates_equal_toy_cooccurrence(toy):
    batch = produce_batch(toy, MixingStrategy("iid", seed=5), 4000)
    mates = {x: set() for x in range(1, 17)}
    for a, b in batch.stickers.tolist():
        mates[a].add(b)
        mates[b].add(a)
    for x in range(1, 17):
        assert len(packet_mate_candidates(toy, x)) == 2
        assert mates[x] == packet_mate_candidates(toy, x)


def test_packet_provenance():
    p = produce(WM2014, MixingStrategy("iid", seed=3), 9)
    assert [x.tick for x in p] == [4, 4, 4, 4, 5, 5, 5, 5, 6]
    assert all(isinstance(x, Packet) and x.source == "machine" for x in p)
