import numpy as np
import pytest

from memsoc.chip.bridge import (
    STREAM_DATA,
    BridgeConfig,
    ChipBridge,
    InboundWord,
    ReadyPattern,
    assemble_bytes,
    connect,
    join_halves,
    read_capture,
    split_word,
)
from memsoc.core.errors import AlreadyConnected


def pump(bridge, words, streams, beats_per_step=2, limit=1_000_000):
    """Push every word, advancing the bridge whenever its FIFO is full."""
    i = 0
    spent = 0
    while i < len(words) or bridge.tx_fifo:
        while i < len(words) and bridge.tx_push(words[i], streams[i]):
            i += 1
        bridge.advance_beats(beats_per_step)
        spent += 1
        assert spent < limit


def test_split_and_join_halves():
    assert split_word(0x12345678) == (0x5678, 0x1234)
    assert join_halves(0x5678, 0x1234) == 0x12345678
    assert assemble_bytes([0x11, 0x22, 0x33, 0x44]) == 0x44332211


def test_loopback_preserves_words_and_order():
    rng = np.random.default_rng(5)
    words = rng.integers(0, 2**32, size=10_000, dtype=np.uint64).tolist()
    streams = rng.integers(0, 4, size=10_000).tolist()
    bridge = ChipBridge()
    pump(bridge, words, streams)
    captured = bridge.captured
    assert [w for _b, _a, w in captured] == words
    assert [a for _b, a, _w in captured] == streams
    assert bridge.words_transferred == 10_000
    assert bridge.stall_beats == 0


def test_word_takes_two_beats():
    bridge = ChipBridge()
    bridge.tx_push(0xDEADBEEF, STREAM_DATA)
    assert bridge.advance_beats(1) == 1
    assert bridge.words_transferred == 0
    assert bridge.advance_beats(1) == 1
    assert bridge.captured == [(0, STREAM_DATA, 0xDEADBEEF)]


def test_tx_fifo_refuses_partial_words():
    bridge = ChipBridge(BridgeConfig(tx_fifo_depth=5))
    assert bridge.tx_push(1, 0)
    assert bridge.tx_push(2, 0)
    assert not bridge.tx_push(3, 0)
    assert len(bridge.tx_fifo) == 4


def test_half_ready_receiver_stalls_but_delivers():
    bridge = ChipBridge(ready=ReadyPattern(0.5, seed=9))
    words = list(range(500))
    pump(bridge, words, [STREAM_DATA] * 500)
    assert [w for _b, _a, w in bridge.captured] == words
    assert bridge.stall_beats > 0


def test_never_ready_receiver_transfers_nothing():
    bridge = ChipBridge(ready=ReadyPattern(0.0))
    bridge.tx_push(7, 0)
    assert bridge.advance_beats(100) == 0
    assert bridge.stall_beats == 100
    assert len(bridge.tx_fifo) == 2


def test_ready_pattern_is_seeded():
    a = ReadyPattern(0.3, seed=4)
    b = ReadyPattern(0.3, seed=4)
    assert [a.next() for _ in range(200)] == [b.next() for _ in range(200)]
    with pytest.raises(ValueError):
        ReadyPattern(1.5)


def test_ttl_bytes_assemble_little_endian():
    bridge = ChipBridge()
    for byte in (0x11, 0x22, 0x33, 0x44):
        assert bridge.rx_push(byte, 1)
    assert bridge.config.rx_beat_interval == 20
    bridge.advance_beats(79)
    assert not bridge.inbound
    bridge.advance_beats(1)
    assert bridge.pop_inbound() == InboundWord("ttl", 1, 0x44332211)
    assert bridge.rx_bytes == 4


def test_rx_fifo_depth():
    bridge = ChipBridge(BridgeConfig(rx_fifo_depth=2))
    assert bridge.rx_push(1, 0)
    assert bridge.rx_push(2, 0)
    assert not bridge.rx_push(3, 0)


def test_connected_bridges_feed_each_other():
    a, b = ChipBridge(name="a"), ChipBridge(name="b")
    connect(a, b)
    a.tx_push(0xA5A5_0001, STREAM_DATA)
    b.tx_push(0x5A5A_0002, 2)
    a.advance_beats(2)
    b.advance_beats(2)
    assert b.pop_inbound() == InboundWord("peer", STREAM_DATA, 0xA5A50001)
    assert a.pop_inbound() == InboundWord("peer", 2, 0x5A5A0002)


def test_full_peer_backpressures():
    a, b = ChipBridge(name="a"), ChipBridge(BridgeConfig(inbound_depth=1), name="b")
    connect(a, b)
    a.tx_push(1, 0)
    a.tx_push(2, 0)
    a.advance_beats(10)
    assert len(b.inbound) == 1
    assert a.words_transferred == 1
    assert a.stall_beats > 0
    b.pop_inbound()
    a.advance_beats(10)
    assert a.words_transferred == 2


def test_connect_twice_rejected():
    a, b, c = ChipBridge(name="a"), ChipBridge(name="b"), ChipBridge(name="c")
    connect(a, b)
    with pytest.raises(AlreadyConnected):
        connect(a, c)
    with pytest.raises(ValueError):
        connect(c, c)


def test_monitor_tap_counts_drops():
    class Pkt:
        payload = 3

    bridge = ChipBridge(BridgeConfig(tx_fifo_depth=4))
    for _ in range(3):
        bridge.offer_monitor(Pkt())
    assert bridge.monitor_offered == 3
    assert bridge.monitor_drops == 1


@pytest.mark.parametrize("suffix", [".bin", ".csv"])
def test_capture_files_round_trip(tmp_path, suffix):
    bridge = ChipBridge()
    pump(bridge, [0, 1, 0xFFFFFFFF], [0, 3, 1])
    path = tmp_path / f"monitor{suffix}"
    bridge.write_capture(path)
    assert read_capture(path) == bridge.captured


def test_stats_rates_at_full_speed():
    bridge = ChipBridge()
    pump(bridge, list(range(100)), [0] * 100)
    stats = bridge.stats()
    assert stats["words_transferred"] == 100
    assert stats["tx_gbps"] == pytest.approx(32.0)
