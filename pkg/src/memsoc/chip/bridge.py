"""Die-to-die chip bridge.

Transmit side: 16 LVDS data lanes at 2 Gbit/s plus a 2-bit stream address and
valid/ready handshake lines.  A 32-bit word leaves as two 16-bit beats, low
half first.  With a NoC at 1 GHz the bridge runs two beats per NoC cycle, so
the transmit path carries exactly one NoC word per cycle (32 Gbit/s).

Receive side: 8 TTL lines at 100 Mbit/s.  Bytes are assembled low byte first
into 32-bit words per 1-bit address; one byte drains every
``tx_rate / rx_rate`` transmit beats.

A bridge without a peer hands transmitted beats to an external receiver whose
ready line follows a seeded :class:`ReadyPattern`; two bridges joined with
:func:`connect` feed each other's inbound word queue.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Deque, Dict, List, Optional, Tuple

import numpy as np

from ..core.errors import AlreadyConnected
from ..core.io_utils import read_table, table_records, write_table

log = logging.getLogger(__name__)

STREAM_MONITOR, STREAM_DATA, STREAM_CONTROL, STREAM_DEBUG = 0, 1, 2, 3

CAPTURE_DTYPE = np.dtype([("beat_index", "<u8"), ("stream_addr", "u1"), ("word", "<u4")])
CAPTURE_COLUMNS = ["beat_index", "stream_addr", "word"]


def split_word(word: int) -> Tuple[int, int]:
    """Return the (low, high) 16-bit halves of a 32-bit word."""
    word &= 0xFFFFFFFF
    return word & 0xFFFF, word >> 16


def join_halves(low: int, high: int) -> int:
    return (low & 0xFFFF) | ((high & 0xFFFF) << 16)


def assemble_bytes(data: List[int]) -> int:
    """Little-endian byte assembly: ``[0x11, 0x22, 0x33, 0x44]`` → ``0x44332211``."""
    word = 0
    for i, b in enumerate(data[:4]):
        word |= (b & 0xFF) << (8 * i)
    return word


@dataclass(frozen=True)
class TxBeat:
    data: int
    addr: int
    valid: bool = True
    cycle: int = -1


@dataclass(frozen=True)
class RxBeat:
    data: int
    addr: int
    valid: bool = True


@dataclass(frozen=True)
class InboundWord:
    source: str  # "peer" or "ttl"
    stream: int
    word: int


@dataclass(frozen=True)
class BridgeConfig:
    tx_lanes: int = 16
    tx_rate_bps: float = 2e9
    rx_lanes: int = 8
    rx_rate_bps: float = 100e6
    tx_fifo_depth: int = 64  # beats
    rx_fifo_depth: int = 16  # bytes
    inbound_depth: int = 16  # words
    noc_clock_hz: float = 1e9

    def __post_init__(self) -> None:
        if self.tx_fifo_depth < 2:
            raise ValueError("tx_fifo_depth must hold at least one word (2 beats)")
        if self.rx_fifo_depth < 1 or self.inbound_depth < 1:
            raise ValueError("rx_fifo_depth and inbound_depth must be >= 1")

    @property
    def beats_per_noc_cycle(self) -> int:
        return max(1, round(self.tx_rate_bps / self.noc_clock_hz))

    @property
    def rx_beat_interval(self) -> int:
        """Transmit beats per receive beat (one byte across the 8 TTL lines)."""
        return max(1, round(self.tx_rate_bps / self.rx_rate_bps))

    @classmethod
    def from_dict(cls, data: Dict) -> "BridgeConfig":
        fields = cls.__dataclass_fields__
        return cls(**{k: v for k, v in data.items() if k in fields})


class ReadyPattern:
    """Ready line of an external receiver: asserted with ``probability`` per beat."""

    def __init__(self, probability: float = 1.0, seed: int = 0) -> None:
        if not 0.0 <= probability <= 1.0:
            raise ValueError(f"ready probability must lie in [0, 1], got {probability}")
        self.probability = probability
        self.seed = seed
        self._rng = np.random.default_rng([seed, 0xB41D])

    def next(self) -> bool:
        if self.probability >= 1.0:
            return True
        if self.probability <= 0.0:
            return False
        return bool(self._rng.random() < self.probability)


class ChipBridge:
    def __init__(
        self,
        config: BridgeConfig = BridgeConfig(),
        ready: Optional[ReadyPattern] = None,
        name: str = "chip",
        capture: bool = True,
    ) -> None:
        self.config = config
        self.ready = ready if ready is not None else ReadyPattern()
        self.name = name
        self.peer: Optional["ChipBridge"] = None
        self.monitor_stream = STREAM_MONITOR
        self.tx_fifo: Deque[TxBeat] = deque()
        self.rx_fifo: Deque[RxBeat] = deque()
        self.inbound: Deque[InboundWord] = deque()
        self.captured: Optional[List[Tuple[int, int, int]]] = [] if capture else None
        self._rx_assembly: Dict[int, List[int]] = {0: [], 1: []}
        self._tx_low: Optional[Tuple[int, int]] = None  # (beat index, low half) awaiting the high beat
        self.beat = 0
        self.words_pushed = 0
        self.beats_transferred = 0
        self.words_transferred = 0
        self.stall_beats = 0
        self.rx_bytes = 0
        self.monitor_offered = 0
        self.monitor_drops = 0

    # -- transmit ----------------------------------------------------------

    def tx_push(self, word: int, stream: int) -> bool:
        """Queue a word as two beats; False when the FIFO lacks room for both."""
        if len(self.tx_fifo) + 2 > self.config.tx_fifo_depth:
            return False
        low, high = split_word(int(word))
        addr = int(stream) & 0b11
        self.tx_fifo.append(TxBeat(low, addr))
        self.tx_fifo.append(TxBeat(high, addr))
        self.words_pushed += 1
        return True

    def offer_monitor(self, pkt) -> None:
        """NoC tap sink: mirror a delivered packet onto the monitor stream."""
        self.monitor_offered += 1
        if not self.tx_push(pkt.payload, self.monitor_stream):
            self.monitor_drops += 1

    def _link_ready(self) -> bool:
        if self.peer is not None:
            return len(self.peer.inbound) < self.peer.config.inbound_depth
        return self.ready.next()

    def _transfer(self, beat: TxBeat, index: int) -> None:
        if self._tx_low is None:
            self._tx_low = (index, beat.data)
            return
        first, low = self._tx_low
        self._tx_low = None
        word = join_halves(low, beat.data)
        self.words_transferred += 1
        if self.captured is not None:
            self.captured.append((first, beat.addr, word))
        if self.peer is not None:
            self.peer.inbound.append(InboundWord("peer", beat.addr, word))

    # -- receive -----------------------------------------------------------

    def rx_push(self, byte: int, addr: int) -> bool:
        """Offer one TTL byte; False when the receive FIFO is full."""
        if len(self.rx_fifo) >= self.config.rx_fifo_depth:
            return False
        self.rx_fifo.append(RxBeat(int(byte) & 0xFF, int(addr) & 1))
        return True

    def _drain_rx(self) -> None:
        if not self.rx_fifo:
            return
        head = self.rx_fifo[0]
        pending = self._rx_assembly[head.addr]
        if len(pending) == 3 and len(self.inbound) >= self.config.inbound_depth:
            return
        self.rx_fifo.popleft()
        self.rx_bytes += 1
        pending.append(head.data)
        if len(pending) == 4:
            self.inbound.append(InboundWord("ttl", head.addr, assemble_bytes(pending)))
            pending.clear()

    # -- timeline ----------------------------------------------------------

    def advance_beats(self, beats: int) -> int:
        """Run ``beats`` transmit beats; returns how many beats transferred."""
        transferred = 0
        interval = self.config.rx_beat_interval
        for _ in range(beats):
            index = self.beat
            self.beat += 1
            if self.tx_fifo:
                if self._link_ready():
                    head = self.tx_fifo.popleft()
                    self._transfer(head, index)
                    transferred += 1
                else:
                    self.stall_beats += 1
            if index % interval == interval - 1:
                self._drain_rx()
        self.beats_transferred += transferred
        return transferred

    def pop_inbound(self) -> Optional[InboundWord]:
        return self.inbound.popleft() if self.inbound else None

    # -- reporting ---------------------------------------------------------

    def stats(self) -> Dict[str, float]:
        seconds = self.beat / self.config.tx_rate_bps if self.beat else 0.0
        return {
            "beats": self.beat,
            "beats_transferred": self.beats_transferred,
            "stall_beats": self.stall_beats,
            "words_pushed": self.words_pushed,
            "words_transferred": self.words_transferred,
            "words_captured": len(self.captured) if self.captured is not None else 0,
            "tx_fifo_beats": len(self.tx_fifo),
            "monitor_offered": self.monitor_offered,
            "monitor_drops": self.monitor_drops,
            "rx_bytes": self.rx_bytes,
            "inbound_words": len(self.inbound),
            "tx_gbps": self.beats_transferred * self.config.tx_lanes / seconds / 1e9 if seconds else 0.0,
            "rx_gbps": self.rx_bytes * 8 / seconds / 1e9 if seconds else 0.0,
        }

    def capture_array(self) -> np.ndarray:
        return np.array(self.captured or [], dtype=CAPTURE_DTYPE)

    def write_capture(self, path: str | Path) -> None:
        """Write captured words as packed binary records, or CSV for ``*.csv``."""
        p = Path(path)
        if p.suffix.lower() == ".csv":
            write_table([dict(zip(CAPTURE_COLUMNS, rec)) for rec in (self.captured or [])], p, headers=CAPTURE_COLUMNS)
            return
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(self.capture_array().tobytes())


def read_capture(path: str | Path) -> List[Tuple[int, int, int]]:
    p = Path(path)
    if p.suffix.lower() == ".csv":
        rows = table_records(read_table(p))
        return [(int(r["beat_index"]), int(r["stream_addr"]), int(r["word"])) for r in rows]
    arr = np.frombuffer(p.read_bytes(), dtype=CAPTURE_DTYPE)
    return [(int(r["beat_index"]), int(r["stream_addr"]), int(r["word"])) for r in arr]


def connect(a: ChipBridge, b: ChipBridge) -> None:
    """Cross-connect two bridges: each one's transmit path feeds the other's inbound queue."""
    if a is b:
        raise ValueError("cannot connect a bridge to itself")
    if a.peer is not None or b.peer is not None:
        raise AlreadyConnected(f"{a.name} or {b.name} is already connected")
    a.peer = b
    b.peer = a
    log.info("bridge %s connected to %s", a.name, b.name)
