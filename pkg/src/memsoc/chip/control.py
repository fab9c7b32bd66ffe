"""Control plane: register banks, interrupts, AXI stream, sequencer and self-test.

Register map (64 × 32-bit registers per bank, both banks reset to 0)::

    0x00        CHIP_ID
    0x08 + ca   CA_CLKDIV       local clock divider of CA ``ca`` (0 reads as 1)
    0x10 + ca   CA_PARADIGM     0 description default, 1 CiM, 2 CAM, 3 SNN, 4 PC
    0x18        MONITOR_STREAM  bridge stream address of the NoC monitor
    0x20 + s    BRIDGE_TX_ROUTE node receiving inbound peer words of stream ``s``
    0x24 + a    BRIDGE_RX_ROUTE node receiving TTL words of address ``a``

Route registers hold a node id in bits 7:0 and are valid only with
``ROUTE_VALID`` (bit 8) set.  The level of ``irq_in`` selects the active bank
at the next cycle boundary.
"""

from __future__ import annotations

import logging
import threading
from collections import deque
from dataclasses import dataclass
from typing import Any, Deque, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from ..core.errors import BadAddress, ScanDisabled
from ..core.io_utils import write_table
from .instructions import SEQUENCER_OPS, Instruction, parse_program
from .sram import SramModel

log = logging.getLogger(__name__)

REGISTERS_PER_BANK = 64
REG_CHIP_ID = 0x00
REG_CA_CLKDIV = 0x08
REG_CA_PARADIGM = 0x10
REG_MONITOR_STREAM = 0x18
REG_BRIDGE_TX_ROUTE = 0x20
REG_BRIDGE_RX_ROUTE = 0x24
ROUTE_VALID = 0x100

PARADIGM_CODES: Dict[int, Optional[str]] = {0: None, 1: "CiM", 2: "CAM", 3: "SNN", 4: "PC"}
IRQ_CAUSES = ("Ready", "SoftError")
EVENT_COLUMNS = ["cycle", "source", "cause"]


# ---------------------------------------------------------------------------
# Register file
# ---------------------------------------------------------------------------


class RegisterFile:
    """Two JTAG-programmed configuration banks with one active bank."""

    def __init__(self, chip_id: int = 0) -> None:
        self._banks = np.zeros((2, REGISTERS_PER_BANK), dtype=np.uint32)
        self._lock = threading.Lock()
        self._active = 0
        self.generation = 0
        if chip_id:
            for bank in (0, 1):
                self.jtag_write(bank, REG_CHIP_ID, chip_id)

    @staticmethod
    def _check(bank: int, addr: int) -> None:
        if bank not in (0, 1):
            raise BadAddress(f"bank {bank} is not 0 or 1")
        if not 0 <= addr < REGISTERS_PER_BANK:
            raise BadAddress(f"register 0x{addr:02X} outside 0x00..0x{REGISTERS_PER_BANK - 1:02X}")

    def jtag_write(self, bank: int, addr: int, value: int) -> None:
        self._check(bank, addr)
        with self._lock:
            self._banks[bank, addr] = int(value) & 0xFFFFFFFF
            self.generation += 1

    def jtag_read(self, bank: int, addr: int) -> int:
        self._check(bank, addr)
        with self._lock:
            return int(self._banks[bank, addr])

    @property
    def active_bank(self) -> int:
        return self._active

    def select_bank(self, bank: int) -> None:
        with self._lock:
            self._active = 1 if bank else 0

    def active_config(self) -> Dict[str, Any]:
        """Decoded view of the active bank, read under one lock acquisition."""
        with self._lock:
            regs = self._banks[self._active].copy()
        return {
            "chip_id": int(regs[REG_CHIP_ID]),
            "ca_clock_divider": [max(1, int(regs[REG_CA_CLKDIV + ca])) for ca in range(7)],
            "ca_paradigm": [PARADIGM_CODES.get(int(regs[REG_CA_PARADIGM + ca]) & 0x7) for ca in range(7)],
            "monitor_stream": int(regs[REG_MONITOR_STREAM]) & 0b11,
            "tx_route": [_route(int(regs[REG_BRIDGE_TX_ROUTE + s])) for s in range(4)],
            "rx_route": [_route(int(regs[REG_BRIDGE_RX_ROUTE + a])) for a in range(2)],
        }

    def flop_bits(self) -> np.ndarray:
        """All register flops as a bit vector (bank-major, register, LSB first)."""
        with self._lock:
            return np.unpackbits(self._banks.astype("<u4").view(np.uint8), bitorder="little")


def _route(value: int) -> Optional[int]:
    return value & 0xFF if value & ROUTE_VALID else None


def route_value(node: int) -> int:
    return ROUTE_VALID | (node & 0xFF)


# ---------------------------------------------------------------------------
# Interrupts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IrqEvent:
    cycle: int
    source: str
    cause: str


class IrqLines:
    """INTRPT 1:0.  ``irq_in`` may be driven from outside the simulation."""

    def __init__(self) -> None:
        self.irq_in = False
        self.irq_out = False
        self.events: List[IrqEvent] = []
        self._pending: Optional[bool] = None
        self._lock = threading.Lock()

    def set_irq_in(self, level: bool) -> None:
        with self._lock:
            self._pending = bool(level)

    def sample(self) -> bool:
        """Latch the last driven ``irq_in`` level; called at each cycle boundary."""
        with self._lock:
            if self._pending is not None:
                self.irq_in = self._pending
                self._pending = None
            return self.irq_in

    def raise_irq_out(self, cycle: int, cause: str, source: str = "chip") -> IrqEvent:
        if cause not in IRQ_CAUSES:
            raise ValueError(f"irq cause must be one of {IRQ_CAUSES}, got '{cause}'")
        event = IrqEvent(cycle, source, cause)
        self.events.append(event)
        self.irq_out = True
        log.info("irq_out %s from %s at cycle %d", cause, source, cycle)
        return event

    def acknowledge(self) -> None:
        self.irq_out = False

    def event_records(self) -> List[Dict[str, Any]]:
        return [{"cycle": e.cycle, "source": e.source, "cause": e.cause} for e in self.events]

    def write_events(self, path) -> None:
        write_table(self.event_records(), path, headers=EVENT_COLUMNS)


# ---------------------------------------------------------------------------
# AXI stream
# ---------------------------------------------------------------------------

AXI_DATA_LINES = 8
AXI_HANDSHAKE_LINES = 3  # TVALID, TREADY, TLAST
AXI_SIDEBAND_LINES = 4  # TDEST / TUSER
AXI_LINES = AXI_DATA_LINES + AXI_HANDSHAKE_LINES + AXI_SIDEBAND_LINES


class AxiStream:
    """15-line AXI stream between an external host and the sequencer mailbox.

    One byte crosses per AXI beat; a beat takes ``kernel_clock / line_rate``
    kernel cycles.  The inbound direction stalls (TREADY low) while the
    mailbox is full.
    """

    def __init__(self, line_rate_bps: float = 100e6, kernel_clock_hz: float = 1e9, mailbox_depth: int = 64) -> None:
        self.line_rate_bps = line_rate_bps
        self.cycles_per_beat = max(1, round(kernel_clock_hz / line_rate_bps))
        self.mailbox_depth = mailbox_depth
        self.host_pending: Deque[int] = deque()
        self.mailbox: Deque[int] = deque()
        self.device_pending: Deque[int] = deque()
        self.host_received: List[int] = []
        self.beats = 0
        self._next_in = 0
        self._next_out = 0

    @staticmethod
    def _bytes(words: Iterable[int]) -> List[int]:
        out = [int(w) for w in words]
        if any(not 0 <= w <= 0xFF for w in out):
            raise ValueError("AXI payloads are 8-bit values")
        return out

    def host_send(self, words: Iterable[int]) -> None:
        self.host_pending.extend(self._bytes(words))

    def device_send(self, words: Iterable[int]) -> None:
        self.device_pending.extend(self._bytes(words))

    @property
    def busy(self) -> bool:
        return bool(self.host_pending or self.device_pending)

    def tick(self, cycle: int) -> bool:
        """Advance one kernel cycle; True when a beat crossed in either direction."""
        moved = False
        if self.host_pending and cycle >= self._next_in and len(self.mailbox) < self.mailbox_depth:
            self.mailbox.append(self.host_pending.popleft())
            self._next_in = cycle + self.cycles_per_beat
            moved = True
        if self.device_pending and cycle >= self._next_out:
            self.host_received.append(self.device_pending.popleft())
            self._next_out = cycle + self.cycles_per_beat
            moved = True
        if moved:
            self.beats += 1
        return moved

    def take_mailbox(self, count: int) -> Optional[List[int]]:
        if len(self.mailbox) < count:
            return None
        return [self.mailbox.popleft() for _ in range(count)]


# ---------------------------------------------------------------------------
# Sequencer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceEntry:
    cycle: int
    op: str
    result: Any = None

    def to_dict(self) -> Dict[str, Any]:
        return {"cycle": self.cycle, "op": self.op, "result": self.result}


class Sequencer:
    """Scripted stand-in for the RISC-V controller.

    The host object passed to :meth:`tick` is the simulation kernel; the
    sequencer uses its ``registers``, ``irq``, ``axi``, ``arrays``,
    ``shared_srams``, ``activity``, ``port(node)`` and ``raise_irq_out``
    members.
    """

    def __init__(self, node: int = 7) -> None:
        self.node = node
        self.program: List[Instruction] = []
        self.trace: List[TraceEntry] = []
        self.running = False
        self.halted = False
        self._pc = 0
        self._started = False

    def load(self, program: Sequence[Mapping[str, Any] | Instruction]) -> None:
        self.program = parse_program(program, SEQUENCER_OPS)
        self.trace = []
        self._pc = 0
        self._started = False
        self.halted = False
        self.running = bool(self.program)

    def _retire(self, cycle: int, instr: Instruction, result: Any = None) -> None:
        self.trace.append(TraceEntry(cycle, instr.op, result))
        self._pc += 1
        self._started = False
        if self._pc >= len(self.program):
            self.running = False

    def tick(self, cycle: int, host: Any) -> None:
        if not self.running:
            return
        instr = self.program[self._pc]
        op = instr.op
        if op == "Halt":
            host.raise_irq_out("Ready", "sequencer")
            self.running = False
            self.halted = True
        elif op == "WriteReg":
            host.registers.jtag_write(int(instr.get("bank", 0)), int(instr.require("addr")), int(instr.require("value")))
            self._retire(cycle, instr)
        elif op == "ReadReg":
            self._retire(cycle, instr, host.registers.jtag_read(int(instr.get("bank", 0)), int(instr.require("addr"))))
        elif op == "SendNoC":
            if host.port(self.node).send(int(instr.require("dst")), int(instr.require("word")), int(instr.get("tag", 0))):
                self._retire(cycle, instr, True)
        elif op == "AwaitNoC":
            word = host.port(self.node).recv()
            if word is not None:
                self._retire(cycle, instr, word)
        elif op == "RunCA":
            ca = host.arrays[int(instr.require("ca"))]
            if not self._started:
                ca.load(instr.require("program"))
                self._started = True
                if not instr.get("wait", False):
                    self._retire(cycle, instr, "started")
            elif not ca.running:
                self._retire(cycle, instr, ca.results)
        elif op == "WaitIrq":
            if host.irq.irq_in == bool(instr.get("level", True)):
                self._retire(cycle, instr, True)
        elif op == "RaiseIrqOut":
            cause = str(instr.get("cause", "Ready"))
            host.raise_irq_out(cause, "sequencer")
            self._retire(cycle, instr, cause)
        elif op == "AxiRead":
            data = host.axi.take_mailbox(int(instr.get("count", 1)))
            if data is not None:
                self._retire(cycle, instr, data)
        elif op in ("LoadShared", "StoreShared"):
            self._retire(cycle, instr, _shared_access(host, instr))


def _shared_access(host: Any, instr: Instruction) -> Any:
    """Byte load or store on one of the two shared SRAMs."""
    bank = int(instr.get("bank", 0))
    if not 0 <= bank < len(host.shared_srams):
        raise BadAddress(f"shared SRAM bank {bank} outside 0..{len(host.shared_srams) - 1}")
    mem: SramModel = host.shared_srams[bank]
    addr = int(instr.require("addr"))
    if instr.op == "LoadShared":
        values = None
        size = int(instr.get("count", 1))
    else:
        values = [int(v) & 0xFF for v in instr.require("values")]
        size = len(values)
    if addr < 0 or addr + size > len(mem):
        raise BadAddress(f"{mem.name}: {size} bytes at {addr} outside 0..{len(mem) - 1}")
    host.activity.record_active("shared_sram")
    if values is None:
        return [int(v) for v in mem.read(slice(addr, addr + size))]
    mem.write(slice(addr, addr + size), values)
    return size


# ---------------------------------------------------------------------------
# Memory built-in self-test
# ---------------------------------------------------------------------------

# (order, reads, write); order "up" / "down" / "any", read/write values 0 or 1
MARCH_C_MINUS = (
    ("any", None, 0),
    ("up", 0, 1),
    ("up", 1, 0),
    ("down", 0, 1),
    ("down", 1, 0),
    ("any", 0, None),
)


@dataclass(frozen=True)
class MbistResult:
    target: str
    passed: bool
    first_fault_addr: Optional[int] = None
    element: Optional[int] = None
    addresses: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "target": self.target,
            "pass": self.passed,
            "first_fault_addr": self.first_fault_addr,
            "element": self.element,
            "addresses": self.addresses,
        }


def march_c_minus(mem: SramModel) -> MbistResult:
    """Run March C− with all-0 / all-1 data backgrounds.

    Each element is applied to the whole array at once; for single-cell
    faults this observes exactly what the address-ordered walk observes, with
    the first miscompare at the lowest address for ascending elements and the
    highest for descending ones.
    """
    pattern = {0: np.uint8(0x00), 1: np.uint8(0xFF)}
    everything = slice(None)
    for index, (order, expect, write) in enumerate(MARCH_C_MINUS):
        if expect is not None:
            bad = np.flatnonzero(mem.read(everything) != pattern[expect])
            if bad.size:
                addr = int(bad[-1] if order == "down" else bad[0])
                log.info("%s: March C- element %d miscompare at 0x%X", mem.name, index, addr)
                return MbistResult(mem.name, False, addr, index, mem.size)
        if write is not None:
            mem.write(everything, np.full(mem.size, pattern[write], dtype=np.uint8))
    return MbistResult(mem.name, True, None, None, mem.size)


# ---------------------------------------------------------------------------
# Scan chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanResult:
    coverage: float
    first_mismatch: Optional[int]
    length: int

    @property
    def passed(self) -> bool:
        return self.first_mismatch is None

    def to_dict(self) -> Dict[str, Any]:
        return {"coverage": self.coverage, "first_mismatch": self.first_mismatch, "length": self.length}


class ScanChain:
    """Serial chain through the configuration flops; bit 0 is next to scan-out."""

    def __init__(self, length: int = 2 * REGISTERS_PER_BANK * 32) -> None:
        self.length = length
        self.flops = np.zeros(length, dtype=np.uint8)
        self.broken_at: Optional[int] = None
        self.stuck_value = 0

    def inject_break(self, position: int, stuck_value: int = 0) -> None:
        if not 0 <= position < self.length:
            raise IndexError(f"scan position {position} outside 0..{self.length - 1}")
        self.broken_at = position
        self.stuck_value = 1 if stuck_value else 0
        self._apply_fault()

    def _apply_fault(self) -> None:
        if self.broken_at is not None:
            self.flops[self.broken_at] = self.stuck_value

    def parallel_load(self, bits: np.ndarray) -> None:
        self.flops[:] = bits
        self._apply_fault()

    def shift(self, bits_in: np.ndarray) -> np.ndarray:
        """Shift ``bits_in`` in from the far end; returns the bits seen at scan-out."""
        out = np.empty(len(bits_in), dtype=np.uint8)
        for i, b in enumerate(bits_in):
            out[i] = self.flops[0]
            self.flops[:-1] = self.flops[1:]
            self.flops[-1] = b
            self._apply_fault()
        return out


def scan_chain_check(chain: ScanChain, scan_enable: bool, seed: int = 0) -> ScanResult:
    """Check the chain with a pseudo-random pattern and its complement.

    The pattern is parallel-loaded and unloaded while a second pattern shifts
    in; that second pattern is then unloaded, and finally the complement of
    the first pattern is loaded and unloaded.  A stuck cell corrupts every
    unloaded bit at or beyond its position, so the first miscompare of the
    two parallel loads marks the broken cell.
    """
    if not scan_enable:
        raise ScanDisabled("SCAN_EN is low")
    rng = np.random.default_rng([seed, 0x5CA])
    loaded = rng.integers(0, 2, chain.length, dtype=np.uint8)
    shifted = rng.integers(0, 2, chain.length, dtype=np.uint8)
    flush = np.zeros(chain.length, dtype=np.uint8)

    chain.parallel_load(loaded)
    parallel_bad = chain.shift(shifted) != loaded
    serial_bad = chain.shift(flush) != shifted
    chain.parallel_load(1 - loaded)
    parallel_bad |= chain.shift(flush) != 1 - loaded

    bad = np.flatnonzero(parallel_bad)
    if bad.size == 0 and serial_bad.any():
        bad = np.flatnonzero(serial_bad)
    if bad.size == 0:
        return ScanResult(1.0, None, chain.length)
    first = int(bad[0])
    return ScanResult(first / chain.length, first, chain.length)
