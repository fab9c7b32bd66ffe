"""Simulation kernel: one chip on a single logical timeline.

Each call to :meth:`System.step` simulates one NoC clock cycle in a fixed
order:

1. latch ``irq_in`` and switch the active register bank,
2. apply the active configuration (CA dividers and paradigms, monitor stream),
3. tick the seven CA controllers (SRAM overflows become SoftError interrupts),
4. tick the sequencer, the AXI stream and any synthetic traffic source,
5. inject inbound bridge words according to the route registers,
6. advance the NoC one cycle and dispatch deliveries,
7. run the bridge for the beats of one NoC cycle,
8. record block activity for the energy report.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Deque, Dict, List, Mapping, Optional, Sequence, Tuple

from ..core.errors import CycleBudgetExhausted, SramOutOfRange
from .activity import ActivityLog
from .arrays import ComputeArray, NeuronParams, build_arrays
from .bridge import STREAM_MONITOR, BridgeConfig, ChipBridge, ReadyPattern, connect
from .chipdesc import ChipDescription, reference_chip
from .control import (
    AxiStream,
    IrqEvent,
    IrqLines,
    MbistResult,
    RegisterFile,
    ScanChain,
    ScanResult,
    Sequencer,
    TraceEntry,
    march_c_minus,
    scan_chain_check,
)
from .instructions import Instruction
from .noc import BRIDGE_NODE, PROCESSOR_NODE, Network, NoCConfig, NoCPacket
from .sram import SHARED_SRAM_BYTES, SramModel

log = logging.getLogger(__name__)

SYNTHETIC_TAG = 1 << 31


@dataclass(frozen=True)
class SystemConfig:
    noc: NoCConfig = field(default_factory=NoCConfig)
    bridge: BridgeConfig = field(default_factory=BridgeConfig)
    ready_probability: float = 1.0
    ready_seed: int = 0
    attach_monitor: bool = True
    record_trace: bool = False
    capture_monitor: bool = True
    ca_pipeline: int = 1
    neuron: NeuronParams = field(default_factory=NeuronParams)
    scan_enable: bool = True


class NodePort:
    """Local injection/ejection port of one NoC node."""

    def __init__(self, system: "System", node: int) -> None:
        self._system = system
        self.node = node

    def send(self, dst: int, payload: int, tag: int = 0) -> bool:
        return self._system.noc.inject(NoCPacket(self.node, dst, int(payload) & 0xFFFFFFFF, int(tag)))

    def recv(self) -> Optional[int]:
        inbox = self._system.inboxes[self.node]
        return inbox.popleft() if inbox else None


class System:
    def __init__(self, desc: Optional[ChipDescription] = None, config: SystemConfig = SystemConfig(), seed: Optional[int] = None) -> None:
        self.desc = desc if desc is not None else reference_chip()
        self.config = config
        self.seed = self.desc.seed if seed is None else seed
        self.cycle = 0
        self.activity = ActivityLog()
        self.noc = Network(config.noc, record_trace=config.record_trace)
        bridge_cfg = replace(config.bridge, noc_clock_hz=config.noc.clock_hz)
        self.bridge = ChipBridge(
            bridge_cfg,
            ReadyPattern(config.ready_probability, config.ready_seed),
            name=self.desc.name,
            capture=config.capture_monitor,
        )
        if config.attach_monitor:
            self.noc.attach_tap(self.bridge.offer_monitor)
        self.arrays: List[ComputeArray] = build_arrays(
            self.desc.compute_arrays(),
            chip_seed=self.seed,
            activity=self.activity,
            kernel_clock_hz=config.noc.clock_hz,
            pipeline=config.ca_pipeline,
            neuron=config.neuron,
        )
        self.registers = RegisterFile()
        self.irq = IrqLines()
        self.axi = AxiStream(kernel_clock_hz=config.noc.clock_hz)
        self.sequencer = Sequencer(PROCESSOR_NODE)
        self.scan_chain = ScanChain()
        self.scan_enable = config.scan_enable
        self.shared_srams = [SramModel(SHARED_SRAM_BYTES, f"shared{i}") for i in range(2)]
        self.inboxes: Dict[int, Deque[int]] = {n: deque() for n in range(self.noc.num_nodes)}
        self._ports = {n: NodePort(self, n) for n in range(self.noc.num_nodes)}
        self._bridge_backlog: Deque[Tuple[int, int]] = deque()
        self.monitor_sunk = 0
        self.synthetic_delivered = 0
        self.traffic: Optional[Callable[["System", int], None]] = None
        self.irq_schedule: Dict[int, bool] = {}
        self._routes = self.registers.active_config()

    # -- host-facing operations ---------------------------------------------

    def port(self, node: int) -> NodePort:
        self.noc.check_node(node)
        return self._ports[node]

    def set_irq_in(self, level: bool) -> None:
        """Drive irq_in; the bank switch takes effect at the next cycle boundary."""
        self.irq.set_irq_in(level)

    def raise_irq_out(self, cause: str, source: str = "chip") -> IrqEvent:
        return self.irq.raise_irq_out(self.cycle, cause, source)

    def acknowledge_irq(self) -> None:
        self.irq.acknowledge()

    def axi_stream(self, direction: str, words: Sequence[int], max_cycles: int = 1_000_000) -> List[int]:
        """Move bytes over the AXI stream, stepping the chip until they have crossed."""
        if direction == "in":
            before = len(self.axi.mailbox)
            self.axi.host_send(words)
            self._run_until(lambda: not self.axi.host_pending, max_cycles, "AXI inbound transfer")
            return list(self.axi.mailbox)[before:]
        if direction == "out":
            start = len(self.axi.host_received)
            self.axi.device_send(words)
            self._run_until(lambda: not self.axi.device_pending, max_cycles, "AXI outbound transfer")
            return self.axi.host_received[start:]
        raise ValueError(f"AXI direction must be 'in' or 'out', got '{direction}'")

    def run_sequencer(self, program: Sequence[Mapping[str, Any] | Instruction], max_cycles: int = 1_000_000) -> List[TraceEntry]:
        self.sequencer.load(program)
        self._run_until(lambda: not self.sequencer.running, max_cycles, "sequencer program")
        return list(self.sequencer.trace)

    def mbist_targets(self) -> Dict[str, SramModel]:
        targets = {f"ca{ca.ca_id}": ca.sram for ca in self.arrays}
        targets.update({mem.name: mem for mem in self.shared_srams})
        return targets

    def mbist_run(self, target: str) -> MbistResult:
        try:
            mem = self.mbist_targets()[target]
        except KeyError:
            raise KeyError(f"unknown MBIST target '{target}'; expected one of {sorted(self.mbist_targets())}") from None
        return march_c_minus(mem)

    def scan_chain_check(self) -> ScanResult:
        return scan_chain_check(self.scan_chain, self.scan_enable, self.seed)

    # -- timeline ----------------------------------------------------------

    def _run_until(self, done: Callable[[], bool], max_cycles: int, what: str) -> None:
        spent = 0
        while not done():
            if spent >= max_cycles:
                raise CycleBudgetExhausted(f"{what} did not finish within {max_cycles} cycles")
            self.step()
            spent += 1

    def run(self, cycles: int) -> None:
        for _ in range(cycles):
            self.step()

    def busy(self) -> bool:
        return (
            any(ca.running for ca in self.arrays)
            or self.sequencer.running
            or self.noc.in_flight() > 0
            or bool(self._bridge_backlog)
            or bool(self.bridge.tx_fifo)
            or bool(self.bridge.inbound)
            or self.axi.busy
        )

    def step(self) -> None:
        c = self.cycle
        if c in self.irq_schedule:
            self.irq.set_irq_in(self.irq_schedule.pop(c))
        self.registers.select_bank(self.irq.sample())
        self._apply_config()

        for ca in self.arrays:
            try:
                ca.tick(c, self._ports[ca.ca_id])
            except SramOutOfRange as exc:
                log.warning("%s", exc)
                ca.abort()
                self.raise_irq_out("SoftError", f"ca{ca.ca_id}")

        if self.sequencer.running:
            self.activity.record_active("riscv")
        self.sequencer.tick(c, self)
        if self.axi.tick(c):
            self.activity.record_active("axi")
        if self.traffic is not None:
            self.traffic(self, c)
        self._inject_inbound()

        delivered = self.noc.advance(1)
        if delivered or self.noc.in_flight():
            self.activity.record_active("noc")
        for pkt in delivered:
            if pkt.tag & SYNTHETIC_TAG:
                self.synthetic_delivered += 1
            elif pkt.dst == BRIDGE_NODE:
                self._bridge_backlog.append((pkt.payload, pkt.tag & 0b11))
            else:
                self.inboxes[pkt.dst].append(pkt.payload)
        while self._bridge_backlog and self.bridge.tx_push(*self._bridge_backlog[0]):
            self._bridge_backlog.popleft()

        rx_before = self.bridge.rx_bytes
        moved = self.bridge.advance_beats(self.bridge.config.beats_per_noc_cycle)
        if moved:
            self.activity.record_active("bridge_core")
            self.activity.record_active("bridge_lvds_out")
        if self.bridge.rx_bytes != rx_before:
            self.activity.record_active("bridge_ttl_in")
        self.activity.advance(1)
        self.cycle += 1

    def _apply_config(self) -> None:
        cfg = self.registers.active_config()
        for ca in self.arrays:
            if ca.ca_id < 7:
                ca.clock_divider = cfg["ca_clock_divider"][ca.ca_id]
                ca.set_paradigm(cfg["ca_paradigm"][ca.ca_id])
        self.bridge.monitor_stream = cfg["monitor_stream"]
        self._routes = cfg

    def _inject_inbound(self) -> None:
        word = self.bridge.inbound[0] if self.bridge.inbound else None
        if word is None:
            return
        if word.source == "peer":
            node = self._routes["tx_route"][word.stream]
            if node is None and word.stream == STREAM_MONITOR:
                self.bridge.inbound.popleft()
                self.monitor_sunk += 1
                return
        else:
            node = self._routes["rx_route"][word.stream & 1]
        node = PROCESSOR_NODE if node is None else node
        if self.noc.num_nodes <= BRIDGE_NODE or node == BRIDGE_NODE:
            # no endpoint to inject from: hand the word straight to the node
            self.bridge.inbound.popleft()
            self.inboxes.setdefault(node, deque()).append(word.word)
            return
        if self.noc.inject(NoCPacket(BRIDGE_NODE, node, word.word, word.stream)):
            self.bridge.inbound.popleft()

    # -- reporting ---------------------------------------------------------

    def report(self) -> Dict[str, Any]:
        bridge_stats = dict(self.bridge.stats())
        bridge_stats["monitor_sunk"] = self.monitor_sunk
        return {
            "cycles": self.cycle,
            "noc": self.noc.stats(),
            "bridge": bridge_stats,
            "irq_events": self.irq.event_records(),
            "ca": [
                {"id": ca.ca_id, "paradigm": ca.paradigm, "cycles": ca.cycles, "results": _jsonable(ca.results)}
                for ca in self.arrays
            ],
            "sequencer": {
                "halted": self.sequencer.halted,
                "steps": len(self.sequencer.trace),
                "trace": [_jsonable(t.to_dict()) for t in self.sequencer.trace],
            },
            "synthetic_delivered": self.synthetic_delivered,
            "activity": self.activity.to_dict(),
        }


def connect_systems(a: System, b: System) -> None:
    connect(a.bridge, b.bridge)


def step_pair(a: System, b: System, cycles: int = 1) -> None:
    """Advance two connected chips in lock-step."""
    for _ in range(cycles):
        a.step()
        b.step()


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return value.tolist()
    return value
