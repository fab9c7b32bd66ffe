"""Cycle-approximate 32-bit Network-on-Chip.

Single-flit packets (one 32-bit word each) travel through input-buffered
routers.  Every simulated cycle runs in two phases: requests and grants are
computed against the buffer occupancy at the start of the cycle, then all
granted flits move at once.  Each output port grants at most one flit per
cycle (round-robin, lowest port index first), so no link ever carries more
than 32 bits per cycle.

Topologies
----------
``Mesh3x3``  node ``n`` sits at ``(n % 3, n // 3)``; nodes 0-6 are CA0-CA6,
             node 7 is the RISC-V processor and node 8 the chip-bridge
             endpoint.  XY dimension-order routing.
``Ring8``    nodes 0-7 on a bidirectional ring, shortest direction with ties
             clockwise; injection needs two free downstream slots (bubble
             flow control).

Ejection is a network-wide delivery stage limited to
``max_deliveries_per_cycle`` packets per cycle; this is the monitor point the
chip bridge taps.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Deque, Dict, List, Optional, Tuple

from ..core.errors import BadNodeId, ClockAboveMax, TapAlreadyAttached
from ..core.io_utils import write_table
from ..core.normalization import resolve_enum

log = logging.getLogger(__name__)

LINK_WIDTH_BITS = 32
MAX_NOC_CLOCK_HZ = 1e9

# port indices
LOCAL = 0
NORTH, EAST, SOUTH, WEST = 1, 2, 3, 4
CW, CCW = 1, 2

PROCESSOR_NODE = 7
BRIDGE_NODE = 8

TRACE_COLUMNS = ["cycle", "src", "dst", "tag", "event"]


@dataclass(frozen=True)
class NoCConfig:
    topology: str = "Mesh3x3"
    router_pipeline_cycles: int = 1
    link_width_bits: int = LINK_WIDTH_BITS
    clock_hz: float = 1e9
    fifo_depth: int = 4
    max_deliveries_per_cycle: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "topology", resolve_enum(self.topology, "topology"))
        if self.link_width_bits != LINK_WIDTH_BITS:
            raise ValueError(f"link width is fixed at {LINK_WIDTH_BITS} bits, got {self.link_width_bits}")
        if self.clock_hz > MAX_NOC_CLOCK_HZ or self.clock_hz <= 0:
            raise ClockAboveMax(f"NoC clock must lie in (0, 1 GHz], got {self.clock_hz:g} Hz")
        if self.router_pipeline_cycles < 1:
            raise ValueError("router_pipeline_cycles must be >= 1")
        if self.max_deliveries_per_cycle < 1:
            raise ValueError("max_deliveries_per_cycle must be >= 1")
        min_depth = 2 if self.topology == "Ring8" else 1
        if self.fifo_depth < min_depth:
            raise ValueError(f"fifo_depth must be >= {min_depth} for {self.topology}")

    @classmethod
    def from_dict(cls, data: Dict) -> "NoCConfig":
        fields = cls.__dataclass_fields__
        return cls(**{k: v for k, v in data.items() if k in fields})


@dataclass
class NoCPacket:
    src: int
    dst: int
    payload: int
    tag: int = 0
    inject_cycle: int = -1
    deliver_cycle: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0 <= int(self.payload) <= 0xFFFFFFFF:
            raise ValueError(f"payload {self.payload!r} is not a 32-bit word")

    @property
    def latency(self) -> Optional[int]:
        if self.deliver_cycle is None:
            return None
        return self.deliver_cycle - self.inject_cycle


Sink = Callable[[NoCPacket], None]


class Network:
    """Router network with deterministic arbitration and an optional tap."""

    def __init__(self, config: NoCConfig = NoCConfig(), record_trace: bool = False) -> None:
        self.config = config
        if config.topology == "Mesh3x3":
            self.num_nodes, self.num_ports = 9, 5
            self._route = [[_xy_route(n, d) for d in range(9)] for n in range(9)]
            self._downstream = _mesh_links()
        else:
            self.num_nodes, self.num_ports = 8, 3
            self._route = [[_ring_route(n, d) for d in range(8)] for n in range(8)]
            self._downstream = _ring_links()
        self._bubble = config.topology == "Ring8"
        self._buf: List[List[Deque[Tuple[int, NoCPacket]]]] = [
            [deque() for _ in range(self.num_ports)] for _ in range(self.num_nodes)
        ]
        self._rr: Dict[Tuple[int, int], int] = {}
        self._deliver_rr = -1
        self.cycle = 0
        self.injected = 0
        self.delivered = 0
        self._latency_sum = 0
        self.peak_link_bits = 0
        self.cycle_link_bits = 0
        self.link_flits: Dict[Tuple[int, int], int] = {}
        self._tap: Optional[Sink] = None
        self.trace: Optional[List[Tuple[int, int, int, int, str]]] = [] if record_trace else None

    # -- public API --------------------------------------------------------

    def attach_tap(self, sink: Sink) -> None:
        if self._tap is not None:
            raise TapAlreadyAttached("the NoC already has a monitor tap")
        self._tap = sink

    def check_node(self, node: int) -> None:
        if not 0 <= node < self.num_nodes:
            raise BadNodeId(f"node {node} outside 0..{self.num_nodes - 1}")

    def inject(self, pkt: NoCPacket) -> bool:
        """Queue ``pkt`` at its source; False when the injection queue is full."""
        self.check_node(pkt.src)
        self.check_node(pkt.dst)
        if pkt.src == pkt.dst:
            raise BadNodeId(f"packet from node {pkt.src} to itself")
        queue = self._buf[pkt.src][LOCAL]
        if len(queue) >= self.config.fifo_depth:
            return False
        pkt.inject_cycle = self.cycle
        pkt.deliver_cycle = None
        queue.append((self.cycle, pkt))
        self.injected += 1
        if self.trace is not None:
            self.trace.append((self.cycle, pkt.src, pkt.dst, pkt.tag, "inject"))
        return True

    def can_inject(self, node: int) -> bool:
        return len(self._buf[node][LOCAL]) < self.config.fifo_depth

    def advance(self, cycles: int = 1) -> List[NoCPacket]:
        out: List[NoCPacket] = []
        for _ in range(cycles):
            out.extend(self._step())
        return out

    def in_flight(self) -> int:
        return sum(len(q) for ports in self._buf for q in ports)

    def drain(self, max_cycles: int = 1_000_000) -> List[NoCPacket]:
        """Advance until the network is empty (bounded by ``max_cycles``)."""
        out: List[NoCPacket] = []
        spent = 0
        while self.in_flight() and spent < max_cycles:
            out.extend(self._step())
            spent += 1
        return out

    def stats(self) -> Dict[str, float]:
        elapsed = self.cycle
        offered = self.delivered * LINK_WIDTH_BITS * self.config.clock_hz / elapsed / 1e9 if elapsed else 0.0
        return {
            "injected": self.injected,
            "delivered": self.delivered,
            "in_flight": self.in_flight(),
            "elapsed_cycles": elapsed,
            "mean_latency_cycles": self._latency_sum / self.delivered if self.delivered else 0.0,
            "peak_link_bits_per_cycle": self.peak_link_bits,
            "offered_gbps": offered,
        }

    def write_trace(self, path) -> None:
        rows = [dict(zip(TRACE_COLUMNS, rec)) for rec in (self.trace or [])]
        write_table(rows, path, headers=TRACE_COLUMNS)

    # -- cycle model -------------------------------------------------------

    def _pick(self, key: Tuple[int, int], candidates: List[int], width: int) -> int:
        last = self._rr.get(key, width - 1)
        return min(candidates, key=lambda p: (p - last - 1) % width)

    def _step(self) -> List[NoCPacket]:
        c = self.cycle
        depth = self.config.fifo_depth
        occupancy = [[len(q) for q in ports] for ports in self._buf]
        moves: List[Tuple[int, int, int, int, int]] = []
        eject: Dict[int, int] = {}

        for n in range(self.num_nodes):
            requests: Dict[int, List[int]] = {}
            for p, q in enumerate(self._buf[n]):
                if q and q[0][0] <= c:
                    requests.setdefault(self._route[n][q[0][1].dst], []).append(p)
            for out, ins in requests.items():
                if out == LOCAL:
                    eject[n] = self._pick((n, LOCAL), ins, self.num_ports)
                    continue
                dn, dp = self._downstream[(n, out)]
                free = depth - occupancy[dn][dp]
                eligible = [p for p in ins if free >= (2 if self._bubble and p == LOCAL else 1)]
                if eligible:
                    moves.append((n, self._pick((n, out), eligible, self.num_ports), out, dn, dp))

        delivered: List[NoCPacket] = []
        if eject:
            order = sorted(eject, key=lambda node: (node - self._deliver_rr - 1) % self.num_nodes)
            for n in order[: self.config.max_deliveries_per_cycle]:
                p = eject[n]
                _, pkt = self._buf[n][p].popleft()
                self._rr[(n, LOCAL)] = p
                self._deliver_rr = n
                pkt.deliver_cycle = c + 1
                delivered.append(pkt)

        ready = c + self.config.router_pipeline_cycles
        granted: Dict[Tuple[int, int], int] = {(pkt.dst, LOCAL): 1 for pkt in delivered}
        for n, p, out, dn, dp in moves:
            _, pkt = self._buf[n][p].popleft()
            self._buf[dn][dp].append((ready, pkt))
            self._rr[(n, out)] = p
            self.link_flits[(n, out)] = self.link_flits.get((n, out), 0) + 1
            granted[(n, out)] = granted.get((n, out), 0) + 1
        # bits carried this cycle by the busiest link, ejection included
        self.cycle_link_bits = max(granted.values(), default=0) * LINK_WIDTH_BITS
        self.peak_link_bits = max(self.peak_link_bits, self.cycle_link_bits)

        self.cycle += 1
        for pkt in delivered:
            self.delivered += 1
            self._latency_sum += pkt.deliver_cycle - pkt.inject_cycle
            if self.trace is not None:
                self.trace.append((pkt.deliver_cycle, pkt.src, pkt.dst, pkt.tag, "deliver"))
            if self._tap is not None:
                self._tap(pkt)
        return delivered


# ---------------------------------------------------------------------------
# Topology tables
# ---------------------------------------------------------------------------


def mesh_coords(node: int) -> Tuple[int, int]:
    return node % 3, node // 3


def _xy_route(node: int, dst: int) -> int:
    x, y = mesh_coords(node)
    dx, dy = mesh_coords(dst)
    if dx > x:
        return EAST
    if dx < x:
        return WEST
    if dy > y:
        return NORTH
    if dy < y:
        return SOUTH
    return LOCAL


def _mesh_links() -> Dict[Tuple[int, int], Tuple[int, int]]:
    links = {}
    for n in range(9):
        x, y = mesh_coords(n)
        if y < 2:
            links[(n, NORTH)] = (n + 3, SOUTH)
        if x < 2:
            links[(n, EAST)] = (n + 1, WEST)
        if y > 0:
            links[(n, SOUTH)] = (n - 3, NORTH)
        if x > 0:
            links[(n, WEST)] = (n - 1, EAST)
    return links


def _ring_route(node: int, dst: int) -> int:
    if node == dst:
        return LOCAL
    return CW if (dst - node) % 8 <= 4 else CCW


def _ring_links() -> Dict[Tuple[int, int], Tuple[int, int]]:
    links = {}
    for n in range(8):
        links[(n, CW)] = ((n + 1) % 8, CW)
        links[(n, CCW)] = ((n - 1) % 8, CCW)
    return links
