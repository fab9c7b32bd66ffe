"""Workloads: CA and sequencer programs, synthetic traffic and run settings.

A workload is a JSON document::

    {
      "name": "mvm-demo",
      "seed": 7,
      "duration_cycles": 20000,
      "form_voltage": 3.0,
      "programs": {"ca": {"0": [{"op": "Form"}, ...]}, "sequencer": [...]},
      "traffic": {"pattern": "uniform_random", "rate": 0.2, "hotspot": 7},
      "monitor": {"ready_probability": 1.0},
      "irq_in": [[100, true], [200, false]],
      "clock_map": {"noc": 1e9},
      "noc": {"topology": "Mesh3x3", "fifo_depth": 4},
      "bridge": {"tx_fifo_depth": 64},
      "energy": {"form_pj": 100, "set_pj": 10, "reset_pj": 10, "idle_fraction": 0}
    }

Every key is optional.  ``Program`` records may name a ``levels_file`` (CSV of
integer levels, resolved relative to the workload file) instead of inline
``levels``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..core.errors import BadWorkload
from ..core.io_utils import read_json
from ..core.normalization import resolve_enum
from .budget import EventEnergy, energy_report
from .chipdesc import ChipDescription
from .instructions import CA_OPS, SEQUENCER_OPS, parse_program
from .bridge import BridgeConfig
from .noc import BRIDGE_NODE, NoCConfig, NoCPacket
from .system import SYNTHETIC_TAG, System, SystemConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrafficSpec:
    pattern: str = "uniform_random"
    rate: float = 0.0
    hotspot: int = 7
    hotspot_fraction: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "pattern", resolve_enum(self.pattern, "traffic"))
        if not 0.0 <= self.rate <= 1.0:
            raise BadWorkload(f"injection rate must lie in [0, 1] packets/node/cycle, got {self.rate}")
        if not 0.0 <= self.hotspot_fraction <= 1.0:
            raise BadWorkload("hotspot_fraction must lie in [0, 1]")


@dataclass
class Workload:
    name: str = "workload"
    seed: int = 0
    duration_cycles: int = 0
    form_voltage: Optional[float] = None
    ca_programs: Dict[int, List[Dict[str, Any]]] = field(default_factory=dict)
    sequencer: List[Dict[str, Any]] = field(default_factory=list)
    traffic: Optional[TrafficSpec] = None
    ready_probability: float = 1.0
    irq_in: List[Tuple[int, bool]] = field(default_factory=list)
    clock_map: Dict[str, float] = field(default_factory=dict)
    noc: Dict[str, Any] = field(default_factory=dict)
    bridge: Dict[str, Any] = field(default_factory=dict)
    energy: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: Optional[Path] = None) -> "Workload":
        programs = data.get("programs", {}) or {}
        try:
            ca_programs = {
                int(ca): [_resolve_levels(dict(r), base_dir) for r in records]
                for ca, records in (programs.get("ca", {}) or {}).items()
            }
            traffic_cfg = data.get("traffic")
            traffic = TrafficSpec(**traffic_cfg) if traffic_cfg else None
            irq = [(int(c), bool(level)) for c, level in data.get("irq_in", [])]
        except (TypeError, ValueError, KeyError) as exc:
            raise BadWorkload(f"invalid workload: {exc}") from exc
        wl = cls(
            name=str(data.get("name", "workload")),
            seed=int(data.get("seed", 0)),
            duration_cycles=int(data.get("duration_cycles", 0)),
            form_voltage=data.get("form_voltage"),
            ca_programs=ca_programs,
            sequencer=[dict(r) for r in programs.get("sequencer", []) or []],
            traffic=traffic,
            ready_probability=float((data.get("monitor") or {}).get("ready_probability", 1.0)),
            irq_in=irq,
            clock_map={str(k): float(v) for k, v in (data.get("clock_map") or {}).items()},
            noc=dict(data.get("noc") or {}),
            bridge=dict(data.get("bridge") or {}),
            energy=dict(data.get("energy") or {}),
        )
        wl.check()
        return wl

    def check(self) -> None:
        """Parse every program once so bad records fail before simulation."""
        if self.duration_cycles < 0:
            raise BadWorkload("duration_cycles must be >= 0")
        if self.traffic is not None and self.traffic.rate > 0 and not self.duration_cycles:
            raise BadWorkload("synthetic traffic needs a positive duration_cycles")
        for ca, program in self.ca_programs.items():
            if not 0 <= ca < 7:
                raise BadWorkload(f"CA program for unknown CA {ca}")
            parse_program(program, CA_OPS)
        parse_program(self.sequencer, SEQUENCER_OPS)

    def system_config(self, record_trace: bool = False, capture_monitor: bool = False) -> SystemConfig:
        try:
            return SystemConfig(
                noc=NoCConfig.from_dict(self.noc),
                bridge=BridgeConfig.from_dict(self.bridge),
                ready_probability=self.ready_probability,
                ready_seed=self.seed,
                record_trace=record_trace,
                capture_monitor=capture_monitor,
            )
        except ValueError as exc:
            raise BadWorkload(str(exc)) from exc


def _resolve_levels(record: Dict[str, Any], base_dir: Optional[Path]) -> Dict[str, Any]:
    path = record.pop("levels_file", None)
    if path is None:
        return record
    p = Path(path)
    if not p.is_absolute() and base_dir is not None:
        p = base_dir / p
    record["levels"] = np.loadtxt(p, delimiter=",", dtype=np.int64, ndmin=2).tolist()
    return record


def load_workload(path: str | Path) -> Workload:
    p = Path(path)
    try:
        data = read_json(p)
    except (OSError, ValueError) as exc:
        raise BadWorkload(f"{p}: {exc}") from exc
    return Workload.from_dict(data, base_dir=p.parent)


class TrafficGenerator:
    """Seeded synthetic packet source for the compute and processor nodes.

    Each cycle every source node offers one packet with probability ``rate``.
    Destinations: ``uniform_random`` picks any other node, ``hotspot`` sends
    ``hotspot_fraction`` of packets to the hotspot node, ``pipeline`` sends to
    the next node in index order.  Refused injections are counted, not retried.
    """

    def __init__(self, spec: TrafficSpec, seed: int = 0, num_nodes: int = 8) -> None:
        self.spec = spec
        self.num_nodes = min(num_nodes, BRIDGE_NODE)
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7AFF1C]))
        self.offered = 0
        self.refused = 0
        self._seq = 0

    def destinations(self, sources: np.ndarray) -> np.ndarray:
        n = self.num_nodes
        if self.spec.pattern == "pipeline":
            return (sources + 1) % n
        # uniform over the other n - 1 nodes
        dst = self.rng.integers(0, n - 1, size=sources.size)
        dst = dst + (dst >= sources)
        if self.spec.pattern == "hotspot":
            hot = self.spec.hotspot % n
            to_hot = (self.rng.random(sources.size) < self.spec.hotspot_fraction) & (sources != hot)
            dst = np.where(to_hot, hot, dst)
        return dst

    def __call__(self, system: System, cycle: int) -> None:
        if self.spec.rate <= 0.0:
            return
        offers = np.flatnonzero(self.rng.random(self.num_nodes) < self.spec.rate)
        if offers.size == 0:
            return
        for src, dst in zip(offers.tolist(), self.destinations(offers).tolist()):
            self.offered += 1
            payload = self._seq & 0xFFFFFFFF
            self._seq += 1
            if not system.noc.inject(NoCPacket(src, dst, payload, SYNTHETIC_TAG)):
                self.refused += 1

    def stats(self) -> Dict[str, Any]:
        return {"pattern": self.spec.pattern, "rate": self.spec.rate, "offered": self.offered, "refused": self.refused}


def build_system(desc: ChipDescription, workload: Workload, record_trace: bool = False, capture_monitor: bool = False) -> Tuple[System, Optional[TrafficGenerator]]:
    """Instantiate a chip and load the workload's programs, traffic and irq schedule."""
    system = System(desc, workload.system_config(record_trace, capture_monitor), seed=workload.seed)
    for ca_id, program in sorted(workload.ca_programs.items()):
        if workload.form_voltage is not None:
            program = [
                {**r, "v": workload.form_voltage} if r.get("op") == "Form" and "v" not in r else r for r in program
            ]
        system.arrays[ca_id].load(program)
    if workload.sequencer:
        system.sequencer.load(workload.sequencer)
    system.irq_schedule = {c: level for c, level in workload.irq_in}
    traffic = None
    if workload.traffic is not None:
        traffic = TrafficGenerator(workload.traffic, workload.seed, system.noc.num_nodes)
        system.traffic = traffic
    return system, traffic


def run_workload(
    desc: ChipDescription,
    workload: Workload,
    trace_path: Optional[str | Path] = None,
    monitor_path: Optional[str | Path] = None,
    events_path: Optional[str | Path] = None,
) -> Dict[str, Any]:
    """Simulate ``workload`` and return the JSON-ready report.

    The run lasts ``duration_cycles``; with a duration of 0 it lasts until all
    programs finish and the network and bridge have drained.
    """
    system, traffic = build_system(desc, workload, trace_path is not None, monitor_path is not None)
    if workload.duration_cycles:
        system.run(workload.duration_cycles)
    else:
        system._run_until(lambda: not system.busy(), 10_000_000, f"workload '{workload.name}'")
    log.info("workload %s ran %d cycles", workload.name, system.cycle)

    events = EventEnergy(**{k: float(v) for k, v in workload.energy.items() if k in EventEnergy.__dataclass_fields__})
    energy = energy_report(
        system.desc,
        system.activity,
        clock_map=workload.clock_map or None,
        event_energy=events,
        idle_fraction=float(workload.energy.get("idle_fraction", 0.0)),
        kernel_clock_hz=system.config.noc.clock_hz,
    )
    report = {"workload": workload.name, "seed": workload.seed, **system.report(), "energy": energy.to_dict()}
    if traffic is not None:
        report["traffic"] = traffic.stats()

    if trace_path is not None:
        system.noc.write_trace(trace_path)
    if monitor_path is not None:
        system.bridge.write_capture(monitor_path)
    if events_path is not None:
        system.irq.write_events(events_path)
    return report
