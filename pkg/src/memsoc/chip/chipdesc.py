"""Declarative chip description and floorplan validation.

A :class:`ChipDescription` records the die outline, block placements, supply
rails, the current estimates per block, every interface pad and the pin
figures quoted in prose about the chip (:class:`PinClaim`).  The built-in
:func:`reference_chip` transcribes the memristor SoC demonstrator: a
6 × 6 mm die with seven memristor Computing Arrays inside the centred
4.4 × 4.4 mm square, a RISC-V controller, shared SRAM, a 32-bit NoC and the
chip bridge.

Descriptions travel as JSON with snake_case keys mirroring the dataclass
fields (lengths in mm, currents in mA, clocks in Hz, rates in bit/s).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from ..core.errors import MalformedDescription
from ..core.normalization import missing_fields, resolve_enum, resolve_keys
from .memristor import DeviceParams


class BlockKind(str, Enum):
    COMPUTE_ARRAY = "ComputeArray"
    PROCESSOR = "Processor"
    SHARED_SRAM = "SharedSRAM"
    NOC = "NoC"
    CHIP_BRIDGE = "ChipBridge"
    PADFRAME = "Padframe"


class RailPolicy(str, Enum):
    CURRENT_LIMITED = "CurrentLimited"
    PER_BLOCK = "PerBlock"


class PadGroup(str, Enum):
    CLOCK = "Clock"
    LVDS_PAIR = "LVDS_Pair"
    TTL = "TTL"
    ANALOG_TEST = "AnalogTest"
    SUPPLY = "Supply"
    GROUND = "Ground"


class Direction(str, Enum):
    IN = "In"
    OUT = "Out"
    BIDIR = "Bidir"


# Table III names of the bridge data lanes; the bandwidth audit reads them.
TX_DATA_PAD = "CBTXDAT"
RX_DATA_PAD = "CBRXDAT"


@dataclass(frozen=True)
class Rect:
    x_mm: float
    y_mm: float
    w_mm: float
    h_mm: float

    @property
    def x1(self) -> float:
        return self.x_mm + self.w_mm

    @property
    def y1(self) -> float:
        return self.y_mm + self.h_mm

    def inside(self, x0: float, y0: float, x1: float, y1: float, eps: float = 1e-9) -> bool:
        return (
            self.x_mm >= x0 - eps and self.y_mm >= y0 - eps
            and self.x1 <= x1 + eps and self.y1 <= y1 + eps
        )

    def to_list(self) -> List[float]:
        return [self.x_mm, self.y_mm, self.w_mm, self.h_mm]


@dataclass(frozen=True)
class ArrayParams:
    """Crossbar and paradigm settings of one ComputeArray block."""

    paradigm: str = "CiM"
    rows: int = 64
    cols: int = 64
    dac_bits: int = 8
    adc_bits: int = 8
    v_read_v: float = 0.2
    device: DeviceParams = field(default_factory=DeviceParams)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "paradigm": self.paradigm,
            "rows": self.rows,
            "cols": self.cols,
            "dac_bits": self.dac_bits,
            "adc_bits": self.adc_bits,
            "v_read_v": self.v_read_v,
            "device": self.device.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ArrayParams":
        return cls(
            paradigm=resolve_enum(data.get("paradigm", "CiM"), "paradigm"),
            rows=int(data.get("rows", 64)),
            cols=int(data.get("cols", 64)),
            dac_bits=int(data.get("dac_bits", 8)),
            adc_bits=int(data.get("adc_bits", 8)),
            v_read_v=float(data.get("v_read_v", 0.2)),
            device=DeviceParams.from_dict(data.get("device", {})),
        )


@dataclass(frozen=True)
class BlockPlacement:
    name: str
    kind: BlockKind
    rect: Rect
    uses_memristors: bool = False
    array: Optional[ArrayParams] = None


@dataclass(frozen=True)
class RailSpec:
    name: str
    voltage_v: float
    declared_pads: int
    policy: RailPolicy
    purpose: str = ""
    domain: str = "digital"
    served_blocks: int = 0
    pad_count_exempt: bool = False


@dataclass(frozen=True)
class CurrentEntry:
    rail: str
    block: str
    max_current_ma: float
    max_clock_hz: Optional[float]  # None for DC entries
    key: str = ""
    instances: int = 1


@dataclass(frozen=True)
class PadSpec:
    name: str
    group: PadGroup
    lane_count: int
    rate_bps_per_line: float
    direction: Direction
    interface: str = ""
    rail: Optional[str] = None

    @property
    def physical_pads(self) -> int:
        return self.lane_count * (2 if self.group is PadGroup.LVDS_PAIR else 1)


@dataclass(frozen=True)
class PinClaim:
    """A pin or pad figure quoted in prose, kept for the audit to check."""

    source: str
    category: str
    claimed: int


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    detail: str
    severity: str = "error"

    def to_dict(self) -> Dict[str, str]:
        return {"kind": self.kind, "subject": self.subject, "detail": self.detail, "severity": self.severity}


@dataclass(frozen=True)
class ChipDescription:
    die_width_mm: float
    die_height_mm: float
    edge_margin_mm: float
    blocks: Tuple[BlockPlacement, ...]
    rails: Tuple[RailSpec, ...]
    current_entries: Tuple[CurrentEntry, ...]
    io_pads: Tuple[PadSpec, ...]
    clock_inputs: int
    bond_wire_max_mm: float
    bond_wire_warn_mm: float = 2.5
    lead_ring_offset_mm: float = 1.5
    min_die_mm: float = 6.0
    claims: Tuple[PinClaim, ...] = ()
    name: str = "memsoc"
    seed: int = 0

    # -- lookups -----------------------------------------------------------

    def rail(self, name: str) -> RailSpec:
        for r in self.rails:
            if r.name == name:
                return r
        raise KeyError(name)

    def compute_arrays(self) -> List[BlockPlacement]:
        return [b for b in self.blocks if b.kind is BlockKind.COMPUTE_ARRAY]

    def entry(self, key: str) -> CurrentEntry:
        for e in self.current_entries:
            if e.key == key:
                return e
        raise KeyError(key)

    def pad(self, name: str) -> PadSpec:
        for p in self.io_pads:
            if p.name == name:
                return p
        raise KeyError(name)

    def with_claims(self, claims: List[PinClaim]) -> "ChipDescription":
        return replace(self, claims=tuple(claims))

    # -- structure ---------------------------------------------------------

    def check_structure(self) -> None:
        """Raise :class:`MalformedDescription` on a broken structural invariant."""
        problems: List[str] = []
        if not (self.die_width_mm > 0 and self.die_height_mm > 0):
            problems.append("die dimensions must be positive")
        if self.edge_margin_mm < 0:
            problems.append("edge margin must be non-negative")
        if self.bond_wire_max_mm <= 0:
            problems.append("bond wire limit must be positive")
        for b in self.blocks:
            if not (b.rect.w_mm > 0 and b.rect.h_mm > 0):
                problems.append(f"block {b.name}: degenerate rectangle {b.rect.to_list()}")
        rail_names = {r.name for r in self.rails}
        for r in self.rails:
            if r.declared_pads < 1:
                problems.append(f"rail {r.name}: declared_pads must be >= 1")
        for e in self.current_entries:
            if e.rail not in rail_names:
                problems.append(f"current entry {e.block!r} names unknown rail {e.rail}")
            if e.max_current_ma < 0:
                problems.append(f"current entry {e.block!r} has negative current")
        for p in self.io_pads:
            if p.lane_count < 1:
                problems.append(f"pad {p.name}: lane_count must be >= 1")
        if problems:
            raise MalformedDescription("; ".join(problems))

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "seed": self.seed,
            "die_width_mm": self.die_width_mm,
            "die_height_mm": self.die_height_mm,
            "edge_margin_mm": self.edge_margin_mm,
            "min_die_mm": self.min_die_mm,
            "bond_wire_max_mm": self.bond_wire_max_mm,
            "bond_wire_warn_mm": self.bond_wire_warn_mm,
            "lead_ring_offset_mm": self.lead_ring_offset_mm,
            "clock_inputs": self.clock_inputs,
            "blocks": [_block_to_dict(b) for b in self.blocks],
            "rails": [
                {
                    "name": r.name,
                    "voltage_v": r.voltage_v,
                    "declared_pads": r.declared_pads,
                    "policy": r.policy.value,
                    "purpose": r.purpose,
                    "domain": r.domain,
                    "served_blocks": r.served_blocks,
                    "pad_count_exempt": r.pad_count_exempt,
                }
                for r in self.rails
            ],
            "current_entries": [
                {
                    "rail": e.rail,
                    "block": e.block,
                    "max_current_ma": e.max_current_ma,
                    "max_clock_hz": e.max_clock_hz,
                    "key": e.key,
                    "instances": e.instances,
                }
                for e in self.current_entries
            ],
            "io_pads": [
                {
                    "name": p.name,
                    "group": p.group.value,
                    "lane_count": p.lane_count,
                    "rate_bps_per_line": p.rate_bps_per_line,
                    "direction": p.direction.value,
                    "interface": p.interface,
                    "rail": p.rail,
                }
                for p in self.io_pads
            ],
            "claims": [{"source": c.source, "category": c.category, "claimed": c.claimed} for c in self.claims],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ChipDescription":
        data = resolve_keys(data)
        missing = missing_fields(data, "ChipDescription")
        if missing:
            raise MalformedDescription(f"chip description lacks fields {missing}")
        try:
            desc = cls(
                name=str(data.get("name", "memsoc")),
                seed=int(data.get("seed", 0)),
                die_width_mm=float(data["die_width_mm"]),
                die_height_mm=float(data["die_height_mm"]),
                edge_margin_mm=float(data["edge_margin_mm"]),
                min_die_mm=float(data.get("min_die_mm", 6.0)),
                bond_wire_max_mm=float(data["bond_wire_max_mm"]),
                bond_wire_warn_mm=float(data.get("bond_wire_warn_mm", 2.5)),
                lead_ring_offset_mm=float(data.get("lead_ring_offset_mm", 1.5)),
                clock_inputs=int(data["clock_inputs"]),
                blocks=tuple(_block_from_dict(b) for b in data["blocks"]),
                rails=tuple(_rail_from_dict(r) for r in data["rails"]),
                current_entries=tuple(_entry_from_dict(e) for e in data["current_entries"]),
                io_pads=tuple(_pad_from_dict(p) for p in data["io_pads"]),
                claims=tuple(
                    PinClaim(str(c["source"]), str(c["category"]), int(c["claimed"])) for c in data.get("claims", [])
                ),
            )
        except MalformedDescription:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedDescription(f"cannot decode chip description: {exc}") from exc
        desc.check_structure()
        return desc

    @classmethod
    def from_json(cls, text: str) -> "ChipDescription":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedDescription(f"description is not valid JSON: {exc}") from exc
        if not isinstance(data, Mapping):
            raise MalformedDescription("description must be a JSON object")
        return cls.from_dict(data)


def _block_to_dict(b: BlockPlacement) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "name": b.name,
        "kind": b.kind.value,
        "rect": b.rect.to_list(),
        "uses_memristors": b.uses_memristors,
    }
    if b.array is not None:
        out["array"] = b.array.to_dict()
    return out


def _block_from_dict(data: Mapping[str, Any]) -> BlockPlacement:
    missing = missing_fields(data, "BlockPlacement")
    if missing:
        raise MalformedDescription(f"block {data.get('name', '?')} lacks fields {missing}")
    rect = data["rect"]
    if isinstance(rect, Mapping):
        rect = [rect["x_mm"], rect["y_mm"], rect["w_mm"], rect["h_mm"]]
    if len(rect) != 4:
        raise MalformedDescription(f"block {data['name']}: rect needs 4 numbers")
    kind = BlockKind(resolve_enum(data["kind"], "block_kind"))
    array = data.get("array")
    if array is None and kind is BlockKind.COMPUTE_ARRAY:
        array = {}
    return BlockPlacement(
        name=str(data["name"]),
        kind=kind,
        rect=Rect(*(float(v) for v in rect)),
        uses_memristors=bool(data["uses_memristors"]),
        array=ArrayParams.from_dict(array) if array is not None else None,
    )


def _rail_from_dict(data: Mapping[str, Any]) -> RailSpec:
    data = resolve_keys(data)
    missing = missing_fields(data, "RailSpec")
    if missing:
        raise MalformedDescription(f"rail {data.get('name', '?')} lacks fields {missing}")
    return RailSpec(
        name=str(data["name"]),
        voltage_v=float(data["voltage_v"]),
        declared_pads=int(data["declared_pads"]),
        policy=RailPolicy(resolve_enum(data["policy"], "rail_policy")),
        purpose=str(data.get("purpose", "")),
        domain=str(data.get("domain", "digital")),
        served_blocks=int(data.get("served_blocks", 0)),
        pad_count_exempt=bool(data.get("pad_count_exempt", False)),
    )


def _entry_from_dict(data: Mapping[str, Any]) -> CurrentEntry:
    data = resolve_keys(data)
    missing = missing_fields(data, "CurrentEntry")
    if missing:
        raise MalformedDescription(f"current entry lacks fields {missing}")
    clock = data.get("max_clock_hz")
    return CurrentEntry(
        rail=str(data["rail"]),
        block=str(data["block"]),
        max_current_ma=float(data["max_current_ma"]),
        max_clock_hz=None if clock is None else float(clock),
        key=str(data.get("key", "")),
        instances=int(data.get("instances", 1)),
    )


def _pad_from_dict(data: Mapping[str, Any]) -> PadSpec:
    data = resolve_keys(data)
    missing = missing_fields(data, "PadSpec")
    if missing:
        raise MalformedDescription(f"pad {data.get('name', '?')} lacks fields {missing}")
    return PadSpec(
        name=str(data["name"]),
        group=PadGroup(resolve_enum(data["group"], "pad_group")),
        lane_count=int(data["lane_count"]),
        rate_bps_per_line=float(data.get("rate_bps_per_line", 0.0)),
        direction=Direction(resolve_enum(data["direction"], "direction")),
        interface=str(data.get("interface", "")),
        rail=data.get("rail"),
    )


def load_description(path: str | Path) -> ChipDescription:
    return ChipDescription.from_json(Path(path).read_text(encoding="utf-8"))


def dump_description(desc: ChipDescription, path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(desc.to_json(), encoding="utf-8")


# ---------------------------------------------------------------------------
# Reference description
# ---------------------------------------------------------------------------

GHZ = 1e9
MHZ = 1e6

# Paradigm of CA0..CA6; the mix is a load-time choice.
REFERENCE_PARADIGMS = ("CiM", "CiM", "CAM", "CAM", "SNN", "SNN", "PC")


def reference_chip() -> ChipDescription:
    """Return the description of the memristor SoC demonstrator."""

    die = 6.0
    margin = 0.8
    square = die - 2 * margin
    cell = square / 3
    inset = 0.1

    def cell_rect(i: int) -> Rect:
        col, row = i % 3, i // 3
        return Rect(
            round(margin + col * cell + inset, 4),
            round(margin + row * cell + inset, 4),
            round(cell - 2 * inset, 4),
            round(cell - 2 * inset, 4),
        )

    blocks: List[BlockPlacement] = []
    ca_cells = (0, 1, 2, 3, 5, 6, 7)
    for ca, cell_index in enumerate(ca_cells):
        blocks.append(
            BlockPlacement(
                name=f"CA{ca}",
                kind=BlockKind.COMPUTE_ARRAY,
                rect=cell_rect(cell_index),
                uses_memristors=True,
                array=ArrayParams(paradigm=REFERENCE_PARADIGMS[ca], device=DeviceParams(seed=ca)),
            )
        )
    noc_cell = cell_rect(4)
    blocks.append(BlockPlacement("NoC", BlockKind.NOC, noc_cell))
    last = cell_rect(8)
    half = round(last.h_mm / 2, 4)
    blocks.append(BlockPlacement("RISC-V", BlockKind.PROCESSOR, Rect(last.x_mm, last.y_mm, last.w_mm, half)))
    blocks.append(
        BlockPlacement("SharedSRAM", BlockKind.SHARED_SRAM, Rect(last.x_mm, round(last.y_mm + half, 4), last.w_mm, half))
    )
    blocks.append(BlockPlacement("ChipBridge", BlockKind.CHIP_BRIDGE, Rect(margin, 5.3, square, 0.4)))
    ring = 0.25
    blocks.extend(
        [
            BlockPlacement("Padframe_S", BlockKind.PADFRAME, Rect(0.0, 0.0, die, ring)),
            BlockPlacement("Padframe_N", BlockKind.PADFRAME, Rect(0.0, die - ring, die, ring)),
            BlockPlacement("Padframe_W", BlockKind.PADFRAME, Rect(0.0, ring, ring, die - 2 * ring)),
            BlockPlacement("Padframe_E", BlockKind.PADFRAME, Rect(die - ring, ring, ring, die - 2 * ring)),
        ]
    )

    rails = (
        RailSpec("VDD_CORE", 0.9, 20, RailPolicy.CURRENT_LIMITED, "0.9 V supply of digital part"),
        RailSpec("VDD_CLK", 0.9, 1, RailPolicy.CURRENT_LIMITED, "0.9 V supply of clock buffer"),
        RailSpec(
            "VDD_IO", 3.3, 2, RailPolicy.PER_BLOCK, "3.3 V supply of digital section of padframe",
            served_blocks=2, pad_count_exempt=True,
        ),
        RailSpec(
            "VDD_LVDS", 1.4, 13, RailPolicy.PER_BLOCK, "1.4 V supply of LVDS",
            served_blocks=13, pad_count_exempt=True,
        ),
        RailSpec(
            "VDD_ANA", 0.9, 7, RailPolicy.PER_BLOCK, "0.9 V supply of analog part of the CA",
            domain="analog", served_blocks=7,
        ),
        RailSpec(
            "VDDA_ESD", 3.3, 2, RailPolicy.PER_BLOCK, "3.3 V supply of analog section of padframe",
            domain="analog", served_blocks=2, pad_count_exempt=True,
        ),
        RailSpec(
            "VDDA_EF", 3.3, 7, RailPolicy.PER_BLOCK, "3.3 V for electroforming, set and reset",
            domain="analog", served_blocks=7,
        ),
    )

    entries = (
        CurrentEntry("VDD_CORE", "SRAM (32 KB) per CA", 18.9, 1 * GHZ, key="ca_sram", instances=7),
        CurrentEntry("VDD_CORE", "local controller per CA", 10.0, 1 * GHZ, key="ca_controller", instances=7),
        CurrentEntry("VDD_ANA", "analog component per CA", 3.5, 100 * MHZ, key="ca_analog", instances=7),
        CurrentEntry("VDD_CORE", "RISC-V", 10.0, 500 * MHZ, key="riscv"),
        CurrentEntry("VDD_CORE", "SRAM (2x64 KB)", 51.6, 500 * MHZ, key="shared_sram"),
        CurrentEntry("VDD_CORE", "AXI Interface", 2.0, 100 * MHZ, key="axi"),
        CurrentEntry("VDD_CORE", "Network on Chip", 10.0, 1 * GHZ, key="noc"),
        CurrentEntry("VDD_CORE", "Chip Bridge", 10.0, 1 * GHZ, key="bridge_core"),
        CurrentEntry("VDD_LVDS", "Output Chip bridge", 95.0, 1 * GHZ, key="bridge_lvds_out"),
        CurrentEntry("VDD_CORE", "Input Chip bridge", 12.0, 100 * MHZ, key="bridge_ttl_in"),
    )

    supply = [
        ("VDD_CORE", 20), ("VDD_CLK", 1), ("VDD_IO", 2), ("VDD_LVDS", 13),
        ("VDD_ANA", 7), ("VDDA_ESD", 2), ("VDDA_EF", 7),
    ]
    ground = [
        ("VSS_CORE", "VDD_CORE", 20), ("VSS_CLK", "VDD_CLK", 1), ("VSS_IO", "VDD_IO", 2),
        ("VSS_LVDS", "VDD_LVDS", 13), ("VSS_ANA", "VDD_ANA", 7), ("VSSA_ESD", "VDDA_ESD", 2),
    ]
    pads: List[PadSpec] = [
        PadSpec("CLK", PadGroup.CLOCK, 4, 1 * GHZ, Direction.IN, "clock"),
        PadSpec(TX_DATA_PAD, PadGroup.LVDS_PAIR, 16, 2 * GHZ, Direction.OUT, "chip_bridge"),
        PadSpec("CBTXADD", PadGroup.LVDS_PAIR, 2, 2 * GHZ, Direction.OUT, "chip_bridge"),
        PadSpec("CBTXVAL", PadGroup.LVDS_PAIR, 1, 2 * GHZ, Direction.OUT, "chip_bridge"),
        PadSpec("CBTXREA", PadGroup.LVDS_PAIR, 1, 2 * GHZ, Direction.IN, "chip_bridge"),
        PadSpec(RX_DATA_PAD, PadGroup.TTL, 8, 100 * MHZ, Direction.IN, "chip_bridge"),
        PadSpec("CBRXADD", PadGroup.TTL, 1, 100 * MHZ, Direction.IN, "chip_bridge"),
        PadSpec("CBRXVAL", PadGroup.TTL, 1, 100 * MHZ, Direction.IN, "chip_bridge"),
        PadSpec("CBRXREA", PadGroup.TTL, 1, 100 * MHZ, Direction.OUT, "chip_bridge"),
        PadSpec("AXI", PadGroup.TTL, 15, 100 * MHZ, Direction.BIDIR, "axi"),
        PadSpec("JTAG", PadGroup.TTL, 5, 10 * MHZ, Direction.BIDIR, "jtag"),
        PadSpec("INTRPT", PadGroup.TTL, 2, 0.0, Direction.BIDIR, "irq"),
        PadSpec("SCAN_EN", PadGroup.TTL, 1, 0.0, Direction.IN, "scan"),
        PadSpec("TESTAC", PadGroup.ANALOG_TEST, 7, 500 * MHZ, Direction.OUT, "test"),
        PadSpec("TESTDC", PadGroup.ANALOG_TEST, 7, 0.0, Direction.OUT, "test"),
    ]
    pads += [PadSpec(name, PadGroup.SUPPLY, n, 0.0, Direction.IN, "supply", rail=name) for name, n in supply]
    pads += [PadSpec(name, PadGroup.GROUND, n, 0.0, Direction.IN, "ground", rail=rail) for name, rail, n in ground]

    claims = (
        PinClaim("Summary: 46 supply pins", "supply", 46),
        PinClaim("Summary: 46 ground pads with down bonds", "ground", 46),
        PinClaim("Summary: 14 analog test pins", "analog_test", 14),
        PinClaim("Summary: 42 pins for the LVDS connection", "lvds", 42),
        PinClaim("Summary: 20 LVDS transmitters and 1 LVDS receiver", "lvds_pairs", 21),
        PinClaim("Interfaces: 22 LVDS pairs", "lvds_pairs", 22),
        PinClaim("Interfaces: 11 single-ended TTL lines", "bridge_ttl", 11),
        PinClaim("Summary: 31 TTL digital IO pins", "ttl", 31),
        PinClaim("Summary: 4 clock inputs", "clock", 4),
        PinClaim("Summary: 36 pins for digital and LVDS supply", "digital_lvds_supply", 36),
        PinClaim("Summary: 7 analog supplies", "analog_ca_supply", 7),
        PinClaim("Summary: 9 pads at 3.3 V for ESD and forming", "esd_ef_supply", 9),
        PinClaim("Summary: 140 pins with external access", "total_external", 140),
    )

    return ChipDescription(
        name="memristor-soc-demonstrator",
        die_width_mm=die,
        die_height_mm=die,
        edge_margin_mm=margin,
        blocks=tuple(blocks),
        rails=rails,
        current_entries=entries,
        io_pads=tuple(pads),
        clock_inputs=4,
        bond_wire_max_mm=3.0,
        claims=claims,
    )


# ---------------------------------------------------------------------------
# Floorplan validation
# ---------------------------------------------------------------------------


def ring_pads(desc: ChipDescription) -> List[Tuple[str, int]]:
    """Physical pads on the die perimeter, in declaration order.

    Ground pads are down-bonded to the exposed paddle and take no ring slot.
    """
    out: List[Tuple[str, int]] = []
    for p in desc.io_pads:
        if p.group is PadGroup.GROUND:
            continue
        out.extend((p.name, i) for i in range(p.physical_pads))
    return out


def _perimeter_point(s: float, x0: float, y0: float, w: float, h: float) -> Tuple[float, float]:
    """Point at arc length ``s`` along a rectangle, counter-clockwise from (x0, y0)."""
    s = s % (2 * (w + h))
    if s < w:
        return x0 + s, y0
    s -= w
    if s < h:
        return x0 + w, y0 + s
    s -= h
    if s < w:
        return x0 + w - s, y0 + h
    s -= w
    return x0, y0 + h - s


def bond_wire_lengths(desc: ChipDescription) -> List[Tuple[str, int, float]]:
    """Straight-line wire length of every ring pad to its package lead.

    Pads sit at uniform pitch around the die edge; leads sit at the same
    perimeter fraction on a ring ``lead_ring_offset_mm`` outside the die.
    """
    pads = ring_pads(desc)
    if not pads:
        return []
    w, h = desc.die_width_mm, desc.die_height_mm
    off = desc.lead_ring_offset_mm
    die_perimeter = 2 * (w + h)
    ring_perimeter = 2 * (w + h + 4 * off)
    pitch = die_perimeter / len(pads)
    out = []
    for i, (name, lane) in enumerate(pads):
        frac = (i + 0.5) * pitch / die_perimeter
        px, py = _perimeter_point(frac * die_perimeter, 0.0, 0.0, w, h)
        lx, ly = _perimeter_point(frac * ring_perimeter, -off, -off, w + 2 * off, h + 2 * off)
        out.append((name, lane, math.hypot(px - lx, py - ly)))
    return out


def validate_floorplan(desc: ChipDescription) -> List[Violation]:
    """Return one violation per broken floorplan rule; empty means compliant."""
    desc.check_structure()
    violations: List[Violation] = []
    w, h, m = desc.die_width_mm, desc.die_height_mm, desc.edge_margin_mm

    for b in desc.blocks:
        if not b.rect.inside(0.0, 0.0, w, h):
            violations.append(Violation("OutsideDie", b.name, f"rect {b.rect.to_list()} exits the {w}x{h} mm die"))

    memristor_blocks = [b for b in desc.blocks if b.uses_memristors]
    for b in memristor_blocks:
        if not b.rect.inside(m, m, w - m, h - m):
            violations.append(
                Violation(
                    "OutsideCenterSquare",
                    b.name,
                    f"rect {b.rect.to_list()} exits the centred {w - 2 * m:.3f}x{h - 2 * m:.3f} mm square",
                )
            )
    if memristor_blocks and (w < desc.min_die_mm or h < desc.min_die_mm):
        violations.append(
            Violation("DieTooSmall", desc.name, f"die {w}x{h} mm below {desc.min_die_mm}x{desc.min_die_mm} mm")
        )

    worst: Dict[str, float] = {}
    for name, _lane, length in bond_wire_lengths(desc):
        worst[name] = max(worst.get(name, 0.0), length)
    for name, length in worst.items():
        if length > desc.bond_wire_max_mm:
            violations.append(
                Violation("BondWireTooLong", name, f"{length:.3f} mm exceeds {desc.bond_wire_max_mm} mm")
            )
        elif length > desc.bond_wire_warn_mm:
            violations.append(
                Violation(
                    "BondWireLong", name, f"{length:.3f} mm above {desc.bond_wire_warn_mm} mm", severity="warning"
                )
            )
    return violations
