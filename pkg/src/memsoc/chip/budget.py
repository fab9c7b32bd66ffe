"""Power, pad and bandwidth budgets.

Worst-case rail currents come from the current table of a
:class:`ChipDescription`, scaled linearly with the operating frequency of each
block.  Pad counts follow from a per-pad current limit (``CurrentLimited``
rails) or from the number of blocks a rail serves (``PerBlock`` rails).  The
audit sums the pad tables and compares every total against the figures the
description quotes in prose; it reports disagreements and never replaces a
computed value with a claimed one.

Energy is reported in picojoules: ``V × mA × ns = pJ``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Mapping, Optional

import pandas as pd

from ..core.errors import ClockAboveMax
from ..core.validation_utils import totals_agree
from .activity import ActivityLog
from .chipdesc import RX_DATA_PAD, TX_DATA_PAD, ChipDescription, CurrentEntry, PadGroup, RailPolicy

DEFAULT_PAD_LIMIT_MA = 15.0
EVENT_RAIL = "VDDA_EF"

ClockMap = Mapping[str, float]


# ---------------------------------------------------------------------------
# Currents and pads
# ---------------------------------------------------------------------------


def _clock_for(entry: CurrentEntry, clock_map: Optional[ClockMap]) -> Optional[float]:
    if not clock_map:
        return entry.max_clock_hz
    for name in (entry.key, entry.block):
        if name and name in clock_map:
            return float(clock_map[name])
    return entry.max_clock_hz


def entry_current(entry: CurrentEntry, f_hz: Optional[float] = None) -> float:
    """Current of one instance of ``entry`` at ``f_hz`` (max clock when omitted)."""
    if entry.max_clock_hz is None:
        return entry.max_current_ma
    f = entry.max_clock_hz if f_hz is None else f_hz
    if f < 0:
        raise ValueError(f"{entry.block}: negative clock {f}")
    if f > entry.max_clock_hz * (1 + 1e-12):
        raise ClockAboveMax(f"{entry.block}: {f:g} Hz above its {entry.max_clock_hz:g} Hz maximum")
    return entry.max_current_ma * f / entry.max_clock_hz


def rail_current(desc: ChipDescription, clock_map: Optional[ClockMap] = None) -> Dict[str, float]:
    """Sum of ``instances × I(f)`` per rail; ``clock_map`` keys are entry keys or block names."""
    totals = {r.name: 0.0 for r in desc.rails}
    for e in desc.current_entries:
        totals[e.rail] += e.instances * entry_current(e, _clock_for(e, clock_map))
    return {name: round(ma, 9) for name, ma in totals.items()}


def pads_required(total_ma: float, pad_limit_ma: float, policy: RailPolicy | str, blocks_served: int = 0) -> int:
    if pad_limit_ma <= 0:
        raise ValueError("pad_limit_ma must be positive")
    if RailPolicy(policy) is RailPolicy.PER_BLOCK:
        return int(blocks_served)
    # round away float noise such as 297.9 / 15 = 19.860000000000003
    return max(1, math.ceil(round(total_ma / pad_limit_ma, 9)))


# ---------------------------------------------------------------------------
# Audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RailBudget:
    rail: str
    voltage_v: float
    total_ma: float
    pad_limit_ma: float
    pads_required: int
    pads_declared: int
    supply_pads: int
    policy: str
    exempt: bool


@dataclass(frozen=True)
class Mismatch:
    claim_source: str
    category: str
    claimed: int
    computed: Optional[int]


@dataclass
class AuditReport:
    rails: List[RailBudget]
    pin_totals: Dict[str, int]
    mismatches: List[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rails": [asdict(r) for r in self.rails],
            "pin_totals": dict(self.pin_totals),
            "mismatches": [asdict(m) for m in self.mismatches],
        }


def pin_totals(desc: ChipDescription) -> Dict[str, int]:
    """Pin and pad totals by straight summation over the pad table."""
    by_group: Dict[PadGroup, int] = {g: 0 for g in PadGroup}
    lvds_lanes = 0
    bridge_ttl = 0
    for p in desc.io_pads:
        by_group[p.group] += p.physical_pads
        if p.group is PadGroup.LVDS_PAIR:
            lvds_lanes += p.lane_count
        if p.group is PadGroup.TTL and p.interface == "chip_bridge":
            bridge_ttl += p.lane_count

    rails = {r.name: r for r in desc.rails}
    digital_supply = analog_low = analog_high = 0
    for p in desc.io_pads:
        if p.group is not PadGroup.SUPPLY or p.rail not in rails:
            continue
        rail = rails[p.rail]
        if rail.domain == "digital":
            digital_supply += p.lane_count
        elif rail.voltage_v < 3.3:
            analog_low += p.lane_count
        else:
            analog_high += p.lane_count

    totals = {
        "supply": by_group[PadGroup.SUPPLY],
        "ground": by_group[PadGroup.GROUND],
        "analog_test": by_group[PadGroup.ANALOG_TEST],
        "lvds": by_group[PadGroup.LVDS_PAIR],
        "lvds_pairs": lvds_lanes,
        "ttl": by_group[PadGroup.TTL],
        "bridge_ttl": bridge_ttl,
        "clock": by_group[PadGroup.CLOCK],
        "digital_lvds_supply": digital_supply,
        "analog_ca_supply": analog_low,
        "esd_ef_supply": analog_high,
    }
    # ground pads are down-bonded to the exposed paddle
    totals["total_external"] = (
        totals["supply"] + totals["analog_test"] + totals["lvds"] + totals["ttl"] + totals["clock"]
    )
    return totals


def audit(
    desc: ChipDescription,
    pad_limit_ma: float = DEFAULT_PAD_LIMIT_MA,
    clock_map: Optional[ClockMap] = None,
) -> AuditReport:
    currents = rail_current(desc, clock_map)
    supply_pads: Dict[str, int] = {}
    for p in desc.io_pads:
        if p.group is PadGroup.SUPPLY and p.rail:
            supply_pads[p.rail] = supply_pads.get(p.rail, 0) + p.lane_count

    rails: List[RailBudget] = []
    mismatches: List[Mismatch] = []
    for r in desc.rails:
        required = pads_required(currents[r.name], pad_limit_ma, r.policy, r.served_blocks)
        rails.append(
            RailBudget(
                rail=r.name,
                voltage_v=r.voltage_v,
                total_ma=currents[r.name],
                pad_limit_ma=pad_limit_ma,
                pads_required=required,
                pads_declared=r.declared_pads,
                supply_pads=supply_pads.get(r.name, 0),
                policy=r.policy.value,
                exempt=r.pad_count_exempt,
            )
        )
        if not r.pad_count_exempt and required != r.declared_pads:
            mismatches.append(Mismatch(f"rail {r.name} declared pads", f"pads_{r.name}", r.declared_pads, required))
        if r.name in supply_pads and supply_pads[r.name] != r.declared_pads:
            mismatches.append(
                Mismatch(f"rail {r.name} declared pads", f"supply_pads_{r.name}", r.declared_pads, supply_pads[r.name])
            )

    totals = pin_totals(desc)
    for claim in desc.claims:
        computed = totals.get(claim.category)
        if computed is None or not totals_agree(computed, claim.claimed):
            mismatches.append(Mismatch(claim.source, claim.category, claim.claimed, computed))
    return AuditReport(rails, totals, mismatches)


def corrected_claims(desc: ChipDescription) -> ChipDescription:
    """Return ``desc`` with every claim replaced by the computed figure."""
    from .chipdesc import PinClaim

    totals = pin_totals(desc)
    claims = [PinClaim(c.source, c.category, totals.get(c.category, c.claimed)) for c in desc.claims]
    return desc.with_claims(claims)


def format_audit_table(report: AuditReport) -> str:
    rails = pd.DataFrame([asdict(r) for r in report.rails])
    totals = pd.DataFrame(sorted(report.pin_totals.items()), columns=["category", "computed"])
    parts = ["Rails", rails.to_string(index=False), "", "Pin totals", totals.to_string(index=False), ""]
    if report.mismatches:
        mism = pd.DataFrame([asdict(m) for m in report.mismatches])
        parts += [f"Mismatches ({len(report.mismatches)})", mism.to_string(index=False)]
    else:
        parts.append("Mismatches (0)")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# Bandwidth
# ---------------------------------------------------------------------------


def bandwidth_audit(desc: ChipDescription, noc_clock_hz: Optional[float] = None) -> Dict[str, Any]:
    if noc_clock_hz is None:
        noc = next((e for e in desc.current_entries if e.key == "noc"), None)
        noc_clock_hz = noc.max_clock_hz if noc is not None and noc.max_clock_hz else 1e9
    tx = desc.pad(TX_DATA_PAD)
    rx = desc.pad(RX_DATA_PAD)
    noc_peak = 32 * noc_clock_hz / 1e9
    bridge_tx = tx.lane_count * tx.rate_bps_per_line / 1e9
    bridge_rx = rx.lane_count * rx.rate_bps_per_line / 1e9
    return {
        "noc_peak_gbps": noc_peak,
        "bridge_tx_gbps": bridge_tx,
        "bridge_rx_gbps": bridge_rx,
        "monitor_at_speed": bridge_tx >= noc_peak,
        "tx_margin": bridge_tx / noc_peak if noc_peak else math.inf,
        "tx_rx_asymmetry": bridge_tx / bridge_rx if bridge_rx else math.inf,
    }


# ---------------------------------------------------------------------------
# Energy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EventEnergy:
    """Energy per memristor event on the 3.3 V forming rail, in pJ."""

    form_pj: float = 100.0
    set_pj: float = 10.0
    reset_pj: float = 10.0

    def of(self, kind: str) -> float:
        return {"form": self.form_pj, "set": self.set_pj, "reset": self.reset_pj}[kind]


@dataclass
class EnergyTrace:
    cycles: int
    per_rail_pj: Dict[str, float]
    per_entry_pj: Dict[str, float]
    event_pj: Dict[str, float]

    @property
    def total_pj(self) -> float:
        return sum(self.per_rail_pj.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cycles": self.cycles,
            "total_pj": self.total_pj,
            "per_rail_pj": dict(self.per_rail_pj),
            "per_entry_pj": dict(self.per_entry_pj),
            "event_pj": dict(self.event_pj),
        }


def energy_report(
    desc: ChipDescription,
    activity: ActivityLog,
    clock_map: Optional[ClockMap] = None,
    event_energy: EventEnergy = EventEnergy(),
    idle_fraction: float = 0.0,
    kernel_clock_hz: float = 1e9,
) -> EnergyTrace:
    """Integrate ``V × I(f) × t`` over the active instance-cycles of ``activity``."""
    if not 0.0 <= idle_fraction <= 1.0:
        raise ValueError("idle_fraction must lie in [0, 1]")
    ns_per_cycle = 1e9 / kernel_clock_hz
    volts = {r.name: r.voltage_v for r in desc.rails}
    per_rail = {r.name: 0.0 for r in desc.rails}
    per_entry: Dict[str, float] = {}
    for e in desc.current_entries:
        active = min(activity.active.get(e.key, 0), activity.cycles * e.instances)
        idle = activity.cycles * e.instances - active
        current = entry_current(e, _clock_for(e, clock_map))
        pj = volts[e.rail] * current * (active + idle_fraction * idle) * ns_per_cycle
        per_entry[e.key or e.block] = pj
        per_rail[e.rail] += pj
    events = {kind: n * event_energy.of(kind) for kind, n in activity.events.items()}
    if EVENT_RAIL in per_rail:
        per_rail[EVENT_RAIL] += sum(events.values())
    return EnergyTrace(activity.cycles, per_rail, per_entry, events)
