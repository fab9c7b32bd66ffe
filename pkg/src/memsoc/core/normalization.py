"""Utilities for normalising hand-written description and workload records.

Chip descriptions and workloads are edited by people, so the loaders accept a
little slack: enum tokens are matched case-insensitively, through an alias
table and finally (optionally) through fuzzy matching; record keys missing
their unit suffix are mapped onto the canonical snake_case field names.  The
canonical schemas live here too so the loaders and the validation helpers
share one registry.
"""

from __future__ import annotations

from typing import Any, Dict, List, Mapping

try:  # Fuzzy matching is optional; fall back to alias-only mode if missing
    from rapidfuzz import fuzz, process

    USE_FUZZ = True
except Exception:  # pragma: no cover - rapidfuzz is optional
    USE_FUZZ = False

# ---------------------------------------------------------------------------
# 1) Schema registry
# ---------------------------------------------------------------------------
SCHEMAS: Dict[str, List[str]] = {
    "ChipDescription": [
        "die_width_mm",
        "die_height_mm",
        "edge_margin_mm",
        "blocks",
        "rails",
        "current_entries",
        "io_pads",
        "clock_inputs",
        "bond_wire_max_mm",
    ],
    "BlockPlacement": ["name", "kind", "rect", "uses_memristors"],
    "RailSpec": ["name", "voltage_v", "declared_pads", "policy"],
    "CurrentEntry": ["rail", "block", "max_current_ma"],
    "PadSpec": ["name", "group", "lane_count", "direction"],
}

# ---------------------------------------------------------------------------
# 2) Aliases
# ---------------------------------------------------------------------------
KEY_ALIASES: Dict[str, List[str]] = {
    "die_width_mm": ["die_width", "width_mm"],
    "die_height_mm": ["die_height", "height_mm"],
    "edge_margin_mm": ["edge_margin", "margin_mm", "margin"],
    "bond_wire_max_mm": ["bond_wire_max", "max_bond_wire_mm"],
    "max_current_ma": ["current_ma", "max_current"],
    "max_clock_hz": ["clock_hz", "max_clock"],
    "rate_bps_per_line": ["rate_bps", "rate"],
    "lane_count": ["lanes", "pads"],
    "voltage_v": ["voltage"],
}

ENUMS: Dict[str, List[str]] = {
    "block_kind": ["ComputeArray", "Processor", "SharedSRAM", "NoC", "ChipBridge", "Padframe"],
    "rail_policy": ["CurrentLimited", "PerBlock"],
    "pad_group": ["Clock", "LVDS_Pair", "TTL", "AnalogTest", "Supply", "Ground"],
    "direction": ["In", "Out", "Bidir"],
    "paradigm": ["CiM", "CAM", "SNN", "PC"],
    "topology": ["Mesh3x3", "Ring8"],
    "traffic": ["uniform_random", "hotspot", "pipeline"],
}

ENUM_ALIASES: Dict[str, List[str]] = {
    "ComputeArray": ["CA", "Computing Array", "compute_array"],
    "SharedSRAM": ["SRAM", "shared_sram"],
    "ChipBridge": ["bridge", "chip_bridge"],
    "LVDS_Pair": ["LVDS", "LVDS pair", "lvds_pairs"],
    "AnalogTest": ["analog_test", "test"],
    "Bidir": ["InOut", "bidirectional"],
    "CiM": ["computing in memory", "mvm"],
    "CAM": ["CaM", "content addressable memory", "tcam"],
    "PC": ["probabilistic", "probabilistic computing"],
    "SNN": ["spiking", "lif"],
    "Mesh3x3": ["mesh"],
    "Ring8": ["ring"],
    "uniform_random": ["uniform"],
}

# ---------------------------------------------------------------------------
# 3) Resolvers
# ---------------------------------------------------------------------------


def resolve_enum(value: Any, enum: str) -> str:
    """Return the canonical spelling of ``value`` within ``ENUMS[enum]``.

    Exact (case-insensitive) matches win, then alias lookups and finally
    (optionally) fuzzy matching.  Raises ``ValueError`` when nothing fits.
    """

    choices = ENUMS[enum]
    text = str(value).strip()
    lower = text.lower()
    for choice in choices:
        if choice.lower() == lower:
            return choice
    for choice in choices:
        if any(alt.lower() == lower for alt in ENUM_ALIASES.get(choice, [])):
            return choice
    if USE_FUZZ:
        best = process.extractOne(text, choices, scorer=fuzz.ratio)
        if best and best[1] >= 85:  # confidence threshold
            return best[0]
    raise ValueError(f"'{value}' is not a valid {enum}; expected one of {choices}")


def resolve_keys(record: Mapping[str, Any], aliases: Mapping[str, List[str]] = KEY_ALIASES) -> Dict[str, Any]:
    """Rename keys of ``record`` onto canonical field names.

    Keys already canonical are left untouched; alias keys are renamed only if
    the canonical key is absent.
    """

    out = dict(record)
    for want, alts in aliases.items():
        if want in out:
            continue
        for alt in alts:
            if alt in out:
                out[want] = out.pop(alt)
                break
    return out


def missing_fields(record: Mapping[str, Any], schema: str) -> List[str]:
    """Return the required fields of ``schema`` absent from ``record``."""
    return [f for f in SCHEMAS[schema] if f not in record]


__all__ = [
    "SCHEMAS",
    "KEY_ALIASES",
    "ENUMS",
    "ENUM_ALIASES",
    "resolve_enum",
    "resolve_keys",
    "missing_fields",
]
