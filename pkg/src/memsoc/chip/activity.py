"""Per-run block activity counters consumed by the energy report."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict

EVENT_KINDS = ("form", "set", "reset")


@dataclass
class ActivityLog:
    """Active instance-cycles per current entry plus memristor event counts.

    ``active`` is keyed by :attr:`CurrentEntry.key`; one CA busy for ten
    kernel cycles adds ten instance-cycles to the per-CA entries.
    """

    cycles: int = 0
    active: Dict[str, int] = field(default_factory=dict)
    events: Dict[str, int] = field(default_factory=lambda: {k: 0 for k in EVENT_KINDS})

    def record_active(self, key: str, cycles: int = 1) -> None:
        if cycles > 0:
            self.active[key] = self.active.get(key, 0) + int(cycles)

    def record_event(self, kind: str, count: int = 1) -> None:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown memristor event '{kind}'")
        self.events[kind] += int(count)

    def advance(self, cycles: int = 1) -> None:
        self.cycles += int(cycles)

    def merge(self, other: "ActivityLog") -> "ActivityLog":
        """Return the activity of two disjoint intervals combined."""
        merged = ActivityLog(cycles=self.cycles + other.cycles, active=dict(self.active), events=dict(self.events))
        for key, n in other.active.items():
            merged.active[key] = merged.active.get(key, 0) + n
        for kind, n in other.events.items():
            merged.events[kind] = merged.events.get(kind, 0) + n
        return merged

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cycles": self.cycles,
            "active": dict(sorted(self.active.items())),
            "events": dict(self.events),
        }
