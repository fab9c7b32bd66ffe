"""Validation helpers shared by the audit and the harness steps."""

from __future__ import annotations


def totals_agree(computed: float, claimed: float, tolerance: float = 0.0) -> bool:
    """True when two totals match within ``tolerance`` (rounded to 6 places)."""
    return round(abs(float(computed) - float(claimed)), 6) <= tolerance
