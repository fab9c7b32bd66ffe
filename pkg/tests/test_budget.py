import math
from collections import defaultdict
from dataclasses import replace

import pytest

from memsoc.chip.activity import ActivityLog
from memsoc.chip.budget import (
    EventEnergy,
    audit,
    bandwidth_audit,
    corrected_claims,
    energy_report,
    entry_current,
    format_audit_table,
    pads_required,
    pin_totals,
    rail_current,
)
from memsoc.chip.chipdesc import PadGroup, RailPolicy, reference_chip
from memsoc.core.errors import ClockAboveMax

EXPECTED_MISMATCHES = {
    ("supply", 46, 52),
    ("ground", 46, 45),
    ("lvds", 42, 40),
    ("lvds_pairs", 21, 20),
    ("lvds_pairs", 22, 20),
    ("ttl", 31, 34),
    ("total_external", 140, 144),
}


def test_rail_currents_at_max_clock():
    currents = rail_current(reference_chip())
    assert currents["VDD_CORE"] == pytest.approx(297.9)
    assert currents["VDD_LVDS"] == pytest.approx(95.0)
    assert currents["VDD_ANA"] == pytest.approx(24.5)
    assert currents["VDD_CLK"] == 0.0


def test_noc_at_half_clock():
    currents = rail_current(reference_chip(), {"noc": 500e6})
    assert currents["VDD_CORE"] == pytest.approx(292.9)


def test_clock_map_accepts_block_names():
    by_key = rail_current(reference_chip(), {"riscv": 250e6})
    by_block = rail_current(reference_chip(), {"RISC-V": 250e6})
    assert by_key == by_block
    assert by_key["VDD_CORE"] == pytest.approx(297.9 - 5.0)


def test_current_scales_linearly():
    entry = reference_chip().entry("noc")
    assert entry_current(entry, 250e6) * 2 == pytest.approx(entry_current(entry, 500e6))
    assert entry_current(entry, 0.0) == 0.0
    assert entry_current(entry) == 10.0


def test_clock_above_max_rejected():
    with pytest.raises(ClockAboveMax):
        rail_current(reference_chip(), {"noc": 2e9})


def test_pads_required():
    assert pads_required(297.9, 15.0, RailPolicy.CURRENT_LIMITED) == 20
    assert pads_required(0.0, 15.0, "CurrentLimited") == 1
    assert pads_required(15.0, 15.0, RailPolicy.CURRENT_LIMITED) == 1
    assert pads_required(15.01, 15.0, RailPolicy.CURRENT_LIMITED) == 2
    assert pads_required(500.0, 15.0, RailPolicy.PER_BLOCK, blocks_served=7) == 7
    with pytest.raises(ValueError):
        pads_required(10.0, 0.0, RailPolicy.CURRENT_LIMITED)


def test_pads_required_is_monotone():
    previous = 0
    for tenth in range(0, 5000, 7):
        n = pads_required(tenth / 10, 15.0, RailPolicy.CURRENT_LIMITED)
        assert n >= previous
        assert n * 15.0 >= tenth / 10 - 1e-9
        previous = n


def test_pin_totals_of_reference_chip():
    totals = pin_totals(reference_chip())
    assert totals == {
        "supply": 52,
        "ground": 45,
        "analog_test": 14,
        "lvds": 40,
        "lvds_pairs": 20,
        "ttl": 34,
        "bridge_ttl": 11,
        "clock": 4,
        "digital_lvds_supply": 36,
        "analog_ca_supply": 7,
        "esd_ef_supply": 9,
        "total_external": 144,
    }


def test_pin_totals_match_naive_summation():
    desc = reference_chip()
    naive = defaultdict(int)
    for pad in desc.io_pads:
        width = 2 if pad.group is PadGroup.LVDS_PAIR else 1
        naive[pad.group] += pad.lane_count * width
    totals = pin_totals(desc)
    assert totals["supply"] == naive[PadGroup.SUPPLY]
    assert totals["ground"] == naive[PadGroup.GROUND]
    assert totals["lvds"] == naive[PadGroup.LVDS_PAIR]
    assert totals["ttl"] == naive[PadGroup.TTL]
    assert totals["total_external"] == sum(n for group, n in naive.items() if group is not PadGroup.GROUND)


def test_audit_reports_every_mismatch():
    report = audit(reference_chip())
    assert not report.ok
    found = {(m.category, m.claimed, m.computed) for m in report.mismatches}
    assert found == EXPECTED_MISMATCHES
    assert len(report.mismatches) == 7


def test_audit_rails_agree_with_declared_pads():
    report = audit(reference_chip())
    core = next(r for r in report.rails if r.rail == "VDD_CORE")
    assert core.total_ma == pytest.approx(297.9)
    assert core.pads_required == core.pads_declared == core.supply_pads == 20
    assert not any(m.category.startswith(("pads_", "supply_pads_")) for m in report.mismatches)


def test_audit_never_adopts_claims():
    report = audit(reference_chip())
    assert report.pin_totals["supply"] == 52
    assert report.pin_totals["total_external"] == 144


def test_tighter_pad_limit_flags_core_rail():
    report = audit(reference_chip(), pad_limit_ma=10.0)
    categories = {m.category for m in report.mismatches}
    assert "pads_VDD_CORE" in categories
    core = next(r for r in report.rails if r.rail == "VDD_CORE")
    assert core.pads_required == 30


def test_corrected_claims_audit_clean():
    fixed = corrected_claims(reference_chip())
    report = audit(fixed)
    assert report.ok
    assert report.mismatches == []


def test_audit_table_text():
    text = format_audit_table(audit(reference_chip()))
    assert "Rails" in text
    assert "VDD_CORE" in text
    assert "Mismatches (7)" in text
    assert "Mismatches (0)" in format_audit_table(audit(corrected_claims(reference_chip())))


def test_audit_report_serialises():
    data = audit(reference_chip()).to_dict()
    assert len(data["mismatches"]) == 7
    assert data["pin_totals"]["lvds_pairs"] == 20
    assert {r["rail"] for r in data["rails"]} == {r.name for r in reference_chip().rails}


def test_bandwidth_figures():
    bw = bandwidth_audit(reference_chip())
    assert bw["noc_peak_gbps"] == pytest.approx(32.0)
    assert bw["bridge_tx_gbps"] == pytest.approx(32.0)
    assert bw["bridge_rx_gbps"] == pytest.approx(0.8)
    assert bw["tx_rx_asymmetry"] == pytest.approx(40.0)
    assert bw["monitor_at_speed"] is True


def test_bandwidth_margin_at_half_clock():
    bw = bandwidth_audit(reference_chip(), noc_clock_hz=500e6)
    assert bw["noc_peak_gbps"] == pytest.approx(16.0)
    assert bw["tx_margin"] == pytest.approx(2.0)


def test_energy_of_active_noc():
    activity = ActivityLog(cycles=1_000_000, active={"noc": 1_000_000})
    trace = energy_report(reference_chip(), activity)
    assert trace.per_entry_pj["noc"] == pytest.approx(9e6)
    assert trace.total_pj == pytest.approx(9e6)
    assert trace.per_rail_pj["VDD_CORE"] == pytest.approx(9e6)


def test_energy_of_empty_run():
    trace = energy_report(reference_chip(), ActivityLog())
    assert trace.total_pj == 0.0
    assert trace.cycles == 0


def test_event_energy_lands_on_forming_rail():
    activity = ActivityLog()
    activity.record_event("form")
    activity.record_event("set", 3)
    trace = energy_report(reference_chip(), activity, event_energy=EventEnergy(form_pj=100.0, set_pj=10.0))
    assert trace.event_pj == {"form": 100.0, "set": 30.0, "reset": 0.0}
    assert trace.per_rail_pj["VDDA_EF"] == pytest.approx(130.0)
    assert trace.total_pj == pytest.approx(130.0)


def test_energy_is_additive_over_intervals():
    desc = reference_chip()
    first = ActivityLog(cycles=1000, active={"noc": 400, "ca_sram": 2100})
    first.record_event("reset", 2)
    second = ActivityLog(cycles=500, active={"noc": 500, "riscv": 250})
    total = energy_report(desc, first.merge(second)).total_pj
    parts = energy_report(desc, first).total_pj + energy_report(desc, second).total_pj
    assert math.isclose(total, parts, rel_tol=1e-12)


def test_idle_fraction_adds_energy():
    activity = ActivityLog(cycles=100, active={"noc": 10})
    busy = energy_report(reference_chip(), activity).total_pj
    idle = energy_report(reference_chip(), activity, idle_fraction=0.25).total_pj
    assert idle > busy
    with pytest.raises(ValueError):
        energy_report(reference_chip(), activity, idle_fraction=1.5)


def test_energy_follows_clock_map():
    activity = ActivityLog(cycles=1000, active={"noc": 1000})
    full = energy_report(reference_chip(), activity).per_entry_pj["noc"]
    half = energy_report(reference_chip(), activity, clock_map={"noc": 500e6}).per_entry_pj["noc"]
    assert half == pytest.approx(full / 2)


def test_description_without_claims_audits_clean():
    desc = replace(reference_chip(), claims=())
    assert audit(desc).ok
