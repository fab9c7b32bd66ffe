import json
from dataclasses import replace

import numpy as np
import pytest

from memsoc.chip.chipdesc import (
    BlockKind,
    BlockPlacement,
    ChipDescription,
    Rect,
    bond_wire_lengths,
    dump_description,
    load_description,
    reference_chip,
    ring_pads,
    validate_floorplan,
)
from memsoc.core.errors import MalformedDescription


def kinds(violations):
    return sorted({v.kind for v in violations})


def with_block(desc, index, **rect):
    blocks = list(desc.blocks)
    b = blocks[index]
    blocks[index] = replace(b, rect=replace(b.rect, **rect))
    return replace(desc, blocks=tuple(blocks))


def test_reference_chip_tables():
    desc = reference_chip()
    assert desc.rail("VDD_CORE").declared_pads == 20
    lvds_out = desc.entry("bridge_lvds_out")
    assert lvds_out.rail == "VDD_LVDS"
    assert lvds_out.max_current_ma == 95.0
    assert lvds_out.max_clock_hz == 1e9
    assert (desc.die_width_mm, desc.die_height_mm, desc.edge_margin_mm) == (6.0, 6.0, 0.8)
    assert desc.clock_inputs == 4
    assert desc.bond_wire_max_mm == 3.0
    assert {r.voltage_v for r in desc.rails} == {0.9, 1.4, 3.3}


def test_reference_chip_has_seven_memristor_arrays():
    cas = reference_chip().compute_arrays()
    assert len(cas) == 7
    assert all(b.uses_memristors for b in cas)
    assert all(b.rect.inside(0.8, 0.8, 5.2, 5.2) for b in cas)


def test_reference_chip_is_compliant():
    assert validate_floorplan(reference_chip()) == []


def test_reference_bond_wires_stay_short():
    lengths = [length for _name, _lane, length in bond_wire_lengths(reference_chip())]
    assert len(lengths) == len(ring_pads(reference_chip())) == 144
    assert min(lengths) >= 1.5 - 1e-9
    assert max(lengths) < 2.5


def test_memristor_block_near_edge():
    desc = with_block(reference_chip(), 0, x_mm=0.5)
    violations = validate_floorplan(desc)
    assert kinds(violations) == ["OutsideCenterSquare"]
    assert violations[0].subject == "CA0"


def test_small_die_with_memristor_block():
    desc = replace(
        reference_chip(),
        die_width_mm=5.0,
        die_height_mm=5.0,
        blocks=(BlockPlacement("CA0", BlockKind.COMPUTE_ARRAY, Rect(2.0, 2.0, 1.0, 1.0), uses_memristors=True),),
    )
    assert kinds(validate_floorplan(desc)) == ["DieTooSmall"]


def test_small_die_without_memristors_is_fine():
    desc = replace(
        reference_chip(),
        die_width_mm=5.0,
        die_height_mm=5.0,
        blocks=(BlockPlacement("RISC-V", BlockKind.PROCESSOR, Rect(2.0, 2.0, 1.0, 1.0)),),
    )
    assert validate_floorplan(desc) == []


def test_far_lead_ring_breaks_bond_wire_limit():
    violations = validate_floorplan(replace(reference_chip(), lead_ring_offset_mm=3.5))
    assert kinds(violations) == ["BondWireTooLong"]
    assert all(v.severity == "error" for v in violations)


def test_bond_wire_warning_threshold():
    violations = validate_floorplan(replace(reference_chip(), bond_wire_warn_mm=1.6))
    assert violations
    assert kinds(violations) == ["BondWireLong"]
    assert all(v.severity == "warning" for v in violations)


def test_validate_is_pure():
    desc = with_block(reference_chip(), 3, x_mm=0.1)
    assert validate_floorplan(desc) == validate_floorplan(desc)


def test_shrinking_die_always_flags_memristor_blocks():
    rng = np.random.default_rng(11)
    margin = 0.8
    for _ in range(200):
        x, y = rng.uniform(margin, 3.0, size=2)
        w, h = rng.uniform(0.1, 1.5, size=2)
        block = BlockPlacement("CA0", BlockKind.COMPUTE_ARRAY, Rect(x, y, w, h), uses_memristors=True)
        extent = max(x + w, y + h) + margin
        side = extent - rng.uniform(0.01, 0.5)
        desc = replace(reference_chip(), die_width_mm=side, die_height_mm=side, blocks=(block,))
        assert len(validate_floorplan(desc)) >= 1


def test_degenerate_rectangle_is_malformed():
    desc = with_block(reference_chip(), 2, w_mm=0.0)
    with pytest.raises(MalformedDescription):
        validate_floorplan(desc)


def test_json_round_trip(tmp_path):
    desc = reference_chip()
    path = tmp_path / "chip.json"
    dump_description(desc, path)
    again = load_description(path)
    assert again == desc
    assert again.to_json() == desc.to_json()


def test_from_json_rejects_bad_documents():
    with pytest.raises(MalformedDescription):
        ChipDescription.from_json("{not json")
    with pytest.raises(MalformedDescription):
        ChipDescription.from_json("[1, 2]")
    data = reference_chip().to_dict()
    del data["rails"]
    with pytest.raises(MalformedDescription):
        ChipDescription.from_json(json.dumps(data))


def test_unknown_rail_is_malformed():
    data = reference_chip().to_dict()
    data["current_entries"][0]["rail"] = "VDD_NOPE"
    with pytest.raises(MalformedDescription):
        ChipDescription.from_dict(data)


def test_enum_spellings_are_normalised():
    data = reference_chip().to_dict()
    data["blocks"][0]["kind"] = "compute_array"
    data["rails"][0]["policy"] = "currentlimited"
    desc = ChipDescription.from_dict(data)
    assert desc.blocks[0].kind is BlockKind.COMPUTE_ARRAY
    assert desc.rails[0] == reference_chip().rails[0]
