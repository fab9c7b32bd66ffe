"""Check a chip description against the floorplan and packaging rules."""

from __future__ import annotations

import logging

from ..chip.chipdesc import bond_wire_lengths, validate_floorplan
from ..core.contracts import StepIO, ValidationResult
from ..core.registry import register
from ..core.step_base import Step
from .common import BAD_INPUT, bad_input, finish, load_desc

log = logging.getLogger(__name__)


@register("Validate")
class Validate(Step):
    def plan_io(self) -> StepIO:
        desc = self.path("description")
        inputs = {"description": desc} if desc else {}
        report = self.path("report")
        return StepIO(inputs=inputs, outputs={"report": report} if report else {})

    def run(self, io: StepIO) -> ValidationResult:
        strict = bool(self.params.get("strict", False))
        try:
            desc = load_desc(io.inputs.get("description"))
            violations = validate_floorplan(desc)
        except BAD_INPUT as exc:
            return bad_input(exc)

        errors = [v for v in violations if v.severity == "error"]
        wires = [length for _name, _lane, length in bond_wire_lengths(desc)]
        metrics = {
            "errors": len(errors),
            "warnings": len(violations) - len(errors),
            "ring_pads": len(wires),
            "max_bond_wire_mm": round(max(wires), 4) if wires else 0.0,
        }
        messages = [f"{v.severity.upper()} {v.kind} {v.subject}: {v.detail}" for v in violations]
        messages.append(f"{desc.name}: {metrics['errors']} errors, {metrics['warnings']} warnings")
        for v in errors:
            log.warning("%s %s: %s", v.kind, v.subject, v.detail)
        payload = {"name": desc.name, "violations": [v.to_dict() for v in violations], **metrics}
        return finish(not (strict and errors), messages, metrics, payload, io.outputs.get("report"))
