"""Emit a chip description as JSON (the reference chip unless a file is given)."""

from __future__ import annotations

from dataclasses import replace

from ..chip.chipdesc import BlockKind
from ..core.contracts import StepIO, ValidationResult
from ..core.registry import register
from ..core.step_base import Step
from .common import BAD_INPUT, bad_input, finish, load_desc


@register("Describe")
class Describe(Step):
    def plan_io(self) -> StepIO:
        desc = self.path("description")
        inputs = {"description": desc} if desc else {}
        report = self.path("report")
        return StepIO(inputs=inputs, outputs={"report": report} if report else {})

    def run(self, io: StepIO) -> ValidationResult:
        try:
            desc = load_desc(io.inputs.get("description"))
        except BAD_INPUT as exc:
            return bad_input(exc)
        if self.seed is not None:
            desc = replace(desc, seed=self.seed)
        metrics = {
            "blocks": len(desc.blocks),
            "compute_arrays": sum(1 for b in desc.blocks if b.kind is BlockKind.COMPUTE_ARRAY),
            "rails": len(desc.rails),
            "pad_groups": len(desc.io_pads),
        }
        messages = [f"{desc.name}: {metrics['compute_arrays']} compute arrays, {metrics['rails']} rails"]
        return finish(True, messages, metrics, desc.to_dict(), io.outputs.get("report"))
