"""Run a workload on the chip model and report network, bridge, energy and irq results."""

from __future__ import annotations

import logging
from typing import Dict

from ..chip.workload import Workload, load_workload, run_workload
from ..core.contracts import StepIO, ValidationResult
from ..core.registry import register
from ..core.step_base import Step
from .common import BAD_INPUT, bad_input, finish, load_desc

log = logging.getLogger(__name__)


@register("Simulate")
class Simulate(Step):
    def plan_io(self) -> StepIO:
        inputs: Dict[str, str] = {}
        for key in ("description", "workload"):
            path = self.path(key)
            if path:
                inputs[key] = path
        outputs: Dict[str, str] = {}
        for key in ("report", "trace", "monitor", "events"):
            path = self.path(key)
            if path:
                outputs[key] = path
        return StepIO(inputs=inputs, outputs=outputs)

    def run(self, io: StepIO) -> ValidationResult:
        try:
            desc = load_desc(io.inputs.get("description"))
            workload = load_workload(io.inputs["workload"]) if io.inputs.get("workload") else Workload()
            if self.seed is not None:
                workload.seed = self.seed
            report = run_workload(
                desc,
                workload,
                trace_path=io.outputs.get("trace"),
                monitor_path=io.outputs.get("monitor"),
                events_path=io.outputs.get("events"),
            )
        except BAD_INPUT as exc:
            return bad_input(exc)

        noc, bridge, energy = report["noc"], report["bridge"], report["energy"]
        metrics = {
            "cycles": report["cycles"],
            "delivered": noc["delivered"],
            "mean_latency_cycles": round(noc["mean_latency_cycles"], 4),
            "words_transferred": bridge["words_transferred"],
            "monitor_drops": bridge["monitor_drops"],
            "energy_pj": round(energy["total_pj"], 3),
            "irq_events": len(report["irq_events"]),
        }
        messages = [
            f"{workload.name}: {metrics['cycles']} cycles, {metrics['delivered']} packets delivered, "
            f"{metrics['monitor_drops']} monitor drops, {metrics['energy_pj']:g} pJ"
        ]
        log.info(messages[0])
        return finish(True, messages, metrics, report, io.outputs.get("report"))
