"""Memory BIST over every SRAM instance plus the scan-chain check.

Faults for demonstration runs are given as ``ADDR:BIT:VALUE`` (CA0 SRAM) or
``TARGET:ADDR:BIT:VALUE``; addresses accept ``0x`` prefixes.
"""

from __future__ import annotations

from typing import Any, Dict, List, Tuple

from ..chip.system import System, SystemConfig
from ..core.contracts import StepIO, ValidationResult
from ..core.errors import ScanDisabled
from ..core.registry import register
from ..core.step_base import Step
from .common import BAD_INPUT, bad_input, finish, load_desc


def parse_fault(text: str) -> Tuple[str, int, int, int]:
    parts = str(text).split(":")
    if len(parts) == 3:
        parts = ["ca0", *parts]
    if len(parts) != 4:
        raise ValueError(f"fault '{text}' must look like [TARGET:]ADDR:BIT:VALUE")
    target, addr, bit, value = parts
    value_i = int(value, 0)
    if value_i not in (0, 1):
        raise ValueError(f"stuck-at value must be 0 or 1, got {value}")
    return target, int(addr, 0), int(bit, 0), value_i


@register("Bist")
class Bist(Step):
    def plan_io(self) -> StepIO:
        desc = self.path("description")
        inputs = {"description": desc} if desc else {}
        report = self.path("report")
        return StepIO(inputs=inputs, outputs={"report": report} if report else {})

    def run(self, io: StepIO) -> ValidationResult:
        strict = bool(self.params.get("strict", False))
        injections = self.params.get("inject") or []
        if isinstance(injections, str):
            injections = [injections]
        try:
            desc = load_desc(io.inputs.get("description"))
            system = System(desc, SystemConfig(scan_enable=bool(self.params.get("scan_enable", True))), seed=self.seed)
            targets = system.mbist_targets()
            for fault in injections:
                target, addr, bit, value = parse_fault(fault)
                if target not in targets:
                    raise KeyError(f"unknown MBIST target '{target}'")
                targets[target].inject_stuck_at(addr, bit, value)
            if self.params.get("scan_break") is not None:
                system.scan_chain.inject_break(int(self.params["scan_break"]), int(self.params.get("scan_stuck", 0)))
        except (*BAD_INPUT, IndexError) as exc:
            return bad_input(exc)

        results = [system.mbist_run(name).to_dict() for name in targets]
        messages: List[str] = []
        for r in results:
            status = "PASS" if r["pass"] else f"FAIL at 0x{r['first_fault_addr']:X} (element {r['element']})"
            messages.append(f"MBIST {r['target']} ({r['addresses']} bytes): {status}")

        scan: Dict[str, Any]
        try:
            scan_result = system.scan_chain_check()
            scan = {"enabled": True, "pass": scan_result.passed, **scan_result.to_dict()}
            messages.append(
                f"scan chain ({scan_result.length} flops): "
                + ("PASS" if scan_result.passed else f"FAIL at position {scan_result.first_mismatch}")
            )
        except ScanDisabled as exc:
            scan = {"enabled": False, "pass": None}
            messages.append(f"scan chain skipped: {exc}")

        failed = sum(1 for r in results if not r["pass"]) + (1 if scan["pass"] is False else 0)
        metrics = {"mbist_targets": len(results), "failures": failed}
        payload = {"mbist": results, "scan": scan}
        return finish(not (strict and failed), messages, metrics, payload, io.outputs.get("report"))
