"""Rail, pad and bandwidth audit of a chip description."""

from __future__ import annotations

from pathlib import Path

from ..chip.budget import DEFAULT_PAD_LIMIT_MA, audit, bandwidth_audit, format_audit_table
from ..core.contracts import StepIO, ValidationResult
from ..core.registry import register
from ..core.step_base import Step
from .common import BAD_INPUT, bad_input, finish, load_desc


@register("Audit")
class Audit(Step):
    def plan_io(self) -> StepIO:
        desc = self.path("description")
        inputs = {"description": desc} if desc else {}
        outputs = {key: path for key in ("report", "table") if (path := self.path(key))}
        return StepIO(inputs=inputs, outputs=outputs)

    def run(self, io: StepIO) -> ValidationResult:
        strict = bool(self.params.get("strict", False))
        try:
            desc = load_desc(io.inputs.get("description"))
            report = audit(
                desc,
                pad_limit_ma=float(self.params.get("pad_limit_ma", DEFAULT_PAD_LIMIT_MA)),
                clock_map=self.params.get("clock_map"),
            )
            bandwidth = bandwidth_audit(desc, self.params.get("noc_clock_hz"))
        except BAD_INPUT as exc:
            return bad_input(exc)

        table = format_audit_table(report)
        if io.outputs.get("table"):
            Path(io.outputs["table"]).parent.mkdir(parents=True, exist_ok=True)
            Path(io.outputs["table"]).write_text(table, encoding="utf-8")

        metrics = {
            "mismatches": len(report.mismatches),
            **{f"pins_{k}": v for k, v in report.pin_totals.items()},
            "monitor_at_speed": bandwidth["monitor_at_speed"],
        }
        bw_line = (
            f"Bandwidth: NoC {bandwidth['noc_peak_gbps']:g} Gbit/s, TX {bandwidth['bridge_tx_gbps']:g} Gbit/s, "
            f"RX {bandwidth['bridge_rx_gbps']:g} Gbit/s, at speed: {bandwidth['monitor_at_speed']}"
        )
        payload = {"name": desc.name, **report.to_dict(), "bandwidth": bandwidth}
        return finish(not (strict and report.mismatches), [table + bw_line], metrics, payload, io.outputs.get("report"))
