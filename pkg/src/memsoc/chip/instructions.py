"""Instruction records shared by the CA controllers and the sequencer.

Programs arrive as JSON lists of records such as ``{"op": "Mvm", "x": [1, 2]}``;
every key other than ``op`` becomes an argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Sequence

from ..core.errors import BadInstruction

CA_OPS = (
    "Form",
    "LoadSram",
    "StoreSram",
    "Program",
    "Mvm",
    "Search",
    "SnnStep",
    "PcSample",
    "SendNoC",
    "RecvNoC",
)

SEQUENCER_OPS = (
    "WriteReg",
    "ReadReg",
    "SendNoC",
    "AwaitNoC",
    "RunCA",
    "WaitIrq",
    "RaiseIrqOut",
    "AxiRead",
    "LoadShared",
    "StoreShared",
    "Halt",
)


@dataclass(frozen=True)
class Instruction:
    op: str
    args: Dict[str, Any] = field(default_factory=dict)

    def get(self, name: str, default: Any = None) -> Any:
        return self.args.get(name, default)

    def require(self, name: str) -> Any:
        try:
            return self.args[name]
        except KeyError:
            raise BadInstruction(f"{self.op} needs argument '{name}'") from None

    @classmethod
    def from_record(cls, record: Mapping[str, Any] | "Instruction", ops: Sequence[str] = CA_OPS) -> "Instruction":
        if isinstance(record, Instruction):
            instr = record
        else:
            if not isinstance(record, Mapping) or "op" not in record:
                raise BadInstruction(f"instruction record needs an 'op' key: {record!r}")
            instr = cls(str(record["op"]), {k: v for k, v in record.items() if k != "op"})
        if instr.op not in ops:
            raise BadInstruction(f"unknown instruction '{instr.op}'; expected one of {list(ops)}")
        return instr


def parse_program(records: Iterable[Mapping[str, Any] | Instruction], ops: Sequence[str] = CA_OPS) -> List[Instruction]:
    return [Instruction.from_record(r, ops) for r in records]
