"""Records passed between the runner and the steps.

They are plain dataclasses so a run can be logged to CSV or dumped as JSON
without custom encoders.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List


@dataclass
class StepIO:
    """Planned file paths of a step.

    Attributes
    ----------
    inputs: Mapping of logical input names (``description``, ``workload``) to paths.
    outputs: Mapping of logical output names (``report``, ``trace``, ``monitor``) to paths.
    """
    inputs: Dict[str, str]
    outputs: Dict[str, str]


@dataclass
class ValidationResult:
    """Outcome of one step.

    ``ok`` is False when the step failed or, under ``strict``, found
    violations or mismatches.  ``bad_input`` separates unreadable or malformed
    inputs from findings so the CLI can choose its exit code.  ``payload`` is
    the JSON-ready report of the step.
    """
    ok: bool
    messages: List[str] = field(default_factory=list)
    metrics: Dict[str, Any] = field(default_factory=dict)
    payload: Any = None
    bad_input: bool = False


@dataclass
class StepLog:
    """One row of the run log, with hashes of the files a step read and wrote."""
    step_name: str
    seed: int
    status: str
    messages: List[str]
    metrics: Dict[str, Any]
    input_hashes: Dict[str, str]
    output_hashes: Dict[str, str]

    def to_row(self) -> Dict[str, Any]:
        row = asdict(self)
        row["messages"] = " | ".join(self.messages)
        for key in ("metrics", "input_hashes", "output_hashes"):
            row[key] = ";".join(f"{k}={v}" for k, v in sorted(row[key].items()))
        return row
