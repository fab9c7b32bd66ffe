"""Pipeline runner for the memsoc harness.

The runner loads a pipeline configuration, instantiates the registered steps
and executes them in order.  Every step yields a :class:`StepLog`; when the
configuration names a ``log`` folder the rows are appended to its
``run_log.csv``.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .core.contracts import StepLog, ValidationResult
from .core.io_utils import file_hash
from .core.logging_utils import append_step_log, now_ts
from .core.registry import get_step
from . import plugins  # noqa: F401  (registers the steps)

log = logging.getLogger(__name__)


def _hashes(paths: Mapping[str, str]) -> Dict[str, str]:
    return {k: file_hash(v) for k, v in paths.items() if Path(v).is_file()}


def _load_config(cfg: str | Path | Mapping[str, Any]) -> Dict[str, Any]:
    """Load pipeline configuration from ``cfg``.

    ``cfg`` may be a mapping already or a path to a YAML file; PyYAML is
    imported only when a file needs parsing.
    """

    if isinstance(cfg, Mapping):
        return dict(cfg)

    try:
        import yaml
    except Exception as exc:  # pragma: no cover - YAML is optional
        raise ImportError("PyYAML is required to load pipeline configuration from files") from exc

    path = Path(cfg)
    return yaml.safe_load(path.read_text()) or {}


def run_step(
    name: str,
    params: Optional[Mapping[str, Any]] = None,
    folders: Optional[Dict[str, str]] = None,
    naming: Optional[Dict[str, str]] = None,
    seed: Optional[int] = None,
) -> Tuple[ValidationResult, StepLog]:
    """Run one registered step and return its result together with its log row."""
    step_cls = get_step(name)
    step = step_cls({"params": dict(params or {})}, folders or {}, naming or {}, seed)
    io = step.plan_io()
    step.before(io)
    result = step.run(io)
    step.after(io, result)
    status = "ok" if result.ok else ("bad_input" if result.bad_input else "error")
    log.info("step %s finished: %s", name, status)
    row = StepLog(
        step_name=name,
        seed=step.seed or 0,
        status=status,
        messages=list(result.messages),
        metrics=dict(result.metrics),
        input_hashes=_hashes(io.inputs),
        output_hashes=_hashes(io.outputs),
    )
    return result, row


def run_pipeline(cfg: str | Path | Mapping[str, Any]) -> List[StepLog]:
    """Execute a configured pipeline and return logs for each step.

    Parameters
    ----------
    cfg:
        Either a mapping containing the pipeline definition or a path to a
        YAML file describing it.
    """

    config = _load_config(cfg)
    seed = config.get("seed")
    folders = config.get("folders", {}) or {}
    naming = config.get("naming", {}) or {}

    logs: List[StepLog] = []
    for item in config.get("pipeline", []) or []:
        _result, row = run_step(item["step"], item.get("params"), folders, naming, seed)
        logs.append(row)
        if folders.get("log"):
            append_step_log(folders["log"], {"timestamp": now_ts(), **row.to_row()})
        if row.status == "bad_input" and config.get("stop_on_error", True):
            log.error("pipeline stopped at %s", row.step_name)
            break
    return logs


__all__ = ["run_pipeline", "run_step"]
