"""Helpers shared by the harness steps."""

from __future__ import annotations

import logging
from typing import Any, Dict, List, Optional

from ..chip.chipdesc import ChipDescription, load_description, reference_chip
from ..core.contracts import ValidationResult
from ..core.errors import MemsocError
from ..core.io_utils import write_json

log = logging.getLogger(__name__)

BAD_INPUT = (OSError, MemsocError, ValueError, KeyError)


def load_desc(path: Optional[str]) -> ChipDescription:
    """Load a description file, or return the reference chip when ``path`` is empty."""
    if not path:
        return reference_chip()
    log.debug("loading chip description %s", path)
    return load_description(path)


def bad_input(exc: BaseException, metrics: Optional[Dict[str, Any]] = None) -> ValidationResult:
    log.error("%s", exc)
    return ValidationResult(False, [f"{type(exc).__name__}: {exc}"], dict(metrics or {}), bad_input=True)


def finish(
    ok: bool,
    messages: List[str],
    metrics: Dict[str, Any],
    payload: Any,
    report_path: Optional[str],
) -> ValidationResult:
    if report_path:
        write_json(payload, report_path)
        messages.append(f"report written to {report_path}")
    return ValidationResult(ok, messages, metrics, payload=payload)
