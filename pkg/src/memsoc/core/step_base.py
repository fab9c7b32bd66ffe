"""Base class for the harness steps.

A step declares its files with :meth:`Step.plan_io` and does its work in
:meth:`Step.run`; the runner and the CLI drive both.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Optional

from .contracts import StepIO, ValidationResult
from .io_utils import expand

log = logging.getLogger(__name__)


class Step(ABC):
    """One harness operation (describe, validate, audit, simulate, bist).

    Subclasses implement :meth:`plan_io` and :meth:`run`.  Step params come
    from ``cfg["params"]``; a ``seed`` param overrides the pipeline seed.
    """

    name: str = "BaseStep"

    def __init__(self, cfg: Dict[str, Any], folders: Dict[str, str], naming: Dict[str, str], seed: Optional[int] = None) -> None:
        self.cfg = cfg
        self.params: Dict[str, Any] = dict(cfg.get("params", {}) or {})
        self.folders = folders
        self.naming = naming
        raw = self.params.get("seed", seed)
        self.seed: Optional[int] = None if raw is None else int(raw)

    def path(self, key: str, default: str | None = None) -> str | None:
        """Resolve a file parameter.

        An explicit param wins, else the naming template ``<step>_<key>``.
        Templates may use ``{seed}``, ``{name}`` and any folder name.
        """
        template = self.params.get(key) or self.naming.get(f"{self.name.lower()}_{key}")
        if not template:
            return default
        return expand(str(template), seed=self.seed or 0, name=self.name.lower(), **self.folders)

    @abstractmethod
    def plan_io(self) -> StepIO:
        """Return the logical input and output paths for this step."""
        raise NotImplementedError

    @abstractmethod
    def run(self, io: StepIO) -> ValidationResult:
        """Execute the step and return a ValidationResult."""
        raise NotImplementedError

    def before(self, io: StepIO) -> None:
        """Create the folders of every planned output."""
        for out in io.outputs.values():
            if out:
                Path(out).parent.mkdir(parents=True, exist_ok=True)

    def after(self, io: StepIO, vr: ValidationResult) -> None:
        log.debug("%s finished ok=%s metrics=%s", self.name, vr.ok, vr.metrics)
