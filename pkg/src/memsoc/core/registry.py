"""Step registry.

Plugins register on import with :func:`register`.  Pipeline files and the CLI
name steps either by class name (``Audit``) or by verb (``audit``), so lookups
ignore case.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Type, TYPE_CHECKING

if TYPE_CHECKING:
    from .step_base import Step

_STEPS: Dict[str, Type["Step"]] = {}


def register(name: str) -> Callable[[Type["Step"]], Type["Step"]]:
    """Class decorator: file a :class:`Step` under ``name``.

    Registering a second class under a name already taken raises ``ValueError``.
    """

    def _wrap(cls: Type["Step"]) -> Type["Step"]:
        key = name.lower()
        taken = _STEPS.get(key)
        if taken is not None and taken is not cls:
            raise ValueError(f"step {name!r} already registered by {taken.__qualname__}")
        cls.name = name
        _STEPS[key] = cls
        return cls

    return _wrap


def get_step(name: str) -> Type["Step"]:
    step = _STEPS.get(str(name).strip().lower())
    if step is None:
        known = ", ".join(registered()) or "(none)"
        raise KeyError(f"unknown step {name!r}; known steps: {known}")
    return step


def registered() -> List[str]:
    """Registered step names in their declared spelling, sorted."""
    return sorted(cls.name for cls in _STEPS.values())
