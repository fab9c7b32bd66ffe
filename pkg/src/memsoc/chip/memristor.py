"""Behavioural model of a single memristive device.

A device starts *virgin* and must be electroformed once at the forming
voltage before it can be programmed or read.  After forming it holds one of
``levels`` conductance states on a linear grid between ``g_min_us`` and
``g_max_us``; every write lands on the nominal level perturbed by a seeded
relative Gaussian and clamped to the grid limits.

States are immutable values: every operation returns a new
:class:`DeviceState`, so arrays of devices can be evaluated independently.
All randomness is derived from ``(params.seed, state.key, state.cycles)`` or
from an explicit :class:`BernoulliStream`, never from global RNG state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Mapping, Optional

import numpy as np

from ..core.errors import AlreadyFormed, LevelOutOfRange, NotFormed, ReadVoltageTooHigh, VoltageTooLow
from .activity import ActivityLog


class Phase(str, Enum):
    VIRGIN = "Virgin"
    FORMED = "Formed"


@dataclass(frozen=True)
class DeviceParams:
    """Parameters shared by every device of one crossbar."""

    g_min_us: float = 1.0
    g_max_us: float = 100.0
    levels: int = 16
    v_form_v: float = 3.0
    v_read_max_v: float = 0.9
    sigma_rel: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.g_min_us < self.g_max_us:
            raise ValueError(f"need 0 < g_min_us < g_max_us, got {self.g_min_us}, {self.g_max_us}")
        if self.levels < 2:
            raise ValueError(f"levels must be >= 2, got {self.levels}")
        if not 0 <= self.sigma_rel < 0.5:
            raise ValueError(f"sigma_rel must lie in [0, 0.5), got {self.sigma_rel}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def level_conductance(self, k: int) -> float:
        """Nominal conductance of level ``k`` on the linear grid."""
        if k == self.levels - 1:
            return self.g_max_us
        return self.g_min_us + k * (self.g_max_us - self.g_min_us) / (self.levels - 1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "g_min_us": self.g_min_us,
            "g_max_us": self.g_max_us,
            "levels": self.levels,
            "v_form_v": self.v_form_v,
            "v_read_max_v": self.v_read_max_v,
            "sigma_rel": self.sigma_rel,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DeviceParams":
        known = {k: data[k] for k in cls().to_dict() if k in data}
        return cls(**known)


@dataclass(frozen=True)
class DeviceState:
    phase: Phase = Phase.VIRGIN
    level: int = 0
    g_us: float = 0.0
    cycles: int = 0
    key: int = 0  # identity within the crossbar, mixed into the RNG seed

    @property
    def formed(self) -> bool:
        return self.phase is Phase.FORMED


def _written_conductance(nominal: float, state: DeviceState, params: DeviceParams) -> float:
    if params.sigma_rel == 0:
        return nominal
    rng = np.random.default_rng([params.seed, state.key, state.cycles])
    g = nominal * (1.0 + params.sigma_rel * rng.standard_normal())
    return float(min(max(g, params.g_min_us), params.g_max_us))


def form(state: DeviceState, v: float, params: DeviceParams, activity: Optional[ActivityLog] = None) -> DeviceState:
    """Electroform a virgin device at voltage ``v``.

    Forming is a hard gate: ``v`` must reach ``params.v_form_v``.
    """
    if state.formed:
        raise AlreadyFormed(f"device {state.key} is already formed")
    if v < params.v_form_v:
        raise VoltageTooLow(f"forming needs {params.v_form_v} V, got {v} V")
    g = _written_conductance(params.g_min_us, state, params)
    if activity is not None:
        activity.record_event("form")
    return replace(state, phase=Phase.FORMED, level=0, g_us=g, cycles=state.cycles + 1)


def set_level(state: DeviceState, k: int, params: DeviceParams, activity: Optional[ActivityLog] = None) -> DeviceState:
    """Program a formed device to conductance level ``k``."""
    if not state.formed:
        raise NotFormed(f"device {state.key} is not formed")
    if not 0 <= k < params.levels:
        raise LevelOutOfRange(f"level {k} outside 0..{params.levels - 1}")
    g = _written_conductance(params.level_conductance(k), state, params)
    if activity is not None:
        activity.record_event("reset" if k == 0 else "set")
    return replace(state, level=int(k), g_us=g, cycles=state.cycles + 1)


def reset_device(state: DeviceState, params: DeviceParams, activity: Optional[ActivityLog] = None) -> DeviceState:
    return set_level(state, 0, params, activity)


def read_current(state: DeviceState, v: float, params: DeviceParams) -> float:
    """Read current in µA for a read voltage ``v`` (Ohm's law on µS)."""
    if not state.formed:
        raise NotFormed(f"device {state.key} is not formed")
    if abs(v) > params.v_read_max_v:
        raise ReadVoltageTooHigh(f"read at {v} V would disturb the device (max {params.v_read_max_v} V)")
    return state.g_us * v


def switching_probability(state: DeviceState, params: DeviceParams) -> float:
    p = (state.g_us - params.g_min_us) / (params.g_max_us - params.g_min_us)
    return min(max(p, 0.0), 1.0)


class BernoulliStream:
    """Seeded uniform draws with an explicit draw index.

    The ``i``-th draw of a stream depends only on ``(seed, key, i)``, so two
    streams built from the same arguments produce identical bits.
    """

    def __init__(self, seed: int, key: int = 0) -> None:
        self.seed = seed
        self.key = key
        self.draws = 0
        self._rng = np.random.default_rng([seed, key])

    def uniform(self, n: int) -> np.ndarray:
        out = self._rng.random(n)
        self.draws += n
        return out


def sample_bernoulli(state: DeviceState, params: DeviceParams, stream: BernoulliStream) -> int:
    """Draw one stochastic bit with probability given by the device conductance."""
    return int(sample_many(state, params, stream, 1)[0])


def sample_many(state: DeviceState, params: DeviceParams, stream: BernoulliStream, n: int) -> np.ndarray:
    if not state.formed:
        raise NotFormed(f"device {state.key} is not formed")
    p = switching_probability(state, params)
    return (stream.uniform(n) < p).astype(np.uint8)
