"""Exception hierarchy shared by the chip models and the steps.

Every error raised by :mod:`memsoc` derives from :class:`MemsocError` so the
steps can turn any of them into a failed :class:`ValidationResult`.  Errors
describing bad input additionally derive from :class:`ValueError`.
"""

from __future__ import annotations

from typing import Optional, Tuple


class MemsocError(Exception):
    """Base class for all simulator and audit errors."""


class MalformedDescription(MemsocError, ValueError):
    """A chip description violates a structural invariant."""


class BadInstruction(MemsocError, ValueError):
    """A CA or sequencer instruction record cannot be decoded."""


# Device and array errors -----------------------------------------------------


class VoltageTooLow(MemsocError, ValueError):
    pass


class AlreadyFormed(MemsocError):
    pass


class NotFormed(MemsocError):
    """A compute or programming operation touched a virgin device."""

    def __init__(self, message: str = "device is not formed", coord: Optional[Tuple[int, int]] = None) -> None:
        if coord is not None:
            message = f"{message} at (row={coord[0]}, col={coord[1]})"
        super().__init__(message)
        self.coord = coord


class LevelOutOfRange(MemsocError, ValueError):
    pass


class ReadVoltageTooHigh(MemsocError, ValueError):
    pass


class ShapeMismatch(MemsocError, ValueError):
    pass


class WrongParadigm(MemsocError):
    pass


class BadTernarySymbol(MemsocError, ValueError):
    pass


class SramOutOfRange(MemsocError):
    """A local SRAM access fell outside the CA's memory."""

    def __init__(self, ca_id: int, addr: int, size: int) -> None:
        super().__init__(f"CA{ca_id}: SRAM access at byte {addr} outside 0..{size - 1}")
        self.ca_id = ca_id
        self.addr = addr


class NoCNotAttached(MemsocError):
    """A CA program used SendNoC/RecvNoC without a network port."""


# Interconnect errors ---------------------------------------------------------


class BadNodeId(MemsocError, ValueError):
    pass


class TapAlreadyAttached(MemsocError):
    pass


class AlreadyConnected(MemsocError):
    pass


# Control plane errors --------------------------------------------------------


class BadAddress(MemsocError, ValueError):
    pass


class ScanDisabled(MemsocError):
    pass


class CycleBudgetExhausted(MemsocError):
    """The simulation ran out of cycles while waiting for a condition."""


# Budget errors ---------------------------------------------------------------


class ClockAboveMax(MemsocError, ValueError):
    pass


# Harness errors --------------------------------------------------------------


class BadWorkload(MemsocError, ValueError):
    """A workload document that cannot be turned into a simulation."""
