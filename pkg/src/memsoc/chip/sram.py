"""Byte-addressed SRAM model with injectable stuck-at faults."""

from __future__ import annotations

from typing import Any

import numpy as np

CA_SRAM_BYTES = 32 * 1024
SHARED_SRAM_BYTES = 64 * 1024


class SramModel:
    """Byte array whose writes pass through per-byte stuck-at masks.

    A stuck-at-0 bit clears its bit in ``and_mask``; a stuck-at-1 bit sets it
    in ``or_mask``.  Every stored byte is ``(value & and_mask) | or_mask``.
    """

    def __init__(self, size_bytes: int, name: str = "sram") -> None:
        if size_bytes < 1:
            raise ValueError("SRAM size must be positive")
        self.name = name
        self.size = size_bytes
        self.data = np.zeros(size_bytes, dtype=np.uint8)
        self.and_mask = np.full(size_bytes, 0xFF, dtype=np.uint8)
        self.or_mask = np.zeros(size_bytes, dtype=np.uint8)

    def __len__(self) -> int:
        return self.size

    def inject_stuck_at(self, addr: int, bit: int, value: int) -> None:
        if not 0 <= addr < self.size:
            raise IndexError(f"{self.name}: address {addr} outside 0..{self.size - 1}")
        if not 0 <= bit < 8:
            raise ValueError(f"bit {bit} outside 0..7")
        m = np.uint8(1 << bit)
        if value:
            self.or_mask[addr] |= m
        else:
            self.and_mask[addr] &= ~m
        self.data[addr] = (self.data[addr] & self.and_mask[addr]) | self.or_mask[addr]

    def write(self, index: Any, values: Any) -> None:
        """Store ``values`` at ``index`` (int, slice or index array)."""
        self.data[index] = (np.asarray(values, dtype=np.uint8) & self.and_mask[index]) | self.or_mask[index]

    def read(self, index: Any) -> np.ndarray:
        return self.data[index].copy()
