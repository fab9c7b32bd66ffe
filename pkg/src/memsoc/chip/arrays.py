"""Memristor Computing Arrays (CAs).

Each CA couples a crossbar of :mod:`memristor` devices with DACs on the rows,
ADCs on the columns, a local controller and 32 KB of local SRAM.  A CA runs in
one of four paradigms:

* ``CiM``  analog matrix-vector multiply on the column currents,
* ``CAM``  ternary content addressable memory on complementary device pairs,
* ``SNN``  leaky integrate-and-fire neurons with crossbar synapses,
* ``PC``   Bernoulli bit streams drawn from row-0 device conductances.

The local controller executes :class:`Instruction` programs either standalone
(:meth:`ComputeArray.execute`) or one kernel cycle at a time
(:meth:`ComputeArray.tick`) when the simulation kernel owns the timeline.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Protocol, Sequence

import numpy as np

from ..core.errors import (
    BadInstruction,
    BadTernarySymbol,
    ClockAboveMax,
    CycleBudgetExhausted,
    LevelOutOfRange,
    NoCNotAttached,
    NotFormed,
    ShapeMismatch,
    SramOutOfRange,
    WrongParadigm,
)
from .activity import ActivityLog
from .chipdesc import ArrayParams
from .instructions import CA_OPS, Instruction, parse_program
from .memristor import BernoulliStream, DeviceParams, DeviceState, form, sample_many, set_level
from .sram import CA_SRAM_BYTES, SramModel

log = logging.getLogger(__name__)

PARADIGMS = ("CiM", "CAM", "SNN", "PC")
LOCAL_SRAM_BYTES = CA_SRAM_BYTES
MAX_DIGITAL_CLOCK_HZ = 1e9
MAX_ANALOG_CLOCK_HZ = 100e6


class NoCPort(Protocol):
    """What a CA needs from the network: one local injection and ejection port."""

    def send(self, dst: int, payload: int, tag: int = 0) -> bool: ...

    def recv(self) -> Optional[int]: ...


# ---------------------------------------------------------------------------
# Crossbar
# ---------------------------------------------------------------------------


class Crossbar:
    """rows × cols device grid with quantised analog periphery.

    Device values are kept as :class:`DeviceState` records; a numpy mirror of
    the formed flags and conductances serves the vectorised compute paths.
    """

    def __init__(
        self,
        rows: int,
        cols: int,
        params: DeviceParams,
        dac_bits: int = 8,
        adc_bits: int = 8,
        v_read_v: float = 0.2,
    ) -> None:
        if rows < 1 or cols < 1:
            raise ShapeMismatch(f"crossbar needs at least one row and column, got {rows}x{cols}")
        for label, bits in (("dac_bits", dac_bits), ("adc_bits", adc_bits)):
            if not 1 <= bits <= 12:
                raise ValueError(f"{label} must lie in [1, 12], got {bits}")
        if not 0 < v_read_v <= params.v_read_max_v:
            raise ValueError(f"v_read_v must lie in (0, {params.v_read_max_v}], got {v_read_v}")
        self.rows = rows
        self.cols = cols
        self.params = params
        self.dac_bits = dac_bits
        self.adc_bits = adc_bits
        self.v_read_v = v_read_v
        self.devices: List[List[DeviceState]] = [
            [DeviceState(key=r * cols + c) for c in range(cols)] for r in range(rows)
        ]
        self._formed = np.zeros((rows, cols), dtype=bool)
        self._g = np.zeros((rows, cols), dtype=np.float64)

    @classmethod
    def from_params(cls, array: ArrayParams) -> "Crossbar":
        return cls(array.rows, array.cols, array.device, array.dac_bits, array.adc_bits, array.v_read_v)

    # -- state access ------------------------------------------------------

    def _store(self, r: int, c: int, state: DeviceState) -> None:
        self.devices[r][c] = state
        self._formed[r, c] = state.formed
        self._g[r, c] = state.g_us

    def conductances(self) -> np.ndarray:
        return self._g.copy()

    def levels(self) -> np.ndarray:
        return np.array([[d.level for d in row] for row in self.devices], dtype=np.int64)

    def all_formed(self) -> bool:
        return bool(self._formed.all())

    def require_formed(self, rows: Optional[Sequence[int]] = None) -> None:
        """Raise :class:`NotFormed` naming the first virgin device in row-major order."""
        mask = self._formed if rows is None else self._formed[list(rows)]
        if mask.all():
            return
        r, c = (int(v) for v in np.argwhere(~mask)[0])
        if rows is not None:
            r = list(rows)[r]
        raise NotFormed("crossbar device is not formed", coord=(r, c))

    # -- programming -------------------------------------------------------

    def form_device(self, r: int, c: int, v: float, activity: Optional[ActivityLog] = None) -> None:
        self._store(r, c, form(self.devices[r][c], v, self.params, activity))

    def form_all(self, v: float, activity: Optional[ActivityLog] = None) -> int:
        """Form every virgin device; returns how many were formed."""
        count = 0
        for r in range(self.rows):
            for c in range(self.cols):
                if not self._formed[r, c]:
                    self.form_device(r, c, v, activity)
                    count += 1
        return count

    def set_device(self, r: int, c: int, k: int, activity: Optional[ActivityLog] = None) -> None:
        state = self.devices[r][c]
        if not state.formed:
            raise NotFormed("crossbar device is not formed", coord=(r, c))
        self._store(r, c, set_level(state, k, self.params, activity))

    def program(self, levels: Any, activity: Optional[ActivityLog] = None) -> None:
        grid = np.asarray(levels)
        if grid.shape != (self.rows, self.cols):
            raise ShapeMismatch(f"level grid {grid.shape} does not match crossbar {(self.rows, self.cols)}")
        self.require_formed()
        if grid.size and (grid.min() < 0 or grid.max() >= self.params.levels):
            raise LevelOutOfRange(f"level indices must lie in 0..{self.params.levels - 1}")
        for r in range(self.rows):
            for c in range(self.cols):
                self.set_device(r, c, int(grid[r, c]), activity)

    # -- analog periphery --------------------------------------------------

    @property
    def dac_max(self) -> int:
        return (1 << self.dac_bits) - 1

    @property
    def adc_max(self) -> int:
        return (1 << self.adc_bits) - 1

    @property
    def full_scale_ua(self) -> float:
        return self.rows * self.params.g_max_us * self.v_read_v

    def dac(self, codes: Any) -> np.ndarray:
        x = np.asarray(codes, dtype=np.int64)
        if x.shape != (self.rows,):
            raise ShapeMismatch(f"input vector of length {x.size} does not match {self.rows} rows")
        if x.size and (x.min() < 0 or x.max() > self.dac_max):
            raise ValueError(f"DAC codes must lie in 0..{self.dac_max}")
        return self.v_read_v * x / self.dac_max

    def adc(self, currents_ua: np.ndarray) -> np.ndarray:
        codes = np.floor(currents_ua / self.full_scale_ua * self.adc_max + 0.5)
        return np.clip(codes, 0, self.adc_max).astype(np.int64)

    def column_currents(self, voltages: np.ndarray) -> np.ndarray:
        """Kirchhoff sum per column in µA (G in µS, V in volts)."""
        return voltages @ self._g


# ---------------------------------------------------------------------------
# Computing Array
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NeuronParams:
    alpha: float = 0.9
    theta: float = 1.0
    v_reset: float = 0.0
    refractory: int = 2


class ComputeArray:
    """One CA: crossbar, local SRAM, paradigm state and local controller."""

    def __init__(
        self,
        ca_id: int,
        array: ArrayParams,
        *,
        chip_seed: int = 0,
        digital_clock_hz: float = 1e9,
        analog_clock_hz: float = 100e6,
        kernel_clock_hz: float = 1e9,
        pipeline: int = 1,
        neuron: NeuronParams = NeuronParams(),
        activity: Optional[ActivityLog] = None,
    ) -> None:
        if digital_clock_hz > MAX_DIGITAL_CLOCK_HZ:
            raise ClockAboveMax(f"CA digital clock {digital_clock_hz:g} Hz above 1 GHz")
        if analog_clock_hz > MAX_ANALOG_CLOCK_HZ:
            raise ClockAboveMax(f"CA analog clock {analog_clock_hz:g} Hz above 100 MHz")
        if array.paradigm not in PARADIGMS:
            raise WrongParadigm(f"unknown paradigm '{array.paradigm}'")
        self.ca_id = ca_id
        self.crossbar = Crossbar.from_params(array)
        self.default_paradigm = array.paradigm
        self.paradigm = array.paradigm
        self.chip_seed = chip_seed
        self.digital_clock_hz = digital_clock_hz
        self.analog_clock_hz = analog_clock_hz
        self.kernel_clock_hz = kernel_clock_hz
        self.pipeline = pipeline
        self.neuron = neuron
        self.activity = activity
        self.clock_divider = 1
        self.local_sram_bytes = LOCAL_SRAM_BYTES
        self.sram = SramModel(LOCAL_SRAM_BYTES, f"ca{ca_id}")
        self.membrane_v = np.zeros(self.crossbar.cols, dtype=np.float64)
        self.refractory_left = np.zeros(self.crossbar.cols, dtype=np.int64)
        self._cam_stored = np.zeros(self.crossbar.rows, dtype=bool)
        self._pc_streams: Dict[int, BernoulliStream] = {}
        self.vreg: List[int] = []
        # controller state
        self._program: List[Instruction] = []
        self._pc = 0
        self._busy_until = 0
        self._partial: List[int] = []
        self.results: List[Any] = []
        self.cycles = 0
        self.running = False

    # -- configuration -----------------------------------------------------

    def set_paradigm(self, paradigm: Optional[str]) -> None:
        paradigm = paradigm or self.default_paradigm
        if paradigm not in PARADIGMS:
            raise WrongParadigm(f"unknown paradigm '{paradigm}'")
        self.paradigm = paradigm

    def _require(self, paradigm: str) -> None:
        if self.paradigm != paradigm:
            raise WrongParadigm(f"CA{self.ca_id} runs {self.paradigm}, operation needs {paradigm}")

    @property
    def analog_cycle(self) -> int:
        """Kernel cycles per analog clock period."""
        return max(1, math.ceil(self.kernel_clock_hz / self.analog_clock_hz - 1e-9))

    @property
    def digital_cycle(self) -> int:
        return max(1, math.ceil(self.kernel_clock_hz / self.digital_clock_hz - 1e-9)) * max(1, self.clock_divider)

    # -- paradigm operations -----------------------------------------------

    def form_all(self, v: float) -> int:
        return self.crossbar.form_all(v, self.activity)

    def program_matrix(self, levels: Any) -> None:
        self.crossbar.program(levels, self.activity)
        self._cam_stored[:] = False

    def cim_mvm(self, x: Any) -> np.ndarray:
        self._require("CiM")
        self.crossbar.require_formed()
        v = self.crossbar.dac(x)
        return self.crossbar.adc(self.crossbar.column_currents(v))

    @property
    def cam_width(self) -> int:
        return self.crossbar.cols // 2

    def cam_store(self, row: int, word: str) -> None:
        """Store a ternary word; ``1`` = (g_max, g_min), ``0`` = (g_min, g_max), ``X`` = both g_min."""
        self._require("CAM")
        xb = self.crossbar
        if not 0 <= row < xb.rows:
            raise ShapeMismatch(f"CAM row {row} outside 0..{xb.rows - 1}")
        if len(word) != self.cam_width:
            raise ShapeMismatch(f"CAM word of length {len(word)} does not match width {self.cam_width}")
        top = xb.params.levels - 1
        pairs = {"1": (top, 0), "0": (0, top), "X": (0, 0)}
        cells = []
        for ch in word:
            pair = pairs.get(ch.upper())
            if pair is None:
                raise BadTernarySymbol(f"'{ch}' is not one of 0, 1, X")
            cells.append(pair)
        xb.require_formed([row])
        for c, (k_lo, k_hi) in enumerate(cells):
            xb.set_device(row, 2 * c, k_lo, self.activity)
            xb.set_device(row, 2 * c + 1, k_hi, self.activity)
        self._cam_stored[row] = True

    def cam_search(self, key: Any) -> np.ndarray:
        """Return one match bit per row; rows never stored read 0."""
        self._require("CAM")
        xb = self.crossbar
        bits = _key_bits(key)
        k = self.cam_width
        if bits.size != k:
            raise ShapeMismatch(f"CAM key of length {bits.size} does not match width {k}")
        xb.require_formed()
        v = xb.v_read_v
        cols = 2 * np.arange(k) + bits
        current = v * xb._g[:, cols].sum(axis=1)
        g_min, g_max = xb.params.g_min_us, xb.params.g_max_us
        threshold = v * ((2 * k - 1) * g_min + g_max) / 2
        return ((current < threshold) & self._cam_stored).astype(np.uint8)

    def snn_step(self, in_spikes: Any) -> np.ndarray:
        self._require("SNN")
        xb = self.crossbar
        s = np.asarray(in_spikes, dtype=np.float64)
        if s.shape != (xb.rows,):
            raise ShapeMismatch(f"spike vector of length {s.size} does not match {xb.rows} rows")
        xb.require_formed()
        p = xb.params
        w = (xb._g - p.g_min_us) / (p.g_max_us - p.g_min_us)
        n = self.neuron
        resting = self.refractory_left > 0
        integrated = n.alpha * self.membrane_v + s @ w
        fire = ~resting & (integrated >= n.theta)
        self.membrane_v = np.where(resting, self.membrane_v, np.where(fire, n.v_reset, integrated))
        self.refractory_left = np.where(resting, self.refractory_left - 1, np.where(fire, n.refractory, 0))
        return fire.astype(np.uint8)

    def pc_stream(self, col: int) -> BernoulliStream:
        if col not in self._pc_streams:
            self._pc_streams[col] = BernoulliStream(self.chip_seed, (self.ca_id << 16) | col)
        return self._pc_streams[col]

    def pc_sample(self, n: int) -> np.ndarray:
        """cols × n bit matrix, one seeded stream per column."""
        self._require("PC")
        xb = self.crossbar
        xb.require_formed([0])
        if n < 0:
            raise ValueError("sample count must be non-negative")
        out = np.zeros((xb.cols, n), dtype=np.uint8)
        for c in range(xb.cols):
            out[c] = sample_many(xb.devices[0][c], xb.params, self.pc_stream(c), n)
        return out

    # -- local memory ------------------------------------------------------

    def _check_sram(self, addr: int, size: int) -> None:
        if addr < 0 or addr + size > self.local_sram_bytes:
            bad = addr if addr < 0 or addr >= self.local_sram_bytes else self.local_sram_bytes
            raise SramOutOfRange(self.ca_id, bad, self.local_sram_bytes)

    def sram_load(self, addr: int, count: int, width: int = 1) -> List[int]:
        if width not in (1, 2, 4):
            raise BadInstruction(f"SRAM width must be 1, 2 or 4, got {width}")
        self._check_sram(addr, count * width)
        raw = self.sram.read(slice(addr, addr + count * width))
        return [int(v) for v in raw.view(f"<u{width}")] if count else []

    def sram_store(self, addr: int, values: Sequence[int], width: int = 1) -> int:
        if width not in (1, 2, 4):
            raise BadInstruction(f"SRAM width must be 1, 2 or 4, got {width}")
        self._check_sram(addr, len(values) * width)
        mask = (1 << (8 * width)) - 1
        data = np.array([int(v) & mask for v in values], dtype=f"<u{width}")
        self.sram.write(slice(addr, addr + data.nbytes), data.view(np.uint8))
        return int(data.nbytes)

    # -- local controller --------------------------------------------------

    def load(self, program: Sequence[Mapping[str, Any] | Instruction]) -> None:
        self._program = parse_program(program, CA_OPS)
        self._pc = 0
        self._busy_until = 0
        self._partial = []
        self.results = []
        self.cycles = 0
        self.running = bool(self._program)

    def abort(self) -> None:
        self.running = False

    def tick(self, cycle: int, port: Optional[NoCPort] = None) -> None:
        """Advance the controller by one kernel cycle."""
        if not self.running:
            return
        if self._pc >= len(self._program):
            if cycle >= self._busy_until:
                self.running = False
                return
        self.cycles += 1
        if self.activity is not None:
            self.activity.record_active("ca_controller")
        if cycle < self._busy_until:
            return
        instr = self._program[self._pc]
        if instr.op == "SendNoC":
            self._tick_send(instr, cycle, port)
        elif instr.op == "RecvNoC":
            self._tick_recv(instr, cycle, port)
        else:
            result, cost = self._run(instr)
            self._retire(result, cycle + cost)

    def _retire(self, result: Any, busy_until: int) -> None:
        self.results.append(result)
        self._busy_until = busy_until
        self._pc += 1
        self._partial = []

    def _tick_send(self, instr: Instruction, cycle: int, port: Optional[NoCPort]) -> None:
        if port is None:
            raise NoCNotAttached(f"CA{self.ca_id}: SendNoC without a network port")
        dst = int(instr.require("dst"))
        tag = int(instr.get("tag", 0))
        words = [int(w) & 0xFFFFFFFF for w in self.vreg]
        count = instr.get("count")
        if count is not None:
            words = words[: int(count)]
        if len(self._partial) < len(words):
            if port.send(dst, words[len(self._partial)], tag):
                self._partial.append(words[len(self._partial)])
        if len(self._partial) >= len(words):
            self._retire(len(words), cycle + 1)

    def _tick_recv(self, instr: Instruction, cycle: int, port: Optional[NoCPort]) -> None:
        if port is None:
            raise NoCNotAttached(f"CA{self.ca_id}: RecvNoC without a network port")
        count = int(instr.get("count", 1))
        word = port.recv() if len(self._partial) < count else None
        if word is not None:
            self._partial.append(int(word))
        if len(self._partial) >= count:
            self.vreg = list(self._partial)
            self._retire(list(self._partial), cycle + 1)

    def _analog(self, periods: int) -> int:
        cost = periods * self.analog_cycle
        if self.activity is not None:
            self.activity.record_active("ca_analog", cost)
        return cost

    def _digital(self, sram: bool = False) -> int:
        cost = self.digital_cycle
        if sram and self.activity is not None:
            self.activity.record_active("ca_sram", cost)
        return cost

    def _run(self, instr: Instruction) -> tuple[Any, int]:
        """Execute a non-network instruction; returns (result, kernel cycles)."""
        op = instr.op
        if op == "Form":
            formed = self.form_all(float(instr.get("v", 3.0)))
            return formed, self._analog(self.crossbar.rows)
        if op == "LoadSram":
            self.vreg = self.sram_load(int(instr.require("addr")), int(instr.get("count", 1)), int(instr.get("width", 1)))
            return list(self.vreg), self._digital(sram=True)
        if op == "StoreSram":
            values = instr.get("values")
            values = self.vreg if values is None else values
            return self.sram_store(int(instr.require("addr")), values, int(instr.get("width", 1))), self._digital(sram=True)
        if op == "Program":
            words = instr.get("words")
            if words is not None:
                items = words.items() if isinstance(words, Mapping) else enumerate(words)
                for row, word in items:
                    self.cam_store(int(row), str(word))
            else:
                self.program_matrix(instr.require("levels"))
            return None, self._analog(self.crossbar.rows)
        if op == "Mvm":
            x = instr.get("x")
            self.vreg = [int(v) for v in self.cim_mvm(self.vreg if x is None else x)]
            return list(self.vreg), self._analog(self.pipeline)
        if op == "Search":
            self.vreg = [int(v) for v in self.cam_search(instr.require("key"))]
            return list(self.vreg), self._analog(self.pipeline)
        if op == "SnnStep":
            spikes = instr.get("spikes")
            self.vreg = [int(v) for v in self.snn_step(self.vreg if spikes is None else spikes)]
            return list(self.vreg), self._analog(self.pipeline)
        if op == "PcSample":
            n = int(instr.require("n"))
            bits = self.pc_sample(n)
            self.vreg = [int(v) for v in bits.sum(axis=1)]
            return bits.tolist(), self._analog(max(1, n))
        raise BadInstruction(f"CA{self.ca_id}: unhandled instruction '{op}'")

    def execute(self, program: Sequence[Mapping[str, Any] | Instruction], port: Optional[NoCPort] = None, max_cycles: int = 10_000_000) -> List[Any]:
        """Run a program to completion on a private timeline and return its results."""
        self.load(program)
        cycle = 0
        while self.running:
            if cycle >= max_cycles:
                raise CycleBudgetExhausted(f"CA{self.ca_id}: program did not finish within {max_cycles} cycles")
            self.tick(cycle, port)
            cycle += 1
        log.debug("CA%d finished %d instructions in %d cycles", self.ca_id, len(self._program), self.cycles)
        return list(self.results)


def _key_bits(key: Any) -> np.ndarray:
    if isinstance(key, str):
        if any(ch not in "01" for ch in key):
            raise BadTernarySymbol(f"search key '{key}' must contain only 0 and 1")
        return np.array([int(ch) for ch in key], dtype=np.int64)
    bits = np.asarray(key, dtype=np.int64)
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise BadTernarySymbol("search key bits must be 0 or 1")
    return bits


def build_arrays(blocks, *, chip_seed: int = 0, activity: Optional[ActivityLog] = None, **kwargs: Any) -> List[ComputeArray]:
    """One :class:`ComputeArray` per ComputeArray block, numbered in declaration order."""
    arrays = []
    for ca_id, block in enumerate(blocks):
        params = block.array if block.array is not None else ArrayParams()
        arrays.append(ComputeArray(ca_id, params, chip_seed=chip_seed, activity=activity, **kwargs))
    return arrays
