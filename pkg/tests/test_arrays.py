import itertools

import numpy as np
import pytest

from memsoc.chip.activity import ActivityLog
from memsoc.chip.arrays import ComputeArray, Crossbar, NeuronParams
from memsoc.chip.chipdesc import ArrayParams
from memsoc.chip.memristor import DeviceParams
from memsoc.core.errors import (
    BadTernarySymbol,
    ClockAboveMax,
    NoCNotAttached,
    NotFormed,
    ShapeMismatch,
    SramOutOfRange,
    VoltageTooLow,
    WrongParadigm,
)


def make_ca(paradigm="CiM", rows=4, cols=4, device=None, formed=True, **kwargs):
    params = ArrayParams(
        paradigm=paradigm,
        rows=rows,
        cols=cols,
        dac_bits=kwargs.pop("dac_bits", 8),
        adc_bits=kwargs.pop("adc_bits", 8),
        device=device or DeviceParams(),
    )
    ca = ComputeArray(0, params, **kwargs)
    if formed:
        ca.form_all(3.0)
    return ca


class ListPort:
    def __init__(self):
        self.sent = []
        self.inbox = []

    def send(self, dst, payload, tag=0):
        self.sent.append((dst, payload, tag))
        return True

    def recv(self):
        return self.inbox.pop(0) if self.inbox else None


# -- programming -------------------------------------------------------------


def test_program_all_zero_gives_g_min():
    ca = make_ca()
    ca.program_matrix(np.zeros((4, 4), dtype=int))
    assert np.all(ca.crossbar.conductances() == DeviceParams().g_min_us)


def test_program_matches_linear_map():
    ca = make_ca()
    p = ca.crossbar.params
    levels = np.random.default_rng(1).integers(0, p.levels, (4, 4))
    ca.program_matrix(levels)
    expected = np.where(levels == p.levels - 1, p.g_max_us, p.g_min_us + levels * (p.g_max_us - p.g_min_us) / (p.levels - 1))
    assert np.allclose(ca.crossbar.conductances(), expected)
    assert np.array_equal(ca.crossbar.levels(), levels)


def test_program_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        make_ca().program_matrix(np.zeros((3, 4), dtype=int))


def test_program_reports_first_virgin_device():
    ca = make_ca(formed=False)
    for r in range(4):
        for c in range(4):
            if (r, c) != (2, 1) and (r, c) != (3, 0):
                ca.crossbar.form_device(r, c, 3.0)
    with pytest.raises(NotFormed) as info:
        ca.program_matrix(np.zeros((4, 4), dtype=int))
    assert info.value.coord == (2, 1)


def test_programming_events_are_recorded():
    activity = ActivityLog()
    ca = make_ca(activity=activity)
    ca.program_matrix(np.full((4, 4), 3))
    assert activity.events["form"] == 16
    assert activity.events["set"] == 16


# -- CiM ---------------------------------------------------------------------


def test_mvm_zero_input():
    ca = make_ca()
    ca.program_matrix(np.full((4, 4), 15))
    assert not ca.cim_mvm([0, 0, 0, 0]).any()


def test_mvm_matches_float_oracle_within_one_lsb():
    rng = np.random.default_rng(2024)
    ca = make_ca(rows=8, cols=8, dac_bits=12, adc_bits=12)
    xb = ca.crossbar
    for _ in range(1000):
        levels = rng.integers(0, xb.params.levels, (8, 8))
        x = rng.integers(0, xb.dac_max + 1, 8)
        ca.program_matrix(levels)
        g = np.array(
            [[xb.params.level_conductance(int(k)) for k in row] for row in levels], dtype=float
        )
        current = (xb.v_read_v * x / xb.dac_max) @ g
        oracle = np.round(current / (8 * xb.params.g_max_us * xb.v_read_v) * xb.adc_max)
        assert np.max(np.abs(ca.cim_mvm(x) - oracle)) <= 1


def test_mvm_is_monotone_in_device_level():
    ca = make_ca()
    levels = np.full((4, 4), 5)
    ca.program_matrix(levels)
    x = [200, 100, 50, 25]
    before = ca.cim_mvm(x)
    levels[1, 2] = 12
    ca.program_matrix(levels)
    after = ca.cim_mvm(x)
    assert np.all(after >= before)
    assert after[2] > before[2]


def test_mvm_wrong_paradigm_and_virgin():
    with pytest.raises(WrongParadigm):
        make_ca("CAM").cim_mvm([0, 0, 0, 0])
    with pytest.raises(NotFormed):
        make_ca(formed=False).cim_mvm([1, 1, 1, 1])


# -- CAM ---------------------------------------------------------------------


def ternary_match(word, key):
    return all(w == "X" or w == k for w, k in zip(word, key))


def test_cam_exhaustive_oracle():
    rng = np.random.default_rng(7)
    for width in (1, 3, 4, 8):
        ca = make_ca("CAM", rows=4, cols=2 * width)
        words = ["".join(rng.choice(list("01X"), width)) for _ in range(4)]
        for row, word in enumerate(words):
            ca.cam_store(row, word)
        for bits in itertools.product("01", repeat=width):
            key = "".join(bits)
            expected = [int(ternary_match(w, key)) for w in words]
            assert ca.cam_search(key).tolist() == expected


def test_cam_exact_and_single_bit_mismatch():
    ca = make_ca("CAM", rows=2, cols=8)
    ca.cam_store(0, "1011")
    assert ca.cam_search("1011").tolist() == [1, 0]
    assert ca.cam_search("1001").tolist() == [0, 0]


def test_cam_errors():
    ca = make_ca("CAM", rows=2, cols=8)
    with pytest.raises(BadTernarySymbol):
        ca.cam_store(0, "10Z1")
    with pytest.raises(BadTernarySymbol):
        ca.cam_search("10X1")
    with pytest.raises(ShapeMismatch):
        ca.cam_store(0, "101")
    with pytest.raises(WrongParadigm):
        make_ca("CiM", rows=2, cols=8).cam_search("1011")


# -- SNN ---------------------------------------------------------------------


def test_snn_single_synapse_hand_trace():
    ca = make_ca("SNN", rows=1, cols=1)
    ca.program_matrix([[15]])
    out = [int(ca.snn_step([1])[0]) for _ in range(4)]
    assert out == [1, 0, 0, 1]


def test_snn_zero_weights_never_spike():
    ca = make_ca("SNN")
    ca.program_matrix(np.zeros((4, 4), dtype=int))
    for _ in range(20):
        assert not ca.snn_step([1, 1, 1, 1]).any()
    assert np.all(ca.membrane_v == 0)


def test_snn_leak_without_input():
    ca = make_ca("SNN", rows=2, cols=2, neuron=NeuronParams(alpha=0.9))
    ca.program_matrix(np.zeros((2, 2), dtype=int))
    ca.membrane_v[:] = 0.5
    for t in range(1, 6):
        ca.snn_step([0, 0])
        assert np.allclose(ca.membrane_v, 0.5 * 0.9**t)


# -- PC ----------------------------------------------------------------------


def test_pc_g_min_gives_zeros():
    ca = make_ca("PC")
    ca.program_matrix(np.zeros((4, 4), dtype=int))
    assert not ca.pc_sample(256).any()


def test_pc_half_probability_and_determinism():
    device = DeviceParams(g_min_us=1.0, g_max_us=3.0, levels=3)
    a = make_ca("PC", device=device, chip_seed=5)
    b = make_ca("PC", device=device, chip_seed=5)
    for ca in (a, b):
        ca.program_matrix(np.ones((4, 4), dtype=int))
    bits_a = a.pc_sample(10_000)
    bits_b = b.pc_sample(10_000)
    assert bits_a.shape == (4, 10_000)
    assert np.array_equal(bits_a, bits_b)
    assert abs(bits_a.mean() - 0.5) <= 0.015
    assert np.all(np.abs(bits_a.mean(axis=1) - 0.5) <= 0.02)


# -- forming gate ------------------------------------------------------------


def test_every_compute_path_rejects_virgin_devices():
    rng = np.random.default_rng(99)
    ops = {
        "CiM": lambda ca: ca.cim_mvm([1, 2, 3, 4]),
        "CAM": lambda ca: ca.cam_search("10"),
        "SNN": lambda ca: ca.snn_step([1, 0, 1, 0]),
        "PC": lambda ca: ca.pc_sample(8),
    }
    for _ in range(50):
        paradigm = str(rng.choice(list(ops)))
        ca = make_ca(paradigm, formed=False)
        # form a random subset but keep one row-0 device virgin
        virgin = int(rng.integers(0, 4))
        for r in range(4):
            for c in range(4):
                if (r, c) != (0, virgin) and rng.random() < 0.7:
                    ca.crossbar.form_device(r, c, 3.0)
        with pytest.raises(NotFormed):
            ops[paradigm](ca)
        with pytest.raises(NotFormed):
            ca.program_matrix(np.zeros((4, 4), dtype=int))


def test_forming_below_threshold_always_rejected():
    rng = np.random.default_rng(3)
    ca = make_ca(formed=False)
    for v in rng.uniform(0.0, 2.999, 25):
        with pytest.raises(VoltageTooLow):
            ca.form_all(float(v))
    assert not ca.crossbar.all_formed()


# -- controller --------------------------------------------------------------


def test_empty_program():
    ca = make_ca()
    assert ca.execute([]) == []
    assert ca.cycles == 0


def test_store_at_sram_end_is_out_of_range():
    ca = make_ca()
    with pytest.raises(SramOutOfRange):
        ca.execute([{"op": "StoreSram", "addr": 32768, "values": [1]}])
    assert ca.execute([{"op": "StoreSram", "addr": 32767, "values": [1]}]) == [1]


def test_sram_little_endian_widths():
    ca = make_ca()
    ca.sram_store(16, [0x12345678], width=4)
    assert ca.sram_load(16, 4) == [0x78, 0x56, 0x34, 0x12]
    assert ca.sram_load(16, 2, width=2) == [0x5678, 0x1234]


def test_form_instruction_runs_on_analog_clock():
    ca = make_ca(formed=False)
    assert ca.execute([{"op": "Form", "v": 3.0}]) == [16]
    assert ca.cycles == 4 * ca.analog_cycle == 40


def test_three_mvms_send_in_order():
    ca = make_ca()
    ca.program_matrix(np.full((4, 4), 15))
    port = ListPort()
    program = []
    inputs = [[255, 0, 0, 0], [0, 0, 0, 0], [255, 255, 255, 255]]
    for x in inputs:
        program += [{"op": "Mvm", "x": x}, {"op": "SendNoC", "dst": 7, "count": 1, "tag": 1}]
    ca.execute(program, port=port)
    expected = [int(ca.cim_mvm(x)[0]) for x in inputs]
    assert port.sent == [(7, v, 1) for v in expected]
    assert expected[0] < expected[2]


def test_recv_then_store():
    ca = make_ca()
    port = ListPort()
    port.inbox = [5, 6]
    results = ca.execute([{"op": "RecvNoC", "count": 2}, {"op": "StoreSram", "addr": 0}], port=port)
    assert results == [[5, 6], 2]
    assert ca.sram_load(0, 2) == [5, 6]


def test_network_ops_need_a_port():
    with pytest.raises(NoCNotAttached):
        make_ca().execute([{"op": "SendNoC", "dst": 1}])


def test_clock_limits():
    with pytest.raises(ClockAboveMax):
        make_ca(formed=False, analog_clock_hz=200e6)
    with pytest.raises(ClockAboveMax):
        make_ca(formed=False, digital_clock_hz=2e9)


def test_crossbar_converter_bits():
    with pytest.raises(ValueError):
        Crossbar(2, 2, DeviceParams(), dac_bits=13)
    with pytest.raises(ValueError):
        Crossbar(2, 2, DeviceParams(), adc_bits=0)
