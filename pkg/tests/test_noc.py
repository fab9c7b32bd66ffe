import numpy as np
import pandas as pd
import pytest

from memsoc.chip.noc import BRIDGE_NODE, Network, NoCConfig, NoCPacket
from memsoc.core.errors import BadNodeId, ClockAboveMax, TapAlreadyAttached


def test_adjacent_latency_is_two_cycles():
    net = Network()
    assert net.inject(NoCPacket(0, 1, 0xCAFE))
    delivered = net.advance(2)
    assert [p.payload for p in delivered] == [0xCAFE]
    assert delivered[0].latency == 2


def test_latency_grows_with_hops():
    net = Network()
    net.inject(NoCPacket(0, 8, 1))
    (pkt,) = net.drain()
    # four hops on the mesh plus ejection
    assert pkt.latency == 5


def test_ring_adjacent_latency():
    net = Network(NoCConfig(topology="Ring8"))
    assert net.num_nodes == 8
    net.inject(NoCPacket(7, 0, 5))
    (pkt,) = net.advance(2)
    assert pkt.latency == 2


def test_same_pair_keeps_fifo_order():
    net = Network()
    sent, got = [], []
    for i in range(40):
        if net.inject(NoCPacket(2, 6, i)):
            sent.append(i)
        got.extend(p.payload for p in net.advance(1))
    got.extend(p.payload for p in net.drain())
    assert got == sent
    assert net.delivered == len(sent) == 40


def test_fifo_order_under_contention():
    net = Network()
    delivered = []
    seq = {src: 0 for src in range(8)}
    for _ in range(400):
        for src in range(8):
            if net.inject(NoCPacket(src, 8, seq[src], tag=src)):
                seq[src] += 1
        delivered.extend(net.advance(1))
    delivered.extend(net.drain())
    for src in range(8):
        mine = [p.payload for p in delivered if p.tag == src]
        assert mine == list(range(seq[src]))


@pytest.mark.parametrize("topology", ["Mesh3x3", "Ring8"])
def test_packets_are_conserved(topology):
    net = Network(NoCConfig(topology=topology))
    rng = np.random.default_rng(3)
    accepted = 0
    delivered = []
    for _ in range(2000):
        src, dst = rng.choice(net.num_nodes, size=2, replace=False)
        if net.inject(NoCPacket(int(src), int(dst), int(rng.integers(0, 2**32)))):
            accepted += 1
        delivered.extend(net.advance(1))
    delivered.extend(net.drain())
    assert len(delivered) == accepted == net.injected == net.delivered
    assert net.in_flight() == 0
    assert net.stats()["peak_link_bits_per_cycle"] <= 32


RANDOM_RUNS = [
    (topology, pipeline, rate, seed)
    for topology in ("Mesh3x3", "Ring8")
    for pipeline in (1, 3)
    for rate in (0.02, 0.1, 0.3, 0.6, 1.0)
    for seed in range(5)
]


@pytest.mark.parametrize("topology,pipeline,rate,seed", RANDOM_RUNS)
def test_random_traffic_is_conserved_unique_and_ordered(topology, pipeline, rate, seed):
    rng = np.random.default_rng([seed, int(rate * 100), pipeline])
    depth = int(rng.integers(2, 6))
    net = Network(NoCConfig(topology=topology, router_pipeline_cycles=pipeline, fifo_depth=depth))
    tag = 0
    seen = set()
    last_tag = {}

    def check(delivered):
        for pkt in delivered:
            key = (pkt.src, pkt.dst, pkt.tag)
            assert key not in seen
            seen.add(key)
            assert last_tag.get((pkt.src, pkt.dst), -1) < pkt.tag
            last_tag[(pkt.src, pkt.dst)] = pkt.tag
        assert net.injected == net.delivered + net.in_flight()
        assert net.cycle_link_bits <= 32

    for _ in range(300):
        for src in range(net.num_nodes):
            if rng.random() < rate:
                dst = int(rng.integers(0, net.num_nodes - 1))
                dst += dst >= src
                if net.inject(NoCPacket(src, dst, tag & 0xFFFFFFFF, tag=tag)):
                    tag += 1
        check(net.advance(1))
    for _ in range(10_000):
        if not net.in_flight():
            break
        check(net.advance(1))
    assert net.in_flight() == 0
    assert len(seen) == net.injected == net.delivered == tag
    assert net.stats()["peak_link_bits_per_cycle"] <= 32


def test_peak_link_bits_is_zero_on_an_idle_network():
    net = Network()
    net.advance(5)
    assert net.stats()["peak_link_bits_per_cycle"] == 0
    net.inject(NoCPacket(0, 1, 1))
    net.advance(1)
    assert net.cycle_link_bits == 32


def test_link_never_exceeds_one_flit_per_cycle():
    net = Network()
    for _ in range(300):
        for src in range(8):
            net.inject(NoCPacket(src, 8, src))
        net.advance(1)
    net.drain()
    assert net.stats()["peak_link_bits_per_cycle"] == 32
    assert max(net.link_flits.values()) <= net.cycle


def test_injection_queue_refuses_when_full():
    net = Network(NoCConfig(fifo_depth=4))
    results = [net.inject(NoCPacket(0, 4, i)) for i in range(5)]
    assert results == [True, True, True, True, False]
    assert net.injected == 4
    assert not net.can_inject(0)


def test_bad_node_ids():
    net = Network()
    with pytest.raises(BadNodeId):
        net.inject(NoCPacket(0, 9, 1))
    with pytest.raises(BadNodeId):
        net.inject(NoCPacket(3, 3, 1))
    with pytest.raises(BadNodeId):
        Network(NoCConfig(topology="ring")).inject(NoCPacket(0, BRIDGE_NODE, 1))


def test_payload_must_be_a_word():
    with pytest.raises(ValueError):
        NoCPacket(0, 1, 2**32)


def test_config_limits():
    with pytest.raises(ClockAboveMax):
        NoCConfig(clock_hz=1.5e9)
    with pytest.raises(ValueError):
        NoCConfig(link_width_bits=64)
    with pytest.raises(ValueError):
        NoCConfig(topology="Ring8", fifo_depth=1)
    assert NoCConfig.from_dict({"topology": "mesh", "fifo_depth": 8, "unused": 1}).fifo_depth == 8


def test_tap_sees_every_delivery_once():
    net = Network()
    seen = []
    net.attach_tap(seen.append)
    with pytest.raises(TapAlreadyAttached):
        net.attach_tap(seen.append)
    for i in range(6):
        net.inject(NoCPacket(i, 7, i))
    delivered = net.drain()
    assert seen == delivered
    assert len(seen) == 6


def test_one_delivery_per_cycle_by_default():
    net = Network()
    for src in range(4):
        net.inject(NoCPacket(src, src + 3, src))
    per_cycle = []
    while net.in_flight():
        per_cycle.append(len(net.advance(1)))
    assert max(per_cycle) == 1
    assert sum(per_cycle) == 4


def test_stats_and_trace(tmp_path):
    net = Network(record_trace=True)
    net.inject(NoCPacket(0, 1, 1, tag=3))
    net.drain()
    stats = net.stats()
    assert stats["delivered"] == 1
    assert stats["mean_latency_cycles"] == 2.0
    path = tmp_path / "trace.csv"
    net.write_trace(path)
    df = pd.read_csv(path)
    assert list(df.columns) == ["cycle", "src", "dst", "tag", "event"]
    assert df["event"].tolist() == ["inject", "deliver"]
    assert df["cycle"].tolist() == [0, 2]
