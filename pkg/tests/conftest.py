"""Shared builders: tiny hand-wired networks with pinned link RSSIs."""
from __future__ import annotations

from wlansteer.model import Band, ChannelId, Node, NodeKind, RadioConfig, Topology
from wlansteer.perf import SimEnv, TrafficProfile

CH1 = ChannelId(Band.GHZ_2_4, 1)
CH6 = ChannelId(Band.GHZ_2_4, 6)
CH11 = ChannelId(Band.GHZ_2_4, 11)
CH36 = ChannelId(Band.GHZ_5, 36)

PACKET_BITS = 12000


def radio24(channel: ChannelId = CH1, tx: float = 20.0, sens: float = -90.0) -> RadioConfig:
    return RadioConfig(band=Band.GHZ_2_4, channel=channel, tx_power_dbm=tx,
                       sensitivity_dbm=sens)


def radio5(channel: ChannelId = CH36, tx: float = 20.0, sens: float = -90.0) -> RadioConfig:
    return RadioConfig(band=Band.GHZ_5, channel=channel, tx_power_dbm=tx,
                       sensitivity_dbm=sens)


def ap_node(pos=(0.0, 0.0)) -> Node:
    return Node(node_id=0, kind=NodeKind.AP, position=pos, radios=(radio24(), radio5()))


def extender_node(node_id: int, pos, access_channel: ChannelId = CH6) -> Node:
    return Node(node_id=node_id, kind=NodeKind.EXTENDER, position=pos,
                radios=(radio24(access_channel), radio5()))


def sta_node(node_id: int, pos=(1.0, 0.0), supports_11kv: bool = True) -> Node:
    return Node(node_id=node_id, kind=NodeKind.STA, position=pos,
                radios=(radio24(),), supports_11kv=supports_11kv)


def traffic(per_sta_bps: float, n_sta: int, packet_bits: int = PACKET_BITS) -> TrafficProfile:
    return TrafficProfile(packet_length_bits=packet_bits, per_sta_load_bps=per_sta_bps,
                          total_load_bps=per_sta_bps * n_sta)


def two_cell(n_sta: int = 4, per_sta_bps: float = 1e6,
             sta_rssi_ap: float = -60.0, sta_rssi_ext: float = -55.0,
             backhaul_rssi: float = -65.0):
    """One AP (access ch 1) plus one extender (access ch 6, 5 GHz uplink).

    Every STA sees both targets at the pinned RSSIs, so association outcomes
    depend only on the selection mechanism, never on geometry.
    """
    nodes = [ap_node(), extender_node(1, (20.0, 0.0))]
    overrides: dict[tuple[int, int, Band], float] = {(1, 0, Band.GHZ_5): backhaul_rssi}
    for i in range(n_sta):
        sid = 10 + i
        nodes.append(sta_node(sid, (10.0, float(i))))
        overrides[(sid, 0, Band.GHZ_2_4)] = sta_rssi_ap
        overrides[(sid, 1, Band.GHZ_2_4)] = sta_rssi_ext
    t = Topology(nodes={n.node_id: n for n in nodes}, backhaul_parent={1: 0})
    env = SimEnv(traffic=traffic(per_sta_bps, n_sta), rssi_overrides=overrides)
    return t, env
