"""Frame-level behavior of the four-stage steering exchange."""
import json

import pytest

from conftest import CH1, CH6, CH11, CH36, ap_node, extender_node, sta_node, traffic, two_cell

from wlansteer.model import Band, Topology, make_node_map
from wlansteer.perf import SimEnv, busy_fractions, link_rssi
from wlansteer.protocol import (
    AssocRequest,
    AssocResponse,
    BeaconReport,
    BeaconRequest,
    BtmQuery,
    BtmRequest,
    BtmResponse,
    ChannelLoadReport,
    ChannelLoadRequest,
    ScanMode,
    export_events,
    run_mechanism,
    stage1_initial_association,
    stage2_collect,
    stage3_decide,
    stage4_reassociate,
)
from wlansteer.selection import (
    CandidateEntry,
    CandidateList,
    Mechanism,
    SelectionConfig,
    initial_association,
    reassociation_pass,
)

LA = SelectionConfig(mechanism=Mechanism.LOAD_AWARE, alpha=0.5)
RSSI = SelectionConfig(mechanism=Mechanism.RSSI_BASED)


def busy_two_cell():
    """Six stations, loaded enough that the steering pass moves some."""
    return two_cell(n_sta=6, per_sta_bps=8e6, sta_rssi_ap=-50.0, sta_rssi_ext=-55.0)


def test_stock_mechanism_exchanges_no_measurement_frames():
    t, env = busy_two_cell()
    steered, log = run_mechanism(t, env, RSSI)
    assert log.measurement_frames() == []
    assert steered.associations == initial_association(t, env).associations
    # two association frames per station, nothing else
    assert len(log.entries) == 2 * len(steered.associations)
    assert all(e.stage == 1 for e in log.entries)


def test_steered_run_composes_to_the_direct_pass():
    t, env = busy_two_cell()
    steered, log = run_mechanism(t, env, LA)
    direct, _ = reassociation_pass(initial_association(t, env), env, LA)
    assert steered.associations == direct.associations
    assert log.measurement_frames() != []


def test_station_queries_are_never_emitted():
    t, env = busy_two_cell()
    _, log = run_mechanism(t, env, LA)
    assert not any(isinstance(e.frame, BtmQuery) for e in log.entries)


def test_beacon_report_carries_exact_model_rssis():
    t, env = two_cell(n_sta=1, sta_rssi_ap=-61.0, sta_rssi_ext=-52.5)
    t1 = stage1_initial_association(t, env)
    reports = stage2_collect(t1, env, ScanMode.ACTIVE, [10])
    entries = reports.beacon[10].entries
    assert [e.bssid for e in entries] == [0, 1]
    by_bssid = {e.bssid: e for e in entries}
    assert by_bssid[0].rssi_dbm == -61.0
    assert by_bssid[1].rssi_dbm == -52.5
    assert by_bssid[0].channel == CH1
    assert by_bssid[1].channel == CH6
    assert by_bssid[0].frequency_mhz == 2400.0


def test_beacon_report_lists_one_entry_per_reachable_target():
    nodes = [ap_node(), extender_node(1, (20.0, 0.0), CH6),
             extender_node(2, (40.0, 0.0), CH11), sta_node(10, (30.0, 0.0))]
    t = Topology(nodes=make_node_map(nodes), backhaul_parent={1: 0, 2: 1})
    env = SimEnv(traffic=traffic(1e6, 1),
                 rssi_overrides={(10, 0, Band.GHZ_2_4): -70.0,
                                 (10, 1, Band.GHZ_2_4): -55.0,
                                 (10, 2, Band.GHZ_2_4): -60.0,
                                 (1, 0, Band.GHZ_5): -65.0,
                                 (2, 1, Band.GHZ_5): -65.0})
    reports = stage2_collect(t, env, ScanMode.ACTIVE, [10])
    assert len(reports.beacon[10].entries) == 3

    env_far = SimEnv(traffic=env.traffic,
                     rssi_overrides={**env.rssi_overrides,
                                     (10, 2, Band.GHZ_2_4): -95.0})
    reports = stage2_collect(t, env_far, ScanMode.ACTIVE, [10])
    assert [e.bssid for e in reports.beacon[10].entries] == [0, 1]


def test_channel_load_reports_match_the_occupation_model():
    t, env = busy_two_cell()
    t1 = stage1_initial_association(t, env)
    log_entries = []

    from wlansteer.protocol import EventLog
    log = EventLog()
    reports = stage2_collect(t1, env, ScanMode.ACTIVE, [10], log)
    assert reports.loads == busy_fractions(t1, env)

    load_reports = [e.frame for e in log.entries if isinstance(e.frame, ChannelLoadReport)]
    load_requests = [e for e in log.entries if isinstance(e.frame, ChannelLoadRequest)]
    # one report per serving radio, requests only travel to the extender
    assert len(load_reports) == 4
    assert {e.dst for e in load_requests} == {1}
    for rep in load_reports:
        assert rep.busy_fraction == reports.loads.get(rep.channel, 0.0)
        assert rep.measurement_duration_ms == 50.0


def test_saturated_channel_reports_full_occupation():
    t, env = two_cell(n_sta=4, per_sta_bps=60e6, sta_rssi_ap=-50.0, sta_rssi_ext=-80.0)
    t1 = stage1_initial_association(t, env)
    reports = stage2_collect(t1, env, ScanMode.ACTIVE, [10])
    assert reports.loads[CH1] == 1.0


def test_exclude_sta_discounts_its_own_airtime():
    t, env = busy_two_cell()
    t1 = stage1_initial_association(t, env)
    reports = stage2_collect(t1, env, ScanMode.ACTIVE, [10], exclude_sta=10)
    assert reports.loads == busy_fractions(t1, env, skip_sta=10)
    assert reports.loads[CH1] < busy_fractions(t1, env)[CH1]


def test_scan_modes_yield_identical_reports():
    t, env = busy_two_cell()
    t1 = stage1_initial_association(t, env)
    got = [stage2_collect(t1, env, mode, [10, 11]) for mode in ScanMode]
    for other in got[1:]:
        assert other.beacon == got[0].beacon
        assert other.loads == got[0].loads


def test_scan_mode_is_recorded_in_the_request():
    from wlansteer.protocol import EventLog
    t, env = busy_two_cell()
    t1 = stage1_initial_association(t, env)
    log = EventLog()
    stage2_collect(t1, env, ScanMode.BEACON_TABLE, [10], log)
    reqs = [e.frame for e in log.entries if isinstance(e.frame, BeaconRequest)]
    assert len(reqs) == 1
    assert reqs[0].mode is ScanMode.BEACON_TABLE


def test_non_capable_station_is_never_measured():
    t, env = busy_two_cell()
    nodes = dict(t.nodes)
    nodes[13] = sta_node(13, nodes[13].position, supports_11kv=False)
    t = Topology(nodes=nodes, backhaul_parent=t.backhaul_parent)
    _, log = run_mechanism(t, env, LA)
    for e in log.frames_for(13):
        assert isinstance(e.frame, (AssocRequest, AssocResponse))


def test_unreachable_station_exchanges_nothing():
    t, env = two_cell(n_sta=2, sta_rssi_ap=-96.0, sta_rssi_ext=-99.0)
    steered, log = run_mechanism(t, env, LA)
    assert steered.associations == {}
    assert log.frames_for(10) == []
    assert not any(isinstance(e.frame, BtmRequest) for e in log.entries)


def test_stage3_skips_stations_without_candidates():
    t, env = two_cell(n_sta=1, sta_rssi_ap=-96.0, sta_rssi_ext=-99.0)
    t1 = stage1_initial_association(t, env)
    assert t1.associations == {}
    reports = stage2_collect(t1, env, ScanMode.ACTIVE, [10])
    assert reports.beacon[10].entries == ()
    requests = stage3_decide(t1, env, reports, LA, [10])
    assert requests == {}


def test_stage4_applies_the_first_feasible_candidate():
    t, env = two_cell(n_sta=1, sta_rssi_ap=-60.0, sta_rssi_ext=-55.0)
    t1 = stage1_initial_association(t, env)
    assert t1.associations == {10: 1}
    req = BtmRequest(sta=10, candidates=CandidateList(
        sta=10,
        entries=(CandidateEntry(target=0, channel=CH1, score=(0.1, 0, 0)),
                 CandidateEntry(target=1, channel=CH6, score=(0.2, 1, 1)))))
    t2 = stage4_reassociate(t1, env, {10: req})
    assert t2.associations == {10: 0}


def test_stage4_stale_candidate_falls_through():
    # the best-ranked target has meanwhile dropped below sensitivity, the
    # station must land on the next feasible entry instead
    t, env = two_cell(n_sta=1, sta_rssi_ap=-96.0, sta_rssi_ext=-55.0)
    t1 = Topology(nodes=t.nodes, associations={10: 1},
                  backhaul_parent=t.backhaul_parent)
    req = BtmRequest(sta=10, candidates=CandidateList(
        sta=10,
        entries=(CandidateEntry(target=0, channel=CH1, score=(0.1, 0, 0)),
                 CandidateEntry(target=1, channel=CH6, score=(0.2, 1, 1)))))
    t2 = stage4_reassociate(t1, env, {10: req})
    assert t2.associations == {10: 1}


def test_staying_put_exchanges_no_association_frames():
    from wlansteer.protocol import EventLog
    t, env = two_cell(n_sta=1, sta_rssi_ap=-60.0, sta_rssi_ext=-55.0)
    t1 = stage1_initial_association(t, env)
    req = BtmRequest(sta=10, candidates=CandidateList(
        sta=10, entries=(CandidateEntry(target=1, channel=CH6, score=(0.1, 1, 1)),)))
    log = EventLog()
    t2 = stage4_reassociate(t1, env, {10: req}, log)
    assert t2.associations == t1.associations
    assert [type(e.frame).__name__ for e in log.entries] == ["BtmResponse"]


def test_frame_order_for_a_steered_station():
    t, env = busy_two_cell()
    steered, log = run_mechanism(t, env, LA)
    moved = next(s for s in steered.associations
                 if steered.associations[s] != initial_association(t, env).associations[s])
    kinds = [type(e.frame).__name__ for e in log.frames_for(moved)]
    assert kinds == [
        "AssocRequest", "AssocResponse",          # stage 1
        "BeaconRequest", "BeaconReport",          # stage 2
        "BtmRequest",                             # stage 3
        "BtmResponse", "AssocRequest", "AssocResponse",  # stage 4
    ]
    steps = [e.step for e in log.frames_for(moved)]
    assert steps == sorted(steps)


def test_log_steps_are_dense_and_ordered():
    t, env = busy_two_cell()
    _, log = run_mechanism(t, env, LA)
    assert [e.step for e in log.entries] == list(range(len(log.entries)))


def test_export_events_writes_parseable_lines(tmp_path):
    t, env = busy_two_cell()
    _, log = run_mechanism(t, env, LA)
    path = tmp_path / "events.ndjson"
    export_events(log, str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == len(log.entries)
    known = {"AssocRequest", "AssocResponse", "BeaconRequest", "BeaconReport",
             "ChannelLoadRequest", "ChannelLoadReport", "BtmRequest", "BtmResponse"}
    for i, line in enumerate(lines):
        rec = json.loads(line)
        assert set(rec) == {"step", "stage", "src", "dst", "frame", "fields"}
        assert rec["step"] == i
        assert rec["frame"] in known
