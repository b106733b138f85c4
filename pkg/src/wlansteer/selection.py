"""AP/extender selection mechanisms.

Two policies decide which serving node a station attaches to:

* the stock rule: highest received signal strength wins;
* a channel-load-aware rule that scores every in-range serving node j for
  station i as

      score = alpha * (w_ij + load(access channel of j))
              + (1 - alpha) * sum of load(channel of k) over j's backhaul hops

  where w_ij is the received signal normalised into [0, 1] (0 at the
  transmit power, 1 at the station sensitivity) and load() is the observed
  busy fraction of a channel.  Lower scores are better: the rule prefers
  strong links on quiet channels reached over quiet backhaul.

alpha trades the access term against the backhaul term.  Ties break towards
the AP, then towards the lower node id.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .model import ChannelId, NodeKind, Topology, set_association
from .perf import SimEnv, busy_fractions, link_rssi
from .model import backhaul_path


class Mechanism(enum.Enum):
    RSSI_BASED = "rssi"
    LOAD_AWARE = "loadaware"


@dataclass(frozen=True)
class SelectionConfig:
    mechanism: Mechanism = Mechanism.RSSI_BASED
    alpha: float = 0.5
    beta_pct: float = 100.0
    passes: int = 1
    refresh_loads: bool = True
    include_self_load: bool = True

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")
        if not (0.0 <= self.beta_pct <= 100.0):
            raise ValueError("beta_pct must lie in [0, 100]")
        if self.passes < 1:
            raise ValueError("passes must be at least 1")


def weighted_rssi(rssi_dbm: float, tx_power_dbm: float, sensitivity_dbm: float) -> float:
    """Normalise a received level into [0, 1]; 0 at tx power, 1 at sensitivity."""
    if sensitivity_dbm >= tx_power_dbm:
        raise ValueError("sensitivity must lie below tx power")
    clamped = min(max(rssi_dbm, sensitivity_dbm), tx_power_dbm)
    return (clamped - tx_power_dbm) / (sensitivity_dbm - tx_power_dbm)


@dataclass(frozen=True)
class CandidateScore:
    sta: int
    target: int
    rssi_dbm: float
    weighted_rssi: float
    access_load: float
    backhaul_load_sum: float
    alpha: float
    score: float


@dataclass(frozen=True)
class CandidateEntry:
    target: int
    channel: ChannelId
    score: float


@dataclass(frozen=True)
class CandidateList:
    sta: int
    entries: tuple[CandidateEntry, ...]
    details: tuple[CandidateScore, ...] = ()


def score(
    t: Topology,
    env: SimEnv,
    sta: int,
    target: int,
    loads: Mapping[ChannelId, float],
    cfg: SelectionConfig,
    rssi: Optional[float] = None,
) -> CandidateScore:
    """Score one candidate serving node for one station (lower is better)."""
    target_node = t.node(target)
    access_ch = target_node.access_radio.channel
    if rssi is None:
        rssi = link_rssi(env, t, sta, target, access_ch.band)
    w = weighted_rssi(
        rssi,
        target_node.access_radio.tx_power_dbm,
        t.node(sta).access_radio.sensitivity_dbm,
    )
    c_access = loads.get(access_ch, 0.0)
    c_backhaul = 0.0
    for child, _ in backhaul_path(t, target):
        ch = t.node(child).backhaul_radio.channel
        c_backhaul += loads.get(ch, 0.0)
    a = cfg.alpha
    y = a * (w + c_access) + (1.0 - a) * c_backhaul
    return CandidateScore(
        sta=sta,
        target=target,
        rssi_dbm=rssi,
        weighted_rssi=w,
        access_load=c_access,
        backhaul_load_sum=c_backhaul,
        alpha=a,
        score=y,
    )


def _tie_rank(t: Topology, node_id: int) -> tuple[int, int]:
    return (0 if t.node(node_id).kind is NodeKind.AP else 1, node_id)


def rank_candidates(
    t: Topology,
    env: SimEnv,
    sta: int,
    cfg: SelectionConfig,
    loads: Optional[Mapping[ChannelId, float]] = None,
    with_details: bool = True,
) -> CandidateList:
    """All in-range serving nodes for ``sta``, best first.

    The load-aware mechanism sorts ascending by score; the stock mechanism
    sorts descending by raw RSSI.  Serving nodes whose signal sits below the
    station sensitivity never appear.  ``with_details=False`` skips the
    per-candidate score breakdown (ordering is unaffected).
    """
    sens = t.node(sta).access_radio.sensitivity_dbm
    in_range: list[tuple[int, float]] = []
    for target in t.serving_nodes():
        band = t.node(target).access_radio.channel.band
        rssi = link_rssi(env, t, sta, target, band)
        if rssi >= sens:
            in_range.append((target, rssi))

    if cfg.mechanism is Mechanism.RSSI_BASED:
        ordered = sorted(
            in_range, key=lambda tr: (-tr[1],) + _tie_rank(t, tr[0])
        )
        entries = tuple(
            CandidateEntry(tid, t.node(tid).access_radio.channel, rssi)
            for tid, rssi in ordered
        )
        return CandidateList(sta=sta, entries=entries)

    if loads is None:
        loads = busy_fractions(t, env)
    if not with_details:
        a = cfg.alpha
        light: list[tuple[tuple[float, int, int], ChannelId]] = []
        for tid, r in in_range:
            tn = t.nodes[tid]
            access_ch = tn.access_radio.channel
            w = weighted_rssi(r, tn.access_radio.tx_power_dbm, sens)
            c_access = loads.get(access_ch, 0.0)
            c_backhaul = 0.0
            for child, _ in backhaul_path(t, tid):
                c_backhaul += loads.get(t.nodes[child].backhaul_radio.channel, 0.0)
            y = a * (w + c_access) + (1.0 - a) * c_backhaul
            tie = 0 if tn.kind is NodeKind.AP else 1
            light.append(((y, tie, tid), access_ch))
        light.sort(key=lambda s: s[0])
        entries = tuple(
            CandidateEntry(key[2], ch, key[0]) for key, ch in light
        )
        return CandidateList(sta=sta, entries=entries)
    scores = [score(t, env, sta, tid, loads, cfg, rssi=r) for tid, r in in_range]
    scores.sort(key=lambda s: (s.score,) + _tie_rank(t, s.target))
    entries = tuple(
        CandidateEntry(s.target, t.node(s.target).access_radio.channel, s.score)
        for s in scores
    )
    return CandidateList(sta=sta, entries=entries, details=tuple(scores))


def initial_association(t: Topology, env: SimEnv) -> Topology:
    """Attach every station to its strongest in-range serving node.

    Stations hearing nobody stay unassociated.  This is both the stock
    mechanism's final answer and the load-aware mechanism's starting point.
    """
    serving = t.serving_nodes()
    bands = {j: t.nodes[j].access_radio.channel.band for j in serving}
    ties = {j: 0 if t.nodes[j].kind is NodeKind.AP else 1 for j in serving}
    assoc = dict(t.associations)
    for sta in t.stations():
        sens = t.nodes[sta].access_radio.sensitivity_dbm
        best = None
        for target in serving:
            rssi = link_rssi(env, t, sta, target, bands[target])
            if rssi < sens:
                continue
            key = (-rssi, ties[target], target)
            if best is None or key < best[0]:
                best = (key, target)
        if best is not None:
            assoc[sta] = best[1]
        else:
            assoc.pop(sta, None)
    return replace(t, associations=assoc)


def capable_count(beta_pct: float, n_sta: int) -> int:
    """Half-up rounding of the capable-station share."""
    return int(beta_pct * n_sta / 100.0 + 0.5)


def sample_capable(
    sta_ids: Sequence[int], beta_pct: float, rng: np.random.Generator
) -> frozenset[int]:
    """Draw which stations understand the measurement/steering exchanges.

    The draw consumes one permutation from ``rng`` regardless of beta, so the
    same generator state yields nested sets as beta grows.
    """
    ids = sorted(sta_ids)
    perm = rng.permutation(len(ids))
    n = capable_count(beta_pct, len(ids))
    return frozenset(ids[i] for i in perm[:n])


@dataclass(frozen=True)
class Move:
    sta: int
    old_parent: int
    new_parent: int


def reassociation_pass(
    t: Topology,
    env: SimEnv,
    cfg: SelectionConfig,
    capable: Optional[frozenset[int]] = None,
) -> tuple[Topology, list[Move]]:
    """Run the load-aware steering pass over all capable stations.

    Stations are visited in ascending id.  By default channel loads are
    recomputed from the current association state before each station's
    decision, so earlier moves are visible to later ones; with
    ``refresh_loads`` off the whole pass scores against one frozen snapshot.
    Every station already associated by the initial step stays associated.
    """
    if cfg.mechanism is Mechanism.RSSI_BASED:
        return t, []
    if capable is None:
        capable = frozenset(
            s for s in t.stations() if t.node(s).supports_11kv
        )
    moves: list[Move] = []
    for _ in range(cfg.passes):
        snapshot = None if cfg.refresh_loads else busy_fractions(t, env)
        pass_start = t
        # valid between moves when every station sees the same load map
        fresh: Optional[Mapping[ChannelId, float]] = None
        for sta in sorted(capable):
            current = t.associations.get(sta)
            if current is None:
                continue
            if cfg.refresh_loads:
                if cfg.include_self_load:
                    if fresh is None:
                        fresh = busy_fractions(t, env)
                    loads = fresh
                else:
                    loads = busy_fractions(t, env, skip_sta=sta)
            elif cfg.include_self_load:
                loads = snapshot
            else:
                loads = busy_fractions(pass_start, env, skip_sta=sta)
            cl = rank_candidates(t, env, sta, cfg, loads=loads, with_details=False)
            if not cl.entries:
                continue
            best = cl.entries[0].target
            if best != current:
                t = set_association(t, sta, best)
                moves.append(Move(sta=sta, old_parent=current, new_parent=best))
                fresh = None
    return t, moves
