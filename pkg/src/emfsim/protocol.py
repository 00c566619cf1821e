"""Exposure-aware association.

Uplink: when a UE's surface SAR at its head exceeds the trigger, it is
reassociated with the reachable BS whose link puts the least emission
toward the head. Transmit power is never backed off below what power
control needs; switching BS is the only lever.

Downlink: each UE is served by the BS that, after steering its main beam
at the UE, minimises the total SAR at the UE while meeting a rate floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dosimetry import (
    DEFAULT_HEAD_DISTANCE_M,
    ExposureLimits,
    TissueModel,
    downlink_pd_terms,
    sar_per_unit_pd,
    uplink_pd,
)
from .profiles import TechnologyProfile
from .radio import AntennaPattern, achievable_rate, gain_at, incident_power_density, pathloss_db, uplink_power_control

EMISSION_METRICS = ("sar", "pd", "eirp")
# relative slack when a link sits exactly on its quality floor
FLOOR_RTOL = 1e-9


class NoFeasibleBSError(ValueError):
    pass


@dataclass(frozen=True)
class HandoverDecision:
    ue: int
    from_bs: Optional[int]
    to_bs: int
    cause: str  # "initial" | "sar_trigger" | "downlink_exposure"
    predicted_sar_before: Optional[float]
    predicted_sar_after: Optional[float]
    candidates_evaluated: int

    def to_dict(self) -> dict:
        return {
            "ue": self.ue,
            "from_bs": self.from_bs,
            "to_bs": self.to_bs,
            "cause": self.cause,
            "predicted_sar_before": self.predicted_sar_before,
            "predicted_sar_after": self.predicted_sar_after,
            "candidates_evaluated": self.candidates_evaluated,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HandoverDecision":
        return cls(**data)


@dataclass(frozen=True)
class AssociationState:
    serving_bs: tuple[int, ...]
    ue_tx_power_w: tuple[float, ...]
    trigger_active: tuple[bool, ...]
    outage: tuple[bool, ...]
    decision_log: tuple[HandoverDecision, ...] = field(default=())


def _uplink_powers(topology, ue: int, profile: TechnologyProfile, bs_ids=None) -> np.ndarray:
    d = topology.ue_bs_distances(ue)
    if bs_ids is not None:
        d = d[np.asarray(bs_ids, dtype=int)]
    g_ue = profile.ue_pattern().main_gain
    g_bs = profile.bs_pattern().main_gain
    return np.atleast_1d(uplink_power_control(profile.radio, pathloss_db(profile.radio, d), g_ue, g_bs))


def nearest_bs(topology, ue: int) -> int:
    # argmin returns the first (lowest id) minimum
    return int(np.argmin(topology.ue_bs_distances(ue)))


def candidate_set(topology, ue: int, profile: TechnologyProfile, snr_floor: Optional[float] = None) -> list[int]:
    """BSs the UE reaches at ``snr_floor`` with power-controlled (capped) power, nearest first."""
    if snr_floor is None:
        snr_floor = profile.uplink_snr_floor
    d = topology.ue_bs_distances(ue)
    power = _uplink_powers(topology, ue, profile)
    g = profile.ue_pattern().main_gain * profile.bs_pattern().main_gain
    snr = power * g / 10.0 ** (pathloss_db(profile.radio, d) / 10.0) / profile.noise_w
    ok = np.flatnonzero(snr >= snr_floor * (1.0 - FLOOR_RTOL))
    return [int(i) for i in sorted(ok, key=lambda i: (d[i], i))]


def predicted_uplink_emissions(topology, ue: int, bs_ids: Sequence[int], profile: TechnologyProfile,
                               tissue: TissueModel, head_distance_m: float = DEFAULT_HEAD_DISTANCE_M,
                               metric: str = "sar") -> np.ndarray:
    """Vectorised :func:`predicted_uplink_emission` over ``bs_ids``."""
    if metric not in EMISSION_METRICS:
        raise ValueError(f"unknown emission metric {metric!r}; choose from {EMISSION_METRICS}")
    bs_ids = np.asarray(bs_ids, dtype=int)
    power = _uplink_powers(topology, ue, profile, bs_ids)
    beam = profile.ue_pattern()
    head = float(topology.head_azimuth[ue])
    # head gain with the UE beam steered at each BS: evaluate the pattern at head - bearing
    head_gain = np.atleast_1d(gain_at(beam, head - topology.ue_bs_bearings(ue)[bs_ids]))
    if metric == "eirp":
        return power * head_gain
    pd = uplink_pd(power, head_gain, head_distance_m)
    if metric == "pd":
        return pd
    return pd * sar_per_unit_pd(tissue, profile.radio.carrier_hz)


def predicted_uplink_emission(topology, ue: int, bs: int, profile: TechnologyProfile, tissue: TissueModel,
                              head_distance_m: float = DEFAULT_HEAD_DISTANCE_M, metric: str = "sar") -> float:
    """Emission toward the user's head if the UE were served by ``bs`` (surface SAR by default)."""
    if not 0 <= bs < topology.n_bs:
        raise IndexError(f"bs {bs} out of range [0, {topology.n_bs})")
    return float(predicted_uplink_emissions(topology, ue, [bs], profile, tissue, head_distance_m, metric)[0])


def _argmin_by_id(ids: Sequence[int], values: Sequence[float]) -> int:
    return min(zip(values, ids))[1]


def select_min_emission(topology, ue: int, candidates: Sequence[int], profile: TechnologyProfile,
                        tissue: TissueModel, head_distance_m: float = DEFAULT_HEAD_DISTANCE_M,
                        metric: str = "sar") -> int:
    if len(candidates) == 0:
        raise NoFeasibleBSError("no feasible BS")
    emissions = predicted_uplink_emissions(topology, ue, candidates, profile, tissue, head_distance_m, metric)
    return int(_argmin_by_id(candidates, emissions))


def initial_state(topology, profile: TechnologyProfile) -> AssociationState:
    """Nearest-BS association with power-controlled UE powers."""
    serving = tuple(nearest_bs(topology, u) for u in range(topology.n_ue))
    powers = tuple(float(_uplink_powers(topology, u, profile, [b])[0]) for u, b in enumerate(serving))
    n = topology.n_ue
    log = tuple(HandoverDecision(u, None, b, "initial", None, None, topology.n_bs) for u, b in enumerate(serving))
    return AssociationState(serving, powers, (False,) * n, (False,) * n, log)


def current_uplink_sar(state: AssociationState, topology, ue: int, profile: TechnologyProfile,
                       tissue: TissueModel, head_distance_m: float = DEFAULT_HEAD_DISTANCE_M) -> float:
    b = state.serving_bs[ue]
    beam = profile.ue_pattern(float(topology.ue_bs_bearings(ue)[b]))
    pd = float(uplink_pd(state.ue_tx_power_w[ue], gain_at(beam, float(topology.head_azimuth[ue])), head_distance_m))
    return float(pd * sar_per_unit_pd(tissue, profile.radio.carrier_hz))


def step_uplink(state: AssociationState, topology, profile: TechnologyProfile, tissue: TissueModel,
                limits: ExposureLimits, *, snr_floor: Optional[float] = None,
                head_distance_m: float = DEFAULT_HEAD_DISTANCE_M, metric: str = "sar",
                hysteresis_w_kg: float = 0.0) -> tuple[AssociationState, list[HandoverDecision]]:
    """One SAR-triggered reassociation pass over every UE.

    A UE triggers when its SAR exceeds ``sar_trigger_w_kg + hysteresis_w_kg``.
    It then moves to the minimum-emission candidate if that strictly lowers
    its predicted SAR; otherwise it stays put and keeps its power. UEs with
    no reachable BS are marked in outage.
    """
    serving = list(state.serving_bs)
    power = list(state.ue_tx_power_w)
    active = list(state.trigger_active)
    outage = list(state.outage)
    decisions: list[HandoverDecision] = []
    threshold = limits.sar_trigger_w_kg + hysteresis_w_kg
    for u in range(topology.n_ue):
        before = current_uplink_sar(state, topology, u, profile, tissue, head_distance_m)
        if not before > threshold:
            active[u] = False
            continue
        cands = candidate_set(topology, u, profile, snr_floor)
        if not cands:
            active[u] = True
            outage[u] = True
            continue
        outage[u] = False
        best = select_min_emission(topology, u, cands, profile, tissue, head_distance_m, metric)
        after = predicted_uplink_emission(topology, u, best, profile, tissue, head_distance_m)
        if best != serving[u] and after < before:
            decisions.append(HandoverDecision(u, serving[u], best, "sar_trigger", before, after, len(cands)))
            serving[u] = best
            power[u] = float(_uplink_powers(topology, u, profile, [best])[0])
            active[u] = after > threshold
        else:
            active[u] = True
    new_state = AssociationState(
        tuple(serving), tuple(power), tuple(active), tuple(outage), state.decision_log + tuple(decisions)
    )
    return new_state, decisions


def downlink_totals(topology, ue: int, beams: Sequence[AntennaPattern], powers, profile: TechnologyProfile
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Total incident PD at ``ue`` if each BS in turn served it, plus that BS's own serving-link PD.

    The serving BS steers its main beam at the UE; every other BS keeps its current beam.
    """
    base = downlink_pd_terms(topology, beams, powers, profile.radio, ue)
    main = np.array([beam.main_gain for beam in beams])
    own = np.atleast_1d(incident_power_density(profile.radio, np.asarray(powers, dtype=float), main,
                                               topology.ue_bs_distances(ue)))
    totals = np.empty(topology.n_bs)
    row = base.tolist()
    for b in range(topology.n_bs):
        row[b] = float(own[b])
        totals[b] = math.fsum(row)
        row[b] = float(base[b])
    return totals, own


def downlink_feasible(topology, ue: int, powers, profile: TechnologyProfile,
                      rate_floor: Optional[float] = None) -> list[int]:
    """BSs whose main-lobe link at their current power meets the rate floor (zero power never qualifies)."""
    if rate_floor is None:
        rate_floor = profile.downlink_rate_floor_bps
    radio = profile.radio
    powers = np.asarray(powers, dtype=float)
    g = profile.bs_pattern().main_gain * profile.ue_pattern().main_gain
    snr = powers * g / 10.0 ** (pathloss_db(radio, topology.ue_bs_distances(ue)) / 10.0) / profile.noise_w
    rate = achievable_rate(np.atleast_1d(snr), radio.bandwidth_hz)
    ok = (rate >= rate_floor * (1.0 - FLOOR_RTOL)) & (powers > 0)
    return [int(i) for i in np.flatnonzero(ok)]


def select_downlink(topology, ue: int, beams: Sequence[AntennaPattern], powers, profile: TechnologyProfile,
                    tissue: TissueModel, rate_floor: Optional[float] = None, totals: Optional[np.ndarray] = None
                    ) -> int:
    """Feasible BS minimising total downlink SAR at the UE; ``totals`` may carry precomputed :func:`downlink_totals`."""
    feasible = downlink_feasible(topology, ue, powers, profile, rate_floor)
    if not feasible:
        raise NoFeasibleBSError("no feasible BS")
    if totals is None:
        totals, _ = downlink_totals(topology, ue, beams, powers, profile)
    # SAR is a fixed positive multiple of total PD at one carrier
    sar = totals[feasible] * sar_per_unit_pd(tissue, profile.radio.carrier_hz)
    return int(_argmin_by_id(feasible, sar))
