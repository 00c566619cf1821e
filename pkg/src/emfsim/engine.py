"""Seeded Monte Carlo campaigns across technology profiles."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dosimetry import (
    DEFAULT_HEAD_DISTANCE_M,
    ExposureLimits,
    ExposureReport,
    TissueModel,
    downlink_exposure,
    load_tissue_table,
    surface_sar,
    uplink_exposure,
)
from .profiles import PRESETS, TechnologyProfile, build_profile, preset
from .protocol import (
    HandoverDecision,
    NoFeasibleBSError,
    initial_state,
    nearest_bs,
    select_downlink,
    step_uplink,
    downlink_totals,
)
from .topology import DeploymentConfig, EmptyDeploymentError, Topology, derive_seed, make_rng, sample_topology

__all__ = [
    "PRESETS",
    "CampaignResult",
    "DirectionStats",
    "SimulationSettings",
    "TrialRecord",
    "build_profile",
    "compare",
    "preset",
    "run_campaign",
    "run_trial",
    "trial_seed",
]

DIRECTIONS = ("downlink", "uplink")
Z_95 = 1.96


@dataclass(frozen=True)
class SimulationSettings:
    """Everything a trial needs besides the technology profile."""

    tissue: TissueModel = field(default_factory=load_tissue_table)
    limits: ExposureLimits = field(default_factory=ExposureLimits)
    mode: str = "ppp"
    window_cells: float = 10.0  # square window side, in cell radii
    window_m: Optional[tuple[float, float]] = None  # overrides window_cells
    ue_count: int = 10
    min_ue_bs_distance_m: float = 10.0
    head_distance_m: float = DEFAULT_HEAD_DISTANCE_M
    emission_metric: str = "sar"
    hysteresis_w_kg: float = 0.0

    def window_for(self, profile: TechnologyProfile) -> tuple[float, float]:
        if self.window_m is not None:
            return tuple(map(float, self.window_m))
        side = self.window_cells * profile.cell_radius_m
        return (side, side)


@dataclass(eq=False)
class TrialRecord:
    technology: str
    index: int
    seed: int
    skipped: bool = False
    topology: Optional[Topology] = None
    bs_boresight: tuple[float, ...] = ()
    bs_power_w: tuple[float, ...] = ()
    ul_serving: tuple[int, ...] = ()
    ue_tx_power_w: tuple[float, ...] = ()
    ul_outage: tuple[bool, ...] = ()
    dl_serving: tuple[int, ...] = ()
    dl_outage: tuple[bool, ...] = ()
    dl_serving_pd_w_m2: tuple[float, ...] = ()
    uplink: tuple[ExposureReport, ...] = ()
    downlink: tuple[ExposureReport, ...] = ()
    decisions: tuple[HandoverDecision, ...] = ()

    @property
    def handovers(self) -> int:
        return sum(d.cause == "sar_trigger" for d in self.decisions)

    def summary(self) -> dict:
        """Per-trial UE means; campaign statistics are built from these alone."""
        if self.skipped:
            return {"skipped": True}
        return {
            "skipped": False,
            "n_bs": self.topology.n_bs,
            "uplink_mean_sar_w_kg": float(np.mean([r.sar_w_kg for r in self.uplink])),
            "uplink_mean_pd_w_m2": float(np.mean([r.incident_pd_w_m2 for r in self.uplink])),
            "downlink_mean_sar_w_kg": float(np.mean([r.sar_w_kg for r in self.downlink])),
            "downlink_mean_pd_w_m2": float(np.mean([r.incident_pd_w_m2 for r in self.downlink])),
            "downlink_mean_serving_pd_w_m2": float(np.mean(self.dl_serving_pd_w_m2)),
            "uplink_handovers": self.handovers,
            "uplink_outages": int(sum(self.ul_outage)),
            "downlink_outages": int(sum(self.dl_outage)),
        }

    def to_dict(self, level: str = "summary") -> dict:
        out = {"technology": self.technology, "index": self.index, "seed": self.seed}
        out.update(self.summary())
        if self.skipped or level == "summary":
            return out
        out["ul_serving"] = list(self.ul_serving)
        out["dl_serving"] = list(self.dl_serving)
        out["ue_tx_power_w"] = list(self.ue_tx_power_w)
        out["decisions"] = [d.to_dict() for d in self.decisions]
        if level == "full":
            out["topology"] = self.topology.to_dict()
            out["bs_boresight"] = list(self.bs_boresight)
            out["bs_power_w"] = list(self.bs_power_w)
            out["ul_outage"] = list(self.ul_outage)
            out["dl_outage"] = list(self.dl_outage)
            out["dl_serving_pd_w_m2"] = list(self.dl_serving_pd_w_m2)
            out["uplink"] = [r.to_dict() for r in self.uplink]
            out["downlink"] = [r.to_dict() for r in self.downlink]
        return out


def trial_seed(master_seed: int, index: int) -> int:
    # technology-independent so every profile sees the same normalised draws
    return derive_seed(master_seed, index)


def assign_boresights(topology: Topology, serving: Sequence[int], rng: np.random.Generator) -> list[float]:
    """Each BS aims at one of its attached UEs (chosen at random); idle BSs point anywhere."""
    out = []
    for b in range(topology.n_bs):
        attached = [u for u, s in enumerate(serving) if s == b]
        if attached:
            u = attached[int(rng.integers(len(attached)))]
            dx, dy = topology.ue_positions[u] - topology.bs_positions[b]
            out.append(math.atan2(dy, dx))
        else:
            out.append(float(rng.uniform(-math.pi, math.pi)))
    return out


def run_trial(profile: TechnologyProfile, seed: int, settings: Optional[SimulationSettings] = None,
              index: int = 0) -> TrialRecord:
    """One static snapshot: deploy, associate, run the uplink step and downlink selection, assess exposure."""
    settings = settings or SimulationSettings()
    record = TrialRecord(profile.name, index, seed)
    config = DeploymentConfig(
        window=settings.window_for(profile),
        cell_radius=profile.cell_radius_m,
        seed=derive_seed(seed, 0),
        ue_count=settings.ue_count,
        mode=settings.mode,
        min_ue_bs_distance=settings.min_ue_bs_distance_m,
    )
    try:
        topo = sample_topology(config)
    except EmptyDeploymentError:
        record.skipped = True
        return record

    tissue, limits, f = settings.tissue, settings.limits, profile.radio.carrier_hz
    state = initial_state(topo, profile)
    boresight = assign_boresights(topo, state.serving_bs, make_rng(derive_seed(seed, 1)))
    beams = [profile.bs_pattern(az) for az in boresight]
    powers = [profile.bs_tx_power_w] * topo.n_bs

    state, _ = step_uplink(state, topo, profile, tissue, limits, head_distance_m=settings.head_distance_m,
                           metric=settings.emission_metric, hysteresis_w_kg=settings.hysteresis_w_kg)

    dl_serving, dl_outage, serving_pd, dl_reports = [], [], [], []
    dl_decisions = []
    for u in range(topo.n_ue):
        near = nearest_bs(topo, u)
        totals, own = downlink_totals(topo, u, beams, powers, profile)
        try:
            b = select_downlink(topo, u, beams, powers, profile, tissue, totals=totals)
            out = False
        except NoFeasibleBSError:
            b, out = near, True
        served = list(beams)
        served[b] = beams[b].steered(float(topo.ue_bs_bearings(u)[b]) + math.pi)
        report = downlink_exposure(topo, served, powers, profile.radio, u, tissue, limits)
        if b != near:
            before = surface_sar(float(totals[near]), tissue, f)
            dl_decisions.append(HandoverDecision(u, near, b, "downlink_exposure", before, report.sar_w_kg, topo.n_bs))
        dl_serving.append(b)
        dl_outage.append(out)
        serving_pd.append(float(own[b]))
        dl_reports.append(report)

    ul_reports = []
    for u in range(topo.n_ue):
        b = state.serving_bs[u]
        beam = profile.ue_pattern(float(topo.ue_bs_bearings(u)[b]))
        ul_reports.append(uplink_exposure(state.ue_tx_power_w[u], beam, float(topo.head_azimuth[u]),
                                          settings.head_distance_m, tissue, f, limits, source_id=f"ue{u}"))

    record.topology = topo
    record.bs_boresight = tuple(boresight)
    record.bs_power_w = tuple(powers)
    record.ul_serving = state.serving_bs
    record.ue_tx_power_w = state.ue_tx_power_w
    record.ul_outage = state.outage
    record.dl_serving = tuple(dl_serving)
    record.dl_outage = tuple(dl_outage)
    record.dl_serving_pd_w_m2 = tuple(serving_pd)
    record.uplink = tuple(ul_reports)
    record.downlink = tuple(dl_reports)
    record.decisions = state.decision_log + tuple(dl_decisions)
    return record


@dataclass(frozen=True)
class DirectionStats:
    trials: int
    skipped: int
    mean_sar_w_kg: float
    sar_stderr: float
    sar_ci_half_width: float
    mean_pd_w_m2: float
    pd_stderr: float
    pd_ci_half_width: float
    handovers: int
    outages: int
    mean_serving_pd_w_m2: Optional[float] = None

    @property
    def sar_interval(self) -> tuple[float, float]:
        return (self.mean_sar_w_kg - self.sar_ci_half_width, self.mean_sar_w_kg + self.sar_ci_half_width)


@dataclass(frozen=True)
class CampaignResult:
    master_seed: int
    trials: int
    technologies: tuple[str, ...]
    stats: dict  # technology -> direction -> DirectionStats
    records: tuple[TrialRecord, ...] = field(repr=False, default=())


def mean_and_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and its standard error; a single sample has stderr 0 by convention."""
    x = np.asarray(values, dtype=float)
    if len(x) == 0:
        return math.nan, math.nan
    if len(x) == 1:
        return float(x[0]), 0.0
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(len(x)))


def aggregate(summaries: Sequence[dict], trials: int) -> dict[str, DirectionStats]:
    """Statistics per direction from per-trial summaries (trial order is irrelevant up to rounding)."""
    kept = [s for s in summaries if not s["skipped"]]
    skipped = len(summaries) - len(kept)
    out = {}
    for direction in DIRECTIONS:
        m_sar, se_sar = mean_and_stderr([s[f"{direction}_mean_sar_w_kg"] for s in kept])
        m_pd, se_pd = mean_and_stderr([s[f"{direction}_mean_pd_w_m2"] for s in kept])
        serving = None
        if direction == "downlink":
            serving, _ = mean_and_stderr([s["downlink_mean_serving_pd_w_m2"] for s in kept])
        out[direction] = DirectionStats(
            trials=trials,
            skipped=skipped,
            mean_sar_w_kg=m_sar,
            sar_stderr=se_sar,
            sar_ci_half_width=Z_95 * se_sar,
            mean_pd_w_m2=m_pd,
            pd_stderr=se_pd,
            pd_ci_half_width=Z_95 * se_pd,
            handovers=sum(s["uplink_handovers"] for s in kept) if direction == "uplink" else 0,
            outages=sum(s[f"{direction}_outages"] for s in kept),
            mean_serving_pd_w_m2=serving,
        )
    return out


def _trial_task(args) -> TrialRecord:
    profile, seed, settings, index = args
    return run_trial(profile, seed, settings, index)


def run_campaign(profiles: Sequence[TechnologyProfile], trials: int, master_seed: int, parallelism: int = 1,
                 settings: Optional[SimulationSettings] = None) -> CampaignResult:
    """Run ``trials`` snapshots per profile; results do not depend on ``parallelism``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if len({p.name for p in profiles}) != len(profiles):
        raise ValueError("technology names must be unique within a campaign")
    settings = settings or SimulationSettings()
    tasks = [(p, trial_seed(master_seed, i), settings, i) for p in profiles for i in range(trials)]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            chunk = max(1, len(tasks) // (parallelism * 8))
            # map() yields in submission order regardless of completion order
            records = list(pool.map(_trial_task, tasks, chunksize=chunk))
    else:
        records = [_trial_task(t) for t in tasks]

    stats = {}
    for p in profiles:
        stats[p.name] = aggregate([r.summary() for r in records if r.technology == p.name], trials)
    return CampaignResult(master_seed, trials, tuple(p.name for p in profiles), stats, tuple(records))


@dataclass(frozen=True)
class Ranking:
    direction: str
    order: tuple[str, ...]
    separated: tuple[bool, ...]  # CI separation of order[i] vs order[i + 1]


def compare(result) -> list[Ranking]:
    """Rank technologies by mean SAR (highest first) per direction and flag CI separation.

    ``result`` is a :class:`CampaignResult` or its ``stats`` mapping.
    """
    stats = result.stats if isinstance(result, CampaignResult) else result
    if len(stats) < 2:
        raise ValueError("need at least two technologies to compare")
    out = []
    for direction in DIRECTIONS:
        order = sorted(stats, key=lambda t: (-stats[t][direction].mean_sar_w_kg, t))
        sep = []
        for hi, lo in zip(order, order[1:]):
            sep.append(stats[lo][direction].sar_interval[1] < stats[hi][direction].sar_interval[0])
        out.append(Ranking(direction, tuple(order), tuple(sep)))
    return out
