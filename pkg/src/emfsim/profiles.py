"""Technology presets (3.9G / 4G / 5G) and the derived link-quality settings."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Optional

from .radio import AntennaPattern, RadioParams, achievable_rate, noise_power_w, pathloss_db


@dataclass(frozen=True)
class TechnologyProfile:
    """Radio and deployment parameters for one technology generation.

    ``coverage_factor`` sets the calibration distance ``coverage_factor *
    cell_radius_m``: the uplink power-control target is the power received
    there from a max-power UE, and the uplink SNR floor and downlink rate
    floor are the values a main-lobe link achieves at that distance.
    """

    name: str
    radio: RadioParams
    cell_radius_m: float
    bs_elements: int
    ue_elements: int
    bs_tx_power_w: float
    uplink_snr_floor: float
    downlink_rate_floor_bps: float
    side_gain: float = 0.1
    coverage_factor: float = 2.0
    base: Optional[str] = None  # preset this profile was derived from

    def __post_init__(self):
        if not self.cell_radius_m > 0:
            raise ValueError("cell_radius_m must be positive")
        if self.bs_elements < 1 or self.ue_elements < 1:
            raise ValueError("element counts must be >= 1")
        if self.bs_tx_power_w < 0:
            raise ValueError("bs_tx_power_w must be non-negative")
        if self.uplink_snr_floor < 0 or self.downlink_rate_floor_bps < 0:
            raise ValueError("link-quality floors must be non-negative")
        if not self.coverage_factor > 0:
            raise ValueError("coverage_factor must be positive")

    def bs_pattern(self, boresight: float = 0.0) -> AntennaPattern:
        return AntennaPattern.from_elements(self.bs_elements, self.side_gain, boresight)

    def ue_pattern(self, boresight: float = 0.0) -> AntennaPattern:
        return AntennaPattern.from_elements(self.ue_elements, self.side_gain, boresight)

    @property
    def noise_w(self) -> float:
        return noise_power_w(self.radio)

    def to_dict(self) -> dict[str, Any]:
        out = {"name": self.name}
        out.update(asdict(self.radio))
        for f in fields(self):
            if f.name not in ("name", "radio"):
                out[f.name] = getattr(self, f.name)
        return out


_COMMON = dict(
    tx_power_max_w=0.2,
    tx_power_min_w=1e-7,
    noise_figure_db=7.0,
    reference_distance_m=1.0,
    side_gain=0.1,
    coverage_factor=2.0,
)

PRESETS: dict[str, dict[str, Any]] = {
    "5G": dict(_COMMON, carrier_hz=28e9, cell_radius_m=200.0, bandwidth_hz=400e6, pathloss_exponent=2.5,
               bs_elements=64, ue_elements=8, bs_tx_power_w=1.0),
    "4G": dict(_COMMON, carrier_hz=2e9, cell_radius_m=500.0, bandwidth_hz=20e6, pathloss_exponent=2.0,
               bs_elements=8, ue_elements=1, bs_tx_power_w=10.0),
    "3.9G": dict(_COMMON, carrier_hz=1.9e9, cell_radius_m=1000.0, bandwidth_hz=20e6, pathloss_exponent=2.0,
                 bs_elements=8, ue_elements=1, bs_tx_power_w=10.0),
}

RADIO_KEYS = tuple(f.name for f in fields(RadioParams))
DERIVED_KEYS = ("target_rx_power_w", "uplink_snr_floor", "downlink_rate_floor_bps")
PROFILE_KEYS = tuple(
    sorted(set(RADIO_KEYS) | {f.name for f in fields(TechnologyProfile)} - {"radio", "name", "base"})
)


def build_profile(base: str, name: Optional[str] = None, **overrides: Any) -> TechnologyProfile:
    """Preset ``base`` with ``overrides`` applied; derived settings are computed unless overridden."""
    if base not in PRESETS:
        raise ValueError(f"unknown technology {base!r}; valid names: {', '.join(PRESETS)}")
    unknown = set(overrides) - set(PROFILE_KEYS)
    if unknown:
        raise ValueError(f"unknown profile field(s): {', '.join(sorted(unknown))}")
    p = dict(PRESETS[base])
    p.update(overrides)

    bs_main = AntennaPattern.from_elements(int(p["bs_elements"]), p["side_gain"]).main_gain
    ue_main = AntennaPattern.from_elements(int(p["ue_elements"]), p["side_gain"]).main_gain
    edge = p["coverage_factor"] * p["cell_radius_m"]

    radio_kw = {k: p[k] for k in RADIO_KEYS if k in p}
    probe = RadioParams(**dict(radio_kw, target_rx_power_w=1.0))
    edge_loss = 10.0 ** (pathloss_db(probe, edge) / 10.0)
    noise = noise_power_w(probe)
    target = p.get("target_rx_power_w")
    if target is None:
        target = p["tx_power_max_w"] * ue_main * bs_main / edge_loss
    snr_floor = p.get("uplink_snr_floor")
    if snr_floor is None:
        snr_floor = target / noise
    rate_floor = p.get("downlink_rate_floor_bps")
    if rate_floor is None:
        rate_floor = achievable_rate(p["bs_tx_power_w"] * bs_main * ue_main / edge_loss / noise, p["bandwidth_hz"])

    return TechnologyProfile(
        name=name or base,
        radio=replace(probe, target_rx_power_w=float(target)),
        cell_radius_m=float(p["cell_radius_m"]),
        bs_elements=int(p["bs_elements"]),
        ue_elements=int(p["ue_elements"]),
        bs_tx_power_w=float(p["bs_tx_power_w"]),
        uplink_snr_floor=float(snr_floor),
        downlink_rate_floor_bps=float(rate_floor),
        side_gain=float(p["side_gain"]),
        coverage_factor=float(p["coverage_factor"]),
        base=base,
    )


def preset(name: str) -> TechnologyProfile:
    return build_profile(name)
