"""Propagation, sectored antennas and link budgets."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .topology import TWO_PI, bearing, distance, wrap_angle

SPEED_OF_LIGHT = 299_792_458.0  # m/s
BOLTZMANN = 1.380649e-23  # J/K
T0_KELVIN = 290.0
NORMALIZATION_RTOL = 1e-9


@dataclass(frozen=True)
class AntennaPattern:
    """Flat main lobe of width ``beamwidth`` centred on ``boresight``, flat side lobe elsewhere.

    Gains are linear and satisfy
    ``main_gain * beamwidth + side_gain * (2*pi - beamwidth) == 2*pi``.
    """

    main_gain: float
    side_gain: float
    beamwidth: float
    boresight: float = 0.0

    def __post_init__(self):
        if not 0 < self.beamwidth < TWO_PI:
            raise ValueError(f"beamwidth must lie in (0, 2*pi), got {self.beamwidth}")
        if not self.main_gain >= self.side_gain > 0:
            raise ValueError("need main_gain >= side_gain > 0")
        total = self.main_gain * self.beamwidth + self.side_gain * (TWO_PI - self.beamwidth)
        if abs(total - TWO_PI) > NORMALIZATION_RTOL * TWO_PI:
            raise ValueError(f"pattern not normalized: azimuth integral {total!r} != 2*pi")

    @classmethod
    def sectored(cls, beamwidth: float, side_gain: float = 0.1, boresight: float = 0.0) -> "AntennaPattern":
        """Pattern whose main gain is solved from the normalization identity."""
        main = (TWO_PI - side_gain * (TWO_PI - beamwidth)) / beamwidth
        return cls(main, side_gain, beamwidth, boresight)

    @classmethod
    def isotropic(cls, boresight: float = 0.0) -> "AntennaPattern":
        return cls(1.0, 1.0, math.pi, boresight)

    @classmethod
    def from_elements(cls, n_elements: int, side_gain: float = 0.1, boresight: float = 0.0) -> "AntennaPattern":
        """Array of ``n_elements`` with beamwidth 2*pi/N; a single element is isotropic."""
        if n_elements < 1:
            raise ValueError("n_elements must be >= 1")
        if n_elements == 1:
            return cls.isotropic(boresight)
        return cls.sectored(TWO_PI / n_elements, side_gain, boresight)

    def steered(self, boresight: float) -> "AntennaPattern":
        return replace(self, boresight=float(boresight))


def gain_at(pattern: AntennaPattern, azimuth):
    """Linear gain toward ``azimuth`` (scalar or array)."""
    off = np.abs(wrap_angle(np.asarray(azimuth, dtype=float) - pattern.boresight))
    gain = np.where(off <= pattern.beamwidth / 2.0, pattern.main_gain, pattern.side_gain)
    return float(gain) if gain.ndim == 0 else gain


def pattern_gains(patterns, azimuths) -> np.ndarray:
    """``gain_at(patterns[i], azimuths[i])`` for every i, in one vectorised pass."""
    bore = np.array([p.boresight for p in patterns], dtype=float)
    half = np.array([p.beamwidth for p in patterns], dtype=float) / 2.0
    main = np.array([p.main_gain for p in patterns], dtype=float)
    side = np.array([p.side_gain for p in patterns], dtype=float)
    off = np.abs(wrap_angle(np.asarray(azimuths, dtype=float) - bore))
    return np.where(off <= half, main, side)


@dataclass(frozen=True)
class RadioParams:
    carrier_hz: float
    bandwidth_hz: float
    tx_power_max_w: float
    tx_power_min_w: float
    noise_figure_db: float
    pathloss_exponent: float
    target_rx_power_w: float
    reference_distance_m: float = 1.0

    def __post_init__(self):
        if not self.carrier_hz > 0:
            raise ValueError("carrier_hz must be positive")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")
        if not 0 <= self.tx_power_min_w <= self.tx_power_max_w:
            raise ValueError("need 0 <= tx_power_min_w <= tx_power_max_w")
        if not self.pathloss_exponent >= 2:
            raise ValueError("pathloss_exponent must be >= 2")
        if not self.target_rx_power_w > 0:
            raise ValueError("target_rx_power_w must be positive")
        if not self.reference_distance_m > 0:
            raise ValueError("reference_distance_m must be positive")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz


@dataclass(frozen=True)
class LinkBudget:
    pathloss_db: float
    tx_gain: float
    rx_gain: float
    rx_power_w: float
    incident_pd_w_m2: float
    snr: float
    distance_m: float


def noise_power_w(params: RadioParams) -> float:
    """Thermal noise k*T0*B scaled by the receiver noise figure."""
    return BOLTZMANN * T0_KELVIN * params.bandwidth_hz * 10.0 ** (params.noise_figure_db / 10.0)


def _checked_distance(d):
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("invalid distance: must be positive")
    return d


def pathloss_db(params: RadioParams, d):
    """Log-distance path loss anchored to free space at the reference distance.

    Distances below the reference distance are clamped to it. With an
    exponent of 2 this is exactly the Friis free-space loss.
    """
    d0 = params.reference_distance_m
    d = np.maximum(_checked_distance(d), d0)
    anchor = 20.0 * math.log10(4.0 * math.pi * d0 * params.carrier_hz / SPEED_OF_LIGHT)
    pl = anchor + 10.0 * params.pathloss_exponent * np.log10(d / d0)
    return float(pl) if pl.ndim == 0 else pl


def incident_power_density(params: RadioParams, tx_power_w, tx_gain, d):
    """Power density in air, EIRP/(4*pi*d^2) with the excess-exponent decay beyond d_ref."""
    d0 = params.reference_distance_m
    d = np.maximum(_checked_distance(d), d0)
    excess = (d / d0) ** (2.0 - params.pathloss_exponent)
    pd = np.asarray(tx_power_w, dtype=float) * tx_gain / (4.0 * math.pi * d * d) * excess
    return float(pd) if pd.ndim == 0 else pd


def link_budget(params: RadioParams, tx_pattern: AntennaPattern, rx_pattern: AntennaPattern,
                tx_pos, rx_pos, tx_power_w: float) -> LinkBudget:
    tx_to_rx = bearing(tx_pos, rx_pos)
    rx_to_tx = bearing(rx_pos, tx_pos)
    d = distance(tx_pos, rx_pos)
    g_tx = gain_at(tx_pattern, tx_to_rx)
    g_rx = gain_at(rx_pattern, rx_to_tx)
    pl = pathloss_db(params, d)
    rx_power = tx_power_w * g_tx * g_rx / 10.0 ** (pl / 10.0)
    return LinkBudget(
        pathloss_db=pl,
        tx_gain=g_tx,
        rx_gain=g_rx,
        rx_power_w=rx_power,
        incident_pd_w_m2=incident_power_density(params, tx_power_w, g_tx, d),
        snr=rx_power / noise_power_w(params),
        distance_m=d,
    )


def uplink_power_control(params: RadioParams, pathloss_db, tx_gain, rx_gain):
    """Open-loop UE power that lands ``target_rx_power_w`` at the BS, clamped to the power range."""
    with np.errstate(over="ignore"):
        needed = params.target_rx_power_w * 10.0 ** (np.asarray(pathloss_db, dtype=float) / 10.0) / (tx_gain * rx_gain)
    p = np.clip(needed, params.tx_power_min_w, params.tx_power_max_w)
    return float(p) if p.ndim == 0 else p


def achievable_rate(snr, bandwidth_hz: float):
    snr = np.asarray(snr, dtype=float)
    if np.any(snr < 0):
        raise ValueError("snr must be non-negative")
    rate = bandwidth_hz * np.log2(1.0 + snr)
    return float(rate) if rate.ndim == 0 else rate
