"""Incident power density to surface SAR, exposure reports and compliance.

Surface SAR is the power density transmitted through the air-skin
interface divided by tissue mass density and power penetration depth::

    SAR = T(f) * PD / (rho * delta_p(f))

which carries units (W/m^2) / ((kg/m^3) * m) = W/kg.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .radio import AntennaPattern, RadioParams, SPEED_OF_LIGHT, gain_at, incident_power_density, pattern_gains
from .topology import Topology

DEFAULT_DENSITY_KG_M3 = 1100.0
DEFAULT_HEAD_DISTANCE_M = 0.05


@dataclass(frozen=True)
class ExposureLimits:
    pd_limit_w_m2: float = 10.0
    sar_limit_w_kg: float = 1.6
    sar_trigger_w_kg: float = 1.6

    def __post_init__(self):
        if not (self.pd_limit_w_m2 > 0 and self.sar_limit_w_kg > 0 and self.sar_trigger_w_kg > 0):
            raise ValueError("exposure limits must be positive")
        if self.sar_trigger_w_kg > self.sar_limit_w_kg:
            raise ValueError("sar_trigger_w_kg must not exceed sar_limit_w_kg")


@dataclass(frozen=True, eq=False)
class TissueModel:
    """Tabulated complex permittivity ``eps_real - j*eps_imag`` versus frequency.

    Between rows each component is interpolated linearly in log-frequency.
    """

    frequency_hz: np.ndarray
    eps_real: np.ndarray
    eps_imag: np.ndarray
    density_kg_m3: float = DEFAULT_DENSITY_KG_M3

    def __post_init__(self):
        f, er, ei = (np.asarray(a, dtype=float) for a in (self.frequency_hz, self.eps_real, self.eps_imag))
        if not (f.shape == er.shape == ei.shape) or f.ndim != 1:
            raise ValueError("tissue table columns must be 1-D and equally long")
        if len(f) < 2:
            raise ValueError("tissue table needs at least 2 rows")
        if np.any(np.diff(f) <= 0) or np.any(f <= 0):
            raise ValueError("tissue table frequencies must be positive and strictly increasing")
        if np.any(er < 1) or np.any(ei < 0):
            raise ValueError("tissue table needs eps_real >= 1 and eps_imag >= 0")
        if not self.density_kg_m3 > 0:
            raise ValueError("density_kg_m3 must be positive")
        for name, arr in (("frequency_hz", f), ("eps_real", er), ("eps_imag", ei)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def rows(self) -> list[tuple[float, float, float]]:
        return [(float(f), float(a), float(b)) for f, a, b in zip(self.frequency_hz, self.eps_real, self.eps_imag)]

    def covers(self, f: float) -> bool:
        return bool(self.frequency_hz[0] <= f <= self.frequency_hz[-1])

    def permittivity(self, f: float) -> complex:
        if not self.covers(f):
            raise ValueError(
                f"frequency outside tissue table: {f} Hz not in "
                f"[{self.frequency_hz[0]}, {self.frequency_hz[-1]}] Hz"
            )
        exact = np.flatnonzero(self.frequency_hz == f)
        if len(exact):
            i = exact[0]
            return complex(self.eps_real[i], -self.eps_imag[i])
        logf = np.log(self.frequency_hz)
        x = math.log(f)
        return complex(float(np.interp(x, logf, self.eps_real)), -float(np.interp(x, logf, self.eps_imag)))


def load_tissue_table(path: Optional[str | Path] = None, density_kg_m3: float = DEFAULT_DENSITY_KG_M3) -> TissueModel:
    """Read ``frequency_hz,eps_real,eps_imag`` rows; ``#`` lines are comments.

    Without a path the bundled dry-skin table is used.
    """
    if path is None:
        text = resources.files("emfsim").joinpath("data/skin_dry.csv").read_text()
    else:
        text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(lines)
    expected = {"frequency_hz", "eps_real", "eps_imag"}
    if reader.fieldnames is None or set(reader.fieldnames) != expected:
        raise ValueError(f"tissue table header must be {sorted(expected)}, got {reader.fieldnames}")
    rows = sorted((float(r["frequency_hz"]), float(r["eps_real"]), float(r["eps_imag"])) for r in reader)
    f, er, ei = (np.array(col) for col in zip(*rows))
    return TissueModel(f, er, ei, density_kg_m3)


def attenuation_constant(eps: complex, f: float) -> float:
    """Field attenuation constant in 1/m of a plane wave in a medium of relative permittivity ``eps``."""
    return 2.0 * math.pi * f / SPEED_OF_LIGHT * abs(cmath.sqrt(complex(eps)).imag)


def power_penetration_depth(eps: complex, f: float) -> float:
    alpha = attenuation_constant(eps, f)
    if alpha == 0:
        raise ValueError("lossless medium: penetration depth unbounded")
    return 1.0 / (2.0 * alpha)


def fresnel_transmittance(eps: complex) -> float:
    """Normal-incidence power transmittance from air into the medium."""
    n = cmath.sqrt(complex(eps))
    gamma = (1.0 - n) / (1.0 + n)
    return 1.0 - abs(gamma) ** 2


def penetration_depth(tissue: TissueModel, f: float) -> float:
    return power_penetration_depth(tissue.permittivity(f), f)


def transmittance(tissue: TissueModel, f: float) -> float:
    return fresnel_transmittance(tissue.permittivity(f))


def sar_per_unit_pd(tissue: TissueModel, f: float) -> float:
    """SAR produced by 1 W/m^2 of incident power density, in (W/kg)/(W/m^2)."""
    eps = tissue.permittivity(f)
    return fresnel_transmittance(eps) / (tissue.density_kg_m3 * power_penetration_depth(eps, f))


def surface_sar(incident_pd, tissue: TissueModel, f: float):
    pd = np.asarray(incident_pd, dtype=float)
    if np.any(pd < 0):
        raise ValueError("incident power density must be non-negative")
    sar = pd * sar_per_unit_pd(tissue, f)
    return float(sar) if sar.ndim == 0 else sar


@dataclass(frozen=True)
class ExposureReport:
    incident_pd_w_m2: float
    sar_w_kg: float
    per_source: tuple[tuple[str, float], ...]
    pd_limit_fraction: Optional[float] = None
    sar_limit_fraction: Optional[float] = None
    compliant: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "incident_pd_w_m2": self.incident_pd_w_m2,
            "sar_w_kg": self.sar_w_kg,
            "per_source": [[k, v] for k, v in self.per_source],
            "pd_limit_fraction": self.pd_limit_fraction,
            "sar_limit_fraction": self.sar_limit_fraction,
            "compliant": self.compliant,
        }


def compliance(report: ExposureReport, limits: ExposureLimits) -> ExposureReport:
    pd_frac = report.incident_pd_w_m2 / limits.pd_limit_w_m2
    sar_frac = report.sar_w_kg / limits.sar_limit_w_kg
    return replace(
        report,
        pd_limit_fraction=pd_frac,
        sar_limit_fraction=sar_frac,
        compliant=bool(pd_frac <= 1.0 and sar_frac <= 1.0),
    )


def _report(per_source: Sequence[tuple[str, float]], tissue: TissueModel, f: float,
            limits: ExposureLimits) -> ExposureReport:
    per_source = tuple((str(k), float(v)) for k, v in per_source)
    total = math.fsum(v for _, v in per_source)
    return compliance(ExposureReport(total, surface_sar(total, tissue, f), per_source), limits)


def downlink_pd_terms(topology: Topology, beams: Sequence[AntennaPattern], powers, params: RadioParams,
                      ue_index: int) -> np.ndarray:
    """Incident PD at one UE from every BS, in BS order."""
    d = topology.ue_bs_distances(ue_index)
    if np.any(d == 0):
        raise ValueError("undefined azimuth: UE coincides with a BS")
    # bearing BS -> UE is the UE -> BS bearing turned around
    toward_ue = topology.ue_bs_bearings(ue_index) + math.pi
    gains = pattern_gains(beams, toward_ue)
    return incident_power_density(params, np.asarray(powers, dtype=float), gains, d)


def downlink_exposure(topology: Topology, beams: Sequence[AntennaPattern], powers, params: RadioParams,
                      ue_index: int, tissue: TissueModel, limits: ExposureLimits) -> ExposureReport:
    """Exposure at a UE from all BSs, each radiating with its current beam and power."""
    if len(beams) != topology.n_bs or len(powers) != topology.n_bs:
        raise ValueError("need exactly one beam and one power per BS")
    terms = downlink_pd_terms(topology, beams, powers, params, ue_index)
    return _report([(f"bs{i}", pd) for i, pd in enumerate(terms)], tissue, params.carrier_hz, limits)


def uplink_pd(ue_tx_power_w, head_gain, device_head_distance_m: float):
    return np.asarray(ue_tx_power_w) * head_gain / (4.0 * math.pi * device_head_distance_m**2)


def uplink_exposure(ue_tx_power_w: float, ue_pattern: AntennaPattern, head_azimuth: float,
                    device_head_distance_m: float, tissue: TissueModel, f: float,
                    limits: ExposureLimits, source_id: str = "ue") -> ExposureReport:
    """Exposure of the user's head from their own device's uplink beam (far-field approximation)."""
    if not device_head_distance_m > 0:
        raise ValueError("device_head_distance_m must be positive")
    pd = float(uplink_pd(ue_tx_power_w, gain_at(ue_pattern, head_azimuth), device_head_distance_m))
    return _report([(source_id, pd)], tissue, f, limits)
