"""Human EMF exposure in cellular uplink and downlink: simulation and exposure-aware association."""

from .dosimetry import ExposureLimits, ExposureReport, TissueModel, load_tissue_table
from .engine import CampaignResult, SimulationSettings, compare, run_campaign, run_trial
from .profiles import TechnologyProfile, build_profile, preset
from .radio import AntennaPattern, RadioParams
from .topology import DeploymentConfig, Point2D, Topology, sample_topology

__version__ = "0.1.0"
