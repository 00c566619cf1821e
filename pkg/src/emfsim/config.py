"""Run configuration: strict JSON parsing, defaults, and the resolved-config echo."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .dosimetry import DEFAULT_DENSITY_KG_M3, DEFAULT_HEAD_DISTANCE_M, ExposureLimits, load_tissue_table
from .engine import SimulationSettings
from .profiles import PRESETS, PROFILE_KEYS, TechnologyProfile, build_profile
from .protocol import EMISSION_METRICS

RECORD_LEVELS = ("summary", "decisions", "full")
DEFAULT_SCENARIOS = ("5G", "4G", "3.9G")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DeploymentSettings:
    mode: str = "ppp"
    window_cells: float = 10.0
    window_m: Optional[tuple[float, float]] = None
    ue_count: int = 10
    min_ue_bs_distance_m: float = 10.0


@dataclass(frozen=True)
class ProtocolSettings:
    emission_metric: str = "sar"
    hysteresis_w_kg: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    scenarios: tuple[TechnologyProfile, ...]
    trials: int = 1000
    master_seed: int = 0
    deployment: DeploymentSettings = field(default_factory=DeploymentSettings)
    tissue_table: Optional[str] = None
    tissue_density_kg_m3: float = DEFAULT_DENSITY_KG_M3
    device_head_distance_m: float = DEFAULT_HEAD_DISTANCE_M
    limits: ExposureLimits = field(default_factory=ExposureLimits)
    protocol: ProtocolSettings = field(default_factory=ProtocolSettings)
    output_dir: str = "results"
    parallelism: int = 1
    record_level: str = "summary"
    figures: bool = True

    def settings(self) -> SimulationSettings:
        d = self.deployment
        return SimulationSettings(
            tissue=load_tissue_table(self.tissue_table, self.tissue_density_kg_m3),
            limits=self.limits,
            mode=d.mode,
            window_cells=d.window_cells,
            window_m=d.window_m,
            ue_count=d.ue_count,
            min_ue_bs_distance_m=d.min_ue_bs_distance_m,
            head_distance_m=self.device_head_distance_m,
            emission_metric=self.protocol.emission_metric,
            hysteresis_w_kg=self.protocol.hysteresis_w_kg,
        )

    def scenario(self, name: str) -> TechnologyProfile:
        for p in self.scenarios:
            if p.name == name:
                return p
        raise ConfigError(f"scenario {name!r} not in config; available: {[p.name for p in self.scenarios]}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenarios": [p.to_dict() for p in self.scenarios],
            "trials": self.trials,
            "master_seed": self.master_seed,
            "deployment": {
                "mode": self.deployment.mode,
                "window_cells": self.deployment.window_cells,
                "window_m": list(self.deployment.window_m) if self.deployment.window_m else None,
                "ue_count": self.deployment.ue_count,
                "min_ue_bs_distance_m": self.deployment.min_ue_bs_distance_m,
            },
            "tissue_table": self.tissue_table,
            "tissue_density_kg_m3": self.tissue_density_kg_m3,
            "device_head_distance_m": self.device_head_distance_m,
            "limits": {
                "pd_limit_w_m2": self.limits.pd_limit_w_m2,
                "sar_limit_w_kg": self.limits.sar_limit_w_kg,
                "sar_trigger_w_kg": self.limits.sar_trigger_w_kg,
            },
            "protocol": {
                "emission_metric": self.protocol.emission_metric,
                "hysteresis_w_kg": self.protocol.hysteresis_w_kg,
            },
            "output_dir": self.output_dir,
            "parallelism": self.parallelism,
            "record_level": self.record_level,
            "figures": self.figures,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


_TOP_KEYS = {
    "scenarios", "trials", "master_seed", "deployment", "tissue_table", "tissue_density_kg_m3",
    "device_head_distance_m", "limits", "protocol", "output_dir", "parallelism", "record_level", "figures",
}
_DEPLOYMENT_KEYS = {"mode", "window_cells", "window_m", "ue_count", "min_ue_bs_distance_m"}
_LIMIT_KEYS = {"pd_limit_w_m2", "sar_limit_w_kg", "sar_trigger_w_kg"}
_PROTOCOL_KEYS = {"emission_metric", "hysteresis_w_kg"}
_INT_PROFILE_KEYS = {"bs_elements", "ue_elements"}


def _check_keys(obj: Any, allowed: set[str], where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(repr(k) for k in unknown)}")
    return obj


def _int(value: Any, where: str, lo: int, hi: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if value < lo or (hi is not None and value > hi):
        bound = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
        raise ConfigError(f"{where}: must be {bound}, got {value}")
    return value


def _num(value: Any, where: str, positive: bool = True, allow_zero: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if positive and not (value > 0 or (allow_zero and value == 0)):
        raise ConfigError(f"{where}: must be {'non-negative' if allow_zero else 'positive'}, got {value}")
    return value


def _choice(value: Any, where: str, options) -> str:
    if value not in options:
        raise ConfigError(f"{where}: must be one of {list(options)}, got {value!r}")
    return value


def _scenario(entry: Any, where: str) -> TechnologyProfile:
    if isinstance(entry, str):
        if entry not in PRESETS:
            raise ConfigError(f"{where}: unknown technology {entry!r}; valid names: {', '.join(PRESETS)}")
        return build_profile(entry)
    obj = _check_keys(entry, set(PROFILE_KEYS) | {"name", "base"}, where)
    if "name" not in obj or not isinstance(obj["name"], str):
        raise ConfigError(f"{where}.name: required string")
    base = obj.get("base", obj["name"])
    if base not in PRESETS:
        raise ConfigError(f"{where}.base: unknown technology {base!r}; valid names: {', '.join(PRESETS)}")
    overrides = {}
    for k, v in obj.items():
        if k in ("name", "base"):
            continue
        if k in _INT_PROFILE_KEYS:
            overrides[k] = _int(v, f"{where}.{k}", 1)
        elif v is None:
            continue
        else:
            overrides[k] = _num(v, f"{where}.{k}", positive=False)
    try:
        return build_profile(base, obj["name"], **overrides)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration, filling documented defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    raw = _check_keys(raw, _TOP_KEYS, "config")
    kw: dict[str, Any] = {}

    scen = raw.get("scenarios", list(DEFAULT_SCENARIOS))
    if not isinstance(scen, list) or not scen:
        raise ConfigError("config.scenarios: expected a non-empty list")
    profiles = tuple(_scenario(e, f"config.scenarios[{i}]") for i, e in enumerate(scen))
    names = [p.name for p in profiles]
    if len(set(names)) != len(names):
        raise ConfigError(f"config.scenarios: duplicate scenario names {names}")
    kw["scenarios"] = profiles

    if "trials" in raw:
        kw["trials"] = _int(raw["trials"], "config.trials", 1)
    if "master_seed" in raw:
        kw["master_seed"] = _int(raw["master_seed"], "config.master_seed", 0, 2**64 - 1)
    if "parallelism" in raw:
        kw["parallelism"] = _int(raw["parallelism"], "config.parallelism", 1)
    if "record_level" in raw:
        kw["record_level"] = _choice(raw["record_level"], "config.record_level", RECORD_LEVELS)
    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str) or not raw["output_dir"]:
            raise ConfigError("config.output_dir: expected a non-empty string")
        kw["output_dir"] = raw["output_dir"]
    if "figures" in raw:
        if not isinstance(raw["figures"], bool):
            raise ConfigError("config.figures: expected true or false")
        kw["figures"] = raw["figures"]
    if raw.get("tissue_table") is not None:
        if not isinstance(raw["tissue_table"], str):
            raise ConfigError("config.tissue_table: expected a path string or null")
        kw["tissue_table"] = raw["tissue_table"]
    if "tissue_density_kg_m3" in raw:
        kw["tissue_density_kg_m3"] = _num(raw["tissue_density_kg_m3"], "config.tissue_density_kg_m3")
    if "device_head_distance_m" in raw:
        kw["device_head_distance_m"] = _num(raw["device_head_distance_m"], "config.device_head_distance_m")

    if "deployment" in raw:
        d = _check_keys(raw["deployment"], _DEPLOYMENT_KEYS, "config.deployment")
        dep = {}
        if "mode" in d:
            dep["mode"] = _choice(d["mode"], "config.deployment.mode", ("ppp", "grid"))
        if "window_cells" in d:
            dep["window_cells"] = _num(d["window_cells"], "config.deployment.window_cells")
        if d.get("window_m") is not None:
            w = d["window_m"]
            if not isinstance(w, list) or len(w) != 2:
                raise ConfigError("config.deployment.window_m: expected [width, height] in meters")
            dep["window_m"] = tuple(_num(x, f"config.deployment.window_m[{i}]") for i, x in enumerate(w))
        if "ue_count" in d:
            dep["ue_count"] = _int(d["ue_count"], "config.deployment.ue_count", 1)
        if "min_ue_bs_distance_m" in d:
            dep["min_ue_bs_distance_m"] = _num(d["min_ue_bs_distance_m"], "config.deployment.min_ue_bs_distance_m",
                                               allow_zero=True)
        kw["deployment"] = DeploymentSettings(**dep)

    if "limits" in raw:
        lim = _check_keys(raw["limits"], _LIMIT_KEYS, "config.limits")
        vals = {k: _num(v, f"config.limits.{k}") for k, v in lim.items()}
        try:
            kw["limits"] = ExposureLimits(**vals)
        except ValueError as exc:
            raise ConfigError(f"config.limits: {exc}") from None

    if "protocol" in raw:
        pr = _check_keys(raw["protocol"], _PROTOCOL_KEYS, "config.protocol")
        ps = {}
        if "emission_metric" in pr:
            ps["emission_metric"] = _choice(pr["emission_metric"], "config.protocol.emission_metric", EMISSION_METRICS)
        if "hysteresis_w_kg" in pr:
            ps["hysteresis_w_kg"] = _num(pr["hysteresis_w_kg"], "config.protocol.hysteresis_w_kg", allow_zero=True)
        kw["protocol"] = ProtocolSettings(**ps)

    return RunConfig(**kw)


def apply_overrides(config: RunConfig, *, scenarios=None, trials=None, seed=None, out=None,
                    parallelism=None, record_level=None) -> RunConfig:
    """Command-line flags take precedence over the config file."""
    kw: dict[str, Any] = {}
    if scenarios:
        picked = []
        for name in scenarios:
            match = [p for p in config.scenarios if p.name == name]
            if match:
                picked.append(match[0])
            elif name in PRESETS:
                picked.append(build_profile(name))
            else:
                raise ConfigError(f"--scenario: unknown technology {name!r}; valid names: {', '.join(PRESETS)}")
        kw["scenarios"] = tuple(picked)
    if trials is not None:
        kw["trials"] = _int(trials, "--trials", 1)
    if seed is not None:
        kw["master_seed"] = _int(seed, "--seed", 0, 2**64 - 1)
    if out is not None:
        kw["output_dir"] = out
    if parallelism is not None:
        kw["parallelism"] = _int(parallelism, "--parallelism", 1)
    if record_level is not None:
        kw["record_level"] = _choice(record_level, "--record-level", RECORD_LEVELS)
    return replace(config, **kw)
