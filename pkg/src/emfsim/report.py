"""Delimited summaries and the JSON run record."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Optional

from .engine import DIRECTIONS, CampaignResult, aggregate

SUMMARY_COLUMNS = (
    "technology", "direction", "trials", "skipped",
    "mean_sar_w_kg", "sar_stderr", "sar_ci_half_width",
    "mean_pd_w_m2", "pd_stderr", "pd_ci_half_width",
    "mean_serving_pd_w_m2", "handovers", "outages", "master_seed",
)
FIGURE1_COLUMNS = ("technology", "direction", "mean_sar_w_kg", "ci_half_width")


def fmt(value) -> str:
    """17 significant digits for floats so text output round-trips exactly."""
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def summary_rows(result: CampaignResult) -> list[tuple]:
    rows = []
    for tech in result.technologies:
        for direction in DIRECTIONS:
            s = result.stats[tech][direction]
            rows.append((
                tech, direction, s.trials, s.skipped,
                s.mean_sar_w_kg, s.sar_stderr, s.sar_ci_half_width,
                s.mean_pd_w_m2, s.pd_stderr, s.pd_ci_half_width,
                s.mean_serving_pd_w_m2, s.handovers, s.outages, result.master_seed,
            ))
    return rows


def figure1_rows(result: CampaignResult) -> list[tuple]:
    return [
        (tech, direction, result.stats[tech][direction].mean_sar_w_kg, result.stats[tech][direction].sar_ci_half_width)
        for tech in result.technologies
        for direction in DIRECTIONS
    ]


def summary_csv(result: CampaignResult) -> str:
    return _csv_text(SUMMARY_COLUMNS, summary_rows(result))


def figure1_csv(result: CampaignResult) -> str:
    return _csv_text(FIGURE1_COLUMNS, figure1_rows(result))


def run_record(result: CampaignResult, resolved_config: Optional[dict] = None, level: str = "summary") -> dict:
    return {
        "resolved_config": resolved_config,
        "master_seed": result.master_seed,
        "trials": result.trials,
        "technologies": list(result.technologies),
        "record_level": level,
        "records": [r.to_dict(level) for r in result.records],
    }


def stats_from_record(record: dict) -> dict:
    """Recompute per-technology statistics from a run record's per-trial summaries."""
    out = {}
    for tech in record["technologies"]:
        rows = [r for r in record["records"] if r["technology"] == tech]
        out[tech] = aggregate(rows, record["trials"])
    return out


def write_outputs(result: CampaignResult, out_dir: str | Path, resolved_config: Optional[dict] = None,
                  level: str = "summary") -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "summary": out / "summary.csv",
        "figure1_data": out / "figure1_data.csv",
        "run_record": out / "run_record.json",
    }
    paths["summary"].write_text(summary_csv(result))
    paths["figure1_data"].write_text(figure1_csv(result))
    with open(paths["run_record"], "w") as fh:
        json.dump(run_record(result, resolved_config, level), fh, allow_nan=False)
    return paths
