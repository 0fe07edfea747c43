"""Slot-level NR sidelink simulator for cooperating AGV groups."""

from ._agvsl import (
    CSV_HEADER,
    ConfigError,
    KpiRecord,
    ScenarioConfig,
    cli,
    parse_csv,
    run,
    run_id,
    to_csv,
)

__all__ = [
    "CSV_HEADER",
    "ConfigError",
    "KpiRecord",
    "ScenarioConfig",
    "cli",
    "parse_csv",
    "run",
    "run_id",
    "to_csv",
]
