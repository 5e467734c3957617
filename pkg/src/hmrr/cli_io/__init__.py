"""Scenario files, canonical formats, run manifests and the ``hmrr`` command line."""

from .cli import (
    cmd_correlate,
    cmd_cotune,
    cmd_fit,
    cmd_modes,
    cmd_purcell,
    cmd_qbudget,
    cmd_simulate,
    cmd_tune,
    main,
)
from .formats import CsvFormatError
from .manifest import RunManifest, file_digest
from .scenario import DEFAULT_SCENARIO, PRESETS, Scenario, ScenarioError, load_scenario, scenario_from_dict

__all__ = [
    "CsvFormatError",
    "DEFAULT_SCENARIO",
    "PRESETS",
    "RunManifest",
    "Scenario",
    "ScenarioError",
    "cmd_correlate",
    "cmd_cotune",
    "cmd_fit",
    "cmd_modes",
    "cmd_purcell",
    "cmd_qbudget",
    "cmd_simulate",
    "cmd_tune",
    "file_digest",
    "load_scenario",
    "main",
    "scenario_from_dict",
]
