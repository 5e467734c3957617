"""JSON Schemas for every JSON document the CLI writes."""

_NUM = {"type": "number"}
_NUM_OR_NULL = {"type": ["number", "null"]}

QBUDGET = {
    "type": "object",
    "required": ["alpha_int", "alpha_taper", "Q"],
    "properties": {
        "alpha_int": _NUM, "alpha_taper": _NUM, "alpha_excess": _NUM, "alpha_total": _NUM,
        "alpha_power_per_m": _NUM, "wavelength_nm": _NUM, "group_index": _NUM, "Q": _NUM,
    },
    "additionalProperties": False,
}

PURCELL_RECORD = {
    "type": "object",
    "required": ["label", "tau_o_ns", "tau_c_ns", "zpl", "F", "Fp"],
    "properties": {"label": {"type": "string"}, "tau_o_ns": _NUM, "tau_c_ns": _NUM,
                   "zpl": _NUM, "F": _NUM, "Fp": _NUM},
    "additionalProperties": False,
}

PURCELL = {
    "type": "object",
    "required": ["records"],
    "properties": {"records": {"type": "array", "items": PURCELL_RECORD}},
    "additionalProperties": False,
}

TUNE_TARGET = {
    "type": "object",
    "required": ["device_id", "power_mW", "voltage_V", "achieved_nm", "shift_nm"],
    "properties": {"device_id": {"type": "string"}, "power_mW": _NUM, "voltage_V": _NUM,
                   "achieved_nm": _NUM, "shift_nm": _NUM, "target_nm": _NUM},
    "additionalProperties": False,
}

FIT_RESULT = {
    "type": "object",
    "required": ["model_id", "parameters", "standard_errors", "residual_norm", "converged"],
    "properties": {
        "model_id": {"enum": ["lorentzian", "linear", "decay_irf", "g2_comb"]},
        "parameters": {"type": "object", "additionalProperties": _NUM},
        "standard_errors": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "residual_norm": _NUM,
        "iterations": {"type": "integer", "minimum": 0},
        "converged": {"type": "boolean"},
    },
    "additionalProperties": False,
}

HISTOGRAM_SIDECAR = {
    "type": "object",
    "required": ["normalization_constant", "g2_zero", "side_peak_areas"],
    "properties": {
        "normalized": {"type": "boolean"},
        "normalization_constant": _NUM_OR_NULL,
        "g2_zero": _NUM_OR_NULL,
        "side_peak_areas": {"type": "array", "items": _NUM},
        "bin_width_ps": _NUM,
        "window_ps": _NUM,
    },
    "additionalProperties": False,
}

MANIFEST = {
    "type": "object",
    "required": ["tool_version", "scenario_hash", "seed", "command", "outputs"],
    "properties": {
        "tool_version": {"type": "string"},
        "scenario_hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "seed": {"type": "integer", "minimum": 0},
        "command": {"type": "array", "items": {"type": "string"}},
        "outputs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["file", "sha256"],
                "properties": {"file": {"type": "string"},
                               "sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"}},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

REPORT = {
    "type": "object",
    "required": ["figures", "passed", "checks"],
    "properties": {
        "figures": {"type": "array", "items": {"type": "string"}},
        "passed": {"type": "boolean"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "criterion", "description", "value", "expected", "passed"],
                "properties": {
                    "id": {"type": "string"},
                    "criterion": {"type": "integer", "minimum": 1},
                    "figure": {"type": "string"},
                    "description": {"type": "string"},
                    "anchor": {"type": "string"},
                    "value": {},
                    "expected": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "seconds": _NUM,
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

SCHEMAS = {
    "qbudget": QBUDGET,
    "purcell": PURCELL,
    "tune": TUNE_TARGET,
    "fit": FIT_RESULT,
    "histogram": HISTOGRAM_SIDECAR,
    "manifest": MANIFEST,
    "report": REPORT,
}
