"""JSON run reports and CSV tables written by the command-line tools."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .device_model import DeviceParams, Theta
from .optimizer import OptimConfig, RunResult

SCHEMA_VERSION = 1

_NUMBER = {"type": "number"}
_LOSS = {
    "type": "object",
    "required": ["sim", "constr", "total"],
    "properties": {"sim": _NUMBER, "constr": _NUMBER, "total": _NUMBER},
}
_THETA = {
    "anyOf": [
        _NUMBER,
        {"type": "array", "items": _NUMBER, "minItems": 1},
        {"const": "per_pixel"},
    ]
}

#: JSON Schema (draft 2020-12) for ``report.json`` produced by ``nonneg run``
RUN_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "inputs", "result"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "inputs": {
            "type": "object",
            "required": [
                "input_path", "proposal_path", "alpha", "beta", "gamma", "variant", "seed",
            ],
            "properties": {
                "input_path": {"type": "string"},
                "proposal_path": {"type": "string"},
                "alpha": {"type": "number", "minimum": 0, "maximum": 1},
                "beta": {"type": "number", "minimum": 0, "maximum": 1},
                "gamma": {"type": "number", "minimum": 0},
                "variant": {"type": "string"},
                "seed": {"type": "integer"},
                "learning_rate": _NUMBER,
                "max_iters": {"type": "integer"},
            },
        },
        "result": {
            "type": "object",
            "required": [
                "theta1", "theta2", "iterations_run", "converged", "n_psnr_db",
                "violation_fraction", "violation_mean", "violation_max", "final_loss",
                "runtime_ms",
            ],
            "properties": {
                "theta1": _THETA,
                "theta2": _THETA,
                "iterations_run": {"type": "integer", "minimum": 0},
                "converged": {"type": "boolean"},
                "n_psnr_db": {"type": "number", "maximum": 99},
                "violation_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                "violation_mean": {"type": "number", "minimum": 0},
                "violation_max": {"type": "number", "minimum": 0},
                "final_loss": _LOSS,
                "runtime_ms": {"type": "number", "minimum": 0},
                "residual_scale": {"type": ["number", "null"]},
            },
        },
        "trace": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["iter", "sim", "constr", "total"],
                "properties": {
                    "iter": {"type": "integer"}, "sim": _NUMBER, "constr": _NUMBER, "total": _NUMBER,
                },
            },
        },
    },
}


def _theta_field(value, per_pixel: bool):
    if per_pixel:
        return "per_pixel"
    if np.ndim(value) == 0:
        return float(value)
    return [float(v) for v in value]


def run_report(
    result: RunResult,
    input_path,
    proposal_path,
    device: DeviceParams,
    config: OptimConfig,
    trace_every: int | None = 10,
    residual_scale: float | None = None,
) -> dict:
    """Assemble the ``report.json`` document for one run.

    ``trace_every=None`` drops the trace; ``1`` keeps every iteration.
    """
    per_pixel = not isinstance(result.theta_final, Theta)
    theta1 = None if per_pixel else result.theta_final.theta1
    theta2 = None if per_pixel else result.theta_final.theta2
    best = result.final_loss
    v = result.metrics.violations
    report = {
        "schema_version": SCHEMA_VERSION,
        "inputs": {
            "input_path": str(input_path),
            "proposal_path": str(proposal_path),
            "alpha": device.alpha,
            "beta": device.beta,
            "gamma": float(config.gamma),
            "variant": config.variant.value,
            "seed": int(config.seed),
            "learning_rate": float(config.learning_rate),
            "max_iters": int(config.max_iters),
        },
        "result": {
            "theta1": _theta_field(theta1, per_pixel),
            "theta2": _theta_field(theta2, per_pixel),
            "iterations_run": int(result.iterations_run),
            "converged": bool(result.converged),
            "n_psnr_db": float(result.metrics.n_psnr),
            "violation_fraction": v.fraction,
            "violation_mean": v.mean_magnitude,
            "violation_max": v.max_magnitude,
            "final_loss": {"sim": best.sim, "constr": best.constr, "total": best.total},
            "runtime_ms": float(result.runtime_ms),
            "residual_scale": residual_scale,
        },
    }
    if trace_every:
        report["trace"] = [
            {"iter": i, "sim": b.sim, "constr": b.constr, "total": b.total}
            for i, b in enumerate(result.loss_trace)
            if i % trace_every == 0
        ]
    check_finite(report)
    return report


def check_finite(doc) -> None:
    if isinstance(doc, dict):
        for v in doc.values():
            check_finite(v)
    elif isinstance(doc, list):
        for v in doc:
            check_finite(v)
    elif isinstance(doc, float) and not math.isfinite(doc):
        raise ValueError("report contains a non-finite number")


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def write_json(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def validate_report(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` breaks the run-report schema."""
    import jsonschema

    jsonschema.validate(doc, RUN_REPORT_SCHEMA)


def write_csv(path, header, rows) -> None:
    """CSV with '\\n' line endings; floats use their shortest round-trip repr."""
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
