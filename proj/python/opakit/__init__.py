"""Optimal polynomial approximants in weighted Hardy spaces."""

import json as _json

from ._core import (
    Extension,
    OpaError,
    Series,
    Space,
    detect_stabilization,
    factorial_convert,
    is_reproducible,
    kernel_coefficients,
    optimal_approximant,
    project_unity,
    roman_equivalent,
    sweep,
    taylor_residual,
)
from ._core import run_job as _run_job


def run_job(job, threads=1):
    """Run a job given as a dict or JSON string; returns the rendered output."""
    if not isinstance(job, str):
        job = _json.dumps(job)
    return _run_job(job, threads)


__all__ = [
    "Extension",
    "OpaError",
    "Series",
    "Space",
    "detect_stabilization",
    "factorial_convert",
    "is_reproducible",
    "kernel_coefficients",
    "optimal_approximant",
    "project_unity",
    "roman_equivalent",
    "run_job",
    "sweep",
    "taylor_residual",
]
