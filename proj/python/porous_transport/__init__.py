"""Finite-element solver for coupled moisture, solute and heat transport.

The heavy lifting lives in the compiled extension; this package re-exports
the binding surface and adds one convenience wrapper for the common
"run a config file" path.
"""

from ._core import (
    Coefficient,
    CoefficientSet,
    ConfigError,
    Mesh,
    RunSummary,
    Scenario,
    ValidationClause,
    ValidationReport,
    load_mesh,
    load_scenario,
    make_coefficients,
    mms_cases,
    mms_error,
    oracle_deviation,
    rect_mesh,
    run,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Coefficient",
    "CoefficientSet",
    "ConfigError",
    "Mesh",
    "RunSummary",
    "Scenario",
    "ValidationClause",
    "ValidationReport",
    "load_mesh",
    "load_scenario",
    "make_coefficients",
    "mms_cases",
    "mms_error",
    "oracle_deviation",
    "rect_mesh",
    "run",
    "run_config",
    "validate",
]


def run_config(path, keep_trajectory=False):
    """Build the scenario described by a config file and run it."""
    return run(load_scenario(str(path)), keep_trajectory)
