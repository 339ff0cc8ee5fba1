"""Test cases, error norms, output writers, configuration and the command line."""
from .cases import CASE_NAMES, CaseDefinition, make_case
from .config import ConfigError, RunConfig, parse_config, parse_config_text
from .norms import ErrorReport, error_norms, format_csv, rate_table
from .runner import build_problem, convergence_study, run_case
from .vtk import read_vtk, write_fields

__all__ = [
    "CASE_NAMES", "CaseDefinition", "ConfigError", "ErrorReport", "RunConfig", "build_problem",
    "convergence_study", "error_norms", "format_csv", "make_case", "parse_config",
    "parse_config_text", "rate_table", "read_vtk", "run_case", "write_fields",
]
