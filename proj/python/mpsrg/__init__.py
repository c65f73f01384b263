"""Compile matrix product states into log-depth circuits."""

from ._core import (
    MpsrgError,
    aklt,
    aklt_spin1,
    cnot_depth,
    compile_circuit,
    error_scan,
    g_family,
    g_for_xi,
    ghz,
    mps_state,
    run_cli,
    simulate,
    spectral_analyze,
    t_iso,
)

__all__ = [
    "MpsrgError",
    "aklt",
    "aklt_spin1",
    "cnot_depth",
    "compile_circuit",
    "error_scan",
    "g_family",
    "g_for_xi",
    "ghz",
    "mps_state",
    "run_cli",
    "simulate",
    "spectral_analyze",
    "t_iso",
]
