"""Fluxonium energy-relaxation modeling and Q_C^eff extraction."""

from ._core import (
    DataError,
    DeviceModel,
    Environment,
    Error,
    FluxoniumParams,
    Mechanism,
    NumericalError,
    ResonatorParams,
    Spectrum,
    T1Mode,
    WelchResult,
    critical_t,
    diagonalize,
    dispersive_shifts,
    extract_qceff,
    flux_dispersion,
    fold_flux,
    pair_rate,
    parse_device_json,
    predicted_t1,
    run_cli,
    t_pdf,
    welch_t_test,
)

__all__ = [
    "DataError",
    "DeviceModel",
    "Environment",
    "Error",
    "FluxoniumParams",
    "Mechanism",
    "NumericalError",
    "ResonatorParams",
    "Spectrum",
    "T1Mode",
    "WelchResult",
    "critical_t",
    "diagonalize",
    "dispersive_shifts",
    "extract_qceff",
    "flux_dispersion",
    "fold_flux",
    "pair_rate",
    "parse_device_json",
    "predicted_t1",
    "run_cli",
    "t_pdf",
    "welch_t_test",
]
