"""Trapped-ion spin-motion dynamics in a running optical lattice.

Thin Python layer over the C++ core. All quantities are SI with angular
frequencies in rad/s; use :func:`khz` / :func:`to_khz` for ordinary kHz.
"""

import math

from ._core import (
    ConfigurationError,
    DomainError,
    PhysicalConfig,
    __version__,
    branch_detuning,
    carrier_light_shift,
    echo_config,
    effective_lamb_dicke,
    effective_sideband_probe,
    fit_damped_sinusoid,
    fit_thermal_rabi,
    lamb_dicke,
    predicted_rabi,
    predicted_rabi_curve,
    rabi_trace,
    resonant_detuning,
    run,
    sideband_asymmetry_thermometry,
    sideband_cooling,
    sideband_spectrum,
    thermal_distribution,
    thermal_rabi_model,
)


def khz(value):
    """Ordinary kHz to rad/s."""
    return 2.0 * math.pi * 1e3 * value


def to_khz(value):
    """rad/s to ordinary kHz."""
    return value / (2.0 * math.pi * 1e3)


__all__ = [name for name in dir() if not name.startswith("_")]
