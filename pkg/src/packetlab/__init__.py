"""Numerical laboratory for non-spreading wave packets and single-particle interference."""

__version__ = "0.1.0"

from packetlab.errors import AnalysisError, DomainError, PacketLabError, PreconditionError
from packetlab.kinematics import (
    CONSTANTS,
    ELECTRON_MASS,
    KinematicState,
    ParticleState,
    PhysicalConstants,
    WavelengthTriple,
    compton_wavelength,
    four_speed_residual,
    gamma,
    kinematic_state,
    wavelengths,
)

__all__ = [
    "__version__",
    "AnalysisError",
    "DomainError",
    "PacketLabError",
    "PreconditionError",
    "CONSTANTS",
    "ELECTRON_MASS",
    "KinematicState",
    "ParticleState",
    "PhysicalConstants",
    "WavelengthTriple",
    "compton_wavelength",
    "four_speed_residual",
    "gamma",
    "kinematic_state",
    "wavelengths",
]
