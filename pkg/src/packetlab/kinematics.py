"""Relativistic kinematics of a massive particle.

All quantities are SI. The four-speed picture treats the particle as moving
at ``c`` in an (x, w) plane, with ``w`` the proper-time axis scaled by ``c``;
the momentum-like vector ``mc`` then splits into ``mv`` along x and ``m0 c``
along w. Everything here is a closed-form consequence of that geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from packetlab.errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    c: float
    h: float
    hbar: float


# CODATA 2018 exact definitions; hbar is derived rather than tabulated.
CONSTANTS = PhysicalConstants(
    c=299792458.0,
    h=6.62607015e-34,
    hbar=6.62607015e-34 / (2.0 * math.pi),
)

#: CODATA 2018 electron rest mass, kg.
ELECTRON_MASS = 9.1093837015e-31


@dataclass(frozen=True)
class ParticleState:
    """Rest mass (kg) and speed (m/s) of a massive particle."""

    rest_mass: float
    speed: float

    def __post_init__(self):
        if not (self.rest_mass > 0.0) or not math.isfinite(self.rest_mass):
            raise DomainError(f"rest_mass must be > 0, got {self.rest_mass!r}")
        if not (0.0 <= self.speed < CONSTANTS.c):
            raise DomainError(f"speed outside [0, c): {self.speed!r}")

    @classmethod
    def from_beta(cls, rest_mass: float, beta: float) -> "ParticleState":
        return cls(rest_mass, beta * CONSTANTS.c)

    @property
    def beta(self) -> float:
        return self.speed / CONSTANTS.c


@dataclass(frozen=True)
class KinematicState:
    gamma: float
    relativistic_mass: float
    momentum: float
    total_energy: float
    internal_energy: float
    kinetic_term: float
    direction_angle_cos: float


@dataclass(frozen=True)
class WavelengthTriple:
    compton: float
    transformed_compton: float
    de_broglie: float


def _one_minus_beta_sq(beta: float) -> float:
    # factored form keeps relative accuracy near beta -> 1
    return (1.0 - beta) * (1.0 + beta)


def gamma(state: ParticleState) -> float:
    """Lorentz factor ``1/sqrt(1 - (v/c)^2)``.

    Raises
    ------
    DomainError
        If the speed is outside ``[0, c)``.
    """
    beta = state.speed / CONSTANTS.c
    if not (0.0 <= beta < 1.0):
        raise DomainError(f"speed outside [0, c): {state.speed!r}")
    return 1.0 / math.sqrt(_one_minus_beta_sq(beta))


def kinematic_state(state: ParticleState) -> KinematicState:
    """Energy partition ``m c^2 = m0 c^2 sqrt(1 - v^2/c^2) + m v^2`` and friends."""
    c = CONSTANTS.c
    g = gamma(state)
    m0 = state.rest_mass
    v = state.speed
    m = g * m0
    rest_energy = m0 * c * c
    return KinematicState(
        gamma=g,
        relativistic_mass=m,
        momentum=m * v,
        total_energy=g * rest_energy,
        internal_energy=rest_energy / g,
        kinetic_term=m * v * v,
        direction_angle_cos=v / c,
    )


def compton_wavelength(rest_mass: float) -> float:
    """Return ``h / (m0 c)`` in metres."""
    if not (rest_mass > 0.0):
        raise DomainError(f"rest_mass must be > 0, got {rest_mass!r}")
    return CONSTANTS.h / (rest_mass * CONSTANTS.c)


def wavelengths(state: ParticleState) -> WavelengthTriple:
    """Compton, transformed Compton and de Broglie wavelengths of ``state``.

    The three satisfy ``1/lam**2 == 1/lam_d**2 + 1/lam_0**2``: the
    characteristic wave vector ``mc/hbar`` decomposes into ``mv/hbar`` along
    the motion and ``m0 c/hbar`` along w.
    """
    if state.speed == 0.0:
        raise DomainError("de Broglie wavelength undefined at zero momentum")
    g = gamma(state)
    lam0 = compton_wavelength(state.rest_mass)
    return WavelengthTriple(
        compton=lam0,
        transformed_compton=lam0 / g,
        de_broglie=lam0 / (g * state.beta),
    )


def four_speed_residual(x0: float, y0: float, z0: float, w0: float, t: float) -> float:
    """Relative deviation of an event from the sphere ``c^2 t^2 = |R|^2``.

    Returns ``(x0^2 + y0^2 + z0^2 + w0^2) / (c t)^2 - 1``.
    """
    if not (t > 0.0):
        raise DomainError(f"t must be > 0, got {t!r}")
    ct = CONSTANTS.c * t
    return (x0 * x0 + y0 * y0 + z0 * z0 + w0 * w0) / (ct * ct) - 1.0
