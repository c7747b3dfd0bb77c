"""Regularized non-spreading wave packets.

A packet is a carrier ``exp(i(k s - w t))`` multiplied by a unit-peak
Gaussian envelope in the longitudinal coordinate ``s - u t``, where ``s`` is
the projection of position on the propagation direction and ``u`` the group
speed. The envelope stands in for the point-like delta-function peak; it only
ever translates, so the packet never spreads.

For a massive particle the carrier frequency is ``gamma m0 c^2 / hbar``, which
is the same number as ``(v p + m0 c^2 sqrt(1 - beta^2)) / hbar``; the carrier
wavenumber is ``p / hbar``. A photon packet has ``w = c k`` and ``u = c``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from packetlab.errors import DomainError, PreconditionError
from packetlab.kinematics import CONSTANTS, ParticleState, gamma

#: Default envelope width in carrier wavelengths.
DEFAULT_WIDTH_IN_WAVELENGTHS = 10.0

# Time step of the residual stencil as a fraction of h/c. At exactly 1 the
# central-difference operator is exact for any F(s - ct) and only roundoff
# remains, so no convergence order could be measured.
RESIDUAL_CFL = 0.5

_REL_TOL = 1e-12


class PacketKind(str, enum.Enum):
    MASSIVE = "massive"
    PHOTON = "photon"


@dataclass(frozen=True)
class PacketSpec:
    kind: PacketKind
    carrier_wavenumber: float
    carrier_angular_frequency: float
    group_speed: float
    direction: tuple[float, float, float]
    envelope_width: float
    amplitude_norm: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PacketKind(self.kind))
        object.__setattr__(self, "direction", _unit_direction(self.direction))
        if not (self.envelope_width > 0.0 and math.isfinite(self.envelope_width)):
            raise DomainError(f"envelope_width must be > 0 and finite, got {self.envelope_width!r}")
        if not (self.amplitude_norm > 0.0 and math.isfinite(self.amplitude_norm)):
            raise DomainError(f"amplitude_norm must be > 0, got {self.amplitude_norm!r}")
        c = CONSTANTS.c
        k, w, u = self.carrier_wavenumber, self.carrier_angular_frequency, self.group_speed
        if self.kind is PacketKind.PHOTON:
            if u != c:
                raise DomainError("photon packet must travel at c")
            if not math.isclose(w, c * k, rel_tol=_REL_TOL):
                raise DomainError("photon packet requires angular frequency = c * wavenumber")
        else:
            # phase speed times group speed is c^2 for a massive carrier
            if not (0.0 < u < c):
                raise DomainError("massive packet group speed must lie in (0, c)")
            if not math.isclose(w * u, c * c * k, rel_tol=_REL_TOL):
                raise DomainError("massive packet requires angular frequency * group speed = c^2 * wavenumber")

    @property
    def carrier_wavelength(self) -> float:
        return 2.0 * math.pi / self.carrier_wavenumber


def _unit_direction(direction) -> tuple[float, float, float]:
    n = np.asarray(direction, dtype=float)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise DomainError("direction must be a finite 3-vector")
    norm = float(np.sqrt(n @ n))
    if abs(norm - 1.0) > _REL_TOL:
        raise DomainError(f"direction must be a unit vector, |n| = {norm!r}")
    return (float(n[0]), float(n[1]), float(n[2]))


def make_massive_packet(state: ParticleState, direction=(1.0, 0.0, 0.0),
                        envelope_width: float | None = None) -> PacketSpec:
    """Packet for a massive particle moving along ``direction``.

    ``envelope_width`` defaults to ten de Broglie wavelengths.
    """
    if state.speed == 0.0:
        raise DomainError("massive packet needs speed > 0 (carrier wavenumber vanishes at rest)")
    hbar, c = CONSTANTS.hbar, CONSTANTS.c
    m = gamma(state) * state.rest_mass
    k = m * state.speed / hbar
    if envelope_width is None:
        envelope_width = DEFAULT_WIDTH_IN_WAVELENGTHS * 2.0 * math.pi / k
    elif not (envelope_width > 0.0):
        raise DomainError(f"envelope_width must be > 0, got {envelope_width!r}")
    return PacketSpec(
        kind=PacketKind.MASSIVE,
        carrier_wavenumber=k,
        carrier_angular_frequency=m * c * c / hbar,
        group_speed=state.speed,
        direction=direction,
        envelope_width=envelope_width,
    )


def make_photon_packet(frequency: float, direction=(1.0, 0.0, 0.0),
                       envelope_width: float | None = None) -> PacketSpec:
    if not (frequency > 0.0):
        raise DomainError(f"frequency must be > 0, got {frequency!r}")
    c = CONSTANTS.c
    omega = 2.0 * math.pi * frequency
    k = omega / c
    if envelope_width is None:
        envelope_width = DEFAULT_WIDTH_IN_WAVELENGTHS * c / frequency
    elif not (envelope_width > 0.0):
        raise DomainError(f"envelope_width must be > 0, got {envelope_width!r}")
    return PacketSpec(
        kind=PacketKind.PHOTON,
        carrier_wavenumber=k,
        carrier_angular_frequency=omega,
        group_speed=c,
        direction=direction,
        envelope_width=envelope_width,
    )


def photon_energy(spec: PacketSpec) -> float:
    """Energy ``hbar * w`` carried by the characteristic component."""
    return CONSTANTS.hbar * spec.carrier_angular_frequency


def evaluate(spec: PacketSpec, position, time):
    """Complex packet amplitude at ``position`` (m, shape ``(..., 3)``) and ``time`` (s).

    Broadcasts over leading axes of ``position`` and over ``time``. Returns a
    Python complex for scalar input, an ndarray otherwise.
    """
    r = np.asarray(position, dtype=float)
    t = np.asarray(time, dtype=float)
    s = r @ np.asarray(spec.direction)
    return _profile(spec, s, t)


def _profile(spec: PacketSpec, s, t):
    xi = s - spec.group_speed * t
    sig = spec.envelope_width
    phase = spec.carrier_wavenumber * s - spec.carrier_angular_frequency * t
    out = spec.amplitude_norm * np.exp(1j * phase - 0.5 * (xi / sig) ** 2)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def nonrelativistic_phase_rate(state: ParticleState) -> float:
    """Phase rate ``p^2 / (2 m0 hbar)`` with the Newtonian momentum ``p = m0 v``."""
    p = state.rest_mass * state.speed
    return p * p / (2.0 * state.rest_mass * CONSTANTS.hbar)


@dataclass(frozen=True)
class ResidualReport:
    grid_spacing: float
    residual_norm: float
    convergence_order: float
    residual_norm_half: float


def dalembert_residual(field: Callable, grid_spacing: float, window_halfwidth: float,
                       scale: float, t0: float = 0.0, center: float = 0.0) -> float:
    """Normalized RMS of ``d2B/c2dt2 - d2B/ds2`` for a 1-D field ``field(s, t)``.

    Central second differences in ``s`` (step ``h``) and ``t`` (step
    ``RESIDUAL_CFL * h / c``) over ``|s - center| <= window_halfwidth``. The
    RMS is divided by the RMS of ``|B| / scale**2``; a field that vanishes on
    the whole window returns 0.
    """
    c = CONSTANTS.c
    h = grid_spacing
    dt = RESIDUAL_CFL * h / c
    n = int(math.floor(window_halfwidth / h))
    s = center + h * np.arange(-n, n + 1, dtype=float)
    b0 = np.asarray(field(s, t0), dtype=complex)
    d_tt = (np.asarray(field(s, t0 + dt)) - 2.0 * b0 + np.asarray(field(s, t0 - dt))) / (c * dt) ** 2
    d_ss = (np.asarray(field(s + h, t0)) - 2.0 * b0 + np.asarray(field(s - h, t0))) / h ** 2
    resid = np.sqrt(np.mean(np.abs(d_tt - d_ss) ** 2))
    ref = np.sqrt(np.mean(np.abs(b0) ** 2)) / scale ** 2
    if ref == 0.0:
        return 0.0 if resid == 0.0 else math.inf
    return float(resid / ref)


def _check_grid(spec: PacketSpec, grid_spacing: float):
    sig = spec.envelope_width
    if not (grid_spacing > 0.0):
        raise PreconditionError("grid under-resolves packet: grid_spacing must be > 0")
    if not (grid_spacing < sig / 8.0):
        raise PreconditionError(
            f"grid under-resolves packet: grid_spacing {grid_spacing:.6g} m "
            f"must be < envelope_width/8 = {sig / 8.0:.6g} m")
    lam = spec.carrier_wavelength
    if not (grid_spacing <= lam / 8.0):
        raise PreconditionError(
            f"grid under-resolves packet: grid_spacing {grid_spacing:.6g} m "
            f"must be <= carrier wavelength/8 = {lam / 8.0:.6g} m")


def wave_equation_residual(spec: PacketSpec, grid_spacing: float,
                           window_halfwidth: float | None = None) -> ResidualReport:
    """Finite-difference check that the longitudinal photon profile solves the wave equation.

    Evaluates the normalized residual at ``h`` and ``h/2`` around the packet
    peak at ``t = 0`` and estimates the convergence order as
    ``log2(r(h) / r(h/2))``.
    """
    if spec.kind is not PacketKind.PHOTON:
        raise DomainError("wave-equation residual is defined for the photon profile")
    sig = spec.envelope_width
    if window_halfwidth is None:
        window_halfwidth = 6.0 * sig
    _check_grid(spec, grid_spacing)
    if not (window_halfwidth >= 4.0 * sig):
        raise PreconditionError("window_halfwidth must be >= 4 * envelope_width")

    def field(s, t):
        return _profile(spec, s, t)

    r1 = dalembert_residual(field, grid_spacing, window_halfwidth, sig)
    r2 = dalembert_residual(field, grid_spacing / 2.0, window_halfwidth, sig)
    order = math.log2(r1 / r2) if r1 > 0.0 and r2 > 0.0 else math.nan
    return ResidualReport(grid_spacing, r1, order, r2)


def envelope_width_at(spec: PacketSpec, time: float, grid_spacing: float) -> float:
    """Envelope width parameter recovered from the second moment of ``|B|^2``.

    The intensity of a unit Gaussian envelope with parameter ``sigma`` has RMS
    width ``sigma / sqrt(2)``; the returned value is that RMS times
    ``sqrt(2)``. The grid spans +-10 sigma around the peak at ``time``.
    """
    sig = spec.envelope_width
    if not (0.0 < grid_spacing < sig / 8.0):
        raise PreconditionError(
            f"grid under-resolves packet: grid_spacing must be in (0, envelope_width/8 = {sig / 8.0:.6g} m)")
    n = int(math.ceil(10.0 * sig / grid_spacing))
    offsets = grid_spacing * np.arange(-n, n + 1, dtype=float)
    peak = spec.group_speed * time
    direction = np.asarray(spec.direction)
    positions = (peak + offsets)[:, None] * direction
    weight = np.abs(evaluate(spec, positions, time)) ** 2
    # moments taken on the offset grid, not on the (large) absolute positions
    total = np.trapezoid(weight, offsets)
    mean = np.trapezoid(weight * offsets, offsets) / total
    var = np.trapezoid(weight * (offsets - mean) ** 2, offsets) / total
    return float(math.sqrt(2.0 * var))
