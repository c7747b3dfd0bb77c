"""Analytic predictors for the interference setups.

Every pattern is the squared modulus of a coherent sum of complex amplitudes,
normalized to a probability density (screens) or to outcome probabilities
(detectors). Two-slit and two-laser patterns are far-field (Fraunhofer) only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from packetlab.errors import AnalysisError, DomainError, PreconditionError

#: Screen grid size used when a caller does not ask for one.
DEFAULT_GRID_POINTS = 8001

# L >= FRAUNHOFER_FACTOR * d^2 / lambda
FRAUNHOFER_FACTOR = 10.0

_SINC_SERIES_BELOW = 1e-4


@dataclass(frozen=True)
class ScreenIntensity:
    """Normalized arrival density sampled on a uniform grid (positions in m, density in 1/m)."""

    positions: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float)
        f = np.asarray(self.density, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise DomainError("positions and density must be 1-D arrays of equal length >= 2")
        if np.any(np.diff(x) <= 0.0):
            raise DomainError("positions must be strictly increasing")
        if np.any(f < 0.0) or not np.all(np.isfinite(f)):
            raise DomainError("density must be finite and non-negative")
        x.flags.writeable = False
        f.flags.writeable = False
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "density", f)

    @classmethod
    def from_unnormalized(cls, positions, weights) -> "ScreenIntensity":
        x = np.asarray(positions, dtype=float)
        w = np.asarray(weights, dtype=float)
        area = np.trapezoid(w, x)
        if not (area > 0.0):
            raise DomainError("intensity vanishes on the whole screen")
        return cls(x, w / area)

    @property
    def spacing(self) -> float:
        return float(self.positions[1] - self.positions[0])

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.positions))


@dataclass(frozen=True)
class TwoSlitConfig:
    wavelength: float
    slit_separation: float
    slit_width: float
    screen_distance: float
    screen_halfwidth: float
    open_a: bool = True
    open_b: bool = True

    def __post_init__(self):
        for name in ("wavelength", "slit_separation", "slit_width", "screen_distance", "screen_halfwidth"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be > 0, got {value!r}")
        if not (self.slit_width < self.slit_separation):
            raise DomainError("slit_width must be < slit_separation")
        if not (self.open_a or self.open_b):
            raise DomainError("at least one slit must be open")
        _check_fraunhofer(self.wavelength, self.slit_separation, self.screen_distance)


def _check_fraunhofer(wavelength, separation, distance):
    limit = FRAUNHOFER_FACTOR * separation ** 2 / wavelength
    # tolerate rounding in limit itself
    if distance < limit * (1.0 - 1e-12):
        raise PreconditionError(
            f"far-field approximation invalid: screen_distance {distance:.6g} m "
            f"< {FRAUNHOFER_FACTOR:g} * d^2 / wavelength = {limit:.6g} m")


def sinc(u):
    """``sin(u)/u`` with a series branch near the origin."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SINC_SERIES_BELOW
    safe = np.where(small, 1.0, u)
    u2 = u * u
    return np.where(small, 1.0 - u2 / 6.0 + u2 * u2 / 120.0, np.sin(safe) / safe)


def screen_grid(halfwidth: float, grid_points: int) -> np.ndarray:
    if grid_points < 3 or grid_points % 2 == 0:
        raise DomainError("grid_points must be odd and >= 3 so that x = 0 is a grid point")
    return np.linspace(-halfwidth, halfwidth, grid_points)


def single_slit_weight(x, wavelength, slit_width, screen_distance):
    return sinc(math.pi * slit_width * np.asarray(x) / (wavelength * screen_distance)) ** 2


def two_slit_intensity(config: TwoSlitConfig, grid_points: int = DEFAULT_GRID_POINTS) -> ScreenIntensity:
    """Far-field pattern ``sinc^2(pi a x / lam L) cos^2(pi d x / lam L)``.

    With one slit closed the cosine factor is dropped and the single-slit
    diffraction envelope remains.
    """
    x = screen_grid(config.screen_halfwidth, grid_points)
    lam_l = config.wavelength * config.screen_distance
    weight = single_slit_weight(x, config.wavelength, config.slit_width, config.screen_distance)
    if config.open_a and config.open_b:
        weight = weight * np.cos(math.pi * config.slit_separation * x / lam_l) ** 2
    return ScreenIntensity.from_unnormalized(x, weight)


def _local_maxima(intensity: ScreenIntensity, threshold_rel: float = 1e-6) -> np.ndarray:
    """Sub-grid positions of local maxima above ``threshold_rel * peak`` (parabolic refinement)."""
    f = intensity.density
    x = intensity.positions
    h = intensity.spacing
    inner = np.arange(1, f.size - 1)
    is_max = (f[inner] > f[inner - 1]) & (f[inner] >= f[inner + 1])
    is_max &= f[inner] > threshold_rel * f.max()
    idx = inner[is_max]
    fl, fc, fr = f[idx - 1], f[idx], f[idx + 1]
    denom = fl - 2.0 * fc + fr
    shift = np.where(denom != 0.0, 0.5 * (fl - fr) / np.where(denom != 0.0, denom, 1.0), 0.0)
    return x[idx] + shift * h


def fringe_spacing(intensity: ScreenIntensity, max_fringes: int = 5) -> float:
    """Mean spacing of the local maxima nearest the screen centre."""
    peaks = _local_maxima(intensity)
    if peaks.size < 3:
        raise AnalysisError(f"insufficient fringes in window: found {peaks.size} maxima, need >= 3")
    centre = 0.5 * (intensity.positions[0] + intensity.positions[-1])
    nearest = np.sort(peaks[np.argsort(np.abs(peaks - centre), kind="stable")[:max_fringes]])
    return float((nearest[-1] - nearest[0]) / (nearest.size - 1))


def visibility(intensity: ScreenIntensity, window_halfwidth: float, centre: float = 0.0) -> float:
    """Fringe visibility ``(Imax - Imin) / (Imax + Imin)`` over ``|x - centre| <= window_halfwidth``."""
    x = intensity.positions
    lo, hi = centre - window_halfwidth, centre + window_halfwidth
    if lo < x[0] - 1e-12 * abs(x[0]) or hi > x[-1] + 1e-12 * abs(x[-1]):
        raise DomainError("visibility window must lie inside the screen")
    # window edges that fall on grid nodes count as inside
    slack = 1e-6 * intensity.spacing
    inside = (x >= lo - slack) & (x <= hi + slack)
    f = intensity.density[inside]
    if f.size == 0 or f.max() == 0.0:
        raise DomainError("visibility undefined: window density is identically zero")
    return float((f.max() - f.min()) / (f.max() + f.min()))


@dataclass(frozen=True)
class MachZehnderConfig:
    phase_difference: float
    second_beamsplitter_present: bool = True


@dataclass(frozen=True)
class DetectorProbabilities:
    p1: float
    p2: float


def beamsplitter() -> np.ndarray:
    """Symmetric lossless 50/50 splitter: transmission ``1/sqrt2``, reflection ``i/sqrt2``."""
    return np.array([[1.0, 1.0j], [1.0j, 1.0]]) / math.sqrt(2.0)


def mach_zehnder_amplitudes(config: MachZehnderConfig) -> np.ndarray:
    """Output amplitudes ``(to detector 1, to detector 2)`` for a photon entering port 0.

    The arm phase is applied to the reflected arm. Detector 1 watches the
    port that is bright at zero path difference.
    """
    bs = beamsplitter()
    arms = bs @ np.array([1.0 + 0.0j, 0.0j])
    if not config.second_beamsplitter_present:
        return np.array([arms[0], arms[1]])
    arms = arms * np.array([1.0, np.exp(1j * config.phase_difference)])
    out = bs @ arms
    return np.array([out[1], out[0]])


def mach_zehnder_probabilities(config: MachZehnderConfig) -> DetectorProbabilities:
    """Detector statistics; ``p1 = cos^2(dphi/2)`` with the second splitter, 1/2 without."""
    if not math.isfinite(config.phase_difference):
        raise DomainError("phase_difference must be finite")
    amp = mach_zehnder_amplitudes(config)
    prob = np.abs(amp) ** 2
    prob = prob / prob.sum()
    return DetectorProbabilities(float(prob[0]), float(prob[1]))


def path_phase(path_difference: float, wavelength: float) -> float:
    """Arm phase difference ``2 pi dL / lambda``."""
    return 2.0 * math.pi * path_difference / wavelength


@dataclass(frozen=True)
class CavityConfig:
    cavity_length: float
    wavelength: float

    def __post_init__(self):
        for name in ("cavity_length", "wavelength"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be > 0, got {value!r}")
        if not (self.cavity_length > self.wavelength / 2.0):
            raise DomainError("cavity_length must exceed wavelength/2")


def resonance_check(cavity_length: float, wavelength: float, tolerance: float = 1e-9) -> tuple[bool, int]:
    """Whether ``L`` is within ``tolerance * lambda/2`` of a whole number of half-wavelengths.

    Returns the flag and the nearest mode number ``n >= 1``.
    """
    if not (cavity_length > 0.0 and wavelength > 0.0):
        raise DomainError("cavity_length and wavelength must be > 0")
    half = wavelength / 2.0
    n = max(1, int(round(cavity_length / half)))
    return abs(cavity_length - n * half) <= tolerance * half, n


def cavity_profile(config: CavityConfig, grid_points: int = 1001,
                   tolerance: float = 1e-9) -> ScreenIntensity:
    """Standing-wave density ``sin^2(2 pi x / lambda)`` on ``[0, L]``.

    Nodes sit at every multiple of ``lambda/2``. Choosing ``grid_points - 1``
    as a multiple of twice the mode number puts every node and antinode on
    the grid.
    """
    if grid_points < 64:
        raise DomainError("grid_points must be >= 64")
    ok, n = resonance_check(config.cavity_length, config.wavelength, tolerance)
    if not ok:
        raise DomainError(
            f"cavity not resonant: L = {config.cavity_length:.9g} m is "
            f"{2.0 * config.cavity_length / config.wavelength:.6g} half-wavelengths (nearest {n})")
    x = np.linspace(0.0, config.cavity_length, grid_points)
    return ScreenIntensity.from_unnormalized(x, cavity_weight(x, config.wavelength))


def cavity_weight(x, wavelength):
    return np.sin(2.0 * math.pi * np.asarray(x) / wavelength) ** 2


def node_positions(config: CavityConfig) -> np.ndarray:
    n_max = int(math.floor(2.0 * config.cavity_length / config.wavelength * (1.0 + 1e-12)))
    return 0.5 * config.wavelength * np.arange(0, n_max + 1)


def two_laser_intensity(wavelength: float, effective_slit_separation: float, screen_distance: float,
                        screen_halfwidth: float, relative_phase: float,
                        grid_points: int = DEFAULT_GRID_POINTS) -> ScreenIntensity:
    """Single-shot pattern of two independent sources at fixed relative phase.

    ``cos^2(pi d x / lam L + phi/2)``; the fringes slide with the phase.
    """
    for name, value in (("wavelength", wavelength), ("effective_slit_separation", effective_slit_separation),
                        ("screen_distance", screen_distance), ("screen_halfwidth", screen_halfwidth)):
        if not (value > 0.0 and math.isfinite(value)):
            raise DomainError(f"{name} must be > 0, got {value!r}")
    if not math.isfinite(relative_phase):
        raise DomainError("relative_phase must be finite")
    _check_fraunhofer(wavelength, effective_slit_separation, screen_distance)
    x = screen_grid(screen_halfwidth, grid_points)
    arg = math.pi * effective_slit_separation * x / (wavelength * screen_distance) + 0.5 * relative_phase
    return ScreenIntensity.from_unnormalized(x, np.cos(arg) ** 2)
