import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from packetlab.errors import AnalysisError, DomainError, PreconditionError
from packetlab.experiments import (
    CavityConfig,
    MachZehnderConfig,
    ScreenIntensity,
    TwoSlitConfig,
    beamsplitter,
    cavity_profile,
    fringe_spacing,
    mach_zehnder_probabilities,
    node_positions,
    path_phase,
    resonance_check,
    single_slit_weight,
    sinc,
    two_laser_intensity,
    two_slit_intensity,
    visibility,
)

LAM, D, A, L = 633e-9, 0.25e-3, 40e-6, 1.0
PERIOD = LAM * L / D


def ref_config(**kw):
    base = dict(wavelength=LAM, slit_separation=D, slit_width=A, screen_distance=L,
                screen_halfwidth=LAM * L / A)
    base.update(kw)
    return TwoSlitConfig(**base)


def test_oracle_period():
    assert PERIOD == pytest.approx(2.532e-3, rel=1e-12)


def test_sinc_near_zero():
    assert sinc(0.0) == 1.0
    u = np.array([1e-6, 5e-5, 2e-4, 1.0])
    assert np.allclose(sinc(u), np.sin(u) / u, rtol=1e-15, atol=0)


def test_both_open_max_at_center_and_first_null():
    inten = two_slit_intensity(ref_config())
    i0 = np.argmin(np.abs(inten.positions))
    assert inten.positions[i0] == 0.0
    assert inten.density[i0] == inten.density.max()
    # evaluate the unnormalized pattern at the first null
    x = PERIOD / 2
    val = single_slit_weight(x, LAM, A, L) * math.cos(math.pi * D * x / (LAM * L)) ** 2
    assert val < 1e-12


def test_maxima_at_multiples_of_period():
    inten = two_slit_intensity(ref_config())
    f, x = inten.density, inten.positions
    idx = [i for i in range(1, f.size - 1) if f[i] > f[i - 1] and f[i] >= f[i + 1]]
    central = sorted(x[idx], key=abs)[:5]
    for xm in central:
        m = round(xm / PERIOD)
        assert abs(xm - m * PERIOD) < 0.02 * PERIOD


def test_normalization_and_positivity():
    for cfg in (ref_config(), ref_config(open_b=False), ref_config(open_a=False)):
        inten = two_slit_intensity(cfg)
        assert inten.integral() == pytest.approx(1.0, abs=1e-9)
        assert np.all(inten.density >= 0)


def test_single_slit_reduction():
    both = two_slit_intensity(ref_config())
    one = two_slit_intensity(ref_config(open_b=False))
    env = single_slit_weight(one.positions, LAM, A, L)
    env = env / np.trapezoid(env, one.positions)
    assert np.max(np.abs(one.density - env)) <= 1e-12 * env.max()
    assert not np.allclose(both.density, one.density)


def test_config_errors():
    with pytest.raises(PreconditionError, match="far-field"):
        ref_config(screen_distance=0.5)
    with pytest.raises(DomainError):
        ref_config(open_a=False, open_b=False)
    with pytest.raises(DomainError):
        ref_config(slit_width=D)
    with pytest.raises(DomainError):
        ref_config(wavelength=-1.0)


def test_fringe_spacing_reference():
    assert fringe_spacing(two_slit_intensity(ref_config())) == pytest.approx(PERIOD, rel=0.02)


def test_fringe_spacing_single_slit_fails():
    with pytest.raises(AnalysisError, match="insufficient fringes"):
        fringe_spacing(two_slit_intensity(ref_config(open_b=False)))


def test_fringe_spacing_halves_with_double_separation():
    a = fringe_spacing(two_slit_intensity(ref_config()))
    cfg2 = ref_config(slit_separation=2 * D, screen_distance=4.0)
    b = fringe_spacing(two_slit_intensity(cfg2))
    # L grew fourfold to stay far-field, so compare against lambda L / d scaling
    assert b / a == pytest.approx((4.0 / (2 * D)) / (1.0 / D), rel=0.02)
    cfg3 = TwoSlitConfig(LAM, D / 2, A / 2, L, LAM * L / A)
    c3 = fringe_spacing(two_slit_intensity(cfg3))
    assert a / c3 == pytest.approx(0.5, rel=0.02)


def _random_config(rng):
    # a/d <= 0.2 keeps >= 10 fringes in the central lobe; wider slits tilt the
    # envelope enough to pull the first-order maxima inward by more than 2%
    lam = rng.uniform(400e-9, 800e-9)
    d = rng.uniform(0.05e-3, 1e-3)
    a = rng.uniform(0.05, 0.2) * d
    dist = rng.uniform(1.0, 3.0) * 10 * d * d / lam
    return TwoSlitConfig(lam, d, a, dist, lam * dist / a)


def test_fringe_spacing_law_random_configs():
    rng = np.random.default_rng(20261019)
    for _ in range(50):
        cfg = _random_config(rng)
        got = fringe_spacing(two_slit_intensity(cfg))
        assert got == pytest.approx(cfg.wavelength * cfg.screen_distance / cfg.slit_separation, rel=0.02)


def test_wide_slits_shift_maxima():
    cfg = TwoSlitConfig(LAM, D, 0.3 * D, L, LAM * L / (0.3 * D))
    got = fringe_spacing(two_slit_intensity(cfg))
    assert got < 0.98 * PERIOD


def test_visibility_cases():
    half = PERIOD / 2
    assert visibility(two_slit_intensity(ref_config()), half) >= 0.99
    assert visibility(two_slit_intensity(ref_config(open_b=False)), half) <= 0.05
    flat = ScreenIntensity.from_unnormalized(np.linspace(-1, 1, 11), np.ones(11))
    assert visibility(flat, 0.5) == 0.0


def test_visibility_errors():
    flat = ScreenIntensity.from_unnormalized(np.linspace(-1, 1, 11), np.ones(11))
    with pytest.raises(DomainError):
        visibility(flat, 2.0)
    zeros = ScreenIntensity(np.linspace(-1, 1, 11), np.r_[np.zeros(5), 1.0, np.zeros(5)])
    with pytest.raises(DomainError, match="zero"):
        visibility(zeros, 0.1, centre=0.7)


@pytest.mark.parametrize("dphi, p1, p2", [(0.0, 1.0, 0.0), (math.pi, 0.0, 1.0)])
def test_mach_zehnder_ports(dphi, p1, p2):
    pr = mach_zehnder_probabilities(MachZehnderConfig(dphi, True))
    assert pr.p1 == pytest.approx(p1, abs=1e-12)
    assert pr.p2 == pytest.approx(p2, abs=1e-12)


def test_mach_zehnder_without_second_splitter():
    pr = mach_zehnder_probabilities(MachZehnderConfig(1.234, False))
    assert (pr.p1, pr.p2) == pytest.approx((0.5, 0.5), abs=1e-12)


def test_mach_zehnder_phase_law():
    grid = np.linspace(0, 2 * math.pi, 101)
    err = max(abs(mach_zehnder_probabilities(MachZehnderConfig(p)).p1 - math.cos(p / 2) ** 2) for p in grid)
    assert err < 1e-12
    flat = [mach_zehnder_probabilities(MachZehnderConfig(p, False)).p1 for p in grid]
    assert max(abs(p - 0.5) for p in flat) < 1e-12


def test_path_phase():
    assert path_phase(LAM / 2, LAM) == pytest.approx(math.pi)


def test_beamsplitter_unitary():
    bs = beamsplitter()
    assert np.allclose(bs.conj().T @ bs, np.eye(2), atol=1e-15)
    rng = np.random.default_rng(1)
    for _ in range(1000):
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert np.sum(np.abs(bs @ a) ** 2) == pytest.approx(np.sum(np.abs(a) ** 2), rel=1e-12)


@given(st.floats(-50, 50), st.booleans())
def test_detector_probabilities_sum_to_one(dphi, second):
    pr = mach_zehnder_probabilities(MachZehnderConfig(dphi, second))
    assert abs(pr.p1 + pr.p2 - 1.0) < 1e-12
    assert 0.0 <= pr.p1 <= 1.0 and 0.0 <= pr.p2 <= 1.0


@pytest.mark.parametrize("length_half_waves, tol, expected", [
    (5.0, 1e-9, (True, 5)),
    (2.6, 1e-3, (False, 3)),
    (5.0 * (1 + 1e-12), 1e-9, (True, 5)),
])
def test_resonance_check(length_half_waves, tol, expected):
    assert resonance_check(length_half_waves * LAM / 2, LAM, tol) == expected


def test_cavity_nodes_and_antinodes():
    cfg = CavityConfig(5 * LAM / 2, LAM)
    prof = cavity_profile(cfg, 1001)
    x, f = prof.positions, prof.density
    peak = f.max()
    step = 1000 // 10  # grid index step of lambda/4
    assert prof.integral() == pytest.approx(1.0, abs=1e-9)
    for n, xn in enumerate(node_positions(cfg)):
        assert x[2 * n * step] == pytest.approx(xn, rel=1e-12, abs=1e-21)
        assert f[2 * n * step] < 1e-12 * peak
    assert f[step] == peak
    assert x[step] == pytest.approx(LAM / 4, rel=1e-12)


def test_cavity_rejects_off_resonance():
    with pytest.raises(DomainError, match="cavity not resonant"):
        cavity_profile(CavityConfig(2.6 * LAM / 2, LAM))
    with pytest.raises(DomainError):
        cavity_profile(CavityConfig(5 * LAM / 2, LAM), grid_points=10)


@pytest.mark.parametrize("modes", [2, 7, 40])
def test_cavity_node_exactness_any_mode(modes):
    cfg = CavityConfig(modes * LAM / 2, LAM)
    points = 2 * modes * 50 + 1
    prof = cavity_profile(cfg, points)
    nodes = prof.density[::100]
    assert nodes.size == modes + 1
    assert np.all(nodes < 1e-12 * prof.density.max())


def _laser(phase, **kw):
    args = dict(wavelength=LAM, effective_slit_separation=D, screen_distance=L,
                screen_halfwidth=5 * PERIOD, relative_phase=phase)
    args.update(kw)
    return two_laser_intensity(**args)


def test_two_laser_phase_shifts_pattern():
    i0 = _laser(0.0)
    centre = np.argmin(np.abs(i0.positions))
    assert i0.density[centre] == pytest.approx(i0.density.max(), rel=1e-12)
    ipi = _laser(math.pi)
    assert ipi.density[centre] < 1e-12 * ipi.density.max()
    assert visibility(i0, PERIOD / 2) >= 0.99


def test_two_laser_average_washes_out():
    n = 1000
    avg = np.mean([_laser(2 * math.pi * k / n, grid_points=2001).density for k in range(n)], axis=0)
    assert np.max(np.abs(avg / avg.mean() - 1.0)) < 1e-3
    mean_pattern = ScreenIntensity.from_unnormalized(_laser(0.0, grid_points=2001).positions, avg)
    assert visibility(mean_pattern, PERIOD / 2) < 0.01


def test_two_laser_far_field_required():
    with pytest.raises(PreconditionError):
        _laser(0.0, screen_distance=0.1)
