"""Material profiles, the smoothing kernel, and DeviceSpec plumbing."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from qdev1d.constants import HBAR2_OVER_2M0
from qdev1d.devices import (MOLLIFIER_SUPPORT, DeviceSpec, PiecewiseProfile,
                            linear_ramp, mollifier, mollify_profile)
from qdev1d.errors import DepthExceeded


def resistor_doping():
    return PiecewiseProfile(length=30.0, breakpoints=(4.5, 25.5),
                            values=(0.1, 0.05, 0.1))


# ---------------------------------------------------------------------------
# piecewise profiles
# ---------------------------------------------------------------------------

def test_profile_region_sampling():
    p = resistor_doping()
    assert p(2.0) == 0.1
    assert p(15.0) == 0.05
    assert p(29.0) == 0.1
    np.testing.assert_allclose(p(np.array([1.0, 10.0, 27.0])),
                               [0.1, 0.05, 0.1])


def test_profile_edge_average_at_breakpoints():
    p = resistor_doping()
    assert p(4.5) == pytest.approx(0.075)
    assert p(25.5) == pytest.approx(0.075)


def test_profile_clamps_outside_domain():
    p = resistor_doping()
    assert p(-3.0) == 0.1
    assert p(55.0) == 0.1


def test_profile_scalar_in_float_out():
    assert isinstance(resistor_doping()(2.0), float)


def test_profile_shifted():
    p = resistor_doping().shifted(1.0)
    assert p(15.0) == pytest.approx(1.05)


@pytest.mark.parametrize("kwargs", [
    dict(length=-1.0, breakpoints=(), values=(1.0,)),
    dict(length=10.0, breakpoints=(5.0,), values=(1.0,)),        # count
    dict(length=10.0, breakpoints=(5.0, 5.0), values=(1, 2, 3)),  # order
    dict(length=10.0, breakpoints=(0.0,), values=(1.0, 2.0)),     # on edge
    dict(length=10.0, breakpoints=(12.0,), values=(1.0, 2.0)),    # outside
])
def test_profile_validation(kwargs):
    with pytest.raises(ValueError):
        PiecewiseProfile(**kwargs)


def test_from_regions_round_trip():
    p = PiecewiseProfile.from_regions(
        [(0.0, 4.5, 0.1), (4.5, 25.5, 0.05), (25.5, 30.0, 0.1)])
    assert p.length == 30.0
    assert p.breakpoints == (4.5, 25.5)
    assert p.values == (0.1, 0.05, 0.1)


@pytest.mark.parametrize("regions", [
    [],
    [(1.0, 5.0, 0.1)],                        # does not start at 0
    [(0.0, 4.0, 0.1), (5.0, 10.0, 0.2)],      # gap
    [(0.0, 4.0, 0.1), (4.0, 9.0, 0.2)],       # wrong total length
])
def test_from_regions_validation(regions):
    with pytest.raises(ValueError):
        PiecewiseProfile.from_regions(regions, length=10.0)


# ---------------------------------------------------------------------------
# smoothing kernel
# ---------------------------------------------------------------------------

def test_mollifier_shape():
    assert mollifier(0.0) == pytest.approx(1.25, rel=1e-14)
    s = np.linspace(-6.0, 6.0, 101)
    w = mollifier(s)
    np.testing.assert_allclose(w, w[::-1], rtol=1e-13)   # even
    assert np.all(w > 0.0)
    assert np.argmax(w) == 50
    assert mollifier(MOLLIFIER_SUPPORT + 2.0) == 0.0     # clipped tail


def test_mollifier_unit_mass():
    mass, err = quad(mollifier, -MOLLIFIER_SUPPORT, MOLLIFIER_SUPPORT,
                     epsabs=1e-14, epsrel=1e-13)
    assert mass == pytest.approx(1.0, abs=1e-12)


def test_mollifier_matches_sech_form():
    s = np.linspace(-2.0, 2.0, 41)
    np.testing.assert_allclose(mollifier(s),
                               1.25 / np.cosh(2.5 * s) ** 2, rtol=1e-12)


def test_mollify_closed_form_vs_quadrature():
    # the PiecewiseProfile fast path must agree with the generic adaptive
    # convolution; wrapping the profile in a lambda forces the generic path
    # (which hits its depth cap on the panels containing the jumps -- the
    # residual there is bounded and covered by the tolerance below)
    p = resistor_doping()
    x = np.linspace(0.0, 30.0, 121)
    fast = mollify_profile(p, x, p.length)
    with pytest.warns(DepthExceeded):
        slow = mollify_profile(lambda xx: p(xx), x, p.length, tol=1e-11)
    np.testing.assert_allclose(fast, slow, atol=5e-10)


def test_mollify_preserves_dose_and_limits():
    p = resistor_doping()
    x = np.linspace(0.0, 30.0, 10001)   # breakpoints land on nodes
    smooth = mollify_profile(p, x, p.length)
    sharp = p(x)
    assert np.trapezoid(smooth, x) == pytest.approx(np.trapezoid(sharp, x),
                                                    rel=5e-4)
    # far from the junctions the profiles agree to kernel-tail accuracy
    assert smooth[0] == pytest.approx(0.1, abs=1e-9)
    assert smooth[5000] == pytest.approx(0.05, abs=1e-9)   # x = 15
    # at a junction the smoothed profile passes through the midpoint
    assert smooth[1500] == pytest.approx(0.075, rel=1e-9)  # x = 4.5


def test_mollify_monotone_across_single_step():
    p = PiecewiseProfile(length=10.0, breakpoints=(5.0,), values=(0.0, 1.0))
    x = np.linspace(2.0, 8.0, 301)
    y = mollify_profile(p, x, p.length)
    assert np.all(np.diff(y) > 0.0)
    assert y[0] == pytest.approx(0.0, abs=1e-6)
    assert y[-1] == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# linear ramp
# ---------------------------------------------------------------------------

def test_linear_ramp_geometry():
    ramp = linear_ramp(135.0, (50.0, 85.0), 0.2)
    assert ramp(10.0) == 0.0
    assert ramp(50.0) == 0.0
    assert ramp(67.5) == pytest.approx(-0.1)
    assert ramp(85.0) == pytest.approx(-0.2)
    assert ramp(130.0) == pytest.approx(-0.2)
    np.testing.assert_allclose(ramp(np.array([0.0, 135.0])), [0.0, -0.2])


@pytest.mark.parametrize("span", [(85.0, 50.0), (-1.0, 50.0), (50.0, 140.0),
                                  (50.0, 50.0)])
def test_linear_ramp_validation(span):
    with pytest.raises(ValueError):
        linear_ramp(135.0, span, 0.1)


# ---------------------------------------------------------------------------
# DeviceSpec
# ---------------------------------------------------------------------------

def sample_device(**overrides):
    kwargs = dict(name="sample", length=30.0, mass_ratio=0.25,
                  relative_permittivity=10.0, fermi_level=0.3,
                  temperature=300.0, doping=resistor_doping())
    kwargs.update(overrides)
    return DeviceSpec(**kwargs)


def test_kinetic_prefactor_known_value():
    # hbar^2 / 2 m0 = 0.0381 eV nm^2 (3.81 eV A^2); m* = 0.25 m0 scales by 4
    assert HBAR2_OVER_2M0 == pytest.approx(0.0381, rel=2e-3)
    dev = sample_device()
    assert dev.kinetic_prefactor == pytest.approx(4.0 * HBAR2_OVER_2M0,
                                                  rel=1e-14)
    assert sample_device(prefactor_override=0.5).kinetic_prefactor == 0.5


@pytest.mark.parametrize("overrides", [
    dict(length=-5.0),
    dict(mass_ratio=0.0),
    dict(relative_permittivity=-1.0),
    dict(temperature=0.0),
    dict(doping=PiecewiseProfile(10.0, (), (0.1,))),     # length mismatch
    dict(barrier=PiecewiseProfile(10.0, (), (0.3,))),    # length mismatch
    dict(prescribed=True),                               # no ramp_span
])
def test_device_validation(overrides):
    with pytest.raises(ValueError):
        sample_device(**overrides)


def test_barrier_on_defaults_to_zero():
    dev = sample_device()
    x = np.linspace(0.0, 30.0, 7)
    np.testing.assert_array_equal(dev.barrier_on(x), np.zeros(7))


def test_barrier_on_smoothing_flag():
    barrier = PiecewiseProfile(length=30.0, breakpoints=(10.0, 20.0),
                               values=(0.0, 0.3, 0.0))
    dev = sample_device(barrier=barrier)              # mollify_barrier False
    x = np.linspace(0.0, 30.0, 301)
    np.testing.assert_array_equal(dev.barrier_on(x), barrier(x))
    smooth = dev.barrier_on(x, smooth=True)
    assert np.max(np.abs(smooth - barrier(x))) > 0.01
    dev2 = sample_device(barrier=barrier, mollify_barrier=True)
    np.testing.assert_allclose(dev2.barrier_on(x), smooth, atol=1e-12)


def test_doping_on_smoothing_default_on():
    dev = sample_device()
    x = np.linspace(0.0, 30.0, 301)
    assert np.max(np.abs(dev.doping_on(x) - dev.doping(x))) > 0.001
    np.testing.assert_array_equal(dev.doping_on(x, smooth=False),
                                  dev.doping(x))


def test_ramp_on_requires_span_and_bias():
    dev = sample_device()
    x = np.linspace(0.0, 30.0, 5)
    np.testing.assert_array_equal(dev.ramp_on(x, 0.1), np.zeros(5))
    dev2 = sample_device(ramp_span=(5.0, 25.0))
    np.testing.assert_array_equal(dev2.ramp_on(x, 0.0), np.zeros(5))
    assert dev2.ramp_on(np.array([30.0]), 0.2)[0] == pytest.approx(-0.2)
