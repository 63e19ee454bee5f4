"""Presets, measurement harnesses, and the convergence-study driver."""

import math

import numpy as np
import pytest

from qdev1d.errors import UnknownPreset
from qdev1d.experiments import (DEFAULT_BIAS_SWEEPS, PRESET_ALIASES,
                                PRESET_NAMES, build_preset, convergence_study,
                                list_presets, oscillation_metric, per_cm3,
                                transmission_curve, worker_count)
from qdev1d.numerics import Grid
from qdev1d.schrodinger import (SchrodingerContext, TbcScheme,
                                solve_scattering)
from qdev1d.selfconsistent import SelfConsistentConfig


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def test_preset_names_and_default_sweeps_agree():
    assert PRESET_NAMES == ("free_particle", "resistor", "rtd_a", "rtd_b")
    assert list_presets() == list(PRESET_NAMES)
    assert set(DEFAULT_BIAS_SWEEPS) == set(PRESET_NAMES)


def test_resistor_parameters():
    dev = build_preset("resistor")
    assert dev.length == 30.0
    assert dev.mass_ratio == 0.25
    assert dev.relative_permittivity == 10.0
    assert dev.fermi_level == 0.318
    assert dev.temperature == 300.0
    assert dev.default_n_cells == 100
    assert dev.doping.breakpoints == (4.5, 25.5)
    assert dev.doping.values == (0.1, 0.05, 0.1)      # 1e20/5e19/1e20 cm^-3
    assert dev.barrier is None
    assert not dev.prescribed
    assert not dev.mollify_doping


def test_rtd_parameters():
    a = build_preset("rtd_a")
    b = build_preset("rtd_b")
    for dev in (a, b):
        assert dev.length == 135.0
        assert dev.mass_ratio == 0.067
        assert dev.relative_permittivity == 11.44
        assert dev.fermi_level == 0.0427
        assert dev.default_n_cells == 270
        assert dev.barrier.breakpoints == (60.0, 65.0, 70.0, 75.0)
        assert dev.barrier.values == (0.0, 0.3, 0.0, 0.3, 0.0)
        assert dev.doping.breakpoints == (50.0, 85.0)
        assert dev.doping.values == (1e-3, 5e-6, 1e-3)
        assert dev.ramp_span == (50.0, 85.0)
        assert dev.mollify_doping and dev.mollify_barrier
    assert a.prescribed and not b.prescribed


def test_free_particle_parameters():
    dev = build_preset("free_particle")
    assert dev.prescribed
    assert dev.kinetic_prefactor == 0.5               # hbar = m* = 1 units
    assert dev.doping.values == (0.0,)


def test_preset_aliases_and_normalization():
    assert build_preset("rtd_prescribed").name == "rtd_a"
    assert build_preset("rtd_selfconsistent").name == "rtd_b"
    assert build_preset("RTD-A").name == "rtd_a"
    assert build_preset("  Resistor ").name == "resistor"
    assert set(PRESET_ALIASES.values()) <= set(PRESET_NAMES)


def test_preset_overrides_and_unknown():
    dev = build_preset("resistor", default_n_cells=200, temperature=77.0)
    assert dev.default_n_cells == 200
    assert dev.temperature == 77.0
    with pytest.raises(UnknownPreset, match="unknown preset"):
        build_preset("quantum_wire")


def test_per_cm3_round_trips():
    assert per_cm3(1e20) == 0.1
    assert per_cm3(5e15) * 1e21 == 5e15


# ---------------------------------------------------------------------------
# measurement helpers
# ---------------------------------------------------------------------------

def test_oscillation_metric_flat_discrete():
    grid = Grid(10.0, 100)
    ctx = SchrodingerContext(grid, np.zeros(grid.n_nodes), 0.5, 0.5)
    st = solve_scattering(ctx, TbcScheme.DISCRETE)
    assert oscillation_metric(st) <= 1e-11


def test_transmission_curve_free_particle():
    dev = build_preset("free_particle")
    t = transmission_curve(dev, [0.0, 0.3, 0.5])
    assert t[0] == 0.0                            # below the injection floor
    np.testing.assert_allclose(t[1:], 1.0, atol=1e-12)


def test_transmission_curve_potential_override():
    # the smoothed default barrier moves the resonance relative to the sharp
    # one, so probing at the sharp resonance must give very different T
    dev = build_preset("rtd_a")
    grid = Grid(dev.length, dev.default_n_cells)
    sharp = dev.barrier_on(grid.nodes(), smooth=False)
    t_sharp = transmission_curve(dev, [0.090571], potential=sharp)
    t_smooth = transmission_curve(dev, [0.090571])
    assert t_sharp[0] > 0.5
    assert t_smooth[0] < 0.25 * t_sharp[0]


def test_transmission_curve_bias_shifts_resonance():
    dev = build_preset("rtd_a")
    energies = np.linspace(0.02, 0.12, 241)
    t0 = transmission_curve(dev, energies, bias=0.0)
    t1 = transmission_curve(dev, energies, bias=0.05)
    assert energies[np.argmax(t1)] < energies[np.argmax(t0)]


# ---------------------------------------------------------------------------
# worker count
# ---------------------------------------------------------------------------

def test_worker_count_rules(monkeypatch):
    monkeypatch.delenv("QDEV_THREADS", raising=False)
    assert worker_count() == 1
    assert worker_count(4) == 4
    assert worker_count(0) == 1                      # clamped to >= 1
    monkeypatch.setenv("QDEV_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(2) == 2                      # explicit wins
    monkeypatch.setenv("QDEV_THREADS", "many")
    with pytest.raises(ValueError, match="QDEV_THREADS"):
        worker_count()


# ---------------------------------------------------------------------------
# convergence studies
# ---------------------------------------------------------------------------

def test_wave_study_exact_reference_fourth_order():
    dev = build_preset("free_particle")
    report = convergence_study(dev, TbcScheme.DISCRETE, [50, 100, 200],
                               energy=0.5)
    assert report.mode == "wave"
    assert report.reference == "exact plane wave"
    assert all(e2 < e1 for e1, e2 in zip(report.errors, report.errors[1:]))
    for order in report.orders:
        assert order == pytest.approx(4.0, abs=0.1)


def test_wave_study_restriction_reference():
    dev = build_preset("free_particle")
    report = convergence_study(dev, TbcScheme.PLANE_WAVE, [50, 100],
                               reference=400, energy=0.5)
    assert report.reference == "restriction from 400 cells"
    assert report.orders[0] == pytest.approx(4.0, abs=0.3)


def test_study_rows_layout():
    dev = build_preset("free_particle")
    report = convergence_study(dev, TbcScheme.DISCRETE, [50, 100], energy=0.5)
    rows = report.rows()
    assert rows[0][0] == 50 and rows[0][2] is None
    assert rows[1][0] == 100 and rows[1][2] == report.orders[0]


def test_study_validation():
    dev = build_preset("free_particle")
    with pytest.raises(ValueError, match="at least two"):
        convergence_study(dev, TbcScheme.DISCRETE, [100], energy=0.5)
    with pytest.raises(ValueError, match="strictly increasing"):
        convergence_study(dev, TbcScheme.DISCRETE, [200, 100], energy=0.5)
    with pytest.raises(ValueError, match="not a refinement"):
        convergence_study(dev, TbcScheme.DISCRETE, [100, 200], reference=300,
                          energy=0.5)
    with pytest.raises(ValueError, match="flat potential"):
        convergence_study(build_preset("rtd_a"), TbcScheme.DISCRETE,
                          [54, 108], reference="exact", energy=0.2)
    with pytest.raises(ValueError, match="wave-mode"):
        convergence_study(build_preset("resistor"), TbcScheme.DISCRETE,
                          [50, 100], reference="exact")


def test_potential_study_runs_and_converges():
    # tiny self-consistent study: verifies the potential mode end to end
    # (solve, restriction, ordering); the canonical grids live in the
    # acceptance suite
    dev = build_preset("resistor")
    cfg = SelfConsistentConfig(outer_tol=1e-8, quad_tol=1e-9,
                               quad_subdivisions=16)
    report = convergence_study(dev, TbcScheme.DISCRETE, [30, 60],
                               reference=120, config=cfg)
    assert report.mode == "potential"
    assert report.energy is None
    assert len(report.errors) == 2
    assert report.errors[1] < report.errors[0]
    assert report.orders[0] > 2.0
