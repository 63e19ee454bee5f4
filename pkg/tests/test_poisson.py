"""Compact Neumann Poisson assembly and the damped Newton iteration."""

import math

import numpy as np
import pytest

from qdev1d.errors import MaxIterationsExceeded, SingularSystem
from qdev1d.numerics import Grid
from qdev1d.poisson import (NewtonConfig, apply_source_weights,
                            assemble_poisson, make_gummel_predictor,
                            newton_solve)
from qdev1d.statistics import DensityProfile


def zero_functional(n_ghosted_len):
    z = np.zeros(n_ghosted_len)

    def functional(v):
        return z, z

    return functional


# ---------------------------------------------------------------------------
# operator assembly
# ---------------------------------------------------------------------------

def test_assembled_rows_hand_case():
    # dx = 0.25 is exact in binary, so lam = 12/dx^2 = 192 exactly
    grid = Grid(4.0, 16)
    dense = assemble_poisson(grid).todense().real
    assert dense[3, 2] == 192.0
    assert dense[3, 3] == -384.0
    assert dense[3, 4] == 192.0
    assert dense[0, 0] == -384.0 and dense[0, 1] == 384.0
    assert dense[-1, -2] == 384.0 and dense[-1, -1] == -384.0
    # zero row sums: constants are in the null space (Neumann)
    np.testing.assert_allclose(dense.sum(axis=1), 0.0, atol=1e-9)


def test_source_weights_hand_case():
    out = apply_source_weights(np.array([1.0, 2.0, 3.0, 4.0, 5.0]))
    # interior (1, 10, 1); walls (-1, 10, 3) and (3, 10, -1)
    np.testing.assert_allclose(out, [28.0, 36.0, 44.0])


# ---------------------------------------------------------------------------
# manufactured linear problem (no charge, pinned gauge)
# ---------------------------------------------------------------------------

def manufactured_error(n_cells):
    # V(x) = cos(2 pi x) - 1 satisfies V'(0) = V'(1) = 0 and V(0) = 0
    grid = Grid(1.0, n_cells)
    f = lambda x: -4.0 * math.pi**2 * np.cos(2.0 * math.pi * x)
    state = newton_solve(grid, np.zeros(grid.n_nodes),
                         f(grid.nodes_ghosted()),
                         zero_functional(grid.n_nodes + 2),
                         coulomb_factor=1.0,
                         config=NewtonConfig(pin_gauge=True))
    assert state.converged
    assert state.iterations <= 2            # the problem is linear
    exact = np.cos(2.0 * math.pi * grid.nodes()) - 1.0
    return float(np.max(np.abs(state.potential - exact)))


def test_manufactured_solution_fourth_order():
    errs = [manufactured_error(n) for n in (32, 64, 128)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert errs[-1] < 1e-5
    for order in orders:
        assert order == pytest.approx(4.0, abs=0.3)


def test_unpinned_chargeless_operator_is_singular():
    grid = Grid(1.0, 16)
    with pytest.raises(SingularSystem):
        newton_solve(grid, np.zeros(grid.n_nodes),
                     np.zeros(grid.n_nodes + 2),
                     zero_functional(grid.n_nodes + 2),
                     coulomb_factor=1.0)


# ---------------------------------------------------------------------------
# Jacobian correctness via one-step convergence on a linear functional
# ---------------------------------------------------------------------------

def test_linear_density_functional_converges_in_one_step():
    # n(v) = n0 - a (v - 0) is linear, so an exact Jacobian lands the first
    # Newton step on the solution and the second step is pure roundoff;
    # any assembly error in the screening terms would show as extra steps
    rng = np.random.default_rng(42)
    grid = Grid(5.0, 24)
    n_g = grid.n_nodes + 2
    n0 = 0.05 + 0.01 * rng.random(n_g)
    a = 0.4

    def functional(v):
        v_g = np.concatenate([[v[0]], v, [v[-1]]])
        return n0 - a * v_g, np.full(n_g, -a)

    doping = 0.05 + 0.01 * rng.random(n_g)
    state = newton_solve(grid, 0.01 * rng.standard_normal(grid.n_nodes),
                         doping, functional, coulomb_factor=7.0)
    assert state.converged
    assert state.iterations == 2
    assert state.step_history[1] <= 1e-12 * max(1.0, state.step_history[0])


def test_charge_neutral_start_converges_immediately():
    grid = Grid(5.0, 20)
    n_g = grid.n_nodes + 2
    doping = np.full(n_g, 0.1)
    profile = DensityProfile(values=np.full(grid.n_nodes, 0.1),
                             ghost_left=0.1, ghost_right=0.1)
    predictor = make_gummel_predictor(profile, np.zeros(grid.n_nodes), 0.0259)
    state = newton_solve(grid, np.zeros(grid.n_nodes), doping, predictor,
                         coulomb_factor=18.0)
    assert state.converged
    assert state.iterations == 1
    np.testing.assert_allclose(state.potential, 0.0, atol=1e-12)
    np.testing.assert_allclose(state.source_ghosted, 0.0, atol=1e-12)


def test_screened_step_converges_quadratically_fast():
    # uniform donor over half the domain: genuine nonlinear problem; the
    # exponential predictor keeps the Jacobian diagonally dominant and the
    # solve should take a handful of iterations, not dozens
    grid = Grid(20.0, 60)
    x_g = grid.nodes_ghosted()
    doping = np.where(x_g < 10.0, 0.1, 0.02)
    profile = DensityProfile(values=np.full(grid.n_nodes, 0.06),
                             ghost_left=0.06, ghost_right=0.06)
    predictor = make_gummel_predictor(profile, np.zeros(grid.n_nodes), 0.0259)
    state = newton_solve(grid, np.zeros(grid.n_nodes), doping, predictor,
                         coulomb_factor=18.0)
    assert state.converged
    assert state.iterations <= 12
    assert state.step_history[-1] <= 1e-10
    # screening pushed the potential down where donors exceed the density
    assert state.potential[0] < state.potential[-1]


def test_max_iterations_carries_best_state():
    grid = Grid(20.0, 40)
    x_g = grid.nodes_ghosted()
    doping = np.where(x_g < 10.0, 0.1, 0.02)
    profile = DensityProfile(values=np.full(grid.n_nodes, 0.06),
                             ghost_left=0.06, ghost_right=0.06)
    predictor = make_gummel_predictor(profile, np.zeros(grid.n_nodes), 0.0259)
    with pytest.raises(MaxIterationsExceeded) as excinfo:
        newton_solve(grid, np.zeros(grid.n_nodes), doping, predictor,
                     coulomb_factor=18.0,
                     config=NewtonConfig(max_iterations=2))
    state = excinfo.value.state
    assert not state.converged
    assert state.iterations == 2
    assert len(state.step_history) == 2
    assert np.all(np.isfinite(state.potential))


# ---------------------------------------------------------------------------
# Gummel predictor
# ---------------------------------------------------------------------------

def test_gummel_predictor_reference_point():
    vals = np.array([0.1, 0.2, 0.3])
    profile = DensityProfile(values=vals, ghost_left=0.05, ghost_right=0.35)
    v_ref = np.array([0.0, 0.01, 0.02])
    predictor = make_gummel_predictor(profile, v_ref, 0.025)
    n, dndv = predictor(v_ref.copy())
    np.testing.assert_allclose(n, [0.05, 0.1, 0.2, 0.3, 0.35], rtol=1e-14)
    np.testing.assert_allclose(dndv, -n / 0.025, rtol=1e-14)


def test_gummel_predictor_decreases_with_potential():
    profile = DensityProfile(values=np.array([0.1, 0.1]), ghost_left=0.1,
                             ghost_right=0.1)
    predictor = make_gummel_predictor(profile, np.zeros(2), 0.025)
    n_up, _ = predictor(np.full(2, +0.05))
    n_dn, _ = predictor(np.full(2, -0.05))
    assert np.all(n_up < 0.1) and np.all(n_dn > 0.1)
    np.testing.assert_allclose(n_up, 0.1 * math.exp(-2.0), rtol=1e-12)


def test_gummel_predictor_clips_extreme_arguments():
    profile = DensityProfile(values=np.array([1.0]), ghost_left=1.0,
                             ghost_right=1.0)
    predictor = make_gummel_predictor(profile, np.zeros(1), 1e-4)
    n, dndv = predictor(np.array([-1.0]))    # exp(1e4) would overflow
    assert np.all(np.isfinite(n)) and np.all(np.isfinite(dndv))
    profile_neg = DensityProfile(values=np.array([-0.5]), ghost_left=-0.5,
                                 ghost_right=-0.5)
    n2, _ = make_gummel_predictor(profile_neg, np.zeros(1), 0.025)(np.zeros(1))
    assert np.all(n2 == 0.0)                 # negative densities clipped


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [dict(tol=0.0), dict(tol=-1e-3),
                                    dict(damping=0.0), dict(damping=1.5)])
def test_newton_config_validation(kwargs):
    with pytest.raises(ValueError):
        NewtonConfig(**kwargs)
