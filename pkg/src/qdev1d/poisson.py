"""Electrostatics: fourth-order compact Poisson solve with Neumann walls and
a damped Newton iteration stabilized by an exponential density predictor.

The potential is stored as potential energy (eV); the equation solved is

    V'' = f,    f = (q^2/eps) (N_d - n)    [eV / nm^2],

with zero-derivative (charge-neutral contact) conditions at both walls.  With
lam = 12/dx^2 the compact rows are

    interior:  lam (V_{i-1} - 2 V_i + V_{i+1}) = f_{i-1} + 10 f_i + f_{i+1}
    left wall: -2 lam V_0 + 2 lam V_1        = -f_{-1} + 10 f_0 + 3 f_1
    right wall: 2 lam V_{N-1} - 2 lam V_N    =  3 f_{N-1} + 10 f_N - f_{N+1}

The ghost sources f_{-1}, f_{N+1} use ghost densities (from reconstructed
ghost wave functions) and constantly extended doping.

The pure-Neumann operator alone is singular (constants in the null space).
Inside Newton the quantum density responds through the predictor
n -> n * exp(-(V - V_ref)/kT), whose derivative adds a positive diagonal
contribution through the same compact weights and restores strict diagonal
dominance wherever n > 0.  A debug mode pins V_0 = 0 instead, for
manufactured problems with no charge.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import MaxIterationsExceeded
from .numerics import BandedComplexSystem

__all__ = [
    "NewtonConfig",
    "PoissonState",
    "assemble_poisson",
    "apply_source_weights",
    "make_gummel_predictor",
    "newton_solve",
]

_EXP_ARG_MAX = 600.0  # exp(600) ~ 3.8e260, still finite in double precision


@dataclass
class NewtonConfig:
    tol: float = 1e-10
    max_iterations: int = 100
    damping: float = 1.0
    damping_floor: float = 1.0 / 64.0
    pin_gauge: bool = False

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("Newton tolerance must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class PoissonState:
    """Result of one Newton solve."""

    potential: np.ndarray
    source_ghosted: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    step_history: list = field(default_factory=list)


def _laplacian_diagonals(grid):
    """(lower, diag, upper) of the Neumann compact Laplacian, lam-form."""
    lam = 12.0 / grid.dx**2
    n = grid.n_nodes
    lower = np.full(n, lam)
    diag = np.full(n, -2.0 * lam)
    upper = np.full(n, lam)
    lower[0] = 0.0
    upper[-1] = 0.0
    upper[0] = 2.0 * lam
    lower[-1] = 2.0 * lam
    return lower, diag, upper


def assemble_poisson(grid):
    """The (singular) Neumann operator as a BandedComplexSystem.

    Pair with :func:`apply_source_weights` for the right-hand side; the
    Newton path works on the raw diagonals instead.
    """
    lower, diag, upper = _laplacian_diagonals(grid)
    return BandedComplexSystem.from_tridiagonal(lower, diag, upper)


def _apply_laplacian(grid, v):
    lam = 12.0 / grid.dx**2
    out = np.empty_like(v)
    out[1:-1] = lam * (v[:-2] - 2.0 * v[1:-1] + v[2:])
    out[0] = 2.0 * lam * (v[1] - v[0])
    out[-1] = 2.0 * lam * (v[-2] - v[-1])
    return out


def apply_source_weights(f_ghosted):
    """Compact right-hand-side weights applied to a ghosted source array.

    ``f_ghosted`` holds f on nodes -1..N+1; the result has one entry per
    grid node, using (1, 10, 1) weights in the interior and the one-sided
    (-1, 10, 3) / (3, 10, -1) combinations at the walls.
    """
    f = np.asarray(f_ghosted)
    out = f[:-2] + 10.0 * f[1:-1] + f[2:]
    out[0] = -f[0] + 10.0 * f[1] + 3.0 * f[2]
    out[-1] = 3.0 * f[-3] + 10.0 * f[-2] - f[-1]
    return out


def make_gummel_predictor(density, v_reference, kt):
    """Exponential density response around a frozen quantum density.

    Returns a callable v -> (n_ghosted, dn_dv_ghosted) implementing
    n = n_quantum * exp(-(v - v_ref)/kT) with the ghost entries following
    their adjacent wall node.  The exponent is clipped to keep intermediate
    line-search evaluations finite.
    """
    n0 = np.clip(density.ghosted(), 0.0, None)
    v_ref = np.asarray(v_reference, dtype=np.float64).copy()

    def predictor(v):
        delta = v - v_ref
        delta_g = np.concatenate([[delta[0]], delta, [delta[-1]]])
        n = n0 * np.exp(np.clip(-delta_g / kt, -_EXP_ARG_MAX, _EXP_ARG_MAX))
        return n, -n / kt

    return predictor


def newton_solve(grid, v_init, doping_ghosted, density_functional,
                 coulomb_factor, config=None):
    """Damped Newton iteration for the compact Neumann Poisson system.

    ``density_functional(v) -> (n_ghosted, dn_dv_ghosted)`` supplies the
    (predicted) density and its derivative; the source is recomputed from it
    at every residual evaluation, never reused stale.  Steps are damped by
    halving whenever the residual norm would increase (floor 1/64).
    Converges when the undamped Newton step falls below ``config.tol`` in
    the max norm; raises :class:`MaxIterationsExceeded` (with the best
    iterate attached) otherwise.
    """
    if config is None:
        config = NewtonConfig()
    v = np.asarray(v_init, dtype=np.float64).copy()
    lap_lower, lap_diag, lap_upper = _laplacian_diagonals(grid)
    doping_ghosted = np.asarray(doping_ghosted, dtype=np.float64)

    def source(n_ghosted):
        return coulomb_factor * (doping_ghosted - n_ghosted)

    def residual(v_trial):
        n, _ = density_functional(v_trial)
        r = _apply_laplacian(grid, v_trial) - apply_source_weights(source(n))
        if config.pin_gauge:
            r[0] = v_trial[0]
        return r, n

    r, n_cur = residual(v)
    r_norm = float(np.max(np.abs(r)))
    history = []

    for iteration in range(1, config.max_iterations + 1):
        _, dndv = density_functional(v)
        w = -coulomb_factor * dndv  # >= 0: positive feedback blocked
        j_lower = lap_lower.copy().astype(np.float64)
        j_diag = lap_diag - 10.0 * w[1:-1]
        j_upper = lap_upper.copy()
        j_lower[1:-1] -= w[1:-3]
        j_upper[1:-1] -= w[3:-1]
        j_diag[0] = lap_diag[0] + w[0] - 10.0 * w[1]
        j_upper[0] = lap_upper[0] - 3.0 * w[2]
        j_diag[-1] = lap_diag[-1] + w[-1] - 10.0 * w[-2]
        j_lower[-1] = lap_lower[-1] - 3.0 * w[-3]
        if config.pin_gauge:
            j_diag[0], j_upper[0] = 1.0, 0.0

        step = kernels.tridiag_solve(
            j_lower.astype(np.complex128), j_diag.astype(np.complex128),
            j_upper.astype(np.complex128), (-r).astype(np.complex128)).real
        step_norm = float(np.max(np.abs(step)))
        history.append(step_norm)

        omega = config.damping
        while True:
            v_trial = v + omega * step
            r_trial, n_trial = residual(v_trial)
            rn_trial = float(np.max(np.abs(r_trial)))
            if rn_trial <= r_norm or omega <= config.damping_floor:
                break
            omega *= 0.5
        v, r, r_norm, n_cur = v_trial, r_trial, rn_trial, n_trial

        if step_norm <= config.tol:
            return PoissonState(potential=v, source_ghosted=source(n_cur),
                                residual_norm=r_norm, iterations=iteration,
                                converged=True, step_history=history)

    best = PoissonState(potential=v, source_ghosted=source(n_cur),
                        residual_norm=r_norm, iterations=config.max_iterations,
                        converged=False, step_history=history)
    exc = MaxIterationsExceeded(
        f"Newton did not reach {config.tol} in {config.max_iterations} "
        f"iterations (last step {history[-1]:.3e})")
    exc.state = best
    exc.history = history
    raise exc
