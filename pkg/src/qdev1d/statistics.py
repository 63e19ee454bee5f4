"""Carrier statistics: thermal supply function, electron density from
scattering states, and terminal current density.

Each propagating state injected at energy E carries the transverse-integrated
occupation ("supply") weight

    F(mu - E) = (m* k_B T / (pi hbar^2)) * ln(1 + exp((mu - E) / k_B T)),

in nm^-2 (spin degeneracy included).  The density integrates |psi|^2 against
this weight over the injection wavenumber for both contacts, with each
contact's wavenumber measured in its own lead (total energy = contact edge
plus kinetic energy); the current is the Landauer integral of T(E) against
the supply difference of the two contacts.  Bias enters exclusively through
the right contact's Fermi level.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .constants import CURRENT_A_PER_CM2, PER_NM3_TO_PER_CM3, thermal_energy
from .errors import DepthExceeded
from .numerics import QuadratureSpec, adaptive_simpson
from .schrodinger import Direction, SchrodingerContext, TbcScheme, solve_scattering

__all__ = [
    "ThermalContext",
    "DensityProfile",
    "ScatteringProvider",
    "fermi_weight",
    "electron_density",
    "current_density",
]

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_SUBDIVISIONS = 64

# Minimum kinetic energy (eV) above the injection contact for a state to be
# counted as propagating.  At exactly zero injection energy the boundary
# closures degenerate (the scattering system turns into a singular
# Neumann-type system), and just above it the solve's conditioning grows
# like 1/k.  States below this floor carry no flux; the occupation excluded
# with them is ~1e-6 of a contact density (the supply weight is finite at
# k = 0 but the sliver is only ~1e-6 nm^-1 wide), far below physical
# significance and the discretization error.
INJECTION_FLOOR = 1e-12


@dataclass(frozen=True)
class ThermalContext:
    """Contact thermodynamics for one run.

    ``fermi_level`` is the left contact's chemical potential (eV); the right
    contact sits at ``fermi_level - bias`` (bias in eV, i.e. q_e * V_ds).
    ``kinetic_prefactor`` is hbar^2/(2 m*) in eV nm^2 and fixes both the
    supply prefactor and the E(k) parameterization.  ``e_cutoff`` truncates
    all energy/wavenumber integrals; the supply weight beyond it is
    negligible for the devices treated here.
    """

    temperature: float
    fermi_level: float
    kinetic_prefactor: float
    bias: float = 0.0
    e_cutoff: float = 0.8

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if self.kinetic_prefactor <= 0.0:
            raise ValueError("kinetic prefactor must be positive")
        if self.e_cutoff <= self.fermi_level:
            raise ValueError("energy cutoff must exceed the Fermi level")

    @property
    def kt(self):
        return thermal_energy(self.temperature)

    @property
    def supply_prefactor(self):
        """m* k_B T / (pi hbar^2) in nm^-2."""
        return self.kt / (2.0 * math.pi * self.kinetic_prefactor)

    @property
    def k_max(self):
        """Wavenumber corresponding to the energy cutoff, nm^-1."""
        return math.sqrt(self.e_cutoff / self.kinetic_prefactor)

    @property
    def mu_right(self):
        return self.fermi_level - self.bias


def fermi_weight(energy, mu, thermal):
    """Supply function F(mu - E) in nm^-2, overflow-safe.

    ``log1p(exp(x))`` is evaluated as ``logaddexp(0, x)``, which switches to
    the linear asymptote x for large arguments instead of overflowing.
    """
    x = (mu - energy) / thermal.kt
    return thermal.supply_prefactor * np.logaddexp(0.0, x)


@dataclass
class DensityProfile:
    """Electron density at the grid nodes plus the two ghost nodes, nm^-3."""

    values: np.ndarray
    ghost_left: float
    ghost_right: float
    depth_warnings: int = 0

    def ghosted(self):
        return np.concatenate([[self.ghost_left], self.values, [self.ghost_right]])

    def values_cm3(self):
        return self.values * PER_NM3_TO_PER_CM3


class ScatteringProvider:
    """Scattering solves against one frozen total potential.

    A single solve per (E, direction) serves every nodal integral at once
    because the density integrand is vector-valued over the nodes.  An
    optional cache keyed by (energy, direction) additionally shares states
    between separate integrals over the same potential (the provider object
    itself is the potential revision: build a new provider after updating
    the potential).
    """

    def __init__(self, grid, potential, prefactor, scheme, cache=False):
        self.grid = grid
        self.potential = np.asarray(potential, dtype=np.float64)
        self.prefactor = float(prefactor)
        self.scheme = TbcScheme(scheme)
        self.t_lambda = 12.0 * self.prefactor / grid.dx**2
        self._cache = {} if cache else None

    def admits(self, energy, direction=Direction.LEFT):
        """Whether this energy/direction carries a propagating injected mode.

        Evanescent-at-injection energies contribute zero.  An evanescent
        *far* contact is fine for every closure (the outgoing condition
        degrades gracefully to the decaying branch), but the ``discrete``
        closure additionally needs each propagating contact resolvable on
        the grid, so under-resolved energies are excluded — treated as
        zero — rather than solved.
        """
        v0 = self.potential[0]
        vn = self.potential[-1]
        v_inj = v0 if Direction(direction) is Direction.LEFT else vn
        if energy - v_inj < INJECTION_FLOOR:
            return False
        if self.scheme is TbcScheme.DISCRETE:
            if self.t_lambda <= 2.0 * (energy - min(v0, vn)):
                return False
        return True

    def state(self, energy, direction=Direction.LEFT):
        direction = Direction(direction)
        if self._cache is not None:
            key = (energy, direction)
            hit = self._cache.get(key)
            if hit is not None:
                return hit
        ctx = SchrodingerContext(self.grid, self.potential, self.prefactor, energy)
        st = solve_scattering(ctx, self.scheme, direction)
        if self._cache is not None:
            self._cache[key] = st
        return st

    def transmission(self, energy):
        """T(E) for left incidence (clamped); 0 when inadmissible."""
        if not self.admits(energy, Direction.LEFT):
            return 0.0
        return self.state(energy).transmission


def _density_quadrature(thermal, quad):
    if quad is not None:
        return quad
    return QuadratureSpec(0.0, thermal.k_max, tol=DEFAULT_QUAD_TOL,
                          initial_subdivisions=DEFAULT_SUBDIVISIONS)


def _admissible_floor(provider):
    """Lowest total energy (eV) carrying any transmitted flux, or None.

    Left-injected current flows only above the higher of the two contact
    edges (below it the mode is either not injected or totally reflected
    with T clamped to zero), so the current integral may start there;
    doing so keeps its integrand smooth at the lower endpoint instead of
    stepping up from clamped zeros mid-panel.  A quarter-floor margin
    keeps the endpoint itself robustly admissible: without it, rounding
    can push the first evaluation a few ulp below the injection floor and
    the masked endpoint drives the quadrature to its depth cap.
    """
    pot = getattr(provider, "potential", None)
    if pot is None:
        return None
    return max(float(pot[0]), float(pot[-1])) + 1.25 * INJECTION_FLOOR


def electron_density(states_provider, thermal, grid, quad=None):
    """Electron density profile (ghosts included) by adaptive quadrature.

    n_i = (1/2pi) * sum over contacts of
          int_0^{k_max} F(mu_contact - E(k)) |psi_i(k)|^2 dk,
    where k is the injected mode's wavenumber *in its own lead*, so the
    total energy is E(k) = V_lead + prefactor * k^2 with V_lead the
    potential at the injecting contact, and mu_right is shifted down by
    the bias.  The lead referencing matters under bias: the biased
    contact's band edge follows its Fermi level downward, and measuring k
    from the absolute energy zero instead would both mis-weight the lead's
    1/sqrt(kinetic) mode density and drop every state between the two band
    edges — the occupation-heaviest slice of the lower contact — leaving
    that contact unable to reach charge neutrality at any potential.
    Inadmissible energies (see ScatteringProvider.admits) contribute zero.
    Depth-cap warnings from the quadrature are re-issued and counted on
    the profile.
    """
    quad = _density_quadrature(thermal, quad)
    pf = thermal.kinetic_prefactor
    mu_l = thermal.fermi_level
    mu_r = thermal.mu_right
    n_out = grid.n_nodes + 2

    pot = getattr(states_provider, "potential", None)
    v_left = float(pot[0]) if pot is not None else 0.0
    v_right = float(pot[-1]) if pot is not None else 0.0
    # In lead-kinetic variables the injection floor is direction-independent.
    k_floor = math.sqrt(1.25 * INJECTION_FLOOR / pf)
    if quad.lower < k_floor < quad.upper:
        quad = replace(quad, lower=k_floor)

    def integrand(k):
        kinetic = pf * k * k
        acc = np.zeros(n_out)
        for direction, mu, v_lead in ((Direction.LEFT, mu_l, v_left),
                                      (Direction.RIGHT, mu_r, v_right)):
            energy = v_lead + kinetic
            if not states_provider.admits(energy, direction):
                continue
            st = states_provider.state(energy, direction)
            g = st.psi.ghosted()
            w = fermi_weight(energy, mu, thermal)
            acc += w * (g.real * g.real + g.imag * g.imag)
        return acc / (2.0 * math.pi)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        raw = adaptive_simpson(integrand, quad)
    hits = 0
    for w in caught:
        if issubclass(w.category, DepthExceeded):
            hits += 1
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return DensityProfile(values=raw[1:-1], ghost_left=float(raw[0]),
                          ghost_right=float(raw[-1]), depth_warnings=hits)


def current_density(transmission_provider, thermal, quad=None):
    """Terminal current density in A/cm^2 (positive from left to right).

    I = (q_e / 2 pi hbar) * int_0^{E_cut} T(E) [F(mu_L - E) - F(mu_R - E)] dE,
    evaluated with the clamped transmission.  Identically zero at zero bias.
    """
    if quad is None:
        quad = QuadratureSpec(0.0, thermal.e_cutoff, tol=DEFAULT_QUAD_TOL,
                              initial_subdivisions=DEFAULT_SUBDIVISIONS)
    e_floor = _admissible_floor(transmission_provider)
    if e_floor is not None and quad.lower < e_floor < quad.upper:
        quad = replace(quad, lower=e_floor)
    mu_l = thermal.fermi_level
    mu_r = thermal.mu_right

    def integrand(energy):
        t = transmission_provider.transmission(energy)
        if t == 0.0:
            return 0.0
        return t * (fermi_weight(energy, mu_l, thermal)
                    - fermi_weight(energy, mu_r, thermal))

    return CURRENT_A_PER_CM2 * adaptive_simpson(integrand, quad)
