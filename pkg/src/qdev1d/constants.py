"""Physical constants in the package's working units (nm, eV, K).

Lengths are nanometres, energies electron-volts, densities nm^-3 internally
(converted to cm^-3 only at the I/O boundary).  Values derive from the exact
2019 SI definitions (h, e, k_B) and CODATA 2018 for the electron mass and the
vacuum permittivity.
"""

import math

# Exact SI values
PLANCK_H_JS = 6.62607015e-34          # J s
ELEMENTARY_CHARGE_C = 1.602176634e-19  # C
BOLTZMANN_J_PER_K = 1.380649e-23      # J/K

# CODATA 2018
ELECTRON_MASS_KG = 9.1093837015e-31   # kg
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m

HBAR_JS = PLANCK_H_JS / (2.0 * math.pi)

#: hbar^2 / (2 m0) in eV nm^2.  Kinetic prefactor for a carrier of effective
#: mass m* is this value divided by the mass ratio m*/m0.
HBAR2_OVER_2M0 = HBAR_JS**2 / (2.0 * ELECTRON_MASS_KG * ELEMENTARY_CHARGE_C) * 1e18

#: Boltzmann constant in eV/K.
BOLTZMANN_EV = BOLTZMANN_J_PER_K / ELEMENTARY_CHARGE_C

#: q^2 / eps0 in eV nm.  Divide by the relative permittivity for a material.
CHARGE_SQ_OVER_EPS0 = ELEMENTARY_CHARGE_C / VACUUM_PERMITTIVITY * 1e9

#: Converts a current integral in eV nm^-2 to A/cm^2 (factor e^2/h with the
#: eV -> J and nm^-2 -> m^-2 -> cm^-2 unit bookkeeping folded in).
CURRENT_A_PER_CM2 = ELEMENTARY_CHARGE_C**2 / PLANCK_H_JS * 1e18 * 1e-4

#: nm^-3 -> cm^-3.
PER_NM3_TO_PER_CM3 = 1e21


def kinetic_prefactor(mass_ratio):
    """hbar^2/(2 m*) in eV nm^2 for an effective mass ``mass_ratio`` * m0."""
    if mass_ratio <= 0.0:
        raise ValueError("mass ratio must be positive")
    return HBAR2_OVER_2M0 / mass_ratio


def thermal_energy(temperature_k):
    """k_B * T in eV."""
    if temperature_k <= 0.0:
        raise ValueError("temperature must be positive")
    return BOLTZMANN_EV * temperature_k
