"""Ready-made device presets and the measurement harnesses built on them:
grid-convergence studies, the free-particle oscillation metric, and
transmission-curve sampling.

The presets carry the canonical parameter sets used throughout the test
suite; ``build_preset`` accepts a few descriptive aliases on top of the
canonical names.  Convergence studies come in two flavours selected by
whether an injection energy is supplied: a fixed-energy scattering study
(error on the wave function against either the exact plane wave or a
fine-grid restriction) and a coupled study (error on the self-consistent
potential against a fine-grid restriction).  Study grids must nest into the
reference grid so the restriction is a plain nodal subsampling.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .devices import DeviceSpec, PiecewiseProfile, mollify_profile
from .errors import UnknownPreset
from .numerics import Grid
from .schrodinger import (ScatteringState, SchrodingerContext, TbcScheme,
                          solve_scattering)
from .selfconsistent import SelfConsistentConfig, run_self_consistent
from .statistics import ScatteringProvider

__all__ = [
    "PRESET_NAMES",
    "PRESET_ALIASES",
    "DEFAULT_BIAS_SWEEPS",
    "per_cm3",
    "build_preset",
    "list_presets",
    "mollify",
    "oscillation_metric",
    "transmission_curve",
    "ConvergenceReport",
    "convergence_study",
    "worker_count",
]

# cm^-3 -> nm^-3 by dividing with the exactly-representable 1e21, so the
# conversion round-trips bit-exactly against the serializer's multiply
def per_cm3(value: float) -> float:
    return value / 1e21


def _resistor() -> DeviceSpec:
    doping = PiecewiseProfile(length=30.0, breakpoints=(4.5, 25.5),
                              values=(per_cm3(1e20), per_cm3(5e19),
                                      per_cm3(1e20)))
    return DeviceSpec(name="resistor", length=30.0, mass_ratio=0.25,
                      relative_permittivity=10.0, fermi_level=0.318,
                      temperature=300.0, doping=doping, barrier=None,
                      default_n_cells=100, mollify_doping=False,
                      quad_subdivisions=64)


def _rtd(name: str, prescribed: bool) -> DeviceSpec:
    doping = PiecewiseProfile(length=135.0, breakpoints=(50.0, 85.0),
                              values=(per_cm3(1e18), per_cm3(5e15),
                                      per_cm3(1e18)))
    barrier = PiecewiseProfile(length=135.0,
                               breakpoints=(60.0, 65.0, 70.0, 75.0),
                               values=(0.0, 0.3, 0.0, 0.3, 0.0))
    return DeviceSpec(name=name, length=135.0, mass_ratio=0.067,
                      relative_permittivity=11.44, fermi_level=0.0427,
                      temperature=300.0, doping=doping, barrier=barrier,
                      default_n_cells=270, prescribed=prescribed,
                      ramp_span=(50.0, 85.0), mollify_doping=True,
                      mollify_barrier=True, quad_subdivisions=4096)


def _free_particle() -> DeviceSpec:
    doping = PiecewiseProfile(length=10.0, breakpoints=(), values=(0.0,))
    return DeviceSpec(name="free_particle", length=10.0, mass_ratio=1.0,
                      relative_permittivity=1.0, fermi_level=0.1,
                      temperature=300.0, doping=doping, barrier=None,
                      default_n_cells=100, prescribed=True,
                      ramp_span=(0.0, 10.0), mollify_doping=False,
                      quad_subdivisions=16, prefactor_override=0.5)


_FACTORIES = {
    "resistor": _resistor,
    "rtd_a": lambda: _rtd("rtd_a", prescribed=True),
    "rtd_b": lambda: _rtd("rtd_b", prescribed=False),
    "free_particle": _free_particle,
}

PRESET_NAMES: Tuple[str, ...] = tuple(sorted(_FACTORIES))

PRESET_ALIASES: Dict[str, str] = {
    "rtd_prescribed": "rtd_a",
    "rtd_selfconsistent": "rtd_b",
}

# default (start, stop, step) bias sweeps in volts, used by the CLI when a
# config names a preset without a [run.bias] table
DEFAULT_BIAS_SWEEPS: Dict[str, Tuple[float, float, float]] = {
    "resistor": (0.0, 0.25, 0.025),
    "rtd_a": (0.0, 0.30, 0.02),
    "rtd_b": (0.0, 0.40, 0.02),
    "free_particle": (0.0, 0.0, 1.0),
}


def build_preset(name: str, **overrides) -> DeviceSpec:
    """Construct one of the named device presets.

    ``overrides`` replace DeviceSpec fields (e.g. ``default_n_cells=200``).
    Raises UnknownPreset for anything that is neither a canonical name nor
    an alias.
    """
    key = str(name).strip().lower().replace("-", "_")
    key = PRESET_ALIASES.get(key, key)
    try:
        factory = _FACTORIES[key]
    except KeyError:
        known = ", ".join(sorted(set(PRESET_NAMES) | set(PRESET_ALIASES)))
        raise UnknownPreset(f"unknown preset {name!r}; known: {known}") \
            from None
    device = factory()
    if overrides:
        device = replace(device, **overrides)
    return device


def list_presets() -> List[str]:
    return list(PRESET_NAMES)


def worker_count(requested: Optional[int] = None) -> int:
    """Worker-pool size: explicit argument, else QDEV_THREADS, else 1."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("QDEV_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"QDEV_THREADS must be an integer, got {env!r}") \
                from None
    return 1


def mollify(profile, grid: Grid, tol: float = 1e-10) -> np.ndarray:
    """Smoothed profile sampled on the grid nodes (see mollify_profile)."""
    return mollify_profile(profile, grid.nodes(), grid.length, tol=tol)


def oscillation_metric(state: ScatteringState) -> float:
    """max_j | |psi_j| - 1 |: modulus ripple of a free-particle solution.

    The exact scattering state for a flat potential has unit modulus
    everywhere, so any deviation is boundary-induced artifact.
    """
    return float(np.max(np.abs(np.abs(state.psi.values) - 1.0)))


def transmission_curve(device: DeviceSpec, energies,
                       scheme=TbcScheme.DISCRETE, bias: float = 0.0,
                       n_cells: Optional[int] = None,
                       potential: Optional[np.ndarray] = None) -> np.ndarray:
    """Clamped transmission sampled at the given total energies (eV).

    By default the potential is the device's band profile plus its linear
    ramp at ``bias`` (the prescribed-device model); pass ``potential``
    explicitly to probe e.g. a self-consistent solution.  Energies the
    scheme cannot inject at yield 0.
    """
    scheme = TbcScheme(scheme)
    grid = Grid(device.length, n_cells or device.default_n_cells)
    if potential is None:
        x = grid.nodes()
        potential = device.barrier_on(x) + device.ramp_on(x, bias)
    provider = ScatteringProvider(grid, potential, device.kinetic_prefactor,
                                  scheme)
    return np.array([provider.transmission(float(e)) for e in energies])


@dataclass
class ConvergenceReport:
    device_name: str
    scheme: TbcScheme
    mode: str                       # "wave" or "potential"
    n_cells: List[int]
    errors: List[float]
    orders: List[float]             # orders[i] pairs with n_cells[i + 1]
    reference: str
    energy: Optional[float] = None
    bias: float = 0.0

    def rows(self):
        """(n_cells, error, order-or-None) per study grid, for tabulation."""
        out = []
        for i, (n, e) in enumerate(zip(self.n_cells, self.errors)):
            out.append((n, e, self.orders[i - 1] if i > 0 else None))
        return out


def _restrict(values: np.ndarray, n_fine: int, n_coarse: int) -> np.ndarray:
    stride = n_fine // n_coarse
    return values[::stride]


def _wave_solution(device, scheme, n_cells, energy, bias):
    grid = Grid(device.length, n_cells)
    x = grid.nodes()
    potential = device.barrier_on(x) + device.ramp_on(x, bias)
    ctx = SchrodingerContext(grid=grid, potential=potential,
                             prefactor=device.kinetic_prefactor,
                             energy=energy)
    return solve_scattering(ctx, scheme).psi.values


def _potential_solution(device, scheme, n_cells, bias, config):
    cfg = replace(config, n_cells=n_cells, bias=bias, initial_vs=None)
    return run_self_consistent(device, scheme, cfg).v_total


def convergence_study(device: DeviceSpec, scheme,
                      n_cells_list: Sequence[int],
                      reference: Union[str, int] = "auto",
                      energy: Optional[float] = None,
                      bias: float = 0.0,
                      config: Optional[SelfConsistentConfig] = None,
                      threads: Optional[int] = None) -> ConvergenceReport:
    """Grid-refinement study; see the module docstring for the two modes.

    ``reference`` is "exact" (flat-potential scattering only), an integer
    cell count for a restriction reference, or "auto": exact when a flat
    potential makes the exact solution available, otherwise a restriction
    reference with cell size length/160 per nm of device (twice the finest
    tabulated grid in the canonical setups).
    """
    scheme = TbcScheme(scheme)
    n_cells_list = [int(n) for n in n_cells_list]
    if len(n_cells_list) < 2:
        raise ValueError("need at least two grids to estimate an order")
    if any(b <= a for a, b in zip(n_cells_list, n_cells_list[1:])):
        raise ValueError("grid list must be strictly increasing")
    mode = "wave" if energy is not None else "potential"

    # the fixed-energy solve sees only barrier + ramp; doping is irrelevant
    flat = device.barrier is None or not any(device.barrier.values)
    if reference == "auto":
        reference = "exact" if (mode == "wave" and flat and bias == 0.0) \
            else int(round(160.0 * device.length))
    if reference == "exact":
        if mode != "wave":
            raise ValueError("exact reference requires a wave-mode study")
        if not flat or bias != 0.0:
            raise ValueError("exact reference requires a flat potential")
        ref_descriptor = "exact plane wave"
        n_ref = None
    else:
        n_ref = int(reference)
        bad = [n for n in n_cells_list if n_ref % n != 0]
        if bad:
            raise ValueError(
                f"reference grid {n_ref} is not a refinement of {bad}")
        ref_descriptor = f"restriction from {n_ref} cells"

    if mode == "potential":
        study_device = device if device.mollify_doping \
            else replace(device, mollify_doping=True)
        base_cfg = config if config is not None else SelfConsistentConfig()

        def solve(n):
            return _potential_solution(study_device, scheme, n, bias,
                                       base_cfg)
    else:
        def solve(n):
            return _wave_solution(device, scheme, n, energy, bias)

    jobs = list(n_cells_list) + ([] if n_ref is None else [n_ref])
    workers = min(worker_count(threads), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solutions = list(pool.map(solve, jobs))
    else:
        solutions = [solve(n) for n in jobs]

    if n_ref is None:
        pf = device.kinetic_prefactor
        k = math.sqrt(energy / pf)
        errors = []
        for n, psi in zip(n_cells_list, solutions):
            exact = np.exp(1j * k * Grid(device.length, n).nodes())
            errors.append(float(np.max(np.abs(psi - exact))))
    else:
        ref = solutions[-1]
        errors = []
        for n, sol in zip(n_cells_list, solutions[:-1]):
            diff = sol - _restrict(ref, n_ref, n)
            errors.append(float(np.max(np.abs(diff))))

    orders = [math.log2(e_prev / e_next)
              for e_prev, e_next in zip(errors, errors[1:])]
    return ConvergenceReport(device_name=device.name, scheme=scheme,
                             mode=mode, n_cells=n_cells_list, errors=errors,
                             orders=orders, reference=ref_descriptor,
                             energy=energy, bias=bias)
