"""Self-consistent coupling of the scattering solver to the electrostatics.

The outer (Gummel) loop alternates a full quantum density evaluation with a
damped Newton solve of the compact Poisson system, where the density inside
Newton responds through the exponential predictor of
:func:`qdev1d.poisson.make_gummel_predictor`.  Applied bias enters only
through the right contact Fermi level; the electrostatic potential develops
the corresponding drop on its own because the Neumann walls enforce charge
neutrality in the contacts.  An optional ``bias_ramp`` mode superposes a
fixed linear drop as an external potential instead, for devices where the
purely self-consistent iteration at high bias is fragile; it changes the
model (the ramp is then imposed, not solved for) and is off by default.

Devices marked ``prescribed`` skip the Poisson coupling entirely: the
potential is the band-edge profile plus the device's linear ramp, and a
single density/current evaluation is performed.
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .constants import CHARGE_SQ_OVER_EPS0
from .devices import DeviceSpec
from .errors import (MaxIterationsExceeded, OuterMaxIterations,
                     PreconditionViolated, QdevError)
from .numerics import Grid, QuadratureSpec
from .poisson import NewtonConfig, make_gummel_predictor, newton_solve
from .schrodinger import TbcScheme
from .statistics import (DensityProfile, ScatteringProvider, ThermalContext,
                         current_density, electron_density)

__all__ = [
    "SelfConsistentConfig",
    "SelfConsistentResult",
    "run_self_consistent",
    "bias_sweep",
]


@dataclass
class SelfConsistentConfig:
    bias: float = 0.0
    n_cells: Optional[int] = None          # None -> device default
    outer_tol: float = 1e-10
    outer_max_iterations: int = 200
    mixing: float = 1.0
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    quad_tol: float = 1e-10
    quad_subdivisions: Optional[int] = None  # None -> device default
    quad_max_depth: int = 50
    bias_ramp: bool = False
    initial_vs: Optional[np.ndarray] = None
    strict: bool = True

    def __post_init__(self):
        if self.outer_tol <= 0.0:
            raise ValueError("outer tolerance must be positive")
        if self.outer_max_iterations < 1:
            raise ValueError("need at least one outer iteration")
        if not 0.0 < self.mixing <= 1.0:
            raise ValueError("mixing must lie in (0, 1]")


@dataclass
class SelfConsistentResult:
    device_name: str
    scheme: TbcScheme
    bias: float
    grid: Grid
    v_electrostatic: np.ndarray
    v_total: np.ndarray
    density: Optional[DensityProfile]
    current: float
    outer_iterations: int
    converged: bool
    update_history: List[float]
    newton_iterations: List[int]
    depth_warnings: int
    error: Optional[str] = None


def _quadratures(device, thermal, config):
    subdiv = config.quad_subdivisions or device.quad_subdivisions
    k_quad = QuadratureSpec(0.0, thermal.k_max, tol=config.quad_tol,
                            max_depth=config.quad_max_depth,
                            initial_subdivisions=subdiv)
    e_quad = QuadratureSpec(0.0, device.e_cutoff, tol=config.quad_tol,
                            max_depth=config.quad_max_depth,
                            initial_subdivisions=subdiv)
    return k_quad, e_quad


def run_self_consistent(device: DeviceSpec,
                        scheme=TbcScheme.DISCRETE,
                        config: Optional[SelfConsistentConfig] = None
                        ) -> SelfConsistentResult:
    """Solve one device at one bias point.

    Raises the inner solver's errors (annotated with the outer iteration)
    and, when ``config.strict``, :class:`OuterMaxIterations` with the
    non-converged result attached as ``exc.result``.
    """
    if config is None:
        config = SelfConsistentConfig()
    scheme = TbcScheme(scheme)
    grid = Grid(device.length, config.n_cells or device.default_n_cells)
    pf = device.kinetic_prefactor
    thermal = ThermalContext(temperature=device.temperature,
                             fermi_level=device.fermi_level,
                             kinetic_prefactor=pf,
                             bias=config.bias,
                             e_cutoff=device.e_cutoff)
    t_lam = pf * 12.0 / grid.dx**2
    if scheme is TbcScheme.DISCRETE and \
            t_lam <= 2.0 * (device.e_cutoff + abs(config.bias)):
        raise PreconditionViolated(
            f"grid too coarse for the discrete boundary scheme: "
            f"t = {t_lam:.4g} eV must exceed twice the highest kinetic "
            f"energy {device.e_cutoff + abs(config.bias):.4g} eV")
    k_quad, e_quad = _quadratures(device, thermal, config)

    x = grid.nodes()
    v_ext = device.barrier_on(x)
    if device.prescribed or config.bias_ramp:
        v_ext = v_ext + device.ramp_on(x, config.bias)

    if device.prescribed:
        provider = ScatteringProvider(grid, v_ext, pf, scheme)
        density = electron_density(provider, thermal, grid, k_quad)
        current = current_density(provider, thermal, e_quad)
        return SelfConsistentResult(
            device_name=device.name, scheme=scheme, bias=config.bias,
            grid=grid, v_electrostatic=np.zeros(grid.n_nodes),
            v_total=v_ext, density=density, current=current,
            outer_iterations=0, converged=True, update_history=[],
            newton_iterations=[], depth_warnings=density.depth_warnings)

    doping_g = device.doping_on(grid.nodes_ghosted())
    coulomb = CHARGE_SQ_OVER_EPS0 / device.relative_permittivity
    if config.initial_vs is not None:
        v_s = np.asarray(config.initial_vs, dtype=np.float64).copy()
        if v_s.shape != (grid.n_nodes,):
            raise ValueError("initial_vs shape does not match the grid")
    else:
        v_s = np.zeros(grid.n_nodes)

    update_history: List[float] = []
    newton_iterations: List[int] = []
    converged = False
    outer_iterations = config.outer_max_iterations
    for outer in range(1, config.outer_max_iterations + 1):
        provider = ScatteringProvider(grid, v_ext + v_s, pf, scheme)
        density = electron_density(provider, thermal, grid, k_quad)
        predictor = make_gummel_predictor(density, v_s, thermal.kt)
        try:
            state = newton_solve(grid, v_s, doping_g, predictor, coulomb,
                                 config.newton)
        except (MaxIterationsExceeded, QdevError) as exc:
            exc.args = (f"outer iteration {outer}: {exc}",) + exc.args[1:]
            raise
        newton_iterations.append(state.iterations)
        step = config.mixing * (state.potential - v_s)
        v_s = v_s + step
        norm = float(np.max(np.abs(step)))
        update_history.append(norm)
        if norm <= config.outer_tol:
            converged = True
            outer_iterations = outer
            break

    provider = ScatteringProvider(grid, v_ext + v_s, pf, scheme)
    density = electron_density(provider, thermal, grid, k_quad)
    current = current_density(provider, thermal, e_quad)
    result = SelfConsistentResult(
        device_name=device.name, scheme=scheme, bias=config.bias, grid=grid,
        v_electrostatic=v_s, v_total=v_ext + v_s, density=density,
        current=current, outer_iterations=outer_iterations,
        converged=converged, update_history=update_history,
        newton_iterations=newton_iterations,
        depth_warnings=density.depth_warnings)
    if not converged and config.strict:
        exc = OuterMaxIterations(
            f"potential update stalled at {update_history[-1]:.3e} after "
            f"{config.outer_max_iterations} outer iterations "
            f"(tol {config.outer_tol})")
        exc.result = result
        raise exc
    return result


def bias_sweep(device: DeviceSpec, scheme, biases,
               config: Optional[SelfConsistentConfig] = None,
               warm_start: bool = True) -> List[SelfConsistentResult]:
    """Run a sequence of bias points, warm-starting each from the last.

    The carried potential is shifted by the device's linear-ramp increment
    for the bias step before reuse, so the global contact-to-contact drop is
    pre-built and the iteration only resolves the local screening response.
    Without that shift the drop develops at roughly ``mixing`` per iteration,
    which is prohibitively slow for heavily damped devices.  Devices with no
    ramp span (or in ``bias_ramp`` mode, where the drop is external) carry
    the potential unchanged.

    Failures at individual points are recorded on the returned results
    (``converged=False``, ``error`` set, ``current`` NaN when nothing was
    computed) and do not abort the sweep; the warm-start state then carries
    over from the last successful point.
    """
    if config is None:
        config = SelfConsistentConfig()
    scheme = TbcScheme(scheme)
    grid = Grid(device.length, config.n_cells or device.default_n_cells)
    x = grid.nodes()
    shift_ramp = warm_start and not device.prescribed and not config.bias_ramp
    carry = None
    carry_bias: Optional[float] = None   # a user seed has no bias attached
    if config.initial_vs is not None:
        carry = np.asarray(config.initial_vs, dtype=np.float64).copy()

    results: List[SelfConsistentResult] = []
    for bias in biases:
        bias = float(bias)
        init = carry if warm_start else config.initial_vs
        if init is not None and shift_ramp and carry_bias is not None:
            init = init + device.ramp_on(x, bias - carry_bias)
        cfg = replace(config, bias=bias, initial_vs=init)
        try:
            res = run_self_consistent(device, scheme, cfg)
        except QdevError as exc:
            res = getattr(exc, "result", None)
            if res is None:
                nan_v = np.full(grid.n_nodes, np.nan)
                res = SelfConsistentResult(
                    device_name=device.name, scheme=scheme, bias=bias,
                    grid=grid, v_electrostatic=nan_v, v_total=nan_v,
                    density=None, current=float("nan"), outer_iterations=0,
                    converged=False, update_history=[], newton_iterations=[],
                    depth_warnings=0)
            res.error = str(exc)
        results.append(res)
        if warm_start and res.converged:
            carry = res.v_electrostatic.copy()
            carry_bias = bias
    return results
