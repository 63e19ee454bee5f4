"""Open-boundary scattering states of the stationary effective-mass
Schrodinger equation on a finite 1D device.

The interior uses a fourth-order three-point compact discretization.  With
lam = 12/dx^2 and c_j = (V_j - E)/p (p the kinetic prefactor hbar^2/2m*),
row j reads

    (lam - c_{j-1}) psi_{j-1} - (2 lam + 10 c_j) psi_j
        + (lam - c_{j+1}) psi_{j+1} = 0.

A unit-amplitude wave enters from one contact; the two boundary rows close
the system transparently.  Three closures are provided:

``continuous``
    The analytic radiation conditions psi' + i k1 psi = 2 i k1 (inflow) and
    psi' - i k2 psi = 0 (outflow), discretized with the same fourth-order
    accuracy by eliminating the ghost value through the compact relation
    between first and second derivatives at the wall.

``discrete``
    Exact outgoing-mode closure of the *difference* scheme: ghost values are
    matched to the outgoing root alpha of the scheme's own dispersion
    relation, so a free wave is transmitted without any numerical
    reflection.  On an evanescent outflow side the outgoing root is the
    decaying real one, the discrete analogue of the continuum decaying
    exponential.

``plane-wave``
    Ghost values follow exact continuum plane-wave phases e^{i k dx}
    (principal square root, hence decaying exponentials on an evanescent
    side).  Cheap, and asymptotically consistent with the interior order.

All closures assume the potential is flat beyond each contact.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .errors import DegenerateDenominator, PreconditionViolated
from .numerics import BandedComplexSystem, ComplexGridFunction, Grid

__all__ = [
    "TbcScheme",
    "Direction",
    "SchrodingerContext",
    "ScatteringState",
    "dispersion_roots",
    "interior_coefficients",
    "continuous_bc_coefficients",
    "assemble_scattering_system",
    "solve_scattering",
    "solve_right_incidence",
]

_DENOM_TINY = 1e-300


class TbcScheme(str, Enum):
    """Transparent boundary closure flavours."""

    CONTINUOUS = "continuous"
    DISCRETE = "discrete"
    PLANE_WAVE = "plane-wave"


class Direction(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass
class SchrodingerContext:
    """Inputs for one scattering solve.

    potential is the total potential energy (band offsets plus any
    electrostatic part) at the grid nodes, in eV; prefactor is
    hbar^2/(2 m*) in eV nm^2; energy is the total incidence energy in eV.
    """

    grid: Grid
    potential: np.ndarray
    prefactor: float
    energy: float

    def __post_init__(self):
        self.potential = np.asarray(self.potential, dtype=np.float64)
        if self.potential.shape != (self.grid.n_nodes,):
            raise ValueError("potential must have one value per grid node")
        if self.prefactor <= 0.0:
            raise ValueError("kinetic prefactor must be positive")


@dataclass
class ScatteringState:
    """Solution of one scattering problem, ghosts included.

    ``transmission`` is clamped to [0, 1] for downstream integrals;
    ``transmission_raw`` keeps the unclamped 1 - |r|^2 for diagnostics
    (it may leave [0, 1] by the discretization error).
    """

    energy: float
    scheme: TbcScheme
    direction: Direction
    psi: ComplexGridFunction
    reflection: complex
    transmission: float
    transmission_raw: float
    k_in: float
    k_out: complex


# ---------------------------------------------------------------------------
# dispersion relation of the interior scheme
# ---------------------------------------------------------------------------

def dispersion_roots(energy, v_contact, prefactor, dx):
    """Roots alpha of the compact scheme's dispersion relation on a flat
    potential, as the (outgoing, incoming) pair.

    With t = 12 p / dx^2 and ep = E - V, a nodal mode psi_j = alpha^j
    satisfies the interior row iff

        (t + ep) alpha^2 - 2 (t - 5 ep) alpha + (t + ep) = 0.

    For 0 < ep < t/2 both roots sit on the unit circle and alpha_out has
    positive imaginary part (right-moving group velocity); alpha_out then
    equals e^{i k~ dx} with k~ = k + O(dx^4).  For ep < 0 the principal
    square root makes alpha_out the decaying real root (|alpha| < 1), its
    partner the growing one; the product of the pair is always 1.
    """
    t = 12.0 * prefactor / dx**2
    ep = energy - v_contact
    denom = t + ep
    if abs(denom) < _DENOM_TINY:
        raise DegenerateDenominator("dispersion denominator t + (E - V) vanished")
    root = np.sqrt(np.complex128(12.0 * ep * (t - 2.0 * ep)))
    alpha_out = (t - 5.0 * ep + 1j * root) / denom
    alpha_in = (t - 5.0 * ep - 1j * root) / denom
    return complex(alpha_out), complex(alpha_in)


# ---------------------------------------------------------------------------
# row assembly
# ---------------------------------------------------------------------------

def interior_coefficients(ctx):
    """(lower, diag, upper) for the interior rows 1..N-1, in lam-form.

    Boundary rows (0 and N) are left zero; the closure fills them.
    """
    lam = 12.0 / ctx.grid.dx**2
    c = (ctx.potential - ctx.energy) / ctx.prefactor
    n = ctx.grid.n_nodes
    lower = np.zeros(n, dtype=np.complex128)
    diag = np.zeros(n, dtype=np.complex128)
    upper = np.zeros(n, dtype=np.complex128)
    lower[1:-1] = lam - c[:-2]
    diag[1:-1] = -(2.0 * lam + 10.0 * c[1:-1])
    upper[1:-1] = lam - c[2:]
    return lower, diag, upper


def continuous_bc_coefficients(t, energy, v_wall, v_adjacent, k, dx):
    """Inflow-side row of the ``continuous`` closure in t-form.

    Returns (diagonal, off-diagonal, rhs) for the wall node, derived by
    eliminating the ghost value between the compact interior relation and
    the radiation condition psi' + i k psi = 2 i k discretized with the
    scheme's fourth-order one-sided derivative.  The outflow row at the far
    wall is the mirror image with rhs = 0.
    """
    e0 = energy - v_wall
    e1 = energy - v_adjacent
    d0 = t + 2.0 * e0
    if abs(d0) < _DENOM_TINY:
        raise DegenerateDenominator("continuous closure denominator t + 2(E - V) vanished")
    coupling = (t + e0) / d0
    diag = -2.0 * t + 10.0 * e0 + 2.0j * k * t * dx * coupling
    off = t + e1 + (t + 2.0 * e1) * coupling
    rhs = 4.0j * k * t * dx * coupling
    return diag, off, rhs


def _wavenumbers(ctx):
    """(k_in, k_out): real inflow wavenumber, principal-root outflow one."""
    ep_in = ctx.energy - ctx.potential[0]
    ep_out = ctx.energy - ctx.potential[-1]
    k_in = np.sqrt(max(ep_in, 0.0) / ctx.prefactor)
    k_out = np.sqrt(np.complex128(ep_out / ctx.prefactor))
    return float(k_in), complex(k_out)


def _check_preconditions(ctx, scheme):
    ep_in = ctx.energy - ctx.potential[0]
    ep_out = ctx.energy - ctx.potential[-1]
    if ep_in < 0.0:
        raise PreconditionViolated(
            f"incidence energy {ctx.energy} below the inflow contact potential "
            f"{ctx.potential[0]}: no propagating injected mode"
        )
    if scheme is TbcScheme.DISCRETE:
        t = 12.0 * ctx.prefactor / ctx.grid.dx**2
        if t <= 2.0 * ep_in or t <= 2.0 * ep_out:
            raise PreconditionViolated(
                f"grid too coarse for E = {ctx.energy}: need t > 2(E - V) at "
                f"both contacts, t = {t}"
            )


def _closure_rows(scheme, ctx, lam, c):
    """gamma/delta ghost relations and the resulting boundary rows.

    Every closure can be written as psi_{-1} = gamma_l psi_0 + delta_l and
    psi_{N+1} = gamma_r psi_N (the transmitted side is source-free), which
    turns the interior row at each wall into the boundary row

        [gamma (lam - c_wall) - (2 lam + 10 c_wall)] psi_wall
            + (lam - c_adj) psi_adj = -delta (lam - c_wall).

    The ``continuous`` closure does not fit this mould; it carries its own
    rows in t-form, rescaled by 1/p for consistent magnitudes.
    """
    k_in, k_out = _wavenumbers(ctx)
    if scheme is TbcScheme.CONTINUOUS:
        t = ctx.prefactor * lam
        dx = ctx.grid.dx
        d0, o0, r0 = continuous_bc_coefficients(
            t, ctx.energy, ctx.potential[0], ctx.potential[1], k_in, dx)
        dn, on, rn = continuous_bc_coefficients(
            t, ctx.energy, ctx.potential[-1], ctx.potential[-2], k_out, dx)
        p = ctx.prefactor
        rows = (d0 / p, o0 / p, r0 / p, dn / p, on / p, 0.0)
        aux = {"k_in": k_in, "k_out": k_out}
        return rows, aux

    if scheme is TbcScheme.DISCRETE:
        gamma_l, alpha_in = dispersion_roots(
            ctx.energy, ctx.potential[0], ctx.prefactor, ctx.grid.dx)
        gamma_r, _ = dispersion_roots(
            ctx.energy, ctx.potential[-1], ctx.prefactor, ctx.grid.dx)
        delta_l = 1.0 / gamma_l - gamma_l
        aux = {"k_in": k_in, "k_out": k_out,
               "gamma_l": gamma_l, "gamma_r": gamma_r}
    elif scheme is TbcScheme.PLANE_WAVE:
        dx = ctx.grid.dx
        gamma_l = np.exp(1j * k_in * dx)
        gamma_r = np.exp(1j * k_out * dx)
        delta_l = -2j * np.sin(k_in * dx)
        aux = {"k_in": k_in, "k_out": k_out,
               "gamma_l": gamma_l, "gamma_r": gamma_r}
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown scheme {scheme!r}")

    w0 = lam - c[0]
    wn = lam - c[-1]
    rows = (gamma_l * w0 - (2.0 * lam + 10.0 * c[0]), lam - c[1], -delta_l * w0,
            gamma_r * wn - (2.0 * lam + 10.0 * c[-1]), lam - c[-2], 0.0)
    return rows, aux


def _assemble(ctx, scheme):
    _check_preconditions(ctx, scheme)
    lam = 12.0 / ctx.grid.dx**2
    c = (ctx.potential - ctx.energy) / ctx.prefactor
    lower, diag, upper = interior_coefficients(ctx)
    rhs = np.zeros(ctx.grid.n_nodes, dtype=np.complex128)
    (d0, o0, r0, dn, on, rn), aux = _closure_rows(scheme, ctx, lam, c)
    diag[0], upper[0], rhs[0] = d0, o0, r0
    diag[-1], lower[-1], rhs[-1] = dn, on, rn
    aux["lam"] = lam
    aux["c"] = c
    return lower, diag, upper, rhs, aux


def assemble_scattering_system(ctx, scheme):
    """Closed (N+1)-node system as (BandedComplexSystem, rhs, aux).

    ``aux`` carries the wavenumbers and ghost-relation factors needed to
    reconstruct ghost values from a solution.
    """
    lower, diag, upper, rhs, aux = _assemble(ctx, scheme)
    return BandedComplexSystem.from_tridiagonal(lower, diag, upper), rhs, aux


# ---------------------------------------------------------------------------
# ghost reconstruction
# ---------------------------------------------------------------------------

def _ghosts(scheme, psi, aux, ctx, n_ghost):
    """Ghost values psi_{-j} and psi_{N+j}, j = 1..n_ghost."""
    left = np.empty(n_ghost, dtype=np.complex128)
    right = np.empty(n_ghost, dtype=np.complex128)
    if scheme is TbcScheme.CONTINUOUS:
        # extend by the interior recursion with the contact potential
        lam, c = aux["lam"], aux["c"]
        w0, wn = lam - c[0], lam - c[-1]
        if min(abs(w0), abs(wn)) < _DENOM_TINY:
            raise DegenerateDenominator("ghost recursion weight lam - c vanished")
        prev_l, cur_l = psi[1], psi[0]
        prev_r, cur_r = psi[-2], psi[-1]
        for j in range(n_ghost):
            nxt_l = ((2.0 * lam + 10.0 * c[0]) * cur_l - (lam - c[1] if j == 0 else w0) * prev_l) / w0
            nxt_r = ((2.0 * lam + 10.0 * c[-1]) * cur_r - (lam - c[-2] if j == 0 else wn) * prev_r) / wn
            left[j], right[j] = nxt_l, nxt_r
            prev_l, cur_l = cur_l, nxt_l
            prev_r, cur_r = cur_r, nxt_r
    elif scheme is TbcScheme.DISCRETE:
        alpha, beta = aux["gamma_l"], aux["gamma_r"]
        refl = psi[0] - 1.0
        j = np.arange(1, n_ghost + 1)
        left[:] = refl * alpha**j + alpha**(-j.astype(float))
        right[:] = psi[-1] * beta**j
    else:  # plane-wave
        k_in, k_out = aux["k_in"], aux["k_out"]
        dx = ctx.grid.dx
        j = np.arange(1, n_ghost + 1)
        left[:] = np.exp(1j * k_in * j * dx) * psi[0] - 2j * np.sin(k_in * j * dx)
        right[:] = np.exp(1j * k_out * j * dx) * psi[-1]
    # ghost arrays are ordered by increasing node index: [-n_ghost .. -1]
    return left[::-1].copy(), right


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def solve_scattering(ctx, scheme, direction=Direction.LEFT, n_ghost=1):
    """Solve one scattering problem and return the full state.

    Right incidence reuses the left-incidence machinery on the mirrored
    potential and un-mirrors the result (ghosts included), so both
    directions share one code path.  The reflection amplitude is
    r = psi(injection contact) - 1 and the transmitted fraction is
    T = 1 - |r|^2 on a propagating outflow side, 0 on an evanescent one.
    """
    scheme = TbcScheme(scheme)
    direction = Direction(direction)
    if direction is Direction.RIGHT:
        mirrored = SchrodingerContext(
            ctx.grid, ctx.potential[::-1].copy(), ctx.prefactor, ctx.energy)
        state = solve_scattering(mirrored, scheme, Direction.LEFT, n_ghost)
        psi = ComplexGridFunction(
            state.psi.values[::-1].copy(),
            ghosts_left=state.psi.ghosts_right[::-1].copy(),
            ghosts_right=state.psi.ghosts_left[::-1].copy(),
        )
        return ScatteringState(
            energy=ctx.energy, scheme=scheme, direction=direction, psi=psi,
            reflection=state.reflection, transmission=state.transmission,
            transmission_raw=state.transmission_raw,
            k_in=state.k_in, k_out=state.k_out)

    lower, diag, upper, rhs, aux = _assemble(ctx, scheme)
    psi = kernels.tridiag_solve(lower, diag, upper, rhs)
    gl, gr = _ghosts(scheme, psi, aux, ctx, n_ghost)
    refl = complex(psi[0] - 1.0)
    ep_out = ctx.energy - ctx.potential[-1]
    raw = 1.0 - abs(refl) ** 2 if ep_out > 0.0 else 0.0
    return ScatteringState(
        energy=ctx.energy, scheme=scheme, direction=direction,
        psi=ComplexGridFunction(psi, ghosts_left=gl, ghosts_right=gr),
        reflection=refl, transmission=min(max(raw, 0.0), 1.0),
        transmission_raw=raw,
        k_in=aux["k_in"], k_out=aux["k_out"])


def solve_right_incidence(ctx, scheme, n_ghost=1):
    """Scattering state injected from the right contact (mirrored solve)."""
    return solve_scattering(ctx, scheme, Direction.RIGHT, n_ghost)
