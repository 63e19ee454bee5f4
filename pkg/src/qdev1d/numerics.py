"""Shared numerical infrastructure: grids, banded solves, adaptive quadrature,
and the discrete summation-by-parts residual used to sanity-check the
second-difference operator with ghost nodes.
"""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DepthExceeded, SingularSystem

__all__ = [
    "Grid",
    "ComplexGridFunction",
    "BandedComplexSystem",
    "QuadratureSpec",
    "solve_banded",
    "adaptive_simpson",
    "sbp_identity_parts",
    "sbp_identity_residual",
    "SbpParts",
]


# ---------------------------------------------------------------------------
# grids and grid functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform 1D grid on [0, length] with ``n_cells`` intervals.

    Node i sits at i * dx for i = 0 .. n_cells; ghost nodes extend the same
    spacing beyond both ends.
    """

    length: float
    n_cells: int

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("grid length must be positive")
        if self.n_cells < 2:
            raise ValueError("grid needs at least 2 cells")

    @property
    def dx(self):
        return self.length / self.n_cells

    @property
    def n_nodes(self):
        return self.n_cells + 1

    def nodes(self):
        return np.linspace(0.0, self.length, self.n_cells + 1)

    def nodes_ghosted(self, n_ghost=1):
        """Node coordinates extended by ``n_ghost`` ghost nodes on each side."""
        dx = self.dx
        left = -dx * np.arange(n_ghost, 0, -1)
        right = self.length + dx * np.arange(1, n_ghost + 1)
        return np.concatenate([left, self.nodes(), right])


@dataclass
class ComplexGridFunction:
    """Complex nodal values plus ghost values beyond each boundary."""

    values: np.ndarray
    ghosts_left: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    ghosts_right: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))

    def ghosted(self):
        """Values on [-L_ghost .. n_cells + R_ghost] as one array."""
        return np.concatenate([self.ghosts_left, self.values, self.ghosts_right])


# ---------------------------------------------------------------------------
# banded linear systems
# ---------------------------------------------------------------------------

@dataclass
class BandedComplexSystem:
    """Complex banded matrix in LAPACK band storage.

    ``bands`` has shape (lower + upper + 1, n); row u - j of ``bands`` holds
    diagonal j (j = upper for the main diagonal), column k holds matrix
    column k, i.e. ``bands[upper + i - k, k] = A[i, k]``.
    """

    bands: np.ndarray
    lower: int
    upper: int

    def __post_init__(self):
        self.bands = np.asarray(self.bands, dtype=np.complex128)
        if self.bands.ndim != 2:
            raise ValueError("bands must be 2-D")
        if self.bands.shape[0] != self.lower + self.upper + 1:
            raise ValueError("band storage height must equal lower + upper + 1")

    @property
    def size(self):
        return self.bands.shape[1]

    @classmethod
    def from_tridiagonal(cls, lower, diag, upper):
        """Build from the three diagonals (lower[0] and upper[-1] ignored)."""
        n = len(diag)
        ab = np.zeros((3, n), dtype=np.complex128)
        ab[0, 1:] = upper[:-1]
        ab[1, :] = diag
        ab[2, :-1] = lower[1:]
        return cls(ab, 1, 1)

    def todense(self):
        n = self.size
        a = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            for k in range(max(0, i - self.lower), min(n, i + self.upper + 1)):
                a[i, k] = self.bands[self.upper + i - k, k]
        return a


def solve_banded(system, rhs):
    """Solve ``system @ x = rhs`` with partial pivoting.

    Tridiagonal systems go through the selected kernel backend; wider bands
    use LAPACK's general banded driver.  Raises :class:`SingularSystem` when
    a pivot collapses or the solution is non-finite.
    """
    rhs = np.asarray(rhs, dtype=np.complex128)
    if rhs.shape != (system.size,):
        raise ValueError("rhs length does not match system size")
    if (system.lower, system.upper) == (1, 1):
        n = system.size
        diag = system.bands[1].copy()
        upper = np.zeros(n, dtype=np.complex128)
        lower = np.zeros(n, dtype=np.complex128)
        upper[: n - 1] = system.bands[0, 1:]
        lower[1:] = system.bands[2, : n - 1]
        return kernels.tridiag_solve(lower, diag, upper, rhs)
    from scipy.linalg import LinAlgError
    from scipy.linalg import solve_banded as _scipy_solve_banded

    try:
        x = _scipy_solve_banded((system.lower, system.upper), system.bands, rhs)
    except (LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(x.view(np.float64))):
        raise SingularSystem("non-finite solution from banded solve")
    return x


# ---------------------------------------------------------------------------
# adaptive Simpson quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Interval, absolute tolerance and recursion limits for adaptive Simpson.

    ``initial_subdivisions`` seeds the recursion with that many uniform
    panels before any adaptivity, so features much narrower than the full
    interval (sharp resonances) cannot slip between the first probe points.
    """

    lower: float
    upper: float
    tol: float = 1e-10
    max_depth: int = 50
    initial_subdivisions: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("quadrature endpoints must be finite")
        if self.upper < self.lower:
            raise ValueError("upper endpoint below lower endpoint")
        if self.tol <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.initial_subdivisions < 1:
            raise ValueError("initial_subdivisions must be at least 1")


def _simpson(a, b, fa, fm, fb):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(fun, spec):
    """Integrate ``fun`` over ``[spec.lower, spec.upper]``.

    ``fun`` may return a scalar or an ndarray (all components share the same
    panel subdivision; the tolerance applies to the worst component).  The
    classic |S_fine - S_coarse| / 15 estimate drives refinement, with the
    panel budget halving on each split.  Hitting the depth cap issues a
    :class:`DepthExceeded` warning and keeps the Richardson-corrected value.
    Non-finite integrand values raise ``ValueError``.
    """
    if spec.upper == spec.lower:
        return np.asarray(fun(spec.lower)) * 0.0

    depth_hits = [0]

    def feval(x):
        y = np.asarray(fun(x))
        if not np.all(np.isfinite(y)):
            raise ValueError(f"non-finite integrand value at x={x!r}")
        return y

    # first evaluation decides scalar vs vector mode
    y0 = feval(spec.lower)
    scalar_mode = y0.ndim == 0

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        mid = 0.5 * (a + b)
        lm = 0.5 * (a + mid)
        rm = 0.5 * (mid + b)
        flm = feval(lm)
        frm = feval(rm)
        left = _simpson(a, mid, fa, flm, fm)
        right = _simpson(mid, b, fm, frm, fb)
        err = (left + right - whole) / 15.0
        if np.max(np.abs(err)) <= tol:
            return left + right + err
        if depth <= 0:
            depth_hits[0] += 1
            return left + right + err
        return (recurse(a, mid, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(mid, b, fm, frm, fb, right, 0.5 * tol, depth - 1))

    m = spec.initial_subdivisions
    edges = np.linspace(spec.lower, spec.upper, m + 1)
    panel_tol = spec.tol / m
    total = None
    f_right = y0
    for p in range(m):
        a, b = edges[p], edges[p + 1]
        fa = f_right
        fm = feval(0.5 * (a + b))
        fb = feval(b)
        whole = _simpson(a, b, fa, fm, fb)
        part = recurse(a, b, fa, fm, fb, whole, panel_tol, spec.max_depth)
        total = part if total is None else total + part
        f_right = fb

    if depth_hits[0]:
        warnings.warn(
            f"adaptive quadrature hit depth cap {spec.max_depth} on "
            f"{depth_hits[0]} panel(s); returning best estimate",
            DepthExceeded,
            stacklevel=2,
        )
    if scalar_mode:
        return complex(total) if np.iscomplexobj(total) else float(total)
    return total


# ---------------------------------------------------------------------------
# summation-by-parts residual
# ---------------------------------------------------------------------------

class SbpParts(NamedTuple):
    lhs: complex
    rhs: complex
    residual: complex


def sbp_identity_parts(u, v, dx):
    """Both sides of the summation-by-parts identity, for scale estimates.

    ``u`` and ``v`` hold nodal values on -1 .. N+1 (two ghost nodes included,
    so length N+3 for N+1 main nodes).  Evaluates, bilinearly (no
    conjugation),

        -dx * sum_{i=0}^{N} (d2 u)_i v_i
            = dx * sum_{i=0}^{N+1} (du)_{i-1/2} (dv)_{i-1/2}
              + (D+ u_{-1}) v_{-1} - (D- u_{N+1}) v_{N+1}

    and returns (lhs, rhs, lhs - rhs).
    """
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != v.shape or u.ndim != 1 or u.size < 4:
        raise ValueError("u and v must be equal-length 1-D arrays of size >= 4")
    d2u = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / dx**2
    lhs = -dx * np.sum(d2u * v[1:-1])
    du = np.diff(u) / dx
    dv = np.diff(v) / dx
    rhs = dx * np.sum(du * dv) + du[0] * v[0] - du[-1] * v[-1]
    return SbpParts(complex(lhs), complex(rhs), complex(lhs - rhs))


def sbp_identity_residual(u, v, dx):
    """|LHS - RHS| of the summation-by-parts identity (machine zero for any
    pair of grid functions; tests exploit that as an assembly oracle)."""
    return abs(sbp_identity_parts(u, v, dx).residual)
