"""Solver backend selection: compiled tridiagonal kernel with SciPy fallback.

The compiled extension (:mod:`qdev1d._tridiag`) implements banded LU with
partial pivoting specialised to complex tridiagonal systems — the inner loop
of every scattering solve.  When it is unavailable (or disabled via the
``QDEV_KERNEL`` environment variable) solves route through
``scipy.linalg.solve_banded``, which calls LAPACK's general banded driver of
the same algorithm family.

``QDEV_KERNEL`` accepts ``auto`` (default), ``compiled`` (require the
extension, raise if missing) and ``python`` (force the fallback).
"""

import os

import numpy as np
from scipy.linalg import LinAlgError
from scipy.linalg import solve_banded as _scipy_solve_banded

from .errors import SingularSystem

#: Relative pivot-magnitude threshold for the compiled path.
PIVOT_RTOL = 1e-14

_choice = os.environ.get("QDEV_KERNEL", "auto").strip().lower()
if _choice not in ("auto", "compiled", "python"):
    raise ValueError(f"QDEV_KERNEL must be auto|compiled|python, got {_choice!r}")

_compiled = None
if _choice in ("auto", "compiled"):
    try:
        from . import _tridiag as _compiled
    except ImportError:
        if _choice == "compiled":
            raise
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def tridiag_solve_compiled(lower, diag, upper, rhs):
    """Solve via the Cython kernel.  Inputs are copied, not mutated."""
    if _compiled is None:
        raise RuntimeError("compiled kernel unavailable")
    n = diag.shape[0]
    lo = np.array(lower, dtype=np.complex128)
    di = np.array(diag, dtype=np.complex128)
    up = np.array(upper, dtype=np.complex128)
    x = np.array(rhs, dtype=np.complex128)
    work = np.empty(n, dtype=np.complex128)
    info = _compiled.factor_solve(lo, di, up, x, work, PIVOT_RTOL)
    if info != 0:
        raise SingularSystem(f"pivot below threshold at row {info} of {n}")
    return x


def tridiag_solve_python(lower, diag, upper, rhs):
    """Solve via LAPACK's banded driver (scipy.linalg.solve_banded).

    LAPACK pivots internally and errors out only on exactly zero pivots, so
    near-singular systems are caught by a finiteness check on the solution
    instead of a pivot threshold.
    """
    n = len(diag)
    ab = np.zeros((3, n), dtype=np.complex128)
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    try:
        x = _scipy_solve_banded((1, 1), ab, rhs)
    except (LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(x.view(np.float64))):
        raise SingularSystem("non-finite solution from banded solve")
    return x


if BACKEND == "compiled":
    tridiag_solve = tridiag_solve_compiled
else:
    tridiag_solve = tridiag_solve_python


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return tuple(names)


def solver_for(backend):
    """Return the named solver callable (used by tests and the benchmark)."""
    if backend == "compiled":
        return tridiag_solve_compiled
    if backend == "python":
        return tridiag_solve_python
    raise ValueError(f"unknown backend {backend!r}")
