"""Device descriptions: piecewise-constant material profiles, the smoothing
kernel used to regularize abrupt junctions, and the DeviceSpec container the
self-consistent driver consumes.

Profiles are defined on [0, L] in nm with values in eV (band edges, applied
ramps) or nm^-3 (doping).  Sampling a piecewise-constant profile exactly on a
breakpoint returns the mean of the one-sided limits; this edge-averaged rule
keeps composite quadratures of the sampled values second-order accurate
instead of first.
"""

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .constants import HBAR2_OVER_2M0
from .numerics import QuadratureSpec, adaptive_simpson

__all__ = [
    "PiecewiseProfile",
    "DeviceSpec",
    "mollifier",
    "MOLLIFIER_SUPPORT",
    "mollify_profile",
    "linear_ramp",
]

# exp(-35) ~ 6e-16: the kernel is numerically zero past |s| = 7
MOLLIFIER_SUPPORT = 7.0

_EDGE_EPS = 1e-9  # nm; offset used to probe one-sided limits at breakpoints


def mollifier(s):
    """Smoothing kernel 5 e^{5s} / (1 + e^{5s})^2 = (5/4) sech^2(5s/2).

    Even, positive, unit mass, peak value 5/4 at s = 0.  Written in a form
    that cannot overflow for large |s|.
    """
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    inside = np.abs(s) <= MOLLIFIER_SUPPORT + 1.0
    a = np.exp(-5.0 * np.abs(s[inside]))
    out[inside] = 5.0 * a / (1.0 + a) ** 2
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PiecewiseProfile:
    """Piecewise-constant function of position on [0, length].

    ``breakpoints`` are the interior jump locations (strictly increasing,
    inside (0, length)); ``values`` has one entry per region, i.e.
    len(breakpoints) + 1.
    """

    length: float
    breakpoints: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("profile length must be positive")
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if len(vals) != len(bp) + 1:
            raise ValueError(
                f"need {len(bp) + 1} region values for {len(bp)} breakpoints,"
                f" got {len(vals)}")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if bp and (bp[0] <= 0.0 or bp[-1] >= self.length):
            raise ValueError("breakpoints must lie strictly inside (0, L)")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_regions(cls, regions: Sequence[Tuple[float, float, float]],
                     length: Optional[float] = None):
        """Build from (start, stop, value) triples that tile [0, L]."""
        regions = sorted(regions)
        if not regions:
            raise ValueError("at least one region required")
        if length is None:
            length = regions[-1][1]
        if abs(regions[0][0]) > 1e-12:
            raise ValueError("regions must start at x = 0")
        for (a0, b0, _), (a1, _, _) in zip(regions, regions[1:]):
            if abs(b0 - a1) > 1e-12:
                raise ValueError(f"regions not contiguous at x = {b0}")
        if abs(regions[-1][1] - length) > 1e-12:
            raise ValueError("regions must end at x = length")
        return cls(length=length,
                   breakpoints=tuple(b for _, b, _ in regions[:-1]),
                   values=tuple(v for _, _, v in regions))

    def _region_value(self, x):
        """Value at x with half-open [b_i, b_{i+1}) regions."""
        idx = np.searchsorted(self.breakpoints, x, side="right")
        return np.asarray(self.values)[idx]

    def __call__(self, x):
        """Edge-averaged sample: mean of one-sided limits at breakpoints."""
        x = np.clip(np.asarray(x, dtype=np.float64), 0.0, self.length)
        left = self._region_value(np.clip(x - _EDGE_EPS, 0.0, self.length))
        right = self._region_value(np.clip(x + _EDGE_EPS, 0.0, self.length))
        out = 0.5 * (left + right)
        if out.ndim == 0:
            return float(out)
        return out

    def shifted(self, delta: float) -> "PiecewiseProfile":
        return replace(self, values=tuple(v + delta for v in self.values))


def _kernel_cdf(s: np.ndarray) -> np.ndarray:
    """Antiderivative of the smoothing kernel: the logistic 1/(1 + e^{-5s}).

    Evaluated through exp(-5|s|) on both branches so neither overflows.
    """
    s = np.asarray(s, dtype=np.float64)
    a = np.exp(-5.0 * np.abs(s))
    return np.where(s >= 0.0, 1.0 / (1.0 + a), a / (1.0 + a))


def mollify_profile(profile: Callable[[np.ndarray], np.ndarray],
                    x: np.ndarray,
                    length: float,
                    tol: float = 1e-10) -> np.ndarray:
    """Convolve a profile with the smoothing kernel at the points ``x``.

    For a piecewise-constant profile the convolution has a closed form: the
    profile is a sum of steps, and each step convolves to the kernel's
    antiderivative, so (phi * p)(x) = v_0 + sum_j (v_j - v_{j-1})
    Lambda(x - b_j) with Lambda the logistic above.  Other profiles fall back
    to a vector-valued adaptive quadrature of phi(s) p(x - s) over the
    kernel's numerical support, with the profile extended constantly outside
    [0, length] (the profile itself is expected to clamp its argument).
    """
    x = np.asarray(x, dtype=np.float64)
    if isinstance(profile, PiecewiseProfile):
        out = np.full_like(x, profile.values[0])
        for b, lo, hi in zip(profile.breakpoints, profile.values,
                             profile.values[1:]):
            out += (hi - lo) * _kernel_cdf(x - b)
        return out

    def integrand(s):
        return mollifier(s) * np.asarray(profile(x - s), dtype=np.float64)

    spec = QuadratureSpec(lower=-MOLLIFIER_SUPPORT, upper=MOLLIFIER_SUPPORT,
                          tol=tol, initial_subdivisions=16)
    return adaptive_simpson(integrand, spec)


def linear_ramp(length: float, span: Tuple[float, float],
                drop: float) -> Callable[[np.ndarray], np.ndarray]:
    """Potential-energy ramp: 0 before the span, -drop after, linear inside.

    ``drop`` is the applied bias in volts; the returned profile is the
    electron potential energy in eV (positive bias lowers the right side).
    """
    x0, x1 = span
    if not (0.0 <= x0 < x1 <= length):
        raise ValueError("ramp span must satisfy 0 <= x0 < x1 <= length")

    def ramp(x):
        x = np.asarray(x, dtype=np.float64)
        frac = np.clip((x - x0) / (x1 - x0), 0.0, 1.0)
        out = -drop * frac
        if out.ndim == 0:
            return float(out)
        return out

    return ramp


@dataclass(frozen=True)
class DeviceSpec:
    """Everything the solvers need to know about one device.

    Lengths in nm, energies in eV, densities in nm^-3.  ``barrier`` is the
    heterostructure band-edge offset profile (zero for homogeneous devices);
    ``doping`` the donor concentration.  ``prescribed`` devices skip the
    Poisson coupling entirely and use the fixed ``ramp_span`` linear drop for
    applied bias; self-consistent devices get their bias through the contact
    Fermi levels instead.
    """

    name: str
    length: float
    mass_ratio: float
    relative_permittivity: float
    fermi_level: float
    temperature: float
    doping: PiecewiseProfile
    barrier: Optional[PiecewiseProfile] = None
    default_n_cells: int = 100
    e_cutoff: float = 0.8
    prescribed: bool = False
    ramp_span: Optional[Tuple[float, float]] = None
    mollify_doping: bool = True
    mollify_barrier: bool = False
    quad_subdivisions: int = 64
    prefactor_override: Optional[float] = None
    default_scheme: str = "discrete"

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("device length must be positive")
        if self.mass_ratio <= 0.0:
            raise ValueError("mass ratio must be positive")
        if self.relative_permittivity <= 0.0:
            raise ValueError("relative permittivity must be positive")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if abs(self.doping.length - self.length) > 1e-12:
            raise ValueError("doping profile length differs from device")
        if self.barrier is not None and \
                abs(self.barrier.length - self.length) > 1e-12:
            raise ValueError("barrier profile length differs from device")
        if self.prescribed and self.ramp_span is None:
            raise ValueError("prescribed devices need a ramp_span")

    @property
    def kinetic_prefactor(self) -> float:
        if self.prefactor_override is not None:
            return self.prefactor_override
        return HBAR2_OVER_2M0 / self.mass_ratio

    def barrier_on(self, x: np.ndarray, smooth: Optional[bool] = None,
                   tol: float = 1e-10) -> np.ndarray:
        if self.barrier is None:
            return np.zeros_like(np.asarray(x, dtype=np.float64))
        if smooth is None:
            smooth = self.mollify_barrier
        if smooth:
            return mollify_profile(self.barrier, x, self.length, tol=tol)
        return np.asarray(self.barrier(x), dtype=np.float64)

    def doping_on(self, x: np.ndarray, smooth: Optional[bool] = None,
                  tol: float = 1e-10) -> np.ndarray:
        if smooth is None:
            smooth = self.mollify_doping
        if smooth:
            return mollify_profile(self.doping, x, self.length, tol=tol)
        return np.asarray(self.doping(x), dtype=np.float64)

    def ramp_on(self, x: np.ndarray, bias: float) -> np.ndarray:
        if self.ramp_span is None or bias == 0.0:
            return np.zeros_like(np.asarray(x, dtype=np.float64))
        return np.asarray(
            linear_ramp(self.length, self.ramp_span, bias)(x),
            dtype=np.float64)
