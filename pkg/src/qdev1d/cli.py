"""Command-line front end: TOML configs in, deterministic CSV/JSON out.

Config layout (all tables optional except [run] / [run.device]):

    [run]
    scheme = "discrete"            # continuous | discrete | plane-wave
    n_cells = 270                  # default: device preset value

    [run.device]
    preset = "rtd_b"               # or inline fields, see below

    [run.bias]
    start = 0.0                    # volts; or: values = [0.0, 0.02]
    stop = 0.4
    step = 0.02

    [run.quadrature]               # tol, subdivisions, max_depth
    [run.outer]                    # tol, max_iterations, mixing,
                                   # bias_ramp, strict
    [run.newton]                   # tol, max_iterations, damping,
                                   # damping_floor
    [run.output]                   # directory, emit_iv, emit_profiles,
                                   # emit_transmission, emit_convergence,
                                   # transmission_points
    [study]                        # grids, reference, energy_eV, bias,
                                   # scheme

Inline devices replace ``preset`` with explicit fields (lab units):
name, length_nm, mass_ratio, relative_permittivity, fermi_level_eV,
temperature_K, plus [[run.device.doping_regions]] tables with
start_nm/stop_nm/density_cm3 and optional [[run.device.barrier_regions]]
with start_nm/stop_nm/height_eV.

Outputs are byte-identical across reruns with the same config on the same
build: floats are written in shortest round-trip form and summary.json has
sorted keys and no timestamps.  Errors are reported as one JSON object on
stdout; exit status 2 flags config problems, 1 runtime failures.
"""

import argparse
import json
import math
import os
import re
import sys

try:
    import tomllib
except ModuleNotFoundError:                         # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass, replace
from typing import List, Optional, Union

import numpy as np

from . import kernels
from .devices import DeviceSpec, PiecewiseProfile
from .errors import ParseError, QdevError, UnknownPreset, ValidationError
from .experiments import (DEFAULT_BIAS_SWEEPS, build_preset,
                          convergence_study, list_presets, per_cm3,
                          transmission_curve)
from .numerics import Grid
from .poisson import NewtonConfig
from .schrodinger import TbcScheme
from .selfconsistent import SelfConsistentConfig, bias_sweep

__all__ = [
    "RunConfig",
    "StudyConfig",
    "parse_config",
    "device_to_table",
    "effective_config",
    "run_command",
    "study_command",
    "main",
]

_SCHEME_TOKENS = {
    "continuous": TbcScheme.CONTINUOUS,
    "discrete": TbcScheme.DISCRETE,
    "plane-wave": TbcScheme.PLANE_WAVE,
    "plane_wave": TbcScheme.PLANE_WAVE,
}


@dataclass
class StudyConfig:
    grids: List[int]
    reference: Union[str, int] = "auto"
    energy: Optional[float] = None
    bias: float = 0.0
    scheme: Optional[TbcScheme] = None


@dataclass
class RunConfig:
    device: DeviceSpec
    scheme: TbcScheme
    n_cells: int
    biases: List[float]
    quad_tol: float = 1e-10
    quad_subdivisions: Optional[int] = None
    quad_max_depth: int = 50
    outer_tol: float = 1e-10
    outer_max_iterations: int = 200
    mixing: float = 1.0
    bias_ramp: bool = False
    strict: bool = True
    newton_tol: float = 1e-10
    newton_max_iterations: int = 100
    newton_damping: float = 1.0
    newton_damping_floor: float = 1.0 / 64.0
    output_dir: str = "qdev-out"
    emit_iv: bool = True
    emit_profiles: bool = True
    emit_transmission: bool = False
    emit_convergence: bool = False
    transmission_points: int = 2001
    study: Optional[StudyConfig] = None

    def solver_config(self, bias: float = 0.0) -> SelfConsistentConfig:
        newton = NewtonConfig(tol=self.newton_tol,
                              max_iterations=self.newton_max_iterations,
                              damping=self.newton_damping,
                              damping_floor=self.newton_damping_floor)
        return SelfConsistentConfig(
            bias=bias, n_cells=self.n_cells, outer_tol=self.outer_tol,
            outer_max_iterations=self.outer_max_iterations,
            mixing=self.mixing, newton=newton, quad_tol=self.quad_tol,
            quad_subdivisions=self.quad_subdivisions,
            quad_max_depth=self.quad_max_depth, bias_ramp=self.bias_ramp,
            strict=self.strict)


# --------------------------------------------------------------------------
# parsing helpers

def _fail(path: str, message: str):
    raise ValidationError(f"{path}: {message}", field=path)


def _check_keys(table: dict, allowed, path: str):
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        _fail(f"{path}.{unknown[0]}" if path else unknown[0],
              f"unknown key(s): {', '.join(unknown)}")


def _table(parent: dict, key: str, path: str, required: bool = False) -> dict:
    if key not in parent:
        if required:
            _fail(f"{path}.{key}" if path else key,
                  f"missing [{f'{path}.{key}' if path else key}] section")
        return {}
    value = parent[key]
    if not isinstance(value, dict):
        _fail(f"{path}.{key}" if path else key, "expected a table")
    return value


def _typed(table: dict, key: str, kinds, path: str, default=None,
           required: bool = False):
    if key not in table:
        if required:
            _fail(f"{path}.{key}", "missing required key")
        return default
    value = table[key]
    if isinstance(value, bool) and bool not in (
            kinds if isinstance(kinds, tuple) else (kinds,)):
        _fail(f"{path}.{key}", f"expected {kinds}, got a boolean")
    if not isinstance(value, kinds):
        kname = getattr(kinds, "__name__", str(kinds))
        _fail(f"{path}.{key}", f"expected {kname}, got {type(value).__name__}")
    return value


def _number(table, key, path, default=None, required=False, minimum=None,
            strict_min=None):
    value = _typed(table, key, (int, float), path, default, required)
    if value is None:
        return None
    value = float(value)
    if minimum is not None and value < minimum:
        _fail(f"{path}.{key}", f"must be >= {minimum}, got {value}")
    if strict_min is not None and value <= strict_min:
        _fail(f"{path}.{key}", f"must be > {strict_min}, got {value}")
    return value


def _integer(table, key, path, default=None, required=False, minimum=None):
    value = _typed(table, key, int, path, default, required)
    if value is None:
        return None
    if minimum is not None and value < minimum:
        _fail(f"{path}.{key}", f"must be >= {minimum}, got {value}")
    return int(value)


def _boolean(table, key, path, default=None):
    return _typed(table, key, bool, path, default)


def _string(table, key, path, default=None, required=False):
    return _typed(table, key, str, path, default, required)


def _scheme(token: str, path: str) -> TbcScheme:
    try:
        return _SCHEME_TOKENS[token.strip().lower()]
    except KeyError:
        _fail(path, f"unknown scheme {token!r}; choose one of "
                    f"{sorted(set(_SCHEME_TOKENS) - {'plane_wave'})}")


def _regions(tables, path, value_key):
    out = []
    for i, tab in enumerate(tables):
        rpath = f"{path}[{i}]"
        if not isinstance(tab, dict):
            _fail(rpath, "expected a table")
        _check_keys(tab, {"start_nm", "stop_nm", value_key}, rpath)
        start = _number(tab, "start_nm", rpath, required=True, minimum=0.0)
        stop = _number(tab, "stop_nm", rpath, required=True)
        value = _number(tab, value_key, rpath, required=True)
        out.append((start, stop, value))
    return out


def _profile_from_regions(triples, length, path, nonnegative):
    if nonnegative and any(v < 0.0 for _, _, v in triples):
        _fail(path, "region values must be >= 0")
    try:
        return PiecewiseProfile.from_regions(
            [(a, b, v) for a, b, v in triples], length=length)
    except ValueError as exc:
        _fail(path, str(exc))


_DEVICE_OVERRIDE_KEYS = {
    "default_n_cells", "e_cutoff_eV", "mollify_doping", "mollify_barrier",
    "quad_subdivisions", "default_scheme",
}

_DEVICE_INLINE_KEYS = {
    "name", "length_nm", "mass_ratio", "relative_permittivity",
    "fermi_level_eV", "temperature_K", "doping_regions", "barrier_regions",
    "prescribed", "ramp_span_nm", "prefactor_override",
} | _DEVICE_OVERRIDE_KEYS


def _device_from_table(tab: dict, path: str = "run.device") -> DeviceSpec:
    if not isinstance(tab, dict):
        _fail(path, "expected a table")
    if "preset" in tab:
        _check_keys(tab, {"preset"} | _DEVICE_OVERRIDE_KEYS, path)
        name = _string(tab, "preset", path, required=True)
        try:
            device = build_preset(name)
        except UnknownPreset as exc:
            _fail(f"{path}.preset", str(exc))
    else:
        _check_keys(tab, _DEVICE_INLINE_KEYS, path)
        length = _number(tab, "length_nm", path, required=True,
                         strict_min=0.0)
        doping_tables = _typed(tab, "doping_regions", list, path,
                               required=True)
        doping = _profile_from_regions(
            [(a, b, per_cm3(v)) for a, b, v in
             _regions(doping_tables, f"{path}.doping_regions",
                      "density_cm3")],
            length, f"{path}.doping_regions", nonnegative=True)
        barrier = None
        if "barrier_regions" in tab:
            barrier_tables = _typed(tab, "barrier_regions", list, path)
            barrier = _profile_from_regions(
                _regions(barrier_tables, f"{path}.barrier_regions",
                         "height_eV"),
                length, f"{path}.barrier_regions", nonnegative=False)
        ramp_span = None
        if "ramp_span_nm" in tab:
            span = _typed(tab, "ramp_span_nm", list, path)
            if len(span) != 2 or not all(
                    isinstance(s, (int, float)) for s in span):
                _fail(f"{path}.ramp_span_nm", "expected [start_nm, stop_nm]")
            ramp_span = (float(span[0]), float(span[1]))
        try:
            device = DeviceSpec(
                name=_string(tab, "name", path, default="custom"),
                length=length,
                mass_ratio=_number(tab, "mass_ratio", path, required=True,
                                   strict_min=0.0),
                relative_permittivity=_number(tab, "relative_permittivity",
                                              path, required=True,
                                              strict_min=0.0),
                fermi_level=_number(tab, "fermi_level_eV", path,
                                    required=True),
                temperature=_number(tab, "temperature_K", path,
                                    required=True, strict_min=0.0),
                doping=doping, barrier=barrier,
                prescribed=bool(_boolean(tab, "prescribed", path,
                                         default=False)),
                ramp_span=ramp_span,
                prefactor_override=_number(tab, "prefactor_override", path,
                                           strict_min=0.0),
            )
        except ValueError as exc:
            _fail(path, str(exc))

    overrides = {}
    if "default_n_cells" in tab:
        overrides["default_n_cells"] = _integer(tab, "default_n_cells", path,
                                                minimum=2)
    if "e_cutoff_eV" in tab:
        overrides["e_cutoff"] = _number(tab, "e_cutoff_eV", path,
                                        strict_min=0.0)
    if "mollify_doping" in tab:
        overrides["mollify_doping"] = _boolean(tab, "mollify_doping", path)
    if "mollify_barrier" in tab:
        overrides["mollify_barrier"] = _boolean(tab, "mollify_barrier", path)
    if "quad_subdivisions" in tab:
        overrides["quad_subdivisions"] = _integer(tab, "quad_subdivisions",
                                                  path, minimum=1)
    if "default_scheme" in tab:
        overrides["default_scheme"] = _scheme(
            _string(tab, "default_scheme", path),
            f"{path}.default_scheme").value
    if overrides:
        device = replace(device, **overrides)
    return device


def _profile_regions(profile: PiecewiseProfile):
    edges = (0.0,) + profile.breakpoints + (profile.length,)
    return [(edges[i], edges[i + 1], profile.values[i])
            for i in range(len(profile.values))]


def device_to_table(device: DeviceSpec) -> dict:
    """Serialize a DeviceSpec to the inline config form (lab units)."""
    table = {
        "name": device.name,
        "length_nm": device.length,
        "mass_ratio": device.mass_ratio,
        "relative_permittivity": device.relative_permittivity,
        "fermi_level_eV": device.fermi_level,
        "temperature_K": device.temperature,
        "e_cutoff_eV": device.e_cutoff,
        "default_n_cells": device.default_n_cells,
        "prescribed": device.prescribed,
        "mollify_doping": device.mollify_doping,
        "mollify_barrier": device.mollify_barrier,
        "quad_subdivisions": device.quad_subdivisions,
        "default_scheme": device.default_scheme,
        "doping_regions": [
            {"start_nm": a, "stop_nm": b, "density_cm3": v * 1e21}
            for a, b, v in _profile_regions(device.doping)],
    }
    if device.barrier is not None:
        table["barrier_regions"] = [
            {"start_nm": a, "stop_nm": b, "height_eV": v}
            for a, b, v in _profile_regions(device.barrier)]
    if device.ramp_span is not None:
        table["ramp_span_nm"] = list(device.ramp_span)
    if device.prefactor_override is not None:
        table["prefactor_override"] = device.prefactor_override
    return table


def _bias_list(tab: Optional[dict], device_name: str) -> List[float]:
    if tab is None:
        start, stop, step = DEFAULT_BIAS_SWEEPS.get(device_name,
                                                    (0.0, 0.0, 1.0))
    else:
        _check_keys(tab, {"start", "stop", "step", "values"}, "run.bias")
        if "values" in tab:
            if set(tab) - {"values"}:
                _fail("run.bias.values",
                      "give either explicit values or start/stop/step")
            values = _typed(tab, "values", list, "run.bias", required=True)
            if not values or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in values):
                _fail("run.bias.values", "expected a non-empty number list")
            return [float(v) for v in values]
        start = _number(tab, "start", "run.bias", required=True)
        stop = _number(tab, "stop", "run.bias", required=True)
        step = _number(tab, "step", "run.bias", required=True,
                       strict_min=0.0)
        if stop < start:
            _fail("run.bias.stop", "must be >= start")
    # keep points <= stop, tolerating the usual repeated-addition round-off
    span = (stop - start) / step
    count = int(math.floor(span * (1.0 + 1e-12) + 1e-12)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML config into a RunConfig with defaults."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        msg = str(exc)
        m = re.search(r"line (\d+), column (\d+)", msg)
        raise ParseError(msg,
                         line=int(m.group(1)) if m else None,
                         column=int(m.group(2)) if m else None) from None
    _check_keys(data, {"run", "study"}, "")
    run = _table(data, "run", "", required=True)
    _check_keys(run, {"device", "scheme", "n_cells", "bias", "quadrature",
                      "outer", "newton", "output"}, "run")
    device = _device_from_table(_table(run, "device", "run", required=True))

    scheme = _SCHEME_TOKENS[device.default_scheme]
    if "scheme" in run:
        scheme = _scheme(_string(run, "scheme", "run"), "run.scheme")
    n_cells = _integer(run, "n_cells", "run", default=device.default_n_cells,
                       minimum=2)
    biases = _bias_list(_table(run, "bias", "run") if "bias" in run else None,
                        device.name)

    cfg = RunConfig(device=device, scheme=scheme, n_cells=n_cells,
                    biases=biases)

    quad = _table(run, "quadrature", "run")
    _check_keys(quad, {"tol", "subdivisions", "max_depth"}, "run.quadrature")
    cfg.quad_tol = _number(quad, "tol", "run.quadrature", default=cfg.quad_tol,
                           strict_min=0.0)
    cfg.quad_subdivisions = _integer(quad, "subdivisions", "run.quadrature",
                                     default=None, minimum=1)
    cfg.quad_max_depth = _integer(quad, "max_depth", "run.quadrature",
                                  default=cfg.quad_max_depth, minimum=1)

    outer = _table(run, "outer", "run")
    _check_keys(outer, {"tol", "max_iterations", "mixing", "bias_ramp",
                        "strict"}, "run.outer")
    cfg.outer_tol = _number(outer, "tol", "run.outer", default=cfg.outer_tol,
                            strict_min=0.0)
    cfg.outer_max_iterations = _integer(outer, "max_iterations", "run.outer",
                                        default=cfg.outer_max_iterations,
                                        minimum=1)
    cfg.mixing = _number(outer, "mixing", "run.outer", default=cfg.mixing,
                         strict_min=0.0)
    if cfg.mixing > 1.0:
        _fail("run.outer.mixing", "must lie in (0, 1]")
    cfg.bias_ramp = bool(_boolean(outer, "bias_ramp", "run.outer",
                                  default=cfg.bias_ramp))
    cfg.strict = bool(_boolean(outer, "strict", "run.outer",
                               default=cfg.strict))

    newton = _table(run, "newton", "run")
    _check_keys(newton, {"tol", "max_iterations", "damping",
                         "damping_floor"}, "run.newton")
    cfg.newton_tol = _number(newton, "tol", "run.newton",
                             default=cfg.newton_tol, strict_min=0.0)
    cfg.newton_max_iterations = _integer(newton, "max_iterations",
                                         "run.newton",
                                         default=cfg.newton_max_iterations,
                                         minimum=1)
    cfg.newton_damping = _number(newton, "damping", "run.newton",
                                 default=cfg.newton_damping, strict_min=0.0)
    cfg.newton_damping_floor = _number(newton, "damping_floor", "run.newton",
                                       default=cfg.newton_damping_floor,
                                       strict_min=0.0)

    output = _table(run, "output", "run")
    _check_keys(output, {"directory", "emit_iv", "emit_profiles",
                         "emit_transmission", "emit_convergence",
                         "transmission_points"}, "run.output")
    cfg.output_dir = _string(output, "directory", "run.output",
                             default=cfg.output_dir)
    cfg.emit_iv = bool(_boolean(output, "emit_iv", "run.output",
                                default=cfg.emit_iv))
    cfg.emit_profiles = bool(_boolean(output, "emit_profiles", "run.output",
                                      default=cfg.emit_profiles))
    cfg.emit_transmission = bool(_boolean(output, "emit_transmission",
                                          "run.output",
                                          default=cfg.emit_transmission))
    cfg.emit_convergence = bool(_boolean(output, "emit_convergence",
                                         "run.output",
                                         default=cfg.emit_convergence))
    cfg.transmission_points = _integer(output, "transmission_points",
                                       "run.output",
                                       default=cfg.transmission_points,
                                       minimum=2)

    if "study" in data:
        study = _table(data, "study", "")
        _check_keys(study, {"grids", "reference", "energy_eV", "bias",
                            "scheme"}, "study")
        grids = _typed(study, "grids", list, "study", required=True)
        if len(grids) < 2 or not all(
                isinstance(g, int) and not isinstance(g, bool) and g >= 2
                for g in grids):
            _fail("study.grids", "expected a list of at least two cell "
                                 "counts (integers >= 2)")
        reference = study.get("reference", "auto")
        if not (reference == "auto" or reference == "exact"
                or (isinstance(reference, int)
                    and not isinstance(reference, bool))):
            _fail("study.reference",
                  "expected 'auto', 'exact', or an integer cell count")
        study_scheme = None
        if "scheme" in study:
            study_scheme = _scheme(_string(study, "scheme", "study"),
                                   "study.scheme")
        cfg.study = StudyConfig(
            grids=[int(g) for g in grids], reference=reference,
            energy=_number(study, "energy_eV", "study", strict_min=0.0),
            bias=_number(study, "bias", "study", default=0.0),
            scheme=study_scheme)
    if cfg.emit_convergence and cfg.study is None:
        _fail("run.output.emit_convergence",
              "requires a [study] section to define the grids")
    return cfg


# --------------------------------------------------------------------------
# output helpers

def _f(value) -> str:
    """Shortest round-trip decimal form of a float (bit-stable)."""
    return repr(float(value))


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_csv(path: str, header: str, rows):
    lines = [header]
    lines.extend(",".join(_f(cell) if not isinstance(cell, str) else cell
                          for cell in row) for row in rows)
    _write_text(path, "\n".join(lines) + "\n")


def effective_config(cfg: RunConfig) -> dict:
    """Full defaults-resolved config echo for summary.json."""
    out = {
        "device": device_to_table(cfg.device),
        "scheme": cfg.scheme.value,
        "n_cells": cfg.n_cells,
        "biases_V": list(cfg.biases),
        "quadrature": {
            "tol": cfg.quad_tol,
            "subdivisions": (cfg.quad_subdivisions
                             if cfg.quad_subdivisions is not None
                             else cfg.device.quad_subdivisions),
            "max_depth": cfg.quad_max_depth,
        },
        "outer": {
            "tol": cfg.outer_tol,
            "max_iterations": cfg.outer_max_iterations,
            "mixing": cfg.mixing,
            "bias_ramp": cfg.bias_ramp,
            "strict": cfg.strict,
        },
        "newton": {
            "tol": cfg.newton_tol,
            "max_iterations": cfg.newton_max_iterations,
            "damping": cfg.newton_damping,
            "damping_floor": cfg.newton_damping_floor,
        },
        "output": {
            "directory": cfg.output_dir,
            "emit_iv": cfg.emit_iv,
            "emit_profiles": cfg.emit_profiles,
            "emit_transmission": cfg.emit_transmission,
            "emit_convergence": cfg.emit_convergence,
            "transmission_points": cfg.transmission_points,
        },
    }
    if cfg.study is not None:
        out["study"] = {
            "grids": list(cfg.study.grids),
            "reference": cfg.study.reference,
            "energy_eV": cfg.study.energy,
            "bias": cfg.study.bias,
            "scheme": (cfg.study.scheme or cfg.scheme).value,
        }
    return out


def _study_report_dict(report) -> dict:
    return {
        "device": report.device_name,
        "scheme": report.scheme.value,
        "mode": report.mode,
        "energy_eV": report.energy,
        "bias_V": report.bias,
        "reference": report.reference,
        "n_cells": list(report.n_cells),
        "errors": list(report.errors),
        "orders": list(report.orders),
    }


def _write_convergence_csv(path: str, report, length: float):
    rows = []
    for n, err, order in report.rows():
        rows.append((str(n), _f(length / n), _f(err),
                     "" if order is None else _f(order)))
    _write_csv(path, "n_cells,dx_nm,error,order", rows)


def _run_study(cfg: RunConfig):
    study = cfg.study
    return convergence_study(cfg.device, study.scheme or cfg.scheme,
                             study.grids, reference=study.reference,
                             energy=study.energy, bias=study.bias,
                             config=cfg.solver_config(study.bias))


def run_command(cfg: RunConfig, out_dir: Optional[str] = None) -> int:
    out_dir = out_dir or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    results = bias_sweep(cfg.device, cfg.scheme, cfg.biases,
                         cfg.solver_config())

    if cfg.emit_iv:
        _write_csv(os.path.join(out_dir, "iv.csv"), "v_ds_V,current",
                   [(res.bias, res.current) for res in results])

    energies = np.linspace(0.0, cfg.device.e_cutoff,
                           cfg.transmission_points)
    for res in results:
        if res.density is None:
            continue
        tag = f"{res.bias:.4f}"
        if cfg.emit_profiles:
            x = res.grid.nodes()
            n_cm3 = res.density.values_cm3()
            _write_csv(os.path.join(out_dir, f"profile_{tag}.csv"),
                       "x_nm,V_eV,n_cm3",
                       zip(x, res.v_total, n_cm3))
        if cfg.emit_transmission:
            t_vals = transmission_curve(cfg.device, energies, cfg.scheme,
                                        n_cells=cfg.n_cells,
                                        potential=res.v_total)
            _write_csv(os.path.join(out_dir, f"transmission_{tag}.csv"),
                       "E_eV,T", zip(energies, t_vals))

    summary = {
        "backend": kernels.BACKEND,
        "config": effective_config(cfg),
        "results": [
            {
                "bias_V": res.bias,
                "current_A_per_cm2": res.current,
                "converged": res.converged,
                "outer_iterations": res.outer_iterations,
                "newton_iterations": list(res.newton_iterations),
                "final_update": (res.update_history[-1]
                                 if res.update_history else None),
                "depth_warnings": res.depth_warnings,
                "error": res.error,
            }
            for res in results
        ],
    }

    if cfg.emit_convergence and cfg.study is not None:
        report = _run_study(cfg)
        _write_convergence_csv(os.path.join(out_dir, "convergence.csv"),
                               report, cfg.device.length)
        summary["study"] = _study_report_dict(report)

    _write_text(os.path.join(out_dir, "summary.json"),
                json.dumps(summary, indent=2, sort_keys=True) + "\n")

    failed = sum(1 for res in results if res.error is not None)
    if failed == len(results):
        print(json.dumps({"error": {
            "type": "SweepFailed",
            "message": f"all {failed} bias points failed; see summary.json",
        }}, sort_keys=True))
        return 1
    return 0


def study_command(cfg: RunConfig, out_dir: Optional[str] = None) -> int:
    if cfg.study is None:
        _fail("study", "missing [study] section")
    out_dir = out_dir or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    report = _run_study(cfg)
    _write_convergence_csv(os.path.join(out_dir, "convergence.csv"),
                           report, cfg.device.length)
    summary = {
        "backend": kernels.BACKEND,
        "config": effective_config(cfg),
        "study": _study_report_dict(report),
    }
    _write_text(os.path.join(out_dir, "summary.json"),
                json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def presets_command() -> int:
    for name in list_presets():
        print(name)
    return 0


# --------------------------------------------------------------------------
# entry point

def _load_config(path: str, scheme: Optional[str],
                 nx: Optional[int]) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read config {path!r}: {exc}") from None
    cfg = parse_config(text)
    if scheme is not None:
        cfg.scheme = _scheme(scheme, "--scheme")
    if nx is not None:
        if nx < 2:
            _fail("--nx", f"must be >= 2, got {nx}")
        cfg.n_cells = nx
    return cfg


def _error_json(exc: Exception) -> str:
    info = {"type": type(exc).__name__, "message": str(exc)}
    for key in ("line", "column", "field"):
        value = getattr(exc, key, None)
        if value is not None:
            info[key] = value
    return json.dumps({"error": info}, sort_keys=True)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdev",
        description="1D quantum device simulator: scattering states, "
                    "self-consistent electrostatics, I-V curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a bias sweep from a config file")
    run_p.add_argument("--config", required=True, metavar="FILE")
    run_p.add_argument("--scheme", metavar="S",
                       help="continuous | discrete | plane-wave")
    run_p.add_argument("--nx", type=int, metavar="N",
                       help="override the cell count")
    run_p.add_argument("--out", metavar="DIR",
                       help="override the output directory")

    study_p = sub.add_parser("study", help="measurement studies")
    study_sub = study_p.add_subparsers(dest="study_command", required=True)
    conv_p = study_sub.add_parser("convergence",
                                  help="grid-refinement order study")
    conv_p.add_argument("--config", required=True, metavar="FILE")
    conv_p.add_argument("--scheme", metavar="S")
    conv_p.add_argument("--nx", type=int, metavar="N",
                        help=argparse.SUPPRESS)
    conv_p.add_argument("--out", metavar="DIR")

    presets_p = sub.add_parser("presets", help="preset inspection")
    presets_sub = presets_p.add_subparsers(dest="presets_command",
                                           required=True)
    presets_sub.add_parser("list", help="list available device presets")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            return presets_command()
        cfg = _load_config(args.config, args.scheme, args.nx)
        if args.command == "run":
            return run_command(cfg, args.out)
        return study_command(cfg, args.out)
    except (ParseError, ValidationError, UnknownPreset) as exc:
        print(_error_json(exc))
        return 2
    except (QdevError, OSError, ValueError) as exc:
        print(_error_json(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
