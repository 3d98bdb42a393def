"""Run configuration: presets, key=value files, overrides and problem assembly."""

from __future__ import annotations

import configparser
import copy
import datetime as _dt
import io
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, NamedTuple, Optional

import numpy as np

from . import __version__
from .diffusion import State
from .equilibrium import EquilibriumProfile, global_equilibrium
from .errors import ConfigurationError
from .evolution import SimConfig
from .models import CosineField, ExponentialDatum, cell_average, channel_profile, make_diffusion, make_kernel, point_sample
from .size_grid import KernelTables, SizeGrid, build_kernel_tables, build_size_grid
from .spatial_mesh import SpatialMesh, build_cartesian_mesh, tag_boundary


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _words(text: str) -> tuple[str, ...]:
    return tuple(t for t in text.replace(",", " ").split())


def _flag(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# section -> key -> (parser, required)
SCHEMA: dict[str, dict[str, tuple[Any, bool]]] = {
    "run": {
        "dt": (float, True),
        "t_end": (float, True),
        "diag_every": (int, False),
        "steady_tol": (float, False),
        "positivity_mode": (str, False),
        "scheme": (str, False),
        "snapshot_times": (_floats, False),
        "min_regularity": (float, False),
        "entropy": (_flag, False),
    },
    "size": {
        "R": (float, True),
        "n_size": (int, True),
    },
    "mesh": {
        "x1_min": (float, True),
        "x1_max": (float, True),
        "x2_min": (float, True),
        "x2_max": (float, True),
        "nx": (int, True),
        "ny": (int, True),
    },
    "model": {
        "coag_kernel": (str, True),
        "coag_scale": (float, False),
        "frag_kernel": (str, True),
        "frag_scale": (float, False),
        "diffusion": (str, True),
        "diffusion_scale": (float, True),
    },
    "initial": {
        "form": (str, True),
        "alpha_mean": (float, True),
        "alpha_amp": (float, True),
        "alpha_k1": (float, True),
        "alpha_k2": (float, True),
        "average": (str, False),
        "quadrature_order": (int, False),
    },
    "boundary": {
        "type": (str, False),
        "bc_mean": (float, False),
        "bc_amp": (float, False),
        "bc_k": (float, False),
    },
    "output": {
        "snapshot_kinds": (_words, False),
    },
}

DEFAULTS: dict[str, dict[str, Any]] = {
    "run": {
        "diag_every": 10,
        "steady_tol": 1e-8,
        "positivity_mode": "strict",
        "scheme": "euler",
        "snapshot_times": (),
        "min_regularity": 0.1,
        "entropy": False,
    },
    "model": {"coag_scale": 1.0, "frag_scale": 1.0},
    "initial": {"average": "cell", "quadrature_order": 32},
    "boundary": {"type": "neumann", "bc_mean": 0.5, "bc_amp": 0.5, "bc_k": 4.0},
    "output": {"snapshot_kinds": ("fields",)},
}

PRESETS: dict[str, dict[str, dict[str, Any]]] = {
    # Aizenman-Bak kernels, constant diffusion, homogeneous Neumann
    "ab-neumann": {
        "run": {"dt": 0.002, "t_end": 4.0, "diag_every": 25, "entropy": True},
        "size": {"R": 20.0, "n_size": 64},
        "mesh": {"x1_min": -0.5, "x1_max": 0.5, "x2_min": -0.5, "x2_max": 0.5, "nx": 32, "ny": 32},
        "model": {"coag_kernel": "constant", "frag_kernel": "constant",
                  "diffusion": "constant", "diffusion_scale": 0.1},
        "initial": {"form": "exp-rate", "alpha_mean": 1.0, "alpha_amp": 0.1,
                    "alpha_k1": 2.0, "alpha_k2": 2.0},
    },
    # no detailed balance: sqrt coagulation, unit fragmentation
    "sqrt-kernel": {
        "run": {"dt": 0.002, "t_end": 200.0, "diag_every": 250},
        "size": {"R": 20.0, "n_size": 64},
        "mesh": {"x1_min": -0.5, "x1_max": 0.5, "x2_min": -0.5, "x2_max": 0.5, "nx": 32, "ny": 32},
        "model": {"coag_kernel": "product-sqrt", "frag_kernel": "constant",
                  "diffusion": "inverse-linear", "diffusion_scale": 0.1},
        "initial": {"form": "exp-rate", "alpha_mean": 1.0, "alpha_amp": 0.5,
                    "alpha_k1": 4.0, "alpha_k2": 4.0},
    },
    # Dirichlet inflow on x1 = 0, Neumann elsewhere
    "dirichlet-channel": {
        "run": {"dt": 2e-5, "t_end": 4.0, "diag_every": 500,
                "snapshot_times": (0.0, 0.33, 0.66, 4.0)},
        "size": {"R": 20.0, "n_size": 64},
        "mesh": {"x1_min": 0.0, "x1_max": 0.125, "x2_min": 0.0, "x2_max": 1.0, "nx": 128, "ny": 128},
        "model": {"coag_kernel": "constant", "frag_kernel": "constant",
                  "diffusion": "inverse-linear", "diffusion_scale": 0.01},
        "initial": {"form": "exp-scale", "alpha_mean": 0.5, "alpha_amp": 0.5,
                    "alpha_k1": 32.0, "alpha_k2": 4.0},
        "boundary": {"type": "channel", "bc_mean": 0.5, "bc_amp": 0.5, "bc_k": 4.0},
        "output": {"snapshot_kinds": ("fields", "projection")},
    },
}

OVERRIDE_KEYS = {
    "nx": ("mesh", "nx"),
    "ny": ("mesh", "ny"),
    "nsize": ("size", "n_size"),
    "dt": ("run", "dt"),
    "t_end": ("run", "t_end"),
    "steady_tol": ("run", "steady_tol"),
}


@dataclass
class RunManifest:
    """Fully resolved parameter set of one run, echoed to disk before stepping."""

    preset: Optional[str]
    params: dict[str, dict[str, Any]]
    out_dir: Optional[str] = None
    version: str = __version__
    meta: dict[str, str] = field(default_factory=dict)

    def get(self, section: str, key: str) -> Any:
        return self.params[section][key]

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp["run"] = {"preset": self.preset or ""}
        for section, keys in SCHEMA.items():
            if section not in cp:
                cp[section] = {}
            for key in keys:
                cp[section][key] = _format(self.params[section][key])
        cp["manifest"] = {"version": self.version, "out_dir": self.out_dir or "", **self.meta}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_format(v) for v in value)
    return str(value)


def _parse_text(text: str, origin: str) -> tuple[Optional[str], dict[str, dict[str, Any]]]:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigurationError(f"{origin}: {exc}") from None
    preset = None
    values: dict[str, dict[str, Any]] = {}
    for section in cp.sections():
        if section == "manifest":
            continue
        if section not in SCHEMA:
            raise ConfigurationError(f"{origin}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if section == "run" and key == "preset":
                preset = raw.strip() or None
                continue
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"{origin}: unknown key [{section}] {key}")
            parser = SCHEMA[section][key][0]
            try:
                values.setdefault(section, {})[key] = parser(raw) if parser is not str else raw.strip()
            except ValueError as exc:
                raise ConfigurationError(f"{origin}: [{section}] {key} = {raw!r}: {exc}") from None
    return preset, values


def _resolve(preset: Optional[str], values: Mapping[str, Mapping[str, Any]]) -> dict:
    if preset is not None and preset not in PRESETS:
        raise ConfigurationError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    params: dict[str, dict[str, Any]] = {s: {} for s in SCHEMA}
    layers = [DEFAULTS] + ([PRESETS[preset]] if preset else []) + [values]
    for layer in layers:
        for section, keys in layer.items():
            params[section].update(copy.deepcopy(dict(keys)))
    for section, keys in SCHEMA.items():
        for key, (_, required) in keys.items():
            if required and key not in params[section]:
                raise ConfigurationError(f"missing required key [{section}] {key}")
    return params


def load_config(source: str, overrides: Optional[Mapping[str, Any]] = None) -> RunManifest:
    """Resolve a preset name or a config file path into a validated manifest.

    ``overrides`` maps the command-line names in :data:`OVERRIDE_KEYS` to values.
    """
    if source in PRESETS:
        preset, values = source, {}
    else:
        path = Path(source)
        if not path.is_file():
            raise ConfigurationError(
                f"{source!r} is neither a preset ({', '.join(sorted(PRESETS))}) nor a file"
            )
        preset, values = _parse_text(path.read_text(), str(path))
    params = _resolve(preset, values)
    for name, value in (overrides or {}).items():
        if value is None:
            continue
        section, key = OVERRIDE_KEYS[name]
        try:
            params[section][key] = SCHEMA[section][key][0](value)
        except ValueError as exc:
            raise ConfigurationError(f"override {name}={value!r}: {exc}") from None
    manifest = RunManifest(preset=preset, params=params)
    validate(manifest)
    return manifest


def validate(manifest: RunManifest) -> None:
    p = manifest.params
    sim_config(manifest)
    build_size_grid(p["size"]["R"], p["size"]["n_size"])
    m = p["mesh"]
    if not (m["x1_max"] > m["x1_min"] and m["x2_max"] > m["x2_min"]):
        raise ConfigurationError("mesh extents must be nonempty intervals")
    if m["nx"] < 1 or m["ny"] < 1:
        raise ConfigurationError("nx and ny must be at least 1")
    if p["boundary"]["type"] not in ("neumann", "channel"):
        raise ConfigurationError(f"unknown boundary type {p['boundary']['type']!r}")
    if p["initial"]["average"] not in ("cell", "point"):
        raise ConfigurationError(f"initial average must be 'cell' or 'point'")
    for kind in p["output"]["snapshot_kinds"]:
        if kind not in ("fields", "projection"):
            raise ConfigurationError(f"unknown snapshot kind {kind!r}")
    make_kernel(p["model"]["coag_kernel"])
    make_kernel(p["model"]["frag_kernel"])
    make_diffusion(p["model"]["diffusion"], p["model"]["diffusion_scale"])
    if p["model"]["diffusion_scale"] <= 0:
        raise ConfigurationError("diffusion_scale must be positive")


def sim_config(manifest: RunManifest) -> SimConfig:
    r = manifest.params["run"]
    return SimConfig(
        dt=r["dt"],
        t_end=r["t_end"],
        diag_every=r["diag_every"],
        snapshot_times=r["snapshot_times"],
        steady_tol=r["steady_tol"],
        positivity_mode=r["positivity_mode"],
        scheme=r["scheme"],
        min_regularity=r["min_regularity"],
    )


class Problem(NamedTuple):
    grid: SizeGrid
    mesh: SpatialMesh
    tables: KernelTables
    initial: State
    config: SimConfig
    reference: Optional[EquilibriumProfile]


def build_problem(manifest: RunManifest) -> Problem:
    p = manifest.params
    grid = build_size_grid(p["size"]["R"], p["size"]["n_size"])
    m = p["mesh"]
    mesh = build_cartesian_mesh((m["x1_min"], m["x1_max"]), (m["x2_min"], m["x2_max"]), m["nx"], m["ny"])
    bc = p["boundary"]
    if bc["type"] == "channel":
        profile = channel_profile(CosineField(bc["bc_mean"], bc["bc_amp"], 0.0, bc["bc_k"]))
        x0 = m["x1_min"]
        mesh = tag_boundary(mesh, lambda x1, x2: np.isclose(x1, x0), profile)
    mo = p["model"]
    tables = build_kernel_tables(
        grid,
        make_kernel(mo["coag_kernel"], mo["coag_scale"]),
        make_kernel(mo["frag_kernel"], mo["frag_scale"]),
        make_diffusion(mo["diffusion"], mo["diffusion_scale"]),
    )
    ini = p["initial"]
    datum = ExponentialDatum(
        ini["form"], CosineField(ini["alpha_mean"], ini["alpha_amp"], ini["alpha_k1"], ini["alpha_k2"])
    )
    if ini["average"] == "cell":
        initial = cell_average(datum, grid, mesh, ini["quadrature_order"])
    else:
        initial = point_sample(datum, grid, mesh)
    reference = global_equilibrium(initial) if p["run"]["entropy"] else None
    return Problem(grid, mesh, tables, initial, sim_config(manifest), reference)


def stamp(manifest: RunManifest, out_dir: str) -> RunManifest:
    """Copy of ``manifest`` with output directory and wall-clock metadata filled in."""
    now = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    meta = {"started_utc": now, "host_pid": str(os.getpid())}
    return RunManifest(manifest.preset, copy.deepcopy(manifest.params), out_dir, manifest.version, meta)
