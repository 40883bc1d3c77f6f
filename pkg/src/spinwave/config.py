"""Scenario files: JSON schema, unit handling and model construction.

A scenario file is a JSON object::

    {
      "schema_version": 1,
      "experiment": {"species": {...}, "beams": {...}, "trap": {...},
                     "ensemble": {...}, "units": {...}},
      "model": {"kind": "auto", "params": {...}, "eta0": 1.0},
      "time_grid": {"start": 0, "stop": 60, "count": 121},
      "output": {"name": "free_expansion", "format": "csv", "coherence": false}
    }

or ``{"schema_version": 1, "batch": [scenario, ...]}``.  Unknown keys are
rejected.  Quantities covered by the ``units`` block (temperature, length,
wavelength, time, frequency) are read in those units; every other number is
SI.  Frequencies in Hz are ordinary frequencies and become omega = 2 pi f.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import models
from .constants import k_B, to_si
from .errors import ConfigError
from .physics import (
    COPROPAGATING,
    COUNTERPROPAGATING,
    RB87,
    BeamGeometry,
    ExperimentConfig,
    Species,
    ThermalEnsemble,
    TrapConfig,
    derive_scales,
    oscillator_length,
    spin_wave_wavevector,
    thermal_velocity,
)

SCHEMA_VERSION = 1

DEFAULT_UNITS = {
    "temperature": "uK",
    "length": "um",
    "wavelength": "nm",
    "time": "us",
    "frequency": "Hz",
}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_pos_or_null = {"oneOf": [_pos, {"type": "null"}]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


UNITS_SCHEMA = _obj({
    "temperature": {"enum": ["K", "mK", "uK", "nK"]},
    "length": {"enum": ["m", "mm", "um", "nm"]},
    "wavelength": {"enum": ["m", "mm", "um", "nm"]},
    "time": {"enum": ["s", "ms", "us", "ns"]},
    "frequency": {"enum": ["Hz", "kHz", "rad/s"]},
})

EXPERIMENT_SCHEMA = _obj({
    "species": _obj({"name": {"enum": ["Rb87"]}, "mass": _pos}, ["name"]),
    "beams": _obj({
        "signal_wavelength": _pos,
        "coupling_wavelength": _pos,
        "geometry": {"enum": [COUNTERPROPAGATING, COPROPAGATING]},
        "signal_waist": _pos,
    }, ["signal_wavelength", "coupling_wavelength"]),
    "trap": _obj({
        "frequency": _nonneg,
        "polarizability_ratio": _num,
        "wavelength": _pos,
        "depth": _pos,
        "beam_waist": _pos,
        "gravity": _num,
        "on_during_dark_time": {"type": "boolean"},
    }, ["frequency"]),
    "ensemble": _obj({
        "temperature": _nonneg,
        "atom_number": _pos,
        "medium_length": _pos,
    }, ["temperature"]),
    "units": UNITS_SCHEMA,
}, ["species", "beams", "trap", "ensemble"])

PARAM_SCHEMAS = {
    "auto": _obj({"tau_offset": _pos}),
    "recoil": _obj({"temperature": _nonneg, "lambda_R": _pos}),
    "harmonic_sag": _obj({"tau_F": _pos_or_null, "tau_kappa": _pos_or_null}),
    "linear_force_exact": _obj({
        "waist": _pos,
        "temperature": _nonneg,
        "force": {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}]},
        "k_R": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
    }, ["waist"]),
    "exponential": _obj({"tau": _pos_or_null}, ["tau"]),
    "gaussian_offset": _obj({"tau": _pos_or_null}, ["tau"]),
    "release_bec": _obj({"a0": _pos, "waist": _pos, "trap_frequency": _pos},
                        ["waist", "trap_frequency"]),
    "release_thermal": _obj({"temperature": _pos, "waist": _pos, "trap_frequency": _pos,
                             "dims": {"enum": [1, 2]}}),
    "kuhr": _obj({
        "temperature": _pos,
        "trap_frequency": _pos,
        "rydberg_trap_frequency": _pos,
        "dims": {"enum": [1, 2, 3]},
        "variant": {"enum": [models.KUHR_INTERMEDIATE, models.KUHR_RAMAN_NATH]},
    }, ["rydberg_trap_frequency"]),
    "raman_nath_general": _obj({"rtol": _pos}),
    "composite": _obj({"factors": {"type": "array", "minItems": 1,
                                   "items": {"$ref": "#/$defs/model"}}}, ["factors"]),
}

MODEL_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": sorted(PARAM_SCHEMAS)},
        "params": {"type": "object"},
        "eta0": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    },
    "required": ["kind"],
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": k}}},
         "then": {"properties": {"params": s}}}
        for k, s in sorted(PARAM_SCHEMAS.items())
    ],
}

SCENARIO_PROPS = {
    "schema_version": {"const": SCHEMA_VERSION},
    "experiment": EXPERIMENT_SCHEMA,
    "model": {"$ref": "#/$defs/model"},
    "time_grid": _obj({"start": _nonneg, "stop": _nonneg,
                       "count": {"type": "integer", "minimum": 1}}, ["start", "stop", "count"]),
    "output": _obj({"name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
                    "format": {"enum": ["csv", "json"]},
                    "coherence": {"type": "boolean"}}),
    "oracle": _obj({"tolerance": _pos, "eps": _pos}),
    "units": UNITS_SCHEMA,
}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": SCENARIO_PROPS,
    "required": ["schema_version", "model", "time_grid"],
    "additionalProperties": False,
}

FILE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"model": MODEL_SCHEMA, "scenario": SCENARIO_SCHEMA},
    "oneOf": [
        {"$ref": "#/$defs/scenario"},
        {"type": "object",
         "properties": {"schema_version": {"const": SCHEMA_VERSION},
                        "batch": {"type": "array", "minItems": 1,
                                  "items": {"$ref": "#/$defs/scenario"}}},
         "required": ["schema_version", "batch"],
         "additionalProperties": False},
    ],
}


@dataclass(frozen=True)
class Scenario:
    """Validated scenario with all quantities in SI."""

    name: str
    model: models.ScenarioModel
    times: np.ndarray
    kind: str
    oracle_inputs: dict = field(default_factory=dict)
    experiment: ExperimentConfig | None = None
    units: dict = field(default_factory=lambda: dict(DEFAULT_UNITS))
    output: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)


def _describe(err: jsonschema.ValidationError):
    path = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"field {path}: {err.message}"


def validate(doc):
    """Validate a parsed scenario file; raises ConfigError naming the field."""
    validator = jsonschema.Draft202012Validator(FILE_SCHEMA)
    errors = list(validator.iter_errors(doc))
    if not errors:
        return
    best = jsonschema.exceptions.best_match(errors)
    # oneOf hides the useful message; descend to the deepest cause
    while best.context:
        best = jsonschema.exceptions.best_match(best.context)
    raise ConfigError(f"schema violation at {_describe(best)}")


def load(path):
    """Read, validate and build the scenarios of a file.

    Returns
    -------
    list of Scenario
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    return parse(doc, default_name=path.stem)


def parse(doc, default_name="scenario"):
    validate(doc)
    if "batch" in doc:
        items = doc["batch"]
        scenarios = [build(d, f"{default_name}_{i}") for i, d in enumerate(items)]
        names = [s.name for s in scenarios]
        if len(set(names)) != len(names):
            raise ConfigError("batch scenarios must have distinct output names")
        return scenarios
    return [build(doc, default_name)]


class _Units:
    def __init__(self, table):
        self.table = {**DEFAULT_UNITS, **table}

    def __call__(self, value, quantity):
        if value is None:
            return None
        return to_si(float(value), self.table[quantity])


def build_experiment(block, units: _Units) -> ExperimentConfig:
    sp = block["species"]
    species = RB87 if "mass" not in sp else Species(
        RB87.name, sp["mass"], RB87.ground_polarizability_1064,
        RB87.ground_polarizability_532, RB87.rydberg_overrides)
    b = block["beams"]
    beams = BeamGeometry(
        units(b["signal_wavelength"], "wavelength"),
        units(b["coupling_wavelength"], "wavelength"),
        b.get("geometry", COUNTERPROPAGATING),
        units(b.get("signal_waist", 8.0e-6 / to_si(1.0, units.table["length"])), "length"),
    )
    tr = block["trap"]
    if "polarizability_ratio" in tr:
        ratio = float(tr["polarizability_ratio"])
    else:
        lam = units(tr.get("wavelength", 1064e-9 / to_si(1.0, units.table["wavelength"])),
                    "wavelength")
        ratio = species.polarizability_ratio(lam)
    trap = TrapConfig(
        units(tr["frequency"], "frequency"),
        ratio,
        tr.get("depth"),
        units(tr.get("beam_waist"), "length"),
        tr.get("gravity", 9.8),
        tr.get("on_during_dark_time", False),
    )
    en = block["ensemble"]
    ens = ThermalEnsemble(
        units(en["temperature"], "temperature"),
        en.get("atom_number", 1e4),
        units(en.get("medium_length", 0.4e-3 / to_si(1.0, units.table["length"])), "length"),
    )
    return ExperimentConfig(species, beams, trap, ens)


def _need(exp, what):
    if exp is None:
        raise ConfigError(f"{what} needs an experiment block or explicit parameters")
    return exp


def build_model(spec, exp: ExperimentConfig | None, units: _Units):
    """Model and SI oracle inputs for one model block."""
    kind = spec["kind"]
    p = spec.get("params", {})
    eta0 = spec.get("eta0", 1.0)
    mass = exp.species.mass if exp else RB87.mass

    def temperature():
        if "temperature" in p:
            return units(p["temperature"], "temperature")
        return _need(exp, "temperature").ensemble.temperature

    def waist():
        if "waist" in p:
            return units(p["waist"], "length")
        return _need(exp, "beam waist").beams.signal_waist

    def trap_frequency(key="trap_frequency"):
        if key in p:
            return units(p[key], "frequency")
        return _need(exp, "trap frequency").trap.radial_trap_frequency

    if kind == "recoil":
        if "lambda_R" in p:
            k_R = 2.0 * math.pi / units(p["lambda_R"], "length")
        else:
            k_R = spin_wave_wavevector(_need(exp, "recoil").beams)[0]
        T = temperature()
        sv = thermal_velocity(T, mass) if T > 0 else 0.0
        return (models.Recoil(k_R=k_R, sigma_v=sv, eta0=eta0),
                {"k_R": k_R, "temperature": T, "mass": mass})

    if kind == "harmonic_sag":
        if "tau_F" in p or "tau_kappa" in p:
            return (models.HarmonicSag(tau_F=units(p.get("tau_F"), "time"),
                                       tau_kappa=units(p.get("tau_kappa"), "time"), eta0=eta0),
                    {})
        exp = _need(exp, "harmonic_sag")
        scales = derive_scales(exp)
        inputs = {"temperature": exp.ensemble.temperature,
                  "omega": exp.trap.radial_trap_frequency,
                  "ratio": exp.trap.polarizability_ratio, "w": exp.beams.signal_waist,
                  "mass": mass, "gravity": exp.trap.gravity}
        return models.HarmonicSag.from_scales(scales, eta0=eta0), inputs

    if kind == "linear_force_exact":
        T = temperature() if ("temperature" in p or exp) else 0.0
        sv = thermal_velocity(T, mass) if T > 0 else 0.0
        force = p.get("force")
        if force is None:
            exp = _need(exp, "linear_force_exact")
            force = mass * exp.trap.gravity * abs(1.0 - exp.trap.polarizability_ratio)
        force = tuple(force) if isinstance(force, list) else float(force)
        k_R = tuple(p.get("k_R", (0.0, 0.0, 0.0)))
        w = waist()
        model = models.LinearForceExact(w=w, sigma_v=sv, mass=mass, k_R=k_R, force=force,
                                        eta0=eta0)
        return model, {"w": w, "sigma_v": sv, "force": force, "k_R": k_R, "mass": mass}

    if kind in ("exponential", "gaussian_offset"):
        tau = units(p["tau"], "time")
        if kind == "exponential":
            return models.Exponential(gamma=0.0 if tau is None else 1.0 / tau, eta0=eta0), {}
        return models.GaussianOffset(tau=tau, eta0=eta0), {}

    if kind == "release_bec":
        omega = trap_frequency()
        a0 = units(p["a0"], "length") if "a0" in p else oscillator_length(omega, mass)
        w = waist()
        return (models.ReleaseBEC(a0=a0, w=w, omega=omega, eta0=eta0),
                {"a0": a0, "w": w, "omega": omega, "mass": mass})

    if kind == "release_thermal":
        T, omega, w = temperature(), trap_frequency(), waist()
        if T <= 0 or omega <= 0:
            raise ConfigError("release_thermal needs T > 0 and a trap frequency")
        sv = thermal_velocity(T, mass)
        dims = p.get("dims", 2)
        psd = derive_scales(exp).psd if exp and exp.ensemble.temperature > 0 and \
            exp.trap.radial_trap_frequency > 0 else None
        model = models.ReleaseThermal(sigma_x=sv / omega, sigma_v=sv, w=w, mass=mass, dims=dims,
                                      psd=psd, eta0=eta0)
        return model, {"temperature": T, "omega": omega, "w": w, "mass": mass, "dims": dims}

    if kind == "kuhr":
        T, omega_g = temperature(), trap_frequency()
        omega_r = units(p["rydberg_trap_frequency"], "frequency")
        if T <= 0:
            raise ConfigError("kuhr needs T > 0")
        beta = 1.0 / (k_B * T)
        dims = p.get("dims", 3)
        model = models.Kuhr(beta=beta, kappa_g=mass * omega_g**2, kappa_r=mass * omega_r**2,
                            dims=dims, variant=p.get("variant", models.KUHR_INTERMEDIATE),
                            mass=mass, eta0=eta0)
        return model, {"beta": beta, "omega_g": omega_g, "omega_r": omega_r, "dims": dims}

    if kind == "raman_nath_general":
        exp = _need(exp, "raman_nath_general")
        s = derive_scales(exp)
        x0 = (s.kappa_r - s.kappa_g) / (s.kappa_g * s.kappa_r) * mass * exp.trap.gravity \
            if s.kappa_r != 0 else 0.0
        density, mode_sq, dV, half = models.gaussian_trap_integrands(
            s.sigma_x, exp.beams.signal_waist, s.kappa_g, s.kappa_r, x0)
        limits = models.raman_nath_limits(mass, s.kappa_g, s.kappa_r, s.w_r, s.sigma_v)
        model = models.RamanNathGeneral(density=density, mode_sq=mode_sq, dV=dV, half_width=half,
                                        rtol=p.get("rtol", 1e-6), limits=limits, eta0=eta0)
        inputs = {"temperature": exp.ensemble.temperature,
                  "omega": exp.trap.radial_trap_frequency,
                  "ratio": exp.trap.polarizability_ratio, "w": exp.beams.signal_waist,
                  "mass": mass, "gravity": exp.trap.gravity}
        return model, inputs

    if kind == "composite":
        factors = [build_model(f, exp, units)[0] for f in p["factors"]]
        return models.Composite(factors=tuple(factors), eta0=eta0), {}

    if kind == "auto":
        return auto_model(_need(exp, "auto"), units(p.get("tau_offset"), "time"), eta0), {}

    raise ConfigError(f"unknown model kind {kind!r}")


def auto_model(exp: ExperimentConfig, tau_offset=None, eta0=1.0):
    """Composite derived from the experiment description.

    Photon recoil is always included; the harmonic-trap differential light
    shift is added when the trap stays on during the dark time, and a
    Gaussian offset factor when ``tau_offset`` is given.
    """
    k_R, _ = spin_wave_wavevector(exp.beams)
    T = exp.ensemble.temperature
    mass = exp.species.mass
    factors = [models.Recoil(k_R=k_R, sigma_v=thermal_velocity(T, mass) if T > 0 else 0.0)]
    if exp.trap.on_during_dark_time:
        factors.append(models.HarmonicSag.from_scales(derive_scales(exp), k_R=k_R))
    if tau_offset is not None:
        factors.append(models.GaussianOffset(tau=tau_offset))
    return models.Composite(factors=tuple(factors), eta0=eta0)


def build(doc, default_name="scenario") -> Scenario:
    units_block = dict(doc.get("units", {}))
    if "experiment" in doc:
        units_block.update(doc["experiment"].get("units", {}))
    units = _Units(units_block)
    exp = None
    if "experiment" in doc:
        exp = build_experiment(doc["experiment"], units)
    model, inputs = build_model(doc["model"], exp, units)
    g = doc["time_grid"]
    start, stop = units(g["start"], "time"), units(g["stop"], "time")
    if g["count"] > 1 and stop <= start:
        raise ConfigError("time_grid: stop must exceed start")
    times = np.linspace(start, stop, g["count"]) if g["count"] > 1 else np.array([start])
    output = {"format": "csv", "coherence": False, **doc.get("output", {})}
    name = output.get("name", default_name)
    output["name"] = name
    return Scenario(name, model, times, doc["model"]["kind"], inputs, exp, units.table, output,
                    dict(doc.get("oracle", {})))
