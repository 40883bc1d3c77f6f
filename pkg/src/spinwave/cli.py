"""Command line front-end.

Subcommands::

    spinwave curve  --config FILE            sample a scenario's eta(t)
    spinwave fit    DATA --model KIND        fit a measured decay curve
    spinwave figure {fig2,fig3,fig4,figS2}   reproduce a reference dataset
    spinwave oracle --config FILE            check a closed form against an oracle

Exit codes: 0 success, 2 configuration error, 3 numerical failure (including
an oracle deviation above tolerance), 4 fit failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import figures, models
from .errors import ConfigError, FitError, NumericalError, SpinwaveError
from .fitting import MODELS, fit_decay
from .models import DecayCurve
from .oracle import (
    harmonic_trap_oracle,
    kuhr_exact,
    linear_force_oracle,
    product_series,
    recoil_oracle,
    release_bec_oracle,
    release_thermal_oracle,
)
from .oracle.thermal import ThermalSpec
from .constants import hbar, k_B

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_FIT = 4

#: default oracle tolerances: exact closed forms and documented approximations
ORACLE_TOLERANCE = {
    "recoil": 1e-3,
    "release_bec": 1e-3,
    "linear_force_exact": 1e-3,
    "harmonic_sag": 0.03,
    "raman_nath_general": 0.03,
    "release_thermal": 0.10,
    "kuhr": 0.05,
}

#: model efficiencies below this are left out of the relative deviation
RELATIVE_FLOOR = 1e-6


# --- output helpers -------------------------------------------------------------

def _fmt(x):
    if x is None:
        return ""
    return repr(float(x))


def microseconds(times):
    """Times in us, rounded to 12 significant digits to drop conversion noise."""
    return np.array([float(f"{t * 1e6:.12g}") for t in np.atleast_1d(times)])


def write_atomic(path: Path, text: str):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def table_csv(columns: dict) -> str:
    names = list(columns)
    arrays = [np.atleast_1d(np.asarray(columns[n], dtype=float)) for n in names]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in zip(*arrays):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_table(out: Path, stem: str, columns: dict, fmt: str, meta=None) -> Path:
    if fmt == "csv":
        path = out / f"{stem}.csv"
        write_atomic(path, table_csv(columns))
    else:
        path = out / f"{stem}.json"
        doc = {"columns": {k: np.asarray(v, float) for k, v in columns.items()}}
        if meta:
            doc.update(meta)
        write_atomic(path, dump_json(doc))
    return path


def resolve_threads(value):
    if value is not None:
        n = value
    else:
        env = os.environ.get("SPINWAVE_THREADS", "1")
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"SPINWAVE_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError("thread count must be at least 1")
    return n


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


# --- curve ---------------------------------------------------------------------

def scenario_columns(sc: cfgmod.Scenario):
    curve = sc.model.curve(sc.times)
    cols = {"t_us": microseconds(sc.times), "eta_over_eta0": curve.eta}
    if sc.output.get("coherence"):
        if not isinstance(sc.model, models.Recoil):
            raise ConfigError(f"coherence output is available for recoil scenarios only, "
                              f"not {sc.kind!r}")
        C = models.coherence_recoil(sc.times, sc.model.k_R, sc.model.sigma_v,
                                    sc.oracle_inputs["mass"])
        cols["ReC"], cols["ImC"] = C.real, C.imag
    return cols, curve.warnings


def run_curve(sc: cfgmod.Scenario, out: Path, fmt: str | None):
    cols, warnings = scenario_columns(sc)
    for w in warnings:
        _warn(f"{sc.name}: {w}")
    fmt = fmt or sc.output.get("format", "csv")
    meta = {"name": sc.name, "kind": sc.kind, "time_unit": "us", "warnings": list(warnings)}
    return write_table(out, sc.name, cols, fmt, meta)


def cmd_curve(args):
    scenarios = cfgmod.load(args.config)
    out = Path(args.out)
    threads = resolve_threads(args.threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        paths = list(pool.map(lambda s: run_curve(s, out, args.format), scenarios))
    for p in paths:
        print(p)
    return EXIT_OK


# --- fit -----------------------------------------------------------------------

def read_decay_csv(path) -> DecayCurve:
    """Read ``t_us, eta[, sigma]`` rows; raises ConfigError naming the row."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise FitError("insufficient points: the file is empty")
    header = [c.strip() for c in rows[0]]
    if header[:2] != ["t_us", "eta"] or len(header) not in (2, 3) or \
            (len(header) == 3 and header[2] != "sigma"):
        raise ConfigError(f"{path}: row 1: header must be 't_us,eta' or 't_us,eta,sigma'")
    t, eta, sig = [], [], []
    for i, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise ConfigError(f"{path}: row {i}: expected {len(header)} fields, got {len(r)}")
        try:
            vals = [float(c) for c in r]
        except ValueError:
            raise ConfigError(f"{path}: row {i}: non-numeric field") from None
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError(f"{path}: row {i}: non-finite value")
        t.append(vals[0] * 1e-6)
        eta.append(vals[1])
        if len(vals) == 3:
            sig.append(vals[2])
    if not t:
        raise FitError("insufficient points: no data rows")
    order = np.argsort(t, kind="stable")
    t, eta = np.asarray(t)[order], np.asarray(eta)[order]
    sigma = np.asarray(sig)[order] if sig else None
    try:
        return DecayCurve(t, eta, sigma)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def cmd_fit(args):
    curve = read_decay_csv(args.data)
    result = fit_decay(curve, args.model, floor=args.floor)
    doc = result.to_dict()
    doc["source"] = Path(args.data).name
    doc["time_unit"] = "s"
    out = Path(args.out)
    stem = f"fit_{Path(args.data).stem}_{args.model}"
    if args.format == "csv":
        cols = {"value": [v for v, _ in result.params.values()],
                "sigma": [s for _, s in result.params.values()]}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "value", "sigma"])
        for name, v, s in zip(result.params, cols["value"], cols["sigma"]):
            w.writerow([name, _fmt(v), _fmt(s)])
        path = out / f"{stem}.csv"
        write_atomic(path, buf.getvalue())
    else:
        path = out / f"{stem}.json"
        write_atomic(path, dump_json(doc))
    print(dump_json(doc), end="")
    if result.n_excluded:
        print(f"excluded {result.n_excluded} points below the floor", file=sys.stderr)
    return EXIT_OK


# --- figure --------------------------------------------------------------------

def cmd_figure(args):
    threads = resolve_threads(args.threads)
    data = figures.build_figure(args.id, threads=threads)
    out = Path(args.out)
    for stem, cols in data.tables.items():
        print(write_table(out, stem, cols, args.format))
    path = out / f"{args.id}_summary.json"
    write_atomic(path, dump_json(data.summary))
    print(path)
    print(dump_json(data.summary), end="")
    return EXIT_OK


# --- oracle --------------------------------------------------------------------

def oracle_series(sc: cfgmod.Scenario, threads=1):
    """Run the oracle matching a scenario; returns (DecayCurve, CoherenceSeries) or None."""
    kind, p, t = sc.kind, sc.oracle_inputs, sc.times
    eps = sc.oracle.get("eps")
    if kind == "recoil":
        if p["temperature"] <= 0 or p["k_R"] == 0:
            raise ConfigError("recoil oracle needs T > 0 and k_R != 0")
        return recoil_oracle(t, p["k_R"], p["temperature"], p["mass"], threads=threads)
    if kind == "release_bec":
        return release_bec_oracle(t, p["a0"], p["w"], p["mass"])
    if kind == "linear_force_exact":
        if p["sigma_v"] != 0 or any(p["k_R"]) or not isinstance(p["force"], float):
            raise ConfigError("linear-force oracle covers sigma_v = 0, k_R = 0 and a force "
                              "along x only")
        curve, series, _ = linear_force_oracle(t, p["w"], p["force"], p["mass"])
        return curve, series
    if kind == "release_thermal":
        a0 = math.sqrt(hbar / (p["mass"] * p["omega"]))
        ratio = k_B * p["temperature"] / (hbar * p["omega"])
        curve, series = release_thermal_oracle(t, a0, p["w"], p["mass"], ratio,
                                               eps=eps or 1e-4, threads=threads)
        if p["dims"] == 2:
            series = product_series(series, series)
            curve = DecayCurve(t, curve.eta**2)
        return curve, series
    if kind in ("harmonic_sag", "raman_nath_general"):
        if not p:
            raise ConfigError("harmonic-trap oracle needs the experiment block")
        curve, series, _ = harmonic_trap_oracle(t, p["temperature"], p["omega"], p["ratio"], p["w"],
                                                p["mass"], p["gravity"], eps=eps or 1e-3,
                                                threads=threads)
        return curve, series
    if kind == "kuhr":
        n_max = ThermalSpec.required_n_max(p["beta"], p["omega_g"], eps or 1e-4)
        res = kuhr_exact(p["beta"], p["omega_g"], p["omega_r"], n_max, t)
        for w in res.warnings:
            _warn(f"{sc.name}: {w}")
        C = res.C ** p["dims"]
        series = models.CoherenceSeries(t, C, 1.0, np.ones_like(t))
        return DecayCurve(t, series.eta), series
    return None


def run_oracle(sc: cfgmod.Scenario, out: Path, fmt, tolerance, threads):
    """Run one oracle comparison; returns (report or None, console line)."""
    res = oracle_series(sc, threads)
    if res is None:
        return None, f"{sc.name}: no oracle available for model kind {sc.kind!r}"
    curve, series = res
    model_eta = sc.model.relative(sc.times)
    # relative deviation where the model efficiency is resolvable
    keep = model_eta > RELATIVE_FLOOR
    dev = np.abs(curve.eta[keep] - model_eta[keep]) / model_eta[keep]
    tol = tolerance or sc.oracle.get("tolerance") or ORACLE_TOLERANCE[sc.kind]
    report = {
        "name": sc.name,
        "kind": sc.kind,
        "max_rel_deviation": float(dev.max()) if dev.size else 0.0,
        "mean_rel_deviation": float(dev.mean()) if dev.size else 0.0,
        "tolerance": tol,
        "points": int(sc.times.size),
    }
    report["status"] = "PASS" if report["max_rel_deviation"] <= tol else "FAIL"
    cols = {"t_us": microseconds(sc.times), "ReC": series.C.real, "ImC": series.C.imag,
            "mu0": np.full(sc.times.shape, series.mu0), "mut": series.mu_t, "eta": curve.eta,
            "eta_model": model_eta}
    write_table(out, f"{sc.name}_oracle", cols, fmt or "csv", {"time_unit": "us"})
    write_atomic(out / f"{sc.name}_oracle_report.json", dump_json(report))
    line = (f"{sc.name}: {sc.kind} max deviation {report['max_rel_deviation']:.3e} "
            f"(tolerance {tol:g}) {report['status']}")
    return report, line


def cmd_oracle(args):
    scenarios = cfgmod.load(args.config)
    threads = resolve_threads(args.threads)
    out = Path(args.out)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda s: run_oracle(s, out, args.format, args.tolerance, threads),
                                scenarios))
    for _, line in results:
        print(line)
    if any(r is not None and r["status"] == "FAIL" for r, _ in results):
        return EXIT_NUMERICAL
    return EXIT_OK


# --- entry point ---------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format (default: from config, else csv)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $SPINWAVE_THREADS or 1)")

    parser = argparse.ArgumentParser(prog="spinwave",
                                     description="Dark-time decay of stored spin waves.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", parents=[common], help="sample eta(t) of a scenario file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("fit", parents=[common], help="fit a decay curve from CSV")
    p.add_argument("data", help="CSV with header t_us,eta[,sigma]")
    p.add_argument("--model", choices=MODELS, default="gaussian")
    p.add_argument("--floor", type=float, default=1e-4,
                   help="exclude points below floor * max(eta)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("figure", parents=[common], help="reproduce a reference dataset")
    p.add_argument("id", choices=figures.FIGURES)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("oracle", parents=[common], help="compare a closed form with an oracle")
    p.add_argument("--config", required=True)
    p.add_argument("--tolerance", type=float, default=None,
                   help="override the scenario's relative tolerance")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "figure" and args.format is None:
        args.format = "csv"
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SpinwaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
