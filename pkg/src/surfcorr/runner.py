"""Orchestration and on-disk artifacts for a configured run."""

from __future__ import annotations

import csv
import io
import json
import platform
import re
import time
from pathlib import Path

import numba
import numpy as np

from . import __version__
from .config import RunConfig
from .coupling import StripedOhmic, build_coupling
from .errors import NoPredictor
from .exact import exact_curve
from .geometry import build_layout
from .loops import MU_SQUARE, bulk_neighbor_count, predict_beta_c
from .montecarlo import mc_curve
from .threshold import FidelityCurve, threshold_report

EXACT_COLUMNS = ("beta", "ReT+", "ImT+", "ReT-", "ImT-", "F")
MC_COLUMNS = ("beta", "R", "R_err", "F", "F_err", "acc_plaquette", "acc_sector")


def fmt(x: float) -> str:
    return "%.17g" % x


def exact_csv(sums) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EXACT_COLUMNS)
    for s in sums:
        w.writerow([fmt(s.beta), fmt(s.t_plus.real), fmt(s.t_plus.imag), fmt(s.t_minus.real),
                    fmt(s.t_minus.imag), fmt(s.fidelity)])
    return buf.getvalue()


def mc_csv(estimates) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MC_COLUMNS)
    for e in estimates:
        w.writerow([fmt(e.beta), fmt(e.ratio), fmt(e.ratio_stderr), fmt(e.fidelity),
                    fmt(e.fidelity_stderr), fmt(e.acceptance["plaquette"]), fmt(e.acceptance["sector"])])
    return buf.getvalue()


def read_curve_csv(path, d: int | None = None, model: dict | None = None) -> FidelityCurve:
    """Load an exact or MC curve CSV; ``d`` defaults to the ``d<N>`` in the filename."""
    path = Path(path)
    if d is None:
        m = re.search(r"d(\d+)", path.stem)
        if not m:
            raise ValueError(f"cannot infer lattice size from {path.name}; pass d explicitly")
        d = int(m.group(1))
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    beta = [float(r["beta"]) for r in rows]
    fid = [float(r["F"]) for r in rows]
    if rows and "F_err" in rows[0]:
        return FidelityCurve(d, model or {}, beta, fid, [float(r["F_err"]) for r in rows], "mc")
    return FidelityCurve(d, model or {}, beta, fid, np.zeros(len(rows)), "exact")


def predictor_for(model, mu: float = MU_SQUARE, n: int | None = None) -> tuple[float | None, list[str]]:
    notes = []
    try:
        if isinstance(model, StripedOhmic):
            if n is None:
                n = bulk_neighbor_count(model)
            value = predict_beta_c(model, mu, n)
            notes.append(f"striped model: ln(mu)/(n J) with bulk n={n}")
            notes.append("at n=4 the long-range formula gives ln(mu)/(4J), twice the nearest-neighbour ln(mu)/(8J)")
        else:
            value = predict_beta_c(model, mu)
            notes.append("nearest neighbour: ln(mu)/(8J), straight-wall loop cost")
        notes.append(f"mu = {mu}")
        return value, notes
    except NoPredictor as exc:
        return None, [str(exc)]


PLOT_SCRIPT = '''"""Plot fidelity curves written by surfcorr (run: python plot_curves.py)."""
import csv
import glob

import matplotlib.pyplot as plt

fig, ax = plt.subplots()
for path in sorted(glob.glob("curve_d*.csv")):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    beta = [float(r["beta"]) for r in rows]
    fid = [float(r["F"]) for r in rows]
    err = [float(r.get("F_err", 0.0)) for r in rows]
    ax.errorbar(beta, fid, yerr=err, label=path[len("curve_"):-4], marker=".", capsize=2)
ax.axhline(2 ** -0.5, color="grey", lw=0.5)
ax.set_xlabel("beta")
ax.set_ylabel("F")
ax.legend()
fig.savefig("fidelity.png", dpi=150)
'''


def run(config: RunConfig) -> dict:
    """Execute ``config`` and write its artifacts; returns the sidecar dict."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    model_info = config.model.describe()

    files: dict[str, str] = {}
    curves = []
    timing = {}
    for d in config.sizes:
        t0 = time.time()
        layout = build_layout(d)
        coupling = build_coupling(layout, config.model)
        if config.engine_for(d) == "exact":
            sums = exact_curve(layout, coupling, config.betas, config.cap)
            files[f"curve_d{d}.csv"] = exact_csv(sums)
            curves.append(FidelityCurve.from_exact(d, model_info, sums))
        else:
            ests = mc_curve(layout, coupling, config.betas, config.mc)
            files[f"curve_d{d}.csv"] = mc_csv(ests)
            curves.append(FidelityCurve.from_mc(d, model_info, ests))
        timing[str(d)] = time.time() - t0

    predictor, notes = predictor_for(config.model)
    report = None
    if len(curves) >= 2:
        report = threshold_report(curves, predictor)
        report["predictor_notes"] = notes

    sidecar = {
        "config": config.as_dict(),
        "predictor": {"beta_c": predictor, "notes": notes},
        "versions": {"surfcorr": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "numba": numba.__version__},
        "platform": platform.platform(),
        "timing_s": timing,
        "files": sorted(files),
    }
    if "csv" in config.formats:
        for name, text in files.items():
            (out / name).write_text(text)
    if report is not None:
        (out / "crossing.json").write_text(json.dumps(report, indent=2) + "\n")
        sidecar["files"].append("crossing.json")
    if config.emit_plot_script:
        (out / "plot_curves.py").write_text(PLOT_SCRIPT)
        sidecar["files"].append("plot_curves.py")
    sidecar["timing_s"]["total"] = time.time() - started
    if "json" in config.formats:
        (out / "run.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return sidecar
