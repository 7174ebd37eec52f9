"""Run configuration: sectioned ``key = value`` text.

Example::

    [model]
    kind = nn
    J = 1.0

    [lattice]
    d = 3, 4, 5

    [beta]
    min = 0
    max = 0.4
    step = 0.02

    [run]
    engine = exact

A ``[bath]`` section (``lambda`` list, ``omega0``, ``v``, ``delta``) may replace
``[beta]``; each lambda is converted with :func:`beta_from_bath`.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field

from .coupling import BathParams, FullOhmic, NearestNeighbor, StripedOhmic, beta_from_bath
from .errors import ConfigError, InvalidParameter
from .exact import DEFAULT_CAP
from .montecarlo import McParams

OUTPUT_ENV = "SURFCORR_OUTPUT_DIR"
DEFAULT_OUTPUT = "surfcorr-out"

ALLOWED = {
    "model": {"kind", "j", "range", "include_imaginary"},
    "lattice": {"d"},
    "beta": {"min", "max", "step", "steps", "values"},
    "bath": {"lambda", "omega0", "v", "delta"},
    "mc": {"sweeps", "burn_in", "chains", "bins", "seed"},
    "run": {"engine", "cap"},
    "output": {"directory", "formats", "emit_plot_script"},
}
ENGINES = ("exact", "mc", "auto")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    model: object
    sizes: tuple[int, ...]
    betas: tuple[float, ...]
    engine: str = "auto"
    cap: int = DEFAULT_CAP
    mc: McParams | None = None
    bath: dict | None = None
    output_dir: str = DEFAULT_OUTPUT
    formats: tuple[str, ...] = ("csv", "json")
    emit_plot_script: bool = False
    source_text: str = field(default="", repr=False)

    def engine_for(self, d: int) -> str:
        if self.engine != "auto":
            return self.engine
        return "exact" if d * (d - 1) <= self.cap else "mc"

    def as_dict(self) -> dict:
        mc = None
        if self.mc is not None:
            mc = {k: getattr(self.mc, k) for k in ("sweeps", "burn_in", "seed", "chains", "bins")}
        return {
            "model": self.model.describe(),
            "sizes": list(self.sizes),
            "betas": list(self.betas),
            "engine": self.engine,
            "engines": {str(d): self.engine_for(d) for d in self.sizes},
            "cap": self.cap,
            "mc": mc,
            "bath": self.bath,
            "output_dir": self.output_dir,
            "formats": list(self.formats),
            "emit_plot_script": self.emit_plot_script,
            "config_text": self.source_text,
        }


def parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def beta_grid(lo: float, hi: float, step: float | None = None, steps: int | None = None) -> list[float]:
    """Evenly spaced grid including both ends, rounded to 12 decimals."""
    if step is not None:
        if step <= 0:
            raise InvalidParameter("beta step must be positive")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + k * step, 12) for k in range(n)]
    if steps is None or steps < 1:
        raise InvalidParameter("need a beta step or a positive number of steps")
    if steps == 1:
        return [float(lo)]
    return [round(lo + (hi - lo) * k / (steps - 1), 12) for k in range(steps)]


def parse_beta_spec(text: str) -> list[float]:
    """``min:max:step`` or a comma-separated list."""
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        return beta_grid(lo, hi, step=step)
    return parse_float_list(text)


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc

    problems: list[str] = []
    for section in parser.sections():
        if section not in ALLOWED:
            problems.append(f"unknown section [{section}]")
            continue
        unknown = sorted(set(parser[section]) - ALLOWED[section])
        if unknown:
            problems.append(f"unknown keys in [{section}]: {', '.join(unknown)}")

    def get(section, key, convert, default=None, required=False):
        if not parser.has_option(section, key):
            if required:
                problems.append(f"missing required key {section}.{key}")
            return default
        raw = parser.get(section, key)
        try:
            return convert(raw)
        except (TypeError, ValueError):
            problems.append(f"bad value for {section}.{key}: {raw!r}")
            return default

    kind = get("model", "kind", str.strip, required=True)
    J = get("model", "j", float, 1.0)
    rng = get("model", "range", float)
    imag = get("model", "include_imaginary", _bool, False)
    if J is not None and J < 0:
        problems.append("model.J must be nonnegative")
    if rng is not None and rng < 0:
        problems.append("model.range must be nonnegative")

    sizes = get("lattice", "d", lambda s: [int(x) for x in s.split(",") if x.strip()], required=True)
    if sizes is not None:
        if not sizes:
            problems.append("lattice.d is empty")
        if any(d < 1 for d in sizes):
            problems.append("lattice.d entries must be positive")
        if len(set(sizes)) != len(sizes):
            problems.append("lattice.d has duplicates")

    betas = None
    bath = None
    has_beta = parser.has_section("beta")
    has_bath = parser.has_section("bath")
    if has_beta and has_bath:
        problems.append("give either [beta] or [bath], not both")
    elif has_beta:
        values = get("beta", "values", parse_float_list)
        if values is not None:
            betas = values
        else:
            lo = get("beta", "min", float, required=True)
            hi = get("beta", "max", float, required=True)
            step = get("beta", "step", float)
            steps = get("beta", "steps", int)
            if lo is not None and hi is not None:
                if step is None and steps is None:
                    problems.append("missing beta.step or beta.steps")
                else:
                    try:
                        betas = beta_grid(lo, hi, step, steps)
                    except InvalidParameter as exc:
                        problems.append(str(exc))
    elif has_bath:
        lams = get("bath", "lambda", parse_float_list, required=True)
        omega0 = get("bath", "omega0", float, required=True)
        v = get("bath", "v", float, required=True)
        delta = get("bath", "delta", float, 0.0)
        if None not in (lams, omega0, v, delta):
            try:
                pairs = sorted((beta_from_bath(BathParams(lam, omega0, v, delta)), lam) for lam in lams)
                betas = [b for b, _ in pairs]
                bath = {"lambda": [lam for _, lam in pairs], "omega0": omega0, "v": v,
                        "delta": delta, "vdelta": v * delta, "beta": betas}
                if rng is None and kind in ("striped", "ohmic"):
                    rng = v * delta
            except InvalidParameter as exc:
                problems.append(f"bath: {exc}")
    else:
        problems.append("missing [beta] or [bath] section")
    if betas is not None:
        if any(b < 0 for b in betas):
            problems.append("betas must be nonnegative")
        if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            problems.append("betas must be strictly increasing")

    model = None
    if kind is not None:
        if kind == "nn":
            model = NearestNeighbor(J)
        elif kind in ("striped", "ohmic"):
            if rng is None:
                problems.append(f"missing required key model.range for kind={kind}")
            elif kind == "striped":
                model = StripedOhmic(J, rng)
            else:
                model = FullOhmic(rng, imag)
        else:
            problems.append(f"model.kind must be nn, striped or ohmic, not {kind!r}")

    engine = get("run", "engine", lambda s: s.strip().lower(), "auto")
    if engine not in ENGINES:
        problems.append(f"run.engine must be one of {', '.join(ENGINES)}")
    cap = get("run", "cap", int, DEFAULT_CAP)
    if engine == "exact" and sizes and cap is not None:
        for d in sizes:
            if d * (d - 1) > cap:
                problems.append(f"engine=exact with d={d}: {d * (d - 1)} plaquettes exceed cap {cap}")

    needs_mc = engine == "mc" or (engine == "auto" and sizes and cap is not None
                                  and any(d * (d - 1) > cap for d in sizes))
    if needs_mc and isinstance(model, FullOhmic) and model.include_imaginary:
        problems.append("Monte Carlo cannot sample complex weights (model.include_imaginary)")
    mc = None
    if parser.has_section("mc") or needs_mc:
        if needs_mc and not parser.has_option("mc", "sweeps"):
            problems.append("missing required key mc.sweeps")
        sweeps = get("mc", "sweeps", int, 100_000)
        try:
            mc = McParams(
                sweeps=sweeps,
                burn_in=get("mc", "burn_in", int),
                seed=get("mc", "seed", int, 0),
                chains=get("mc", "chains", int, 1),
                bins=get("mc", "bins", int, 32),
            )
        except (InvalidParameter, TypeError) as exc:
            problems.append(f"mc: {exc}")

    out_dir = get("output", "directory", str.strip) or os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT)
    formats = get("output", "formats", lambda s: tuple(x.strip().lower() for x in s.split(",") if x.strip()),
                  FORMATS)
    if formats is not None and set(formats) - set(FORMATS):
        problems.append(f"output.formats may only contain {', '.join(FORMATS)}")
    plot = get("output", "emit_plot_script", _bool, False)

    if problems:
        raise ConfigError(problems)
    return RunConfig(model, tuple(sizes), tuple(betas), engine, cap, mc, bath, out_dir,
                     tuple(formats), plot, text)
