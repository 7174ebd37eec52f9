"""Finite-size crossings of fidelity curves."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameter, NoCrossing

# |F1 - F2| at or below this is treated as "no sign"; exact curves agree to
# rounding near beta = 0
DIFF_ATOL = 1e-12


@dataclass(frozen=True)
class FidelityCurve:
    d: int
    model: dict
    beta: np.ndarray
    fidelity: np.ndarray
    fidelity_err: np.ndarray
    source: str = "exact"

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        fid = np.asarray(self.fidelity, dtype=float)
        err = np.zeros_like(fid) if self.fidelity_err is None else np.asarray(self.fidelity_err, float)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "fidelity", fid)
        object.__setattr__(self, "fidelity_err", err)
        if not (beta.shape == fid.shape == err.shape):
            raise InvalidParameter("curve columns differ in length")
        if np.any(np.diff(beta) <= 0):
            raise InvalidParameter("curve betas must be strictly increasing")
        if np.any(fid < 0) or np.any(fid > 1 + 1e-12):
            raise InvalidParameter("fidelity outside [0, 1]")
        if np.any(err < 0):
            raise InvalidParameter("negative fidelity error")
        if self.source == "exact" and np.any(err != 0):
            raise InvalidParameter("exact points carry no error bar")

    @classmethod
    def from_exact(cls, d, model, sums) -> "FidelityCurve":
        return cls(d, dict(model), [s.beta for s in sums], [s.fidelity for s in sums],
                   np.zeros(len(sums)), "exact")

    @classmethod
    def from_mc(cls, d, model, estimates) -> "FidelityCurve":
        return cls(d, dict(model), [e.beta for e in estimates], [e.fidelity for e in estimates],
                   [e.fidelity_stderr for e in estimates], "mc")


@dataclass(frozen=True)
class CrossingEstimate:
    beta_c: float
    pair: tuple[int, int]
    bracket: tuple[float, float]
    method: str = "linear-interpolation"
    n_crossings: int = 1
    uncertainty: tuple[float, float] = field(default=(0.0, 0.0))

    @property
    def multiple(self) -> bool:
        return self.n_crossings > 1

    def as_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "beta_c": self.beta_c,
            "bracket": list(self.bracket),
            "method": self.method,
            "n_crossings": self.n_crossings,
            "multiple": self.multiple,
            "uncertainty": list(self.uncertainty),
        }


def _sign_changes(beta, diff):
    signs = np.where(np.abs(diff) <= DIFF_ATOL, 0, np.sign(diff))
    signs[beta == 0] = 0
    idx = np.flatnonzero(signs)
    out = []
    for a, b in zip(idx, idx[1:]):
        if signs[a] != signs[b]:
            t = diff[a] / (diff[a] - diff[b])
            out.append((beta[a] + t * (beta[b] - beta[a]), beta[a], beta[b]))
    return out


def find_crossing(c1: FidelityCurve, c2: FidelityCurve) -> CrossingEstimate:
    """Smallest-beta sign change of ``F1 - F2``, linearly interpolated."""
    if c1.d == c2.d:
        raise InvalidParameter("crossing needs two different lattice sizes")
    if c1.beta.shape != c2.beta.shape or not np.allclose(c1.beta, c2.beta, rtol=0, atol=1e-12):
        raise InvalidParameter("curves must share the same beta grid")
    beta = c1.beta
    changes = _sign_changes(beta, c1.fidelity - c2.fidelity)
    if not changes:
        raise NoCrossing(f"F curves for d={c1.d} and d={c2.d} never cross")
    beta_c, lo, hi = changes[0]

    uncertainty = (0.0, 0.0)
    sigma = c1.fidelity_err + c2.fidelity_err
    if np.any(sigma > 0):
        # move the curves 1 sigma apart in both directions and re-cross
        shifted = []
        for sgn in (1.0, -1.0):
            moved = _sign_changes(beta, c1.fidelity - c2.fidelity + sgn * sigma)
            shifted.append(moved[0][0] if moved else math.nan)
        if any(math.isnan(b) for b in shifted):
            uncertainty = (beta_c - lo, hi - beta_c)
        else:
            uncertainty = (max(0.0, beta_c - min(shifted)), max(0.0, max(shifted) - beta_c))
    return CrossingEstimate(float(beta_c), (c1.d, c2.d), (float(lo), float(hi)),
                            n_crossings=len(changes), uncertainty=uncertainty)


def threshold_report(curves: Sequence[FidelityCurve], predictor: float | None) -> dict:
    if len(curves) < 2:
        raise InvalidParameter("a threshold report needs at least two curves")
    crossings = []
    missing = []
    for c1, c2 in itertools.combinations(sorted(curves, key=lambda c: c.d), 2):
        try:
            crossings.append(find_crossing(c1, c2))
        except NoCrossing:
            missing.append([c1.d, c2.d])
    values = [c.beta_c for c in crossings]
    report = {
        "sizes": sorted(c.d for c in curves),
        "model": dict(curves[0].model),
        "crossings": [c.as_dict() for c in crossings],
        "no_crossing": missing,
        "predictor": predictor,
    }
    if values:
        report["min_beta_c"] = min(values)
        report["max_beta_c"] = max(values)
        report["spread"] = max(values) - min(values)
        report["mean_beta_c"] = float(np.mean(values))
        report["max_pairwise_factor"] = max(values) / min(values)
        if predictor:
            report["measured_over_predicted"] = report["mean_beta_c"] / predictor
            for entry in report["crossings"]:
                entry["measured_over_predicted"] = entry["beta_c"] / predictor
    return report
