"""Metropolis sampling of the joint (plaquette subset, sector) space.

The sector ratio ``T-/T+`` is read off as the ratio of time spent in the two
sectors by one chain that can hop between them by flipping every spin on the
logical Z string. Only real couplings are supported: complex weights would
need a sign-problem treatment.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numba
import numpy as np

from .coupling import CouplingMatrix
from .errors import ComplexWeightsUnsupported, InvalidParameter
from .exact import _csr
from .geometry import CodeLayout

_CHUNK = 1 << 15
# sector acceptance below this rate gets a mixing warning
LOW_ACCEPTANCE = 1e-3


@dataclass(frozen=True)
class McParams:
    sweeps: int = 100_000
    burn_in: int | None = None
    seed: int = 0
    chains: int = 1
    bins: int = 32
    workers: int | None = None

    def __post_init__(self):
        burn = self.sweeps // 10 if self.burn_in is None else self.burn_in
        object.__setattr__(self, "burn_in", int(burn))
        if self.sweeps < 1 or self.chains < 1:
            raise InvalidParameter("sweeps and chains must be positive")
        if not 0 <= self.burn_in < self.sweeps:
            raise InvalidParameter("need 0 <= burn_in < sweeps")
        if self.bins < 2:
            raise InvalidParameter("need at least two bins")
        if self.sweeps - self.burn_in < self.bins:
            raise InvalidParameter("fewer measured sweeps than bins")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter("seed must fit in 64 bits")


@dataclass(frozen=True)
class McEstimate:
    beta: float
    ratio: float
    ratio_stderr: float
    fidelity: float
    fidelity_stderr: float
    acceptance: dict[str, float]
    minus_fraction: float = 0.0
    saturated: bool = False
    warnings: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return asdict(self)


@numba.njit(cache=True, nogil=True)
def _flip_cost(s, members, indptr, indices, data):
    # flips the members in place and returns the energy change
    de = 0.0
    for m in range(members.shape[0]):
        q = members[m]
        if q < 0:
            break
        h = 0.0
        for t in range(indptr[q], indptr[q + 1]):
            h += data[t] * s[indices[t]]
        de -= 2.0 * s[q] * h
        s[q] = -s[q]
    return de


@numba.njit(cache=True, nogil=True)
def _undo(s, members):
    for m in range(members.shape[0]):
        q = members[m]
        if q < 0:
            break
        s[q] = -s[q]


@numba.njit(cache=True, nogil=True)
def _energy(s, indptr, indices, data):
    e = 0.0
    for q in range(s.shape[0]):
        for t in range(indptr[q], indptr[q + 1]):
            n = indices[t]
            if n > q:
                e += data[t] * s[q] * s[n]
    return e


@numba.njit(cache=True, nogil=True)
def _sweeps(s, state, plaq, gamma, indptr, indices, data, beta, uniforms, minus_out,
            accepted, check):
    """Run ``len(uniforms)`` sweeps.

    ``state`` holds ``[sector bit, running energy, max drift]``; ``accepted``
    accumulates accepted plaquette and sector moves.
    """
    n_plaq = plaq.shape[0]
    for sw in range(uniforms.shape[0]):
        for p in range(n_plaq + 1):
            members = plaq[p] if p < n_plaq else gamma
            de = _flip_cost(s, members, indptr, indices, data)
            if de <= 0.0 or uniforms[sw, p] < math.exp(-beta * de):
                state[1] += de
                if p < n_plaq:
                    accepted[0] += 1
                else:
                    accepted[1] += 1
                    state[0] = 1.0 - state[0]
                if check:
                    drift = abs(_energy(s, indptr, indices, data) - state[1])
                    if drift > state[2]:
                        state[2] = drift
            else:
                _undo(s, members)
        minus_out[sw] = state[0] > 0.5


@dataclass
class _ChainResult:
    minus: np.ndarray
    accepted: np.ndarray
    max_drift: float
    spins: np.ndarray
    energy: float
    minus_final: bool


def _run_chain(layout: CodeLayout, coupling: CouplingMatrix, beta: float, sweeps: int, seed: int,
               plaq: np.ndarray | None = None, check: bool = False) -> _ChainResult:
    rng = np.random.Generator(np.random.PCG64(seed))
    indptr, indices, data = _csr(coupling)
    data = np.ascontiguousarray(data.real, dtype=np.float64)
    if plaq is None:
        plaq = layout.plaquette_array()
    gamma = layout.gamma_array()
    s = np.ones(layout.n_qubits, dtype=np.float64)
    state = np.array([0.0, _energy(s, indptr, indices, data), 0.0])
    accepted = np.zeros(2, dtype=np.int64)
    minus = np.empty(sweeps, dtype=np.bool_)
    width = plaq.shape[0] + 1
    for start in range(0, sweeps, _CHUNK):
        stop = min(start + _CHUNK, sweeps)
        u = rng.random((stop - start, width))
        _sweeps(s, state, plaq, gamma, indptr, indices, data, float(beta), u,
                minus[start:stop], accepted, check)
    return _ChainResult(minus, accepted, float(state[2]), s, float(state[1]), bool(state[0] > 0.5))


def _fidelity_of_fraction(f: float) -> float:
    # with R = f/(1-f): F = (1+R)/sqrt((1+R)^2 + (1-R)^2)
    return 1.0 / math.sqrt(1.0 + (1.0 - 2.0 * f) ** 2)


def mc_estimate(layout: CodeLayout, coupling: CouplingMatrix, beta: float, params: McParams,
                plaquette_order: Sequence[int] | None = None) -> McEstimate:
    """Sector ratio and fidelity from ``params.chains`` independent chains.

    Chain ``c`` is seeded with ``params.seed + c``. ``plaquette_order`` relabels
    the plaquettes (the sweep visits them in that order).
    """
    if not coupling.is_real:
        raise ComplexWeightsUnsupported("Monte Carlo needs real couplings")
    if coupling.n_qubits != layout.n_qubits or coupling.distance != layout.distance:
        raise InvalidParameter("coupling was built for a different layout")
    if beta < 0:
        raise InvalidParameter("beta must be nonnegative")
    plaq = layout.plaquette_array()
    if plaquette_order is not None:
        if sorted(plaquette_order) != list(range(layout.n_plaquettes)):
            raise InvalidParameter("plaquette_order must be a permutation")
        plaq = np.ascontiguousarray(plaq[list(plaquette_order)])

    seeds = [(params.seed + c) % 2**64 for c in range(params.chains)]
    workers = params.workers or min(params.chains, 8)
    if workers > 1 and params.chains > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(
                lambda sd: _run_chain(layout, coupling, beta, params.sweeps, sd, plaq), seeds))
    else:
        results = [_run_chain(layout, coupling, beta, params.sweeps, sd, plaq) for sd in seeds]
    return _summarize(beta, params, layout.n_plaquettes, results)


def _summarize(beta, params: McParams, n_plaq: int, results) -> McEstimate:
    fractions = []
    total_minus = 0
    total = 0
    for res in results:
        kept = res.minus[params.burn_in:]
        total_minus += int(kept.sum())
        total += kept.size
        fractions.extend(b.mean() for b in np.array_split(kept, params.bins))
    fractions = np.array(fractions)
    f = total_minus / total
    f_err = float(fractions.std(ddof=1) / math.sqrt(fractions.size))

    attempts = params.sweeps * len(results)
    acc_plaq = sum(int(r.accepted[0]) for r in results) / (attempts * n_plaq) if n_plaq else 0.0
    acc_sector = sum(int(r.accepted[1]) for r in results) / attempts
    notes = []
    if acc_sector < LOW_ACCEPTANCE:
        notes.append(f"sector-flip acceptance {acc_sector:.2e} is low; error bars may be unreliable")

    saturated = total_minus == total
    if saturated:
        notes.append("no time spent in the Plus sector; ratio saturated")
        ratio, ratio_err = math.inf, math.inf
    else:
        ratio = f / (1.0 - f)
        ratio_err = f_err / (1.0 - f) ** 2
    u = 1.0 - 2.0 * f
    fid = _fidelity_of_fraction(f)
    fid_err = abs(2.0 * u / (1.0 + u * u) ** 1.5) * f_err
    for note in notes:
        warnings.warn(f"beta={beta}: {note}", RuntimeWarning, stacklevel=3)
    return McEstimate(float(beta), ratio, ratio_err, fid, fid_err,
                      {"plaquette": acc_plaq, "sector": acc_sector}, f, saturated, tuple(notes))


def mc_curve(layout: CodeLayout, coupling: CouplingMatrix, betas: Sequence[float],
             params: McParams) -> list[McEstimate]:
    """One independent estimate per beta, each seeded from ``params.seed``."""
    return [mc_estimate(layout, coupling, b, params) for b in betas]
