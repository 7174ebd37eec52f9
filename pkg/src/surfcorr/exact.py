"""Exact sector sums by enumerating every plaquette subset.

Subsets are visited in binary-reflected Gray-code order, so consecutive
configurations differ by a single plaquette and the energy is updated from the
couplings incident on at most four flipped qubits.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .coupling import CouplingMatrix
from .errors import InvalidParameter, TooLargeForExact, UndefinedFidelity
from .geometry import CodeLayout, Sector, SectorConfig, spin_config

DEFAULT_CAP = 24
# full recomputation interval bounding drift of the running energy
_RESYNC = 4096


@dataclass(frozen=True)
class SectorSums:
    """Sector sums at one beta, stored as mantissas times ``exp(log_scale)``.

    ``t_plus``/``t_minus`` overflow to infinity at very large beta; the ratio
    and the fidelity only use the mantissas and stay finite.
    """

    beta: float
    plus_mantissa: complex
    minus_mantissa: complex
    log_scale: float
    fidelity: float

    @property
    def t_plus(self) -> complex:
        return _rescale(self.plus_mantissa, self.log_scale)

    @property
    def t_minus(self) -> complex:
        return _rescale(self.minus_mantissa, self.log_scale)

    @property
    def ratio(self) -> complex:
        if self.plus_mantissa == 0:
            return complex(math.inf)
        return self.minus_mantissa / self.plus_mantissa

    @property
    def fidelity_squared(self) -> float:
        return self.fidelity**2


def _rescale(mantissa: complex, log_scale: float) -> complex:
    if log_scale == 0:
        return mantissa
    if log_scale > 709:
        return complex(math.copysign(math.inf, mantissa.real) if mantissa.real else 0.0,
                       math.copysign(math.inf, mantissa.imag) if mantissa.imag else 0.0)
    return mantissa * math.exp(log_scale)


def fidelity_from_sums(t_plus: complex, t_minus: complex) -> float:
    """``|T+ + T-| / sqrt(|T+ + T-|**2 + |T+ - T-|**2)``.

    The prefactor shared by both amplitudes cancels and is never formed.
    """
    a = abs(complex(t_plus) + complex(t_minus))
    b = abs(complex(t_plus) - complex(t_minus))
    if a == 0 and b == 0:
        raise UndefinedFidelity("both sector sums vanish")
    return a / math.hypot(a, b)


def energy(config: SectorConfig, coupling: CouplingMatrix) -> complex:
    if config.spins.shape[0] != coupling.n_qubits or config.distance != coupling.distance:
        raise InvalidParameter("configuration and coupling come from different layouts")
    s = config.spins.astype(float)
    return complex(np.sum(coupling.values * s[coupling.rows] * s[coupling.cols]))


def _csr(coupling: CouplingMatrix):
    n = coupling.n_qubits
    r = np.concatenate([coupling.rows, coupling.cols])
    c = np.concatenate([coupling.cols, coupling.rows])
    v = np.concatenate([coupling.values, coupling.values])
    order = np.lexsort((c, r))
    r, c, v = r[order], c[order], v[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, r + 1, 1)
    # real couplings take the cheaper float path
    dtype = np.float64 if coupling.is_real else np.complex128
    return np.cumsum(indptr), c.astype(np.int64), (v.real if dtype is np.float64 else v).astype(dtype)


@numba.njit(cache=True, nogil=True)
def _full_energy(s, indptr, indices, data):
    e = np.zeros(1, data.dtype)[0]
    for q in range(s.shape[0]):
        for k in range(indptr[q], indptr[q + 1]):
            n = indices[k]
            if n > q:
                e += data[k] * s[q] * s[n]
    return e


@numba.njit(cache=True, nogil=True)
def _gray_energies(spins0, plaq, indptr, indices, data, resync):
    n_plaq = plaq.shape[0]
    total = 1 << n_plaq
    s = spins0.astype(np.float64)
    out = np.empty(total, dtype=data.dtype)
    zero = np.zeros(1, data.dtype)[0]
    e = _full_energy(s, indptr, indices, data)
    out[0] = e
    for k in range(1, total):
        p = 0
        while not (k >> p) & 1:
            p += 1
        for m in range(plaq.shape[1]):
            q = plaq[p, m]
            if q < 0:
                break
            h = zero
            for t in range(indptr[q], indptr[q + 1]):
                h += data[t] * s[indices[t]]
            e -= 2.0 * s[q] * h
            s[q] = -s[q]
        if k % resync == 0:
            e = _full_energy(s, indptr, indices, data)
        out[k] = e
    return out


@numba.njit(cache=True, nogil=True)
def _boltzmann_sum(energies, beta, shift):
    # Neumaier summation, separately on real and imaginary parts
    sr = 0.0
    cr = 0.0
    si = 0.0
    ci = 0.0
    for k in range(energies.shape[0]):
        w = np.exp(-beta * (energies[k] - shift))
        x = w.real
        t = sr + x
        if abs(sr) >= abs(x):
            cr += (sr - t) + x
        else:
            cr += (x - t) + sr
        sr = t
        y = w.imag
        t = si + y
        if abs(si) >= abs(y):
            ci += (si - t) + y
        else:
            ci += (y - t) + si
        si = t
    return complex(sr + cr, si + ci)


@numba.njit(cache=True, nogil=True)
def _dense_gray(spins0, plaq, J, resync):
    # same walk as _gray_energies over contiguous real rows; four partial
    # sums let the compiler vectorise without reassociating
    n_plaq = plaq.shape[0]
    n = J.shape[0]
    total = 1 << n_plaq
    s = spins0.astype(np.float64)
    out = np.empty(total)
    e = _dense_energy(s, J)
    out[0] = e
    for k in range(1, total):
        p = 0
        while not (k >> p) & 1:
            p += 1
        for m in range(plaq.shape[1]):
            q = plaq[p, m]
            if q < 0:
                break
            row = J[q]
            h0 = h1 = h2 = h3 = 0.0
            i = 0
            while i + 4 <= n:
                h0 += row[i] * s[i]
                h1 += row[i + 1] * s[i + 1]
                h2 += row[i + 2] * s[i + 2]
                h3 += row[i + 3] * s[i + 3]
                i += 4
            while i < n:
                h0 += row[i] * s[i]
                i += 1
            e -= 2.0 * s[q] * ((h0 + h1) + (h2 + h3))
            s[q] = -s[q]
        if k % resync == 0:
            e = _dense_energy(s, J)
        out[k] = e
    return out


@numba.njit(cache=True, nogil=True)
def _dense_energy(s, J):
    e = 0.0
    for q in range(J.shape[0]):
        for r in range(q + 1, J.shape[0]):
            e += J[q, r] * s[q] * s[r]
    return e


def _kernel_inputs(coupling: CouplingMatrix):
    """Sparse rows for short-range couplings; dense real and imaginary rows once
    at least a quarter of all pairs couple."""
    n = coupling.n_qubits
    if 8 * len(coupling.values) < n * n:
        return "sparse", _csr(coupling)
    dense = coupling.dense()
    parts = [np.ascontiguousarray(dense.real)]
    if not coupling.is_real:
        parts.append(np.ascontiguousarray(dense.imag))
    return "dense", parts


def _check_inputs(layout: CodeLayout, coupling: CouplingMatrix, cap: int):
    if coupling.n_qubits != layout.n_qubits or coupling.distance != layout.distance:
        raise InvalidParameter("coupling was built for a different layout")
    if layout.n_plaquettes > cap:
        raise TooLargeForExact(
            f"{layout.n_plaquettes} plaquettes exceed the exact-enumeration cap of {cap}"
        )


def sector_energies(layout: CodeLayout, coupling: CouplingMatrix, sector=Sector.PLUS,
                    cap: int = DEFAULT_CAP) -> np.ndarray:
    """Energies of all ``2**P`` configurations of one sector, in Gray-code order.

    Entry ``k`` belongs to the subset with bit-set ``k ^ (k >> 1)``.
    """
    _check_inputs(layout, coupling, cap)
    return _enumerate(layout, _kernel_inputs(coupling), sector).astype(np.complex128, copy=False)


def _enumerate(layout: CodeLayout, inputs, sector) -> np.ndarray:
    start = spin_config(layout, 0, sector).spins
    plaq = layout.plaquette_array()
    kind, data = inputs
    if kind == "sparse":
        return _gray_energies(start, plaq, *data, _RESYNC)
    energies = _dense_gray(start, plaq, data[0], _RESYNC)
    if len(data) == 2:
        energies = energies + 1j * _dense_gray(start, plaq, data[1], _RESYNC)
    return energies


def _both_sectors(layout: CodeLayout, coupling: CouplingMatrix, cap: int):
    """Plus and minus spectra, enumerated on two threads (the kernel releases the GIL)."""
    _check_inputs(layout, coupling, cap)
    inputs = _kernel_inputs(coupling)
    if layout.n_plaquettes < 12 or (os.cpu_count() or 1) < 2:
        return _enumerate(layout, inputs, Sector.PLUS), _enumerate(layout, inputs, Sector.MINUS)
    with ThreadPoolExecutor(max_workers=2) as pool:
        minus = pool.submit(_enumerate, layout, inputs, Sector.MINUS)
        return _enumerate(layout, inputs, Sector.PLUS), minus.result()


def _sums_at(beta, e_plus, e_minus, shift) -> SectorSums:
    if beta < 0:
        raise InvalidParameter(f"beta must be nonnegative, got {beta}")
    s_plus = _boltzmann_sum(e_plus, float(beta), shift)
    s_minus = _boltzmann_sum(e_minus, float(beta), shift)
    f = fidelity_from_sums(s_plus, s_minus)
    return SectorSums(float(beta), s_plus, s_minus, -beta * shift if beta else 0.0, f)


def _shift(*spectra) -> float:
    return float(min(np.real(e).min() for e in spectra))


def log_sector_sum(layout: CodeLayout, coupling: CouplingMatrix, beta: float, sector=Sector.PLUS,
                   cap: int = DEFAULT_CAP) -> complex:
    """Principal ``log`` of the sector sum; finite where the sum itself overflows."""
    if beta < 0:
        raise InvalidParameter(f"beta must be nonnegative, got {beta}")
    _check_inputs(layout, coupling, cap)
    e = _enumerate(layout, _kernel_inputs(coupling), sector)
    shift = _shift(e) if beta else 0.0
    return cmath.log(_boltzmann_sum(e, float(beta), shift)) - beta * shift


def sector_sum(layout: CodeLayout, coupling: CouplingMatrix, beta: float, sector=Sector.PLUS,
               cap: int = DEFAULT_CAP) -> complex:
    if beta < 0:
        raise InvalidParameter(f"beta must be nonnegative, got {beta}")
    _check_inputs(layout, coupling, cap)
    e = _enumerate(layout, _kernel_inputs(coupling), sector)
    if beta == 0:
        return _boltzmann_sum(e, 0.0, 0.0)
    shift = _shift(e)
    return _rescale(_boltzmann_sum(e, float(beta), shift), -beta * shift)


def sector_sums(layout: CodeLayout, coupling: CouplingMatrix, beta: float,
                cap: int = DEFAULT_CAP) -> SectorSums:
    return exact_curve(layout, coupling, [beta], cap)[0]


def exact_curve(layout: CodeLayout, coupling: CouplingMatrix, betas: Sequence[float],
                cap: int = DEFAULT_CAP) -> list[SectorSums]:
    betas = [float(b) for b in betas]
    if any(b < 0 for b in betas):
        raise InvalidParameter("betas must be nonnegative")
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise InvalidParameter("betas must be sorted")
    e_plus, e_minus = _both_sectors(layout, coupling, cap)
    shift = _shift(e_plus, e_minus)
    return [_sums_at(b, e_plus, e_minus, shift if b else 0.0) for b in betas]


@dataclass(frozen=True)
class GroundState:
    energy: float
    sector: Sector | None
    degeneracy_plus: int
    degeneracy_minus: int
    subset: int

    @property
    def unique_to_one_sector(self) -> bool:
        return self.sector is not None


def ground_state(layout: CodeLayout, coupling: CouplingMatrix, cap: int = DEFAULT_CAP,
                 tol: float = 1e-9) -> GroundState:
    """Locate the minimum of the real energy and report which sector holds it."""
    e_plus, e_minus = (e.real for e in _both_sectors(layout, coupling, cap))
    e0 = min(e_plus.min(), e_minus.min())
    n_plus = int(np.sum(e_plus <= e0 + tol))
    n_minus = int(np.sum(e_minus <= e0 + tol))
    sector = None
    if n_plus and not n_minus:
        sector = Sector.PLUS
    elif n_minus and not n_plus:
        sector = Sector.MINUS
    spectrum = e_plus if e_plus.min() <= e_minus.min() else e_minus
    k = int(np.argmin(spectrum))
    return GroundState(float(e0), sector, n_plus, n_minus, k ^ (k >> 1))
