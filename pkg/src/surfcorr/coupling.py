"""Bath correlators and effective qubit-qubit couplings.

Couplings are stored dimensionless: ``J_rs`` already absorbs ``(omega0/v)**2``
so that configuration weights are ``exp(-beta * sum_{r<s} J_rs s_r s_s)`` with
``beta`` taken straight from :func:`beta_from_bath`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .errors import GaugeNotApplicable, InvalidParameter
from .geometry import CodeLayout

NN_DISTANCE = math.sqrt(0.5)
# separations within this of a shell radius are treated as on the shell
_GEOM_TOL = 1e-9


@dataclass(frozen=True)
class BathParams:
    lam: float
    omega0: float
    v: float
    delta: float = 0.0

    @property
    def vdelta(self) -> float:
        return self.v * self.delta


def beta_from_bath(p: BathParams) -> float:
    """Fictitious inverse temperature ``(lambda * omega0 / v)**2 / 2``."""
    if p.v == 0:
        raise InvalidParameter("bath velocity v must be nonzero")
    if p.v < 0 or p.omega0 < 0 or p.delta < 0:
        raise InvalidParameter("bath parameters need v > 0, omega0 >= 0, delta >= 0")
    return 0.5 * (p.lam * p.omega0 / p.v) ** 2


def ohmic_phi(separation: float, vdelta: float) -> complex:
    """Dimensionless Ohmic correlator ``(v/omega0)**2 * Phi`` between two qubits."""
    if not separation > 0:
        raise InvalidParameter(f"separation must be positive, got {separation!r}")
    if vdelta < 0:
        raise InvalidParameter(f"v*Delta must be nonnegative, got {vdelta!r}")
    x = vdelta / separation
    if separation < vdelta:
        return complex(math.asinh(x), math.pi / 2)
    return complex(0.0, math.asin(x))


@dataclass(frozen=True)
class NearestNeighbor:
    J: float = 1.0
    kind = "nn"

    def describe(self) -> dict:
        return {"kind": self.kind, "J": self.J}


@dataclass(frozen=True)
class StripedOhmic:
    J: float = 1.0
    range: float = NN_DISTANCE + 1e-6
    kind = "striped"

    def describe(self) -> dict:
        return {"kind": self.kind, "J": self.J, "range": self.range}


@dataclass(frozen=True)
class FullOhmic:
    range: float = 1.0
    include_imaginary: bool = False
    kind = "ohmic"

    def describe(self) -> dict:
        return {"kind": self.kind, "range": self.range, "include_imaginary": self.include_imaginary}


Model = Union[NearestNeighbor, StripedOhmic, FullOhmic]


def model_from_dict(spec: dict) -> Model:
    kind = spec.get("kind", "nn")
    if kind in ("nn", "nearest", "nearest_neighbor"):
        return NearestNeighbor(float(spec.get("J", 1.0)))
    if kind in ("striped", "striped_ohmic"):
        return StripedOhmic(float(spec.get("J", 1.0)), float(spec["range"]))
    if kind in ("ohmic", "full", "full_ohmic"):
        return FullOhmic(float(spec["range"]), bool(spec.get("include_imaginary", False)))
    raise InvalidParameter(f"unknown model kind {kind!r}")


@dataclass(frozen=True)
class CouplingMatrix:
    model: Model
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    n_qubits: int
    distance: int
    bipartite: bool
    gauged: bool = False
    _dense: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def pairs(self) -> list[tuple[int, int, complex]]:
        return [(int(r), int(s), complex(j)) for r, s, j in zip(self.rows, self.cols, self.values)]

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def dense(self) -> np.ndarray:
        """Symmetric ``(N, N)`` complex matrix with zero diagonal."""
        return self._dense

    def conjugate(self) -> "CouplingMatrix":
        return _assemble(self.model, self.rows, self.cols, self.values.conj(), self.n_qubits,
                         self.distance, self.bipartite, self.gauged)

    def scaled(self, factor: float) -> "CouplingMatrix":
        model = self.model
        if hasattr(model, "J"):
            model = replace(model, J=model.J * factor)
        return _assemble(model, self.rows, self.cols, self.values * factor, self.n_qubits,
                         self.distance, self.bipartite, self.gauged)

    def degree(self) -> np.ndarray:
        nz = self.values != 0
        return np.bincount(self.rows[nz], minlength=self.n_qubits) + np.bincount(
            self.cols[nz], minlength=self.n_qubits
        )

    def to_csv_rows(self):
        yield ("r", "s", "ReJ", "ImJ")
        for r, s, j in zip(self.rows, self.cols, self.values):
            yield (int(r), int(s), repr(float(j.real)), repr(float(j.imag)))


def _assemble(model, rows, cols, values, n, distance, bipartite, gauged) -> CouplingMatrix:
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    values = np.asarray(values, dtype=np.complex128)
    dense = np.zeros((n, n), dtype=np.complex128)
    dense[rows, cols] = values
    dense[cols, rows] = values
    for a in (rows, cols, values, dense):
        a.setflags(write=False)
    return CouplingMatrix(model, rows, cols, values, n, distance, bipartite, gauged, dense)


def _separations(layout: CodeLayout):
    pos = layout.positions
    r, s = np.triu_indices(layout.n_qubits, k=1)
    sep = np.hypot(*(pos[r] - pos[s]).T)
    vert = layout.vertical_mask
    return r, s, sep, vert[r] != vert[s]


def build_coupling(layout: CodeLayout, model: Model) -> CouplingMatrix:
    r, s, sep, opposite = _separations(layout)
    if isinstance(model, NearestNeighbor):
        if model.J < 0:
            raise InvalidParameter("J must be nonnegative (antiferromagnetic coupling)")
        keep = np.abs(sep - NN_DISTANCE) < _GEOM_TOL
        values = np.full(keep.sum(), model.J, dtype=np.complex128)
    elif isinstance(model, StripedOhmic):
        if model.J < 0:
            raise InvalidParameter("J must be nonnegative (antiferromagnetic coupling)")
        if model.range < 0:
            raise InvalidParameter("range must be nonnegative")
        keep = opposite & (sep < model.range)
        values = np.full(keep.sum(), model.J, dtype=np.complex128)
    elif isinstance(model, FullOhmic):
        if model.range < 0:
            raise InvalidParameter("range must be nonnegative")
        keep = np.ones_like(sep, dtype=bool)
        values = np.array([ohmic_phi(x, model.range) for x in sep], dtype=np.complex128)
        if not model.include_imaginary:
            values = values.real.astype(np.complex128)
    else:
        raise InvalidParameter(f"unsupported model {model!r}")
    r, s = r[keep], s[keep]
    nz = values != 0
    bipartite = bool(np.all(opposite[keep][nz]))
    return _assemble(model, r, s, values, layout.n_qubits, layout.distance, bipartite, False)


def gauge_transform(layout: CodeLayout, coupling: CouplingMatrix) -> CouplingMatrix:
    """Flip the sign of every spin on the vertical sublattice.

    On a bipartite coupling this maps ``J_rs -> -J_rs`` for every pair, turning
    the antiferromagnet into a ferromagnet.
    """
    if not coupling.bipartite:
        raise GaugeNotApplicable("coupling links same-sublattice qubits")
    eta = np.where(layout.vertical_mask, -1.0, 1.0)
    values = coupling.values * eta[coupling.rows] * eta[coupling.cols]
    return _assemble(coupling.model, coupling.rows, coupling.cols, values, coupling.n_qubits,
                     coupling.distance, True, not coupling.gauged)


def boundary_field(layout: CodeLayout, coupling: CouplingMatrix, gamma=None) -> dict[int, complex]:
    """Field ``h_w = sum_{t in gamma} J_tw`` felt by every qubit off the string."""
    gamma = layout.logical_z_support if gamma is None else frozenset(gamma)
    if not gamma <= set(range(layout.n_qubits)):
        raise InvalidParameter("gamma must be a subset of the layout qubits")
    dense = coupling.dense()
    idx = sorted(gamma)
    return {
        w: complex(dense[idx, w].sum())
        for w in range(layout.n_qubits)
        if w not in gamma
    }
