"""Planar surface-code layout and the (plaquette subset, sector) -> spin map.

Coordinates are in lattice-spacing units. Vertices sit at integer points
``(i, j)`` with ``0 <= i < d``; qubits live on links:

* vertical links at ``(i, j + 1/2)`` for ``0 <= i, j < d`` (``d*d`` qubits),
* horizontal links at ``(i + 1/2, j)`` for ``0 <= i < d-1``, ``1 <= j < d``.

The bottom and top edges are rough (vertical links dangle out of the lattice),
the left and right edges are smooth. Stars sit on the vertices with
``1 <= j < d``, plaquettes on the faces centred at ``(i + 1/2, j + 1/2)``.
Both have weight 3 on their boundary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import InvalidParameter


class Orientation(enum.Enum):
    HORIZONTAL = "H"
    VERTICAL = "V"


class Sector(enum.Enum):
    PLUS = "+"
    MINUS = "-"

    @classmethod
    def parse(cls, value) -> "Sector":
        if isinstance(value, Sector):
            return value
        text = str(value).strip().lower()
        if text in ("+", "plus", "p"):
            return cls.PLUS
        if text in ("-", "minus", "m"):
            return cls.MINUS
        raise InvalidParameter(f"unknown sector {value!r}")


@dataclass(frozen=True)
class Qubit:
    id: int
    position: tuple[float, float]
    orientation: Orientation


@dataclass(frozen=True)
class CodeLayout:
    distance: int
    qubits: tuple[Qubit, ...]
    stars: tuple[frozenset[int], ...]
    plaquettes: tuple[frozenset[int], ...]
    logical_x_support: frozenset[int]
    logical_z_support: frozenset[int]
    _plaquette_masks: tuple[int, ...] = field(repr=False, compare=False, default=())

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def n_plaquettes(self) -> int:
        return len(self.plaquettes)

    @property
    def positions(self) -> np.ndarray:
        return np.array([q.position for q in self.qubits], dtype=float)

    @property
    def vertical_mask(self) -> np.ndarray:
        """Boolean mask of the vertical-link sublattice."""
        return np.array([q.orientation is Orientation.VERTICAL for q in self.qubits])

    def plaquette_array(self) -> np.ndarray:
        """Plaquette supports as a ``(P, 4)`` int array padded with -1."""
        out = np.full((self.n_plaquettes, 4), -1, dtype=np.int64)
        for p, plaq in enumerate(self.plaquettes):
            members = sorted(plaq)
            out[p, : len(members)] = members
        return out

    def gamma_array(self) -> np.ndarray:
        return np.array(sorted(self.logical_z_support), dtype=np.int64)

    def summary(self) -> dict:
        return {
            "distance": self.distance,
            "n_qubits": self.n_qubits,
            "qubits": [
                {"id": q.id, "x": q.position[0], "y": q.position[1], "orientation": q.orientation.value}
                for q in self.qubits
            ],
            "stars": [sorted(s) for s in self.stars],
            "plaquettes": [sorted(p) for p in self.plaquettes],
            "logical_x_support": sorted(self.logical_x_support),
            "logical_z_support": sorted(self.logical_z_support),
        }


def build_layout(d: int) -> CodeLayout:
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise InvalidParameter(f"distance must be a positive integer, got {d!r}")
    d = int(d)

    # doubled integer coordinates keep the half-integer positions exact
    sites = [(2 * i, 2 * j + 1, Orientation.VERTICAL) for i in range(d) for j in range(d)]
    sites += [(2 * i + 1, 2 * j, Orientation.HORIZONTAL) for i in range(d - 1) for j in range(1, d)]
    sites.sort(key=lambda s: (s[1], s[0]))
    index = {(x2, y2): k for k, (x2, y2, _) in enumerate(sites)}
    qubits = tuple(Qubit(k, (x2 / 2, y2 / 2), o) for k, (x2, y2, o) in enumerate(sites))

    def support(points):
        return frozenset(index[p] for p in points if p in index)

    stars = tuple(
        support([(2 * i, 2 * j + 1), (2 * i, 2 * j - 1), (2 * i - 1, 2 * j), (2 * i + 1, 2 * j)])
        for j in range(1, d)
        for i in range(d)
    )
    plaquettes = tuple(
        support([(2 * i, 2 * j + 1), (2 * i + 2, 2 * j + 1), (2 * i + 1, 2 * j), (2 * i + 1, 2 * j + 2)])
        for j in range(d)
        for i in range(d - 1)
    )
    # Z string up the left smooth edge, X string across the bottom row of faces
    gamma = support([(0, 2 * j + 1) for j in range(d)])
    big_gamma = support([(2 * i, 1) for i in range(d)])

    masks = tuple(sum(1 << q for q in p) for p in plaquettes)
    return CodeLayout(d, qubits, stars, plaquettes, big_gamma, gamma, masks)


def overlap_parity(a: Iterable[int], b: Iterable[int]) -> str:
    """``"even"`` or ``"odd"`` according to the size of the intersection."""
    return "odd" if len(set(a) & set(b)) % 2 else "even"


def check_layout(layout: CodeLayout) -> list[str]:
    """Return every violated layout invariant (empty list when valid)."""
    d = layout.distance
    problems = []
    if layout.n_qubits != d * d + (d - 1) ** 2:
        problems.append("qubit count")
    if len(layout.stars) != d * (d - 1) or len(layout.plaquettes) != d * (d - 1):
        problems.append("stabilizer count")
    for s in layout.stars + layout.plaquettes:
        if len(s) not in (3, 4):
            problems.append(f"stabilizer weight {len(s)}")
    for s in layout.stars:
        for p in layout.plaquettes:
            if overlap_parity(s, p) == "odd":
                problems.append("star/plaquette anticommute")
    # X-type string must commute with the Z-type checks and vice versa
    for p in layout.plaquettes:
        if overlap_parity(layout.logical_x_support, p) == "odd":
            problems.append("logical X anticommutes with a plaquette")
    for s in layout.stars:
        if overlap_parity(layout.logical_z_support, s) == "odd":
            problems.append("logical Z anticommutes with a star")
    if overlap_parity(layout.logical_x_support, layout.logical_z_support) != "odd":
        problems.append("logical operators commute")
    if len(layout.logical_x_support) != d or len(layout.logical_z_support) != d:
        problems.append("logical weight")
    return problems


def _subset_mask(layout: CodeLayout, subset) -> int:
    if isinstance(subset, (int, np.integer)) and not isinstance(subset, bool):
        mask = int(subset)
        if mask < 0 or mask >> layout.n_plaquettes:
            raise InvalidParameter(f"subset bit-set {mask:#x} indexes missing plaquettes")
        return mask
    mask = 0
    for p in subset:
        if not 0 <= p < layout.n_plaquettes:
            raise InvalidParameter(f"plaquette index {p} out of range")
        mask ^= 1 << p
    return mask


def flip_set(layout: CodeLayout, subset, sector=Sector.PLUS) -> frozenset[int]:
    mask = _subset_mask(layout, subset)
    bits = 0
    p = 0
    while mask:
        if mask & 1:
            bits ^= layout._plaquette_masks[p]
        mask >>= 1
        p += 1
    if Sector.parse(sector) is Sector.MINUS:
        for q in layout.logical_z_support:
            bits ^= 1 << q
    return frozenset(q for q in range(layout.n_qubits) if bits >> q & 1)


@dataclass(frozen=True)
class SectorConfig:
    subset: int
    sector: Sector
    spins: np.ndarray = field(compare=False)
    distance: int = 0


def spin_config(layout: CodeLayout, subset, sector=Sector.PLUS) -> SectorConfig:
    """Spin assignment ``(-1)**[q in flip set]`` for a plaquette subset.

    ``subset`` is either an int bit-set or an iterable of plaquette indices.
    """
    sector = Sector.parse(sector)
    mask = _subset_mask(layout, subset)
    spins = np.ones(layout.n_qubits, dtype=np.int8)
    for q in flip_set(layout, mask, sector):
        spins[q] = -1
    spins.setflags(write=False)
    return SectorConfig(mask, sector, spins, layout.distance)
