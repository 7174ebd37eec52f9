"""Self-avoiding polygon census on the square lattice and threshold predictors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .coupling import CouplingMatrix, FullOhmic, NearestNeighbor, StripedOhmic, build_coupling
from .errors import InvalidParameter, NoPredictor
from .geometry import CodeLayout, build_layout

MAX_CENSUS_LENGTH = 18
MU_SQUARE = 2.638

_DX = np.array([1, 0, -1, 0], dtype=np.int64)
_DY = np.array([0, 1, 0, -1], dtype=np.int64)


@numba.njit(cache=True)
def _anchored_walks(max_len, dx, dy):
    # closed walks from the origin that stay on vertices lexicographically
    # above it; every polygon shows up once per orientation
    r = max_len // 2 + 1
    width = 2 * r + 1
    visited = np.zeros((width, r + 1), dtype=np.bool_)
    counts = np.zeros(max_len + 1, dtype=np.int64)
    xs = np.zeros(max_len + 1, dtype=np.int64)
    ys = np.zeros(max_len + 1, dtype=np.int64)
    nxt = np.zeros(max_len + 1, dtype=np.int64)
    visited[r, 0] = True
    depth = 0
    while depth >= 0:
        if nxt[depth] == 4:
            visited[xs[depth] + r, ys[depth]] = False
            depth -= 1
            continue
        k = nxt[depth]
        nxt[depth] += 1
        x = xs[depth] + dx[k]
        y = ys[depth] + dy[k]
        steps = depth + 1
        if x == 0 and y == 0:
            if steps >= 4:
                counts[steps] += 1
            continue
        if y < 0 or (y == 0 and x < 0):
            continue
        if steps >= max_len or abs(x) + y > max_len - steps:
            continue
        if visited[x + r, y]:
            continue
        visited[x + r, y] = True
        depth += 1
        xs[depth] = x
        ys[depth] = y
        nxt[depth] = 0
    # the origin was marked visited at depth 0 and cleared on the final pop
    return counts


@dataclass(frozen=True)
class PolygonCensus:
    counts: dict[int, int]
    max_len: int

    def rows(self):
        return sorted(self.counts.items())


def enumerate_polygons(max_len: int) -> PolygonCensus:
    """Polygons per site by perimeter, rotations and reflections counted apart."""
    if isinstance(max_len, bool) or int(max_len) != max_len:
        raise InvalidParameter(f"max_len must be an integer, got {max_len!r}")
    max_len = int(max_len)
    if max_len % 2 or not 4 <= max_len <= MAX_CENSUS_LENGTH:
        raise InvalidParameter(f"max_len must be even and within [4, {MAX_CENSUS_LENGTH}]")
    walks = _anchored_walks(max_len, _DX, _DY)
    return PolygonCensus({ell: int(walks[ell]) // 2 for ell in range(4, max_len + 1, 2)}, max_len)


@dataclass(frozen=True)
class MuEstimate:
    mu: float
    raw_mu: float
    ratios: dict[int, float]


def estimate_mu(census: PolygonCensus) -> MuEstimate:
    """Connective constant from successive count ratios.

    ``c(l) / c(l-2)`` approaches ``mu**2`` with ``1/l`` corrections; the last
    three ratios are fit by ``a + b/l + c/l**2`` and ``mu = sqrt(a)``. With only
    two ratios the fit drops the quadratic term.
    """
    lengths = sorted(census.counts)
    if len(lengths) < 3:
        raise InvalidParameter("need at least three perimeter values to estimate mu")
    ratios = {
        b: census.counts[b] / census.counts[a]
        for a, b in zip(lengths, lengths[1:])
    }
    tail = sorted(ratios)[-3:]
    x = np.array([1.0 / ell for ell in tail])
    y = np.array([ratios[ell] for ell in tail])
    powers = np.vander(x, len(tail), increasing=True)
    coeffs = np.linalg.solve(powers, y)
    raw = math.sqrt(ratios[lengths[-1]])
    return MuEstimate(math.sqrt(coeffs[0]), raw, ratios)


def neighbor_count(layout: CodeLayout, model: StripedOhmic) -> int:
    """Coupling degree of the best-connected qubit in ``layout``."""
    coupling = build_coupling(layout, StripedOhmic(1.0, model.range))
    return int(coupling.degree().max()) if coupling.n_qubits else 0


def bulk_neighbor_count(model: StripedOhmic) -> int:
    """Degree of a qubit far from every boundary."""
    d = 2 * int(math.ceil(model.range)) + 3
    return neighbor_count(build_layout(d), model)


def predict_beta_c(model, mu: float = MU_SQUARE, n: int | None = None) -> float:
    """Loop-entropy estimate of the threshold.

    Nearest neighbours: ``ln(mu) / (8 J)``. Striped range model with ``n``
    coupled sites: ``ln(mu) / (n J)``. The two are not mutually consistent at
    ``n = 4``; both are reported as given.
    """
    if isinstance(model, CouplingMatrix):
        model = model.model
    if isinstance(model, FullOhmic):
        raise NoPredictor("no loop-entropy threshold when every pair interacts")
    if mu <= 1:
        raise InvalidParameter("mu must exceed 1")
    if model.J <= 0:
        raise InvalidParameter("J must be positive")
    if isinstance(model, NearestNeighbor):
        return math.log(mu) / (8 * model.J)
    if isinstance(model, StripedOhmic):
        if n is None:
            n = bulk_neighbor_count(model)
        if n < 1:
            raise InvalidParameter("striped model couples no neighbours")
        return math.log(mu) / (n * model.J)
    raise InvalidParameter(f"unsupported model {model!r}")
