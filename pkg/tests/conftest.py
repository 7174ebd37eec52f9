import itertools
import math

import numpy as np
import pytest

from surfcorr.geometry import build_layout


@pytest.fixture(scope="session")
def layouts():
    return {d: build_layout(d) for d in range(1, 7)}


def naive_flip_set(layout, subset, minus):
    """Symmetric difference of plaquette supports using Python sets only."""
    out = set()
    for p in subset:
        out ^= set(layout.plaquettes[p])
    if minus:
        out ^= set(layout.logical_z_support)
    return out


def naive_energy(layout, coupling, flipped):
    """Pair-by-pair energy from the dense matrix, no incremental updates."""
    spins = [-1 if q in flipped else 1 for q in range(layout.n_qubits)]
    dense = coupling.dense()
    e = 0j
    for r in range(layout.n_qubits):
        for s in range(r + 1, layout.n_qubits):
            e += dense[r, s] * spins[r] * spins[s]
    return e


def naive_sector_sum(layout, coupling, beta, minus):
    total = 0j
    plaq = range(layout.n_plaquettes)
    for k in range(layout.n_plaquettes + 1):
        for subset in itertools.combinations(plaq, k):
            e = naive_energy(layout, coupling, naive_flip_set(layout, subset, minus))
            total += complex(np.exp(-beta * e))
    return total


def geometric_pairs(layout, radius, tol=1e-9):
    pos = layout.positions
    pairs = set()
    for r in range(layout.n_qubits):
        for s in range(r + 1, layout.n_qubits):
            if abs(math.dist(pos[r], pos[s]) - radius) < tol:
                pairs.add((r, s))
    return pairs
