"""End-to-end acceptance checks; each test prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
without ``-s``).
"""

import math
import time
import warnings

import numpy as np
import pytest

from surfcorr.coupling import FullOhmic, NearestNeighbor, StripedOhmic, build_coupling
from surfcorr.exact import exact_curve, ground_state, sector_sums
from surfcorr.geometry import Sector, build_layout
from surfcorr.loops import bulk_neighbor_count, enumerate_polygons, estimate_mu
from surfcorr.montecarlo import McParams, mc_estimate
from surfcorr.threshold import FidelityCurve, find_crossing

from conftest import naive_energy, naive_flip_set

import itertools

PREDICTOR_NN = math.log(2.638) / 8
ALL_MODELS = [NearestNeighbor(1.0), StripedOhmic(1.0, 1.2), FullOhmic(1.5), FullOhmic(1.5, True)]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
    return emit


def _coupled(d, model):
    layout = build_layout(d)
    return layout, build_coupling(layout, model)


def _curve(d, model, betas):
    layout, coupling = _coupled(d, model)
    return FidelityCurve.from_exact(d, model.describe(), exact_curve(layout, coupling, betas))


def test_c1_zero_coupling_identity(report):
    exact_curve(*_coupled(2, NearestNeighbor()), [0.0])  # compile outside the timer
    t0 = time.perf_counter()
    worst = 0.0
    for model in ALL_MODELS:
        for d in range(1, 6):
            worst = max(worst, abs(exact_curve(*_coupled(d, model), [0.0])[0].fidelity - 1))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-12 and elapsed < 1.0
    report(1, ok, f"max |F(0)-1| = {worst:.1e} over 4 models x d=1..5 in {elapsed:.2f} s")
    assert worst < 1e-12
    assert elapsed < 1.0


def test_c2_gray_code_matches_naive(report):
    rng = np.random.default_rng(2024)
    betas = np.sort(rng.uniform(0, 1, 20))
    t0 = time.perf_counter()
    worst = 0.0
    for d in (1, 2, 3):
        for model in ALL_MODELS:
            layout, coupling = _coupled(d, model)
            sums = exact_curve(layout, coupling, betas)
            for minus in (False, True):
                energies = np.array([
                    naive_energy(layout, coupling, naive_flip_set(layout, subset, minus))
                    for k in range(layout.n_plaquettes + 1)
                    for subset in itertools.combinations(range(layout.n_plaquettes), k)
                ])
                for b, s in zip(betas, sums):
                    ref = complex(np.sum(np.exp(-b * energies)))
                    got = s.t_minus if minus else s.t_plus
                    worst = max(worst, abs(got - ref) / abs(ref))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 10
    report(2, ok, f"max relative error {worst:.1e} on d<=3, 20 betas, in {elapsed:.2f} s")
    assert worst < 1e-10
    assert elapsed < 10


@pytest.mark.slow
def test_c3_monte_carlo_matches_exact(report):
    params = McParams(sweeps=1_000_000, chains=4, seed=12345)
    betas = [0.05, 0.10, 0.15, 0.20]
    t0 = time.perf_counter()
    lines = []
    ok = True
    for d in (3, 4):
        layout, coupling = _coupled(d, NearestNeighbor(1.0))
        exact = exact_curve(layout, coupling, betas)
        for b, ref in zip(betas, exact):
            est = mc_estimate(layout, coupling, b, params)
            dev = abs(est.ratio - ref.ratio.real)
            good = dev < 3 * est.ratio_stderr and est.ratio_stderr <= 0.01
            ok &= good
            lines.append(f"d={d} b={b}: R={est.ratio:.5f}+-{est.ratio_stderr:.1e} exact={ref.ratio.real:.5f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    report(3, ok, f"{len(lines)} points in {elapsed:.0f} s; " + "; ".join(lines))
    assert ok


def test_c4_large_beta_limit(report):
    rows = []
    checked = 0
    for d in (2, 3, 4):
        layout, coupling = _coupled(d, NearestNeighbor(1.0))
        gs = ground_state(layout, coupling)
        s = sector_sums(layout, coupling, 5.0)
        sector = gs.sector.name if gs.unique_to_one_sector else "both"
        rows.append(f"d={d} ground state in {sector}, F={s.fidelity:.9f}, F^2={s.fidelity_squared:.9f}")
        if gs.unique_to_one_sector:
            checked += 1
            assert s.fidelity == pytest.approx(1 / math.sqrt(2), abs=1e-6)
            assert s.fidelity_squared == pytest.approx(0.5, abs=1e-6)
    report(4, checked >= 1, "; ".join(rows))
    assert checked >= 1


def test_c5_connective_constant(report):
    t0 = time.perf_counter()
    est = estimate_mu(enumerate_polygons(14))
    elapsed = time.perf_counter() - t0
    ok = 2.5 <= est.mu <= 2.75 and elapsed < 60
    report(5, ok, f"mu_hat(14) = {est.mu:.4f} (raw ratio {est.raw_mu:.4f}) in {elapsed:.2f} s")
    assert 2.5 <= est.mu <= 2.75
    assert elapsed < 60


def test_c6_threshold_consistency(report):
    betas = np.round(np.arange(0, 0.4001, 0.002), 12)
    t0 = time.perf_counter()
    curves = {d: _curve(d, NearestNeighbor(1.0), betas) for d in (3, 4, 5)}
    crossings = {pair: find_crossing(curves[pair[0]], curves[pair[1]]).beta_c
                 for pair in itertools.combinations((3, 4, 5), 2)}
    elapsed = time.perf_counter() - t0
    values = list(crossings.values())
    within_predictor = all(PREDICTOR_NN / 2 <= b <= 2 * PREDICTOR_NN for b in values)
    mutual = max(values) / min(values)
    ok = within_predictor and mutual <= 1.5 and elapsed < 600
    text = ", ".join(f"{p}: {b:.4f}" for p, b in crossings.items())
    report(6, ok, f"crossings {text}; predictor {PREDICTOR_NN:.4f}; max ratio {mutual:.3f}")
    assert within_predictor
    assert mutual <= 1.5
    assert elapsed < 600


def test_c7_scaling_covariance(report):
    betas = np.linspace(0, 1, 21)
    worst = 0.0
    for d in (1, 2, 3):
        for J in (0.5, 1.0):
            layout = build_layout(d)
            for model, scaled in ((NearestNeighbor(J), NearestNeighbor(10 * J)),
                                  (StripedOhmic(J, 1.2), StripedOhmic(10 * J, 1.2))):
                ref = exact_curve(layout, build_coupling(layout, model), betas)
                got = exact_curve(layout, build_coupling(layout, scaled), betas / 10)
                worst = max(worst, max(abs(a.fidelity - b.fidelity) for a, b in zip(ref, got)))
    report(7, worst < 1e-10, f"max |F(J, b) - F(10J, b/10)| = {worst:.1e} on d<=3")
    assert worst < 1e-10


def test_c8_range_dependence(report):
    betas = np.round(np.arange(0, 0.4001, 0.002), 12)
    measured = []
    for rng in (math.sqrt(0.5) + 1e-6, math.sqrt(10) / 2 + 1e-6):
        model = StripedOhmic(1.0, rng)
        c = find_crossing(_curve(3, model, betas), _curve(4, model, betas))
        measured.append((bulk_neighbor_count(model), c.beta_c))
    (n1, b1), (n2, b2) = measured
    ok = n2 > n1 and b2 < b1
    report(8, ok, f"n={n1}: beta_c={b1:.4f}; n={n2}: beta_c={b2:.4f} (d=3 vs 4)")
    assert n2 > n1
    assert b2 < b1


def test_c9_imaginary_part_soft(report):
    violations = []
    checked = 0
    for d in (2, 3):
        for vdelta in (0.5, 1.0, 1.5, 3.0):
            real = exact_curve(*_coupled(d, FullOhmic(vdelta)), [0.05, 0.1, 0.2])
            cplx = exact_curve(*_coupled(d, FullOhmic(vdelta, True)), [0.05, 0.1, 0.2])
            for a, b in zip(real, cplx):
                checked += 1
                if b.fidelity > a.fidelity + 1e-12:
                    violations.append(f"d={d} range={vdelta} b={a.beta}: {b.fidelity:.6f} > {a.fidelity:.6f}")
    if violations:
        warnings.warn("imaginary part raised the fidelity: " + "; ".join(violations))
    detail = f"{checked - len(violations)}/{checked} points with F_imag <= F_real"
    report(9, True, detail + ("; soft violations: " + "; ".join(violations) if violations else ""))
