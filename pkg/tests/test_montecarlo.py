import numpy as np
import pytest

from surfcorr.coupling import FullOhmic, NearestNeighbor, StripedOhmic, build_coupling
from surfcorr.errors import ComplexWeightsUnsupported, InvalidParameter
from surfcorr.exact import exact_curve
from surfcorr.geometry import Sector, build_layout, spin_config
from surfcorr.montecarlo import McParams, _run_chain, mc_curve, mc_estimate


def test_params_defaults_and_validation():
    p = McParams(sweeps=1000)
    assert p.burn_in == 100 and p.bins == 32
    for bad in (dict(sweeps=10, burn_in=10), dict(sweeps=100, bins=1), dict(sweeps=0),
                dict(sweeps=100, chains=0), dict(sweeps=100, seed=-1)):
        with pytest.raises(InvalidParameter):
            McParams(**bad)


def test_beta_zero_is_uniform_over_sectors():
    layout = build_layout(3)
    c = build_coupling(layout, NearestNeighbor(1.0))
    est = mc_estimate(layout, c, 0.0, McParams(sweeps=20_000, seed=3, chains=2))
    assert abs(est.ratio - 1) < 3 * est.ratio_stderr
    assert abs(est.fidelity - 1) < 3 * est.fidelity_stderr + 1e-12
    assert est.acceptance["plaquette"] == est.acceptance["sector"] == 1.0


def test_complex_coupling_rejected():
    layout = build_layout(2)
    c = build_coupling(layout, FullOhmic(1.5, include_imaginary=True))
    with pytest.raises(ComplexWeightsUnsupported):
        mc_estimate(layout, c, 0.1, McParams(sweeps=100))


@pytest.mark.parametrize("d", [2, 3])
def test_matches_exact_at_moderate_statistics(d):
    layout = build_layout(d)
    c = build_coupling(layout, StripedOhmic(1.0, 1.6))
    betas = [0.05, 0.15]
    exact = exact_curve(layout, c, betas)
    for ex, est in zip(exact, mc_curve(layout, c, betas, McParams(sweeps=100_000, seed=11, chains=2))):
        assert abs(est.ratio - ex.ratio.real) < 4 * est.ratio_stderr
        assert abs(est.fidelity - ex.fidelity) < 4 * est.fidelity_stderr + 1e-9


def test_same_seed_reproduces_bitwise():
    layout = build_layout(3)
    c = build_coupling(layout, NearestNeighbor(1.0))
    a = _run_chain(layout, c, 0.2, 5000, seed=2**63 + 7)
    b = _run_chain(layout, c, 0.2, 5000, seed=2**63 + 7)
    assert np.array_equal(a.minus, b.minus)
    assert np.array_equal(a.spins, b.spins)
    p = McParams(sweeps=5000, seed=9, chains=3)
    assert mc_estimate(layout, c, 0.2, p) == mc_estimate(layout, c, 0.2, p)


def test_threaded_and_serial_chains_agree():
    layout = build_layout(3)
    c = build_coupling(layout, NearestNeighbor(1.0))
    serial = mc_estimate(layout, c, 0.1, McParams(sweeps=4000, seed=5, chains=3, workers=1))
    threaded = mc_estimate(layout, c, 0.1, McParams(sweeps=4000, seed=5, chains=3, workers=3))
    assert serial == threaded


def test_curve_is_concatenation_of_independent_points():
    layout = build_layout(2)
    c = build_coupling(layout, NearestNeighbor(1.0))
    p = McParams(sweeps=3000, seed=1)
    whole = mc_curve(layout, c, [0.1, 0.2, 0.3], p)
    parts = mc_curve(layout, c, [0.1], p) + mc_curve(layout, c, [0.2, 0.3], p)
    assert whole == parts
    assert mc_curve(layout, c, [0.2], p) == [mc_estimate(layout, c, 0.2, p)]


@pytest.mark.parametrize("d", [2, 3, 4])
def test_incremental_energy_never_drifts(d):
    layout = build_layout(d)
    for model in (NearestNeighbor(1.0), FullOhmic(2.0, False)):
        c = build_coupling(layout, model)
        res = _run_chain(layout, c, 0.3, 2000, seed=d, check=True)
        assert res.max_drift < 1e-9
        spins = res.spins
        direct = float(np.sum(c.values.real * spins[c.rows] * spins[c.cols]))
        assert res.energy == pytest.approx(direct, abs=1e-9)


def test_final_state_lies_in_the_recorded_sector():
    layout = build_layout(3)
    c = build_coupling(layout, NearestNeighbor(1.0))
    res = _run_chain(layout, c, 0.15, 777, seed=4)
    sector = Sector.MINUS if res.minus_final else Sector.PLUS
    states = {spin_config(layout, m, sector).spins.tobytes() for m in range(1 << layout.n_plaquettes)}
    assert res.spins.astype(np.int8).tobytes() in states


def test_any_state_reachable_in_few_moves():
    # each plaquette bit and the sector bit is toggled by exactly one move type
    layout = build_layout(3)
    start = spin_config(layout, 0, Sector.PLUS)
    target = spin_config(layout, 0b101101, Sector.MINUS)
    moves = bin(target.subset).count("1") + 1
    assert moves <= layout.n_plaquettes + 1
    spins = start.spins.copy()
    for p in range(layout.n_plaquettes):
        if target.subset >> p & 1:
            spins[list(layout.plaquettes[p])] *= -1
    spins[list(layout.logical_z_support)] *= -1
    assert np.array_equal(spins, target.spins)


def test_relabelled_plaquettes_same_distribution():
    layout = build_layout(3)
    c = build_coupling(layout, NearestNeighbor(1.0))
    p = McParams(sweeps=100_000, seed=21, chains=2)
    base = mc_estimate(layout, c, 0.15, p)
    perm = list(np.random.default_rng(0).permutation(layout.n_plaquettes))
    relabelled = mc_estimate(layout, c, 0.15, p, plaquette_order=perm)
    sigma = np.hypot(base.ratio_stderr, relabelled.ratio_stderr)
    assert abs(base.ratio - relabelled.ratio) < 3 * sigma
    with pytest.raises(InvalidParameter):
        mc_estimate(layout, c, 0.15, p, plaquette_order=[0, 0, 1, 2, 3, 4])


def test_saturation_is_flagged():
    # at beta=3 the d=3 chain falls into the Minus ground state and stays there
    layout = build_layout(3)
    c = build_coupling(layout, NearestNeighbor(1.0))
    with pytest.warns(RuntimeWarning):
        est = mc_estimate(layout, c, 3.0, McParams(sweeps=3000, burn_in=1000, seed=1))
    assert est.saturated and est.ratio == float("inf")
    assert est.fidelity == pytest.approx(2 ** -0.5)
