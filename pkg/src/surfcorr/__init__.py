"""Surface-code fidelity under bath-correlated bit flips via restricted sector sums."""

__version__ = "0.1.0"

from .coupling import (
    BathParams,
    CouplingMatrix,
    FullOhmic,
    NearestNeighbor,
    StripedOhmic,
    beta_from_bath,
    boundary_field,
    build_coupling,
    gauge_transform,
    ohmic_phi,
)
from .exact import SectorSums, energy, exact_curve, fidelity_from_sums, ground_state, sector_sum, sector_sums
from .geometry import CodeLayout, Sector, SectorConfig, build_layout, overlap_parity, spin_config
from .loops import PolygonCensus, enumerate_polygons, estimate_mu, neighbor_count, predict_beta_c
from .montecarlo import McEstimate, McParams, mc_curve, mc_estimate
from .threshold import CrossingEstimate, FidelityCurve, find_crossing, threshold_report
