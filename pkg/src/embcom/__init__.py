"""Scatterer-position channel analysis.

A point scatterer placed on a distant controllable plane imprints its position
on the covariance of a multi-snapshot array observation.  This package maps
that sensing geometry end to end: the pairwise reliability field over
displacements, lattice codebooks packed against the field's forbidden region,
information-theoretic and geometric converses, and a Monte Carlo simulator
that validates every analytic bound.
"""

from .arrays import (ArrayConfig, Displacement, Position, SceneConfig,
                     position_to_angles, steering_correlation_exact,
                     steering_vector)
from .bounds import (BoundReport, binary_entropy, compute_bounds, geo_bound,
                     geo_bound_mainlobe, info_bound_support,
                     info_bound_universal, optimal_snapshots)
from .codebook import (Codebook, DesignReport, LatticeGenerator,
                       greedy_packing_baseline, hexagonal_design, lambert_w0,
                       make_codebook, truncate_lattice, verify_codebook)
from .field import (QuadraticFieldParams, b_codebook, b_necessary, b_required,
                    bhattacharyya_exact, bhattacharyya_quadratic,
                    forbidden_region_contains, necessary_separation_dnec,
                    pairwise_error_bound, quadratic_params)
from .simulate import (SimReport, SnapshotBatch, draw_channel_use,
                       estimate_errors, ml_decode)
from .sweep import lstar_sweep, rate_sweep

__version__ = "0.1.0"
