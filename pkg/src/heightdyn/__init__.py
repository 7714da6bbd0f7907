"""Exact-arithmetic heights of orbits of planar (piecewise-)affine maps.

Everything is computed over Q with arbitrary-precision rationals; the
only reals are final logarithm evaluations at configurable precision.
"""

from .affine import (
    AffineMap2,
    Matrix2,
    affine_map,
    fixed_point,
    iterate,
    lucas_u,
    lucas_u_closed_form,
    matrix_power,
    orbit,
    orbit_point_closed_form,
    trace_det,
)
from .errors import (
    AperiodicCodeError,
    CertificationError,
    ConfigError,
    FixedPointError,
    HeightDynError,
    InfiniteValuationError,
    PreconditionError,
    SingularMatrixError,
)
from .global_height import (
    GlobalHeightPrediction,
    PrimeFamilies,
    h_star,
    h_star_terms,
    measured_global_height,
    predict_global_height,
    prime_families,
    spectral_log_radius,
)
from .padic import (
    HenselRoot,
    LocalHeightPrediction,
    NewtonPolygonResult,
    ValuationTrace,
    component_valuation_trace,
    eigenline_representative,
    hensel_quadratic_roots,
    is_nondegenerate,
    lag_time,
    measured_local_height,
    near_eigenspace_point,
    newton_valuations,
    predict_local_height,
    valuation_trace,
)
from .phase_module import PhaseModule, build_phase_module, membership
from .piecewise import (
    CodeWord,
    IslandReport,
    PiecewiseMap,
    StripPiece,
    detect_code_period,
    island_report,
    load_map,
    map_from_dict,
    map_to_dict,
    orbit_with_code,
    prime_set,
    return_map,
)
from .rationals import (
    INFINITY,
    Prime,
    bounded_height_points,
    count_points,
    density_estimate,
    format_rational,
    height,
    int_valuation,
    is_prime,
    padic_abs,
    parse_point,
    parse_rational,
    point_height,
    point_padic_abs,
    point_valuation,
    product_formula_defect,
    rationals_up_to_height,
    valuation,
)

__version__ = "0.1.0"
