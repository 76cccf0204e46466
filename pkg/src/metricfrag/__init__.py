"""Randomized iterative fragmentation of finite metric spaces.

For any target distortion D > 2, fragmentation extracts a subset that is
D-equivalent to an explicitly constructed ultrametric, with expected size
at least n^(1 - beta(2/D)).  The package bundles the solvers for the
guaranteed exponents, the fragmentation procedure itself, exact
embeddability oracles for desk-scale verification, reproducible space
generators, and a CLI harness (``metricfrag``).
"""

from .errors import (
    BadSpec,
    Disconnected,
    DomainError,
    MetricFragError,
    NonTerminating,
    NonzeroDiagonal,
    NotNormalized,
    NotSymmetric,
    ParameterMismatch,
    ParseError,
    SampleCap,
    SinglePoint,
    TooLarge,
    TriangleViolation,
    ZeroOffDiagonal,
)
from .exponents import (
    ExponentSolution,
    IntervalSum,
    beta_equation,
    beta_p,
    beta_p_minimizer,
    interval_sum,
    solve_beta,
    solve_theta,
    sup_interval_sum,
    theta_equation,
)
from .fragmentation import (
    FragmentationResult,
    expected_mass_bound,
    fragment_iterated,
    fragment_once,
    jensen_lower_bound,
    result_to_json,
    ultrametric_of,
    validate_result,
)
from .generators import GeneratorSpec, generate, parse_generator_spec
from .oracle import SubdominantResult, embeddable, max_subset, subdominant_ultrametric
from .radii import (
    RadiiSchedule,
    custom_schedule,
    load_schedule,
    mn07_geometric_schedule,
    optimal_schedule,
    stopping_index,
)
from .spaces import (
    FiniteMetricSpace,
    UltrametricTree,
    ball,
    distortion,
    is_ultrametric_matrix,
    jump_radii,
    make_space,
    normalize,
    parse_matrix_text,
    read_matrix_file,
)

__version__ = "0.1.0"
