"""Schrödinger operators on weighted graphs: criticality, Green functions,
ground states, bottom of the spectrum, Harnack constants and heat kernels,
computed on finite truncations of (possibly infinite) locally finite graphs.
"""

from .errors import (
    ConvergenceError,
    DefinitenessError,
    DegenerateWeightError,
    DomainError,
    FormNotNonnegativeError,
    HarnackSizeError,
    NoMinimalGreenError,
    PreconditionError,
    SGLError,
    SpectralParameterError,
    UnsupportedPresentationError,
)
from .graph import (
    ExhaustionFamily,
    FiniteRegion,
    GraphModel,
    ValidationReport,
    default_family,
    from_edges,
    from_weights,
    graph_ball,
    halfline,
    halfline_dirichlet,
    lattice,
    materialize,
    region,
    tree,
    validate,
    weighted_degree,
)
from .forms import (
    ExtendedFormValue,
    RegionFunction,
    apply_H,
    extended_form,
    gst_form,
    gst_identity_residual,
    quad_form,
)
from .solver import (
    DirichletSystem,
    EigenPair,
    assemble,
    generalized_bottom,
    generalized_lambda_min,
    heat_apply,
    lambda_min,
    resolvent_apply,
    solve,
    solve_green,
    spectrum,
)
from .criticality import (
    ClassificationReport,
    DecisionRule,
    EvidenceSeries,
    capacity_series,
    classify,
    green_series,
    ground_state,
    minimal_green,
    null_sequence,
    uniform_subcriticality_probe,
    weight_criticality,
    weight_nonneg_series,
)
from .spectral import (
    HarnackInstance,
    ap_witness,
    harnack_constant,
    lambda0_ess_probe,
    lambda0_series,
)
from .heat import (
    heat_gs_limit,
    heat_kernel,
    lambda_green_limit,
    log_heat_kernel,
    long_time_rate,
)
from .oracle import (
    dense_green,
    dense_spectrum,
    lattice_green_quadrature,
    random_test_graph,
    rw_return_estimate,
)

__version__ = "0.1.0"
