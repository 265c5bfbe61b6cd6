"""nevlab: a numerical laboratory for value-distribution theory.

Tools for meromorphic/holomorphic curve growth (order functions, proximity,
counting functions), covariant-derivative Wronskians on projective space and
on the product of two lines, zero localization by the argument principle, and
desk-scale verification of second-main-theorem style inequalities.
"""

from .exprlang import (
    Expr,
    ExprError,
    ExtendedComplex,
    MeromorphicFn,
    ParseError,
    compile_expr,
    differentiate,
    evaluate,
    evaluate_expr,
    format_expr,
    normalize,
    parse,
    to_meromorphic,
)
from .geometry import (
    BallBergman,
    BoundaryComponent,
    DivisorSpec,
    GeometryError,
    Hyperplane,
    P1xP1Flat,
    ProjectiveFS,
    TorusCurve,
    christoffel_at,
    christoffel_derivative_at,
    general_position_check,
    is_totally_geodesic,
    metric_at,
)
from .jets import (
    CurveMap,
    JetFrame,
    JetsError,
    XiValue,
    choose_chart,
    covariant_jets,
    cr_residual,
    wronskian,
    wronskian_in_chart,
    xi_at,
    xi_on_points,
)
from .rootcount import (
    Disc,
    RootCountError,
    WindingConvergenceError,
    ZeroSet,
    N_trunc,
    locate_zeros,
    n_trunc,
    winding_number,
)
from .growth import (
    GrowthError,
    GrowthTable,
    LineBundle,
    QuadratureError,
    SfrModel,
    canonical_bundle,
    circle_mean,
    fit_sfr,
    jensen_residual,
    log_plus_xi_mean,
    order_function,
    proximity,
)
from .smt import (
    DegeneracyVerdict,
    HypothesisError,
    SmtError,
    SmtReport,
    check_cartan,
    check_general,
    check_smt7,
    condition_check_smt7,
    degeneracy_probe,
    pullback_entire,
)
from .cli import main, run_scenario, verify_suite

__version__ = "0.1.0"
