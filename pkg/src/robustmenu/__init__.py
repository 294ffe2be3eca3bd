"""Robust selling mechanisms with small menus under market ambiguity.

Synthesis (closed forms, finite linear programs, grid search), independent
adversarial certification, and empirical evaluation of randomized
posted-price mechanisms when only partial information about the buyer's
valuation distribution is available.
"""

__version__ = "0.1.0"

from .ambiguity import (
    AmbiguitySet,
    make_standard_set,
    mean_set,
    merged_grid,
    multisegment_set,
    phi_eval,
    quantile_set,
    segmented_mean_set,
    support_set,
)
from .adversary import (
    WorstCaseCertificate,
    worst_case_alpha_metric,
    worst_case_meanvar,
    worst_case_ratio,
)
from .closed_form import (
    LinearPaymentMechanism,
    MeanTwoLevel,
    QuantileInfMechanism,
    maximin_revenue_inf,
    maximin_revenue_optimal,
    mean_one_level,
    mean_two_level,
    meanvar_ratio_lower_bound,
    meanvar_two_level_approx,
    minimax_regret_one_level,
    quantile_inf,
    quantile_one_level,
    quantile_two_level,
    support_inf_ratio,
    support_levels_ratio,
    support_optimal,
)
from .core import (
    DiscreteDistribution,
    GridPoint,
    Mechanism,
    RatioResult,
    Side,
    StepPayment,
    canonicalize,
    payment_at,
)
from .errors import (
    DomainError,
    InconsistentAmbiguityError,
    NumericError,
    RobustMenuError,
)
from .evaluate import (
    BetaDistribution,
    cdf,
    optimal_posted_revenue,
    performance_ratio,
    quantile_of,
    revenue_under,
)
from .lp import LinearProgram, LpSolution, SolveStatus, solve_lp
from .ratio_lp import (
    RatioLpLayout,
    build_alpha_metric_lp,
    build_maximin_revenue_lp,
    build_ratio_lp,
    solve_alpha_metric_given_prices,
    solve_maximin_revenue_given_prices,
    solve_ratio_given_prices,
)
from .search import approx_inf_level, best_n_level
