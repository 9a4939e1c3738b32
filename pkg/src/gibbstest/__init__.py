"""Optimal thresholds and error exponents for tests between two Markov measures."""

from .errors import (
    AllZeroCounts,
    DegenerateHypotheses,
    DimensionMismatch,
    GibbsTestError,
    IdentityViolation,
    InputError,
    InvalidAlternative,
    LambdaOutOfRange,
    NoConvergence,
    NoCrossing,
    NotStochastic,
    NumericError,
    ReducibleChain,
    SlopeOutOfRange,
    TooLarge,
    WordTooShort,
)
from .hypotests import (
    BayesCurvePoint,
    TestPlan,
    bayes_E_lambda,
    bayes_g,
    bayes_lambda_s,
    bayes_plan,
    bayes_rate_sweep,
    chernoff_plan,
    minmax_plan,
    np_compare_alternative,
    np_plan,
)
from .kernels import BACKEND
from .maxplus import CycleMeanResult, Subaction, c_bounds, calibrated_subaction, max_cycle_mean
from .model import (
    MarkovSystem,
    TwoCylinderPotential,
    entropy,
    integrate,
    load_system,
    log_likelihood_ratio,
    markov_system,
    s_n,
    stationary_distribution,
    two_cylinder_measure,
)
from .pressure import (
    EquilibriumState,
    PressureCurve,
    bayes_curve,
    equilibrium_state,
    likelihood_curve,
    pressure,
    pressure_curve,
    pressure_derivative,
)
from .rate import RateFunction, TiltSolution, degenerate_limits, rate_identities_check, rate_value, solve_tilt
from .sim import SimConfig, SimReport, exact_error_probs, mc_error_probs, np_quantile_u_n, sample_path

__version__ = "0.1.0"
