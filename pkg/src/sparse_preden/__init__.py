"""Sparse minimax predictive density estimation in the Gaussian sequence model."""

__version__ = "0.1.0"

from .gaussian_core import QuadratureSpec, default_quad
from .problem import (
    InsufficientSparsityError,
    PredictionProblem,
    build_problem,
    multivariate_problem,
)
from .priors import (
    DiscretePrior,
    cluster_prior,
    k_count_limit,
    three_point_lf,
    two_point,
    zero_prior,
)
from .estimators import (
    MLE,
    BayesDiscrete,
    GaussianPair,
    HardThreshold,
    Linear,
    PlugIn,
    PosteriorMean,
    Product,
    Threshold,
    Uniform,
    make_threshold_cluster,
    make_threshold_lf,
    make_threshold_zero,
)
from .risk import (
    RiskCurve,
    bayes_risk_sparse_class,
    connecting_equation_rhs,
    kl_loss,
    kl_risk,
    risk_curve,
    risk_decomposition,
    sup_risk,
)
from .minimax import MinimaxSummary, asymptotic_minimax
from .kernels import BACKEND
