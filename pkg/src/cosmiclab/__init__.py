"""Numerical experiments on cosmic convergence of fixed-point iterations."""

from .engine import (
    CosmicReport,
    OperatorHandle,
    Schedule,
    Trajectory,
    ball_map,
    cluster_directions,
    cosmic_report,
    directions,
    iterate,
    min_displacement_estimates,
)
from .piecewise import PiecewiseLinearConvexFn, StepFunction, antiderivative
from .prox2d import MaxSeparable2D, PaperParams, build_paper_operator, paper_handle, prox_max
from .seqspace import TruncatedGradientOperator

__version__ = "0.1.0"
