"""Completion-time distributions and bounds for tree-structured
entanglement-distribution protocols built from GENERATE and
RESTART-UNTIL-SUCCESS steps.

Modules
-------
distributions   truncated PMF arithmetic (convolution, max, geometric compound)
protocol        protocol trees, JSON format, repeater / switch builders
exact_engine    exact completion-time law of a tree
montecarlo      direct simulation
bounds          closed-form mean and tail bounds
nbu_checks      NBU / dominance / min-mean checks on truncated laws
cli             command-line front end
"""

__version__ = "0.1.0"

from .distributions import (ExpCurve, MeanInterval, Pmf, co_cdf, convolve, exp_co_cdf,
                            geometric_compound, geometric_pmf, max_of, mean, point_mass)
from .protocol import (ProtocolNode, RepeaterSpec, SwitchSpec, build_repeater,
                       build_switch, distill, generate, parse_protocol, rus,
                       serialize_protocol)
from .exact_engine import ExactResult, completion_pmf, mean_of
from .montecarlo import SimEstimate, estimate, sample_completion
from .bounds import BoundReport, TailCurve, repeater_bounds, switch_bounds
from .nbu_checks import CheckReport, check_dominance, check_min_bound, check_nbu
