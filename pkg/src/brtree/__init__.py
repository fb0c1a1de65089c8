"""Recursive trees grown from riffle-shuffle permutations.

Construction, statistics, closed-form moments, an exhaustive-enumeration oracle and a
Monte Carlo engine.  See the README for the command-line interface.
"""

__version__ = "0.1.0"

from .errors import (BRTreeError, DomainError, InvariantViolation, ResourceLimitError,  # noqa: E402
                     UsageError, ValidationError)
from .shuffle import (DigitWord, ProbabilityVector, ShufflePermutation,  # noqa: E402
                      permutation_from_digits, sample_digit_word, sample_forward_shuffle)
from .tree import RecursiveTree, permutation_from_tree, tree_from_permutation  # noqa: E402
from .statistics import Statistic, tree_statistics  # noqa: E402
from .formulas import MomentReport, moment_report  # noqa: E402
from .oracle import (DistributionTable, exact_brt_distribution, exact_tv_distance,  # noqa: E402
                     exact_urt_distribution, oracle_covariance_check)
from .montecarlo import (clt_check, convergence_sweep, estimate_moments,  # noqa: E402
                         strong_law_trajectory)

__all__ = [
    "BRTreeError", "DomainError", "InvariantViolation", "ResourceLimitError", "UsageError",
    "ValidationError", "DigitWord", "ProbabilityVector", "ShufflePermutation",
    "permutation_from_digits", "sample_digit_word", "sample_forward_shuffle", "RecursiveTree",
    "permutation_from_tree", "tree_from_permutation", "Statistic", "tree_statistics",
    "MomentReport", "moment_report", "DistributionTable", "exact_brt_distribution",
    "exact_tv_distance", "exact_urt_distribution", "oracle_covariance_check", "clt_check",
    "convergence_sweep", "estimate_moments", "strong_law_trajectory",
]
