"""Beta-expansions, Psi-approximation and Bernoulli convolution densities for Garsia numbers."""

from .algebraic import GarsiaCertificate, IntPolynomial, RejectionReason, all_roots, certify_garsia, parse_polynomial
from .approx import PsiSpec, construct_expansion, decay_constant, divergence_partial_sum, hit_depths, level_report
from .density import compare_densities, estimate_density_mc, estimate_density_prefix
from .errors import BetaError
from .expansion import (BetaContext, count_prefixes, enumerate_prefixes, extremal_expansion, is_prefix, min_gap,
                        unique_to_depth)
from .experiment import contrast_summary, coverage_experiment

__all__ = [
    "BetaContext", "BetaError", "GarsiaCertificate", "IntPolynomial", "PsiSpec", "RejectionReason",
    "all_roots", "certify_garsia", "compare_densities", "construct_expansion", "contrast_summary",
    "count_prefixes", "coverage_experiment", "decay_constant", "divergence_partial_sum",
    "enumerate_prefixes", "estimate_density_mc", "estimate_density_prefix", "extremal_expansion",
    "hit_depths", "is_prefix", "level_report", "min_gap", "parse_polynomial", "unique_to_depth",
]
__version__ = "0.1.0"
